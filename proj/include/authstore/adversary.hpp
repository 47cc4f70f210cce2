#pragma once

#include "authstore/group.hpp"
#include "authstore/pake.hpp"
#include "authstore/stretch.hpp"
#include "authstore/transport.hpp"

#include <atomic>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <thread>
#include <vector>

namespace authstore {

/// Frame-level transcript tampering. message_index counts frames in
/// transcript order (M1 = 0, M2 = 1, ...), applied at most once per
/// position.
struct TamperRule {
    enum class Kind { None, WeakenParams, FlipByte };

    Kind kind = Kind::None;
    std::uint32_t new_time_cost = 1;
    std::uint32_t new_mem_cost_kib = 8;
    std::size_t message_index = 0;
    std::size_t byte_offset = 0;

    static TamperRule none() { return {}; }
    static TamperRule weaken_params(std::uint32_t time_cost, std::uint32_t mem_cost_kib) {
        TamperRule r;
        r.kind = Kind::WeakenParams;
        r.new_time_cost = time_cost;
        r.new_mem_cost_kib = mem_cost_kib;
        return r;
    }
    static TamperRule flip_byte(std::size_t message_index, std::size_t byte_offset) {
        TamperRule r;
        r.kind = Kind::FlipByte;
        r.message_index = message_index;
        r.byte_offset = byte_offset;
        return r;
    }
};

/// Applies the rule to one frame; msg_index is its transcript position.
Bytes apply_tamper(const TamperRule& rule, std::size_t msg_index, ByteView frame);

/// Forwarding TCP proxy; one connection at a time, frame granularity.
class MitmProxy {
public:
    MitmProxy(std::string upstream_host, std::uint16_t upstream_port, TamperRule rule);
    ~MitmProxy();

    void start();
    void stop();
    std::uint16_t port() const;

    /// Transcript of the frames as delivered (post-tampering).
    Transcript take_transcript();

private:
    void run();

    std::string upstream_host_;
    std::uint16_t upstream_port_;
    TamperRule rule_;
    std::unique_ptr<TcpListener> listener_;
    std::thread thread_;
    std::atomic<bool> running_{false};
    std::mutex transcript_mutex_;
    Transcript transcript_;
};

/// The malicious provider's knowledge of its own session.
struct ServerSecretView {
    Scalar x;
    Scalar c;
    GroupElement h;
};

/// Decrypt-and-check offline attack on a captured authentication
/// transcript: per candidate, derive pi* and h*, unblind the M2/M3
/// fields, rebuild sk from the insider's x, open the sealed v and test
/// v == (h*)^c. A transcript whose v field travels unsealed (the broken
/// protocol variant) is checked directly against (g^c)^pi*.
/// Returns the candidates the attack confirms.
std::vector<std::string> dictionary_attack(const GroupParams& group, const Transcript& transcript,
                                           const std::optional<ServerSecretView>& server_view,
                                           const std::vector<std::string>& candidates);

/// One parameter-attack run made to order for dictionary_attack: an honest
/// client talks to a provider that serves cost-weakened parameters. When
/// broken_client is set, the client ships v without its seal.
struct ParameterAttackRun {
    Transcript transcript;
    ServerSecretView server_view;
};
ParameterAttackRun run_parameter_attack(const GroupParams& group, std::string_view username,
                                        std::string_view provider_id,
                                        const UserKeyParams& strong_p_pi, const GroupElement& h,
                                        std::string_view password, const TamperRule& weaken,
                                        bool broken_client, Rng& rng);

struct StolenVerifierOutcome {
    bool server_accepted = false;
    /// Whether the attacker's sk equals the server's (recomputed by the
    /// harness from the insider view). Measures how far stolen (P_pi, h)
    /// carries an impersonator.
    bool session_key_matched = false;
};

/// Runs the client role holding only the stolen (P_pi, h): unblinds with h,
/// completes the key exchange, and submits its best computable guess for v.
StolenVerifierOutcome stolen_verifier_attack(const GroupParams& group, std::string_view username,
                                             std::string_view provider_id,
                                             const PakeServerSession::Verifier& stored,
                                             Rng& rng);

/// Same attack over a live TCP endpoint; only acceptance is observable.
bool stolen_verifier_attack_remote(const GroupParams& group, const std::string& host,
                                   std::uint16_t port, std::string_view username,
                                   const UserKeyParams& p_pi, const GroupElement& h, Rng& rng);

} // namespace authstore
