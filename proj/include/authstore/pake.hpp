#pragma once

#include "authstore/group.hpp"
#include "authstore/seal.hpp"
#include "authstore/stretch.hpp"

#include <string>
#include <utility>
#include <variant>

namespace authstore {

struct SessionKey {
    Key32 bytes{};

    bool operator==(const SessionKey&) const = default;
};

// The four-message authentication transcript. Group elements are typed
// here; the wire module carries their canonical encodings.
struct Msg1 {
    std::string username;
};

struct Msg2 {
    std::string provider_id;
    GroupElement enc_x;     // E_h(g^x)
    UserKeyParams p_pi;
    GroupElement challenge; // g^c
};

struct Msg3 {
    GroupElement enc_y; // E_h(g^y)
    Bytes sealed_v;     // E_sk(v), authenticated seal under confirm_key(sk)
};

struct Msg4 {
    Key32 confirm{}; // H("AS-conf1", sk)
};

/// What the user types (normal login) or the reset token they were handed
/// (authentication-key derivation skipped).
class ClientCredential {
public:
    static ClientCredential password(std::string pw) { return ClientCredential(std::move(pw)); }
    static ClientCredential auth_scalar(Scalar pi) { return ClientCredential(std::move(pi)); }

    Scalar derive_pi(const UserKeyParams& p_pi, const GroupParams& group) const;

private:
    explicit ClientCredential(std::string pw) : value_(std::move(pw)) {}
    explicit ClientCredential(Scalar pi) : value_(std::move(pi)) {}
    std::variant<std::string, Scalar> value_;
};

Key32 confirm_key(const SessionKey& sk);      // H("AS-esk", sk)
Key32 confirmation_tag(const SessionKey& sk); // H("AS-conf1", sk)

/// Directional channel keys (client-to-server, server-to-client).
std::pair<Key32, Key32> channel_keys(const SessionKey& sk);

class PakeClientSession {
public:
    enum class State { AwaitChallenge, AwaitConfirm, Established, Failed };

    static std::pair<Msg1, PakeClientSession> start(const GroupParams& group,
                                                    std::string_view username);

    /// Step 3: derive pi, unblind g^x, compute v and sk, blind g^y, seal v.
    /// A wrong password does not error; it yields mismatched keys.
    Msg3 on_challenge(const Msg2& m2, const ClientCredential& credential, Rng& rng);

    /// Step 5: verify H(sk || 1). Throws Error(ServerAuthFailed) on mismatch.
    SessionKey on_confirm(const Msg4& m4);

    State state() const { return state_; }
    const SessionKey& session_key() const; // valid from AwaitConfirm on

private:
    PakeClientSession(const GroupParams& group, std::string username);

    const GroupParams* group_;
    State state_ = State::AwaitChallenge;
    std::string username_;
    std::string provider_id_;
    SessionKey sk_{};
};

class PakeServerSession {
public:
    enum class State { AwaitResponse, Done, Failed };

    /// The verifier material the provider stores for one account.
    struct Verifier {
        UserKeyParams p_pi;
        GroupElement h;
    };

    /// Insider view of the session secrets, for adversarial modeling of a
    /// malicious provider. Not used by the protocol path.
    struct SecretView {
        Scalar x;
        Scalar c;
        GroupElement h;
    };

    /// Step 2: fresh x, c; emits B || E_h(g^x) || P_pi || g^c.
    static std::pair<Msg2, PakeServerSession> on_request(const GroupParams& group, const Msg1& m1,
                                                         const Verifier& verifier,
                                                         std::string_view provider_id, Rng& rng);

    /// Step 4: recompute sk, open E_sk(v), require v == h^c. One error for
    /// every failure mode: Error(AuthFailed).
    Msg4 on_response(const Msg3& m3);

    State state() const { return state_; }
    const SessionKey& session_key() const; // valid in Done
    SecretView secret_view() const { return SecretView{x_, c_, h_}; }

private:
    PakeServerSession(const GroupParams& group, std::string username);

    const GroupParams* group_;
    State state_ = State::AwaitResponse;
    std::string username_;
    std::string provider_id_;
    GroupElement h_;
    Scalar x_;
    Scalar c_;
    SessionKey sk_{};
};

} // namespace authstore
