#pragma once

#include "authstore/group.hpp"
#include "authstore/pake.hpp"
#include "authstore/stretch.hpp"
#include "authstore/transport.hpp"
#include "authstore/wire.hpp"

#include <memory>
#include <optional>
#include <string>

namespace authstore {

/// Client side of one server connection: registration, the CompactPAKE
/// handshake, and sealed channel operations once established.
class ClientConnection {
public:
    ClientConnection(const GroupParams& group, std::unique_ptr<FrameTransport> transport);
    static ClientConnection connect(const GroupParams& group, const std::string& host,
                                    std::uint16_t port);

    /// Mirrors every frame into the transcript (for counting and scans).
    void set_transcript(Transcript* transcript);

    /// Derives pi from the password under fresh user-key parameters and
    /// uploads (P_pi, h). Errors: UserExists, ProtocolError, ...
    UserKeyParams register_account(std::string_view username, ByteView password,
                                   const KdfParams& kdf_params, Rng& rng);

    /// Password-less registration: an already-derived user key (from cached
    /// base-key material) becomes the authentication key.
    void register_with_user_key(std::string_view username, const UserKeyParams& p_pi,
                                const UserKey& k_auth);

    /// Runs M1..M4. Throws AuthFailed when the server drops the handshake
    /// (wrong password), ServerAuthFailed on a bad confirmation, RateLimited
    /// when throttled.
    SessionKey login(std::string_view username, const ClientCredential& credential, Rng& rng);

    bool established() const { return channel_.has_value(); }

    /// P_pi served in the last login's challenge (used to reuse base-key
    /// parameters for the vault).
    const std::optional<UserKeyParams>& served_params() const { return served_params_; }

    // Channel operations; all throw Error(NotAuthenticated) before login.
    std::optional<std::pair<std::uint64_t, Bytes>> get_blob();
    void put_blob(std::uint64_t version, ByteView blob);
    void change_credentials(const UserKeyParams& p_pi, const GroupElement& h);

    void close();

private:
    Bytes request_reply(ByteView inner_request); // sealed round trip
    wire::Frame recv_or_eof();

    const GroupParams& group_;
    std::unique_ptr<FrameTransport> transport_;
    Transcript* transcript_ = nullptr;
    std::optional<wire::Channel> channel_;
    std::optional<UserKeyParams> served_params_;
};

/// Maps an ErrorReply frame to the matching Error and throws it.
[[noreturn]] void throw_reply_error(const wire::ErrorReplyMsg& reply);

} // namespace authstore
