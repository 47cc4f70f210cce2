#pragma once

#include "authstore/group.hpp"
#include "authstore/rng.hpp"
#include "authstore/stretch.hpp"
#include "authstore/username.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <shared_mutex>
#include <string>

namespace authstore {

using Clock = std::function<std::int64_t()>; // unix seconds

Clock system_clock_fn();

inline constexpr std::int64_t kResetLifetimeSeconds = 15 * 60;

struct ResetState {
    GroupElement h_temp;
    std::int64_t expires_at = 0;
    bool consumed = false;
};

struct AccountRecord {
    std::string username;
    UserKeyParams p_pi;
    GroupElement h; // verifier V_pi = g^pi
    std::optional<ResetState> reset;
    std::int64_t created_at = 0;
    std::int64_t updated_at = 0;
};

/// Single-file account database. Atomic rewrite on every mutation; the
/// superseded credential bytes are gone from disk once the rename lands.
///
/// accounts.db: "ASDB" || version byte || records, each
///   u16be username len || username || KdfParams (29) || user_salt (16) ||
///   h (element) || reset flag (1) || [h_temp || u64be expiry || consumed] ||
///   u64be created_at || u64be updated_at || u32be crc32 of the record bytes
class AccountStore {
public:
    AccountStore(const GroupParams& group, std::filesystem::path db_path,
                 Clock clock = system_clock_fn());

    AccountRecord register_account(std::string_view username, const UserKeyParams& p_pi,
                                   const GroupElement& h);
    std::optional<AccountRecord> find(std::string_view username) const;

    /// Replaces the live (P_pi, h) pair and clears any pending reset.
    void change_credentials(std::string_view username, const UserKeyParams& p_pi,
                            const GroupElement& h);

    /// Issues a temporary authentication key pi'; h_temp = g^pi' is stored
    /// with a 15-minute single-use window. Returns pi' for the operator
    /// channel only.
    Scalar begin_reset(std::string_view username, Rng& rng);

    /// Returns the reset verifier if one is pending, unconsumed and
    /// unexpired. While this holds, the handshake authenticates against
    /// h_temp instead of h.
    std::optional<GroupElement> active_reset_verifier(std::string_view username) const;

    void consume_reset(std::string_view username);

    std::size_t size() const;

    /// Deterministic fabricated account for unknown usernames, derived from
    /// the server secret. Costs mirror the given template so decoys are
    /// indistinguishable from real accounts.
    static AccountRecord decoy(const GroupParams& group, ByteView server_secret,
                               std::string_view username, const KdfParams& cost_template);

private:
    void persist_locked() const;
    void load();
    AccountRecord& require_locked(std::string_view username);

    const GroupParams& group_;
    std::filesystem::path db_path_;
    Clock clock_;
    mutable std::shared_mutex mutex_;
    std::map<std::string, AccountRecord> accounts_;
};

} // namespace authstore
