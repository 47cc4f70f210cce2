#pragma once

#include "authstore/account.hpp"
#include "authstore/group.hpp"
#include "authstore/rng.hpp"
#include "authstore/stretch.hpp"
#include "authstore/transport.hpp"

#include <atomic>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

namespace authstore {

/// Per-user blob (the synced vault file) with an optimistic version
/// counter. Files: <data_dir>/blobs/<hex(username)>.blob, u64be version
/// followed by the blob bytes.
class BlobStore {
public:
    struct Blob {
        std::uint64_t version = 0;
        Bytes data;
    };

    explicit BlobStore(std::filesystem::path dir);

    std::optional<Blob> get(std::string_view username) const;

    /// Requires version == current + 1; Error(VersionConflict) otherwise.
    void put(std::string_view username, std::uint64_t version, ByteView data);

private:
    std::filesystem::path blob_path(std::string_view username) const;

    std::filesystem::path dir_;
    mutable std::mutex mutex_;
};

/// Sliding-window online-attack throttle, per username.
class RateLimiter {
public:
    RateLimiter(std::uint32_t max_failures_per_minute, Clock clock);

    bool allow(std::string_view username) const;
    void record_failure(std::string_view username);

private:
    std::uint32_t max_per_minute_;
    Clock clock_;
    mutable std::mutex mutex_;
    std::map<std::string, std::deque<std::int64_t>, std::less<>> failures_;
};

struct ServerConfig {
    std::string listen_host = "127.0.0.1";
    std::uint16_t listen_port = 0; // 0 = ephemeral
    std::filesystem::path data_dir;
    std::string group_profile = "modp-2048";
    std::string provider_id = "authstore";
    std::uint32_t max_failed_per_minute = 5;
    bool enable_admin = true; // loopback-only reset-token listener
    std::uint16_t admin_port = 0;

    /// Cost template mirrored by decoy accounts; zero time_cost selects
    /// the production defaults.
    KdfParams decoy_cost_template{};
};

/// The service provider: plaintext frames for Register and the M1..M4
/// handshake, then sealed channel frames keyed from sk. The password and
/// pi never appear in any code path here; the server only ever holds
/// (P_pi, h) and the per-session (x, c).
class Server {
public:
    Server(ServerConfig config, Rng& rng = SystemRng::instance(),
           Clock clock = system_clock_fn());
    ~Server();

    void start();
    void stop();

    std::uint16_t port() const;
    std::uint16_t admin_port() const;

    /// Admin/operator interface: issues a reset token, returned as the hex
    /// scalar pi'. Never sent on the client-facing wire.
    std::string issue_reset(std::string_view username);

    AccountStore& accounts() { return *accounts_; }
    BlobStore& blobs() { return *blobs_; }
    const GroupParams& group() const { return group_; }

    /// Drives one client connection to completion; used by the accept loop
    /// and callable directly with an in-memory transport.
    void handle_connection(FrameTransport& transport);

private:
    void accept_loop();
    void admin_loop();
    void handle_admin(FrameTransport& transport);

    ServerConfig config_;
    const GroupParams& group_;
    Rng& rng_;
    Clock clock_;
    Bytes decoy_secret_;
    std::unique_ptr<AccountStore> accounts_;
    std::unique_ptr<BlobStore> blobs_;
    RateLimiter rate_limiter_;

    std::unique_ptr<TcpListener> listener_;
    std::unique_ptr<TcpListener> admin_listener_;
    std::vector<std::thread> accept_threads_;
    std::vector<std::thread> conn_threads_;
    std::map<std::uint64_t, std::shared_ptr<TcpTransport>> live_transports_;
    std::uint64_t next_conn_id_ = 0;
    std::mutex conn_mutex_;
    std::atomic<bool> running_{false};
};

} // namespace authstore
