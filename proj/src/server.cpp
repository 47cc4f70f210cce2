#include "authstore/server.hpp"

#include "authstore/errors.hpp"
#include "authstore/hash.hpp"
#include "authstore/io.hpp"
#include "authstore/pake.hpp"
#include "authstore/wire.hpp"

#include <algorithm>

namespace authstore {

namespace fs = std::filesystem;

// ---------------------------------------------------------------- BlobStore

BlobStore::BlobStore(fs::path dir) : dir_(std::move(dir)) {
    fs::create_directories(dir_);
}

fs::path BlobStore::blob_path(std::string_view username) const {
    return dir_ / (hex_encode(view(username)) + ".blob");
}

std::optional<BlobStore::Blob> BlobStore::get(std::string_view username) const {
    std::lock_guard lock(mutex_);
    fs::path path = blob_path(username);
    if (!fs::exists(path))
        return std::nullopt;
    Bytes raw = read_file(path);
    if (raw.size() < 8)
        raise(ErrorCode::CorruptStore, "blob file too short");
    Blob blob;
    blob.version = get_u64be(raw.data());
    blob.data.assign(raw.begin() + 8, raw.end());
    return blob;
}

void BlobStore::put(std::string_view username, std::uint64_t version, ByteView data) {
    std::lock_guard lock(mutex_);
    fs::path path = blob_path(username);
    std::uint64_t current = 0;
    if (fs::exists(path)) {
        Bytes raw = read_file(path);
        if (raw.size() < 8)
            raise(ErrorCode::CorruptStore, "blob file too short");
        current = get_u64be(raw.data());
    }
    if (version != current + 1)
        raise(ErrorCode::VersionConflict,
              "expected version " + std::to_string(current + 1) + ", got " +
                  std::to_string(version));
    Bytes out = u64be_bytes(version);
    out.insert(out.end(), data.begin(), data.end());
    write_file_atomic(path, view(out));
}

// --------------------------------------------------------------- RateLimiter

RateLimiter::RateLimiter(std::uint32_t max_failures_per_minute, Clock clock)
    : max_per_minute_(max_failures_per_minute), clock_(std::move(clock)) {}

bool RateLimiter::allow(std::string_view username) const {
    std::lock_guard lock(mutex_);
    auto it = failures_.find(username);
    if (it == failures_.end())
        return true;
    std::int64_t cutoff = clock_() - 60;
    std::size_t recent = 0;
    for (std::int64_t t : it->second)
        if (t > cutoff)
            ++recent;
    return recent < max_per_minute_;
}

void RateLimiter::record_failure(std::string_view username) {
    std::lock_guard lock(mutex_);
    auto& window = failures_[std::string(username)];
    std::int64_t now = clock_();
    window.push_back(now);
    while (!window.empty() && window.front() <= now - 60)
        window.pop_front();
}

// -------------------------------------------------------------------- Server

namespace {

/// Serializes access to a shared Rng across connection handlers.
class LockedRng final : public Rng {
public:
    LockedRng(Rng& inner, std::mutex& mutex) : inner_(inner), mutex_(mutex) {}
    void fill(std::span<std::uint8_t> out) override {
        std::lock_guard lock(mutex_);
        inner_.fill(out);
    }

private:
    Rng& inner_;
    std::mutex& mutex_;
};

std::mutex g_server_rng_mutex;

} // namespace

Server::Server(ServerConfig config, Rng& rng, Clock clock)
    : config_(std::move(config)), group_(GroupParams::profile(config_.group_profile)), rng_(rng),
      clock_(std::move(clock)), rate_limiter_(config_.max_failed_per_minute, clock_) {
    if (config_.data_dir.empty())
        raise(ErrorCode::IoError, "server data_dir not set");
    fs::create_directories(config_.data_dir);

    fs::path secret_path = config_.data_dir / "server.secret";
    if (fs::exists(secret_path)) {
        decoy_secret_ = read_file(secret_path);
        if (decoy_secret_.size() != 32)
            raise(ErrorCode::CorruptStore, "server.secret must be 32 bytes");
    } else {
        decoy_secret_.resize(32);
        rng_.fill(decoy_secret_);
        write_file_atomic(secret_path, view(decoy_secret_));
    }

    if (config_.decoy_cost_template.time_cost == 0) {
        config_.decoy_cost_template.algorithm = KdfAlgorithm::MemoryHard;
        config_.decoy_cost_template.mem_cost_kib = 64 * 1024;
        config_.decoy_cost_template.time_cost = 3;
        config_.decoy_cost_template.parallelism = 1;
    }

    accounts_ = std::make_unique<AccountStore>(group_, config_.data_dir / "accounts.db", clock_);
    blobs_ = std::make_unique<BlobStore>(config_.data_dir / "blobs");
}

Server::~Server() {
    stop();
}

void Server::start() {
    if (running_.exchange(true))
        return;
    listener_ = std::make_unique<TcpListener>(config_.listen_host, config_.listen_port);
    accept_threads_.emplace_back([this] { accept_loop(); });
    if (config_.enable_admin) {
        // admin interface is loopback-only by construction
        admin_listener_ = std::make_unique<TcpListener>("127.0.0.1", config_.admin_port);
        accept_threads_.emplace_back([this] { admin_loop(); });
    }
}

void Server::stop() {
    if (!running_.exchange(false))
        return;
    if (listener_)
        listener_->close();
    if (admin_listener_)
        admin_listener_->close();
    for (auto& t : accept_threads_)
        if (t.joinable())
            t.join();
    accept_threads_.clear();
    // no new connections can appear now; unblock the in-flight ones
    std::vector<std::thread> pending;
    {
        std::lock_guard lock(conn_mutex_);
        for (auto& [id, transport] : live_transports_)
            transport->close();
        pending.swap(conn_threads_);
    }
    for (auto& t : pending)
        if (t.joinable())
            t.join();
}

std::uint16_t Server::port() const {
    return listener_ ? listener_->port() : 0;
}

std::uint16_t Server::admin_port() const {
    return admin_listener_ ? admin_listener_->port() : 0;
}

void Server::accept_loop() {
    while (running_) {
        auto accepted = listener_->accept();
        if (!accepted)
            break;
        auto transport = std::shared_ptr<TcpTransport>(accepted.release());
        std::lock_guard lock(conn_mutex_);
        std::uint64_t id = next_conn_id_++;
        live_transports_[id] = transport;
        conn_threads_.emplace_back([this, id, transport] {
            try {
                handle_connection(*transport);
            } catch (...) {
                // per-connection errors terminate that connection only
            }
            transport->close();
            std::lock_guard lock(conn_mutex_);
            live_transports_.erase(id);
        });
    }
}

void Server::admin_loop() {
    while (running_) {
        auto transport = admin_listener_->accept();
        if (!transport)
            break;
        try {
            handle_admin(*transport);
        } catch (...) {
        }
        transport->close();
    }
}

void Server::handle_admin(FrameTransport& transport) {
    auto raw = transport.recv_frame();
    if (!raw)
        return;
    wire::Frame frame = wire::decode_frame(view(*raw));
    if (frame.type != wire::MsgType::ResetBegin) {
        transport.send_frame(
            view(wire::ErrorReplyMsg{wire::ReplyCode::ProtocolError}.encode()));
        return;
    }
    auto begin = wire::ResetBeginMsg::from(frame);
    try {
        std::string token = issue_reset(begin.username);
        transport.send_frame(view(wire::ResetTokenMsg{token}.encode()));
    } catch (const Error&) {
        transport.send_frame(view(wire::ErrorReplyMsg{wire::ReplyCode::NotFound}.encode()));
    }
}

std::string Server::issue_reset(std::string_view username) {
    LockedRng rng(rng_, g_server_rng_mutex);
    Scalar pi_temp = accounts_->begin_reset(username, rng);
    return hex_encode(view(group_.encode_scalar(pi_temp)));
}

void Server::handle_connection(FrameTransport& transport) {
    LockedRng rng(rng_, g_server_rng_mutex);

    enum class ConnState { PreAuth, Handshake, Channel };
    ConnState state = ConnState::PreAuth;

    std::optional<PakeServerSession> session;
    std::string username;
    bool decoy_mode = false;
    bool reset_auth = false;
    bool reset_restricted = false;
    std::optional<wire::Channel> channel;

    auto send_error = [&](wire::ReplyCode code) {
        transport.send_frame(view(wire::ErrorReplyMsg{code}.encode()));
    };

    while (true) {
        auto raw = transport.recv_frame();
        if (!raw)
            return;

        wire::Frame frame;
        try {
            frame = wire::decode_frame(view(*raw));
        } catch (const Error&) {
            if (state == ConnState::PreAuth)
                send_error(wire::ReplyCode::ProtocolError);
            return;
        }

        switch (state) {
        case ConnState::PreAuth: {
            if (frame.type == wire::MsgType::Register) {
                auto msg = wire::RegisterMsg::from(frame);
                try {
                    UserKeyParams p_pi = UserKeyParams::decode(view(msg.p_pi));
                    GroupElement h = group_.validate_element(view(msg.h));
                    accounts_->register_account(msg.username, p_pi, h);
                    transport.send_frame(view(wire::encode_empty(wire::MsgType::RegisterOk)));
                } catch (const Error& e) {
                    send_error(e.code() == ErrorCode::UserExists
                                   ? wire::ReplyCode::UserExists
                                   : wire::ReplyCode::InvalidRequest);
                }
                continue; // stay PreAuth; auth may follow on this connection
            }
            if (frame.type == wire::MsgType::AuthRequest) {
                auto msg = wire::AuthRequestMsg::from(frame);
                try {
                    username = canonicalize_username(msg.username);
                } catch (const Error&) {
                    send_error(wire::ReplyCode::InvalidRequest);
                    return;
                }
                if (!rate_limiter_.allow(username)) {
                    send_error(wire::ReplyCode::RateLimited);
                    return;
                }
                PakeServerSession::Verifier verifier;
                auto account = accounts_->find(username);
                if (account) {
                    verifier.p_pi = account->p_pi;
                    if (auto h_temp = accounts_->active_reset_verifier(username)) {
                        verifier.h = *h_temp;
                        reset_auth = true;
                    } else {
                        verifier.h = account->h;
                    }
                } else {
                    AccountRecord fake = AccountStore::decoy(group_, view(decoy_secret_),
                                                             username,
                                                             config_.decoy_cost_template);
                    verifier.p_pi = fake.p_pi;
                    verifier.h = fake.h;
                    decoy_mode = true;
                }
                auto [m2, srv] = PakeServerSession::on_request(group_, Msg1{username}, verifier,
                                                               config_.provider_id, rng);
                session.emplace(std::move(srv));
                wire::AuthChallengeMsg challenge;
                challenge.provider_id = m2.provider_id;
                challenge.enc_x = group_.encode(m2.enc_x);
                challenge.p_pi = m2.p_pi.encode();
                challenge.challenge = group_.encode(m2.challenge);
                transport.send_frame(view(challenge.encode()));
                state = ConnState::Handshake;
                continue;
            }
            send_error(wire::ReplyCode::ProtocolError);
            return;
        }

        case ConnState::Handshake: {
            if (frame.type != wire::MsgType::AuthResponse)
                return; // out of order: drop the connection
            auto msg = wire::AuthResponseMsg::from(frame);
            try {
                Msg3 m3;
                m3.enc_y = group_.validate_element(view(msg.enc_y));
                m3.sealed_v = msg.sealed_v;
                Msg4 m4 = session->on_response(m3);
                if (decoy_mode)
                    raise(ErrorCode::AuthFailed, "decoy account"); // unreachable by design
                wire::AuthConfirmMsg confirm;
                confirm.confirm.assign(m4.confirm.begin(), m4.confirm.end());
                transport.send_frame(view(confirm.encode()));
            } catch (const Error&) {
                // Single failure signal: no reply, one recorded online attempt.
                rate_limiter_.record_failure(username);
                return;
            }
            if (reset_auth) {
                accounts_->consume_reset(username);
                reset_restricted = true;
            }
            auto [c2s, s2c] = channel_keys(session->session_key());
            channel.emplace(/*send*/ s2c, /*recv*/ c2s);
            state = ConnState::Channel;
            continue;
        }

        case ConnState::Channel: {
            if (frame.type != wire::MsgType::Channel)
                return;
            Bytes inner_bytes;
            try {
                inner_bytes = channel->open_frame(view(*raw));
            } catch (const Error&) {
                return; // seal failure or replay is fatal for the connection
            }
            auto reply = [&](const Bytes& inner_reply) {
                transport.send_frame(view(channel->seal_frame(view(inner_reply))));
            };
            wire::Frame inner;
            try {
                inner = wire::decode_frame(view(inner_bytes));
            } catch (const Error&) {
                reply(wire::ErrorReplyMsg{wire::ReplyCode::ProtocolError}.encode());
                continue;
            }
            if (reset_restricted && inner.type != wire::MsgType::ChangeCredentials) {
                reply(wire::ErrorReplyMsg{wire::ReplyCode::ResetRequired}.encode());
                continue;
            }
            switch (inner.type) {
            case wire::MsgType::PutBlob: {
                auto put = wire::PutBlobMsg::from(inner);
                try {
                    blobs_->put(username, put.version, view(put.blob));
                    reply(wire::encode_empty(wire::MsgType::Ok));
                } catch (const Error&) {
                    reply(wire::ErrorReplyMsg{wire::ReplyCode::VersionConflict}.encode());
                }
                break;
            }
            case wire::MsgType::GetBlob: {
                auto blob = blobs_->get(username);
                if (!blob) {
                    reply(wire::ErrorReplyMsg{wire::ReplyCode::NotFound}.encode());
                } else {
                    wire::BlobDataMsg data{blob->version, blob->data};
                    reply(data.encode());
                }
                break;
            }
            case wire::MsgType::ChangeCredentials: {
                auto change = wire::ChangeCredentialsMsg::from(inner);
                try {
                    UserKeyParams p_pi = UserKeyParams::decode(view(change.p_pi));
                    GroupElement h = group_.validate_element(view(change.h));
                    accounts_->change_credentials(username, p_pi, h);
                    reset_restricted = false;
                    reply(wire::encode_empty(wire::MsgType::Ok));
                } catch (const Error&) {
                    reply(wire::ErrorReplyMsg{wire::ReplyCode::InvalidRequest}.encode());
                }
                break;
            }
            default:
                reply(wire::ErrorReplyMsg{wire::ReplyCode::ProtocolError}.encode());
                break;
            }
            continue;
        }
        }
    }
}

} // namespace authstore
