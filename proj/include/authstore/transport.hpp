#pragma once

#include "authstore/bytes.hpp"

#include <atomic>
#include <condition_variable>
#include <deque>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace authstore {

enum class Direction { ClientToServer, ServerToClient };

/// Append-only capture of raw frames, for harnesses and secrecy scans.
struct Transcript {
    struct Entry {
        Direction dir;
        Bytes frame;
    };
    std::vector<Entry> entries;

    void append(Direction dir, ByteView frame) {
        entries.push_back({dir, Bytes(frame.begin(), frame.end())});
    }
    std::size_t size() const { return entries.size(); }
};

/// Blocking frame-oriented byte pipe. recv_frame returns nullopt on EOF.
class FrameTransport {
public:
    virtual ~FrameTransport() = default;
    virtual void send_frame(ByteView frame) = 0;
    virtual std::optional<Bytes> recv_frame() = 0;
    virtual void close() = 0;
};

/// TCP transport. Frames are delimited by their own u32be length header;
/// recv reads the header, then the body, and returns the whole frame.
class TcpTransport final : public FrameTransport {
public:
    explicit TcpTransport(int fd) : fd_(fd) {}
    ~TcpTransport() override;

    TcpTransport(const TcpTransport&) = delete;
    TcpTransport& operator=(const TcpTransport&) = delete;

    static std::unique_ptr<TcpTransport> connect(const std::string& host, std::uint16_t port);

    void send_frame(ByteView frame) override;
    std::optional<Bytes> recv_frame() override;
    void close() override;

private:
    std::atomic<int> fd_{-1};
    std::mutex send_mutex_;
};

class TcpListener {
public:
    TcpListener(const std::string& host, std::uint16_t port); // port 0 = ephemeral
    ~TcpListener();

    TcpListener(const TcpListener&) = delete;
    TcpListener& operator=(const TcpListener&) = delete;

    std::uint16_t port() const { return port_; }
    std::unique_ptr<TcpTransport> accept(); // nullptr once closed
    void close();

private:
    int fd_ = -1;
    std::uint16_t port_ = 0;
};

/// In-memory duplex pair for transport-free protocol tests.
class InMemoryDuplex {
public:
    static std::pair<std::unique_ptr<FrameTransport>, std::unique_ptr<FrameTransport>> create();
};

/// Wraps a transport, mirroring every frame into a transcript.
class TapTransport final : public FrameTransport {
public:
    TapTransport(std::unique_ptr<FrameTransport> inner, Transcript* transcript,
                 Direction send_dir)
        : inner_(std::move(inner)), transcript_(transcript), send_dir_(send_dir) {}

    void send_frame(ByteView frame) override;
    std::optional<Bytes> recv_frame() override;
    void close() override { inner_->close(); }

private:
    std::unique_ptr<FrameTransport> inner_;
    Transcript* transcript_;
    Direction send_dir_;
};

} // namespace authstore
