#include "authstore/transport.hpp"

#include "authstore/errors.hpp"
#include "authstore/wire.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>

namespace authstore {

namespace {

void write_all(int fd, const std::uint8_t* data, std::size_t len) {
    while (len > 0) {
        ssize_t n = ::send(fd, data, len, MSG_NOSIGNAL);
        if (n < 0) {
            if (errno == EINTR)
                continue;
            raise(ErrorCode::IoError, std::string("send: ") + std::strerror(errno));
        }
        data += n;
        len -= static_cast<std::size_t>(n);
    }
}

// Returns false on clean EOF at the first byte; throws on mid-read EOF.
bool read_exact(int fd, std::uint8_t* data, std::size_t len) {
    std::size_t got = 0;
    while (got < len) {
        ssize_t n = ::recv(fd, data + got, len - got, 0);
        if (n < 0) {
            if (errno == EINTR)
                continue;
            raise(ErrorCode::IoError, std::string("recv: ") + std::strerror(errno));
        }
        if (n == 0) {
            if (got == 0)
                return false;
            raise(ErrorCode::Truncated, "connection closed mid-frame");
        }
        got += static_cast<std::size_t>(n);
    }
    return true;
}

sockaddr_in make_addr(const std::string& host, std::uint16_t port) {
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(port);
    if (::inet_pton(AF_INET, host.c_str(), &addr.sin_addr) != 1)
        raise(ErrorCode::IoError, "invalid IPv4 address: " + host);
    return addr;
}

} // namespace

TcpTransport::~TcpTransport() {
    close();
}

std::unique_ptr<TcpTransport> TcpTransport::connect(const std::string& host, std::uint16_t port) {
    int fd = ::socket(AF_INET, SOCK_STREAM, 0);
    if (fd < 0)
        raise(ErrorCode::IoError, std::string("socket: ") + std::strerror(errno));
    sockaddr_in addr = make_addr(host, port);
    if (::connect(fd, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0) {
        int err = errno;
        ::close(fd);
        raise(ErrorCode::IoError, std::string("connect: ") + std::strerror(err));
    }
    int one = 1;
    ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
    return std::make_unique<TcpTransport>(fd);
}

void TcpTransport::send_frame(ByteView frame) {
    std::lock_guard lock(send_mutex_);
    int fd = fd_.load();
    if (fd < 0)
        raise(ErrorCode::IoError, "transport closed");
    write_all(fd, frame.data(), frame.size());
}

std::optional<Bytes> TcpTransport::recv_frame() {
    int fd = fd_.load();
    if (fd < 0)
        return std::nullopt;
    std::uint8_t header[4];
    if (!read_exact(fd, header, 4))
        return std::nullopt;
    std::uint32_t body_len = get_u32be(header);
    if (body_len < 1 || body_len > wire::kMaxBodyLen)
        raise(ErrorCode::Oversize, "frame body length out of range");
    Bytes frame(4 + body_len);
    std::copy(header, header + 4, frame.begin());
    if (!read_exact(fd, frame.data() + 4, body_len))
        raise(ErrorCode::Truncated, "connection closed mid-frame");
    return frame;
}

void TcpTransport::close() {
    int fd = fd_.exchange(-1);
    if (fd >= 0) {
        ::shutdown(fd, SHUT_RDWR);
        ::close(fd);
    }
}

TcpListener::TcpListener(const std::string& host, std::uint16_t port) {
    fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
    if (fd_ < 0)
        raise(ErrorCode::IoError, std::string("socket: ") + std::strerror(errno));
    int one = 1;
    ::setsockopt(fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
    sockaddr_in addr = make_addr(host, port);
    if (::bind(fd_, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0) {
        int err = errno;
        ::close(fd_);
        fd_ = -1;
        raise(ErrorCode::IoError, std::string("bind: ") + std::strerror(err));
    }
    if (::listen(fd_, 64) != 0) {
        int err = errno;
        ::close(fd_);
        fd_ = -1;
        raise(ErrorCode::IoError, std::string("listen: ") + std::strerror(err));
    }
    socklen_t len = sizeof(addr);
    ::getsockname(fd_, reinterpret_cast<sockaddr*>(&addr), &len);
    port_ = ntohs(addr.sin_port);
}

TcpListener::~TcpListener() {
    close();
}

std::unique_ptr<TcpTransport> TcpListener::accept() {
    int fd = ::accept(fd_, nullptr, nullptr);
    if (fd < 0)
        return nullptr;
    int one = 1;
    ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
    return std::make_unique<TcpTransport>(fd);
}

void TcpListener::close() {
    if (fd_ >= 0) {
        ::shutdown(fd_, SHUT_RDWR);
        ::close(fd_);
        fd_ = -1;
    }
}

namespace {

struct PipeEnd {
    std::mutex mutex;
    std::condition_variable cv;
    std::deque<Bytes> queue;
    bool closed = false;

    void push(ByteView frame) {
        {
            std::lock_guard lock(mutex);
            if (closed)
                raise(ErrorCode::IoError, "pipe closed");
            queue.emplace_back(frame.begin(), frame.end());
        }
        cv.notify_one();
    }

    std::optional<Bytes> pop() {
        std::unique_lock lock(mutex);
        cv.wait(lock, [&] { return closed || !queue.empty(); });
        if (queue.empty())
            return std::nullopt;
        Bytes frame = std::move(queue.front());
        queue.pop_front();
        return frame;
    }

    void close() {
        {
            std::lock_guard lock(mutex);
            closed = true;
        }
        cv.notify_all();
    }
};

class InMemoryTransport final : public FrameTransport {
public:
    InMemoryTransport(std::shared_ptr<PipeEnd> out, std::shared_ptr<PipeEnd> in)
        : out_(std::move(out)), in_(std::move(in)) {}

    void send_frame(ByteView frame) override { out_->push(frame); }
    std::optional<Bytes> recv_frame() override { return in_->pop(); }
    void close() override {
        out_->close();
        in_->close();
    }

private:
    std::shared_ptr<PipeEnd> out_;
    std::shared_ptr<PipeEnd> in_;
};

} // namespace

std::pair<std::unique_ptr<FrameTransport>, std::unique_ptr<FrameTransport>>
InMemoryDuplex::create() {
    auto a_to_b = std::make_shared<PipeEnd>();
    auto b_to_a = std::make_shared<PipeEnd>();
    return {std::make_unique<InMemoryTransport>(a_to_b, b_to_a),
            std::make_unique<InMemoryTransport>(b_to_a, a_to_b)};
}

void TapTransport::send_frame(ByteView frame) {
    if (transcript_)
        transcript_->append(send_dir_, frame);
    inner_->send_frame(frame);
}

std::optional<Bytes> TapTransport::recv_frame() {
    auto frame = inner_->recv_frame();
    if (frame && transcript_) {
        Direction recv_dir = send_dir_ == Direction::ClientToServer ? Direction::ServerToClient
                                                                    : Direction::ClientToServer;
        transcript_->append(recv_dir, view(*frame));
    }
    return frame;
}

} // namespace authstore
