#pragma once

#include "authstore/bytes.hpp"

#include <cstdint>
#include <span>

namespace authstore {

class Rng {
public:
    virtual ~Rng() = default;
    virtual void fill(std::span<std::uint8_t> out) = 0;

    Bytes bytes(std::size_t n) {
        Bytes b(n);
        fill(b);
        return b;
    }
};

/// OS randomness via libsodium.
class SystemRng final : public Rng {
public:
    void fill(std::span<std::uint8_t> out) override;
    static SystemRng& instance();
};

/// Deterministic stream for reproducible tests: ChaCha20 keystream blocks,
/// key derived from the seed, block counter as nonce.
class SeededRng final : public Rng {
public:
    explicit SeededRng(std::uint64_t seed);
    void fill(std::span<std::uint8_t> out) override;

private:
    std::array<std::uint8_t, 32> key_;
    std::uint64_t counter_ = 0;
};

/// Replays queued byte strings, one per fill() call. Test aid for forcing
/// exact protocol nonces; throws when exhausted or size-mismatched.
class QueuedRng final : public Rng {
public:
    void push(Bytes draw) { queue_.push_back(std::move(draw)); }
    void fill(std::span<std::uint8_t> out) override;

private:
    std::vector<Bytes> queue_;
    std::size_t next_ = 0;
};

} // namespace authstore
