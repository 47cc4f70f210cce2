#include "authstore/rng.hpp"

#include "authstore/errors.hpp"
#include "authstore/hash.hpp"

#include <sodium.h>

namespace authstore {

void SystemRng::fill(std::span<std::uint8_t> out) {
    ensure_sodium_init();
    randombytes_buf(out.data(), out.size());
}

SystemRng& SystemRng::instance() {
    static SystemRng rng;
    return rng;
}

SeededRng::SeededRng(std::uint64_t seed) {
    Bytes seed_bytes = u64be_bytes(seed);
    key_ = labeled_hash("AS-test-rng", {view(seed_bytes)});
}

void SeededRng::fill(std::span<std::uint8_t> out) {
    ensure_sodium_init();
    std::uint8_t nonce[crypto_stream_chacha20_NONCEBYTES] = {};
    Bytes ctr = u64be_bytes(counter_++);
    std::copy(ctr.begin(), ctr.end(), nonce);
    crypto_stream_chacha20(out.data(), out.size(), nonce, key_.data());
}

void QueuedRng::fill(std::span<std::uint8_t> out) {
    if (next_ >= queue_.size())
        raise(ErrorCode::IoError, "QueuedRng exhausted");
    const Bytes& draw = queue_[next_++];
    if (draw.size() != out.size())
        raise(ErrorCode::IoError, "QueuedRng draw size mismatch");
    std::copy(draw.begin(), draw.end(), out.begin());
}

} // namespace authstore
