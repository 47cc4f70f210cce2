#pragma once

#include "authstore/bytes.hpp"

#include <array>

namespace authstore {

using Key32 = std::array<std::uint8_t, 32>;
using Nonce12 = std::array<std::uint8_t, 12>;

inline constexpr std::size_t kSealOverhead = 16; // 128-bit tag

inline Nonce12 zero_nonce() { return Nonce12{}; }

/// 4 zero octets followed by the big-endian sequence number.
Nonce12 seq_nonce(std::uint64_t seq);

/// ChaCha20-Poly1305-IETF: returns ciphertext || tag.
Bytes seal(const Key32& key, const Nonce12& nonce, ByteView plaintext);

/// Throws Error(SealAuthFail) when authentication fails.
Bytes open(const Key32& key, const Nonce12& nonce, ByteView sealed);

} // namespace authstore
