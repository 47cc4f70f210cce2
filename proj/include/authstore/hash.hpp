#pragma once

#include "authstore/bytes.hpp"

#include <array>
#include <initializer_list>
#include <span>
#include <string_view>

namespace authstore {

using Digest32 = std::array<std::uint8_t, 32>;

/// Length-prefixed input serialization shared by all labeled hashes:
/// u32be(len(label)) || label || u32be(len(f0)) || f0 || ...
Bytes hash_input(std::string_view label, std::span<const ByteView> fields);

Digest32 sha256(ByteView data);

/// SHA-256 over the domain-separated, length-prefixed field sequence.
Digest32 labeled_hash(std::string_view label, std::span<const ByteView> fields);

/// Arbitrary-length digest: concatenated SHA-512 blocks over
/// u32be(counter) || hash_input(...), counter = 0, 1, ...
Bytes labeled_expand(std::string_view label, std::span<const ByteView> fields,
                     std::size_t out_len);

inline Digest32 labeled_hash(std::string_view label, std::initializer_list<ByteView> fields) {
    return labeled_hash(label, std::span<const ByteView>(fields.begin(), fields.size()));
}

inline Bytes labeled_expand(std::string_view label, std::initializer_list<ByteView> fields,
                            std::size_t out_len) {
    return labeled_expand(label, std::span<const ByteView>(fields.begin(), fields.size()),
                          out_len);
}

void ensure_sodium_init();

} // namespace authstore
