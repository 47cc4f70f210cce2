#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace authstore {

using Bytes = std::vector<std::uint8_t>;
using ByteView = std::span<const std::uint8_t>;

inline Bytes to_bytes(std::string_view s) {
    return Bytes(s.begin(), s.end());
}

inline std::string to_string(ByteView b) {
    return std::string(b.begin(), b.end());
}

inline ByteView view(const Bytes& b) { return ByteView(b.data(), b.size()); }

inline ByteView view(std::string_view s) {
    return ByteView(reinterpret_cast<const std::uint8_t*>(s.data()), s.size());
}

template <std::size_t N>
ByteView view(const std::array<std::uint8_t, N>& a) {
    return ByteView(a.data(), a.size());
}

void put_u16be(Bytes& out, std::uint16_t v);
void put_u32be(Bytes& out, std::uint32_t v);
void put_u64be(Bytes& out, std::uint64_t v);

std::uint16_t get_u16be(const std::uint8_t* p);
std::uint32_t get_u32be(const std::uint8_t* p);
std::uint64_t get_u64be(const std::uint8_t* p);

Bytes u32be_bytes(std::uint32_t v);
Bytes u64be_bytes(std::uint64_t v);

std::string hex_encode(ByteView data);
Bytes hex_decode(std::string_view hex); // throws Error(WrongLength) on bad input

/// True if needle occurs as a contiguous subsequence of haystack.
bool contains_bytes(ByteView haystack, ByteView needle);

/// Constant-time equality for fixed-size secrets.
bool ct_equal(ByteView a, ByteView b);

} // namespace authstore
