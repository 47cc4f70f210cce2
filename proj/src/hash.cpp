#include "authstore/hash.hpp"

#include <sodium.h>

#include <cstdlib>

namespace authstore {

void ensure_sodium_init() {
    static const int rc = sodium_init();
    if (rc < 0)
        std::abort();
}

Bytes hash_input(std::string_view label, std::span<const ByteView> fields) {
    Bytes out;
    std::size_t total = 4 + label.size();
    for (const auto& f : fields)
        total += 4 + f.size();
    out.reserve(total);
    put_u32be(out, static_cast<std::uint32_t>(label.size()));
    out.insert(out.end(), label.begin(), label.end());
    for (const auto& f : fields) {
        put_u32be(out, static_cast<std::uint32_t>(f.size()));
        out.insert(out.end(), f.begin(), f.end());
    }
    return out;
}

Digest32 sha256(ByteView data) {
    ensure_sodium_init();
    Digest32 out;
    crypto_hash_sha256(out.data(), data.data(), data.size());
    return out;
}

Digest32 labeled_hash(std::string_view label, std::span<const ByteView> fields) {
    Bytes input = hash_input(label, fields);
    return sha256(view(input));
}

Bytes labeled_expand(std::string_view label, std::span<const ByteView> fields,
                     std::size_t out_len) {
    ensure_sodium_init();
    Bytes input = hash_input(label, fields);
    Bytes out;
    out.reserve(out_len + crypto_hash_sha512_BYTES);
    std::uint32_t counter = 0;
    while (out.size() < out_len) {
        Bytes block_input;
        block_input.reserve(4 + input.size());
        put_u32be(block_input, counter++);
        block_input.insert(block_input.end(), input.begin(), input.end());
        std::uint8_t block[crypto_hash_sha512_BYTES];
        crypto_hash_sha512(block, block_input.data(), block_input.size());
        out.insert(out.end(), block, block + sizeof(block));
    }
    out.resize(out_len);
    return out;
}

} // namespace authstore
