#pragma once

// Shared helpers and the independent oracles the unit suites check
// against. Oracles deliberately avoid the library's own hashing and
// big-integer paths: plain uint64 arithmetic for the toy group and
// hand-assembled byte strings fed straight into libsodium.

#include "authstore/bytes.hpp"
#include "authstore/group.hpp"
#include "authstore/rng.hpp"
#include "authstore/stretch.hpp"

#include <sodium.h>

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

namespace testutil {

using authstore::Bytes;
using authstore::ByteView;

// ----------------------------------------------------------- toy group oracle

/// Repeated modular multiplication; no modexp shortcuts.
inline std::uint64_t oracle_modexp(std::uint64_t base, std::uint64_t e, std::uint64_t p) {
    std::uint64_t acc = 1 % p;
    for (std::uint64_t i = 0; i < e; ++i)
        acc = (acc * base) % p;
    return acc;
}

/// Quadratic residues mod p by exhaustive squaring.
inline std::vector<std::uint64_t> oracle_quadratic_residues(std::uint64_t p) {
    std::vector<bool> seen(p, false);
    for (std::uint64_t v = 1; v < p; ++v)
        seen[(v * v) % p] = true;
    std::vector<std::uint64_t> out;
    for (std::uint64_t v = 1; v < p; ++v)
        if (seen[v])
            out.push_back(v);
    return out;
}

// ------------------------------------------------------------- hash oracles

inline Bytes oracle_hash_input(const std::string& label, const std::vector<Bytes>& fields) {
    auto put32 = [](Bytes& b, std::uint32_t v) {
        b.push_back(static_cast<std::uint8_t>(v >> 24));
        b.push_back(static_cast<std::uint8_t>(v >> 16));
        b.push_back(static_cast<std::uint8_t>(v >> 8));
        b.push_back(static_cast<std::uint8_t>(v));
    };
    Bytes out;
    put32(out, static_cast<std::uint32_t>(label.size()));
    out.insert(out.end(), label.begin(), label.end());
    for (const auto& f : fields) {
        put32(out, static_cast<std::uint32_t>(f.size()));
        out.insert(out.end(), f.begin(), f.end());
    }
    return out;
}

inline Bytes oracle_sha256(const Bytes& data) {
    Bytes out(32);
    crypto_hash_sha256(out.data(), data.data(), data.size());
    return out;
}

inline Bytes oracle_labeled_hash(const std::string& label, const std::vector<Bytes>& fields) {
    return oracle_sha256(oracle_hash_input(label, fields));
}

inline Bytes oracle_expand(const std::string& label, const std::vector<Bytes>& fields,
                           std::size_t n) {
    Bytes ser = oracle_hash_input(label, fields);
    Bytes out;
    std::uint32_t ctr = 0;
    while (out.size() < n) {
        Bytes block_input;
        block_input.push_back(static_cast<std::uint8_t>(ctr >> 24));
        block_input.push_back(static_cast<std::uint8_t>(ctr >> 16));
        block_input.push_back(static_cast<std::uint8_t>(ctr >> 8));
        block_input.push_back(static_cast<std::uint8_t>(ctr));
        ++ctr;
        block_input.insert(block_input.end(), ser.begin(), ser.end());
        Bytes block(64);
        crypto_hash_sha512(block.data(), block_input.data(), block_input.size());
        out.insert(out.end(), block.begin(), block.end());
    }
    out.resize(n);
    return out;
}

/// hash_to_scalar oracle for the toy group (q = 11, 4 bits -> 1-byte digest).
inline std::uint64_t oracle_toy_hash_to_scalar(const std::string& label,
                                               const std::vector<Bytes>& fields) {
    return oracle_expand(label, fields, 1)[0] % 11;
}

inline std::uint64_t oracle_toy_hash_to_scalar_nonzero(const std::string& label,
                                                       const std::vector<Bytes>& fields) {
    std::uint64_t v = oracle_toy_hash_to_scalar(label, fields);
    std::uint32_t retry = 1;
    while (v == 0) {
        std::vector<Bytes> extended = fields;
        extended.push_back(Bytes{static_cast<std::uint8_t>(retry >> 24),
                                 static_cast<std::uint8_t>(retry >> 16),
                                 static_cast<std::uint8_t>(retry >> 8),
                                 static_cast<std::uint8_t>(retry)});
        ++retry;
        v = oracle_toy_hash_to_scalar(label, extended);
    }
    return v;
}

// ------------------------------------------------------------------- helpers

inline authstore::GroupElement elem(std::uint64_t v) {
    return authstore::GroupElement{mpz_class(static_cast<unsigned long>(v))};
}

inline authstore::Scalar scalar(std::uint64_t v) {
    return authstore::Scalar{mpz_class(static_cast<unsigned long>(v))};
}

/// Byte draw that makes GroupParams::random_scalar produce exactly v.
inline Bytes scalar_draw(const authstore::GroupParams& group, std::uint64_t v) {
    std::size_t q_bits = mpz_sizeinbase(group.q().get_mpz_t(), 2);
    std::size_t wide_len = (2 * q_bits + 7) / 8;
    Bytes draw(wide_len, 0);
    // random_scalar computes draw mod (q-1) + 1, so encode v - 1
    std::uint64_t x = v - 1;
    for (std::size_t i = 0; i < 8 && i < wide_len; ++i)
        draw[wide_len - 1 - i] = static_cast<std::uint8_t>(x >> (i * 8));
    return draw;
}

inline authstore::QueuedRng rng_for_scalars(const authstore::GroupParams& group,
                                            std::initializer_list<std::uint64_t> scalars) {
    authstore::QueuedRng rng;
    for (std::uint64_t v : scalars)
        rng.push(scalar_draw(group, v));
    return rng;
}

inline authstore::KdfParams test_kdf(std::uint32_t time_cost = 1, std::uint8_t salt_byte = 0) {
    authstore::KdfParams p;
    p.algorithm = authstore::KdfAlgorithm::TestIterated;
    p.salt.fill(salt_byte);
    p.time_cost = time_cost;
    return p;
}

inline std::string random_password(authstore::Rng& rng, std::size_t len = 16) {
    static const char* alphabet = "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789";
    Bytes raw(len);
    rng.fill(raw);
    std::string out;
    for (std::uint8_t b : raw)
        out.push_back(alphabet[b % 62]);
    return out;
}

/// Fresh scratch directory under the build tree.
inline std::filesystem::path temp_dir(const std::string& tag) {
    static std::mt19937_64 gen{std::random_device{}()};
    auto dir = std::filesystem::temp_directory_path() /
               ("authstore-test-" + tag + "-" + std::to_string(gen()));
    std::filesystem::create_directories(dir);
    return dir;
}

} // namespace testutil
