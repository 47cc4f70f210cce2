#pragma once

#include "authstore/bytes.hpp"
#include "authstore/rng.hpp"

#include <gmpxx.h>

#include <initializer_list>
#include <string>
#include <string_view>

namespace authstore {

/// Exponent in [0, q-1].
struct Scalar {
    mpz_class value;

    bool operator==(const Scalar&) const = default;
};

/// Member of the order-q subgroup of quadratic residues mod p, in [1, p-1].
struct GroupElement {
    mpz_class value;

    bool operator==(const GroupElement&) const = default;
};

enum class BlindDirection { Server, Client };

/// (username, provider id) pair bound into every blinding pad.
struct BlindContext {
    std::string username;
    std::string provider_id;
};

/// Safe-prime group: p = 2q + 1 with q prime, g generating the order-q
/// subgroup of quadratic residues. All protocol algebra lives here.
class GroupParams {
public:
    static const GroupParams& toy();      // p = 23, q = 11, g = 4
    static const GroupParams& test256();  // fixed 256-bit safe prime, g = 4
    static const GroupParams& modp2048(); // RFC 3526 group 14, g = 2
    static const GroupParams& profile(std::string_view name);

    const mpz_class& p() const { return p_; }
    const mpz_class& q() const { return q_; }
    GroupElement generator() const { return GroupElement{g_}; }
    std::size_t encoded_len() const { return encoded_len_; }
    std::string_view name() const { return name_; }

    /// Verifies p = 2q + 1, q prime, g^q = 1, g != 1. Used by the profile
    /// self-checks; throws Error(OutOfRange) on violation.
    void check() const;

    bool is_valid(const GroupElement& e) const;

    GroupElement exp(const GroupElement& base, const Scalar& e) const;
    GroupElement mul(const GroupElement& a, const GroupElement& b) const;

    /// Fixed-length big-endian, zero-padded to encoded_len bytes.
    Bytes encode(const GroupElement& e) const;

    /// Decode + subgroup check. Errors: WrongLength, OutOfRange, NotInSubgroup.
    GroupElement validate_element(ByteView bytes) const;

    /// Digest of width 2*bitlen(q) reduced mod q. May return zero.
    Scalar hash_to_scalar(std::string_view label, std::initializer_list<ByteView> fields) const;

    /// Same, re-hashed with an appended u32be retry counter until nonzero.
    Scalar hash_to_scalar_nonzero(std::string_view label,
                                  std::initializer_list<ByteView> fields) const;

    /// Uniform in [1, q-1]: 2*bitlen(q) random bits reduced mod (q-1), plus 1.
    Scalar random_scalar(Rng& rng) const;

    Bytes encode_scalar(const Scalar& s) const; // big-endian, scalar_len bytes
    Scalar decode_scalar(ByteView bytes) const; // throws OutOfRange if >= q
    std::size_t scalar_len() const;

    /// EKE-style blinding cipher: c = m * g^r with
    /// r = hash_to_scalar("AS-blind-<direction>", [A, B, key_material]).
    /// Every ciphertext is a valid subgroup element under every key.
    GroupElement blind_encrypt(ByteView key_material, BlindDirection direction,
                               const BlindContext& ctx, const GroupElement& m) const;
    GroupElement blind_decrypt(ByteView key_material, BlindDirection direction,
                               const BlindContext& ctx, const GroupElement& c) const;

    /// Pad application with an explicit r, exposed so tests can pin r.
    GroupElement blind_apply(const GroupElement& m, const Scalar& r) const;
    GroupElement blind_remove(const GroupElement& c, const Scalar& r) const;

    Scalar blind_pad_scalar(ByteView key_material, BlindDirection direction,
                            const BlindContext& ctx) const;

private:
    GroupParams(std::string_view name, const char* p_hex, unsigned g);

    std::string name_;
    mpz_class p_;
    mpz_class q_;
    mpz_class g_;
    std::size_t encoded_len_;
};

} // namespace authstore
