#include "authstore/group.hpp"

#include "authstore/errors.hpp"
#include "authstore/hash.hpp"

#include <vector>

namespace authstore {

namespace {

// Seeded search from SHA-512("authstore-test-group-256"): the first safe
// prime at or above the seed value. q has 255 bits so p has exactly 256.
constexpr const char* kTest256PHex =
    "B49B7285521E5A76EC75E8A21A8F81DE31C7C7C981FAAE7388F0742F930C4B37";

// RFC 3526 group 14 (2048-bit MODP). p = 7 mod 8, so 2 is a quadratic
// residue and generates the order-q subgroup.
constexpr const char* kModp2048PHex =
    "FFFFFFFFFFFFFFFFC90FDAA22168C234C4C6628B80DC1CD129024E088A67CC74"
    "020BBEA63B139B22514A08798E3404DDEF9519B3CD3A431B302B0A6DF25F1437"
    "4FE1356D6D51C245E485B576625E7EC6F44C42E9A637ED6B0BFF5CB6F406B7ED"
    "EE386BFB5A899FA5AE9F24117C4B1FE649286651ECE45B3DC2007CB8A163BF05"
    "98DA48361C55D39A69163FA8FD24CF5F83655D23DCA3AD961C62F356208552BB"
    "9ED529077096966D670C354E4ABC9804F1746C08CA18217C32905E462E36CE3B"
    "E39E772C180E86039B2783A2EC07A28FB5C55DF06F4C52C9DE2BCBF695581718"
    "3995497CEA956AE515D2261898FA051015728E5A8AACAA68FFFFFFFFFFFFFFFF";

mpz_class from_be_bytes(ByteView bytes) {
    mpz_class v;
    mpz_import(v.get_mpz_t(), bytes.size(), 1, 1, 1, 0, bytes.data());
    return v;
}

Bytes to_be_bytes(const mpz_class& v, std::size_t len) {
    Bytes out(len, 0);
    if (v != 0) {
        std::size_t vlen = (mpz_sizeinbase(v.get_mpz_t(), 2) + 7) / 8;
        std::size_t count = 0;
        mpz_export(out.data() + len - vlen, &count, 1, 1, 1, 0, v.get_mpz_t());
    }
    return out;
}

} // namespace

GroupParams::GroupParams(std::string_view name, const char* p_hex, unsigned g)
    : name_(name), p_(p_hex, 16), g_(g) {
    q_ = (p_ - 1) / 2;
    encoded_len_ = (mpz_sizeinbase(p_.get_mpz_t(), 2) + 7) / 8;
}

const GroupParams& GroupParams::toy() {
    static const GroupParams g("toy", "17", 4); // p = 23
    return g;
}

const GroupParams& GroupParams::test256() {
    static const GroupParams g("test-256", kTest256PHex, 4);
    return g;
}

const GroupParams& GroupParams::modp2048() {
    static const GroupParams g("modp-2048", kModp2048PHex, 2);
    return g;
}

const GroupParams& GroupParams::profile(std::string_view name) {
    if (name == "toy") return toy();
    if (name == "test-256") return test256();
    if (name == "modp-2048") return modp2048();
    raise(ErrorCode::OutOfRange, "unknown group profile: " + std::string(name));
}

void GroupParams::check() const {
    if (p_ != 2 * q_ + 1)
        raise(ErrorCode::OutOfRange, "p != 2q + 1");
    if (mpz_probab_prime_p(p_.get_mpz_t(), 40) == 0)
        raise(ErrorCode::OutOfRange, "p is not prime");
    if (mpz_probab_prime_p(q_.get_mpz_t(), 40) == 0)
        raise(ErrorCode::OutOfRange, "q is not prime");
    if (g_ <= 1 || g_ >= p_)
        raise(ErrorCode::OutOfRange, "generator out of range");
    mpz_class r;
    mpz_powm(r.get_mpz_t(), g_.get_mpz_t(), q_.get_mpz_t(), p_.get_mpz_t());
    if (r != 1)
        raise(ErrorCode::OutOfRange, "generator not in the order-q subgroup");
    if (encoded_len_ != (mpz_sizeinbase(p_.get_mpz_t(), 2) + 7) / 8)
        raise(ErrorCode::OutOfRange, "encoded_len mismatch");
}

bool GroupParams::is_valid(const GroupElement& e) const {
    if (e.value < 1 || e.value >= p_)
        return false;
    mpz_class r;
    mpz_powm(r.get_mpz_t(), e.value.get_mpz_t(), q_.get_mpz_t(), p_.get_mpz_t());
    return r == 1;
}

GroupElement GroupParams::exp(const GroupElement& base, const Scalar& e) const {
    GroupElement out;
    mpz_powm(out.value.get_mpz_t(), base.value.get_mpz_t(), e.value.get_mpz_t(), p_.get_mpz_t());
    return out;
}

GroupElement GroupParams::mul(const GroupElement& a, const GroupElement& b) const {
    GroupElement out;
    out.value = (a.value * b.value) % p_;
    return out;
}

Bytes GroupParams::encode(const GroupElement& e) const {
    return to_be_bytes(e.value, encoded_len_);
}

GroupElement GroupParams::validate_element(ByteView bytes) const {
    if (bytes.size() != encoded_len_)
        raise(ErrorCode::WrongLength, "element encoding must be " + std::to_string(encoded_len_) +
                                          " bytes, got " + std::to_string(bytes.size()));
    GroupElement e{from_be_bytes(bytes)};
    if (e.value < 1 || e.value >= p_)
        raise(ErrorCode::OutOfRange, "element value outside [1, p-1]");
    mpz_class r;
    mpz_powm(r.get_mpz_t(), e.value.get_mpz_t(), q_.get_mpz_t(), p_.get_mpz_t());
    if (r != 1)
        raise(ErrorCode::NotInSubgroup, "element not in the order-q subgroup");
    return e;
}

std::size_t GroupParams::scalar_len() const {
    return (mpz_sizeinbase(q_.get_mpz_t(), 2) + 7) / 8;
}

Bytes GroupParams::encode_scalar(const Scalar& s) const {
    return to_be_bytes(s.value, scalar_len());
}

Scalar GroupParams::decode_scalar(ByteView bytes) const {
    if (bytes.size() != scalar_len())
        raise(ErrorCode::WrongLength,
              "scalar encoding must be " + std::to_string(scalar_len()) + " bytes");
    Scalar s{from_be_bytes(bytes)};
    if (s.value >= q_)
        raise(ErrorCode::OutOfRange, "scalar >= q");
    return s;
}

Scalar GroupParams::hash_to_scalar(std::string_view label,
                                   std::initializer_list<ByteView> fields) const {
    std::size_t q_bits = mpz_sizeinbase(q_.get_mpz_t(), 2);
    std::size_t digest_len = (2 * q_bits + 7) / 8;
    Bytes digest = labeled_expand(label, fields, digest_len);
    return Scalar{from_be_bytes(view(digest)) % q_};
}

Scalar GroupParams::hash_to_scalar_nonzero(std::string_view label,
                                           std::initializer_list<ByteView> fields) const {
    Scalar s = hash_to_scalar(label, fields);
    std::uint32_t retry = 1;
    while (s.value == 0) {
        std::vector<ByteView> extended(fields.begin(), fields.end());
        Bytes counter = u32be_bytes(retry++);
        extended.push_back(view(counter));
        std::size_t q_bits = mpz_sizeinbase(q_.get_mpz_t(), 2);
        std::size_t digest_len = (2 * q_bits + 7) / 8;
        Bytes digest = labeled_expand(label, std::span<const ByteView>(extended), digest_len);
        s.value = from_be_bytes(view(digest)) % q_;
    }
    return s;
}

Scalar GroupParams::random_scalar(Rng& rng) const {
    std::size_t q_bits = mpz_sizeinbase(q_.get_mpz_t(), 2);
    std::size_t wide_len = (2 * q_bits + 7) / 8;
    Bytes wide(wide_len);
    rng.fill(wide);
    return Scalar{from_be_bytes(view(wide)) % (q_ - 1) + 1};
}

Scalar GroupParams::blind_pad_scalar(ByteView key_material, BlindDirection direction,
                                     const BlindContext& ctx) const {
    std::string_view label =
        direction == BlindDirection::Server ? "AS-blind-server" : "AS-blind-client";
    return hash_to_scalar(label, {view(ctx.username), view(ctx.provider_id), key_material});
}

GroupElement GroupParams::blind_apply(const GroupElement& m, const Scalar& r) const {
    return mul(m, exp(generator(), r));
}

GroupElement GroupParams::blind_remove(const GroupElement& c, const Scalar& r) const {
    Scalar inv{(q_ - r.value) % q_};
    return mul(c, exp(generator(), inv));
}

GroupElement GroupParams::blind_encrypt(ByteView key_material, BlindDirection direction,
                                        const BlindContext& ctx, const GroupElement& m) const {
    return blind_apply(m, blind_pad_scalar(key_material, direction, ctx));
}

GroupElement GroupParams::blind_decrypt(ByteView key_material, BlindDirection direction,
                                        const BlindContext& ctx, const GroupElement& c) const {
    return blind_remove(c, blind_pad_scalar(key_material, direction, ctx));
}

} // namespace authstore
