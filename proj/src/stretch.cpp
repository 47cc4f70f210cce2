#include "authstore/stretch.hpp"

#include "authstore/errors.hpp"
#include "authstore/hash.hpp"

#include <sodium.h>

#include <atomic>
#include <cstring>

namespace authstore {

namespace {

std::atomic<std::uint64_t> g_kdf_evaluations{0};

// Sanity bounds: a served parameter block with costs beyond these is
// rejected before any derivation work, so a hostile challenge cannot pin
// the client to an unbounded computation.
constexpr std::uint32_t kMinMemCostKib = 8;
constexpr std::uint32_t kMaxMemCostKib = 4u * 1024 * 1024; // 4 GiB
constexpr std::uint32_t kMaxTimeCost = 1'000'000;
constexpr std::uint32_t kMaxParallelism = 64;

} // namespace

std::uint64_t kdf_evaluation_count() {
    return g_kdf_evaluations.load();
}

KdfParams KdfParams::memory_hard(Rng& rng, std::uint32_t mem_cost_kib, std::uint32_t time_cost,
                                 std::uint32_t parallelism) {
    KdfParams p;
    p.algorithm = KdfAlgorithm::MemoryHard;
    rng.fill(p.salt);
    p.mem_cost_kib = mem_cost_kib;
    p.time_cost = time_cost;
    p.parallelism = parallelism;
    p.validate();
    return p;
}

KdfParams KdfParams::test_iterated(Rng& rng, std::uint32_t time_cost) {
    KdfParams p;
    p.algorithm = KdfAlgorithm::TestIterated;
    rng.fill(p.salt);
    p.time_cost = time_cost;
    p.validate();
    return p;
}

void KdfParams::validate() const {
    switch (algorithm) {
    case KdfAlgorithm::MemoryHard:
        if (time_cost < 1 || time_cost > kMaxTimeCost)
            raise(ErrorCode::CostOutOfRange, "time_cost out of range");
        if (mem_cost_kib < kMinMemCostKib || mem_cost_kib > kMaxMemCostKib)
            raise(ErrorCode::CostOutOfRange, "mem_cost out of range");
        if (parallelism < 1 || parallelism > kMaxParallelism)
            raise(ErrorCode::CostOutOfRange, "parallelism out of range");
        return;
    case KdfAlgorithm::TestIterated:
        if (time_cost < 1 || time_cost > kMaxTimeCost)
            raise(ErrorCode::CostOutOfRange, "time_cost out of range");
        if (mem_cost_kib != 0 || parallelism != 0)
            raise(ErrorCode::CostOutOfRange, "unused cost fields must be zero");
        return;
    }
    raise(ErrorCode::UnsupportedAlgorithm,
          "unknown KDF algorithm id " + std::to_string(static_cast<unsigned>(algorithm)));
}

Bytes KdfParams::encode() const {
    validate();
    Bytes out;
    out.reserve(kEncodedLen);
    out.push_back(static_cast<std::uint8_t>(algorithm));
    out.insert(out.end(), salt.begin(), salt.end());
    put_u32be(out, mem_cost_kib);
    put_u32be(out, time_cost);
    put_u32be(out, parallelism);
    return out;
}

KdfParams KdfParams::decode(ByteView bytes) {
    if (bytes.size() != kEncodedLen)
        raise(ErrorCode::WrongLength, "KdfParams encoding must be 29 bytes");
    KdfParams p;
    std::uint8_t alg = bytes[0];
    if (alg != static_cast<std::uint8_t>(KdfAlgorithm::MemoryHard) &&
        alg != static_cast<std::uint8_t>(KdfAlgorithm::TestIterated))
        raise(ErrorCode::UnsupportedAlgorithm, "unknown KDF algorithm id " + std::to_string(alg));
    p.algorithm = static_cast<KdfAlgorithm>(alg);
    std::copy(bytes.begin() + 1, bytes.begin() + 17, p.salt.begin());
    p.mem_cost_kib = get_u32be(bytes.data() + 17);
    p.time_cost = get_u32be(bytes.data() + 21);
    p.parallelism = get_u32be(bytes.data() + 25);
    p.validate();
    return p;
}

Bytes UserKeyParams::encode() const {
    Bytes out = base.encode();
    out.insert(out.end(), user_salt.begin(), user_salt.end());
    return out;
}

UserKeyParams UserKeyParams::decode(ByteView bytes) {
    if (bytes.size() != kEncodedLen)
        raise(ErrorCode::WrongLength, "UserKeyParams encoding must be 45 bytes");
    UserKeyParams p;
    p.base = KdfParams::decode(bytes.subspan(0, KdfParams::kEncodedLen));
    std::copy(bytes.begin() + KdfParams::kEncodedLen, bytes.end(), p.user_salt.begin());
    return p;
}

namespace {

BaseKey derive_test_iterated(const KdfParams& params, ByteView password) {
    // H applied time_cost times to "AS-kdf-test" || salt || password.
    Bytes input = to_bytes("AS-kdf-test");
    input.insert(input.end(), params.salt.begin(), params.salt.end());
    input.insert(input.end(), password.begin(), password.end());
    Digest32 digest = sha256(view(input));
    for (std::uint32_t i = 1; i < params.time_cost; ++i)
        digest = sha256(view(digest));
    BaseKey key;
    key.bytes = digest;
    return key;
}

BaseKey derive_memory_hard(const KdfParams& params, ByteView password) {
    // libsodium's Argon2id computes with a single lane.
    if (params.parallelism != 1)
        raise(ErrorCode::CostOutOfRange, "only parallelism = 1 is supported");
    static_assert(crypto_pwhash_argon2id_SALTBYTES == 16);
    BaseKey key;
    int rc = crypto_pwhash_argon2id(
        key.bytes.data(), key.bytes.size(), reinterpret_cast<const char*>(password.data()),
        password.size(), params.salt.data(), params.time_cost,
        static_cast<std::size_t>(params.mem_cost_kib) * 1024, crypto_pwhash_argon2id_ALG_ARGON2ID13);
    if (rc != 0)
        raise(ErrorCode::CostOutOfRange, "argon2id rejected the cost parameters");
    return key;
}

} // namespace

BaseKey derive_base_key(const KdfParams& params, ByteView password) {
    if (password.empty())
        raise(ErrorCode::EmptyPassword, "password must not be empty");
    params.validate();
    ensure_sodium_init();
    g_kdf_evaluations.fetch_add(1);
    switch (params.algorithm) {
    case KdfAlgorithm::TestIterated:
        return derive_test_iterated(params, password);
    case KdfAlgorithm::MemoryHard:
        return derive_memory_hard(params, password);
    }
    raise(ErrorCode::UnsupportedAlgorithm, "unreachable");
}

UserKey derive_user_key(const BaseKey& base, ByteView user_salt) {
    UserKey key;
    key.bytes = labeled_hash("AS-userkey", {view(base.bytes), user_salt});
    return key;
}

UserKey user_key_from_password(const UserKeyParams& params, ByteView password) {
    auto& cache = BaseKeyCache::global();
    BaseKey base;
    if (auto hit = cache.lookup(params.base, password)) {
        base = *hit;
    } else {
        base = derive_base_key(params.base, password);
        cache.insert(params.base, password, base);
    }
    return derive_user_key(base, view(params.user_salt));
}

Scalar to_auth_scalar(const UserKey& key, const GroupParams& group) {
    return group.hash_to_scalar_nonzero("AS-pi", {view(key.bytes)});
}

namespace {
std::string cache_key(const KdfParams& params, ByteView password) {
    Bytes encoded = params.encode();
    Digest32 d = labeled_hash("AS-cache", {view(encoded), password});
    return std::string(d.begin(), d.end());
}
} // namespace

std::optional<BaseKey> BaseKeyCache::lookup(const KdfParams& params, ByteView password) const {
    std::string k = cache_key(params, password);
    std::lock_guard lock(mutex_);
    auto it = entries_.find(k);
    if (it == entries_.end())
        return std::nullopt;
    return it->second;
}

void BaseKeyCache::insert(const KdfParams& params, ByteView password, const BaseKey& key) {
    std::string k = cache_key(params, password);
    std::lock_guard lock(mutex_);
    entries_[k] = key;
}

void BaseKeyCache::clear() {
    std::lock_guard lock(mutex_);
    entries_.clear();
}

std::size_t BaseKeyCache::size() const {
    std::lock_guard lock(mutex_);
    return entries_.size();
}

BaseKeyCache& BaseKeyCache::global() {
    static BaseKeyCache cache;
    return cache;
}

} // namespace authstore
