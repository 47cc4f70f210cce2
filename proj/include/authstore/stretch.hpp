#pragma once

#include "authstore/bytes.hpp"
#include "authstore/group.hpp"
#include "authstore/rng.hpp"

#include <array>
#include <cstdint>
#include <mutex>
#include <optional>
#include <unordered_map>

namespace authstore {

enum class KdfAlgorithm : std::uint8_t {
    MemoryHard = 1,   // Argon2id
    TestIterated = 2, // iterated SHA-256, oracle-verifiable
};

/// Base-key derivation parameters P_K. Wire/storage encoding is 29 bytes:
/// 1-byte algorithm id, 16-byte salt, then mem_cost_kib, time_cost and
/// parallelism as 4-byte big-endian fields (zero where unused).
struct KdfParams {
    KdfAlgorithm algorithm = KdfAlgorithm::MemoryHard;
    std::array<std::uint8_t, 16> salt{};
    std::uint32_t mem_cost_kib = 0;
    std::uint32_t time_cost = 0;
    std::uint32_t parallelism = 0;

    static constexpr std::size_t kEncodedLen = 29;

    static KdfParams memory_hard(Rng& rng, std::uint32_t mem_cost_kib = 64 * 1024,
                                 std::uint32_t time_cost = 3, std::uint32_t parallelism = 1);
    static KdfParams test_iterated(Rng& rng, std::uint32_t time_cost = 3);

    void validate() const; // UnsupportedAlgorithm / CostOutOfRange
    Bytes encode() const;
    static KdfParams decode(ByteView bytes);

    bool operator==(const KdfParams&) const = default;
};

struct BaseKey {
    std::array<std::uint8_t, 32> bytes{};

    bool operator==(const BaseKey&) const = default;
};

/// P_u = [P_K, user_salt]; 45-byte encoding.
struct UserKeyParams {
    KdfParams base;
    std::array<std::uint8_t, 16> user_salt{};

    static constexpr std::size_t kEncodedLen = KdfParams::kEncodedLen + 16;

    Bytes encode() const;
    static UserKeyParams decode(ByteView bytes);

    bool operator==(const UserKeyParams&) const = default;
};

struct UserKey {
    std::array<std::uint8_t, 32> bytes{};

    bool operator==(const UserKey&) const = default;
};

/// K = KDF(P_K, pw). The expensive step; bumps the evaluation probe.
BaseKey derive_base_key(const KdfParams& params, ByteView password);

/// K_u = H("AS-userkey", K, user_salt).
UserKey derive_user_key(const BaseKey& base, ByteView user_salt);

/// U(P_u, pw) = derive_user_key(derive_base_key(P_K, pw), user_salt),
/// consulting the global base-key cache first.
UserKey user_key_from_password(const UserKeyParams& params, ByteView password);

/// pi = hash_to_scalar_nonzero("AS-pi", [K_u]); always in [1, q-1].
Scalar to_auth_scalar(const UserKey& key, const GroupParams& group);

/// In-memory only; keyed by H("AS-cache", encode(P_K), password).
class BaseKeyCache {
public:
    std::optional<BaseKey> lookup(const KdfParams& params, ByteView password) const;
    void insert(const KdfParams& params, ByteView password, const BaseKey& key);
    void clear();
    std::size_t size() const;

    static BaseKeyCache& global();

private:
    mutable std::mutex mutex_;
    std::unordered_map<std::string, BaseKey> entries_;
};

/// Probe: number of actual KDF evaluations in this process. Cache hits
/// leave it unchanged.
std::uint64_t kdf_evaluation_count();

} // namespace authstore
