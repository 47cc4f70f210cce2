#include "authstore/account.hpp"

#include "authstore/errors.hpp"
#include "authstore/hash.hpp"
#include "authstore/io.hpp"

#include <zlib.h>

#include <chrono>
#include <cstring>

namespace authstore {

namespace {

constexpr char kMagic[4] = {'A', 'S', 'D', 'B'};
constexpr std::uint8_t kVersion = 1;

std::uint32_t record_crc(ByteView data) {
    return static_cast<std::uint32_t>(::crc32(0, data.data(), static_cast<uInt>(data.size())));
}

} // namespace

Clock system_clock_fn() {
    return [] {
        return static_cast<std::int64_t>(
            std::chrono::duration_cast<std::chrono::seconds>(
                std::chrono::system_clock::now().time_since_epoch())
                .count());
    };
}

AccountStore::AccountStore(const GroupParams& group, std::filesystem::path db_path, Clock clock)
    : group_(group), db_path_(std::move(db_path)), clock_(std::move(clock)) {
    if (std::filesystem::exists(db_path_))
        load();
}

void AccountStore::load() {
    Bytes data = read_file(db_path_);
    if (data.size() < 5 || std::memcmp(data.data(), kMagic, 4) != 0)
        raise(ErrorCode::CorruptStore, "bad magic in " + db_path_.string());
    if (data[4] != kVersion)
        raise(ErrorCode::CorruptStore, "unsupported account db version");

    const std::size_t elen = group_.encoded_len();
    std::size_t off = 5;
    while (off < data.size()) {
        std::size_t record_start = off;
        auto need = [&](std::size_t n) {
            if (off + n > data.size())
                raise(ErrorCode::CorruptStore, "truncated record in " + db_path_.string());
        };
        need(2);
        std::uint16_t ulen = get_u16be(data.data() + off);
        off += 2;
        need(ulen);
        std::string username(reinterpret_cast<const char*>(data.data() + off), ulen);
        off += ulen;

        AccountRecord rec;
        rec.username = username;
        need(UserKeyParams::kEncodedLen);
        rec.p_pi = UserKeyParams::decode(
            ByteView(data.data() + off, UserKeyParams::kEncodedLen));
        off += UserKeyParams::kEncodedLen;
        need(elen);
        rec.h = group_.validate_element(ByteView(data.data() + off, elen));
        off += elen;
        need(1);
        std::uint8_t reset_flag = data[off++];
        if (reset_flag == 1) {
            need(elen + 9);
            ResetState reset;
            reset.h_temp = group_.validate_element(ByteView(data.data() + off, elen));
            off += elen;
            reset.expires_at = static_cast<std::int64_t>(get_u64be(data.data() + off));
            off += 8;
            reset.consumed = data[off++] != 0;
            rec.reset = reset;
        } else if (reset_flag != 0) {
            raise(ErrorCode::CorruptStore, "bad reset flag");
        }
        need(16 + 4);
        rec.created_at = static_cast<std::int64_t>(get_u64be(data.data() + off));
        off += 8;
        rec.updated_at = static_cast<std::int64_t>(get_u64be(data.data() + off));
        off += 8;
        std::uint32_t stored = get_u32be(data.data() + off);
        std::uint32_t computed =
            record_crc(ByteView(data.data() + record_start, off - record_start));
        off += 4;
        if (stored != computed)
            raise(ErrorCode::CorruptStore, "record checksum mismatch for " + username);
        accounts_[username] = std::move(rec);
    }
}

void AccountStore::persist_locked() const {
    Bytes out;
    out.insert(out.end(), kMagic, kMagic + 4);
    out.push_back(kVersion);
    for (const auto& [name, rec] : accounts_) {
        Bytes record;
        put_u16be(record, static_cast<std::uint16_t>(name.size()));
        record.insert(record.end(), name.begin(), name.end());
        Bytes params = rec.p_pi.encode();
        record.insert(record.end(), params.begin(), params.end());
        Bytes h = group_.encode(rec.h);
        record.insert(record.end(), h.begin(), h.end());
        if (rec.reset) {
            record.push_back(1);
            Bytes ht = group_.encode(rec.reset->h_temp);
            record.insert(record.end(), ht.begin(), ht.end());
            put_u64be(record, static_cast<std::uint64_t>(rec.reset->expires_at));
            record.push_back(rec.reset->consumed ? 1 : 0);
        } else {
            record.push_back(0);
        }
        put_u64be(record, static_cast<std::uint64_t>(rec.created_at));
        put_u64be(record, static_cast<std::uint64_t>(rec.updated_at));
        put_u32be(record, record_crc(view(record)));
        out.insert(out.end(), record.begin(), record.end());
    }
    write_file_atomic(db_path_, view(out));
}

AccountRecord AccountStore::register_account(std::string_view username,
                                             const UserKeyParams& p_pi, const GroupElement& h) {
    std::string canonical = canonicalize_username(username);
    if (!group_.is_valid(h))
        raise(ErrorCode::InvalidVerifier, "verifier is not a valid group element");
    std::unique_lock lock(mutex_);
    if (accounts_.contains(canonical))
        raise(ErrorCode::UserExists, "account already exists: " + canonical);
    AccountRecord rec;
    rec.username = canonical;
    rec.p_pi = p_pi;
    rec.h = h;
    rec.created_at = clock_();
    rec.updated_at = rec.created_at;
    accounts_[canonical] = rec;
    persist_locked();
    return rec;
}

std::optional<AccountRecord> AccountStore::find(std::string_view username) const {
    std::string canonical = canonicalize_username(username);
    std::shared_lock lock(mutex_);
    auto it = accounts_.find(canonical);
    if (it == accounts_.end())
        return std::nullopt;
    return it->second;
}

AccountRecord& AccountStore::require_locked(std::string_view username) {
    auto it = accounts_.find(canonicalize_username(username));
    if (it == accounts_.end())
        raise(ErrorCode::UnknownUser, "no such account");
    return it->second;
}

void AccountStore::change_credentials(std::string_view username, const UserKeyParams& p_pi,
                                      const GroupElement& h) {
    if (!group_.is_valid(h))
        raise(ErrorCode::InvalidVerifier, "verifier is not a valid group element");
    std::unique_lock lock(mutex_);
    AccountRecord& rec = require_locked(username);
    rec.p_pi = p_pi;
    rec.h = h;
    rec.reset.reset();
    rec.updated_at = clock_();
    persist_locked();
}

Scalar AccountStore::begin_reset(std::string_view username, Rng& rng) {
    std::unique_lock lock(mutex_);
    AccountRecord& rec = require_locked(username);
    Scalar pi_temp = group_.random_scalar(rng);
    ResetState reset;
    reset.h_temp = group_.exp(group_.generator(), pi_temp);
    reset.expires_at = clock_() + kResetLifetimeSeconds;
    reset.consumed = false;
    rec.reset = reset;
    rec.updated_at = clock_();
    persist_locked();
    return pi_temp;
}

std::optional<GroupElement> AccountStore::active_reset_verifier(std::string_view username) const {
    std::shared_lock lock(mutex_);
    auto it = accounts_.find(canonicalize_username(username));
    if (it == accounts_.end() || !it->second.reset)
        return std::nullopt;
    const ResetState& reset = *it->second.reset;
    if (reset.consumed || clock_() >= reset.expires_at)
        return std::nullopt;
    return reset.h_temp;
}

void AccountStore::consume_reset(std::string_view username) {
    std::unique_lock lock(mutex_);
    AccountRecord& rec = require_locked(username);
    if (rec.reset)
        rec.reset->consumed = true;
    rec.updated_at = clock_();
    persist_locked();
}

std::size_t AccountStore::size() const {
    std::shared_lock lock(mutex_);
    return accounts_.size();
}

AccountRecord AccountStore::decoy(const GroupParams& group, ByteView server_secret,
                                  std::string_view username, const KdfParams& cost_template) {
    AccountRecord rec;
    rec.username = std::string(username);

    KdfParams base = cost_template;
    Digest32 salt = labeled_hash("AS-decoy-salt", {server_secret, view(username)});
    std::copy(salt.begin(), salt.begin() + 16, base.salt.begin());
    rec.p_pi.base = base;
    Digest32 usalt = labeled_hash("AS-decoy-usalt", {server_secret, view(username)});
    std::copy(usalt.begin(), usalt.begin() + 16, rec.p_pi.user_salt.begin());

    Scalar pi = group.hash_to_scalar_nonzero("AS-decoy-pi", {server_secret, view(username)});
    rec.h = group.exp(group.generator(), pi);
    return rec;
}

} // namespace authstore
