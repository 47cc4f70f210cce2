#include "authstore/vault.hpp"

#include "authstore/errors.hpp"

#include <algorithm>
#include <cstring>

namespace authstore {

namespace {

constexpr char kMagic[4] = {'A', 'V', 'L', 'T'};
constexpr std::uint8_t kVersion = 1;

Key32 data_key(const UserKeyParams& u_params, ByteView password) {
    UserKey k_data = user_key_from_password(u_params, password);
    return k_data.bytes;
}

Key32 unwrap_k_sym(const DataParams& dp, ByteView password) {
    Bytes k_sym_bytes;
    try {
        k_sym_bytes = open(data_key(dp.u_params, password), dp.wrap_nonce, view(dp.wrapped_key));
    } catch (const Error& e) {
        if (e.code() == ErrorCode::SealAuthFail)
            raise(ErrorCode::VaultLocked, "wrong password");
        throw;
    }
    if (k_sym_bytes.size() != 32)
        raise(ErrorCode::CorruptVault, "unwrapped key has wrong length");
    Key32 k_sym;
    std::copy(k_sym_bytes.begin(), k_sym_bytes.end(), k_sym.begin());
    return k_sym;
}

DataParams wrap_k_sym(const Key32& k_sym, ByteView password, const KdfParams& kdf_params,
                      Rng& rng) {
    DataParams dp;
    dp.u_params.base = kdf_params;
    rng.fill(dp.u_params.user_salt);
    rng.fill(dp.wrap_nonce);
    Bytes wrapped = seal(data_key(dp.u_params, password), dp.wrap_nonce, view(k_sym));
    if (wrapped.size() != dp.wrapped_key.size())
        raise(ErrorCode::CorruptVault, "unexpected wrapped key length");
    std::copy(wrapped.begin(), wrapped.end(), dp.wrapped_key.begin());
    return dp;
}

void sort_records(std::vector<CredentialRecord>& records) {
    std::sort(records.begin(), records.end(), [](const auto& a, const auto& b) {
        return std::tie(a.site, a.login) < std::tie(b.site, b.login);
    });
}

void put_str16(Bytes& out, ByteView s) {
    if (s.size() > 0xffff)
        raise(ErrorCode::Oversize, "record field exceeds 65535 bytes");
    put_u16be(out, static_cast<std::uint16_t>(s.size()));
    out.insert(out.end(), s.begin(), s.end());
}

} // namespace

Bytes serialize_records(const std::vector<CredentialRecord>& records) {
    std::vector<CredentialRecord> sorted = records;
    sort_records(sorted);
    Bytes out;
    put_u32be(out, static_cast<std::uint32_t>(sorted.size()));
    for (const auto& rec : sorted) {
        put_str16(out, view(rec.site));
        put_str16(out, view(rec.login));
        put_str16(out, view(rec.secret));
        out.push_back(static_cast<std::uint8_t>(rec.kind));
        if (rec.user_key_params) {
            out.push_back(1);
            Bytes p = rec.user_key_params->encode();
            out.insert(out.end(), p.begin(), p.end());
        } else {
            out.push_back(0);
        }
    }
    return out;
}

std::vector<CredentialRecord> deserialize_records(ByteView bytes) {
    std::size_t off = 0;
    auto need = [&](std::size_t n) {
        if (off + n > bytes.size())
            raise(ErrorCode::CorruptVault, "truncated record list");
    };
    need(4);
    std::uint32_t count = get_u32be(bytes.data());
    off = 4;
    std::vector<CredentialRecord> records;
    records.reserve(count);
    auto read_str = [&]() {
        need(2);
        std::uint16_t len = get_u16be(bytes.data() + off);
        off += 2;
        need(len);
        Bytes b(bytes.begin() + off, bytes.begin() + off + len);
        off += len;
        return b;
    };
    for (std::uint32_t i = 0; i < count; ++i) {
        CredentialRecord rec;
        rec.site = to_string(view(read_str()));
        rec.login = to_string(view(read_str()));
        rec.secret = read_str();
        need(2);
        std::uint8_t kind = bytes[off++];
        if (kind != static_cast<std::uint8_t>(RecordKind::WebPassword) &&
            kind != static_cast<std::uint8_t>(RecordKind::UserKeyCache))
            raise(ErrorCode::CorruptVault, "unknown record kind");
        rec.kind = static_cast<RecordKind>(kind);
        std::uint8_t has_params = bytes[off++];
        if (has_params == 1) {
            need(UserKeyParams::kEncodedLen);
            rec.user_key_params = UserKeyParams::decode(
                ByteView(bytes.data() + off, UserKeyParams::kEncodedLen));
            off += UserKeyParams::kEncodedLen;
        } else if (has_params != 0) {
            raise(ErrorCode::CorruptVault, "bad params flag");
        }
        records.push_back(std::move(rec));
    }
    if (off != bytes.size())
        raise(ErrorCode::CorruptVault, "trailing bytes after record list");
    return records;
}

Bytes VaultDocument::encode() const {
    Bytes out;
    out.insert(out.end(), kMagic, kMagic + 4);
    out.push_back(kVersion);
    Bytes params = data_params.u_params.base.encode();
    out.insert(out.end(), params.begin(), params.end());
    out.insert(out.end(), data_params.u_params.user_salt.begin(),
               data_params.u_params.user_salt.end());
    out.insert(out.end(), data_params.wrap_nonce.begin(), data_params.wrap_nonce.end());
    out.insert(out.end(), data_params.wrapped_key.begin(), data_params.wrapped_key.end());
    out.insert(out.end(), payload_nonce.begin(), payload_nonce.end());
    put_u32be(out, static_cast<std::uint32_t>(payload.size()));
    out.insert(out.end(), payload.begin(), payload.end());
    return out;
}

VaultDocument VaultDocument::decode(ByteView bytes) {
    constexpr std::size_t kHeaderLen = 4 + 1 + KdfParams::kEncodedLen + 16 + 12 + 48 + 12 + 4;
    if (bytes.size() < kHeaderLen)
        raise(ErrorCode::CorruptVault, "vault file too short");
    if (std::memcmp(bytes.data(), kMagic, 4) != 0)
        raise(ErrorCode::CorruptVault, "bad vault magic");
    if (bytes[4] != kVersion)
        raise(ErrorCode::CorruptVault, "unsupported vault version");
    std::size_t off = 5;
    VaultDocument doc;
    try {
        doc.data_params.u_params.base =
            KdfParams::decode(ByteView(bytes.data() + off, KdfParams::kEncodedLen));
    } catch (const Error&) {
        raise(ErrorCode::CorruptVault, "bad KDF parameter block");
    }
    off += KdfParams::kEncodedLen;
    std::copy(bytes.begin() + off, bytes.begin() + off + 16,
              doc.data_params.u_params.user_salt.begin());
    off += 16;
    std::copy(bytes.begin() + off, bytes.begin() + off + 12, doc.data_params.wrap_nonce.begin());
    off += 12;
    std::copy(bytes.begin() + off, bytes.begin() + off + 48, doc.data_params.wrapped_key.begin());
    off += 48;
    std::copy(bytes.begin() + off, bytes.begin() + off + 12, doc.payload_nonce.begin());
    off += 12;
    std::uint32_t payload_len = get_u32be(bytes.data() + off);
    off += 4;
    if (bytes.size() != off + payload_len)
        raise(ErrorCode::CorruptVault, "payload length mismatch");
    doc.payload.assign(bytes.begin() + off, bytes.end());
    return doc;
}

VaultDocument vault_create(ByteView password, const KdfParams& kdf_params, Rng& rng) {
    if (password.empty())
        raise(ErrorCode::EmptyPassword, "password must not be empty");
    VaultHandle handle;
    rng.fill(handle.k_sym_);
    handle.data_params_ = wrap_k_sym(handle.k_sym_, password, kdf_params, rng);
    return handle.save(rng);
}

VaultHandle vault_open(const VaultDocument& document, ByteView password) {
    VaultHandle handle;
    handle.data_params_ = document.data_params;
    handle.k_sym_ = unwrap_k_sym(document.data_params, password);
    Bytes plain;
    try {
        plain = open(handle.k_sym_, document.payload_nonce, view(document.payload));
    } catch (const Error& e) {
        if (e.code() == ErrorCode::SealAuthFail)
            raise(ErrorCode::CorruptVault, "payload authentication failed");
        throw;
    }
    handle.records_ = deserialize_records(view(plain));
    return handle;
}

VaultDocument vault_change_password(const VaultDocument& document, ByteView old_password,
                                    ByteView new_password, const KdfParams& new_kdf_params,
                                    Rng& rng) {
    if (new_password.empty())
        raise(ErrorCode::EmptyPassword, "password must not be empty");
    Key32 k_sym = unwrap_k_sym(document.data_params, old_password);
    VaultDocument out;
    out.data_params = wrap_k_sym(k_sym, new_password, new_kdf_params, rng);
    out.payload_nonce = document.payload_nonce;
    out.payload = document.payload; // untouched: the key chain's whole point
    return out;
}

void VaultHandle::add_record(CredentialRecord rec) {
    for (const auto& existing : records_)
        if (existing.site == rec.site && existing.login == rec.login)
            raise(ErrorCode::DuplicateRecord, rec.site + "/" + rec.login + " already present");
    records_.push_back(std::move(rec));
    sort_records(records_);
}

void VaultHandle::upsert_record(CredentialRecord rec) {
    for (auto& existing : records_) {
        if (existing.site == rec.site && existing.login == rec.login) {
            existing = std::move(rec);
            return;
        }
    }
    records_.push_back(std::move(rec));
    sort_records(records_);
}

const CredentialRecord& VaultHandle::get_record(std::string_view site,
                                                std::string_view login) const {
    for (const auto& rec : records_)
        if (rec.site == site && rec.login == login)
            return rec;
    raise(ErrorCode::NotFound, std::string(site) + "/" + std::string(login) + " not in vault");
}

VaultDocument VaultHandle::save(Rng& rng) const {
    VaultDocument doc;
    doc.data_params = data_params_;
    rng.fill(doc.payload_nonce);
    Bytes plain = serialize_records(records_);
    doc.payload = seal(k_sym_, doc.payload_nonce, view(plain));
    return doc;
}

} // namespace authstore
