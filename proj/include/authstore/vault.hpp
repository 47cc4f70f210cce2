#pragma once

#include "authstore/rng.hpp"
#include "authstore/seal.hpp"
#include "authstore/stretch.hpp"

#include <optional>
#include <string>
#include <vector>

namespace authstore {

enum class RecordKind : std::uint8_t {
    WebPassword = 1,
    UserKeyCache = 2, // stores K_u and P_u for a provider; never a base key
};

struct CredentialRecord {
    std::string site;
    std::string login;
    Bytes secret;
    RecordKind kind = RecordKind::WebPassword;
    std::optional<UserKeyParams> user_key_params; // kind == UserKeyCache only

    bool operator==(const CredentialRecord&) const = default;
};

/// P_data = [enc(k_sym), P_{u,data}]: the wrapped key-chain head.
struct DataParams {
    UserKeyParams u_params;
    Nonce12 wrap_nonce{};
    std::array<std::uint8_t, 48> wrapped_key{}; // 32-byte k_sym + 16-byte tag

    bool operator==(const DataParams&) const = default;
};

/// Vault file: "AVLT" || version || KdfParams (29) || user_salt (16) ||
/// wrap nonce (12) || wrapped key (48) || payload nonce (12) ||
/// u32be payload length || sealed payload.
struct VaultDocument {
    DataParams data_params;
    Nonce12 payload_nonce{};
    Bytes payload; // sealed record list under k_sym

    Bytes encode() const;
    static VaultDocument decode(ByteView bytes); // Error(CorruptVault) on bad layout
};

class VaultHandle {
public:
    const std::vector<CredentialRecord>& records() const { return records_; }

    void add_record(CredentialRecord rec);            // Error(DuplicateRecord)
    void upsert_record(CredentialRecord rec);         // insert-or-replace
    const CredentialRecord& get_record(std::string_view site, std::string_view login) const;
    const std::vector<CredentialRecord>& list_records() const { return records_; }

    /// Reseals the record list with a fresh payload nonce; DataParams are
    /// carried over unchanged.
    VaultDocument save(Rng& rng) const;

private:
    friend VaultHandle vault_open(const VaultDocument&, ByteView);
    friend VaultDocument vault_create(ByteView, const KdfParams&, Rng&);

    DataParams data_params_;
    Key32 k_sym_{};
    std::vector<CredentialRecord> records_;
};

VaultDocument vault_create(ByteView password, const KdfParams& kdf_params, Rng& rng);

/// Errors: VaultLocked (wrap seal fails: wrong password), CorruptVault
/// (payload seal fails despite a correct k_sym).
VaultHandle vault_open(const VaultDocument& document, ByteView password);

/// Rewraps k_sym under the new password; the sealed payload bytes are
/// carried over verbatim, without being decrypted.
VaultDocument vault_change_password(const VaultDocument& document, ByteView old_password,
                                    ByteView new_password, const KdfParams& new_kdf_params,
                                    Rng& rng);

Bytes serialize_records(const std::vector<CredentialRecord>& records); // deterministic, sorted
std::vector<CredentialRecord> deserialize_records(ByteView bytes);

} // namespace authstore
