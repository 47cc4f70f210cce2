#include "authstore/seal.hpp"

#include "authstore/errors.hpp"
#include "authstore/hash.hpp"

#include <sodium.h>

namespace authstore {

static_assert(crypto_aead_chacha20poly1305_ietf_KEYBYTES == 32);
static_assert(crypto_aead_chacha20poly1305_ietf_NPUBBYTES == 12);
static_assert(crypto_aead_chacha20poly1305_ietf_ABYTES == kSealOverhead);

Nonce12 seq_nonce(std::uint64_t seq) {
    Nonce12 nonce{};
    for (int i = 0; i < 8; ++i)
        nonce[4 + i] = static_cast<std::uint8_t>(seq >> ((7 - i) * 8));
    return nonce;
}

Bytes seal(const Key32& key, const Nonce12& nonce, ByteView plaintext) {
    ensure_sodium_init();
    Bytes out(plaintext.size() + kSealOverhead);
    unsigned long long out_len = 0;
    crypto_aead_chacha20poly1305_ietf_encrypt(out.data(), &out_len, plaintext.data(),
                                              plaintext.size(), nullptr, 0, nullptr, nonce.data(),
                                              key.data());
    out.resize(out_len);
    return out;
}

Bytes open(const Key32& key, const Nonce12& nonce, ByteView sealed) {
    ensure_sodium_init();
    if (sealed.size() < kSealOverhead)
        raise(ErrorCode::SealAuthFail, "sealed box too short");
    Bytes out(sealed.size() - kSealOverhead);
    unsigned long long out_len = 0;
    int rc = crypto_aead_chacha20poly1305_ietf_decrypt(out.data(), &out_len, nullptr,
                                                       sealed.data(), sealed.size(), nullptr, 0,
                                                       nonce.data(), key.data());
    if (rc != 0)
        raise(ErrorCode::SealAuthFail, "authentication failed");
    out.resize(out_len);
    return out;
}

} // namespace authstore
