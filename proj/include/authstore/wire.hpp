#pragma once

#include "authstore/bytes.hpp"
#include "authstore/seal.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace authstore::wire {

// Frame layout: u32be body length || type byte || fields, where every
// field is a u16be length followed by that many octets. Body length
// covers the type byte and the fields and is capped at 1 MiB.
inline constexpr std::size_t kMaxBodyLen = 1024 * 1024;
inline constexpr std::uint8_t kProtocolVersion = 1;

enum class MsgType : std::uint8_t {
    AuthRequest = 0x01,
    AuthChallenge = 0x02,
    AuthResponse = 0x03,
    AuthConfirm = 0x04,
    Register = 0x10,
    RegisterOk = 0x11,
    ErrorReply = 0x12,
    Channel = 0x20,
    PutBlob = 0x30,
    GetBlob = 0x31,
    BlobData = 0x32,
    ChangeCredentials = 0x33,
    ResetBegin = 0x34,
    ResetToken = 0x35,
    Ok = 0x36,
};

/// Error codes carried by ErrorReply frames.
enum class ReplyCode : std::uint16_t {
    RateLimited = 1,
    UserExists = 2,
    InvalidRequest = 3,
    ProtocolError = 4,
    ResetRequired = 5,
    VersionConflict = 6,
    NotFound = 7,
};

struct Frame {
    MsgType type;
    std::vector<Bytes> fields;
};

/// Number of fields each frame type carries; fixed per type.
std::size_t field_count(MsgType type);

Bytes encode_frame(const Frame& frame);
Bytes encode_frame(MsgType type, std::vector<Bytes> fields);

/// Strict decode: rejects truncation, trailing bytes, unknown types,
/// wrong field counts and oversize bodies with typed errors.
Frame decode_frame(ByteView octets);

// Typed views over frames. Group elements and parameter blocks stay as
// opaque octet strings at this layer; semantic validation happens above.

struct AuthRequestMsg {
    std::string username;

    Bytes encode() const;
    static AuthRequestMsg from(const Frame& f);
};

struct AuthChallengeMsg {
    std::string provider_id;
    Bytes enc_x;
    Bytes p_pi; // 45-byte UserKeyParams encoding
    Bytes challenge;

    Bytes encode() const;
    static AuthChallengeMsg from(const Frame& f);
};

struct AuthResponseMsg {
    Bytes enc_y;
    Bytes sealed_v;

    Bytes encode() const;
    static AuthResponseMsg from(const Frame& f);
};

struct AuthConfirmMsg {
    Bytes confirm; // 32 octets

    Bytes encode() const;
    static AuthConfirmMsg from(const Frame& f);
};

struct RegisterMsg {
    std::uint8_t version = kProtocolVersion;
    std::string username;
    Bytes p_pi;
    Bytes h;

    Bytes encode() const;
    static RegisterMsg from(const Frame& f);
};

struct ErrorReplyMsg {
    ReplyCode code;

    Bytes encode() const;
    static ErrorReplyMsg from(const Frame& f);
};

struct ChannelMsg {
    std::uint64_t seq = 0;
    Bytes sealed;

    Bytes encode() const;
    static ChannelMsg from(const Frame& f);
};

struct PutBlobMsg {
    std::uint64_t version = 0;
    Bytes blob;

    Bytes encode() const;
    static PutBlobMsg from(const Frame& f);
};

struct BlobDataMsg {
    std::uint64_t version = 0;
    Bytes blob;

    Bytes encode() const;
    static BlobDataMsg from(const Frame& f);
};

struct ChangeCredentialsMsg {
    Bytes p_pi;
    Bytes h;

    Bytes encode() const;
    static ChangeCredentialsMsg from(const Frame& f);
};

struct ResetBeginMsg {
    std::string username;

    Bytes encode() const;
    static ResetBeginMsg from(const Frame& f);
};

struct ResetTokenMsg {
    std::string token_hex;

    Bytes encode() const;
    static ResetTokenMsg from(const Frame& f);
};

Bytes encode_empty(MsgType type); // RegisterOk, GetBlob, Ok

/// Post-authentication channel framing. The sealed payload is a complete
/// inner frame; nonce = 4 zero octets || u64be sequence number.
ChannelMsg channel_seal(const Key32& key, std::uint64_t seq, ByteView plaintext);
Bytes channel_open(const Key32& key, const ChannelMsg& msg, std::uint64_t expected_seq);

/// One direction pair of a live channel; tracks both sequence counters.
class Channel {
public:
    Channel(Key32 send_key, Key32 recv_key)
        : send_key_(send_key), recv_key_(recv_key) {}

    Bytes seal_frame(ByteView inner_frame); // encoded Channel frame, send seq++
    Bytes open_frame(ByteView channel_frame); // inner frame bytes, recv seq++

private:
    Key32 send_key_;
    Key32 recv_key_;
    std::uint64_t send_seq_ = 0;
    std::uint64_t recv_seq_ = 0;
};

} // namespace authstore::wire
