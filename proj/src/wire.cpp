#include "authstore/wire.hpp"

#include "authstore/errors.hpp"

namespace authstore::wire {

std::size_t field_count(MsgType type) {
    switch (type) {
    case MsgType::AuthRequest: return 1;
    case MsgType::AuthChallenge: return 4;
    case MsgType::AuthResponse: return 2;
    case MsgType::AuthConfirm: return 1;
    case MsgType::Register: return 4;
    case MsgType::RegisterOk: return 0;
    case MsgType::ErrorReply: return 1;
    case MsgType::Channel: return 2;
    case MsgType::PutBlob: return 2;
    case MsgType::GetBlob: return 0;
    case MsgType::BlobData: return 2;
    case MsgType::ChangeCredentials: return 2;
    case MsgType::ResetBegin: return 1;
    case MsgType::ResetToken: return 1;
    case MsgType::Ok: return 0;
    }
    raise(ErrorCode::BadType, "unknown frame type");
}

namespace {

bool known_type(std::uint8_t t) {
    switch (static_cast<MsgType>(t)) {
    case MsgType::AuthRequest:
    case MsgType::AuthChallenge:
    case MsgType::AuthResponse:
    case MsgType::AuthConfirm:
    case MsgType::Register:
    case MsgType::RegisterOk:
    case MsgType::ErrorReply:
    case MsgType::Channel:
    case MsgType::PutBlob:
    case MsgType::GetBlob:
    case MsgType::BlobData:
    case MsgType::ChangeCredentials:
    case MsgType::ResetBegin:
    case MsgType::ResetToken:
    case MsgType::Ok:
        return true;
    }
    return false;
}

} // namespace

Bytes encode_frame(const Frame& frame) {
    std::size_t body_len = 1;
    for (const auto& f : frame.fields)
        body_len += 2 + f.size();
    if (body_len > kMaxBodyLen)
        raise(ErrorCode::Oversize, "frame body exceeds 1 MiB");
    Bytes out;
    out.reserve(4 + body_len);
    put_u32be(out, static_cast<std::uint32_t>(body_len));
    out.push_back(static_cast<std::uint8_t>(frame.type));
    for (const auto& f : frame.fields) {
        if (f.size() > 0xffff)
            raise(ErrorCode::Oversize, "field exceeds 65535 bytes");
        put_u16be(out, static_cast<std::uint16_t>(f.size()));
        out.insert(out.end(), f.begin(), f.end());
    }
    return out;
}

Bytes encode_frame(MsgType type, std::vector<Bytes> fields) {
    return encode_frame(Frame{type, std::move(fields)});
}

Frame decode_frame(ByteView octets) {
    if (octets.size() < 5)
        raise(ErrorCode::Truncated, "frame shorter than header");
    std::uint32_t body_len = get_u32be(octets.data());
    if (body_len > kMaxBodyLen)
        raise(ErrorCode::Oversize, "frame body exceeds 1 MiB");
    if (body_len < 1)
        raise(ErrorCode::Truncated, "empty frame body");
    if (octets.size() < 4 + static_cast<std::size_t>(body_len))
        raise(ErrorCode::Truncated, "frame body truncated");
    if (octets.size() > 4 + static_cast<std::size_t>(body_len))
        raise(ErrorCode::Truncated, "trailing bytes after frame");

    std::uint8_t type_byte = octets[4];
    if (!known_type(type_byte))
        raise(ErrorCode::BadType, "unknown frame type " + std::to_string(type_byte));
    Frame frame;
    frame.type = static_cast<MsgType>(type_byte);

    std::size_t off = 5;
    std::size_t end = 4 + body_len;
    while (off < end) {
        if (off + 2 > end)
            raise(ErrorCode::Truncated, "field length truncated");
        std::uint16_t flen = get_u16be(octets.data() + off);
        off += 2;
        if (off + flen > end)
            raise(ErrorCode::Truncated, "field body truncated");
        frame.fields.emplace_back(octets.begin() + off, octets.begin() + off + flen);
        off += flen;
    }
    if (frame.fields.size() != field_count(frame.type))
        raise(ErrorCode::FieldCount,
              "frame type " + std::to_string(type_byte) + " expects " +
                  std::to_string(field_count(frame.type)) + " fields, got " +
                  std::to_string(frame.fields.size()));
    return frame;
}

namespace {

const Frame& expect(const Frame& f, MsgType type) {
    if (f.type != type)
        raise(ErrorCode::BadType, "unexpected frame type");
    return f;
}

Bytes field_str(const std::string& s) { return to_bytes(s); }

std::uint64_t field_u64(const Bytes& f) {
    if (f.size() != 8)
        raise(ErrorCode::WrongLength, "u64 field must be 8 bytes");
    return get_u64be(f.data());
}

} // namespace

Bytes AuthRequestMsg::encode() const {
    return encode_frame(MsgType::AuthRequest, {field_str(username)});
}

AuthRequestMsg AuthRequestMsg::from(const Frame& f) {
    expect(f, MsgType::AuthRequest);
    return AuthRequestMsg{to_string(view(f.fields[0]))};
}

Bytes AuthChallengeMsg::encode() const {
    return encode_frame(MsgType::AuthChallenge, {field_str(provider_id), enc_x, p_pi, challenge});
}

AuthChallengeMsg AuthChallengeMsg::from(const Frame& f) {
    expect(f, MsgType::AuthChallenge);
    return AuthChallengeMsg{to_string(view(f.fields[0])), f.fields[1], f.fields[2], f.fields[3]};
}

Bytes AuthResponseMsg::encode() const {
    return encode_frame(MsgType::AuthResponse, {enc_y, sealed_v});
}

AuthResponseMsg AuthResponseMsg::from(const Frame& f) {
    expect(f, MsgType::AuthResponse);
    return AuthResponseMsg{f.fields[0], f.fields[1]};
}

Bytes AuthConfirmMsg::encode() const {
    return encode_frame(MsgType::AuthConfirm, {confirm});
}

AuthConfirmMsg AuthConfirmMsg::from(const Frame& f) {
    expect(f, MsgType::AuthConfirm);
    return AuthConfirmMsg{f.fields[0]};
}

Bytes RegisterMsg::encode() const {
    return encode_frame(MsgType::Register, {Bytes{version}, field_str(username), p_pi, h});
}

RegisterMsg RegisterMsg::from(const Frame& f) {
    expect(f, MsgType::Register);
    if (f.fields[0].size() != 1)
        raise(ErrorCode::WrongLength, "version field must be 1 byte");
    return RegisterMsg{f.fields[0][0], to_string(view(f.fields[1])), f.fields[2], f.fields[3]};
}

Bytes ErrorReplyMsg::encode() const {
    Bytes c;
    put_u16be(c, static_cast<std::uint16_t>(code));
    return encode_frame(MsgType::ErrorReply, {std::move(c)});
}

ErrorReplyMsg ErrorReplyMsg::from(const Frame& f) {
    expect(f, MsgType::ErrorReply);
    if (f.fields[0].size() != 2)
        raise(ErrorCode::WrongLength, "error code field must be 2 bytes");
    return ErrorReplyMsg{static_cast<ReplyCode>(get_u16be(f.fields[0].data()))};
}

Bytes ChannelMsg::encode() const {
    return encode_frame(MsgType::Channel, {u64be_bytes(seq), sealed});
}

ChannelMsg ChannelMsg::from(const Frame& f) {
    expect(f, MsgType::Channel);
    return ChannelMsg{field_u64(f.fields[0]), f.fields[1]};
}

Bytes PutBlobMsg::encode() const {
    return encode_frame(MsgType::PutBlob, {u64be_bytes(version), blob});
}

PutBlobMsg PutBlobMsg::from(const Frame& f) {
    expect(f, MsgType::PutBlob);
    return PutBlobMsg{field_u64(f.fields[0]), f.fields[1]};
}

Bytes BlobDataMsg::encode() const {
    return encode_frame(MsgType::BlobData, {u64be_bytes(version), blob});
}

BlobDataMsg BlobDataMsg::from(const Frame& f) {
    expect(f, MsgType::BlobData);
    return BlobDataMsg{field_u64(f.fields[0]), f.fields[1]};
}

Bytes ChangeCredentialsMsg::encode() const {
    return encode_frame(MsgType::ChangeCredentials, {p_pi, h});
}

ChangeCredentialsMsg ChangeCredentialsMsg::from(const Frame& f) {
    expect(f, MsgType::ChangeCredentials);
    return ChangeCredentialsMsg{f.fields[0], f.fields[1]};
}

Bytes ResetBeginMsg::encode() const {
    return encode_frame(MsgType::ResetBegin, {field_str(username)});
}

ResetBeginMsg ResetBeginMsg::from(const Frame& f) {
    expect(f, MsgType::ResetBegin);
    return ResetBeginMsg{to_string(view(f.fields[0]))};
}

Bytes ResetTokenMsg::encode() const {
    return encode_frame(MsgType::ResetToken, {field_str(token_hex)});
}

ResetTokenMsg ResetTokenMsg::from(const Frame& f) {
    expect(f, MsgType::ResetToken);
    return ResetTokenMsg{to_string(view(f.fields[0]))};
}

Bytes encode_empty(MsgType type) {
    if (field_count(type) != 0)
        raise(ErrorCode::FieldCount, "frame type is not field-free");
    return encode_frame(type, {});
}

ChannelMsg channel_seal(const Key32& key, std::uint64_t seq, ByteView plaintext) {
    return ChannelMsg{seq, seal(key, seq_nonce(seq), plaintext)};
}

Bytes channel_open(const Key32& key, const ChannelMsg& msg, std::uint64_t expected_seq) {
    if (msg.seq != expected_seq)
        raise(ErrorCode::ReplayDetected,
              "sequence " + std::to_string(msg.seq) + " != expected " +
                  std::to_string(expected_seq));
    return open(key, seq_nonce(msg.seq), view(msg.sealed));
}

Bytes Channel::seal_frame(ByteView inner_frame) {
    ChannelMsg msg = channel_seal(send_key_, send_seq_++, inner_frame);
    return msg.encode();
}

Bytes Channel::open_frame(ByteView channel_frame) {
    ChannelMsg msg = ChannelMsg::from(decode_frame(channel_frame));
    Bytes inner = channel_open(recv_key_, msg, recv_seq_);
    ++recv_seq_;
    return inner;
}

} // namespace authstore::wire
