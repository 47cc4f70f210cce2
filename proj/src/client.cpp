#include "authstore/client.hpp"

#include "authstore/errors.hpp"
#include "authstore/username.hpp"

namespace authstore {

void throw_reply_error(const wire::ErrorReplyMsg& reply) {
    switch (reply.code) {
    case wire::ReplyCode::RateLimited:
        raise(ErrorCode::RateLimited, "server throttled this username");
    case wire::ReplyCode::UserExists:
        raise(ErrorCode::UserExists, "account already exists");
    case wire::ReplyCode::ResetRequired:
        raise(ErrorCode::ResetRequired, "server requires a credential change first");
    case wire::ReplyCode::VersionConflict:
        raise(ErrorCode::VersionConflict, "blob version conflict");
    case wire::ReplyCode::NotFound:
        raise(ErrorCode::NotFound, "no such resource");
    case wire::ReplyCode::InvalidRequest:
    case wire::ReplyCode::ProtocolError:
        break;
    }
    raise(ErrorCode::ProtocolError, "server rejected the request");
}

ClientConnection::ClientConnection(const GroupParams& group,
                                   std::unique_ptr<FrameTransport> transport)
    : group_(group), transport_(std::move(transport)) {}

ClientConnection ClientConnection::connect(const GroupParams& group, const std::string& host,
                                           std::uint16_t port) {
    return ClientConnection(group, TcpTransport::connect(host, port));
}

void ClientConnection::set_transcript(Transcript* transcript) {
    transcript_ = transcript;
    transport_ = std::make_unique<TapTransport>(std::move(transport_), transcript,
                                                Direction::ClientToServer);
}

wire::Frame ClientConnection::recv_or_eof() {
    auto raw = transport_->recv_frame();
    if (!raw)
        raise(ErrorCode::AuthFailed, "authentication failed");
    return wire::decode_frame(view(*raw));
}

UserKeyParams ClientConnection::register_account(std::string_view username, ByteView password,
                                                 const KdfParams& kdf_params, Rng& rng) {
    UserKeyParams p_pi;
    p_pi.base = kdf_params;
    rng.fill(p_pi.user_salt);
    UserKey k_auth = user_key_from_password(p_pi, password);
    register_with_user_key(username, p_pi, k_auth);
    return p_pi;
}

void ClientConnection::register_with_user_key(std::string_view username,
                                              const UserKeyParams& p_pi, const UserKey& k_auth) {
    Scalar pi = to_auth_scalar(k_auth, group_);
    GroupElement h = group_.exp(group_.generator(), pi);

    wire::RegisterMsg msg;
    msg.username = canonicalize_username(username);
    msg.p_pi = p_pi.encode();
    msg.h = group_.encode(h);
    transport_->send_frame(view(msg.encode()));

    auto raw = transport_->recv_frame();
    if (!raw)
        raise(ErrorCode::ProtocolError, "connection closed during registration");
    wire::Frame frame = wire::decode_frame(view(*raw));
    if (frame.type == wire::MsgType::RegisterOk)
        return;
    if (frame.type == wire::MsgType::ErrorReply)
        throw_reply_error(wire::ErrorReplyMsg::from(frame));
    raise(ErrorCode::ProtocolError, "unexpected reply to registration");
}

SessionKey ClientConnection::login(std::string_view username, const ClientCredential& credential,
                                   Rng& rng) {
    auto [m1, session] = PakeClientSession::start(group_, username);
    transport_->send_frame(view(wire::AuthRequestMsg{m1.username}.encode()));

    wire::Frame challenge_frame = recv_or_eof();
    if (challenge_frame.type == wire::MsgType::ErrorReply)
        throw_reply_error(wire::ErrorReplyMsg::from(challenge_frame));
    if (challenge_frame.type != wire::MsgType::AuthChallenge)
        raise(ErrorCode::ProtocolError, "expected an authentication challenge");
    auto challenge = wire::AuthChallengeMsg::from(challenge_frame);

    Msg2 m2;
    m2.provider_id = challenge.provider_id;
    try {
        m2.enc_x = group_.validate_element(view(challenge.enc_x));
        m2.challenge = group_.validate_element(view(challenge.challenge));
    } catch (const Error&) {
        raise(ErrorCode::MalformedChallenge, "challenge carries an invalid group element");
    }
    m2.p_pi = UserKeyParams::decode(view(challenge.p_pi));
    served_params_ = m2.p_pi;

    Msg3 m3 = session.on_challenge(m2, credential, rng);
    wire::AuthResponseMsg response;
    response.enc_y = group_.encode(m3.enc_y);
    response.sealed_v = m3.sealed_v;
    transport_->send_frame(view(response.encode()));

    // A wrong password surfaces here as a dropped connection: no M4.
    wire::Frame confirm_frame = recv_or_eof();
    if (confirm_frame.type == wire::MsgType::ErrorReply)
        throw_reply_error(wire::ErrorReplyMsg::from(confirm_frame));
    if (confirm_frame.type != wire::MsgType::AuthConfirm)
        raise(ErrorCode::ProtocolError, "expected a confirmation frame");
    auto confirm = wire::AuthConfirmMsg::from(confirm_frame);
    if (confirm.confirm.size() != 32)
        raise(ErrorCode::ServerAuthFailed, "confirmation value has wrong length");

    Msg4 m4;
    std::copy(confirm.confirm.begin(), confirm.confirm.end(), m4.confirm.begin());
    SessionKey sk = session.on_confirm(m4);

    auto [c2s, s2c] = channel_keys(sk);
    channel_.emplace(/*send*/ c2s, /*recv*/ s2c);
    return sk;
}

Bytes ClientConnection::request_reply(ByteView inner_request) {
    if (!channel_)
        raise(ErrorCode::NotAuthenticated, "no established session");
    transport_->send_frame(view(channel_->seal_frame(inner_request)));
    auto raw = transport_->recv_frame();
    if (!raw)
        raise(ErrorCode::ProtocolError, "connection closed");
    return channel_->open_frame(view(*raw));
}

std::optional<std::pair<std::uint64_t, Bytes>> ClientConnection::get_blob() {
    Bytes reply = request_reply(view(wire::encode_empty(wire::MsgType::GetBlob)));
    wire::Frame frame = wire::decode_frame(view(reply));
    if (frame.type == wire::MsgType::BlobData) {
        auto data = wire::BlobDataMsg::from(frame);
        return std::make_pair(data.version, data.blob);
    }
    if (frame.type == wire::MsgType::ErrorReply) {
        auto err = wire::ErrorReplyMsg::from(frame);
        if (err.code == wire::ReplyCode::NotFound)
            return std::nullopt;
        throw_reply_error(err);
    }
    raise(ErrorCode::ProtocolError, "unexpected reply to blob fetch");
}

void ClientConnection::put_blob(std::uint64_t version, ByteView blob) {
    wire::PutBlobMsg msg{version, Bytes(blob.begin(), blob.end())};
    Bytes reply = request_reply(view(msg.encode()));
    wire::Frame frame = wire::decode_frame(view(reply));
    if (frame.type == wire::MsgType::Ok)
        return;
    if (frame.type == wire::MsgType::ErrorReply)
        throw_reply_error(wire::ErrorReplyMsg::from(frame));
    raise(ErrorCode::ProtocolError, "unexpected reply to blob upload");
}

void ClientConnection::change_credentials(const UserKeyParams& p_pi, const GroupElement& h) {
    wire::ChangeCredentialsMsg msg;
    msg.p_pi = p_pi.encode();
    msg.h = group_.encode(h);
    Bytes reply = request_reply(view(msg.encode()));
    wire::Frame frame = wire::decode_frame(view(reply));
    if (frame.type == wire::MsgType::Ok)
        return;
    if (frame.type == wire::MsgType::ErrorReply)
        throw_reply_error(wire::ErrorReplyMsg::from(frame));
    raise(ErrorCode::ProtocolError, "unexpected reply to credential change");
}

void ClientConnection::close() {
    if (transport_)
        transport_->close();
}

} // namespace authstore
