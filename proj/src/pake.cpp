#include "authstore/pake.hpp"

#include "authstore/errors.hpp"
#include "authstore/hash.hpp"
#include "authstore/username.hpp"

namespace authstore {

namespace {

SessionKey session_key_from_transcript(const GroupParams& group, std::string_view username,
                                       std::string_view provider_id, const GroupElement& x_share,
                                       const GroupElement& y_share, const GroupElement& dh) {
    Bytes ex = group.encode(x_share);
    Bytes ey = group.encode(y_share);
    Bytes ez = group.encode(dh);
    SessionKey sk;
    sk.bytes = labeled_hash("AS-sk", {view(username), view(provider_id), view(ex), view(ey),
                                      view(ez)});
    return sk;
}

} // namespace

Scalar ClientCredential::derive_pi(const UserKeyParams& p_pi, const GroupParams& group) const {
    if (const auto* pw = std::get_if<std::string>(&value_)) {
        UserKey k_auth = user_key_from_password(p_pi, view(*pw));
        return to_auth_scalar(k_auth, group);
    }
    return std::get<Scalar>(value_);
}

Key32 confirm_key(const SessionKey& sk) {
    return labeled_hash("AS-esk", {view(sk.bytes)});
}

Key32 confirmation_tag(const SessionKey& sk) {
    return labeled_hash("AS-conf1", {view(sk.bytes)});
}

std::pair<Key32, Key32> channel_keys(const SessionKey& sk) {
    return {labeled_hash("AS-c2s", {view(sk.bytes)}), labeled_hash("AS-s2c", {view(sk.bytes)})};
}

PakeClientSession::PakeClientSession(const GroupParams& group, std::string username)
    : group_(&group), username_(std::move(username)) {}

std::pair<Msg1, PakeClientSession> PakeClientSession::start(const GroupParams& group,
                                                            std::string_view username) {
    std::string canonical = canonicalize_username(username);
    Msg1 m1{canonical};
    return {std::move(m1), PakeClientSession(group, std::move(canonical))};
}

Msg3 PakeClientSession::on_challenge(const Msg2& m2, const ClientCredential& credential,
                                     Rng& rng) {
    if (state_ != State::AwaitChallenge)
        raise(ErrorCode::ProtocolOrder, "client session is not awaiting a challenge");
    const GroupParams& group = *group_;
    if (!group.is_valid(m2.enc_x) || !group.is_valid(m2.challenge)) {
        state_ = State::Failed;
        raise(ErrorCode::MalformedChallenge, "challenge carries an invalid group element");
    }
    provider_id_ = m2.provider_id;
    BlindContext ctx{username_, provider_id_};

    Scalar pi = credential.derive_pi(m2.p_pi, group);
    GroupElement h = group.exp(group.generator(), pi);
    Bytes h_enc = group.encode(h);

    GroupElement x_share = group.blind_decrypt(view(h_enc), BlindDirection::Server, ctx, m2.enc_x);
    GroupElement v = group.exp(m2.challenge, pi);

    Scalar y = group.random_scalar(rng);
    GroupElement y_share = group.exp(group.generator(), y);
    GroupElement dh = group.exp(x_share, y);

    sk_ = session_key_from_transcript(group, username_, provider_id_, x_share, y_share, dh);

    Msg3 m3;
    m3.enc_y = group.blind_encrypt(view(h_enc), BlindDirection::Client, ctx, y_share);
    Bytes v_enc = group.encode(v);
    m3.sealed_v = seal(confirm_key(sk_), zero_nonce(), view(v_enc));
    state_ = State::AwaitConfirm;
    return m3;
}

SessionKey PakeClientSession::on_confirm(const Msg4& m4) {
    if (state_ != State::AwaitConfirm)
        raise(ErrorCode::ProtocolOrder, "client session is not awaiting confirmation");
    Key32 expected = confirmation_tag(sk_);
    if (!ct_equal(view(m4.confirm), view(expected))) {
        state_ = State::Failed;
        raise(ErrorCode::ServerAuthFailed, "confirmation value mismatch");
    }
    state_ = State::Established;
    return sk_;
}

const SessionKey& PakeClientSession::session_key() const {
    if (state_ != State::AwaitConfirm && state_ != State::Established)
        raise(ErrorCode::ProtocolOrder, "session key not yet derived");
    return sk_;
}

PakeServerSession::PakeServerSession(const GroupParams& group, std::string username)
    : group_(&group), username_(std::move(username)) {}

std::pair<Msg2, PakeServerSession> PakeServerSession::on_request(const GroupParams& group,
                                                                 const Msg1& m1,
                                                                 const Verifier& verifier,
                                                                 std::string_view provider_id,
                                                                 Rng& rng) {
    PakeServerSession session(group, m1.username);
    session.provider_id_ = provider_id;
    session.h_ = verifier.h;
    session.x_ = group.random_scalar(rng);
    session.c_ = group.random_scalar(rng);

    Bytes h_enc = group.encode(verifier.h);
    BlindContext ctx{session.username_, session.provider_id_};

    Msg2 m2;
    m2.provider_id = session.provider_id_;
    m2.enc_x = group.blind_encrypt(view(h_enc), BlindDirection::Server, ctx,
                                   group.exp(group.generator(), session.x_));
    m2.p_pi = verifier.p_pi;
    m2.challenge = group.exp(group.generator(), session.c_);
    return {std::move(m2), std::move(session)};
}

Msg4 PakeServerSession::on_response(const Msg3& m3) {
    if (state_ != State::AwaitResponse)
        raise(ErrorCode::ProtocolOrder, "server session is not awaiting a response");
    const GroupParams& group = *group_;
    state_ = State::Failed; // promoted to Done only on full acceptance

    if (!group.is_valid(m3.enc_y))
        raise(ErrorCode::AuthFailed, "authentication failed");

    Bytes h_enc = group.encode(h_);
    BlindContext ctx{username_, provider_id_};
    GroupElement y_share = group.blind_decrypt(view(h_enc), BlindDirection::Client, ctx, m3.enc_y);
    GroupElement x_share = group.exp(group.generator(), x_);
    GroupElement dh = group.exp(y_share, x_);

    SessionKey sk = session_key_from_transcript(group, username_, provider_id_, x_share, y_share,
                                                dh);
    Bytes v_received;
    try {
        v_received = open(confirm_key(sk), zero_nonce(), view(m3.sealed_v));
    } catch (const Error&) {
        raise(ErrorCode::AuthFailed, "authentication failed");
    }
    Bytes v_expected = group.encode(group.exp(h_, c_));
    if (!ct_equal(view(v_received), view(v_expected)))
        raise(ErrorCode::AuthFailed, "authentication failed");

    sk_ = sk;
    state_ = State::Done;
    Msg4 m4;
    m4.confirm = confirmation_tag(sk_);
    return m4;
}

const SessionKey& PakeServerSession::session_key() const {
    if (state_ != State::Done)
        raise(ErrorCode::ProtocolOrder, "session key not yet derived");
    return sk_;
}

} // namespace authstore
