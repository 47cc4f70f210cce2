#include "authstore/adversary.hpp"

#include "authstore/client.hpp"
#include "authstore/errors.hpp"
#include "authstore/hash.hpp"
#include "authstore/seal.hpp"
#include "authstore/wire.hpp"

#include <algorithm>

namespace authstore {

namespace {

SessionKey reconstruct_sk(const GroupParams& group, std::string_view username,
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

Bytes apply_tamper(const TamperRule& rule, std::size_t msg_index, ByteView frame) {
    Bytes out(frame.begin(), frame.end());
    switch (rule.kind) {
    case TamperRule::Kind::None:
        return out;
    case TamperRule::Kind::FlipByte:
        if (msg_index == rule.message_index && rule.byte_offset < out.size())
            out[rule.byte_offset] ^= 0xff;
        return out;
    case TamperRule::Kind::WeakenParams: {
        wire::Frame decoded;
        try {
            decoded = wire::decode_frame(view(out));
        } catch (const Error&) {
            return out;
        }
        if (decoded.type != wire::MsgType::AuthChallenge)
            return out;
        auto msg = wire::AuthChallengeMsg::from(decoded);
        UserKeyParams p_pi;
        try {
            p_pi = UserKeyParams::decode(view(msg.p_pi));
        } catch (const Error&) {
            return out;
        }
        p_pi.base.time_cost = rule.new_time_cost;
        if (p_pi.base.algorithm == KdfAlgorithm::MemoryHard)
            p_pi.base.mem_cost_kib = rule.new_mem_cost_kib;
        msg.p_pi = p_pi.encode();
        return msg.encode();
    }
    }
    return out;
}

// ----------------------------------------------------------------- MitmProxy

MitmProxy::MitmProxy(std::string upstream_host, std::uint16_t upstream_port, TamperRule rule)
    : upstream_host_(std::move(upstream_host)), upstream_port_(upstream_port), rule_(rule) {}

MitmProxy::~MitmProxy() {
    stop();
}

void MitmProxy::start() {
    if (running_.exchange(true))
        return;
    listener_ = std::make_unique<TcpListener>("127.0.0.1", 0);
    thread_ = std::thread([this] { run(); });
}

void MitmProxy::stop() {
    if (!running_.exchange(false))
        return;
    if (listener_)
        listener_->close();
    if (thread_.joinable())
        thread_.join();
}

std::uint16_t MitmProxy::port() const {
    return listener_ ? listener_->port() : 0;
}

Transcript MitmProxy::take_transcript() {
    std::lock_guard lock(transcript_mutex_);
    Transcript out;
    out.entries.swap(transcript_.entries);
    return out;
}

void MitmProxy::run() {
    // The protocol is strictly alternating request/reply, so one connection
    // can be pumped on a single thread, turn by turn.
    while (running_) {
        auto client_side = listener_->accept();
        if (!client_side)
            break;
        std::unique_ptr<TcpTransport> server_side;
        try {
            server_side = TcpTransport::connect(upstream_host_, upstream_port_);
        } catch (const Error&) {
            client_side->close();
            continue;
        }
        {
            std::lock_guard lock(transcript_mutex_);
            transcript_.entries.clear();
        }
        std::size_t msg_index = 0;
        try {
            while (true) {
                auto from_client = client_side->recv_frame();
                if (!from_client)
                    break;
                Bytes forwarded = apply_tamper(rule_, msg_index++, view(*from_client));
                {
                    std::lock_guard lock(transcript_mutex_);
                    transcript_.append(Direction::ClientToServer, view(forwarded));
                }
                server_side->send_frame(view(forwarded));

                auto from_server = server_side->recv_frame();
                if (!from_server)
                    break;
                forwarded = apply_tamper(rule_, msg_index++, view(*from_server));
                {
                    std::lock_guard lock(transcript_mutex_);
                    transcript_.append(Direction::ServerToClient, view(forwarded));
                }
                client_side->send_frame(view(forwarded));
            }
        } catch (const Error&) {
            // drop the connection pair on any transport error
        }
        client_side->close();
        server_side->close();
    }
}

// ----------------------------------------------------------- dictionary attack

std::vector<std::string> dictionary_attack(const GroupParams& group, const Transcript& transcript,
                                           const std::optional<ServerSecretView>& server_view,
                                           const std::vector<std::string>& candidates) {
    std::optional<wire::AuthRequestMsg> m1;
    std::optional<wire::AuthChallengeMsg> m2;
    std::optional<wire::AuthResponseMsg> m3;
    for (const auto& entry : transcript.entries) {
        wire::Frame frame;
        try {
            frame = wire::decode_frame(view(entry.frame));
        } catch (const Error&) {
            continue;
        }
        if (frame.type == wire::MsgType::AuthRequest && !m1)
            m1 = wire::AuthRequestMsg::from(frame);
        else if (frame.type == wire::MsgType::AuthChallenge && !m2)
            m2 = wire::AuthChallengeMsg::from(frame);
        else if (frame.type == wire::MsgType::AuthResponse && !m3)
            m3 = wire::AuthResponseMsg::from(frame);
    }
    std::vector<std::string> confirmed;
    if (!m1 || !m2 || !m3)
        return confirmed;

    UserKeyParams served;
    GroupElement enc_x, challenge, enc_y;
    try {
        served = UserKeyParams::decode(view(m2->p_pi));
        enc_x = group.validate_element(view(m2->enc_x));
        challenge = group.validate_element(view(m2->challenge));
        enc_y = group.validate_element(view(m3->enc_y));
    } catch (const Error&) {
        return confirmed;
    }
    BlindContext ctx{m1->username, m2->provider_id};
    const bool v_unsealed = m3->sealed_v.size() == group.encoded_len();

    for (const auto& candidate : candidates) {
        Scalar pi_candidate;
        try {
            UserKey k = user_key_from_password(served, view(candidate));
            pi_candidate = to_auth_scalar(k, group);
        } catch (const Error&) {
            continue;
        }
        GroupElement h_candidate = group.exp(group.generator(), pi_candidate);

        if (v_unsealed) {
            // Broken variant: v is on the wire; test v == (g^c)^pi* directly.
            GroupElement v_expected = group.exp(challenge, pi_candidate);
            if (ct_equal(view(m3->sealed_v), view(group.encode(v_expected))))
                confirmed.push_back(candidate);
            continue;
        }

        if (!server_view)
            continue; // sk reconstruction needs the insider's x

        Bytes h_enc = group.encode(h_candidate);
        GroupElement x_unblinded =
            group.blind_decrypt(view(h_enc), BlindDirection::Server, ctx, enc_x);
        GroupElement y_unblinded =
            group.blind_decrypt(view(h_enc), BlindDirection::Client, ctx, enc_y);
        GroupElement dh = group.exp(y_unblinded, server_view->x);
        SessionKey sk = reconstruct_sk(group, m1->username, m2->provider_id, x_unblinded,
                                       y_unblinded, dh);
        Bytes v_bytes;
        try {
            v_bytes = open(confirm_key(sk), zero_nonce(), view(m3->sealed_v));
        } catch (const Error&) {
            continue; // seal did not open: candidate yields no information
        }
        GroupElement v_expected = group.exp(h_candidate, server_view->c);
        if (ct_equal(view(v_bytes), view(group.encode(v_expected))))
            confirmed.push_back(candidate);
    }
    return confirmed;
}

// ------------------------------------------------------ parameter attack run

ParameterAttackRun run_parameter_attack(const GroupParams& group, std::string_view username,
                                        std::string_view provider_id,
                                        const UserKeyParams& strong_p_pi, const GroupElement& h,
                                        std::string_view password, const TamperRule& weaken,
                                        bool broken_client, Rng& rng) {
    ParameterAttackRun run;
    std::string user(username);
    std::string provider(provider_id);

    Bytes m1_frame = wire::AuthRequestMsg{user}.encode();
    run.transcript.append(Direction::ClientToServer, view(m1_frame));

    PakeServerSession::Verifier verifier{strong_p_pi, h};
    auto [m2, server] = PakeServerSession::on_request(group, Msg1{user}, verifier, provider, rng);
    auto secrets = server.secret_view();
    run.server_view = ServerSecretView{secrets.x, secrets.c, secrets.h};

    wire::AuthChallengeMsg m2_wire;
    m2_wire.provider_id = m2.provider_id;
    m2_wire.enc_x = group.encode(m2.enc_x);
    m2_wire.p_pi = m2.p_pi.encode();
    m2_wire.challenge = group.encode(m2.challenge);
    Bytes m2_frame = apply_tamper(weaken, 1, view(m2_wire.encode()));
    run.transcript.append(Direction::ServerToClient, view(m2_frame));

    // The client sees (and trusts) the delivered challenge.
    auto delivered = wire::AuthChallengeMsg::from(wire::decode_frame(view(m2_frame)));
    Msg2 m2_seen;
    m2_seen.provider_id = delivered.provider_id;
    m2_seen.enc_x = group.validate_element(view(delivered.enc_x));
    m2_seen.p_pi = UserKeyParams::decode(view(delivered.p_pi));
    m2_seen.challenge = group.validate_element(view(delivered.challenge));

    wire::AuthResponseMsg m3_wire;
    if (!broken_client) {
        auto [m1, client] = PakeClientSession::start(group, user);
        Msg3 m3 = client.on_challenge(m2_seen, ClientCredential::password(std::string(password)),
                                      rng);
        m3_wire.enc_y = group.encode(m3.enc_y);
        m3_wire.sealed_v = m3.sealed_v;
    } else {
        // Deliberately broken variant: same math, but v is shipped without
        // its seal. Exists only in this harness.
        UserKey k = user_key_from_password(m2_seen.p_pi, view(password));
        Scalar pi = to_auth_scalar(k, group);
        GroupElement h_client = group.exp(group.generator(), pi);
        Bytes h_enc = group.encode(h_client);
        BlindContext ctx{user, provider};
        GroupElement x_share =
            group.blind_decrypt(view(h_enc), BlindDirection::Server, ctx, m2_seen.enc_x);
        GroupElement v = group.exp(m2_seen.challenge, pi);
        Scalar y = group.random_scalar(rng);
        GroupElement y_share = group.exp(group.generator(), y);
        m3_wire.enc_y = group.encode(
            group.blind_encrypt(view(h_enc), BlindDirection::Client, ctx, y_share));
        m3_wire.sealed_v = group.encode(v);
    }
    Bytes m3_frame = m3_wire.encode();
    run.transcript.append(Direction::ClientToServer, view(m3_frame));

    // Let the provider finish; with weakened parameters this fails and the
    // transcript stays at three frames, matching a real capture.
    try {
        Msg3 m3;
        m3.enc_y = group.validate_element(view(m3_wire.enc_y));
        m3.sealed_v = m3_wire.sealed_v;
        Msg4 m4 = server.on_response(m3);
        wire::AuthConfirmMsg m4_wire;
        m4_wire.confirm.assign(m4.confirm.begin(), m4.confirm.end());
        run.transcript.append(Direction::ServerToClient, view(m4_wire.encode()));
    } catch (const Error&) {
    }
    return run;
}

// ------------------------------------------------------- stolen verifier

namespace {

struct AttackerResponse {
    Msg3 m3;
    SessionKey sk;
};

/// Client role with only the stored verifier: h unlocks both blinded
/// shares, so the key exchange completes; but v = h^c would require the
/// challenge exponent, so the best computable submission is h itself.
AttackerResponse attacker_respond(const GroupParams& group, const std::string& username,
                                  const Msg2& m2, const GroupElement& h_stolen, Rng& rng) {
    Bytes h_enc = group.encode(h_stolen);
    BlindContext ctx{username, m2.provider_id};
    GroupElement x_share = group.blind_decrypt(view(h_enc), BlindDirection::Server, ctx, m2.enc_x);
    Scalar y = group.random_scalar(rng);
    GroupElement y_share = group.exp(group.generator(), y);
    GroupElement dh = group.exp(x_share, y);
    AttackerResponse out;
    out.sk = reconstruct_sk(group, username, m2.provider_id, x_share, y_share, dh);
    out.m3.enc_y = group.blind_encrypt(view(h_enc), BlindDirection::Client, ctx, y_share);
    Bytes v_guess = group.encode(h_stolen);
    out.m3.sealed_v = seal(confirm_key(out.sk), zero_nonce(), view(v_guess));
    return out;
}

} // namespace

StolenVerifierOutcome stolen_verifier_attack(const GroupParams& group, std::string_view username,
                                             std::string_view provider_id,
                                             const PakeServerSession::Verifier& stored,
                                             Rng& rng) {
    std::string user(username);
    auto [m2, server] = PakeServerSession::on_request(group, Msg1{user}, stored,
                                                      provider_id, rng);
    AttackerResponse attacker = attacker_respond(group, user, m2, stored.h, rng);

    StolenVerifierOutcome outcome;
    try {
        server.on_response(attacker.m3);
        outcome.server_accepted = true;
    } catch (const Error&) {
        outcome.server_accepted = false;
    }

    // Recompute the provider's sk from the insider view to measure whether
    // the attacker reached key agreement despite the rejection.
    auto secrets = server.secret_view();
    Bytes h_enc = group.encode(stored.h);
    BlindContext ctx{user, std::string(provider_id)};
    GroupElement y_srv = group.blind_decrypt(view(h_enc), BlindDirection::Client, ctx,
                                             attacker.m3.enc_y);
    GroupElement x_srv = group.exp(group.generator(), secrets.x);
    GroupElement dh_srv = group.exp(y_srv, secrets.x);
    SessionKey sk_srv = reconstruct_sk(group, user, provider_id, x_srv, y_srv, dh_srv);
    outcome.session_key_matched = (sk_srv == attacker.sk);
    return outcome;
}

bool stolen_verifier_attack_remote(const GroupParams& group, const std::string& host,
                                   std::uint16_t port, std::string_view username,
                                   const UserKeyParams& p_pi, const GroupElement& h, Rng& rng) {
    (void)p_pi; // held by the attacker but not needed: no KDF is ever run
    auto transport = TcpTransport::connect(host, port);
    std::string user(username);
    transport->send_frame(view(wire::AuthRequestMsg{user}.encode()));
    auto raw = transport->recv_frame();
    if (!raw)
        return false;
    wire::Frame frame = wire::decode_frame(view(*raw));
    if (frame.type != wire::MsgType::AuthChallenge)
        return false;
    auto challenge = wire::AuthChallengeMsg::from(frame);
    Msg2 m2;
    m2.provider_id = challenge.provider_id;
    m2.enc_x = group.validate_element(view(challenge.enc_x));
    m2.p_pi = UserKeyParams::decode(view(challenge.p_pi));
    m2.challenge = group.validate_element(view(challenge.challenge));

    AttackerResponse attacker = attacker_respond(group, user, m2, h, rng);
    wire::AuthResponseMsg response;
    response.enc_y = group.encode(attacker.m3.enc_y);
    response.sealed_v = attacker.m3.sealed_v;
    transport->send_frame(view(response.encode()));

    auto confirm = transport->recv_frame();
    transport->close();
    if (!confirm)
        return false;
    wire::Frame confirm_frame = wire::decode_frame(view(*confirm));
    return confirm_frame.type == wire::MsgType::AuthConfirm;
}

} // namespace authstore
