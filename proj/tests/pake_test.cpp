#include "doctest.h"

#include "authstore/errors.hpp"
#include "authstore/pake.hpp"
#include "authstore/seal.hpp"

#include "test_util.hpp"

using namespace authstore;
using namespace testutil;

namespace {

struct Fixture {
    const GroupParams& group;
    std::string username = "alice";
    std::string provider = "srv1";
    std::string password = "correct horse battery";
    UserKeyParams p_pi;
    GroupElement h;

    explicit Fixture(const GroupParams& g, std::uint32_t time_cost = 1) : group(g) {
        p_pi.base = test_kdf(time_cost, 0x10);
        p_pi.user_salt.fill(0x20);
        Scalar pi = to_auth_scalar(user_key_from_password(p_pi, view(password)), group);
        h = group.exp(group.generator(), pi);
    }

    PakeServerSession::Verifier verifier() const { return {p_pi, h}; }
};

struct HandshakeResult {
    bool server_done = false;
    bool client_established = false;
    SessionKey client_sk{};
    SessionKey server_sk{};
};

HandshakeResult run_handshake(const Fixture& f, const std::string& client_password, Rng& rng) {
    HandshakeResult out;
    auto [m1, client] = PakeClientSession::start(f.group, f.username);
    auto [m2, server] = PakeServerSession::on_request(f.group, m1, f.verifier(), f.provider, rng);
    Msg3 m3 = client.on_challenge(m2, ClientCredential::password(client_password), rng);
    try {
        Msg4 m4 = server.on_response(m3);
        out.server_done = true;
        out.server_sk = server.session_key();
        client.on_confirm(m4);
        out.client_established = client.state() == PakeClientSession::State::Established;
        out.client_sk = client.session_key();
    } catch (const Error&) {
    }
    return out;
}

} // namespace

TEST_CASE("client_start canonicalizes and rejects bad usernames") {
    const auto& g = GroupParams::toy();
    auto [m1, session] = PakeClientSession::start(g, "Alice");
    CHECK(m1.username == "alice");
    CHECK(session.state() == PakeClientSession::State::AwaitChallenge);
    CHECK_THROWS_AS(PakeClientSession::start(g, ""), Error);
    CHECK_THROWS_AS(PakeClientSession::start(g, std::string(65, 'a')), Error);
    CHECK_THROWS_AS(PakeClientSession::start(g, "a\x01b"), Error);
}

TEST_CASE("server challenge matches the toy worked example") {
    Fixture f(GroupParams::toy());
    // Force pi = 3 so h = 4^3 = 18, then x = 5, c = 2.
    Scalar pi = scalar(3);
    GroupElement h = f.group.exp(f.group.generator(), pi);
    REQUIRE(h.value == 18);

    auto rng = rng_for_scalars(f.group, {5, 2});
    auto [m2, server] = PakeServerSession::on_request(f.group, Msg1{"alice"},
                                                      {f.p_pi, h}, "srv1", rng);
    CHECK(m2.challenge.value == 16); // g^c = 4^2 = 16
    CHECK(m2.p_pi == f.p_pi);        // parameter pass-through, byte for byte
    CHECK(m2.p_pi.encode() == f.p_pi.encode());

    // raw X = g^5 = 4^5 mod 23 = 12; on the wire it rides blinded under h
    GroupElement raw_x = f.group.exp(f.group.generator(), scalar(5));
    CHECK(raw_x.value == oracle_modexp(4, 5, 23));
    CHECK(raw_x.value == 12);
    Bytes h_enc = f.group.encode(h);
    BlindContext ctx{"alice", "srv1"};
    CHECK(f.group.blind_decrypt(view(h_enc), BlindDirection::Server, ctx, m2.enc_x) == raw_x);

    auto view_secrets = server.secret_view();
    CHECK(view_secrets.x.value == 5);
    CHECK(view_secrets.c.value == 2);
}

TEST_CASE("two live-rng challenges differ in their fresh values") {
    Fixture f(GroupParams::test256());
    SeededRng rng(1);
    auto [m2a, sa] = PakeServerSession::on_request(f.group, Msg1{f.username}, f.verifier(),
                                                   f.provider, rng);
    auto [m2b, sb] = PakeServerSession::on_request(f.group, Msg1{f.username}, f.verifier(),
                                                   f.provider, rng);
    CHECK(m2a.enc_x.value != m2b.enc_x.value);
    CHECK(m2a.challenge.value != m2b.challenge.value);
}

TEST_CASE("v equals h^c: the correctness identity in the toy group") {
    Fixture f(GroupParams::toy());
    Scalar pi = scalar(3);
    GroupElement h = f.group.exp(f.group.generator(), pi);

    auto rng = rng_for_scalars(f.group, {5, 2, /*client y*/ 7});
    auto [m1, client] = PakeClientSession::start(f.group, "alice");
    auto [m2, server] = PakeServerSession::on_request(f.group, m1, {f.p_pi, h}, "srv1", rng);
    Msg3 m3 = client.on_challenge(m2, ClientCredential::auth_scalar(pi), rng);

    // open the sealed v with the client's own key schedule
    Bytes v_bytes = open(confirm_key(client.session_key()), zero_nonce(), view(m3.sealed_v));
    REQUIRE(v_bytes.size() == 1);
    CHECK(v_bytes[0] == 2);                       // v = 16^3 mod 23 = 2
    CHECK(oracle_modexp(16, 3, 23) == 2);         // (g^c)^pi
    CHECK(oracle_modexp(18, 2, 23) == 2);         // h^c

    Msg4 m4 = server.on_response(m3);
    client.on_confirm(m4);
    CHECK(client.session_key() == server.session_key());
}

TEST_CASE("honest handshake establishes matching keys") {
    for (const GroupParams* g : {&GroupParams::toy(), &GroupParams::test256()}) {
        Fixture f(*g);
        SeededRng rng(17);
        auto result = run_handshake(f, f.password, rng);
        CHECK(result.server_done);
        CHECK(result.client_established);
        CHECK(result.client_sk == result.server_sk);
    }
}

TEST_CASE("wrong password fails only at the server, silently") {
    Fixture f(GroupParams::test256());
    SeededRng rng(18);
    auto [m1, client] = PakeClientSession::start(f.group, f.username);
    auto [m2, server] = PakeServerSession::on_request(f.group, m1, f.verifier(), f.provider, rng);
    // no error here: the client cannot tell yet
    Msg3 m3 = client.on_challenge(m2, ClientCredential::password("wrong password"), rng);
    CHECK(client.state() == PakeClientSession::State::AwaitConfirm);
    try {
        server.on_response(m3);
        FAIL("expected AuthFailed");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::AuthFailed);
    }
    CHECK(server.state() == PakeServerSession::State::Failed);
}

TEST_CASE("soundness: randomized wrong passwords never authenticate") {
    Fixture f(GroupParams::test256());
    SeededRng rng(19);
    int accepts = 0;
    for (int i = 0; i < 200; ++i) {
        std::string wrong = random_password(rng);
        if (wrong == f.password)
            continue;
        auto result = run_handshake(f, wrong, rng);
        if (result.server_done)
            ++accepts;
    }
    CHECK(accepts == 0);
}

TEST_CASE("replayed M3 from an earlier session is rejected") {
    Fixture f(GroupParams::test256());
    SeededRng rng(23);
    auto [m1a, client_a] = PakeClientSession::start(f.group, f.username);
    auto [m2a, server_a] = PakeServerSession::on_request(f.group, m1a, f.verifier(), f.provider,
                                                         rng);
    Msg3 m3a = client_a.on_challenge(m2a, ClientCredential::password(f.password), rng);
    CHECK_NOTHROW(server_a.on_response(m3a));

    // fresh server session: old response must not satisfy the new (x, c)
    auto [m1b, client_b] = PakeClientSession::start(f.group, f.username);
    auto [m2b, server_b] = PakeServerSession::on_request(f.group, m1b, f.verifier(), f.provider,
                                                         rng);
    CHECK_THROWS_AS(server_b.on_response(m3a), Error);
}

TEST_CASE("forged confirmation is rejected by the client") {
    Fixture f(GroupParams::test256());
    SeededRng rng(29);
    auto [m1, client] = PakeClientSession::start(f.group, f.username);
    auto [m2, server] = PakeServerSession::on_request(f.group, m1, f.verifier(), f.provider, rng);
    Msg3 m3 = client.on_challenge(m2, ClientCredential::password(f.password), rng);
    (void)m3;
    Msg4 forged;
    forged.confirm.fill(0);
    try {
        client.on_confirm(forged);
        FAIL("expected ServerAuthFailed");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::ServerAuthFailed);
    }
    CHECK(client.state() == PakeClientSession::State::Failed);
}

TEST_CASE("a tampered challenge completes locally but cannot authenticate") {
    Fixture f(GroupParams::test256());
    SeededRng rng(31);
    auto [m1, client] = PakeClientSession::start(f.group, f.username);
    auto [m2, server] = PakeServerSession::on_request(f.group, m1, f.verifier(), f.provider, rng);

    Msg2 tampered = m2;
    tampered.enc_x = f.group.mul(m2.enc_x, f.group.generator()); // shift by g
    Msg3 m3 = client.on_challenge(tampered, ClientCredential::password(f.password), rng);
    CHECK(client.state() == PakeClientSession::State::AwaitConfirm);
    CHECK_THROWS_AS(server.on_response(m3), Error);
}

TEST_CASE("state machines reject out-of-order messages") {
    Fixture f(GroupParams::test256());
    SeededRng rng(37);
    auto [m1, client] = PakeClientSession::start(f.group, f.username);
    auto [m2, server] = PakeServerSession::on_request(f.group, m1, f.verifier(), f.provider, rng);

    Msg4 early;
    early.confirm.fill(1);
    try {
        client.on_confirm(early);
        FAIL("expected ProtocolOrder");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::ProtocolOrder);
    }

    Msg3 m3 = client.on_challenge(m2, ClientCredential::password(f.password), rng);
    CHECK_THROWS_AS(client.on_challenge(m2, ClientCredential::password(f.password), rng), Error);

    Msg4 m4 = server.on_response(m3);
    CHECK_THROWS_AS(server.on_response(m3), Error); // single use
    CHECK_NOTHROW(client.on_confirm(m4));
}

TEST_CASE("password-independent fields are identical when only the password varies") {
    // Same rng draws, different registered passwords: M1 and the
    // (provider_id, P_pi, C) fields of M2 must agree; only the blinded and
    // sealed fields may differ.
    const auto& g = GroupParams::test256();
    auto run = [&](const std::string& password) {
        Fixture f(g);
        f.password = password;
        Scalar pi = to_auth_scalar(user_key_from_password(f.p_pi, view(f.password)), g);
        f.h = g.exp(g.generator(), pi);
        SeededRng rng(41); // same seed: same x, c, y
        auto [m1, client] = PakeClientSession::start(g, f.username);
        auto [m2, server] = PakeServerSession::on_request(g, m1, f.verifier(), f.provider, rng);
        Msg3 m3 = client.on_challenge(m2, ClientCredential::password(f.password), rng);
        return std::tuple{m1, m2, m3};
    };
    auto [m1a, m2a, m3a] = run("password one");
    auto [m1b, m2b, m3b] = run("password two");

    CHECK(m1a.username == m1b.username);
    CHECK(m2a.provider_id == m2b.provider_id);
    CHECK(m2a.p_pi.encode() == m2b.p_pi.encode());
    CHECK(m2a.challenge == m2b.challenge);

    CHECK(m2a.enc_x.value != m2b.enc_x.value); // blinded under different h
    CHECK(m3a.enc_y.value != m3b.enc_y.value);
    CHECK(m3a.sealed_v != m3b.sealed_v);
}

TEST_CASE("channel keys are directional and match the frozen vectors") {
    SessionKey sk;
    sk.bytes.fill(0x44);
    auto [c2s, s2c] = channel_keys(sk);
    CHECK(c2s != s2c);
    CHECK(hex_encode(view(c2s)) ==
          "01e8585e3e6b53bece79bc3541f144927b45fd1caa454e023c932e44f56c61e3");
    CHECK(hex_encode(view(s2c)) ==
          "b4f0d549b1f882b60978f33252856f0160eccf0b562baf023e0a920cff274f3c");
    CHECK(hex_encode(view(confirmation_tag(sk))) ==
          "245e8ed8c446fd7e3c9633eac0e88209cd32e0463f8d8a33283ea281fb6c5667");
    CHECK(hex_encode(view(confirm_key(sk))) ==
          "472bd48afe0bbc56f0c4dec9cb5045581da3eaac5d68830c37c7f7bc67175e81");
    auto [c2s_again, s2c_again] = channel_keys(sk);
    CHECK(c2s == c2s_again);
    CHECK(s2c == s2c_again);
}

TEST_CASE("completeness sweep across passwords, params and seeds") {
    const auto& g = GroupParams::test256();
    SeededRng meta(43);
    for (int i = 0; i < 100; ++i) {
        Fixture f(g, 1 + i % 3);
        f.password = random_password(meta);
        Scalar pi = to_auth_scalar(user_key_from_password(f.p_pi, view(f.password)), g);
        f.h = g.exp(g.generator(), pi);
        SeededRng rng(1000 + i);
        auto result = run_handshake(f, f.password, rng);
        CHECK(result.server_done);
        CHECK(result.client_established);
        CHECK(result.client_sk == result.server_sk);
    }
}
