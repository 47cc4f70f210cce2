#include "doctest.h"

#include "authstore/account.hpp"
#include "authstore/errors.hpp"
#include "authstore/io.hpp"

#include "test_util.hpp"

using namespace authstore;
using namespace testutil;

namespace {

struct StoreFixture {
    const GroupParams& group = GroupParams::test256();
    std::filesystem::path dir = temp_dir("account");
    std::int64_t now = 1'700'000'000;
    AccountStore store{group, dir / "accounts.db", [this] { return now; }};
    SeededRng rng{51};

    UserKeyParams params() {
        UserKeyParams p;
        p.base = KdfParams::test_iterated(rng, 2);
        rng.fill(p.user_salt);
        return p;
    }

    GroupElement verifier() { return group.exp(group.generator(), group.random_scalar(rng)); }
};

} // namespace

TEST_CASE("username canonicalization") {
    CHECK(canonicalize_username("Alice") == "alice");
    CHECK(canonicalize_username("BOB42") == "bob42");
    CHECK_THROWS_AS(canonicalize_username(""), Error);
    CHECK_THROWS_AS(canonicalize_username(std::string(65, 'x')), Error);
    CHECK_THROWS_AS(canonicalize_username("a\tb"), Error);
    CHECK_THROWS_AS(canonicalize_username("a\x7f"), Error);
}

TEST_CASE("register, find, duplicate and canonicalization collisions") {
    StoreFixture f;
    auto p = f.params();
    auto h = f.verifier();

    AccountRecord rec = f.store.register_account("alice", p, h);
    CHECK(rec.username == "alice");
    auto found = f.store.find("alice");
    REQUIRE(found.has_value());
    CHECK(found->p_pi.encode() == p.encode());
    CHECK(found->h == h);
    CHECK(found->created_at == f.now);

    CHECK_THROWS_AS(f.store.register_account("alice", f.params(), f.verifier()), Error);
    // "Alice" collides with "alice" after canonicalization
    try {
        f.store.register_account("Alice", f.params(), f.verifier());
        FAIL("expected UserExists");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::UserExists);
    }
    CHECK(f.store.find("ALICE")->username == "alice");

    CHECK_THROWS_AS(f.store.register_account("", f.params(), f.verifier()), Error);
    // verifier must be a subgroup element
    CHECK_THROWS_AS(f.store.register_account("bob", f.params(), GroupElement{mpz_class(0)}),
                    Error);
}

TEST_CASE("store persists across reopen, byte-identically") {
    StoreFixture f;
    for (int i = 0; i < 50; ++i)
        f.store.register_account("user" + std::to_string(i), f.params(), f.verifier());

    Bytes first = read_file(f.dir / "accounts.db");
    AccountStore reopened(f.group, f.dir / "accounts.db", [&f] { return f.now; });
    CHECK(reopened.size() == 50);
    for (int i = 0; i < 50; ++i) {
        auto orig = f.store.find("user" + std::to_string(i));
        auto loaded = reopened.find("user" + std::to_string(i));
        REQUIRE(loaded.has_value());
        CHECK(loaded->p_pi.encode() == orig->p_pi.encode());
        CHECK(loaded->h == orig->h);
    }
    // reopening without mutation must not rewrite the file
    Bytes second = read_file(f.dir / "accounts.db");
    CHECK(first == second);
}

TEST_CASE("torn final record makes the store refuse to start") {
    StoreFixture f;
    f.store.register_account("alice", f.params(), f.verifier());
    f.store.register_account("bob", f.params(), f.verifier());

    Bytes data = read_file(f.dir / "accounts.db");
    Bytes torn(data.begin(), data.end() - 7);
    write_file_atomic(f.dir / "accounts.db", view(torn));
    try {
        AccountStore broken(f.group, f.dir / "accounts.db", [&f] { return f.now; });
        FAIL("expected CorruptStore");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::CorruptStore);
    }

    // checksum corruption, likewise
    Bytes flipped = data;
    flipped[flipped.size() / 2] ^= 0x40;
    write_file_atomic(f.dir / "accounts.db", view(flipped));
    CHECK_THROWS_AS(AccountStore(f.group, f.dir / "accounts.db", [&f] { return f.now; }), Error);
}

TEST_CASE("change_credentials destroys the superseded pair everywhere") {
    StoreFixture f;
    auto old_params = f.params();
    auto old_h = f.verifier();
    f.store.register_account("alice", old_params, old_h);

    auto new_params = f.params();
    auto new_h = f.verifier();
    f.now += 10;
    f.store.change_credentials("alice", new_params, new_h);

    auto rec = f.store.find("alice");
    CHECK(rec->p_pi.encode() == new_params.encode());
    CHECK(rec->h == new_h);
    CHECK(rec->updated_at == f.now);

    // the old credential bytes are gone from the file on disk
    Bytes db = read_file(f.dir / "accounts.db");
    CHECK(!contains_bytes(view(db), view(old_params.encode())));
    CHECK(!contains_bytes(view(db), view(f.group.encode(old_h))));
    CHECK(contains_bytes(view(db), view(new_params.encode())));

    CHECK_THROWS_AS(f.store.change_credentials("nobody", f.params(), f.verifier()), Error);
}

TEST_CASE("reset lifecycle: single use within the expiry window") {
    StoreFixture f;
    f.store.register_account("alice", f.params(), f.verifier());

    Scalar pi_temp = f.store.begin_reset("alice", f.rng);
    GroupElement h_temp = f.group.exp(f.group.generator(), pi_temp);
    auto active = f.store.active_reset_verifier("alice");
    REQUIRE(active.has_value());
    CHECK(*active == h_temp);

    f.store.consume_reset("alice");
    CHECK(!f.store.active_reset_verifier("alice").has_value());

    // reissue, then let it expire
    f.store.begin_reset("alice", f.rng);
    CHECK(f.store.active_reset_verifier("alice").has_value());
    f.now += kResetLifetimeSeconds + 1;
    CHECK(!f.store.active_reset_verifier("alice").has_value());

    CHECK_THROWS_AS(f.store.begin_reset("nobody", f.rng), Error);

    // a successful credential change clears any pending reset
    f.store.begin_reset("alice", f.rng);
    f.store.change_credentials("alice", f.params(), f.verifier());
    CHECK(!f.store.find("alice")->reset.has_value());
}

TEST_CASE("reset state survives a reload") {
    StoreFixture f;
    f.store.register_account("alice", f.params(), f.verifier());
    Scalar pi_temp = f.store.begin_reset("alice", f.rng);
    GroupElement h_temp = f.group.exp(f.group.generator(), pi_temp);

    AccountStore reopened(f.group, f.dir / "accounts.db", [&f] { return f.now; });
    auto active = reopened.active_reset_verifier("alice");
    REQUIRE(active.has_value());
    CHECK(*active == h_temp);
}

TEST_CASE("decoy accounts are deterministic and mirror the cost template") {
    const auto& g = GroupParams::test256();
    Bytes secret(32, 0x66);
    KdfParams tmpl = test_kdf(3);

    AccountRecord a = AccountStore::decoy(g, view(secret), "ghost", tmpl);
    AccountRecord b = AccountStore::decoy(g, view(secret), "ghost", tmpl);
    CHECK(a.p_pi.encode() == b.p_pi.encode());
    CHECK(a.h == b.h);
    CHECK(g.is_valid(a.h));
    CHECK(a.p_pi.base.algorithm == tmpl.algorithm);
    CHECK(a.p_pi.base.time_cost == tmpl.time_cost);

    AccountRecord c = AccountStore::decoy(g, view(secret), "other", tmpl);
    CHECK(c.h.value != a.h.value);
    Bytes other_secret(32, 0x67);
    AccountRecord d = AccountStore::decoy(g, view(other_secret), "ghost", tmpl);
    CHECK(d.h.value != a.h.value);
}
