// authstore-adversary: threat-model scenarios run against in-process
// providers, reporting {scenario, trials, successes, details} as JSON.
// "successes" always counts from the attacker's side.

#include "CLI11.hpp"
#include "json.hpp"

#include "authstore/adversary.hpp"
#include "authstore/client.hpp"
#include "authstore/errors.hpp"
#include "authstore/server.hpp"
#include "authstore/vault.hpp"

#include <filesystem>
#include <iostream>
#include <random>

using namespace authstore;

namespace {

KdfParams weak_test_kdf(std::uint32_t time_cost, std::uint8_t salt_byte) {
    KdfParams p;
    p.algorithm = KdfAlgorithm::TestIterated;
    p.salt.fill(salt_byte);
    p.time_cost = time_cost;
    return p;
}

std::string random_password(Rng& rng, std::size_t len = 16) {
    static const char* alphabet = "abcdefghijklmnopqrstuvwxyz0123456789";
    Bytes raw(len);
    rng.fill(raw);
    std::string out;
    for (std::uint8_t b : raw)
        out.push_back(alphabet[b % 36]);
    return out;
}

std::filesystem::path scratch_dir() {
    static std::mt19937_64 gen{std::random_device{}()};
    auto dir = std::filesystem::temp_directory_path() /
               ("authstore-adversary-" + std::to_string(gen()));
    std::filesystem::create_directories(dir);
    return dir;
}

struct VictimAccount {
    std::string username = "victim";
    std::string provider = "srv.target";
    std::string password;
    UserKeyParams p_pi;
    GroupElement h;

    VictimAccount(const GroupParams& group, Rng& rng, std::uint32_t strong_cost = 200) {
        password = random_password(rng);
        p_pi.base = weak_test_kdf(strong_cost, 0x42);
        rng.fill(p_pi.user_salt);
        Scalar pi = to_auth_scalar(user_key_from_password(p_pi, view(password)), group);
        h = group.exp(group.generator(), pi);
    }
};

nlohmann::json report(const std::string& scenario, int trials, int successes,
                      const std::string& details) {
    return nlohmann::json{{"scenario", scenario},
                          {"trials", trials},
                          {"successes", successes},
                          {"details", details}};
}

// One throwaway TCP provider per scenario needing live traffic.
struct LocalProvider {
    SystemRng rng;
    Server server;

    LocalProvider()
        : server(
              [] {
                  ServerConfig cfg;
                  cfg.data_dir = scratch_dir();
                  cfg.group_profile = "test-256";
                  cfg.provider_id = "srv.target";
                  cfg.max_failed_per_minute = 1'000'000;
                  cfg.decoy_cost_template = weak_test_kdf(2, 0);
                  cfg.enable_admin = false;
                  return cfg;
              }(),
              rng) {
        server.start();
    }
    ~LocalProvider() { server.stop(); }
};

nlohmann::json scenario_mitm(const std::string& kind, int trials) {
    LocalProvider provider;
    const GroupParams& group = provider.server.group();
    SystemRng& rng = SystemRng::instance();

    std::string password = random_password(rng);
    {
        auto conn = ClientConnection::connect(group, "127.0.0.1", provider.server.port());
        conn.register_account("victim", view(password), weak_test_kdf(200, 0x43), rng);
        conn.close();
    }

    TamperRule rule = TamperRule::none();
    if (kind == "mitm-weaken")
        rule = TamperRule::weaken_params(1, 8);
    else if (kind == "mitm-flip-confirm")
        rule = TamperRule::flip_byte(3, 10);

    int successes = 0;
    std::string details;
    for (int i = 0; i < trials; ++i) {
        MitmProxy proxy("127.0.0.1", provider.server.port(), rule);
        proxy.start();
        auto conn = ClientConnection::connect(group, "127.0.0.1", proxy.port());
        bool login_ok = false;
        ErrorCode failure = ErrorCode::ProtocolError;
        try {
            conn.login("victim", ClientCredential::password(password), rng);
            login_ok = true;
        } catch (const Error& e) {
            failure = e.code();
        }
        conn.close();
        proxy.stop();
        if (kind == "mitm-none") {
            successes += login_ok ? 1 : 0;
            details = "rule None forwards byte-transparently; authentication succeeds";
        } else if (kind == "mitm-weaken") {
            successes += (!login_ok && failure == ErrorCode::AuthFailed) ? 1 : 0;
            details = "weakened P_pi makes the client derive a different key; the provider "
                      "rejects M3, so the handshake is denied but nothing is learned";
        } else {
            successes += (!login_ok && failure == ErrorCode::ServerAuthFailed) ? 1 : 0;
            details = "a flipped confirmation byte is caught by the client's H(sk||1) check";
        }
    }
    return report(kind, trials, successes, details);
}

nlohmann::json scenario_dictionary(bool broken, int trials, int candidate_count) {
    const GroupParams& group = GroupParams::test256();
    SystemRng& rng = SystemRng::instance();
    int confirmed_true = 0;
    int false_positives = 0;
    for (int t = 0; t < trials; ++t) {
        VictimAccount victim(group, rng);
        auto run = run_parameter_attack(group, victim.username, victim.provider, victim.p_pi,
                                        victim.h, victim.password,
                                        TamperRule::weaken_params(1, 8), broken, rng);
        std::vector<std::string> candidates;
        for (int i = 0; i < candidate_count - 1; ++i)
            candidates.push_back(random_password(rng));
        candidates.push_back(victim.password);
        auto confirmed = dictionary_attack(group, run.transcript, run.server_view, candidates);
        for (const auto& c : confirmed) {
            if (c == victim.password)
                ++confirmed_true;
            else
                ++false_positives;
        }
    }
    std::string details =
        broken ? "v shipped without its seal: the provider solves v == (g^c)^pi' per candidate, "
                 "so every weakened transcript gives up the password"
               : "sealed v: reconstructing sk' needs the client's DH share, so the weakened "
                 "transcript confirms nothing";
    if (false_positives > 0)
        details += " (false positives: " + std::to_string(false_positives) + ")";
    return report(broken ? "dictionary-broken" : "dictionary", trials, confirmed_true, details);
}

nlohmann::json scenario_stolen_verifier(int trials) {
    const GroupParams& group = GroupParams::test256();
    SystemRng& rng = SystemRng::instance();
    VictimAccount victim(group, rng);
    int accepted = 0;
    int key_agreements = 0;
    for (int i = 0; i < trials; ++i) {
        auto outcome = stolen_verifier_attack(group, victim.username, victim.provider,
                                              {victim.p_pi, victim.h}, rng);
        accepted += outcome.server_accepted ? 1 : 0;
        key_agreements += outcome.session_key_matched ? 1 : 0;
    }
    std::string details = "stolen (P_pi, h) unlocks the blinding: the attacker reached key "
                          "agreement in " +
                          std::to_string(key_agreements) + "/" + std::to_string(trials) +
                          " runs, but v = h^c needs the challenge exponent, so the explicit "
                          "verifier check rejected every attempt";
    return report("stolen-verifier", trials, accepted, details);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"AuthStore adversary harness"};
    app.require_subcommand(1);

    int trials = 10;
    int candidates = 1000;

    std::vector<std::string> kinds = {"mitm-none", "mitm-weaken", "mitm-flip-confirm",
                                      "dictionary", "dictionary-broken", "stolen-verifier"};
    std::map<std::string, CLI::App*> cmds;
    for (const auto& kind : kinds) {
        auto* cmd = app.add_subcommand(kind);
        cmd->add_option("--trials", trials, "number of runs")->capture_default_str();
        if (kind.rfind("dictionary", 0) == 0)
            cmd->add_option("--candidates", candidates, "dictionary size")
                ->capture_default_str();
        cmds[kind] = cmd;
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        nlohmann::json out;
        if (cmds["mitm-none"]->parsed() || cmds["mitm-weaken"]->parsed() ||
            cmds["mitm-flip-confirm"]->parsed()) {
            for (const auto& kind : {"mitm-none", "mitm-weaken", "mitm-flip-confirm"})
                if (cmds[kind]->parsed())
                    out = scenario_mitm(kind, trials);
        } else if (cmds["dictionary"]->parsed()) {
            out = scenario_dictionary(false, trials, candidates);
        } else if (cmds["dictionary-broken"]->parsed()) {
            out = scenario_dictionary(true, trials, candidates);
        } else if (cmds["stolen-verifier"]->parsed()) {
            out = scenario_stolen_verifier(trials);
        }
        std::cout << out.dump(2) << "\n";
        return 0;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}
