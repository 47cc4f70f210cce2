// Drives the installed binaries as subprocesses: exit codes, transcript
// shapes and the password-less registration flow.

#include "doctest.h"

#include "authstore/io.hpp"
#include "authstore/server.hpp"

#include "test_util.hpp"

#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

using namespace authstore;
using namespace testutil;

namespace {

#ifndef AUTHSTORE_CLI_BIN
#error "AUTHSTORE_CLI_BIN must be defined by the build"
#endif
#ifndef AUTHSTORE_SERVER_BIN
#error "AUTHSTORE_SERVER_BIN must be defined by the build"
#endif

struct Cli {
    std::filesystem::path dir = temp_dir("cli");
    SeededRng server_rng{4040};
    Server server;

    Cli()
        : server(
              [&] {
                  ServerConfig cfg;
                  cfg.data_dir = dir / "srv";
                  cfg.group_profile = "test-256";
                  cfg.provider_id = "srv.cli";
                  cfg.max_failed_per_minute = 1000;
                  cfg.decoy_cost_template = test_kdf(2);
                  cfg.enable_admin = true;
                  return cfg;
              }(),
              server_rng) {
        server.start();
        write_text("pw.txt", "cli-password-1\n");
        write_text("bad.txt", "not-the-password\n");
        write_text("new.txt", "cli-password-2\n");
    }
    ~Cli() { server.stop(); }

    void write_text(const std::string& name, const std::string& text) {
        std::ofstream out(dir / name);
        out << text;
    }

    std::string endpoint() const { return "127.0.0.1:" + std::to_string(server.port()); }

    std::string base_args() const {
        return " --group test-256 --vault " + (dir / "vault.avlt").string();
    }

    int run(const std::string& args, const std::string& log_name = "out.log") const {
        std::string cmd = std::string(AUTHSTORE_CLI_BIN) + " " + args + " > " +
                          (dir / log_name).string() + " 2>&1";
        int rc = std::system(cmd.c_str());
        return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
    }

    std::string log(const std::string& log_name = "out.log") const {
        return to_string(view(read_file(dir / log_name)));
    }

    std::size_t transcript_frames(const std::string& name) const {
        std::ifstream in(dir / name);
        std::string line;
        std::size_t count = 0;
        while (std::getline(in, line))
            if (!line.empty())
                ++count;
        return count;
    }
};

} // namespace

TEST_CASE("register and login happy path exits 0") {
    Cli cli;
    std::string pw_file = (cli.dir / "pw.txt").string();
    CHECK(cli.run("register " + cli.endpoint() + " alice --kdf test-iterated --passes 2" +
                  cli.base_args() + " --password-file " + pw_file) == 0);
    CHECK(cli.run("login " + cli.endpoint() + " alice" + cli.base_args() + " --password-file " +
                  pw_file) == 0);
    CHECK(cli.log().find("OK") != std::string::npos);

    // duplicate registration is a non-auth failure
    CHECK(cli.run("register " + cli.endpoint() + " alice --kdf test-iterated" + cli.base_args() +
                  " --password-file " + pw_file) == 3);
}

TEST_CASE("wrong password exits 1 after exactly three frames") {
    Cli cli;
    std::string pw_file = (cli.dir / "pw.txt").string();
    std::string bad_file = (cli.dir / "bad.txt").string();
    REQUIRE(cli.run("register " + cli.endpoint() + " bob --kdf test-iterated --passes 2" +
                    cli.base_args() + " --password-file " + pw_file) == 0);

    std::string transcript = (cli.dir / "t.log").string();
    CHECK(cli.run("login " + cli.endpoint() + " bob" + cli.base_args() + " --password-file " +
                  bad_file + " --transcript " + transcript) == 1);
    CHECK(cli.log().find("authentication failed") != std::string::npos);
    CHECK(cli.transcript_frames("t.log") == 3); // M1, M2, M3 and no M4

    std::string t2 = (cli.dir / "t2.log").string();
    CHECK(cli.run("login " + cli.endpoint() + " bob" + cli.base_args() + " --password-file " +
                  pw_file + " --transcript " + t2) == 0);
    CHECK(cli.transcript_frames("t2.log") == 4);
}

TEST_CASE("usage errors exit 2") {
    Cli cli;
    CHECK(cli.run("login") == 2);
    CHECK(cli.run("frobnicate") == 2);
    CHECK(cli.run("--help") == 0);
}

TEST_CASE("unreachable server exits 3") {
    Cli cli;
    std::string pw_file = (cli.dir / "pw.txt").string();
    CHECK(cli.run("login 127.0.0.1:1 nobody" + cli.base_args() + " --password-file " + pw_file) ==
          3);
}

TEST_CASE("vault lifecycle and sync through the CLI") {
    Cli cli;
    std::string pw_file = (cli.dir / "pw.txt").string();
    REQUIRE(cli.run("register " + cli.endpoint() + " carol --kdf test-iterated --passes 2" +
                    cli.base_args() + " --password-file " + pw_file) == 0);

    CHECK(cli.run("vault add web.example carol-login --secret s3cr3t --kdf test-iterated" +
                  cli.base_args() + " --password-file " + pw_file) == 0);
    CHECK(cli.run("vault get web.example carol-login" + cli.base_args() + " --password-file " +
                  pw_file) == 0);
    CHECK(cli.log() == "s3cr3t\n");

    CHECK(cli.run("vault sync " + cli.endpoint() + " carol" + cli.base_args() +
                  " --password-file " + pw_file) == 0);
    CHECK(cli.run("vault list --json" + cli.base_args() + " --password-file " + pw_file) == 0);
    CHECK(cli.log().find("web.example") != std::string::npos);
    CHECK(cli.log().find("user-key-cache") != std::string::npos);

    // fresh device: empty vault path, pull from the provider
    std::string fresh_vault = (cli.dir / "fresh.avlt").string();
    CHECK(cli.run("vault sync " + cli.endpoint() + " carol --group test-256 --vault " +
                  fresh_vault + " --password-file " + pw_file) == 0);
    CHECK(cli.run("vault get web.example carol-login --group test-256 --vault " + fresh_vault +
                  " --password-file " + pw_file) == 0);
    CHECK(cli.log() == "s3cr3t\n");
}

TEST_CASE("reuse-base registration needs no new password") {
    Cli cli;
    std::string pw_file = (cli.dir / "pw.txt").string();
    REQUIRE(cli.run("register " + cli.endpoint() + " dave --kdf test-iterated --passes 2" +
                    cli.base_args() + " --password-file " + pw_file) == 0);
    REQUIRE(cli.run("vault sync " + cli.endpoint() + " dave" + cli.base_args() +
                    " --password-file " + pw_file) == 0);

    // second account at the same provider, derived from the vault's base key
    CHECK(cli.run("register " + cli.endpoint() + " dave-two --reuse-base" + cli.base_args() +
                  " --password-file " + pw_file) == 0);
    CHECK(cli.log().find("reused base key parameters") != std::string::npos);
    CHECK(cli.run("login " + cli.endpoint() + " dave-two" + cli.base_args() +
                  " --password-file " + pw_file) == 0);
}

TEST_CASE("passwd rotates the credential and rewraps the vault") {
    Cli cli;
    std::string pw_file = (cli.dir / "pw.txt").string();
    std::string new_file = (cli.dir / "new.txt").string();
    REQUIRE(cli.run("register " + cli.endpoint() + " erin --kdf test-iterated --passes 2" +
                    cli.base_args() + " --password-file " + pw_file) == 0);
    REQUIRE(cli.run("vault add a.example erin --secret keepme --kdf test-iterated" +
                    cli.base_args() + " --password-file " + pw_file) == 0);

    CHECK(cli.run("passwd " + cli.endpoint() + " erin --kdf test-iterated --passes 3" +
                  cli.base_args() + " --password-file " + pw_file + " --new-password-file " +
                  new_file) == 0);

    CHECK(cli.run("login " + cli.endpoint() + " erin" + cli.base_args() + " --password-file " +
                  pw_file) == 1);
    CHECK(cli.run("login " + cli.endpoint() + " erin" + cli.base_args() + " --password-file " +
                  new_file) == 0);
    // vault opens under the new password and the record survived
    CHECK(cli.run("vault get a.example erin" + cli.base_args() + " --password-file " +
                  new_file) == 0);
    CHECK(cli.log() == "keepme\n");
    CHECK(cli.run("vault get a.example erin" + cli.base_args() + " --password-file " + pw_file) ==
          1);
}

TEST_CASE("reset flow through the server binary's admin command") {
    Cli cli;
    std::string pw_file = (cli.dir / "pw.txt").string();
    std::string new_file = (cli.dir / "new.txt").string();
    REQUIRE(cli.run("register " + cli.endpoint() + " gina --kdf test-iterated --passes 2" +
                    cli.base_args() + " --password-file " + pw_file) == 0);

    // issue the token through the operator tool against the admin socket
    std::string cmd = std::string(AUTHSTORE_SERVER_BIN) + " reset-issue gina --admin 127.0.0.1:" +
                      std::to_string(cli.server.admin_port()) + " > " +
                      (cli.dir / "token.txt").string();
    REQUIRE(std::system(cmd.c_str()) == 0);
    std::string token = to_string(view(read_file(cli.dir / "token.txt")));
    while (!token.empty() && (token.back() == '\n' || token.back() == '\r'))
        token.pop_back();
    REQUIRE(!token.empty());

    CHECK(cli.run("reset " + cli.endpoint() + " gina --token " + token +
                  " --kdf test-iterated --passes 2" + cli.base_args() + " --new-password-file " +
                  new_file) == 0);
    // single use
    CHECK(cli.run("reset " + cli.endpoint() + " gina --token " + token +
                  " --kdf test-iterated --passes 2" + cli.base_args() + " --new-password-file " +
                  new_file) == 1);
    CHECK(cli.run("login " + cli.endpoint() + " gina" + cli.base_args() + " --password-file " +
                  new_file) == 0);
}

TEST_CASE("the server binary serves and shuts down cleanly") {
    auto dir = temp_dir("server-bin");
    std::string log = (dir / "server.log").string();
    std::string cmd = std::string(AUTHSTORE_SERVER_BIN) + " serve --listen 127.0.0.1:0" +
                      " --data-dir " + (dir / "data").string() +
                      " --group test-256 --admin-port 0 > " + log + " 2>&1";

    pid_t pid = fork();
    REQUIRE(pid >= 0);
    if (pid == 0) {
        execl("/bin/sh", "sh", "-c", cmd.c_str(), nullptr);
        _exit(127);
    }
    // wait for the port line
    std::uint16_t port = 0;
    for (int i = 0; i < 100 && port == 0; ++i) {
        usleep(20 * 1000);
        std::ifstream in(log);
        std::string line;
        while (std::getline(in, line)) {
            auto pos = line.find("listening on 127.0.0.1:");
            if (pos != std::string::npos)
                port = static_cast<std::uint16_t>(std::stoi(line.substr(pos + 23)));
        }
    }
    REQUIRE(port != 0);

    Cli cli; // for run helper only; its own server is unused here
    std::string pw_file = (cli.dir / "pw.txt").string();
    CHECK(cli.run("register 127.0.0.1:" + std::to_string(port) +
                  " standalone --kdf test-iterated" + cli.base_args() + " --password-file " +
                  pw_file) == 0);
    CHECK(cli.run("login 127.0.0.1:" + std::to_string(port) + " standalone" + cli.base_args() +
                  " --password-file " + pw_file) == 0);

    kill(pid, SIGTERM);
    int status = 0;
    waitpid(pid, &status, 0);
    CHECK(WIFEXITED(status));
    CHECK(WEXITSTATUS(status) == 0);
}
