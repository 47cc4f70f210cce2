// authstore-server: the service provider daemon plus the operator-side
// reset-issue command (which talks to the running daemon's loopback admin
// socket).

#include "CLI11.hpp"

#include "authstore/errors.hpp"
#include "authstore/server.hpp"
#include "authstore/transport.hpp"
#include "authstore/wire.hpp"

#include <csignal>
#include <cstdlib>
#include <iostream>
#include <semaphore>

namespace {

std::binary_semaphore g_shutdown{0};

void handle_signal(int) {
    g_shutdown.release();
}

std::pair<std::string, std::uint16_t> parse_endpoint(const std::string& s) {
    auto colon = s.rfind(':');
    if (colon == std::string::npos)
        throw CLI::ValidationError("endpoint", "expected host:port, got '" + s + "'");
    int port = std::stoi(s.substr(colon + 1));
    if (port < 0 || port > 65535)
        throw CLI::ValidationError("endpoint", "port out of range");
    return {s.substr(0, colon), static_cast<std::uint16_t>(port)};
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"AuthStore service provider"};
    app.require_subcommand(1);

    authstore::ServerConfig config;
    std::string listen = "127.0.0.1:4433";
    std::string data_dir;
    if (const char* env = std::getenv("AUTHSTORE_DATA_DIR"))
        data_dir = env;

    auto* serve = app.add_subcommand("serve", "run the provider");
    serve->add_option("--listen", listen, "listen endpoint (host:port)")
        ->capture_default_str();
    serve->add_option("--data-dir", data_dir, "data directory (env AUTHSTORE_DATA_DIR)");
    serve->add_option("--group", config.group_profile, "group profile: toy, test-256, modp-2048")
        ->capture_default_str();
    serve->add_option("--provider-id", config.provider_id, "provider identity string")
        ->capture_default_str();
    serve->add_option("--rate-limit", config.max_failed_per_minute,
                      "max failed logins per username per minute")
        ->capture_default_str();
    serve->add_option("--admin-port", config.admin_port,
                      "loopback admin port (0 = ephemeral)");
    serve->add_flag("--no-admin", "disable the admin socket");

    std::string reset_user;
    std::string admin_endpoint = "127.0.0.1:4434";
    auto* reset = app.add_subcommand("reset-issue",
                                     "issue a reset token via the admin socket");
    reset->add_option("username", reset_user, "account to reset")->required();
    reset->add_option("--admin", admin_endpoint, "admin endpoint of the running server")
        ->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (serve->parsed()) {
            if (data_dir.empty()) {
                std::cerr << "error: --data-dir or AUTHSTORE_DATA_DIR is required\n";
                return 2;
            }
            auto [host, port] = parse_endpoint(listen);
            config.listen_host = host;
            config.listen_port = port;
            config.data_dir = data_dir;
            config.enable_admin = serve->count("--no-admin") == 0;

            authstore::Server server(std::move(config));
            server.start();
            std::cout << "listening on " << host << ":" << server.port() << "\n";
            if (server.admin_port() != 0)
                std::cout << "admin socket on 127.0.0.1:" << server.admin_port() << "\n";
            std::cout.flush();

            std::signal(SIGINT, handle_signal);
            std::signal(SIGTERM, handle_signal);
            g_shutdown.acquire();
            server.stop();
            return 0;
        }

        if (reset->parsed()) {
            auto [host, port] = parse_endpoint(admin_endpoint);
            auto transport = authstore::TcpTransport::connect(host, port);
            transport->send_frame(
                authstore::view(authstore::wire::ResetBeginMsg{reset_user}.encode()));
            auto reply = transport->recv_frame();
            if (!reply) {
                std::cerr << "error: admin socket closed\n";
                return 3;
            }
            auto frame = authstore::wire::decode_frame(authstore::view(*reply));
            if (frame.type != authstore::wire::MsgType::ResetToken) {
                std::cerr << "error: reset refused (unknown user?)\n";
                return 3;
            }
            std::cout << authstore::wire::ResetTokenMsg::from(frame).token_hex << "\n";
            return 0;
        }
    } catch (const CLI::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const authstore::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 2;
}
