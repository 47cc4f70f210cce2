// authstore: client CLI. One password drives authentication and vault
// encryption; the password itself never leaves the process.

#include "CLI11.hpp"
#include "json.hpp"

#include "authstore/client.hpp"
#include "authstore/errors.hpp"
#include "authstore/io.hpp"
#include "authstore/vault.hpp"

#include <termios.h>
#include <unistd.h>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>

using namespace authstore;

namespace {

// ------------------------------------------------------------------ plumbing

int error_exit_code(const Error& e) {
    switch (e.code()) {
    case ErrorCode::AuthFailed:
    case ErrorCode::ServerAuthFailed:
    case ErrorCode::VaultLocked:
        return 1;
    case ErrorCode::InvalidUsername:
    case ErrorCode::EmptyPassword:
        return 2;
    default:
        return 3;
    }
}

const char* error_message(const Error& e) {
    switch (e.code()) {
    case ErrorCode::AuthFailed:
        return "authentication failed";
    case ErrorCode::ServerAuthFailed:
        return "authentication failed: the server could not prove knowledge of the verifier";
    case ErrorCode::VaultLocked:
        return "vault locked: wrong password";
    default:
        return e.what();
    }
}

std::pair<std::string, std::uint16_t> parse_endpoint(const std::string& s) {
    auto colon = s.rfind(':');
    if (colon == std::string::npos)
        raise(ErrorCode::IoError, "expected host:port, got '" + s + "'");
    int port = std::stoi(s.substr(colon + 1));
    if (port < 1 || port > 65535)
        raise(ErrorCode::IoError, "port out of range in '" + s + "'");
    return {s.substr(0, colon), static_cast<std::uint16_t>(port)};
}

std::string prompt_password(const std::string& prompt, bool confirm) {
    auto read_once = [&](const std::string& p) {
        std::cerr << p << std::flush;
        termios old_state{};
        bool tty = ::isatty(STDIN_FILENO) == 1;
        if (tty) {
            ::tcgetattr(STDIN_FILENO, &old_state);
            termios silent = old_state;
            silent.c_lflag &= ~static_cast<tcflag_t>(ECHO);
            ::tcsetattr(STDIN_FILENO, TCSANOW, &silent);
        }
        std::string line;
        std::getline(std::cin, line);
        if (tty) {
            ::tcsetattr(STDIN_FILENO, TCSANOW, &old_state);
            std::cerr << "\n";
        }
        return line;
    };
    std::string pw = read_once(prompt);
    if (pw.empty())
        raise(ErrorCode::EmptyPassword, "password must not be empty");
    if (confirm) {
        std::string again = read_once("repeat password: ");
        if (again != pw)
            raise(ErrorCode::EmptyPassword, "passwords do not match");
    }
    return pw;
}

std::string password_from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        raise(ErrorCode::IoError, "cannot open password file " + path);
    std::string pw;
    std::getline(in, pw);
    if (pw.empty())
        raise(ErrorCode::EmptyPassword, "password file is empty");
    return pw;
}

std::string get_password(const std::string& file_flag, const std::string& prompt,
                         bool confirm = false) {
    if (!file_flag.empty())
        return password_from_file(file_flag);
    return prompt_password(prompt, confirm);
}

std::string default_vault_path() {
    if (const char* env = std::getenv("AUTHSTORE_VAULT"))
        return env;
    std::string base;
    if (const char* xdg = std::getenv("XDG_CONFIG_HOME"))
        base = xdg;
    else if (const char* home = std::getenv("HOME"))
        base = std::string(home) + "/.config";
    else
        base = ".";
    return base + "/authstore/vault.avlt";
}

std::optional<VaultDocument> load_vault(const std::string& path) {
    if (!std::filesystem::exists(path))
        return std::nullopt;
    return VaultDocument::decode(view(read_file(path)));
}

void save_vault(const std::string& path, const VaultDocument& doc) {
    write_file_atomic(path, view(doc.encode()));
}

std::uint64_t load_synced_version(const std::string& path) {
    std::ifstream in(path + ".version");
    std::uint64_t v = 0;
    if (in)
        in >> v;
    return v;
}

void save_synced_version(const std::string& path, std::uint64_t v) {
    Bytes text = to_bytes(std::to_string(v));
    write_file_atomic(path + ".version", view(text));
}

void write_transcript(const std::string& path, const Transcript& transcript) {
    std::ofstream out(path, std::ios::trunc);
    for (const auto& entry : transcript.entries) {
        out << (entry.dir == Direction::ClientToServer ? "C->S " : "S->C ")
            << hex_encode(view(entry.frame)) << "\n";
    }
}

struct CommonFlags {
    std::string group_profile = "modp-2048";
    std::string vault_path = default_vault_path();
    std::string password_file;
    std::string transcript_path;
    std::uint32_t mem_kib = 64 * 1024;
    std::uint32_t passes = 3;
    std::uint32_t parallelism = 1;
    std::string kdf = "memory-hard";

    KdfParams kdf_params(Rng& rng) const {
        if (kdf == "test-iterated")
            return KdfParams::test_iterated(rng, passes);
        return KdfParams::memory_hard(rng, mem_kib, passes, parallelism);
    }
};

void add_common(CLI::App* cmd, CommonFlags& flags, bool with_kdf) {
    cmd->add_option("--group", flags.group_profile, "group profile")->capture_default_str();
    cmd->add_option("--vault", flags.vault_path, "vault file path")->capture_default_str();
    cmd->add_option("--password-file", flags.password_file,
                    "read the password from this file (UNSAFE: tests only)");
    cmd->add_option("--transcript", flags.transcript_path, "write a frame log to this file");
    if (with_kdf) {
        cmd->add_option("--mem-kib", flags.mem_kib, "KDF memory cost in KiB")
            ->capture_default_str();
        cmd->add_option("--passes", flags.passes, "KDF passes / iterations")
            ->capture_default_str();
        cmd->add_option("--parallelism", flags.parallelism, "KDF lanes")->capture_default_str();
        cmd->add_option("--kdf", flags.kdf, "memory-hard or test-iterated (tests only)")
            ->capture_default_str();
    }
}

ClientConnection connect_to(const CommonFlags& flags, const std::string& server,
                            Transcript* transcript) {
    auto [host, port] = parse_endpoint(server);
    auto conn = ClientConnection::connect(GroupParams::profile(flags.group_profile), host, port);
    if (transcript)
        conn.set_transcript(transcript);
    return conn;
}

/// Upserts the provider user-key cache record after a successful login.
void cache_user_key(VaultHandle& handle, const std::string& server, const std::string& username,
                    const UserKeyParams& p_pi, const UserKey& k_auth) {
    CredentialRecord rec;
    rec.site = server;
    rec.login = username;
    rec.secret = Bytes(k_auth.bytes.begin(), k_auth.bytes.end());
    rec.kind = RecordKind::UserKeyCache;
    rec.user_key_params = p_pi;
    handle.upsert_record(rec);
}

// ------------------------------------------------------------------ commands

int cmd_register(const CommonFlags& flags, const std::string& server,
                 const std::string& username, bool reuse_base) {
    SystemRng& rng = SystemRng::instance();
    Transcript transcript;
    auto conn = connect_to(flags, server, flags.transcript_path.empty() ? nullptr : &transcript);

    if (reuse_base) {
        // Password-less registration: the vault's base-key parameters are
        // reused, so unlocking the vault is the only derivation that runs.
        auto doc = load_vault(flags.vault_path);
        if (!doc)
            raise(ErrorCode::NotFound, "no vault at " + flags.vault_path +
                                           " (a vault is required for --reuse-base)");
        std::string pw = get_password(flags.password_file, "vault password: ");
        vault_open(*doc, view(pw)); // populates the base-key cache
        UserKeyParams p_pi;
        p_pi.base = doc->data_params.u_params.base;
        rng.fill(p_pi.user_salt);
        UserKey k_auth = user_key_from_password(p_pi, view(pw));
        conn.register_with_user_key(username, p_pi, k_auth);
        std::cout << "registered " << username << " (reused base key parameters)\n";
    } else {
        std::string pw = get_password(flags.password_file, "password: ", /*confirm=*/true);
        conn.register_account(username, view(pw), flags.kdf_params(rng), rng);
        std::cout << "registered " << username << "\n";
    }
    conn.close();
    if (!flags.transcript_path.empty())
        write_transcript(flags.transcript_path, transcript);
    return 0;
}

int cmd_login(const CommonFlags& flags, const std::string& server, const std::string& username) {
    SystemRng& rng = SystemRng::instance();
    Transcript transcript;
    auto conn = connect_to(flags, server, flags.transcript_path.empty() ? nullptr : &transcript);
    std::string pw = get_password(flags.password_file, "password: ");
    try {
        conn.login(username, ClientCredential::password(pw), rng);
    } catch (...) {
        if (!flags.transcript_path.empty())
            write_transcript(flags.transcript_path, transcript);
        throw;
    }
    conn.close();
    if (!flags.transcript_path.empty())
        write_transcript(flags.transcript_path, transcript);
    std::cout << "OK\n";
    return 0;
}

int cmd_passwd(const CommonFlags& flags, const std::string& server, const std::string& username,
               const std::string& new_password_file) {
    SystemRng& rng = SystemRng::instance();
    std::string old_pw = get_password(flags.password_file, "current password: ");
    std::string new_pw = new_password_file.empty()
                             ? prompt_password("new password: ", /*confirm=*/true)
                             : password_from_file(new_password_file);

    auto conn = connect_to(flags, server, nullptr);
    conn.login(username, ClientCredential::password(old_pw), rng);

    const GroupParams& group = GroupParams::profile(flags.group_profile);
    UserKeyParams p_pi;
    p_pi.base = flags.kdf_params(rng);
    rng.fill(p_pi.user_salt);
    Scalar pi = to_auth_scalar(user_key_from_password(p_pi, view(new_pw)), group);
    conn.change_credentials(p_pi, group.exp(group.generator(), pi));
    conn.close();
    std::cout << "credentials updated\n";

    // rewrap the local vault under the new password (key chain: the sealed
    // payload is untouched)
    if (auto doc = load_vault(flags.vault_path)) {
        try {
            VaultDocument rewrapped =
                vault_change_password(*doc, view(old_pw), view(new_pw), p_pi.base, rng);
            save_vault(flags.vault_path, rewrapped);
            std::cout << "vault rewrapped; run 'vault sync' to push it\n";
        } catch (const Error& e) {
            if (e.code() != ErrorCode::VaultLocked)
                throw;
            std::cerr << "warning: local vault uses a different password; not rewrapped\n";
        }
    }
    return 0;
}

int cmd_reset(const CommonFlags& flags, const std::string& server, const std::string& username,
              const std::string& token_hex, const std::string& new_password_file) {
    SystemRng& rng = SystemRng::instance();
    const GroupParams& group = GroupParams::profile(flags.group_profile);
    Scalar pi_temp = group.decode_scalar(view(hex_decode(token_hex)));

    auto conn = connect_to(flags, server, nullptr);
    conn.login(username, ClientCredential::auth_scalar(pi_temp), rng);

    // the server locks this session to ChangeCredentials, so choose the new
    // password now
    std::string new_pw = new_password_file.empty()
                             ? prompt_password("new password: ", /*confirm=*/true)
                             : password_from_file(new_password_file);
    UserKeyParams p_pi;
    p_pi.base = flags.kdf_params(rng);
    rng.fill(p_pi.user_salt);
    Scalar pi = to_auth_scalar(user_key_from_password(p_pi, view(new_pw)), group);
    conn.change_credentials(p_pi, group.exp(group.generator(), pi));
    conn.close();
    std::cout << "account reset: new credentials installed\n";
    std::cerr << "warning: data encrypted under the lost password stays locked; "
                 "a reset restores login, not vault contents\n";
    return 0;
}

int cmd_vault_add(const CommonFlags& flags, const std::string& site, const std::string& login,
                  std::string secret) {
    SystemRng& rng = SystemRng::instance();
    auto doc = load_vault(flags.vault_path);
    std::string pw;
    VaultDocument current;
    if (doc) {
        pw = get_password(flags.password_file, "vault password: ");
        current = *doc;
    } else {
        std::cout << "creating new vault at " << flags.vault_path << "\n";
        pw = get_password(flags.password_file, "vault password: ", /*confirm=*/true);
        current = vault_create(view(pw), flags.kdf_params(rng), rng);
    }
    VaultHandle handle = vault_open(current, view(pw));
    if (secret.empty())
        secret = get_password("", "secret for " + site + "/" + login + ": ");
    handle.add_record({site, login, to_bytes(secret), RecordKind::WebPassword, {}});
    save_vault(flags.vault_path, handle.save(rng));
    std::cout << "added " << site << "/" << login << "\n";
    return 0;
}

int cmd_vault_get(const CommonFlags& flags, const std::string& site, const std::string& login) {
    auto doc = load_vault(flags.vault_path);
    if (!doc)
        raise(ErrorCode::NotFound, "no vault at " + flags.vault_path);
    std::string pw = get_password(flags.password_file, "vault password: ");
    VaultHandle handle = vault_open(*doc, view(pw));
    const CredentialRecord& rec = handle.get_record(site, login);
    std::cout << to_string(view(rec.secret)) << "\n";
    return 0;
}

int cmd_vault_list(const CommonFlags& flags, bool as_json) {
    auto doc = load_vault(flags.vault_path);
    if (!doc)
        raise(ErrorCode::NotFound, "no vault at " + flags.vault_path);
    std::string pw = get_password(flags.password_file, "vault password: ");
    VaultHandle handle = vault_open(*doc, view(pw));

    if (as_json) {
        nlohmann::json out = nlohmann::json::array();
        for (const auto& rec : handle.list_records()) {
            out.push_back({{"site", rec.site},
                           {"login", rec.login},
                           {"kind", rec.kind == RecordKind::WebPassword ? "web-password"
                                                                        : "user-key-cache"}});
        }
        std::cout << out.dump(2) << "\n";
    } else {
        for (const auto& rec : handle.list_records()) {
            const char* kind =
                rec.kind == RecordKind::WebPassword ? "web-password" : "user-key-cache";
            std::cout << rec.site << "\t" << rec.login << "\t" << kind << "\n";
        }
    }
    return 0;
}

int cmd_vault_sync(const CommonFlags& flags, const std::string& server,
                   const std::string& username) {
    SystemRng& rng = SystemRng::instance();
    std::string pw = get_password(flags.password_file, "password: ");

    Transcript transcript;
    auto conn = connect_to(flags, server, flags.transcript_path.empty() ? nullptr : &transcript);
    conn.login(username, ClientCredential::password(pw), rng);

    auto local = load_vault(flags.vault_path);
    auto remote = conn.get_blob();
    std::uint64_t synced = load_synced_version(flags.vault_path);

    auto push = [&](const VaultDocument& doc, std::uint64_t version) {
        conn.put_blob(version, view(doc.encode()));
        save_vault(flags.vault_path, doc);
        save_synced_version(flags.vault_path, version);
    };

    if (!local && !remote) {
        // first device, first sync: one password, one vault. The served
        // base-key parameters are reused so no further derivation runs.
        UserKeyParams served = conn.served_params().value();
        VaultDocument doc = vault_create(view(pw), served.base, rng);
        VaultHandle handle = vault_open(doc, view(pw));
        cache_user_key(handle, server, username, served,
                       user_key_from_password(served, view(pw)));
        push(handle.save(rng), 1);
        std::cout << "created and pushed a new vault (version 1)\n";
    } else if (!local && remote) {
        save_vault(flags.vault_path, VaultDocument::decode(view(remote->second)));
        save_synced_version(flags.vault_path, remote->first);
        std::cout << "pulled vault version " << remote->first << "\n";
    } else if (local && !remote) {
        VaultHandle handle = vault_open(*local, view(pw));
        UserKeyParams served = conn.served_params().value();
        cache_user_key(handle, server, username, served,
                       user_key_from_password(served, view(pw)));
        push(handle.save(rng), 1);
        std::cout << "pushed vault version 1\n";
    } else if (remote->first > synced) {
        save_vault(flags.vault_path, VaultDocument::decode(view(remote->second)));
        save_synced_version(flags.vault_path, remote->first);
        std::cout << "pulled vault version " << remote->first << "\n";
    } else {
        // refresh the user-key cache record while the vault is open
        VaultHandle handle = vault_open(*local, view(pw));
        UserKeyParams served = conn.served_params().value();
        cache_user_key(handle, server, username, served,
                       user_key_from_password(served, view(pw)));
        push(handle.save(rng), remote->first + 1);
        std::cout << "pushed vault version " << remote->first + 1 << "\n";
    }
    conn.close();
    if (!flags.transcript_path.empty())
        write_transcript(flags.transcript_path, transcript);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"AuthStore client and password manager"};
    app.require_subcommand(1);

    std::string default_server;
    if (const char* env = std::getenv("AUTHSTORE_SERVER"))
        default_server = env;

    CommonFlags flags;
    std::string server = default_server;
    std::string username, token_hex, new_password_file;
    std::string site, login, secret;
    bool reuse_base = false;
    bool as_json = false;

    auto add_server_user = [&](CLI::App* cmd) {
        if (default_server.empty())
            cmd->add_option("server", server, "provider endpoint host:port")->required();
        else
            cmd->add_option("server", server, "provider endpoint host:port")
                ->capture_default_str();
        cmd->add_option("username", username, "account name")->required();
    };

    auto* reg = app.add_subcommand("register", "create an account");
    add_server_user(reg);
    reg->add_flag("--reuse-base", reuse_base,
                  "password-less registration from the vault's base key parameters");
    add_common(reg, flags, /*with_kdf=*/true);

    auto* login_cmd = app.add_subcommand("login", "authenticate with CompactPAKE");
    add_server_user(login_cmd);
    add_common(login_cmd, flags, /*with_kdf=*/false);

    auto* passwd = app.add_subcommand("passwd", "change password and rewrap the vault");
    add_server_user(passwd);
    passwd->add_option("--new-password-file", new_password_file,
                       "read the new password from this file (UNSAFE: tests only)");
    add_common(passwd, flags, /*with_kdf=*/true);

    auto* reset = app.add_subcommand("reset", "authenticate with a reset token");
    add_server_user(reset);
    reset->add_option("--token", token_hex, "reset token (hex) from the operator")->required();
    reset->add_option("--new-password-file", new_password_file,
                      "read the new password from this file (UNSAFE: tests only)");
    add_common(reset, flags, /*with_kdf=*/true);

    auto* vault = app.add_subcommand("vault", "local password manager");
    vault->require_subcommand(1);

    auto* vadd = vault->add_subcommand("add", "store a credential");
    vadd->add_option("site", site, "site name")->required();
    vadd->add_option("login", login, "login name")->required();
    vadd->add_option("--secret", secret, "secret value (prompted when omitted)");
    add_common(vadd, flags, /*with_kdf=*/true);

    auto* vget = vault->add_subcommand("get", "print a stored secret");
    vget->add_option("site", site, "site name")->required();
    vget->add_option("login", login, "login name")->required();
    add_common(vget, flags, /*with_kdf=*/false);

    auto* vlist = vault->add_subcommand("list", "list stored credentials");
    vlist->add_flag("--json", as_json, "machine-readable output");
    add_common(vlist, flags, /*with_kdf=*/false);

    auto* vsync = vault->add_subcommand("sync", "synchronize the vault with a provider");
    add_server_user(vsync);
    add_common(vsync, flags, /*with_kdf=*/false);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (reg->parsed())
            return cmd_register(flags, server, username, reuse_base);
        if (login_cmd->parsed())
            return cmd_login(flags, server, username);
        if (passwd->parsed())
            return cmd_passwd(flags, server, username, new_password_file);
        if (reset->parsed())
            return cmd_reset(flags, server, username, token_hex, new_password_file);
        if (vault->parsed()) {
            if (vadd->parsed())
                return cmd_vault_add(flags, site, login, secret);
            if (vget->parsed())
                return cmd_vault_get(flags, site, login);
            if (vlist->parsed())
                return cmd_vault_list(flags, as_json);
            if (vsync->parsed())
                return cmd_vault_sync(flags, server, username);
        }
    } catch (const Error& e) {
        std::cerr << "error: " << error_message(e) << "\n";
        return error_exit_code(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 2;
}
