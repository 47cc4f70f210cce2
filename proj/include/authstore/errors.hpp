#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace authstore {

enum class ErrorCode {
    // group
    WrongLength,
    OutOfRange,
    NotInSubgroup,
    // stretch
    EmptyPassword,
    UnsupportedAlgorithm,
    CostOutOfRange,
    // pake
    InvalidUsername,
    MalformedChallenge,
    AuthFailed,
    ServerAuthFailed,
    ProtocolOrder,
    // wire
    Truncated,
    BadType,
    FieldCount,
    Oversize,
    SealAuthFail,
    ReplayDetected,
    // account
    UserExists,
    InvalidVerifier,
    NotAuthenticated,
    UnknownUser,
    CorruptStore,
    // vault
    VaultLocked,
    CorruptVault,
    DuplicateRecord,
    NotFound,
    // server / client
    VersionConflict,
    RateLimited,
    ResetRequired,
    ProtocolError,
    IoError,
};

std::string_view error_code_name(ErrorCode code);

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(error_code_name(code)) + ": " + message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

[[noreturn]] inline void raise(ErrorCode code, const std::string& message) {
    throw Error(code, message);
}

} // namespace authstore
