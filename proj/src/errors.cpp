#include "authstore/errors.hpp"

namespace authstore {

std::string_view error_code_name(ErrorCode code) {
    switch (code) {
    case ErrorCode::WrongLength: return "WrongLength";
    case ErrorCode::OutOfRange: return "OutOfRange";
    case ErrorCode::NotInSubgroup: return "NotInSubgroup";
    case ErrorCode::EmptyPassword: return "EmptyPassword";
    case ErrorCode::UnsupportedAlgorithm: return "UnsupportedAlgorithm";
    case ErrorCode::CostOutOfRange: return "CostOutOfRange";
    case ErrorCode::InvalidUsername: return "InvalidUsername";
    case ErrorCode::MalformedChallenge: return "MalformedChallenge";
    case ErrorCode::AuthFailed: return "AuthFailed";
    case ErrorCode::ServerAuthFailed: return "ServerAuthFailed";
    case ErrorCode::ProtocolOrder: return "ProtocolOrder";
    case ErrorCode::Truncated: return "Truncated";
    case ErrorCode::BadType: return "BadType";
    case ErrorCode::FieldCount: return "FieldCount";
    case ErrorCode::Oversize: return "Oversize";
    case ErrorCode::SealAuthFail: return "SealAuthFail";
    case ErrorCode::ReplayDetected: return "ReplayDetected";
    case ErrorCode::UserExists: return "UserExists";
    case ErrorCode::InvalidVerifier: return "InvalidVerifier";
    case ErrorCode::NotAuthenticated: return "NotAuthenticated";
    case ErrorCode::UnknownUser: return "UnknownUser";
    case ErrorCode::CorruptStore: return "CorruptStore";
    case ErrorCode::VaultLocked: return "VaultLocked";
    case ErrorCode::CorruptVault: return "CorruptVault";
    case ErrorCode::DuplicateRecord: return "DuplicateRecord";
    case ErrorCode::NotFound: return "NotFound";
    case ErrorCode::VersionConflict: return "VersionConflict";
    case ErrorCode::RateLimited: return "RateLimited";
    case ErrorCode::ResetRequired: return "ResetRequired";
    case ErrorCode::ProtocolError: return "ProtocolError";
    case ErrorCode::IoError: return "IoError";
    }
    return "Unknown";
}

} // namespace authstore
