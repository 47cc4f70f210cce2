#include "authstore/username.hpp"

#include "authstore/errors.hpp"

namespace authstore {

std::string canonicalize_username(std::string_view raw) {
    if (raw.empty())
        raise(ErrorCode::InvalidUsername, "username is empty");
    if (raw.size() > 64)
        raise(ErrorCode::InvalidUsername, "username longer than 64 bytes");
    std::string out;
    out.reserve(raw.size());
    for (unsigned char c : raw) {
        if (c < 0x20 || c == 0x7f)
            raise(ErrorCode::InvalidUsername, "username contains control characters");
        if (c >= 'A' && c <= 'Z')
            c = static_cast<unsigned char>(c - 'A' + 'a');
        out.push_back(static_cast<char>(c));
    }
    return out;
}

} // namespace authstore
