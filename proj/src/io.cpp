#include "authstore/io.hpp"

#include "authstore/errors.hpp"

#include <cstdio>
#include <fstream>
#include <random>

namespace authstore {

namespace fs = std::filesystem;

Bytes read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        raise(ErrorCode::IoError, "cannot open " + path.string());
    Bytes data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (in.bad())
        raise(ErrorCode::IoError, "read failed for " + path.string());
    return data;
}

void write_file_atomic(const fs::path& path, ByteView data) {
    fs::path dir = path.parent_path();
    if (!dir.empty())
        fs::create_directories(dir);
    fs::path tmp = path;
    tmp += ".tmp" + std::to_string(std::random_device{}());
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out)
            raise(ErrorCode::IoError, "cannot create " + tmp.string());
        out.write(reinterpret_cast<const char*>(data.data()),
                  static_cast<std::streamsize>(data.size()));
        if (!out)
            raise(ErrorCode::IoError, "write failed for " + tmp.string());
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) {
        fs::remove(tmp);
        raise(ErrorCode::IoError, "rename failed for " + path.string() + ": " + ec.message());
    }
}

} // namespace authstore
