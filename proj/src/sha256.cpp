// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 stmkit contributors

#include <array>
#include <fstream>

#include <openssl/evp.h>

#include "stmkit/errors.hpp"
#include "stmkit/sha256.hpp"

namespace stmkit {

namespace {

std::string to_hex(const unsigned char* digest, unsigned int len) {
    static constexpr char kHex[] = "0123456789abcdef";
    std::string out;
    out.reserve(static_cast<std::size_t>(len) * 2);
    for (unsigned int i = 0; i < len; ++i) {
        out.push_back(kHex[digest[i] >> 4]);
        out.push_back(kHex[digest[i] & 0x0f]);
    }
    return out;
}

class Digest {
public:
    Digest() : ctx_(EVP_MD_CTX_new()) {
        if (ctx_ == nullptr ||
            EVP_DigestInit_ex(ctx_, EVP_sha256(), nullptr) != 1) {
            throw Error("failed to initialize SHA-256 context");
        }
    }
    ~Digest() { EVP_MD_CTX_free(ctx_); }
    Digest(const Digest&) = delete;
    Digest& operator=(const Digest&) = delete;

    void update(const char* data, std::size_t len) {
        if (EVP_DigestUpdate(ctx_, data, len) != 1) {
            throw Error("SHA-256 update failed");
        }
    }

    std::string finish() {
        std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
        unsigned int len = 0;
        if (EVP_DigestFinal_ex(ctx_, digest.data(), &len) != 1) {
            throw Error("SHA-256 finalization failed");
        }
        return to_hex(digest.data(), len);
    }

private:
    EVP_MD_CTX* ctx_;
};

} // namespace

std::string sha256_hex(std::string_view data) {
    Digest digest;
    digest.update(data.data(), data.size());
    return digest.finish();
}

std::string sha256_hex_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw FormatError("cannot open file for hashing: " + path.string());
    }
    Digest digest;
    std::array<char, 1 << 16> buffer;
    while (in) {
        in.read(buffer.data(), static_cast<std::streamsize>(buffer.size()));
        const auto got = in.gcount();
        if (got > 0) {
            digest.update(buffer.data(), static_cast<std::size_t>(got));
        }
    }
    return digest.finish();
}

} // namespace stmkit
