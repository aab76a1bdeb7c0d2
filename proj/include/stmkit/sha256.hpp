// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 stmkit contributors
#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace stmkit {

// Lowercase hex SHA-256 digest of the given bytes.
std::string sha256_hex(std::string_view data);

// Digest of a file's raw bytes.
std::string sha256_hex_file(const std::filesystem::path& path);

} // namespace stmkit
