// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 stmkit contributors
#pragma once

#include <string>
#include <string_view>

namespace stmkit {

// Porter stemmer, classic 1980 rule tables. Input must be lowercase a-z;
// words of length <= 2 are returned unchanged.
std::string porter_stem(std::string_view word);

} // namespace stmkit
