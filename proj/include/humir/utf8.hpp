// Copyright 2026 The humir Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace humir::utf8 {

/// Byte offset of the first invalid sequence, or nullopt when `s` is valid
/// UTF-8 (overlong forms, surrogates and code points above U+10FFFF are
/// rejected).
std::optional<std::size_t> find_invalid(std::string_view s);

inline bool is_valid(std::string_view s) { return !find_invalid(s); }

/// Decodes one code point starting at `pos` and advances it. Input must be
/// valid.
char32_t decode(std::string_view s, std::size_t& pos);

void append(std::string& out, char32_t cp);

}  // namespace humir::utf8
