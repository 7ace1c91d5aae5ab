// Copyright 2026 The thyrex Authors.
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

#ifndef THYREX_UTF8_HPP_
#define THYREX_UTF8_HPP_

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace thyrex {
namespace utf8 {

// All character offsets in this library count Unicode scalar values
// (codepoints), never bytes. These helpers convert between the UTF-8
// byte representation used for storage and the codepoint view used
// for spans. Malformed bytes decode as U+FFFD, one codepoint per byte,
// so offsets stay well defined on dirty input.

/// Decodes a UTF-8 string into codepoints.
std::vector<char32_t> decode(const std::string& text);

/// Encodes codepoints back to UTF-8.
std::string encode(const std::vector<char32_t>& codepoints);
std::string encode(const char32_t* codepoints, std::size_t count);

/// Number of codepoints in `text`.
std::size_t length(const std::string& text);

/// Substring of `text` by codepoint offsets [start, end).
std::string substr(const std::string& text, std::size_t start, std::size_t end);

/// Per-codepoint byte offsets of `text`, plus one final entry equal to
/// text.size(). byte_offsets(text)[i] is where codepoint i starts.
std::vector<std::size_t> byte_offsets(const std::string& text);

}  // namespace utf8
}  // namespace thyrex

#endif  // THYREX_UTF8_HPP_
