// Copyright (c) 2026 spkcodes authors
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

#ifndef SPKCODES_UTIL_HPP_
#define SPKCODES_UTIL_HPP_

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace spk {

// Bad configuration or violated call contract (shape mismatch, unknown
// speaker, invalid strategy). The CLI maps this to exit code 1; anything
// else that escapes is a runtime failure and maps to exit code 2.
struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Non-finite values or other numeric breakdown detected at a module boundary.
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// FNV-1a, used to derive per-tensor and per-speaker rng streams from names.
std::uint64_t fnv1a64(std::string_view s);

// Shortest text that round-trips the exact double value ("%.17g").
std::string format_g17(double v);

// SHA-256 of a byte buffer, lowercase hex digest.
std::string sha256_hex(std::string_view bytes);

// Reads a whole file into a string. Throws NumericError on I/O failure.
std::string read_file(const std::string& path);

// Writes a string to a file, creating parent directories as needed.
void write_file(const std::string& path, std::string_view content);

}  // namespace spk

#endif  // SPKCODES_UTIL_HPP_
