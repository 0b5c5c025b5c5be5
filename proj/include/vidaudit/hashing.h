// Copyright 2026 The vidaudit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef VIDAUDIT_HASHING_H_
#define VIDAUDIT_HASHING_H_

#include <cstdint>
#include <string>
#include <string_view>

namespace vidaudit {

// 64-bit FNV-1a. Stable across platforms and processes, unlike std::hash.
uint64_t Fnv1a64(std::string_view data, uint64_t basis = 0xcbf29ce484222325ULL);

// Lowercase hex SHA-256 digest.
std::string Sha256Hex(std::string_view data);

// Mixes several 64-bit values into one seed (splitmix64 finalizer chain).
uint64_t MixSeed(uint64_t a, uint64_t b);

}  // namespace vidaudit

#endif  // VIDAUDIT_HASHING_H_
