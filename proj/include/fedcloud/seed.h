/*
 * Copyright 2026 The fedcloud Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#ifndef FEDCLOUD_SEED_H_
#define FEDCLOUD_SEED_H_

#include <cstdint>
#include <initializer_list>

namespace fedcloud {

// SplitMix64 finalizer.
constexpr std::uint64_t Mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Derives an independent stream seed from a base seed and a path of
// indices (purpose tag, round, client, block, ...). Every random stream in
// the library is keyed this way so results never depend on scheduling.
constexpr std::uint64_t DeriveSeed(std::uint64_t base,
                                   std::initializer_list<std::uint64_t> path) {
  std::uint64_t s = Mix64(base);
  for (std::uint64_t p : path) s = Mix64(s ^ Mix64(p + 0x632be59bd9b4e019ULL));
  return s;
}

// Purpose tags for DeriveSeed.
enum SeedTag : std::uint64_t {
  kSeedKeygen = 1,
  kSeedData = 2,
  kSeedEncrypt = 3,
  kSeedDpNoise = 4,
  kSeedBandwidth = 5,
  kSeedModelInit = 6,
};

}  // namespace fedcloud

#endif  // FEDCLOUD_SEED_H_
