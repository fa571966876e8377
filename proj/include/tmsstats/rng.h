// Copyright 2026 The tmsstats Authors
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

#ifndef TMSSTATS_RNG_H
#define TMSSTATS_RNG_H

#include <cmath>
#include <cstdint>
#include <numbers>
#include <utility>

namespace tms {

inline uint64_t splitmix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Counter-based random stream: the value for (seed, stream, counter) does not
/// depend on how many other values were drawn, so shots can be generated in
/// any order or in parallel with identical results.
inline uint64_t counter_random(uint64_t seed, uint64_t stream, uint64_t counter) {
    return splitmix64(splitmix64(seed ^ splitmix64(stream)) + splitmix64(counter ^ 0x5851f42d4c957f2dULL));
}

/// Uniform in [0, 1) with 53 random bits.
inline double counter_uniform(uint64_t seed, uint64_t stream, uint64_t counter) {
    return static_cast<double>(counter_random(seed, stream, counter) >> 11) * 0x1.0p-53;
}

/// Pair of independent standard normals (Box-Muller) from counters 2c, 2c+1.
inline std::pair<double, double> counter_normal_pair(uint64_t seed, uint64_t stream, uint64_t c) {
    double u1 = 1.0 - counter_uniform(seed, stream, 2 * c);  // (0, 1]
    double u2 = counter_uniform(seed, stream, 2 * c + 1);
    double radius = std::sqrt(-2.0 * std::log(u1));
    double angle = 2.0 * std::numbers::pi * u2;
    return {radius * std::cos(angle), radius * std::sin(angle)};
}

}  // namespace tms

#endif
