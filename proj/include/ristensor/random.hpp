// SPDX-License-Identifier: Apache-2.0
//
// ristensor: structured-tensor channel estimation for active-RIS SIMO-OFDM links
// Copyright (C) 2026 The ristensor authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#ifndef RISTENSOR_RANDOM_HPP
#define RISTENSOR_RANDOM_HPP

#include <complex>
#include <cstdint>
#include <initializer_list>
#include <random>

namespace ristensor
{

using Rng = std::mt19937_64;

// splitmix64 finalizer, used to derive independent per-trial streams from a master seed.
inline std::uint64_t mix_seed(std::uint64_t x)
{
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> keys)
{
    std::uint64_t s = mix_seed(master);
    for (auto k : keys)
        s = mix_seed(s ^ mix_seed(k + 0x632BE59BD9B4E019ULL));
    return s;
}

inline Rng make_rng(std::uint64_t master, std::initializer_list<std::uint64_t> keys = {})
{
    return Rng(derive_seed(master, keys));
}

// Circularly-symmetric complex Gaussian with E|z|^2 = variance.
inline std::complex<double> complex_gaussian(Rng &rng, double variance)
{
    std::normal_distribution<double> n(0.0, 1.0);
    const double s = std::sqrt(variance / 2.0);
    const double re = n(rng);
    const double im = n(rng);
    return {s * re, s * im};
}

// Uniform on (-pi, pi].
inline double uniform_phase(Rng &rng)
{
    constexpr double p = 3.14159265358979323846;
    std::uniform_real_distribution<double> u(-p, p);
    double v = u(rng);
    return v == -p ? p : v;
}

} // namespace ristensor

#endif
