// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 stmkit contributors
#pragma once

#include <cmath>
#include <cstdint>

namespace stmkit {

// Counter-based deterministic generator. Every stream is keyed by
// (seed, stream_a, stream_b), so draws are reproducible independent of
// thread scheduling: a worker owning document d simply opens the stream
// (seed, d) and reads it sequentially.
class CounterRng {
public:
    explicit CounterRng(std::uint64_t seed, std::uint64_t stream_a = 0,
                        std::uint64_t stream_b = 0)
        : key_(derive_key(seed, stream_a, stream_b)) {}

    static std::uint64_t mix(std::uint64_t z) {
        z += 0x9E3779B97F4A7C15ULL;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    static std::uint64_t derive_key(std::uint64_t seed, std::uint64_t a,
                                    std::uint64_t b) {
        return mix(mix(mix(seed) ^ a) ^ b);
    }

    std::uint64_t next_u64() {
        return mix(key_ ^ (counter_++ * 0xD1B54A32D192ED03ULL));
    }

    // Uniform in [0, 1) with 53 random bits.
    double next_double() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // Box-Muller; the second variate of each pair is cached.
    double next_normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = 0.0;
        do {
            u1 = next_double();
        } while (u1 <= 0.0);
        const double u2 = next_double();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

    // Marsaglia-Tsang; shape < 1 handled via the boost relation
    // gamma(a) = gamma(a+1) * U^(1/a).
    double next_gamma(double shape) {
        if (shape < 1.0) {
            double u = 0.0;
            do {
                u = next_double();
            } while (u <= 0.0);
            return next_gamma(shape + 1.0) * std::pow(u, 1.0 / shape);
        }
        const double d = shape - 1.0 / 3.0;
        const double c = 1.0 / std::sqrt(9.0 * d);
        for (;;) {
            double x = 0.0;
            double v = 0.0;
            do {
                x = next_normal();
                v = 1.0 + c * x;
            } while (v <= 0.0);
            v = v * v * v;
            const double u = next_double();
            if (u < 1.0 - 0.0331 * x * x * x * x) {
                return d * v;
            }
            if (u > 0.0 && std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) {
                return d * v;
            }
        }
    }

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

} // namespace stmkit
