#pragma once

// Complex FFT core: iterative radix-2 for power-of-two sizes, Bluestein's
// chirp-z algorithm for everything else. Plans (twiddles, chirp spectra)
// are cached per size in thread-local storage so repeated transforms of
// the same length are cheap.

#include <cmath>
#include <complex>
#include <cstdint>
#include <map>
#include <memory>
#include <numbers>
#include <vector>

namespace shiftcanon::fft {

using cplx = std::complex<double>;

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

constexpr bool is_pow2(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

inline std::size_t next_pow2(std::size_t n) {
    std::size_t p = 1;
    while (p < n) p <<= 1;
    return p;
}

namespace detail {

// Twiddle table for a power-of-two transform of size n: w[k] = e^{-i 2pi k/n},
// k in [0, n/2).
struct Pow2Plan {
    std::size_t n;
    std::vector<cplx> twiddle;

    explicit Pow2Plan(std::size_t size) : n(size), twiddle(size / 2) {
        for (std::size_t k = 0; k < n / 2; ++k) {
            const double a = -kTwoPi * static_cast<double>(k) / static_cast<double>(n);
            twiddle[k] = {std::cos(a), std::sin(a)};
        }
    }
};

inline const Pow2Plan& pow2_plan(std::size_t n) {
    thread_local std::map<std::size_t, std::unique_ptr<Pow2Plan>> cache;
    auto& slot = cache[n];
    if (!slot) slot = std::make_unique<Pow2Plan>(n);
    return *slot;
}

// In-place decimation-in-time radix-2. inverse=true computes the unscaled
// inverse (conjugate transform); callers divide by n themselves.
inline void fft_pow2(std::vector<cplx>& a, bool inverse) {
    const std::size_t n = a.size();
    if (n < 2) return;
    const Pow2Plan& plan = pow2_plan(n);

    // bit-reversal permutation
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }

    for (std::size_t len = 2; len <= n; len <<= 1) {
        const std::size_t step = n / len;
        for (std::size_t i = 0; i < n; i += len) {
            for (std::size_t k = 0; k < len / 2; ++k) {
                cplx w = plan.twiddle[k * step];
                if (inverse) w = std::conj(w);
                const cplx u = a[i + k];
                const cplx v = a[i + k + len / 2] * w;
                a[i + k] = u + v;
                a[i + k + len / 2] = u - v;
            }
        }
    }
}

// Bluestein plan for arbitrary n: chirp c[k] = e^{-i pi k^2/n} and the
// padded forward transform of its conjugate.
struct BluesteinPlan {
    std::size_t n;
    std::size_t m;  // pow2 convolution size >= 2n-1
    std::vector<cplx> chirp;
    std::vector<cplx> chirp_spec;

    explicit BluesteinPlan(std::size_t size) : n(size), m(next_pow2(2 * size - 1)), chirp(size) {
        for (std::size_t k = 0; k < n; ++k) {
            // k^2 mod 2n keeps the sin/cos argument small and exact
            const std::uint64_t q = (static_cast<std::uint64_t>(k) * k) % (2 * n);
            const double a = -std::numbers::pi * static_cast<double>(q) / static_cast<double>(n);
            chirp[k] = {std::cos(a), std::sin(a)};
        }
        std::vector<cplx> b(m, cplx{0.0, 0.0});
        b[0] = std::conj(chirp[0]);
        for (std::size_t k = 1; k < n; ++k) {
            b[k] = std::conj(chirp[k]);
            b[m - k] = std::conj(chirp[k]);
        }
        fft_pow2(b, false);
        chirp_spec = std::move(b);
    }
};

inline const BluesteinPlan& bluestein_plan(std::size_t n) {
    thread_local std::map<std::size_t, std::unique_ptr<BluesteinPlan>> cache;
    auto& slot = cache[n];
    if (!slot) slot = std::make_unique<BluesteinPlan>(n);
    return *slot;
}

inline void fft_bluestein(std::vector<cplx>& a, bool inverse) {
    const std::size_t n = a.size();
    const BluesteinPlan& plan = bluestein_plan(n);

    std::vector<cplx> x(plan.m, cplx{0.0, 0.0});
    for (std::size_t k = 0; k < n; ++k) {
        const cplx c = inverse ? std::conj(plan.chirp[k]) : plan.chirp[k];
        x[k] = a[k] * c;
    }
    fft_pow2(x, false);
    if (inverse) {
        // convolution kernel for the conjugate transform is conj(chirp_spec)
        // of the mirrored chirp; reuse the forward spectrum via conjugation.
        for (std::size_t k = 0; k < plan.m; ++k) x[k] *= std::conj(plan.chirp_spec[k]);
    } else {
        for (std::size_t k = 0; k < plan.m; ++k) x[k] *= plan.chirp_spec[k];
    }
    fft_pow2(x, true);
    const double scale = 1.0 / static_cast<double>(plan.m);
    for (std::size_t k = 0; k < n; ++k) {
        const cplx c = inverse ? std::conj(plan.chirp[k]) : plan.chirp[k];
        a[k] = x[k] * c * scale;
    }
}

}  // namespace detail

/// Forward DFT, any size: a[k] <- sum_n a[n] e^{-i 2pi kn/N}. No scaling.
inline void forward(std::vector<cplx>& a) {
    if (a.size() < 2) return;
    if (is_pow2(a.size())) {
        detail::fft_pow2(a, false);
    } else {
        detail::fft_bluestein(a, false);
    }
}

/// Inverse DFT including the 1/N scale.
inline void inverse(std::vector<cplx>& a) {
    if (a.size() < 2) return;
    if (is_pow2(a.size())) {
        detail::fft_pow2(a, true);
    } else {
        detail::fft_bluestein(a, true);
    }
    const double scale = 1.0 / static_cast<double>(a.size());
    for (cplx& v : a) v *= scale;
}

}  // namespace shiftcanon::fft
