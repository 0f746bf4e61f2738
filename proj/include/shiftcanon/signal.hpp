#pragma once

// Time-series container, real DFT / inverse DFT and circular-shift
// primitives. Conventions:
//   - bins[k] = sum_n x[n] e^{-i 2pi k n / L}; inverse carries the 1/L.
//   - half spectrum: L/2+1 bins for even L, (L+1)/2 for odd L.
//   - circular_shift(x, t)[n] = x[(n - t) mod L]; fractional t applies the
//     linear phase ramp e^{-i 2pi (k/L) t} per bin. The even-L Nyquist bin
//     is scaled by cos(pi t) so the output stays real.
//   - angles live in (-pi, pi].

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <string>
#include <vector>

#include "shiftcanon/errors.hpp"
#include "shiftcanon/fft.hpp"

namespace shiftcanon {

using cplx = std::complex<double>;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Wrap an angle into (-pi, pi].
inline double wrap_angle(double a) {
    double r = std::fmod(a, kTwoPi);
    if (r > kPi) r -= kTwoPi;
    if (r <= -kPi) r += kTwoPi;
    return r;
}

/// Multi-channel, uniformly sampled real sequence. All channels share the
/// same length; sample_rate is carried as metadata only.
class TimeSeries {
public:
    TimeSeries() = default;
    TimeSeries(std::size_t channels, std::size_t length, double sample_rate = 1.0)
        : channels_(channels), length_(length), sample_rate_(sample_rate),
          values_(channels * length, 0.0) {
        if (channels_ < 1) throw Error("TimeSeries: need at least one channel");
        if (length_ < 4) throw Error("TimeSeries: need at least 4 samples");
        if (!(sample_rate_ > 0.0)) throw Error("TimeSeries: sample_rate must be positive");
    }

    std::size_t channels() const { return channels_; }
    std::size_t length() const { return length_; }
    double sample_rate() const { return sample_rate_; }

    double& at(std::size_t c, std::size_t t) { return values_[c * length_ + t]; }
    double at(std::size_t c, std::size_t t) const { return values_[c * length_ + t]; }

    double* channel(std::size_t c) { return values_.data() + c * length_; }
    const double* channel(std::size_t c) const { return values_.data() + c * length_; }

    std::vector<double>& values() { return values_; }
    const std::vector<double>& values() const { return values_; }

    double max_abs() const {
        double m = 0.0;
        for (double v : values_) m = std::max(m, std::abs(v));
        return m;
    }

    bool all_finite() const {
        return std::all_of(values_.begin(), values_.end(),
                           [](double v) { return std::isfinite(v); });
    }

private:
    std::size_t channels_ = 1;
    std::size_t length_ = 4;
    double sample_rate_ = 1.0;
    std::vector<double> values_;
};

inline void ensure_valid(const TimeSeries& x, const char* who) {
    if (!x.all_finite()) throw Error(std::string(who) + ": non-finite sample value");
}

/// Half-complex spectrum of a real signal: n_bins() coefficients per channel.
class Spectrum {
public:
    Spectrum() = default;
    Spectrum(std::size_t channels, std::size_t length, double sample_rate = 1.0)
        : channels_(channels), length_(length), sample_rate_(sample_rate),
          bins_(channels * n_bins_for(length), cplx{0.0, 0.0}) {}

    static std::size_t n_bins_for(std::size_t length) { return length / 2 + 1; }

    std::size_t channels() const { return channels_; }
    std::size_t length() const { return length_; }
    std::size_t n_bins() const { return n_bins_for(length_); }
    double sample_rate() const { return sample_rate_; }
    bool has_nyquist() const { return length_ % 2 == 0; }

    /// k / L in cycles per sample.
    double bin_frequency(std::size_t k) const {
        return static_cast<double>(k) / static_cast<double>(length_);
    }

    cplx& at(std::size_t c, std::size_t k) { return bins_[c * n_bins() + k]; }
    cplx at(std::size_t c, std::size_t k) const { return bins_[c * n_bins() + k]; }

    /// Scale-aware threshold below which a bin's phase is degenerate.
    /// Set by dft_real to 1e-12 * (L * max|x|); zero for hand-built spectra.
    double eps_mag() const { return eps_mag_; }
    void set_eps_mag(double e) { eps_mag_ = e; }

private:
    std::size_t channels_ = 1;
    std::size_t length_ = 4;
    double sample_rate_ = 1.0;
    double eps_mag_ = 0.0;
    std::vector<cplx> bins_;
};

/// Forward real DFT of every channel.
inline Spectrum dft_real(const TimeSeries& x) {
    ensure_valid(x, "dft_real");
    const std::size_t L = x.length();
    Spectrum s(x.channels(), L, x.sample_rate());
    std::vector<cplx> buf(L);
    for (std::size_t c = 0; c < x.channels(); ++c) {
        for (std::size_t n = 0; n < L; ++n) buf[n] = cplx{x.at(c, n), 0.0};
        fft::forward(buf);
        for (std::size_t k = 0; k < s.n_bins(); ++k) s.at(c, k) = buf[k];
        // real input: DC (and Nyquist) are real up to rounding
        s.at(c, 0) = cplx{s.at(c, 0).real(), 0.0};
        if (s.has_nyquist()) {
            const std::size_t ny = s.n_bins() - 1;
            s.at(c, ny) = cplx{s.at(c, ny).real(), 0.0};
        }
    }
    s.set_eps_mag(1e-12 * static_cast<double>(L) * x.max_abs());
    return s;
}

/// Inverse of dft_real. The Hermitian extension forces a real result; any
/// imaginary part of DC/Nyquist bins is ignored.
inline TimeSeries idft_real(const Spectrum& s) {
    const std::size_t L = s.length();
    TimeSeries x(s.channels(), L, s.sample_rate());
    std::vector<cplx> buf(L);
    for (std::size_t c = 0; c < s.channels(); ++c) {
        buf[0] = cplx{s.at(c, 0).real(), 0.0};
        const std::size_t half = s.n_bins() - 1;
        for (std::size_t k = 1; k <= half; ++k) {
            cplx v = s.at(c, k);
            if (k == half && s.has_nyquist()) v = cplx{v.real(), 0.0};
            buf[k] = v;
            if (L - k != k) buf[L - k] = std::conj(v);
        }
        fft::inverse(buf);
        for (std::size_t n = 0; n < L; ++n) x.at(c, n) = buf[n].real();
    }
    return x;
}

namespace detail {

/// Multiply every bin by e^{-i 2pi (k/L) t}; even-L Nyquist gets cos(pi t).
inline void apply_shift_ramp(Spectrum& s, double t) {
    const std::size_t L = s.length();
    const std::size_t nb = s.n_bins();
    std::vector<cplx> ramp(nb);
    for (std::size_t k = 0; k < nb; ++k) {
        const double a = -kTwoPi * s.bin_frequency(k) * t;
        ramp[k] = {std::cos(a), std::sin(a)};
    }
    if (s.has_nyquist()) ramp[nb - 1] = cplx{std::cos(kPi * t), 0.0};
    for (std::size_t c = 0; c < s.channels(); ++c)
        for (std::size_t k = 0; k < nb; ++k) s.at(c, k) *= ramp[k];
}

}  // namespace detail

/// Rotate by an arbitrary real number of samples: y[n] = x[(n - t) mod L].
/// Integer shifts are exact index rotations; fractional shifts are
/// band-limited (spectral phase ramp).
inline TimeSeries circular_shift(const TimeSeries& x, double t_shift) {
    ensure_valid(x, "circular_shift");
    const std::size_t L = x.length();
    const double rounded = std::nearbyint(t_shift);
    if (rounded == t_shift) {
        double rem = std::fmod(rounded, static_cast<double>(L));
        if (rem < 0.0) rem += static_cast<double>(L);
        const auto r = static_cast<std::size_t>(rem);
        TimeSeries y(x.channels(), L, x.sample_rate());
        for (std::size_t c = 0; c < x.channels(); ++c) {
            for (std::size_t n = 0; n < L; ++n) {
                const std::size_t src = (n + L - r) % L;
                y.at(c, n) = x.at(c, src);
            }
        }
        return y;
    }
    Spectrum s = dft_real(x);
    detail::apply_shift_ramp(s, t_shift);
    return idft_real(s);
}

/// Four-quadrant angle of bins[channel][k], in (-pi, pi].
inline double phase_at_bin(const Spectrum& s, std::size_t channel, std::size_t k) {
    const cplx v = s.at(channel, k);
    const double mag = std::abs(v);
    if (mag <= s.eps_mag() || mag == 0.0)
        throw DegeneratePhase("phase_at_bin: bin " + std::to_string(k) +
                              " magnitude " + std::to_string(mag) + " below threshold");
    const double a = std::atan2(v.imag(), v.real());
    return a == -kPi ? kPi : a;
}

/// |bins[k]| per channel; invariant under circular shifts of x.
inline std::vector<std::vector<double>> magnitude_spectrum(const TimeSeries& x) {
    const Spectrum s = dft_real(x);
    std::vector<std::vector<double>> mags(s.channels(), std::vector<double>(s.n_bins()));
    for (std::size_t c = 0; c < s.channels(); ++c)
        for (std::size_t k = 0; k < s.n_bins(); ++k) mags[c][k] = std::abs(s.at(c, k));
    return mags;
}

/// Per-channel zero mean, unit population standard deviation.
inline TimeSeries znormalize(const TimeSeries& x) {
    ensure_valid(x, "znormalize");
    const std::size_t L = x.length();
    TimeSeries y(x.channels(), L, x.sample_rate());
    for (std::size_t c = 0; c < x.channels(); ++c) {
        const double* v = x.channel(c);
        const auto [mn, mx] = std::minmax_element(v, v + L);
        if (*mn == *mx)
            throw ConstantChannel("znormalize: channel " + std::to_string(c) + " is constant");
        double mean = 0.0;
        for (std::size_t n = 0; n < L; ++n) mean += v[n];
        mean /= static_cast<double>(L);
        double var = 0.0;
        for (std::size_t n = 0; n < L; ++n) var += (v[n] - mean) * (v[n] - mean);
        var /= static_cast<double>(L);
        if (var == 0.0)
            throw ConstantChannel("znormalize: channel " + std::to_string(c) + " is constant");
        const double inv_std = 1.0 / std::sqrt(var);
        for (std::size_t n = 0; n < L; ++n) y.at(c, n) = (v[n] - mean) * inv_std;
    }
    return y;
}

}  // namespace shiftcanon
