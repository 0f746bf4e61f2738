#pragma once

// Shift canonicalization: align the phase of the reference harmonic (DFT
// bin 1, whose period equals the signal length) to a target angle by
// applying one linear phase ramp across all harmonics of all channels.
//
//   theta    = (phase(bin 1) - phi) mod 2pi          in [0, 2pi)
//   delta    = (theta - 2pi) T0 / 2pi   if theta > pi
//              theta T0 / 2pi           otherwise    in (-T0/2, T0/2]
//   output   = circular_shift(x, delta)
//
// The map is bijective over target angles and collapses every circular
// shift of a signal to the same representative; its derivative in phi is
// analytic (d delta / d phi = -T0 / 2pi everywhere off the wrap point).

#include <cmath>
#include <complex>
#include <cstddef>
#include <string>
#include <utility>

#include "shiftcanon/errors.hpp"
#include "shiftcanon/signal.hpp"

namespace shiftcanon {

/// Reference harmonic: bin 1 of the L-point DFT (period exactly L).
inline constexpr std::size_t kReferenceBin = 1;

/// How a signal gets moved onto the target angle.
struct CanonPlan {
    double target_angle = 0.0;   // phi, radians in (-pi, pi]
    std::size_t reference_bin = kReferenceBin;
    double omega0 = 0.0;         // 2pi / T0, rad per sample
    double period0 = 0.0;        // T0 = L, samples
    double theta = 0.0;          // wrapped difference, [0, 2pi)
    double delta_phi = 0.0;      // sample shift, (-T0/2, T0/2]
};

/// Eq.-4 style phase difference between the reference harmonic's current
/// angle and the target angle, expressed as a sample shift.
inline CanonPlan phase_difference(double current_angle, double target_angle, double period0) {
    if (!(period0 >= 4.0)) throw Error("phase_difference: period0 must be >= 4 samples");
    CanonPlan plan;
    plan.target_angle = target_angle;
    plan.period0 = period0;
    plan.omega0 = kTwoPi / period0;
    double theta = std::fmod(current_angle - target_angle, kTwoPi);
    if (theta < 0.0) theta += kTwoPi;
    plan.theta = theta;
    plan.delta_phi = (theta > kPi) ? (theta - kTwoPi) * period0 / kTwoPi
                                   : theta * period0 / kTwoPi;
    return plan;
}

namespace detail {

inline double reference_phase(const Spectrum& s, std::size_t ref_channel) {
    if (ref_channel >= s.channels())
        throw Error("canonize: reference channel out of range");
    return phase_at_bin(s, ref_channel, kReferenceBin);
}

}  // namespace detail

/// Canonize from a precomputed spectrum. Fast path for batch loops that
/// transform the same sample at many angles.
inline std::pair<TimeSeries, CanonPlan> canonize_spectrum(const Spectrum& s, double phi,
                                                          std::size_t ref_channel = 0) {
    const CanonPlan plan = phase_difference(detail::reference_phase(s, ref_channel), phi,
                                            static_cast<double>(s.length()));
    Spectrum shifted = s;
    detail::apply_shift_ramp(shifted, plan.delta_phi);
    return {idft_real(shifted), plan};
}

/// Map x so the reference harmonic of ref_channel lands on angle phi. The
/// same sample shift is applied to every channel. Returns the transformed
/// series and the shift that realized it.
inline std::pair<TimeSeries, double> canonize(const TimeSeries& x, double phi,
                                              std::size_t ref_channel = 0) {
    ensure_valid(x, "canonize");
    auto [series, plan] = canonize_spectrum(dft_real(x), phi, ref_channel);
    return {std::move(series), plan.delta_phi};
}

/// Entrywise derivative of the canonized series with respect to phi,
/// from a precomputed spectrum: F^{-1}( i omega (T0/2pi) X e^{-i omega delta} ).
inline TimeSeries canonize_grad_phi_spectrum(const Spectrum& s, double phi,
                                             std::size_t ref_channel = 0) {
    const std::size_t L = s.length();
    const CanonPlan plan = phase_difference(detail::reference_phase(s, ref_channel), phi,
                                            static_cast<double>(L));
    // d(delta)/d(phi) = -T0/2pi on both branches; with T0 = L the per-bin
    // factor d/dphi e^{-i 2pi k delta / L} reduces to (i k) * ramp[k].
    Spectrum grad(s.channels(), L, s.sample_rate());
    const std::size_t nb = s.n_bins();
    for (std::size_t c = 0; c < s.channels(); ++c) {
        grad.at(c, 0) = cplx{0.0, 0.0};
        for (std::size_t k = 1; k < nb; ++k) {
            const double a = -kTwoPi * s.bin_frequency(k) * plan.delta_phi;
            const cplx ramp{std::cos(a), std::sin(a)};
            grad.at(c, k) = s.at(c, k) * ramp * cplx{0.0, static_cast<double>(k)};
        }
        if (s.has_nyquist()) {
            // Nyquist term is X cos(pi delta); d/dphi = X (T0/2) sin(pi delta).
            const std::size_t ny = nb - 1;
            const double factor =
                0.5 * static_cast<double>(L) * std::sin(kPi * plan.delta_phi);
            grad.at(c, ny) = cplx{s.at(c, ny).real() * factor, 0.0};
        }
    }
    return idft_real(grad);
}

/// Entrywise derivative of canonize(x, phi) with respect to phi.
inline TimeSeries canonize_grad_phi(const TimeSeries& x, double phi,
                                    std::size_t ref_channel = 0) {
    ensure_valid(x, "canonize_grad_phi");
    return canonize_grad_phi_spectrum(dft_real(x), phi, ref_channel);
}

/// Recover the shift t' with y = circular_shift(x, t'), from the reference
/// harmonic's phase difference, wrapped into (-L/2, L/2]. When residual_tol
/// is positive the reconstruction is checked and NotAShiftVariant is thrown
/// if ||circular_shift(x, t') - y||_inf exceeds it.
inline double extract_shift(const TimeSeries& x, const TimeSeries& y,
                            std::size_t ref_channel = 0, double residual_tol = -1.0) {
    ensure_valid(x, "extract_shift");
    ensure_valid(y, "extract_shift");
    if (x.channels() != y.channels() || x.length() != y.length())
        throw ShapeMismatch("extract_shift: series shapes differ");
    const std::size_t L = x.length();
    const double phase_x = detail::reference_phase(dft_real(x), ref_channel);
    const double phase_y = detail::reference_phase(dft_real(y), ref_channel);
    double t = (phase_x - phase_y) * static_cast<double>(L) / kTwoPi;
    const double half = static_cast<double>(L) / 2.0;
    while (t > half) t -= static_cast<double>(L);
    while (t <= -half) t += static_cast<double>(L);
    if (residual_tol > 0.0) {
        const TimeSeries restored = circular_shift(x, t);
        double worst = 0.0;
        for (std::size_t i = 0; i < restored.values().size(); ++i)
            worst = std::max(worst, std::abs(restored.values()[i] - y.values()[i]));
        if (worst > residual_tol)
            throw NotAShiftVariant("extract_shift: residual " + std::to_string(worst) +
                                   " exceeds tolerance " + std::to_string(residual_tol));
    }
    return t;
}

}  // namespace shiftcanon
