#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <vector>

#include "shiftcanon/canon.hpp"
#include "shiftcanon/signal.hpp"

using namespace shiftcanon;

namespace {

TimeSeries random_series(std::mt19937_64& rng, std::size_t channels, std::size_t length) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    TimeSeries x(channels, length);
    for (double& v : x.values()) v = gauss(rng);
    return x;
}

double max_abs_diff(const TimeSeries& a, const TimeSeries& b) {
    double worst = 0.0;
    for (std::size_t i = 0; i < a.values().size(); ++i)
        worst = std::max(worst, std::abs(a.values()[i] - b.values()[i]));
    return worst;
}

}  // namespace

TEST_CASE("phase_difference follows the two-branch wrap", "[canon][plan]") {
    SECTION("identity") {
        const CanonPlan p = phase_difference(0.0, 0.0, 8.0);
        CHECK(p.theta == 0.0);
        CHECK(p.delta_phi == 0.0);
    }
    SECTION("lower branch") {
        const CanonPlan p = phase_difference(0.0, -kPi / 2, 8.0);
        CHECK(p.theta == Catch::Approx(kPi / 2).margin(1e-15));
        CHECK(p.delta_phi == Catch::Approx(2.0).margin(1e-12));
    }
    SECTION("upper branch") {
        const CanonPlan p = phase_difference(0.0, kPi / 2, 8.0);
        CHECK(p.theta == Catch::Approx(3 * kPi / 2).margin(1e-15));
        CHECK(p.delta_phi == Catch::Approx(-2.0).margin(1e-12));
    }
    SECTION("invariants hold over random inputs") {
        std::mt19937_64 rng(17);
        std::uniform_real_distribution<double> angle(-10.0, 10.0);
        for (int i = 0; i < 500; ++i) {
            const double t0 = 8.0 + (i % 300);
            const CanonPlan p = phase_difference(angle(rng), angle(rng), t0);
            CHECK(p.theta >= 0.0);
            CHECK(p.theta < kTwoPi);
            CHECK(p.delta_phi > -t0 / 2);
            CHECK(p.delta_phi <= t0 / 2);
        }
    }
    SECTION("slope away from the wrap point is -T0/2pi") {
        const double t0 = 32.0;
        const double h = 1e-6;
        const CanonPlan a = phase_difference(0.3, 1.0, t0);
        const CanonPlan b = phase_difference(0.3, 1.0 + h, t0);
        CHECK((b.delta_phi - a.delta_phi) / h == Catch::Approx(-t0 / kTwoPi).epsilon(1e-6));
    }
}

TEST_CASE("canonize aligns the reference phase", "[canon]") {
    SECTION("target equal to current phase is the identity") {
        std::mt19937_64 rng(2);
        const TimeSeries x = random_series(rng, 2, 32);
        const double current = phase_at_bin(dft_real(x), 0, kReferenceBin);
        const auto [out, delta] = canonize(x, current);
        CHECK(std::abs(delta) < 1e-9);
        CHECK(max_abs_diff(out, x) < 1e-10);
    }
    SECTION("cosine to -pi/2 becomes the sine, delta = 2") {
        const std::size_t L = 8;
        TimeSeries x(1, L);
        for (std::size_t n = 0; n < L; ++n) x.at(0, n) = std::cos(kTwoPi * n / L);
        const auto [out, delta] = canonize(x, -kPi / 2);
        CHECK(delta == Catch::Approx(2.0).margin(1e-9));
        for (std::size_t n = 0; n < L; ++n)
            CHECK(out.at(0, n) == Catch::Approx(std::sin(kTwoPi * n / L)).margin(1e-9));
    }
    SECTION("achieved angle matches the request") {
        std::mt19937_64 rng(4);
        std::uniform_real_distribution<double> angle(-kPi + 1e-6, kPi);
        for (int i = 0; i < 50; ++i) {
            const TimeSeries x = random_series(rng, 1, 30 + i);
            const double phi = angle(rng);
            const auto [out, delta] = canonize(x, phi);
            const double got = phase_at_bin(dft_real(out), 0, kReferenceBin);
            CHECK(std::abs(wrap_angle(got - phi)) < 1e-8);
        }
    }
    SECTION("degenerate reference bin throws") {
        TimeSeries x(1, 8);
        for (std::size_t n = 0; n < 8; ++n) x.at(0, n) = 1.0;  // constant: no bin-1 energy
        CHECK_THROWS_AS(canonize(x, 0.3), DegeneratePhase);
    }
}

TEST_CASE("Theorem 2: shift variants collapse to the same representative", "[canon][property]") {
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> angle(-kPi + 1e-9, kPi);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t L = 16 + static_cast<std::size_t>(trial % 5) * 57;
        const std::size_t ch = 1 + trial % 3;
        const TimeSeries x = random_series(rng, ch, L);
        const auto t_shift = static_cast<double>(rng() % L);
        const double phi = angle(rng);
        const auto [a, da] = canonize(x, phi);
        const auto [b, db] = canonize(circular_shift(x, t_shift), phi);
        CHECK(max_abs_diff(a, b) <= 1e-9);
    }
}

TEST_CASE("Theorem 1 injectivity: distinct angles give distinct outputs", "[canon][property]") {
    std::mt19937_64 rng(41);
    std::uniform_real_distribution<double> angle(-kPi + 1e-6, kPi);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t L = 24 + (trial % 7) * 11;
        TimeSeries x = random_series(rng, 1, L);
        // ensure the reference bin carries >= 1% of total energy
        for (std::size_t n = 0; n < L; ++n)
            x.at(0, n) += 2.0 * std::cos(kTwoPi * static_cast<double>(n) / static_cast<double>(L));
        double a = angle(rng), b = angle(rng);
        if (std::abs(a - b) <= 1e-6) continue;
        const auto [out_a, da] = canonize(x, a);
        const auto [out_b, db] = canonize(x, b);
        CHECK(max_abs_diff(out_a, out_b) > 1e-9 * x.max_abs());
    }
}

TEST_CASE("Theorem 1 surjectivity: every shift is reachable in closed form", "[canon][property]") {
    std::mt19937_64 rng(43);
    for (std::size_t L : {16ul, 31ul}) {
        const TimeSeries x = random_series(rng, 1, L);
        const double base = phase_at_bin(dft_real(x), 0, kReferenceBin);
        for (double t = 0.0; t < static_cast<double>(L); t += 0.5) {
            const double phi = wrap_angle(base - kTwoPi * t / static_cast<double>(L));
            const auto [out, delta] = canonize(x, phi);
            const TimeSeries want = circular_shift(x, t);
            CHECK(max_abs_diff(out, want) < 1e-8);
        }
    }
}

TEST_CASE("Proposition 1: shift-induced phase addition is Abelian", "[canon][property]") {
    std::mt19937_64 rng(47);
    std::uniform_real_distribution<double> angle(-kPi + 1e-6, kPi);
    const std::size_t L = 40;
    for (int trial = 0; trial < 50; ++trial) {
        TimeSeries x = random_series(rng, 1, L);
        for (std::size_t n = 0; n < L; ++n)
            x.at(0, n) += 3.0 * std::cos(kTwoPi * static_cast<double>(n) / static_cast<double>(L));
        const double phi_a = angle(rng);
        const auto s = static_cast<double>(rng() % L);
        const auto [canon_x, d] = canonize(x, phi_a);
        const double omega0 = kTwoPi / static_cast<double>(L);
        const double got = phase_at_bin(dft_real(circular_shift(canon_x, s)), 0, kReferenceBin);
        const double want = wrap_angle(phi_a - omega0 * s);
        CHECK(std::abs(wrap_angle(got - want)) < 1e-8);
    }
}

TEST_CASE("canonize preserves the magnitude spectrum", "[canon][property]") {
    std::mt19937_64 rng(53);
    std::uniform_real_distribution<double> angle(-kPi + 1e-6, kPi);
    for (std::size_t L : {24ul, 33ul}) {
        const TimeSeries x = random_series(rng, 2, L);
        const auto before = magnitude_spectrum(x);
        const auto [out, delta] = canonize(x, angle(rng));
        const auto after = magnitude_spectrum(out);
        const std::size_t last = before[0].size() - 1;
        for (std::size_t c = 0; c < 2; ++c) {
            for (std::size_t k = 0; k < before[c].size(); ++k) {
                // the even-L Nyquist bin under a fractional shift is scaled by
                // cos(pi t) to keep the output real; all other bins are exact
                if (L % 2 == 0 && k == last) continue;
                CHECK(std::abs(before[c][k] - after[c][k]) <= 1e-9);
            }
        }
    }
}

TEST_CASE("canonize is idempotent", "[canon][property]") {
    std::mt19937_64 rng(59);
    std::uniform_real_distribution<double> angle(-kPi + 1e-6, kPi);
    for (int trial = 0; trial < 30; ++trial) {
        const TimeSeries x = random_series(rng, 1, 25 + trial);
        const double phi = angle(rng);
        const auto [once, d1] = canonize(x, phi);
        const auto [twice, d2] = canonize(once, phi);
        CHECK(max_abs_diff(once, twice) < 1e-9);
    }
}

TEST_CASE("canonize_grad_phi matches central finite differences", "[canon][grad]") {
    std::mt19937_64 rng(61);
    std::uniform_real_distribution<double> angle(-kPi + 1e-3, kPi - 1e-3);
    const double h = 1e-5;
    int checked = 0;
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t L = 20 + (trial % 6) * 31;
        const std::size_t ch = 1 + trial % 2;
        const TimeSeries x = random_series(rng, ch, L);
        const double phi = angle(rng);
        const CanonPlan plan =
            phase_difference(phase_at_bin(dft_real(x), 0, kReferenceBin), phi,
                             static_cast<double>(L));
        if (plan.theta < 1e-3 || plan.theta > kTwoPi - 1e-3) continue;  // stay off the wrap
        const TimeSeries grad = canonize_grad_phi(x, phi);
        const auto [plus, dp] = canonize(x, phi + h);
        const auto [minus, dm] = canonize(x, phi - h);
        std::vector<double> fd(grad.values().size());
        double fd_max = 0.0;
        for (std::size_t i = 0; i < fd.size(); ++i) {
            fd[i] = (plus.values()[i] - minus.values()[i]) / (2 * h);
            fd_max = std::max(fd_max, std::abs(fd[i]));
        }
        for (std::size_t i = 0; i < fd.size(); ++i) {
            // dominant entries: small ones are dominated by the O(h^2 k^2)
            // finite-difference truncation of the higher harmonics
            if (std::abs(fd[i]) < 0.05 * fd_max) continue;
            const double rel = std::abs(grad.values()[i] - fd[i]) / (std::abs(fd[i]) + 1e-12);
            CHECK(rel <= 1e-5);
        }
        ++checked;
    }
    CHECK(checked >= 80);
}

TEST_CASE("canonize_grad_phi special cases", "[canon][grad]") {
    SECTION("DC component has zero derivative") {
        const std::size_t L = 16;
        TimeSeries x(1, L);
        for (std::size_t n = 0; n < L; ++n)
            x.at(0, n) = 5.0 + std::cos(kTwoPi * static_cast<double>(n) / static_cast<double>(L));
        const TimeSeries grad = canonize_grad_phi(x, 0.7);
        double mean = 0.0;
        for (std::size_t n = 0; n < L; ++n) mean += grad.at(0, n);
        CHECK(std::abs(mean / static_cast<double>(L)) < 1e-10);
    }
    SECTION("2pi periodicity in phi") {
        std::mt19937_64 rng(67);
        const TimeSeries x = random_series(rng, 1, 24);
        const TimeSeries a = canonize_grad_phi(x, 0.4);
        const TimeSeries b = canonize_grad_phi(x, 0.4 + kTwoPi);
        CHECK(max_abs_diff(a, b) < 1e-9);
    }
}

TEST_CASE("extract_shift recovers constructed shifts", "[canon][extract]") {
    std::mt19937_64 rng(71);
    SECTION("integer shift") {
        const TimeSeries x = random_series(rng, 1, 16);
        const TimeSeries y = circular_shift(x, 3.0);
        CHECK(extract_shift(x, y) == Catch::Approx(3.0).margin(1e-9));
    }
    SECTION("zero shift") {
        const TimeSeries x = random_series(rng, 2, 20);
        CHECK(extract_shift(x, x) == Catch::Approx(0.0).margin(1e-12));
    }
    SECTION("fractional shift") {
        const TimeSeries x = random_series(rng, 1, 16);
        const TimeSeries y = circular_shift(x, 1.5);
        CHECK(extract_shift(x, y) == Catch::Approx(1.5).margin(1e-6));
    }
    SECTION("wraps into (-L/2, L/2]") {
        const TimeSeries x = random_series(rng, 1, 16);
        const TimeSeries y = circular_shift(x, 13.0);  // = -3 mod 16
        CHECK(extract_shift(x, y) == Catch::Approx(-3.0).margin(1e-9));
    }
    SECTION("residual check rejects non-variants") {
        const TimeSeries x = random_series(rng, 1, 16);
        TimeSeries y = random_series(rng, 1, 16);
        CHECK_THROWS_AS(extract_shift(x, y, 0, 1e-6), NotAShiftVariant);
    }
    SECTION("residual check accepts exact variants") {
        const TimeSeries x = random_series(rng, 1, 32);
        const TimeSeries y = circular_shift(x, 9.0);
        CHECK_NOTHROW(extract_shift(x, y, 0, 1e-6));
    }
}
