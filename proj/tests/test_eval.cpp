#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "shiftcanon/canon.hpp"
#include "shiftcanon/eval.hpp"

using namespace shiftcanon;

namespace {

Dataset single_sample_dataset(const TimeSeries& x) {
    Dataset d;
    d.push_back({"s0", 0, x});
    return d;
}

}  // namespace

TEST_CASE("shift_consistency", "[eval][consistency]") {
    std::mt19937_64 rng(5);

    SECTION("constant predictor scores exactly 1") {
        TimeSeries x(1, 40);
        for (std::size_t n = 0; n < 40; ++n) x.at(0, n) = std::sin(kTwoPi * n / 40.0);
        const Predictor constant = [](const TimeSeries&) { return std::size_t{7}; };
        CHECK(shift_consistency(constant, single_sample_dataset(x), 100, rng) == 1.0);
    }
    SECTION("exact enumeration on the two-sample toy case gives 0.5") {
        // x = [1,-1,1,-1,...] at L=4 keeps the TimeSeries length floor while
        // preserving the logic of the L=2 case: sign(x[0]) flips with parity.
        TimeSeries x(1, 4);
        x.at(0, 0) = 1.0;
        x.at(0, 1) = -1.0;
        x.at(0, 2) = 1.0;
        x.at(0, 3) = -1.0;
        const Predictor sign_first = [](const TimeSeries& s) {
            return static_cast<std::size_t>(s.at(0, 0) > 0.0 ? 1 : 0);
        };
        // shifts 1..4: outputs alternate 0,1,0,1 -> agreement on 8 of 16 pairs
        CHECK(shift_consistency(sign_first, single_sample_dataset(x), 1, rng) == 0.5);
    }
    SECTION("canonize-then-classify is exactly consistent for any classifier") {
        std::normal_distribution<double> gauss(0.0, 1.0);
        TimeSeries x(1, 20);
        for (double& v : x.values()) v = gauss(rng);
        const Predictor canonized = [](const TimeSeries& s) {
            const auto [c, d] = canonize(s, 0.4);
            // arbitrary quantized functional of the representative
            return static_cast<std::size_t>(std::llround(c.at(0, 3) * 10.0) % 7 + 7) % 7;
        };
        CHECK(shift_consistency(canonized, single_sample_dataset(x), 1, rng) == 1.0);
    }
    SECTION("Monte-Carlo path is seeded and reproducible") {
        std::normal_distribution<double> gauss(0.0, 1.0);
        TimeSeries x(1, 64);
        for (double& v : x.values()) v = gauss(rng);
        const Predictor parity = [](const TimeSeries& s) {
            return static_cast<std::size_t>(s.at(0, 0) > 0.0);
        };
        std::mt19937_64 a(42), b(42);
        const double ra = shift_consistency(parity, single_sample_dataset(x), 500, a);
        const double rb = shift_consistency(parity, single_sample_dataset(x), 500, b);
        CHECK(ra == rb);
        CHECK(ra >= 0.0);
        CHECK(ra <= 1.0);
    }
    SECTION("empty dataset throws") {
        const Predictor constant = [](const TimeSeries&) { return std::size_t{0}; };
        std::mt19937_64 r(1);
        CHECK_THROWS_AS(shift_consistency(constant, {}, 10, r), EmptyDataset);
    }
    SECTION("invariant under class relabeling") {
        std::normal_distribution<double> gauss(0.0, 1.0);
        TimeSeries x(1, 24);
        for (double& v : x.values()) v = gauss(rng);
        const Predictor p0 = [](const TimeSeries& s) {
            return static_cast<std::size_t>(s.at(0, 0) > 0.0);
        };
        const Predictor p1 = [](const TimeSeries& s) {
            return static_cast<std::size_t>(s.at(0, 0) > 0.0 ? 5 : 9);
        };
        std::mt19937_64 a(3), b(3);
        CHECK(shift_consistency(p0, single_sample_dataset(x), 1, a) ==
              shift_consistency(p1, single_sample_dataset(x), 1, b));
    }
}

TEST_CASE("classification_metrics", "[eval][metrics]") {
    SECTION("all correct") {
        const Metrics m = classification_metrics({0, 1, 2, 1}, {0, 1, 2, 1});
        CHECK(m.accuracy == 1.0);
        CHECK(m.macro_f1 == 1.0);
    }
    SECTION("hand confusion-matrix oracle") {
        const Metrics m = classification_metrics({0, 0, 1, 1}, {0, 1, 0, 1});
        CHECK(m.accuracy == 0.5);
        CHECK(m.macro_f1 == Catch::Approx(0.5).margin(1e-12));
    }
    SECTION("single class, all predicted") {
        const Metrics m = classification_metrics({0, 0, 0}, {0, 0, 0});
        CHECK(m.accuracy == 1.0);
        CHECK(m.macro_f1 == 1.0);
    }
    SECTION("empty class contributes zero F1") {
        // class 2 never appears in labels or predictions beyond label space of preds
        const Metrics m = classification_metrics({2, 2}, {0, 0});
        CHECK(m.accuracy == 0.0);
        CHECK(m.macro_f1 == 0.0);
    }
    SECTION("length mismatch throws") {
        CHECK_THROWS_AS(classification_metrics({0, 1}, {0}), LengthMismatch);
    }
}

TEST_CASE("pairwise_distance_report", "[eval][distance]") {
    std::mt19937_64 rng(8);
    std::normal_distribution<double> gauss(0.0, 1.0);

    SECTION("identical singleton sets have distance 0") {
        TimeSeries x(1, 16);
        for (double& v : x.values()) v = gauss(rng);
        const DistanceSummary s = pairwise_distance_report({x}, {x});
        CHECK(s.mean == 0.0);
        CHECK(s.n_pairs == 1);
    }
    SECTION("bin-1 cosine shifted by L/2 is at distance 2 ||x||") {
        const std::size_t L = 32;
        TimeSeries x(1, L);
        for (std::size_t n = 0; n < L; ++n) x.at(0, n) = std::cos(kTwoPi * n / L);
        const TimeSeries y = circular_shift(x, static_cast<double>(L) / 2.0);
        double norm = 0.0;
        for (double v : x.values()) norm += v * v;
        norm = std::sqrt(norm);
        const DistanceSummary s = pairwise_distance_report({x, y}, {x, y});
        CHECK(s.max == Catch::Approx(2.0 * norm).margin(1e-9));
        CHECK(s.min == 0.0);
    }
    SECTION("canonizing shifted copies collapses distances below 1e-6") {
        TimeSeries x(1, 48);
        for (double& v : x.values()) v = gauss(rng);
        std::vector<TimeSeries> shifted;
        for (double t : {0.0, 5.0, 11.0, 23.0, 47.0}) shifted.push_back(circular_shift(x, t));
        const SeriesTransform canon0 = [](const TimeSeries& s) {
            return canonize(s, 0.0).first;
        };
        const DistanceSummary s = pairwise_distance_report(shifted, shifted, canon0);
        CHECK(s.max <= 1e-6);
    }
    SECTION("ragged sets throw") {
        TimeSeries a(1, 16), b(1, 20);
        for (double& v : a.values()) v = gauss(rng);
        for (double& v : b.values()) v = gauss(rng);
        CHECK_THROWS_AS(pairwise_distance_report({a, b}, {a}), ShapeMismatch);
    }
}
