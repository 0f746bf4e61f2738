#pragma once

// Shift-consistency measurement, classification metrics and pairwise
// distance summaries.

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "shiftcanon/data.hpp"
#include "shiftcanon/errors.hpp"
#include "shiftcanon/signal.hpp"

namespace shiftcanon {

using Predictor = std::function<std::size_t(const TimeSeries&)>;
using SeriesTransform = std::function<TimeSeries(const TimeSeries&)>;

/// Probability that two random circular shifts of the same sample receive
/// the same predicted class; shifts are integers from [1, L]. For L <= 32
/// the expectation is enumerated exactly over all shift pairs, otherwise it
/// is a seeded Monte-Carlo estimate over n_pairs triples.
inline double shift_consistency(const Predictor& predict, const Dataset& data,
                                std::size_t n_pairs, std::mt19937_64& rng) {
    if (data.empty()) throw EmptyDataset("shift_consistency: empty dataset");
    if (n_pairs < 1) throw Error("shift_consistency: n_pairs must be >= 1");

    const std::size_t L = data.front().series.length();
    if (L <= 32) {
        std::size_t agree = 0, total = 0;
        for (const SampleRecord& rec : data) {
            const std::size_t len = rec.series.length();
            std::vector<std::size_t> outputs(len);
            for (std::size_t t = 1; t <= len; ++t)
                outputs[t - 1] = predict(circular_shift(rec.series, static_cast<double>(t)));
            for (std::size_t a = 0; a < len; ++a)
                for (std::size_t b = 0; b < len; ++b) {
                    agree += outputs[a] == outputs[b] ? 1 : 0;
                    ++total;
                }
        }
        return static_cast<double>(agree) / static_cast<double>(total);
    }

    std::uniform_int_distribution<std::size_t> pick(0, data.size() - 1);
    std::size_t agree = 0;
    for (std::size_t i = 0; i < n_pairs; ++i) {
        const SampleRecord& rec = data[pick(rng)];
        std::uniform_int_distribution<std::size_t> shift(1, rec.series.length());
        const auto t1 = static_cast<double>(shift(rng));
        const auto t2 = static_cast<double>(shift(rng));
        const std::size_t c1 = predict(circular_shift(rec.series, t1));
        const std::size_t c2 = predict(circular_shift(rec.series, t2));
        agree += c1 == c2 ? 1 : 0;
    }
    return static_cast<double>(agree) / static_cast<double>(n_pairs);
}

struct Metrics {
    double accuracy = 0.0;
    double macro_f1 = 0.0;
    std::vector<std::size_t> per_class_counts;  // true label histogram
};

/// Accuracy and macro F1; empty classes contribute an F1 of 0.
inline Metrics classification_metrics(const std::vector<std::size_t>& predictions,
                                      const std::vector<std::size_t>& labels) {
    if (predictions.size() != labels.size())
        throw LengthMismatch("classification_metrics: size mismatch");
    if (predictions.empty()) throw EmptyDataset("classification_metrics: no samples");
    std::size_t k = 0;
    for (std::size_t v : predictions) k = std::max(k, v + 1);
    for (std::size_t v : labels) k = std::max(k, v + 1);

    std::vector<std::size_t> tp(k, 0), fp(k, 0), fn(k, 0);
    Metrics m;
    m.per_class_counts.assign(k, 0);
    std::size_t correct = 0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        m.per_class_counts[labels[i]] += 1;
        if (predictions[i] == labels[i]) {
            ++correct;
            ++tp[labels[i]];
        } else {
            ++fp[predictions[i]];
            ++fn[labels[i]];
        }
    }
    m.accuracy = static_cast<double>(correct) / static_cast<double>(labels.size());
    double f1_sum = 0.0;
    for (std::size_t c = 0; c < k; ++c) {
        const double denom = static_cast<double>(2 * tp[c] + fp[c] + fn[c]);
        f1_sum += denom > 0.0 ? 2.0 * static_cast<double>(tp[c]) / denom : 0.0;
    }
    m.macro_f1 = f1_sum / static_cast<double>(k);
    return m;
}

struct DistanceSummary {
    double mean = 0.0;
    double min = 0.0;
    double max = 0.0;
    std::size_t n_pairs = 0;
};

inline double euclidean_distance(const TimeSeries& a, const TimeSeries& b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.values().size(); ++i) {
        const double d = a.values()[i] - b.values()[i];
        acc += d * d;
    }
    return std::sqrt(acc);
}

/// Euclidean distances over all |A| x |B| cross pairs, optionally after
/// applying a transform to every series first.
inline DistanceSummary pairwise_distance_report(const std::vector<TimeSeries>& set_a,
                                                const std::vector<TimeSeries>& set_b,
                                                const SeriesTransform& transform = nullptr) {
    if (set_a.empty() || set_b.empty())
        throw EmptyDataset("pairwise_distance_report: empty set");
    auto prepare = [&](const std::vector<TimeSeries>& in) {
        std::vector<TimeSeries> out;
        out.reserve(in.size());
        for (const TimeSeries& x : in) out.push_back(transform ? transform(x) : x);
        return out;
    };
    const std::vector<TimeSeries> a = prepare(set_a);
    const std::vector<TimeSeries> b = prepare(set_b);
    for (const TimeSeries& x : a)
        if (x.channels() != a[0].channels() || x.length() != a[0].length())
            throw ShapeMismatch("pairwise_distance_report: ragged set A");
    for (const TimeSeries& x : b)
        if (x.channels() != a[0].channels() || x.length() != a[0].length())
            throw ShapeMismatch("pairwise_distance_report: set B shape differs");

    DistanceSummary s;
    s.min = std::numeric_limits<double>::infinity();
    double sum = 0.0;
    for (const TimeSeries& x : a) {
        for (const TimeSeries& y : b) {
            const double d = euclidean_distance(x, y);
            sum += d;
            s.min = std::min(s.min, d);
            s.max = std::max(s.max, d);
            ++s.n_pairs;
        }
    }
    s.mean = sum / static_cast<double>(s.n_pairs);
    return s;
}

struct DistancePanel {
    DistanceSummary intra_before, intra_after;
    DistanceSummary inter_before, inter_after;
};

struct EvalReport {
    double shift_consistency = 0.0;
    double accuracy = 0.0;
    double macro_f1 = 0.0;
    std::size_t n_pairs = 0;
    std::vector<std::size_t> per_class_counts;
    std::optional<DistancePanel> distances;
};

inline nlohmann::json to_json(const DistanceSummary& s) {
    return {{"mean", s.mean}, {"min", s.min}, {"max", s.max}, {"n_pairs", s.n_pairs}};
}

inline nlohmann::json to_json(const EvalReport& r) {
    nlohmann::json j{{"shift_consistency", r.shift_consistency},
                     {"accuracy", r.accuracy},
                     {"macro_f1", r.macro_f1},
                     {"n_pairs", r.n_pairs},
                     {"per_class_counts", r.per_class_counts}};
    if (r.distances) {
        j["distances"] = {{"intra_before", to_json(r.distances->intra_before)},
                          {"intra_after", to_json(r.distances->intra_after)},
                          {"inter_before", to_json(r.distances->inter_before)},
                          {"inter_after", to_json(r.distances->inter_after)}};
    }
    return j;
}

}  // namespace shiftcanon
