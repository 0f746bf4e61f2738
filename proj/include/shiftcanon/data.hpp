#pragma once

// Synthetic two-class sinusoid task, dataset persistence (one JSON record
// per line) and split management.
//
// Record schema:
//   {"id": "...", "label": 0, "sample_rate": 300.0, "channels": [[...]]}

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "shiftcanon/errors.hpp"
#include "shiftcanon/signal.hpp"

namespace shiftcanon {

struct SampleRecord {
    std::string id;
    std::size_t label = 0;
    TimeSeries series;
};

using Dataset = std::vector<SampleRecord>;

inline std::size_t class_count(const Dataset& data) {
    std::size_t k = 0;
    for (const SampleRecord& r : data) k = std::max(k, r.label + 1);
    return k;
}

/// Parameters of the two-class task: class A mixes f_shared with f_class_a,
/// class B mixes f_shared with f_class_b, phases drawn from [0, phase_max),
/// plus white Gaussian noise.
struct SyntheticSpec {
    double fs = 300.0;           // Hz
    double duration = 1.0;       // seconds; L = fs * duration
    double f_shared = 5.0;       // Hz, present in both classes
    double f_class_a = 24.0;     // Hz
    double f_class_b = 25.0;     // Hz
    double noise_variance = 0.1;
    double phase_max = kPi;      // phases uniform in [0, phase_max)
    std::size_t per_class = 1000;
    std::uint64_t seed = 0;

    std::size_t length() const {
        return static_cast<std::size_t>(std::llround(fs * duration));
    }
    void validate() const {
        if (!(fs > 0.0) || !(duration > 0.0)) throw Error("SyntheticSpec: fs and duration must be positive");
        if (noise_variance < 0.0) throw Error("SyntheticSpec: negative noise variance");
        if (f_shared >= fs / 2 || f_class_a >= fs / 2 || f_class_b >= fs / 2)
            throw Error("SyntheticSpec: frequencies must lie below Nyquist");
        if (per_class < 1) throw Error("SyntheticSpec: need at least one sample per class");
        if (length() < 4) throw Error("SyntheticSpec: signal too short");
    }
};

/// Generate the balanced two-class dataset. Deterministic for a fixed seed;
/// any sample whose reference-bin magnitude would be degenerate is redrawn.
inline Dataset generate_sinusoid_task(const SyntheticSpec& spec, std::size_t* redraws = nullptr) {
    spec.validate();
    const std::size_t L = spec.length();
    std::mt19937_64 rng(spec.seed);
    std::uniform_real_distribution<double> phase(0.0, spec.phase_max);
    std::normal_distribution<double> noise(0.0, std::sqrt(spec.noise_variance));
    if (redraws) *redraws = 0;

    Dataset data;
    data.reserve(2 * spec.per_class);
    for (std::size_t cls = 0; cls < 2; ++cls) {
        const double f2 = cls == 0 ? spec.f_class_a : spec.f_class_b;
        for (std::size_t i = 0; i < spec.per_class; ++i) {
            SampleRecord rec;
            rec.id = "c" + std::to_string(cls) + "-" + std::to_string(i);
            rec.label = cls;
            for (;;) {
                rec.series = TimeSeries(1, L, spec.fs);
                const double p1 = phase(rng);
                const double p2 = phase(rng);
                for (std::size_t n = 0; n < L; ++n) {
                    const double t = static_cast<double>(n) / spec.fs;
                    rec.series.at(0, n) = std::cos(kTwoPi * spec.f_shared * t + p1) +
                                          std::cos(kTwoPi * f2 * t + p2) + noise(rng);
                }
                const Spectrum s = dft_real(rec.series);
                if (std::abs(s.at(0, 1)) > s.eps_mag()) break;
                if (redraws) ++*redraws;
            }
            data.push_back(std::move(rec));
        }
    }
    return data;
}

inline nlohmann::json record_to_json(const SampleRecord& rec) {
    nlohmann::json channels = nlohmann::json::array();
    for (std::size_t c = 0; c < rec.series.channels(); ++c) {
        nlohmann::json row = nlohmann::json::array();
        for (std::size_t n = 0; n < rec.series.length(); ++n) row.push_back(rec.series.at(c, n));
        channels.push_back(std::move(row));
    }
    return nlohmann::json{{"id", rec.id},
                          {"label", rec.label},
                          {"sample_rate", rec.series.sample_rate()},
                          {"channels", std::move(channels)}};
}

inline SampleRecord record_from_json(const nlohmann::json& j, std::size_t line_no) {
    auto fail = [&](const std::string& why) -> MalformedRecord {
        return MalformedRecord("line " + std::to_string(line_no) + ": " + why);
    };
    if (!j.is_object()) throw fail("record is not an object");
    for (const char* key : {"id", "label", "sample_rate", "channels"})
        if (!j.contains(key)) throw fail(std::string("missing field '") + key + "'");
    SampleRecord rec;
    try {
        rec.id = j.at("id").get<std::string>();
        rec.label = j.at("label").get<std::size_t>();
        const double fs = j.at("sample_rate").get<double>();
        const auto& channels = j.at("channels");
        if (!channels.is_array() || channels.empty()) throw fail("'channels' must be a non-empty array");
        const std::size_t L = channels.at(0).size();
        rec.series = TimeSeries(channels.size(), L, fs);
        for (std::size_t c = 0; c < channels.size(); ++c) {
            const auto& row = channels.at(c);
            if (!row.is_array() || row.size() != L) throw fail("channel lengths differ");
            for (std::size_t n = 0; n < L; ++n) rec.series.at(c, n) = row.at(n).get<double>();
        }
    } catch (const MalformedRecord&) {
        throw;
    } catch (const std::exception& e) {
        throw fail(e.what());
    }
    if (!rec.series.all_finite()) throw fail("non-finite sample value");
    return rec;
}

/// One JSON object per line; doubles round-trip bitwise.
inline void save_dataset(const Dataset& data, const std::string& path) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream os(tmp);
        if (!os) throw IoFailure("save_dataset: cannot open " + tmp);
        for (const SampleRecord& rec : data) os << record_to_json(rec).dump() << '\n';
        if (!os) throw IoFailure("save_dataset: write failed for " + tmp);
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0)
        throw IoFailure("save_dataset: rename to " + path + " failed");
}

inline Dataset load_dataset(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw IoFailure("load_dataset: cannot open " + path);
    Dataset data;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(is, line)) {
        ++line_no;
        if (line.empty()) continue;
        nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
        if (j.is_discarded())
            throw MalformedRecord("line " + std::to_string(line_no) + ": invalid JSON");
        data.push_back(record_from_json(j, line_no));
    }
    return data;
}

struct SplitResult {
    Dataset train, val, test;
};

/// Disjoint, exhaustive, seeded split. Stratified keeps per-class ratios
/// within one sample of the requested fractions.
inline SplitResult split(const Dataset& data, double train_frac, double val_frac,
                         double test_frac, std::uint64_t seed, bool stratified) {
    if (std::abs(train_frac + val_frac + test_frac - 1.0) > 1e-9)
        throw Error("split: fractions must sum to 1");
    if (data.size() < 3) throw InsufficientSamples("split: need at least 3 samples");

    auto shuffle_idx = [&](std::vector<std::size_t>& idx, std::uint64_t s) {
        std::mt19937_64 rng(s);
        std::shuffle(idx.begin(), idx.end(), rng);
    };
    auto cut = [&](const std::vector<std::size_t>& idx, SplitResult& out) {
        const std::size_t n = idx.size();
        const auto n_train = static_cast<std::size_t>(std::llround(train_frac * static_cast<double>(n)));
        const auto n_val = static_cast<std::size_t>(std::llround(val_frac * static_cast<double>(n)));
        for (std::size_t i = 0; i < n; ++i) {
            const SampleRecord& rec = data[idx[i]];
            if (i < n_train)
                out.train.push_back(rec);
            else if (i < n_train + n_val)
                out.val.push_back(rec);
            else
                out.test.push_back(rec);
        }
    };

    SplitResult out;
    if (!stratified) {
        std::vector<std::size_t> idx(data.size());
        std::iota(idx.begin(), idx.end(), 0);
        shuffle_idx(idx, seed);
        cut(idx, out);
    } else {
        std::map<std::size_t, std::vector<std::size_t>> by_class;
        for (std::size_t i = 0; i < data.size(); ++i) by_class[data[i].label].push_back(i);
        std::uint64_t salt = 0;
        for (auto& [label, idx] : by_class) {
            shuffle_idx(idx, seed + 0x9e3779b97f4a7c15ull * ++salt);
            cut(idx, out);
        }
    }
    return out;
}

}  // namespace shiftcanon
