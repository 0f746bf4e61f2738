#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>

#include "shiftcanon/data.hpp"

using namespace shiftcanon;

namespace {

std::filesystem::path temp_file(const std::string& name) {
    return std::filesystem::temp_directory_path() / name;
}

}  // namespace

TEST_CASE("generate_sinusoid_task", "[data][gen]") {
    SyntheticSpec spec;
    spec.per_class = 12;
    spec.seed = 4;

    SECTION("noiseless samples peak exactly at the class bins") {
        SyntheticSpec clean = spec;
        clean.noise_variance = 0.0;
        const Dataset data = generate_sinusoid_task(clean);
        REQUIRE(data.size() == 24);
        for (const SampleRecord& rec : data) {
            const auto mags = magnitude_spectrum(rec.series);
            const std::size_t f2 = rec.label == 0 ? 24 : 25;
            const double peak = mags[0][5];
            for (std::size_t k = 0; k < mags[0].size(); ++k) {
                if (k == 5 || k == f2) {
                    CHECK(mags[0][k] == Catch::Approx(150.0).margin(1e-8));  // L/2
                } else {
                    CHECK(mags[0][k] < 1e-8 * peak);
                }
            }
        }
    }
    SECTION("same seed reproduces the dataset exactly") {
        const Dataset a = generate_sinusoid_task(spec);
        const Dataset b = generate_sinusoid_task(spec);
        REQUIRE(a.size() == b.size());
        for (std::size_t i = 0; i < a.size(); ++i) {
            CHECK(a[i].id == b[i].id);
            CHECK(a[i].series.values() == b[i].series.values());
        }
    }
    SECTION("frequencies sit below Nyquist and balance is exact") {
        const Dataset data = generate_sinusoid_task(spec);
        std::map<std::size_t, std::size_t> counts;
        for (const SampleRecord& rec : data) counts[rec.label] += 1;
        CHECK(counts[0] == 12);
        CHECK(counts[1] == 12);
        CHECK(spec.f_class_b < spec.fs / 2);
    }
    SECTION("no sample has a degenerate reference bin") {
        const Dataset data = generate_sinusoid_task(spec);
        for (const SampleRecord& rec : data) {
            const Spectrum s = dft_real(rec.series);
            CHECK(std::abs(s.at(0, 1)) > s.eps_mag());
        }
    }
}

TEST_CASE("save/load dataset round trip", "[data][io]") {
    SyntheticSpec spec;
    spec.per_class = 3;
    spec.seed = 9;
    const Dataset data = generate_sinusoid_task(spec);
    const auto path = temp_file("shiftcanon_roundtrip.jsonl");

    SECTION("values survive bitwise") {
        save_dataset(data, path.string());
        const Dataset back = load_dataset(path.string());
        REQUIRE(back.size() == data.size());
        for (std::size_t i = 0; i < data.size(); ++i) {
            CHECK(back[i].id == data[i].id);
            CHECK(back[i].label == data[i].label);
            CHECK(back[i].series.sample_rate() == data[i].series.sample_rate());
            CHECK(back[i].series.values() == data[i].series.values());
        }
        std::filesystem::remove(path);
    }
    SECTION("empty dataset round trips") {
        save_dataset({}, path.string());
        CHECK(load_dataset(path.string()).empty());
        std::filesystem::remove(path);
    }
    SECTION("truncated record is rejected with its line number") {
        save_dataset(data, path.string());
        std::ifstream is(path);
        std::string all((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
        is.close();
        std::ofstream os(path);
        os << all.substr(0, all.size() * 2 / 3);
        os.close();
        CHECK_THROWS_AS(load_dataset(path.string()), MalformedRecord);
        std::filesystem::remove(path);
    }
    SECTION("missing field is rejected") {
        std::ofstream os(path);
        os << R"({"id":"a","label":0,"channels":[[1,2,3,4]]})" << '\n';
        os.close();
        CHECK_THROWS_WITH(load_dataset(path.string()),
                          Catch::Matchers::ContainsSubstring("sample_rate"));
        std::filesystem::remove(path);
    }
    SECTION("unreadable path is an IoFailure") {
        CHECK_THROWS_AS(load_dataset("/nonexistent/nowhere.jsonl"), IoFailure);
    }
}

TEST_CASE("split", "[data][split]") {
    SyntheticSpec spec;
    spec.per_class = 50;
    spec.seed = 21;
    const Dataset data = generate_sinusoid_task(spec);  // 100 samples, 50/50

    SECTION("60/20/20 sizes") {
        const SplitResult r = split(data, 0.6, 0.2, 0.2, 1, false);
        CHECK(r.train.size() == 60);
        CHECK(r.val.size() == 20);
        CHECK(r.test.size() == 20);
    }
    SECTION("same seed gives the identical split") {
        const SplitResult a = split(data, 0.6, 0.2, 0.2, 7, true);
        const SplitResult b = split(data, 0.6, 0.2, 0.2, 7, true);
        REQUIRE(a.train.size() == b.train.size());
        for (std::size_t i = 0; i < a.train.size(); ++i) CHECK(a.train[i].id == b.train[i].id);
    }
    SECTION("disjoint and exhaustive") {
        const SplitResult r = split(data, 0.6, 0.2, 0.2, 3, true);
        std::map<std::string, int> seen;
        for (const auto& part : {r.train, r.val, r.test})
            for (const SampleRecord& rec : part) seen[rec.id] += 1;
        CHECK(seen.size() == data.size());
        for (const auto& [id, n] : seen) CHECK(n == 1);
    }
    SECTION("stratified keeps class balance within one sample") {
        const SplitResult r = split(data, 0.6, 0.2, 0.2, 11, true);
        for (const auto& part : {r.train, r.val, r.test}) {
            std::size_t c0 = 0, c1 = 0;
            for (const SampleRecord& rec : part) (rec.label == 0 ? c0 : c1) += 1;
            CHECK(std::llabs(static_cast<long long>(c0) - static_cast<long long>(c1)) <= 1);
        }
    }
    SECTION("bad fractions and tiny datasets are rejected") {
        CHECK_THROWS_AS(split(data, 0.5, 0.2, 0.2, 1, false), Error);
        Dataset tiny(data.begin(), data.begin() + 2);
        CHECK_THROWS_AS(split(tiny, 0.6, 0.2, 0.2, 1, false), InsufficientSamples);
    }
}
