#pragma once

// Joint training of the guidance network and the classifier. Per batch:
//
//   phi_i   = wrap(f_G(|F(x_i)|))         (raw output kept for the std term)
//   x~_i    = canonize(x_i, phi_i)
//   logits  = f_C(x~_i)
//   L_C     -> classifier parameters (its own Adam)
//   L_G     = L_C (+/-) std(raw angles)  -> guidance parameters, with the
//             cross-entropy part flowing through d x~ / d phi analytically
//
// Variant fixed_phi freezes phi = 0 and skips the guidance net entirely.
// The classifier sees only L_C; the guidance optimizer sees only L_G; the
// two parameter sets are disjoint.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "shiftcanon/canon.hpp"
#include "shiftcanon/data.hpp"
#include "shiftcanon/errors.hpp"
#include "shiftcanon/nn.hpp"

namespace shiftcanon {

struct TrainConfig {
    double learning_rate = 1e-3;
    std::size_t batch_size = 32;
    std::size_t max_epochs = 100;
    std::size_t halve_patience = 15;  // epochs without val improvement before lr /= 2
    std::size_t stop_patience = 90;   // epochs without val improvement before stopping
    double val_fraction = 0.2;        // stratified slice of the training data
    std::uint64_t seed = 0;
    LossVariant variant = LossVariant::ours;
    bool canonized_pipeline = true;   // false: classifier sees the raw series

    void validate() const {
        if (!(learning_rate > 0.0)) throw Error("TrainConfig: learning_rate must be positive");
        if (batch_size < 1 || max_epochs < 1) throw Error("TrainConfig: degenerate sizes");
        if (halve_patience < 1 || stop_patience < 1) throw Error("TrainConfig: degenerate patience");
        if (!(val_fraction > 0.0) || !(val_fraction < 1.0))
            throw Error("TrainConfig: val_fraction must be in (0, 1)");
    }
};

struct EpochStats {
    std::size_t epoch = 0;
    double lr = 0.0;
    double train_loss_c = 0.0;   // mean over batches
    double train_loss_g = 0.0;
    double angle_std_mean = 0.0; // mean per-batch std of raw angles
    double val_loss = 0.0;
    double val_accuracy = 0.0;
};

struct TrainTrace {
    std::vector<EpochStats> epochs;
    std::vector<double> batch_angle_std;  // every batch, in order
    std::size_t best_epoch = 0;
    double best_val_loss = 0.0;
};

/// Desk-scale classifier: conv(8,k5) relu pool(2) conv(16,k5) relu gap dense(K).
/// The pooling layer is maxpool by default, blurpool(5, 2) when requested.
inline Network make_classifier(std::size_t channels, std::size_t length, std::size_t n_classes,
                               std::uint64_t seed, bool blurpool = false) {
    const LayerSpec pool = blurpool ? LayerSpec::blurpool(5, 2) : LayerSpec::maxpool(2);
    return make_network({LayerSpec::conv1d(channels, 8, 5), LayerSpec::relu(), pool,
                         LayerSpec::conv1d(8, 16, 5), LayerSpec::relu(),
                         LayerSpec::global_avg_pool(), LayerSpec::dense(16, n_classes)},
                        {channels, length}, seed);
}

/// Guidance net: dense(16) relu dense(1) on the flattened half-spectrum
/// magnitudes of all channels.
inline Network make_guidance(std::size_t channels, std::size_t length, std::uint64_t seed) {
    const std::size_t bins = Spectrum::n_bins_for(length);
    return make_network({LayerSpec::dense(channels * bins, 16), LayerSpec::relu(),
                         LayerSpec::dense(16, 1)},
                        {channels, bins}, seed);
}

namespace detail {

struct PreparedSample {
    const SampleRecord* rec = nullptr;
    Spectrum spectrum;      // cached DFT of the series
    Tensor1D magnitudes;    // guidance input
};

inline std::vector<PreparedSample> prepare(const Dataset& data) {
    std::vector<PreparedSample> out;
    out.reserve(data.size());
    for (const SampleRecord& rec : data) {
        PreparedSample p;
        p.rec = &rec;
        p.spectrum = dft_real(rec.series);
        if (std::abs(p.spectrum.at(0, kReferenceBin)) <= p.spectrum.eps_mag())
            throw DegeneratePhase("train: sample " + rec.id + " has a degenerate reference bin");
        const std::size_t nb = p.spectrum.n_bins();
        p.magnitudes = Tensor1D(p.spectrum.channels(), nb);
        for (std::size_t c = 0; c < p.spectrum.channels(); ++c)
            for (std::size_t k = 0; k < nb; ++k)
                p.magnitudes.at(c, k) = std::abs(p.spectrum.at(c, k));
        out.push_back(std::move(p));
    }
    return out;
}

inline Tensor1D to_tensor(const TimeSeries& x) {
    Tensor1D t(x.channels(), x.length());
    t.v = x.values();
    return t;
}

}  // namespace detail

/// Full prediction pipeline for trained networks.
class Pipeline {
public:
    Pipeline(const Network& guidance, const Network& classifier, LossVariant variant)
        : guidance_(guidance), classifier_(classifier),
          canonized_(true), fixed_phi_(variant == LossVariant::fixed_phi) {}

    /// Raw-series pipeline (no transform in front of the classifier).
    explicit Pipeline(const Network& classifier)
        : classifier_(classifier), canonized_(false), fixed_phi_(false) {}

    std::vector<double> logits(const TimeSeries& x) const {
        Tensor1D in = detail::to_tensor(canonized_ ? transform(x) : x);
        return forward(classifier_, in).v;
    }

    /// Argmax class; ties break toward the lowest index.
    std::size_t predict(const TimeSeries& x) const {
        const std::vector<double> z = logits(x);
        return static_cast<std::size_t>(
            std::max_element(z.begin(), z.end()) - z.begin());
    }

    /// The canonized view of a sample (identity for raw pipelines).
    TimeSeries transform(const TimeSeries& x) const {
        if (!canonized_) return x;
        const double phi = fixed_phi_ ? 0.0 : guidance_angle(guidance_, x);
        return canonize(x, phi).first;
    }

    double angle(const TimeSeries& x) const {
        if (!canonized_ || fixed_phi_) return 0.0;
        return guidance_angle(guidance_, x);
    }

    bool canonized() const { return canonized_; }

private:
    Network guidance_;
    Network classifier_;
    bool canonized_ = true;
    bool fixed_phi_ = false;
};

struct TrainResult {
    Network guidance;
    Network classifier;
    TrainTrace trace;
};

/// Train on `data` with an internal stratified train/val split. Returns the
/// networks restored to the lowest-validation-loss epoch.
inline TrainResult train_joint(Network guidance, Network classifier, const Dataset& data,
                               const TrainConfig& cfg) {
    cfg.validate();
    if (data.size() < 5) throw InsufficientSamples("train_joint: dataset too small");
    const bool uses_guidance =
        cfg.canonized_pipeline && cfg.variant != LossVariant::fixed_phi;

    const SplitResult parts =
        split(data, 1.0 - cfg.val_fraction, cfg.val_fraction, 0.0, cfg.seed, true);
    const std::vector<detail::PreparedSample> train_set = detail::prepare(parts.train);
    const std::vector<detail::PreparedSample> val_set = detail::prepare(parts.val);

    std::mt19937_64 shuffle_rng(cfg.seed ^ 0xd1b54a32d192ed03ull);
    std::vector<std::size_t> order(train_set.size());
    std::iota(order.begin(), order.end(), 0);

    double lr = cfg.learning_rate;
    TrainTrace trace;
    double best_val = std::numeric_limits<double>::infinity();
    Network best_guidance = guidance;
    Network best_classifier = classifier;
    std::size_t since_improve = 0;

    // evaluation-only pass for the validation set
    auto eval_sample = [&](const detail::PreparedSample& s) {
        double phi = 0.0;
        if (uses_guidance) phi = wrap_angle(forward(guidance, s.magnitudes).v[0]);
        Tensor1D in = cfg.canonized_pipeline
                          ? detail::to_tensor(canonize_spectrum(s.spectrum, phi).first)
                          : detail::to_tensor(s.rec->series);
        return forward(classifier, in);
    };

    for (std::size_t epoch = 0; epoch < cfg.max_epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), shuffle_rng);

        double epoch_lc = 0.0, epoch_lg = 0.0, epoch_std = 0.0;
        std::size_t n_batches = 0;

        for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
            const std::size_t end = std::min(order.size(), start + cfg.batch_size);
            if (end - start < 2 && uses_guidance && cfg.variant != LossVariant::ce_only)
                continue;  // a singleton remainder cannot carry the std term
            const std::size_t n = end - start;

            std::vector<std::vector<double>> logits(n);
            std::vector<std::size_t> labels(n);
            std::vector<double> raw_angles(n, 0.0), phis(n, 0.0);
            std::vector<ForwardCache> guidance_caches(uses_guidance ? n : 0);
            std::vector<ForwardCache> classifier_caches(n);

            zero_gradients(classifier);
            if (uses_guidance) zero_gradients(guidance);

            for (std::size_t local = 0; local < n; ++local) {
                const detail::PreparedSample& s = train_set[order[start + local]];
                if (uses_guidance) {
                    const Tensor1D out = forward(guidance, s.magnitudes, &guidance_caches[local]);
                    raw_angles[local] = out.v[0];
                    phis[local] = wrap_angle(raw_angles[local]);
                }
                Tensor1D in = cfg.canonized_pipeline
                                  ? detail::to_tensor(canonize_spectrum(s.spectrum, phis[local]).first)
                                  : detail::to_tensor(s.rec->series);
                logits[local] = forward(classifier, in, &classifier_caches[local]).v;
                labels[local] = s.rec->label;
            }

            const ClassifierLoss lc = loss_classifier(logits, labels);
            if (!std::isfinite(lc.value))
                throw NonFiniteLoss("train_joint: classifier loss at epoch " +
                                    std::to_string(epoch));

            GuidanceLoss lg;
            lg.value = lc.value;
            lg.d_angles.assign(n, 0.0);
            double batch_std = 0.0;
            if (uses_guidance) {
                lg = loss_guidance(lc.value, raw_angles, cfg.variant);
                if (!std::isfinite(lg.value))
                    throw NonFiniteLoss("train_joint: guidance loss at epoch " +
                                        std::to_string(epoch));
                batch_std = angle_std(raw_angles);
            }

            for (std::size_t local = 0; local < n; ++local) {
                const detail::PreparedSample& s = train_set[order[start + local]];
                Tensor1D d_out(logits[local].size(), 1);
                d_out.v = lc.d_logits[local];
                const Tensor1D d_input = backward(classifier, classifier_caches[local], d_out);
                if (!uses_guidance) continue;
                // chain rule through the transform: dL_C/dphi = <dL_C/dx~, dx~/dphi>
                const TimeSeries grad = canonize_grad_phi_spectrum(s.spectrum, phis[local]);
                double d_phi = 0.0;
                for (std::size_t i = 0; i < grad.values().size(); ++i)
                    d_phi += d_input.v[i] * grad.values()[i];
                Tensor1D d_angle(1, 1);
                d_angle.v = {d_phi + lg.d_angles[local]};
                backward(guidance, guidance_caches[local], d_angle);
            }

            adam_step(classifier, lr);
            if (uses_guidance) adam_step(guidance, lr);

            epoch_lc += lc.value;
            epoch_lg += lg.value;
            epoch_std += batch_std;
            trace.batch_angle_std.push_back(batch_std);
            ++n_batches;
        }

        // validation under the current parameters
        std::vector<std::vector<double>> val_logits;
        std::vector<std::size_t> val_labels;
        std::size_t val_correct = 0;
        for (const detail::PreparedSample& s : val_set) {
            const Tensor1D out = eval_sample(s);
            val_logits.push_back(out.v);
            val_labels.push_back(s.rec->label);
            const std::size_t pred = static_cast<std::size_t>(
                std::max_element(out.v.begin(), out.v.end()) - out.v.begin());
            val_correct += pred == s.rec->label ? 1 : 0;
        }
        const double val_loss = loss_classifier(val_logits, val_labels).value;
        if (!std::isfinite(val_loss))
            throw NonFiniteLoss("train_joint: validation loss at epoch " + std::to_string(epoch));

        EpochStats stats;
        stats.epoch = epoch;
        stats.lr = lr;
        stats.train_loss_c = epoch_lc / static_cast<double>(std::max<std::size_t>(1, n_batches));
        stats.train_loss_g = epoch_lg / static_cast<double>(std::max<std::size_t>(1, n_batches));
        stats.angle_std_mean = epoch_std / static_cast<double>(std::max<std::size_t>(1, n_batches));
        stats.val_loss = val_loss;
        stats.val_accuracy =
            static_cast<double>(val_correct) / static_cast<double>(val_set.size());
        trace.epochs.push_back(stats);

        if (val_loss < best_val) {
            best_val = val_loss;
            trace.best_epoch = epoch;
            best_guidance = guidance;
            best_classifier = classifier;
            since_improve = 0;
        } else {
            ++since_improve;
            if (since_improve % cfg.halve_patience == 0) lr *= 0.5;
            if (since_improve >= cfg.stop_patience) break;
        }
    }

    trace.best_val_loss = best_val;
    return TrainResult{std::move(best_guidance), std::move(best_classifier), std::move(trace)};
}

}  // namespace shiftcanon
