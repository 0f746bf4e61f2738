#pragma once

// Minimal trainable layer stack with manual backpropagation and Adam:
// circular 1D convolution, max pooling, blur pooling, dense layers, ReLU
// and global average pooling. Enough to realize the classifier and the
// guidance network; no autograd, each layer knows its own adjoint.

#include <cmath>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <limits>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "shiftcanon/baselines.hpp"
#include "shiftcanon/errors.hpp"
#include "shiftcanon/signal.hpp"
#include "shiftcanon/tensor.hpp"

namespace shiftcanon {

enum class LayerKind { conv1d, relu, maxpool, blurpool, dense, global_avg_pool };

inline const char* layer_kind_name(LayerKind k) {
    switch (k) {
        case LayerKind::conv1d: return "conv1d";
        case LayerKind::relu: return "relu";
        case LayerKind::maxpool: return "maxpool";
        case LayerKind::blurpool: return "blurpool";
        case LayerKind::dense: return "dense";
        case LayerKind::global_avg_pool: return "global_avg_pool";
    }
    return "?";
}

struct LayerSpec {
    LayerKind kind = LayerKind::relu;
    std::size_t in_channels = 0, out_channels = 0, kernel = 0;  // conv1d
    std::size_t stride = 1;                                     // maxpool / blurpool
    std::size_t blur_length = 0;                                // blurpool
    std::size_t in_features = 0, out_features = 0;              // dense

    static LayerSpec conv1d(std::size_t in, std::size_t out, std::size_t kernel) {
        LayerSpec s;
        s.kind = LayerKind::conv1d;
        s.in_channels = in;
        s.out_channels = out;
        s.kernel = kernel;
        return s;
    }
    static LayerSpec relu() { return LayerSpec{}; }
    static LayerSpec maxpool(std::size_t stride) {
        LayerSpec s;
        s.kind = LayerKind::maxpool;
        s.stride = stride;
        return s;
    }
    static LayerSpec blurpool(std::size_t blur_length, std::size_t stride) {
        LayerSpec s;
        s.kind = LayerKind::blurpool;
        s.blur_length = blur_length;
        s.stride = stride;
        return s;
    }
    static LayerSpec dense(std::size_t in, std::size_t out) {
        LayerSpec s;
        s.kind = LayerKind::dense;
        s.in_features = in;
        s.out_features = out;
        return s;
    }
    static LayerSpec global_avg_pool() {
        LayerSpec s;
        s.kind = LayerKind::global_avg_pool;
        return s;
    }
};

struct Shape {
    std::size_t channels = 0;
    std::size_t length = 0;
};

inline Shape output_shape(const LayerSpec& spec, Shape in) {
    switch (spec.kind) {
        case LayerKind::conv1d:
            if (in.channels != spec.in_channels)
                throw ShapeMismatch("conv1d: input has " + std::to_string(in.channels) +
                                    " channels, layer expects " +
                                    std::to_string(spec.in_channels));
            return {spec.out_channels, in.length};
        case LayerKind::relu:
            return in;
        case LayerKind::maxpool:
        case LayerKind::blurpool:
            if (spec.kind == LayerKind::maxpool && in.length % spec.stride != 0)
                throw ShapeMismatch("maxpool: length " + std::to_string(in.length) +
                                    " not divisible by stride " + std::to_string(spec.stride));
            return {in.channels, (in.length + spec.stride - 1) / spec.stride};
        case LayerKind::dense:
            if (in.channels * in.length != spec.in_features)
                throw ShapeMismatch("dense: input has " +
                                    std::to_string(in.channels * in.length) +
                                    " features, layer expects " +
                                    std::to_string(spec.in_features));
            return {spec.out_features, 1};
        case LayerKind::global_avg_pool:
            return {in.channels, 1};
    }
    throw Error("output_shape: unknown layer kind");
}

struct Layer {
    LayerSpec spec;
    std::vector<double> w, b;            // parameters
    std::vector<double> gw, gb;          // gradient accumulators
    std::vector<double> mw, vw, mb, vb;  // Adam state

    std::size_t weight_count() const {
        switch (spec.kind) {
            case LayerKind::conv1d: return spec.out_channels * spec.in_channels * spec.kernel;
            case LayerKind::dense: return spec.out_features * spec.in_features;
            default: return 0;
        }
    }
    std::size_t bias_count() const {
        switch (spec.kind) {
            case LayerKind::conv1d: return spec.out_channels;
            case LayerKind::dense: return spec.out_features;
            default: return 0;
        }
    }
};

struct Network {
    std::vector<Layer> layers;
    Shape input_shape;
    std::int64_t adam_steps = 0;

    Shape output_shape_for(Shape in) const {
        Shape s = in;
        for (const Layer& l : layers) s = output_shape(l.spec, s);
        return s;
    }
};

/// Build a network with uniform(-1/sqrt(fan_in), +1/sqrt(fan_in)) weights
/// and biases, seeded.
inline Network make_network(const std::vector<LayerSpec>& specs, Shape input,
                            std::uint64_t seed) {
    Network net;
    net.input_shape = input;
    std::mt19937_64 rng(seed);
    Shape shape = input;
    for (const LayerSpec& spec : specs) {
        shape = output_shape(spec, shape);  // validates the chain
        Layer layer;
        layer.spec = spec;
        const std::size_t nw = layer.weight_count();
        const std::size_t nb = layer.bias_count();
        layer.w.resize(nw);
        layer.b.resize(nb);
        layer.gw.assign(nw, 0.0);
        layer.gb.assign(nb, 0.0);
        layer.mw.assign(nw, 0.0);
        layer.vw.assign(nw, 0.0);
        layer.mb.assign(nb, 0.0);
        layer.vb.assign(nb, 0.0);
        if (nw > 0) {
            const std::size_t fan_in = spec.kind == LayerKind::conv1d
                                           ? spec.in_channels * spec.kernel
                                           : spec.in_features;
            const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
            std::uniform_real_distribution<double> dist(-bound, bound);
            for (double& v : layer.w) v = dist(rng);
            for (double& v : layer.b) v = dist(rng);
        }
        net.layers.push_back(std::move(layer));
    }
    return net;
}

struct ForwardCache {
    std::vector<Tensor1D> inputs;                   // input of each layer
    std::vector<std::vector<std::size_t>> argmax;   // maxpool winners per layer
};

namespace detail {

inline Tensor1D layer_forward(const Layer& layer, const Tensor1D& in,
                              std::vector<std::size_t>* argmax) {
    const LayerSpec& spec = layer.spec;
    const Shape out_shape = output_shape(spec, {in.channels, in.length});
    switch (spec.kind) {
        case LayerKind::conv1d: {
            const std::size_t L = in.length;
            const std::size_t off = spec.kernel / 2;
            Tensor1D out(out_shape.channels, out_shape.length);
            for (std::size_t o = 0; o < spec.out_channels; ++o) {
                for (std::size_t t = 0; t < L; ++t) {
                    double acc = layer.b[o];
                    for (std::size_t i = 0; i < spec.in_channels; ++i) {
                        const double* wrow = layer.w.data() + (o * spec.in_channels + i) * spec.kernel;
                        for (std::size_t j = 0; j < spec.kernel; ++j)
                            acc += wrow[j] * in.at(i, (t + j + L - off) % L);
                    }
                    out.at(o, t) = acc;
                }
            }
            return out;
        }
        case LayerKind::relu: {
            Tensor1D out = in;
            for (double& v : out.v)
                if (v < 0.0) v = 0.0;
            return out;
        }
        case LayerKind::maxpool: {
            Tensor1D out(out_shape.channels, out_shape.length);
            if (argmax) argmax->assign(out.size(), 0);
            for (std::size_t c = 0; c < in.channels; ++c) {
                for (std::size_t u = 0; u < out_shape.length; ++u) {
                    std::size_t best = u * spec.stride;
                    double best_v = in.at(c, best);
                    for (std::size_t d = 1; d < spec.stride; ++d) {
                        const std::size_t t = u * spec.stride + d;
                        if (in.at(c, t) > best_v) {  // ties keep the lowest index
                            best_v = in.at(c, t);
                            best = t;
                        }
                    }
                    out.at(c, u) = best_v;
                    if (argmax) (*argmax)[c * out_shape.length + u] = best;
                }
            }
            return out;
        }
        case LayerKind::blurpool:
            return blurpool_downsample(in, binomial_kernel(spec.blur_length), spec.stride);
        case LayerKind::dense: {
            Tensor1D out(spec.out_features, 1);
            for (std::size_t o = 0; o < spec.out_features; ++o) {
                double acc = layer.b[o];
                const double* wrow = layer.w.data() + o * spec.in_features;
                for (std::size_t i = 0; i < spec.in_features; ++i) acc += wrow[i] * in.v[i];
                out.v[o] = acc;
            }
            return out;
        }
        case LayerKind::global_avg_pool: {
            Tensor1D out(in.channels, 1);
            for (std::size_t c = 0; c < in.channels; ++c) {
                double acc = 0.0;
                for (std::size_t t = 0; t < in.length; ++t) acc += in.at(c, t);
                out.at(c, 0) = acc / static_cast<double>(in.length);
            }
            return out;
        }
    }
    throw Error("layer_forward: unknown layer kind");
}

inline Tensor1D layer_backward(Layer& layer, const Tensor1D& in,
                               const std::vector<std::size_t>& argmax,
                               const Tensor1D& d_out) {
    const LayerSpec& spec = layer.spec;
    switch (spec.kind) {
        case LayerKind::conv1d: {
            const std::size_t L = in.length;
            const std::size_t off = spec.kernel / 2;
            Tensor1D d_in(in.channels, in.length);
            for (std::size_t o = 0; o < spec.out_channels; ++o) {
                for (std::size_t t = 0; t < L; ++t) {
                    const double g = d_out.at(o, t);
                    if (g == 0.0) continue;
                    layer.gb[o] += g;
                    for (std::size_t i = 0; i < spec.in_channels; ++i) {
                        const std::size_t base = (o * spec.in_channels + i) * spec.kernel;
                        for (std::size_t j = 0; j < spec.kernel; ++j) {
                            const std::size_t src = (t + j + L - off) % L;
                            layer.gw[base + j] += g * in.at(i, src);
                            d_in.at(i, src) += g * layer.w[base + j];
                        }
                    }
                }
            }
            return d_in;
        }
        case LayerKind::relu: {
            Tensor1D d_in(in.channels, in.length);
            for (std::size_t i = 0; i < in.size(); ++i)
                d_in.v[i] = in.v[i] > 0.0 ? d_out.v[i] : 0.0;
            return d_in;
        }
        case LayerKind::maxpool: {
            Tensor1D d_in(in.channels, in.length);
            for (std::size_t c = 0; c < d_out.channels; ++c)
                for (std::size_t u = 0; u < d_out.length; ++u)
                    d_in.at(c, argmax[c * d_out.length + u]) += d_out.at(c, u);
            return d_in;
        }
        case LayerKind::blurpool: {
            const BinomialKernel kernel = binomial_kernel(spec.blur_length);
            const std::size_t L = in.length;
            const std::size_t off = kernel.length / 2;
            Tensor1D d_in(in.channels, in.length);
            for (std::size_t c = 0; c < d_out.channels; ++c) {
                for (std::size_t u = 0; u < d_out.length; ++u) {
                    const double g = d_out.at(c, u);
                    if (g == 0.0) continue;
                    const std::size_t t = u * spec.stride;
                    for (std::size_t j = 0; j < kernel.length; ++j)
                        d_in.at(c, (t + j + L - off) % L) += g * kernel.taps[j];
                }
            }
            return d_in;
        }
        case LayerKind::dense: {
            Tensor1D d_in(in.channels, in.length);
            for (std::size_t o = 0; o < spec.out_features; ++o) {
                const double g = d_out.v[o];
                if (g == 0.0) continue;
                layer.gb[o] += g;
                double* gw_row = layer.gw.data() + o * spec.in_features;
                const double* w_row = layer.w.data() + o * spec.in_features;
                for (std::size_t i = 0; i < spec.in_features; ++i) {
                    gw_row[i] += g * in.v[i];
                    d_in.v[i] += g * w_row[i];
                }
            }
            return d_in;
        }
        case LayerKind::global_avg_pool: {
            Tensor1D d_in(in.channels, in.length);
            const double inv = 1.0 / static_cast<double>(in.length);
            for (std::size_t c = 0; c < in.channels; ++c)
                for (std::size_t t = 0; t < in.length; ++t)
                    d_in.at(c, t) = d_out.at(c, 0) * inv;
            return d_in;
        }
    }
    throw Error("layer_backward: unknown layer kind");
}

}  // namespace detail

/// Run the stack; when cache is given it records what backward() needs.
inline Tensor1D forward(const Network& net, const Tensor1D& x, ForwardCache* cache = nullptr) {
    require_shape(x, net.input_shape.channels, net.input_shape.length, "forward");
    if (cache) {
        cache->inputs.clear();
        cache->argmax.assign(net.layers.size(), {});
    }
    Tensor1D cur = x;
    for (std::size_t i = 0; i < net.layers.size(); ++i) {
        if (cache) cache->inputs.push_back(cur);
        std::vector<std::size_t>* am = cache ? &cache->argmax[i] : nullptr;
        cur = detail::layer_forward(net.layers[i], cur, am);
    }
    return cur;
}

/// Backpropagate d_output, accumulating parameter gradients into the
/// layers' gw/gb buffers. Returns the gradient with respect to the input.
inline Tensor1D backward(Network& net, const ForwardCache& cache, const Tensor1D& d_output) {
    if (cache.inputs.size() != net.layers.size())
        throw ShapeMismatch("backward: cache does not match network");
    Tensor1D d = d_output;
    for (std::size_t i = net.layers.size(); i-- > 0;)
        d = detail::layer_backward(net.layers[i], cache.inputs[i], cache.argmax[i], d);
    return d;
}

inline void zero_gradients(Network& net) {
    for (Layer& l : net.layers) {
        std::fill(l.gw.begin(), l.gw.end(), 0.0);
        std::fill(l.gb.begin(), l.gb.end(), 0.0);
    }
}

/// One Adam update from the accumulated gradients; clears them after.
inline void adam_step(Network& net, double lr, double beta1 = 0.9, double beta2 = 0.999,
                      double eps = 1e-8) {
    net.adam_steps += 1;
    const auto t = static_cast<double>(net.adam_steps);
    const double c1 = 1.0 - std::pow(beta1, t);
    const double c2 = 1.0 - std::pow(beta2, t);
    auto update = [&](std::vector<double>& p, std::vector<double>& g, std::vector<double>& m,
                      std::vector<double>& v) {
        for (std::size_t i = 0; i < p.size(); ++i) {
            m[i] = beta1 * m[i] + (1.0 - beta1) * g[i];
            v[i] = beta2 * v[i] + (1.0 - beta2) * g[i] * g[i];
            p[i] -= lr * (m[i] / c1) / (std::sqrt(v[i] / c2) + eps);
        }
        std::fill(g.begin(), g.end(), 0.0);
    };
    for (Layer& l : net.layers) {
        update(l.w, l.gw, l.mw, l.vw);
        update(l.b, l.gb, l.mb, l.vb);
    }
}

/// Magnitude spectrum flattened into the guidance net's input tensor.
inline Tensor1D magnitude_input(const TimeSeries& x) {
    const auto mags = magnitude_spectrum(x);
    Tensor1D t(mags.size(), mags[0].size());
    for (std::size_t c = 0; c < mags.size(); ++c)
        for (std::size_t k = 0; k < mags[c].size(); ++k) t.at(c, k) = mags[c][k];
    return t;
}

/// Target angle from the guidance network: wrap(raw scalar output) into
/// (-pi, pi]. Shift-invariant because the input is the magnitude spectrum.
inline double guidance_angle(const Network& fg, const TimeSeries& x) {
    const Tensor1D out = forward(fg, magnitude_input(x));
    if (out.size() != 1) throw ShapeMismatch("guidance_angle: network output must be scalar");
    return wrap_angle(out.v[0]);
}

struct ClassifierLoss {
    double value = 0.0;
    std::vector<std::vector<double>> d_logits;  // (softmax - onehot) / N
};

/// Mean categorical cross-entropy over softmax.
inline ClassifierLoss loss_classifier(const std::vector<std::vector<double>>& logits,
                                      const std::vector<std::size_t>& labels) {
    if (logits.size() != labels.size())
        throw LengthMismatch("loss_classifier: batch sizes differ");
    if (logits.empty()) throw EmptyDataset("loss_classifier: empty batch");
    const double n = static_cast<double>(logits.size());
    ClassifierLoss out;
    out.d_logits.resize(logits.size());
    for (std::size_t i = 0; i < logits.size(); ++i) {
        const std::vector<double>& z = logits[i];
        if (labels[i] >= z.size()) throw Error("loss_classifier: label out of range");
        double zmax = z[0];
        for (double v : z) zmax = std::max(zmax, v);
        double sum = 0.0;
        for (double v : z) sum += std::exp(v - zmax);
        const double log_sum = std::log(sum) + zmax;
        out.value += (log_sum - z[labels[i]]) / n;
        out.d_logits[i].resize(z.size());
        for (std::size_t j = 0; j < z.size(); ++j) {
            const double p = std::exp(z[j] - log_sum);
            out.d_logits[i][j] = (p - (j == labels[i] ? 1.0 : 0.0)) / n;
        }
    }
    return out;
}

enum class LossVariant { ours, fixed_phi, ce_only, neg_var };

inline const char* loss_variant_name(LossVariant v) {
    switch (v) {
        case LossVariant::ours: return "ours";
        case LossVariant::fixed_phi: return "fixed_phi";
        case LossVariant::ce_only: return "ce_only";
        case LossVariant::neg_var: return "neg_var";
    }
    return "?";
}

inline LossVariant loss_variant_from_name(const std::string& name) {
    if (name == "ours") return LossVariant::ours;
    if (name == "fixed_phi") return LossVariant::fixed_phi;
    if (name == "ce_only") return LossVariant::ce_only;
    if (name == "neg_var") return LossVariant::neg_var;
    throw Error("unknown loss variant: " + name);
}

/// Population standard deviation of a batch of raw angles.
inline double angle_std(const std::vector<double>& angles) {
    const double n = static_cast<double>(angles.size());
    double mean = 0.0;
    for (double a : angles) mean += a;
    mean /= n;
    double var = 0.0;
    for (double a : angles) var += (a - mean) * (a - mean);
    return std::sqrt(var / n);
}

struct GuidanceLoss {
    double value = 0.0;
    std::vector<double> d_angles;  // the variance term's contribution only
};

/// Guidance loss on top of the classifier loss. Variant "ours" adds the
/// population std of the raw angle outputs, "neg_var" subtracts it,
/// "ce_only"/"fixed_phi" add nothing. Angles are the raw (unwrapped)
/// network outputs.
inline GuidanceLoss loss_guidance(double loss_c, const std::vector<double>& raw_angles,
                                  LossVariant variant) {
    GuidanceLoss out;
    out.d_angles.assign(raw_angles.size(), 0.0);
    if (variant == LossVariant::ce_only || variant == LossVariant::fixed_phi) {
        out.value = loss_c;
        return out;
    }
    if (raw_angles.size() < 2)
        throw DegenerateBatch("loss_guidance: variance term needs a batch of >= 2 angles");
    const double sign = variant == LossVariant::ours ? 1.0 : -1.0;
    const double n = static_cast<double>(raw_angles.size());
    double mean = 0.0;
    for (double a : raw_angles) mean += a;
    mean /= n;
    const double std_raw = angle_std(raw_angles);
    out.value = loss_c + sign * std_raw;
    const double denom = n * std::max(std_raw, 1e-8);  // floor against collapse
    for (std::size_t i = 0; i < raw_angles.size(); ++i)
        out.d_angles[i] = sign * (raw_angles[i] - mean) / denom;
    return out;
}

/// Plain-text checkpoint: layer specs, then every parameter with 17
/// significant digits (bitwise round trip).
inline void save_network(const Network& net, std::ostream& os) {
    os << "shiftcanon-network 1\n";
    os << "input " << net.input_shape.channels << ' ' << net.input_shape.length << '\n';
    os << "adam_steps " << net.adam_steps << '\n';
    os << "layers " << net.layers.size() << '\n';
    os << std::setprecision(17);
    for (const Layer& l : net.layers) {
        const LayerSpec& s = l.spec;
        os << "layer " << layer_kind_name(s.kind) << ' ' << s.in_channels << ' '
           << s.out_channels << ' ' << s.kernel << ' ' << s.stride << ' ' << s.blur_length
           << ' ' << s.in_features << ' ' << s.out_features << '\n';
        auto dump = [&](const char* tag, const std::vector<double>& vals) {
            os << tag << ' ' << vals.size();
            for (double v : vals) os << ' ' << v;
            os << '\n';
        };
        dump("w", l.w);
        dump("b", l.b);
        dump("mw", l.mw);
        dump("vw", l.vw);
        dump("mb", l.mb);
        dump("vb", l.vb);
    }
}

inline Network load_network(std::istream& is) {
    std::string tag;
    int version = 0;
    is >> tag >> version;
    if (!is || tag != "shiftcanon-network" || version != 1)
        throw MalformedRecord("load_network: bad header");
    Network net;
    std::size_t n_layers = 0;
    is >> tag >> net.input_shape.channels >> net.input_shape.length;
    if (!is || tag != "input") throw MalformedRecord("load_network: bad input shape");
    is >> tag >> net.adam_steps;
    if (!is || tag != "adam_steps") throw MalformedRecord("load_network: bad adam_steps");
    is >> tag >> n_layers;
    if (!is || tag != "layers") throw MalformedRecord("load_network: bad layer count");
    for (std::size_t i = 0; i < n_layers; ++i) {
        std::string kind;
        LayerSpec s;
        is >> tag >> kind >> s.in_channels >> s.out_channels >> s.kernel >> s.stride >>
            s.blur_length >> s.in_features >> s.out_features;
        if (!is || tag != "layer") throw MalformedRecord("load_network: bad layer line");
        bool known = false;
        for (LayerKind k : {LayerKind::conv1d, LayerKind::relu, LayerKind::maxpool,
                            LayerKind::blurpool, LayerKind::dense, LayerKind::global_avg_pool}) {
            if (kind == layer_kind_name(k)) {
                s.kind = k;
                known = true;
            }
        }
        if (!known) throw MalformedRecord("load_network: unknown layer kind " + kind);
        Layer layer;
        layer.spec = s;
        auto slurp = [&](const char* want, std::vector<double>& vals) {
            std::size_t count = 0;
            is >> tag >> count;
            if (!is || tag != want)
                throw MalformedRecord(std::string("load_network: expected ") + want);
            vals.resize(count);
            for (double& v : vals)
                if (!(is >> v)) throw MalformedRecord("load_network: truncated values");
        };
        slurp("w", layer.w);
        slurp("b", layer.b);
        slurp("mw", layer.mw);
        slurp("vw", layer.vw);
        slurp("mb", layer.mb);
        slurp("vb", layer.vb);
        if (layer.w.size() != layer.weight_count() || layer.b.size() != layer.bias_count())
            throw MalformedRecord("load_network: parameter counts do not match layer spec");
        layer.gw.assign(layer.w.size(), 0.0);
        layer.gb.assign(layer.b.size(), 0.0);
        net.layers.push_back(std::move(layer));
    }
    return net;
}

}  // namespace shiftcanon
