#pragma once

// Comparison conditions: binomial anti-aliasing kernels, blur-pool
// downsampling with circular boundaries, and random-shift augmentation.

#include <cstddef>
#include <random>
#include <vector>

#include "shiftcanon/errors.hpp"
#include "shiftcanon/signal.hpp"
#include "shiftcanon/tensor.hpp"

namespace shiftcanon {

/// Normalized binomial low-pass taps (a Pascal's-triangle row).
struct BinomialKernel {
    std::size_t length = 0;
    std::vector<double> taps;
};

inline BinomialKernel binomial_kernel(std::size_t length) {
    if (length != 3 && length != 5 && length != 7)
        throw UnsupportedLength("binomial_kernel: length must be 3, 5 or 7");
    BinomialKernel k;
    k.length = length;
    k.taps.resize(length);
    double row = 1.0;
    for (std::size_t i = 0; i < length; ++i) {
        k.taps[i] = row;
        row = row * static_cast<double>(length - 1 - i) / static_cast<double>(i + 1);
    }
    const double norm = 1.0 / static_cast<double>(1ull << (length - 1));
    for (double& t : k.taps) t *= norm;  // sums to 1 exactly (2^(n-1) is a power of two)
    return k;
}

/// Circular convolution with the kernel, then keep every stride-th sample.
/// Stride 1 is plain smoothing; the kernel is centered on each output tap.
inline Tensor1D blurpool_downsample(const Tensor1D& x, const BinomialKernel& kernel,
                                    std::size_t stride) {
    if (stride < 1) throw Error("blurpool_downsample: stride must be >= 1");
    const std::size_t L = x.length;
    const std::size_t out_len = (L + stride - 1) / stride;
    const std::size_t off = kernel.length / 2;
    Tensor1D y(x.channels, out_len);
    for (std::size_t c = 0; c < x.channels; ++c) {
        for (std::size_t u = 0; u < out_len; ++u) {
            const std::size_t t = u * stride;
            double acc = 0.0;
            for (std::size_t j = 0; j < kernel.length; ++j)
                acc += kernel.taps[j] * x.at(c, (t + j + L - off) % L);
            y.at(c, u) = acc;
        }
    }
    return y;
}

/// Circular shift by an integer drawn uniformly from [0, L).
inline TimeSeries augment_random_shift(const TimeSeries& x, std::mt19937_64& rng) {
    std::uniform_int_distribution<std::size_t> dist(0, x.length() - 1);
    return circular_shift(x, static_cast<double>(dist(rng)));
}

}  // namespace shiftcanon
