#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "shiftcanon/errors.hpp"

namespace shiftcanon {

/// Dense (channels, length) buffer used by the layer stack.
struct Tensor1D {
    std::size_t channels = 0;
    std::size_t length = 0;
    std::vector<double> v;

    Tensor1D() = default;
    Tensor1D(std::size_t c, std::size_t l) : channels(c), length(l), v(c * l, 0.0) {}

    double& at(std::size_t c, std::size_t t) { return v[c * length + t]; }
    double at(std::size_t c, std::size_t t) const { return v[c * length + t]; }

    std::size_t size() const { return v.size(); }

    bool same_shape(const Tensor1D& o) const {
        return channels == o.channels && length == o.length;
    }
};

inline void require_shape(const Tensor1D& t, std::size_t channels, std::size_t length,
                          const char* who) {
    if (t.channels != channels || t.length != length)
        throw ShapeMismatch(std::string(who) + ": expected (" + std::to_string(channels) + "," +
                            std::to_string(length) + "), got (" + std::to_string(t.channels) +
                            "," + std::to_string(t.length) + ")");
}

}  // namespace shiftcanon
