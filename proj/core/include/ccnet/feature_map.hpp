#pragma once

#include <cstddef>
#include <vector>

#include "ccnet/errors.hpp"

namespace ccnet {

// Rectangular features x frames array, feature-major. The signal flowing
// through every layer of the network. Indices are 0-based internally.
template <class T>
struct FeatureMap {
    int features = 0;
    int frames = 0;
    std::vector<T> values;

    FeatureMap() = default;
    FeatureMap(int features_, int frames_)
        : features(features_), frames(frames_),
          values(static_cast<std::size_t>(features_) * frames_, T(0)) {
        if (features_ < 1 || frames_ < 1)
            throw GeometryError("FeatureMap dimensions must be positive");
    }

    T& at(int feature, int frame) {
        return values[static_cast<std::size_t>(feature) * frames + frame];
    }
    T at(int feature, int frame) const {
        return values[static_cast<std::size_t>(feature) * frames + frame];
    }

    std::size_t size() const { return values.size(); }

    template <class U>
    FeatureMap<U> cast() const {
        FeatureMap<U> out(features, frames);
        for (std::size_t i = 0; i < values.size(); ++i)
            out.values[i] = static_cast<U>(values[i]);
        return out;
    }
};

} // namespace ccnet
