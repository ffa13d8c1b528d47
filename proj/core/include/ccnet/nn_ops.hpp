#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "ccnet/errors.hpp"
#include "ccnet/feature_map.hpp"
#include "ccnet/rng.hpp"

namespace ccnet {

// Output frame count for valid (unpadded) geometry: floor((l - k) / d) + 1.
inline int conv_output_length(int l, int k, int d) {
    if (k < 1 || d < 1) throw GeometryError("kernel size and stride must be >= 1");
    if (l < k) throw GeometryError("input frame count shorter than kernel");
    return (l - k) / d + 1;
}

// Temporal convolution weights: w[j][i][x], one kernel per (input feature i,
// output feature j) pair, plus a bias per output feature.
template <class T>
struct ConvKernel {
    int in_features = 0;
    int out_features = 0;
    int kernel_size = 0;
    int stride = 1;
    std::vector<T> weights; // [out][in][tap]
    std::vector<T> bias;    // [out]

    ConvKernel() = default;
    ConvKernel(int in_f, int out_f, int k, int d)
        : in_features(in_f), out_features(out_f), kernel_size(k), stride(d),
          weights(static_cast<std::size_t>(out_f) * in_f * k, T(0)),
          bias(out_f, T(0)) {
        if (k < 1 || d < 1 || k < d)
            throw GeometryError("ConvKernel requires k >= 1, d >= 1, k >= d");
    }

    T& w(int j, int i, int x) {
        return weights[(static_cast<std::size_t>(j) * in_features + i) * kernel_size + x];
    }
    T w(int j, int i, int x) const {
        return weights[(static_cast<std::size_t>(j) * in_features + i) * kernel_size + x];
    }
};

// h_j(y) = b_j + sum_i sum_{x=1..k} f_ij(x) * g_i(y*d - x + c), c = k - d + 1.
// The defining sum walks the kernel backward over the window, so tap x of the
// kernel multiplies input frame (y-1)*d + (k-x) in 0-based terms.
template <class T>
FeatureMap<T> temporal_conv_forward(const FeatureMap<T>& input, const ConvKernel<T>& kernel) {
    if (input.features != kernel.in_features)
        throw GeometryError("temporal_conv_forward: feature count mismatch");
    int out_frames = conv_output_length(input.frames, kernel.kernel_size, kernel.stride);
    FeatureMap<T> out(kernel.out_features, out_frames);
    const int k = kernel.kernel_size;
    const int d = kernel.stride;
    for (int j = 0; j < kernel.out_features; ++j) {
        for (int y = 0; y < out_frames; ++y) {
            T acc = kernel.bias[j];
            int base = y * d;
            for (int i = 0; i < kernel.in_features; ++i)
                for (int x = 0; x < k; ++x)
                    acc += kernel.w(j, i, x) * input.at(i, base + (k - 1 - x));
            out.at(j, y) = acc;
        }
    }
    return out;
}

template <class T>
struct ConvGrads {
    FeatureMap<T> grad_input;
    std::vector<T> grad_weights; // same layout as ConvKernel::weights
    std::vector<T> grad_bias;
};

template <class T>
ConvGrads<T> temporal_conv_backward(const FeatureMap<T>& input, const ConvKernel<T>& kernel,
                                    const FeatureMap<T>& grad_out) {
    int out_frames = conv_output_length(input.frames, kernel.kernel_size, kernel.stride);
    if (grad_out.features != kernel.out_features || grad_out.frames != out_frames)
        throw GeometryError("temporal_conv_backward: grad_out shape mismatch");
    ConvGrads<T> g;
    g.grad_input = FeatureMap<T>(input.features, input.frames);
    g.grad_weights.assign(kernel.weights.size(), T(0));
    g.grad_bias.assign(kernel.bias.size(), T(0));
    const int k = kernel.kernel_size;
    const int d = kernel.stride;
    for (int j = 0; j < kernel.out_features; ++j) {
        for (int y = 0; y < out_frames; ++y) {
            T go = grad_out.at(j, y);
            if (go == T(0)) continue;
            g.grad_bias[j] += go;
            int base = y * d;
            for (int i = 0; i < kernel.in_features; ++i) {
                for (int x = 0; x < k; ++x) {
                    int frame = base + (k - 1 - x);
                    std::size_t widx =
                        (static_cast<std::size_t>(j) * kernel.in_features + i) * k + x;
                    g.grad_weights[widx] += go * input.at(i, frame);
                    g.grad_input.at(i, frame) += go * kernel.w(j, i, x);
                }
            }
        }
    }
    return g;
}

struct PoolSpec {
    int kernel_size = 1;
    int stride = 1;
};

template <class T>
struct PoolResult {
    FeatureMap<T> output;
    // Source frame chosen per output element (ties -> smallest frame index),
    // feature-major like the output.
    std::vector<int> argmax;
};

template <class T>
PoolResult<T> temporal_maxpool_forward(const FeatureMap<T>& input, const PoolSpec& pool) {
    int out_frames = conv_output_length(input.frames, pool.kernel_size, pool.stride);
    PoolResult<T> result;
    result.output = FeatureMap<T>(input.features, out_frames);
    result.argmax.assign(result.output.size(), 0);
    for (int i = 0; i < input.features; ++i) {
        for (int y = 0; y < out_frames; ++y) {
            int base = y * pool.stride;
            T best = input.at(i, base);
            int best_frame = base;
            for (int x = 1; x < pool.kernel_size; ++x) {
                T v = input.at(i, base + x);
                if (v > best) {
                    best = v;
                    best_frame = base + x;
                }
            }
            result.output.at(i, y) = best;
            result.argmax[static_cast<std::size_t>(i) * out_frames + y] = best_frame;
        }
    }
    return result;
}

template <class T>
FeatureMap<T> temporal_maxpool_backward(const std::vector<int>& argmax,
                                        const FeatureMap<T>& grad_out, int in_frames) {
    if (argmax.size() != grad_out.size())
        throw GeometryError("temporal_maxpool_backward: argmax/grad_out size mismatch");
    FeatureMap<T> grad_in(grad_out.features, in_frames);
    for (int i = 0; i < grad_out.features; ++i)
        for (int y = 0; y < grad_out.frames; ++y)
            grad_in.at(i, argmax[static_cast<std::size_t>(i) * grad_out.frames + y]) +=
                grad_out.at(i, y);
    return grad_in;
}

// Rectifier h(x) = max{0, x}; the subgradient at exactly 0 is taken as 0.
template <class T>
FeatureMap<T> threshold_forward(const FeatureMap<T>& input) {
    FeatureMap<T> out = input;
    for (T& v : out.values) v = std::max(T(0), v);
    return out;
}

template <class T>
FeatureMap<T> threshold_backward(const FeatureMap<T>& input, const FeatureMap<T>& grad_out) {
    if (input.size() != grad_out.size())
        throw GeometryError("threshold_backward: shape mismatch");
    FeatureMap<T> grad_in(input.features, input.frames);
    for (std::size_t i = 0; i < input.values.size(); ++i)
        grad_in.values[i] = input.values[i] > T(0) ? grad_out.values[i] : T(0);
    return grad_in;
}

template <class T>
void threshold_forward_inplace(std::vector<T>& v) {
    for (T& x : v) x = std::max(T(0), x);
}

template <class T>
std::vector<T> threshold_backward_vec(const std::vector<T>& input, const std::vector<T>& grad_out) {
    if (input.size() != grad_out.size())
        throw GeometryError("threshold_backward: shape mismatch");
    std::vector<T> grad_in(input.size());
    for (std::size_t i = 0; i < input.size(); ++i)
        grad_in[i] = input[i] > T(0) ? grad_out[i] : T(0);
    return grad_in;
}

template <class T>
struct LinearLayer {
    int in_units = 0;
    int out_units = 0;
    std::vector<T> weights; // [out][in]
    std::vector<T> bias;    // [out]

    LinearLayer() = default;
    LinearLayer(int in_u, int out_u)
        : in_units(in_u), out_units(out_u),
          weights(static_cast<std::size_t>(in_u) * out_u, T(0)), bias(out_u, T(0)) {
        if (in_u < 1 || out_u < 1)
            throw GeometryError("LinearLayer dimensions must be positive");
    }

    T& w(int o, int i) { return weights[static_cast<std::size_t>(o) * in_units + i]; }
    T w(int o, int i) const { return weights[static_cast<std::size_t>(o) * in_units + i]; }
};

template <class T>
std::vector<T> linear_forward(const std::vector<T>& input, const LinearLayer<T>& layer) {
    if (static_cast<int>(input.size()) != layer.in_units)
        throw GeometryError("linear_forward: input length mismatch");
    std::vector<T> out(layer.out_units);
    for (int o = 0; o < layer.out_units; ++o) {
        T acc = layer.bias[o];
        const T* row = layer.weights.data() + static_cast<std::size_t>(o) * layer.in_units;
        for (int i = 0; i < layer.in_units; ++i) acc += row[i] * input[i];
        out[o] = acc;
    }
    return out;
}

template <class T>
struct LinearGrads {
    std::vector<T> grad_input;
    std::vector<T> grad_weights;
    std::vector<T> grad_bias;
};

template <class T>
LinearGrads<T> linear_backward(const std::vector<T>& input, const LinearLayer<T>& layer,
                               const std::vector<T>& grad_out) {
    if (static_cast<int>(grad_out.size()) != layer.out_units)
        throw GeometryError("linear_backward: grad_out length mismatch");
    LinearGrads<T> g;
    g.grad_input.assign(layer.in_units, T(0));
    g.grad_weights.assign(layer.weights.size(), T(0));
    g.grad_bias = grad_out;
    for (int o = 0; o < layer.out_units; ++o) {
        T go = grad_out[o];
        const T* row = layer.weights.data() + static_cast<std::size_t>(o) * layer.in_units;
        T* wrow = g.grad_weights.data() + static_cast<std::size_t>(o) * layer.in_units;
        for (int i = 0; i < layer.in_units; ++i) {
            g.grad_input[i] += go * row[i];
            wrow[i] += go * input[i];
        }
    }
    return g;
}

enum class RunMode { train, eval };

// Inverted dropout: survivors are scaled by 1/(1-p) at train time so eval is
// the identity. The mask holds the applied per-element scale (0 or 1/(1-p)).
template <class T>
struct DropoutResult {
    std::vector<T> output;
    std::vector<T> mask;
};

template <class T>
DropoutResult<T> dropout(const std::vector<T>& input, double p, RunMode mode, RngStream& rng) {
    if (p < 0.0 || p >= 1.0) throw ConfigError("dropout: p must satisfy 0 <= p < 1");
    DropoutResult<T> r;
    r.output = input;
    r.mask.assign(input.size(), T(1));
    if (mode == RunMode::eval || p == 0.0) return r;
    const T scale = T(1.0 / (1.0 - p));
    for (std::size_t i = 0; i < input.size(); ++i) {
        if (rng.next_double() < p) {
            r.mask[i] = T(0);
            r.output[i] = T(0);
        } else {
            r.mask[i] = scale;
            r.output[i] = input[i] * scale;
        }
    }
    return r;
}

template <class T>
std::vector<T> dropout_backward(const std::vector<T>& mask, const std::vector<T>& grad_out) {
    if (mask.size() != grad_out.size())
        throw GeometryError("dropout_backward: shape mismatch");
    std::vector<T> grad_in(mask.size());
    for (std::size_t i = 0; i < mask.size(); ++i) grad_in[i] = mask[i] * grad_out[i];
    return grad_in;
}

template <class T>
struct SoftmaxNll {
    T loss;
    std::vector<T> grad_logits; // softmax(logits) - onehot(label)
};

// Negative log-likelihood of the labeled class under softmax, computed with
// max subtraction. label is 1-based.
template <class T>
SoftmaxNll<T> softmax_nll(const std::vector<T>& logits, int label) {
    int classes = static_cast<int>(logits.size());
    if (label < 1 || label > classes)
        throw DataError("softmax_nll: label out of range");
    T max_logit = *std::max_element(logits.begin(), logits.end());
    T sum = T(0);
    std::vector<T> probs(classes);
    for (int c = 0; c < classes; ++c) {
        probs[c] = std::exp(logits[c] - max_logit);
        sum += probs[c];
    }
    SoftmaxNll<T> r;
    r.grad_logits.resize(classes);
    for (int c = 0; c < classes; ++c) {
        probs[c] /= sum;
        r.grad_logits[c] = probs[c];
    }
    r.grad_logits[label - 1] -= T(1);
    r.loss = -(logits[label - 1] - max_logit - std::log(sum));
    return r;
}

} // namespace ccnet
