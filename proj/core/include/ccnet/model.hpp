#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "ccnet/alphabet.hpp"
#include "ccnet/nn_ops.hpp"
#include "ccnet/rng.hpp"

namespace ccnet {

enum class Variant : std::uint8_t {
    large = 0,
    small = 1,
    // Reduced stack (2 conv layers, 8 features) that exercises every
    // production code path at a size where finite differences are feasible.
    tiny = 2,
};

struct ModelConfig {
    Variant variant = Variant::small;
    Alphabet alphabet;
    int l0 = 1014;
    int num_classes = 0;
    double dropout_p = 0.5;
};

// Frame count surviving the six convolutional layers: (l0 - 96) / 27.
// Rejects l0 values where the division is not exact.
inline int output_frame_length(int l0) {
    if (l0 <= 96 || (l0 - 96) % 27 != 0)
        throw ConfigError("l0 must satisfy (l0 - 96) divisible by 27 with positive quotient");
    return (l0 - 96) / 27;
}

template <class T>
struct ConvUnit {
    ConvKernel<T> kernel;
    std::optional<PoolSpec> pool;
};

// View over one named parameter tensor with its gradient and momentum
// velocity buffers. Shapes of the three buffers are always identical.
template <class T>
struct ParamRef {
    std::string name;
    std::vector<int> shape;
    std::vector<T>* value;
    std::vector<T>* grad;
    std::vector<T>* velocity;
};

template <class T>
class Model {
public:
    ModelConfig config;
    std::vector<ConvUnit<T>> convs;
    std::vector<LinearLayer<T>> linears; // threshold+dropout after all but the last

    Model() = default;

    std::vector<ParamRef<T>> params() {
        std::vector<ParamRef<T>> out;
        for (std::size_t c = 0; c < convs.size(); ++c) {
            auto& k = convs[c].kernel;
            std::string base = "conv" + std::to_string(c + 1);
            out.push_back({base + ".weight",
                           {k.out_features, k.in_features, k.kernel_size},
                           &k.weights, &conv_w_grad_[c], &conv_w_vel_[c]});
            out.push_back({base + ".bias", {k.out_features}, &k.bias, &conv_b_grad_[c],
                           &conv_b_vel_[c]});
        }
        for (std::size_t l = 0; l < linears.size(); ++l) {
            auto& lin = linears[l];
            std::string base = "fc" + std::to_string(l + 1);
            out.push_back({base + ".weight", {lin.out_units, lin.in_units}, &lin.weights,
                           &lin_w_grad_[l], &lin_w_vel_[l]});
            out.push_back({base + ".bias", {lin.out_units}, &lin.bias, &lin_b_grad_[l],
                           &lin_b_vel_[l]});
        }
        return out;
    }

    // Chained frame count after the convolutional stack for this model's l0.
    int conv_stack_frames() const {
        int frames = config.l0;
        for (const auto& unit : convs) {
            frames = conv_output_length(frames, unit.kernel.kernel_size, unit.kernel.stride);
            if (unit.pool)
                frames = conv_output_length(frames, unit.pool->kernel_size, unit.pool->stride);
        }
        return frames;
    }

    std::size_t parameter_count() const {
        std::size_t n = 0;
        for (const auto& unit : convs)
            n += unit.kernel.weights.size() + unit.kernel.bias.size();
        for (const auto& lin : linears) n += lin.weights.size() + lin.bias.size();
        return n;
    }

    // Logits per sample. Train mode records the activation tape needed by
    // backward and draws dropout masks from rng; eval mode is deterministic.
    std::vector<std::vector<T>> forward(const std::vector<FeatureMap<T>>& batch, RunMode mode,
                                        RngStream* rng = nullptr) {
        if (mode == RunMode::train && rng == nullptr)
            throw ConfigError("train-mode forward requires a random stream");
        std::vector<std::vector<T>> logits;
        logits.reserve(batch.size());
        if (mode == RunMode::train) {
            tapes_.clear();
            tapes_.reserve(batch.size());
        }
        for (const auto& sample : batch) {
            if (sample.features != config.alphabet.size() || sample.frames != config.l0)
                throw GeometryError("forward: input shape does not match model config");
            SampleTape tape;
            logits.push_back(forward_one(sample, mode, rng, mode == RunMode::train ? &tape : nullptr));
            if (mode == RunMode::train) tapes_.push_back(std::move(tape));
        }
        return logits;
    }

    // Mean softmax negative log-likelihood over the batch; fills gradient
    // buffers with d(mean loss)/d(parameter). Requires a preceding
    // train-mode forward on the same batch.
    T backward(const std::vector<int>& labels) {
        if (tapes_.empty() || labels.size() != tapes_.size())
            throw GeometryError("backward: no matching forward state for this batch");
        zero_grad();
        T total_loss = T(0);
        const T inv_batch = T(1) / static_cast<T>(labels.size());
        for (std::size_t s = 0; s < tapes_.size(); ++s) {
            SoftmaxNll<T> nll = softmax_nll(tapes_[s].logits, labels[s]);
            total_loss += nll.loss;
            for (T& g : nll.grad_logits) g *= inv_batch;
            backward_one(tapes_[s], nll.grad_logits);
        }
        return total_loss * inv_batch;
    }

    void zero_grad() {
        for (auto& v : conv_w_grad_) std::fill(v.begin(), v.end(), T(0));
        for (auto& v : conv_b_grad_) std::fill(v.begin(), v.end(), T(0));
        for (auto& v : lin_w_grad_) std::fill(v.begin(), v.end(), T(0));
        for (auto& v : lin_b_grad_) std::fill(v.begin(), v.end(), T(0));
    }

    void allocate_buffers() {
        conv_w_grad_.clear();
        conv_b_grad_.clear();
        conv_w_vel_.clear();
        conv_b_vel_.clear();
        for (auto& unit : convs) {
            conv_w_grad_.emplace_back(unit.kernel.weights.size(), T(0));
            conv_b_grad_.emplace_back(unit.kernel.bias.size(), T(0));
            conv_w_vel_.emplace_back(unit.kernel.weights.size(), T(0));
            conv_b_vel_.emplace_back(unit.kernel.bias.size(), T(0));
        }
        lin_w_grad_.clear();
        lin_b_grad_.clear();
        lin_w_vel_.clear();
        lin_b_vel_.clear();
        for (auto& lin : linears) {
            lin_w_grad_.emplace_back(lin.weights.size(), T(0));
            lin_b_grad_.emplace_back(lin.bias.size(), T(0));
            lin_w_vel_.emplace_back(lin.weights.size(), T(0));
            lin_b_vel_.emplace_back(lin.bias.size(), T(0));
        }
    }

private:
    struct SampleTape {
        std::vector<FeatureMap<T>> conv_in;   // input to each conv
        std::vector<FeatureMap<T>> conv_pre;  // conv output, pre-threshold
        std::vector<FeatureMap<T>> conv_act;  // post-threshold (pool input)
        std::vector<std::vector<int>> pool_argmax;
        std::vector<int> pool_in_frames;
        std::vector<std::vector<T>> lin_in;   // input to each linear
        std::vector<std::vector<T>> lin_pre;  // linear output, pre-threshold
        std::vector<std::vector<T>> drop_mask;
        std::vector<T> logits;
    };

    std::vector<T> forward_one(const FeatureMap<T>& sample, RunMode mode, RngStream* rng,
                               SampleTape* tape) {
        FeatureMap<T> x = sample;
        for (auto& unit : convs) {
            if (tape) tape->conv_in.push_back(x);
            FeatureMap<T> pre = temporal_conv_forward(x, unit.kernel);
            FeatureMap<T> act = threshold_forward(pre);
            if (tape) {
                tape->conv_pre.push_back(pre);
                tape->conv_act.push_back(act);
            }
            if (unit.pool) {
                PoolResult<T> pr = temporal_maxpool_forward(act, *unit.pool);
                if (tape) {
                    tape->pool_argmax.push_back(std::move(pr.argmax));
                    tape->pool_in_frames.push_back(act.frames);
                }
                x = std::move(pr.output);
            } else {
                if (tape) {
                    tape->pool_argmax.emplace_back();
                    tape->pool_in_frames.push_back(act.frames);
                }
                x = std::move(act);
            }
        }
        // Flatten feature-major: all frames of feature 1, then feature 2, ...
        std::vector<T> flat = std::move(x.values);
        for (std::size_t l = 0; l < linears.size(); ++l) {
            if (tape) tape->lin_in.push_back(flat);
            std::vector<T> pre = linear_forward(flat, linears[l]);
            if (l + 1 == linears.size()) {
                if (tape) tape->logits = pre;
                return pre;
            }
            if (tape) tape->lin_pre.push_back(pre);
            threshold_forward_inplace(pre);
            DropoutResult<T> dr =
                mode == RunMode::train
                    ? dropout(pre, config.dropout_p, RunMode::train, *rng)
                    : dropout(pre, config.dropout_p, RunMode::eval, *rng_placeholder());
            if (tape) tape->drop_mask.push_back(std::move(dr.mask));
            flat = std::move(dr.output);
        }
        throw ConfigError("model has no linear layers");
    }

    void backward_one(const SampleTape& tape, const std::vector<T>& grad_logits) {
        std::vector<T> grad = grad_logits;
        for (int l = static_cast<int>(linears.size()) - 1; l >= 0; --l) {
            LinearGrads<T> lg = linear_backward(tape.lin_in[l], linears[l], grad);
            accumulate(lin_w_grad_[l], lg.grad_weights);
            accumulate(lin_b_grad_[l], lg.grad_bias);
            grad = std::move(lg.grad_input);
            if (l > 0) {
                grad = dropout_backward(tape.drop_mask[l - 1], grad);
                grad = threshold_backward_vec(tape.lin_pre[l - 1], grad);
            }
        }
        // Un-flatten into the conv-stack output shape.
        int out_frames = tape.pool_in_frames.empty()
                             ? config.l0
                             : static_cast<int>(grad.size()) / convs.back().kernel.out_features;
        FeatureMap<T> gmap(convs.back().kernel.out_features, out_frames);
        gmap.values = std::move(grad);
        for (int c = static_cast<int>(convs.size()) - 1; c >= 0; --c) {
            if (convs[c].pool)
                gmap = temporal_maxpool_backward(tape.pool_argmax[c], gmap,
                                                 tape.pool_in_frames[c]);
            gmap = threshold_backward(tape.conv_pre[c], gmap);
            ConvGrads<T> cg = temporal_conv_backward(tape.conv_in[c], convs[c].kernel, gmap);
            accumulate(conv_w_grad_[c], cg.grad_weights);
            accumulate(conv_b_grad_[c], cg.grad_bias);
            gmap = std::move(cg.grad_input);
        }
    }

    static void accumulate(std::vector<T>& into, const std::vector<T>& from) {
        for (std::size_t i = 0; i < into.size(); ++i) into[i] += from[i];
    }

    static RngStream* rng_placeholder() {
        static RngStream unused(0);
        return &unused;
    }

    std::vector<SampleTape> tapes_;
    std::vector<std::vector<T>> conv_w_grad_, conv_b_grad_, conv_w_vel_, conv_b_vel_;
    std::vector<std::vector<T>> lin_w_grad_, lin_b_grad_, lin_w_vel_, lin_b_vel_;
};

// Build the 9-layer stack (kernels 7,7,3,3,3,3; non-overlapping pools of
// size 3 after conv layers 1, 2 and 6; two hidden linear layers) or the tiny
// test stack. Weights are Gaussian with std 0.02 (large) / 0.05 (small, tiny),
// biases zero; identical seeds give bit-identical parameters.
template <class T>
Model<T> build_model(const ModelConfig& config, std::uint64_t seed) {
    if (config.alphabet.size() < 1) throw ConfigError("build_model: empty alphabet");
    if (config.num_classes < 2) throw ConfigError("build_model: num_classes must be >= 2");
    if (config.dropout_p < 0.0 || config.dropout_p >= 1.0)
        throw ConfigError("build_model: dropout_p must satisfy 0 <= p < 1");

    Model<T> model;
    model.config = config;
    const int m = config.alphabet.size();
    double init_std;

    auto conv = [](int in_f, int out_f, int k, std::optional<PoolSpec> pool) {
        ConvUnit<T> u;
        u.kernel = ConvKernel<T>(in_f, out_f, k, 1);
        u.pool = pool;
        return u;
    };
    const PoolSpec pool3{3, 3};

    if (config.variant == Variant::tiny) {
        // the narrow stack needs a larger init scale than large/small or
        // its logits (and hence gradients) vanish
        init_std = 0.3;
        const int features = 8, hidden = 16;
        model.convs.push_back(conv(m, features, 3, pool3));
        model.convs.push_back(conv(features, features, 3, pool3));
        int frames = model.conv_stack_frames(); // throws on invalid l0
        model.linears.emplace_back(features * frames, hidden);
        model.linears.emplace_back(hidden, hidden);
        model.linears.emplace_back(hidden, config.num_classes);
    } else {
        const bool large = config.variant == Variant::large;
        init_std = large ? 0.02 : 0.05;
        const int features = large ? 1024 : 256;
        const int hidden = large ? 2048 : 1024;
        int l6 = output_frame_length(config.l0);
        model.convs.push_back(conv(m, features, 7, pool3));
        model.convs.push_back(conv(features, features, 7, pool3));
        model.convs.push_back(conv(features, features, 3, std::nullopt));
        model.convs.push_back(conv(features, features, 3, std::nullopt));
        model.convs.push_back(conv(features, features, 3, std::nullopt));
        model.convs.push_back(conv(features, features, 3, pool3));
        if (model.conv_stack_frames() != l6)
            throw ConfigError("conv stack frame count does not match (l0 - 96) / 27");
        model.linears.emplace_back(features * l6, hidden);
        model.linears.emplace_back(hidden, hidden);
        model.linears.emplace_back(hidden, config.num_classes);
    }

    RngStream rng = RngStream::derive(seed, "init");
    for (auto& unit : model.convs)
        for (T& w : unit.kernel.weights)
            w = static_cast<T>(rng.next_gaussian(0.0, init_std));
    for (auto& lin : model.linears)
        for (T& w : lin.weights) w = static_cast<T>(rng.next_gaussian(0.0, init_std));

    model.allocate_buffers();
    return model;
}

} // namespace ccnet
