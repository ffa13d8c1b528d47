#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "ccnet/model.hpp"

namespace ccnet {

struct TrainConfig {
    int batch_size = 128;
    double momentum = 0.9;
    double initial_lr = 0.01;
    int halve_every = 3;   // epochs between step-size halvings
    int num_halvings = 10; // schedule floor after this many halvings
    int epoch_size = 0;    // minibatches per epoch; 0 -> ceil(samples / batch)
    int total_epochs = 0;
    std::uint64_t seed = 0;
};

inline void validate(const TrainConfig& cfg) {
    if (cfg.batch_size < 1) throw ConfigError("batch_size must be >= 1");
    if (cfg.momentum < 0.0 || cfg.momentum >= 1.0)
        throw ConfigError("momentum must satisfy 0 <= momentum < 1");
    if (cfg.initial_lr <= 0.0) throw ConfigError("initial_lr must be positive");
    if (cfg.halve_every < 1) throw ConfigError("halve_every must be >= 1");
    if (cfg.num_halvings < 0) throw ConfigError("num_halvings must be >= 0");
    if (cfg.total_epochs < 0) throw ConfigError("total_epochs must be >= 0");
}

struct Sample {
    int label = 0; // 1-based
    std::string text;
};

struct Dataset {
    std::vector<Sample> samples;
    int num_classes = 0;
    std::vector<std::vector<std::size_t>> per_class; // indices, one list per class
};

inline Dataset make_dataset(std::vector<Sample> samples, int num_classes) {
    if (num_classes < 1) throw DataError("num_classes must be >= 1");
    Dataset d;
    d.num_classes = num_classes;
    d.per_class.resize(num_classes);
    for (std::size_t i = 0; i < samples.size(); ++i) {
        int label = samples[i].label;
        if (label < 1 || label > num_classes)
            throw DataError("sample " + std::to_string(i + 1) + ": label " +
                            std::to_string(label) + " outside 1.." +
                            std::to_string(num_classes));
        d.per_class[label - 1].push_back(i);
    }
    d.samples = std::move(samples);
    return d;
}

// initial_lr / 2^min(floor((epoch-1)/halve_every), num_halvings); epoch 1-based.
inline double lr_schedule(int epoch, const TrainConfig& cfg) {
    int halvings = std::min((epoch - 1) / cfg.halve_every, cfg.num_halvings);
    return cfg.initial_lr / std::exp2(halvings);
}

// Index minibatches for one epoch: each draw picks a class uniformly, then a
// sample uniformly within that class, with replacement.
inline std::vector<std::vector<std::size_t>> sample_epoch(const Dataset& dataset,
                                                          const TrainConfig& cfg,
                                                          RngStream& rng) {
    for (int c = 0; c < dataset.num_classes; ++c)
        if (dataset.per_class[c].empty())
            throw DataError("class " + std::to_string(c + 1) + " has no samples");
    int epoch_size = cfg.epoch_size;
    if (epoch_size <= 0)
        epoch_size = static_cast<int>(
            (dataset.samples.size() + cfg.batch_size - 1) / cfg.batch_size);
    std::vector<std::vector<std::size_t>> batches(epoch_size);
    for (auto& batch : batches) {
        batch.reserve(cfg.batch_size);
        for (int b = 0; b < cfg.batch_size; ++b) {
            const auto& members =
                dataset.per_class[rng.next_below(dataset.num_classes)];
            batch.push_back(members[rng.next_below(members.size())]);
        }
    }
    return batches;
}

// v <- momentum * v - lr * grad; theta <- theta + v.
template <class T>
void sgd_step(Model<T>& model, double lr, double momentum) {
    for (auto& p : model.params()) {
        auto& value = *p.value;
        auto& grad = *p.grad;
        auto& vel = *p.velocity;
        for (std::size_t i = 0; i < value.size(); ++i) {
            vel[i] = static_cast<T>(momentum) * vel[i] - static_cast<T>(lr) * grad[i];
            value[i] += vel[i];
        }
    }
}

// Test error in percent: fraction of samples whose argmax logit differs from
// the label, times 100. Argmax ties resolve to the smallest class index.
template <class T>
double evaluate(Model<T>& model, const Dataset& dataset) {
    if (dataset.samples.empty()) return 0.0;
    std::size_t wrong = 0;
    for (const auto& sample : dataset.samples) {
        FeatureMap<T> input =
            quantize<T>(sample.text, model.config.alphabet, model.config.l0);
        std::vector<std::vector<T>> logits = model.forward({input}, RunMode::eval);
        int best = 0;
        for (int c = 1; c < static_cast<int>(logits[0].size()); ++c)
            if (logits[0][c] > logits[0][best]) best = c;
        if (best + 1 != sample.label) ++wrong;
    }
    return 100.0 * static_cast<double>(wrong) / static_cast<double>(dataset.samples.size());
}

struct EpochRecord {
    int epoch = 0;
    double lr = 0.0;
    double mean_loss = 0.0;
    std::optional<double> eval_error;
};

using TrainLog = std::vector<EpochRecord>;

// Text-to-text transform applied to each sampled training text before
// quantization (thesaurus augmentation); gets a per-draw random stream.
using Augmenter = std::function<std::string(const std::string&, RngStream&)>;

// The full recipe: per epoch, sample class-uniform minibatches, optionally
// augment, quantize, forward/backward, momentum-SGD step at the scheduled
// step size. Deterministic given cfg.seed.
template <class T>
TrainLog train(Model<T>& model, const Dataset& dataset, const TrainConfig& cfg,
               const Augmenter* augmenter = nullptr, const Dataset* holdout = nullptr) {
    validate(cfg);
    if (dataset.num_classes != model.config.num_classes)
        throw ConfigError("dataset class count does not match model");
    TrainLog log;
    std::uint64_t draw_counter = 0;
    for (int epoch = 1; epoch <= cfg.total_epochs; ++epoch) {
        RngStream sample_rng = RngStream::derive(cfg.seed, "epoch-sample", epoch);
        RngStream dropout_rng = RngStream::derive(cfg.seed, "dropout", epoch);
        auto batches = sample_epoch(dataset, cfg, sample_rng);
        double lr = lr_schedule(epoch, cfg);
        double loss_sum = 0.0;
        for (const auto& batch : batches) {
            std::vector<FeatureMap<T>> inputs;
            std::vector<int> labels;
            inputs.reserve(batch.size());
            labels.reserve(batch.size());
            for (std::size_t idx : batch) {
                const Sample& s = dataset.samples[idx];
                std::string text = s.text;
                if (augmenter) {
                    RngStream aug_rng = RngStream::derive(cfg.seed, "augment", draw_counter);
                    text = (*augmenter)(text, aug_rng);
                }
                ++draw_counter;
                inputs.push_back(quantize<T>(text, model.config.alphabet, model.config.l0));
                labels.push_back(s.label);
            }
            model.forward(inputs, RunMode::train, &dropout_rng);
            loss_sum += static_cast<double>(model.backward(labels));
            sgd_step(model, lr, cfg.momentum);
        }
        EpochRecord rec;
        rec.epoch = epoch;
        rec.lr = lr;
        rec.mean_loss = batches.empty() ? 0.0 : loss_sum / static_cast<double>(batches.size());
        if (holdout) rec.eval_error = evaluate(model, *holdout);
        log.push_back(rec);
    }
    return log;
}

} // namespace ccnet
