#include "ccnet/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace ccnet {

namespace {

// All n-grams of orders 1..ngram_max as space-joined lowercase keys.
std::vector<std::string> extract_ngrams(std::string_view text, int ngram_max) {
    std::vector<std::string> tokens = tokenize_lower(text);
    std::vector<std::string> grams;
    grams.reserve(tokens.size() * static_cast<std::size_t>(ngram_max));
    for (std::size_t start = 0; start < tokens.size(); ++start) {
        std::string key;
        for (int n = 1; n <= ngram_max && start + n <= tokens.size(); ++n) {
            if (n > 1) key += ' ';
            key += tokens[start + n - 1];
            grams.push_back(key);
        }
    }
    return grams;
}

double squared_distance(const std::vector<double>& a, const std::vector<double>& b) {
    double d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        double diff = a[i] - b[i];
        d += diff * diff;
    }
    return d;
}

} // namespace

Vocabulary build_vocab(const std::vector<std::string>& corpus, std::size_t max_features,
                       int ngram_max) {
    if (ngram_max < 1) throw ConfigError("build_vocab: ngram_max must be >= 1");
    if (corpus.empty()) throw DataError("build_vocab: empty corpus");
    std::unordered_map<std::string, Term> counts;
    for (const std::string& doc : corpus) {
        std::vector<std::string> grams = extract_ngrams(doc, ngram_max);
        std::unordered_map<std::string, long long> doc_counts;
        for (std::string& g : grams) ++doc_counts[std::move(g)];
        for (auto& [key, c] : doc_counts) {
            Term& t = counts[key];
            if (t.key.empty()) t.key = key;
            t.count += c;
            t.df += 1;
        }
    }
    std::vector<Term> terms;
    terms.reserve(counts.size());
    for (auto& [key, t] : counts) terms.push_back(std::move(t));
    std::sort(terms.begin(), terms.end(), [](const Term& a, const Term& b) {
        if (a.count != b.count) return a.count > b.count;
        return a.key < b.key;
    });
    if (terms.size() > max_features) terms.resize(max_features);

    Vocabulary vocab;
    vocab.ngram_max = ngram_max;
    vocab.terms = std::move(terms);
    vocab.index.reserve(vocab.terms.size());
    for (int i = 0; i < static_cast<int>(vocab.terms.size()); ++i)
        vocab.index.emplace(vocab.terms[i].key, i);
    return vocab;
}

double idf(const Vocabulary& vocab, const std::string& term, long long total_docs) {
    int pos = vocab.find(term);
    if (pos < 0) throw DataError("idf: unknown term `" + term + "`");
    return std::log(static_cast<double>(total_docs) /
                    static_cast<double>(vocab.terms[pos].df));
}

SparseVector featurize(std::string_view text, const Vocabulary& vocab, Weighting weighting,
                       long long total_docs) {
    std::unordered_map<int, double> acc;
    for (const std::string& gram : extract_ngrams(text, vocab.ngram_max)) {
        int pos = vocab.find(gram);
        if (pos >= 0) acc[pos] += 1.0;
    }
    SparseVector out;
    out.items.reserve(acc.size());
    for (auto& [idx, v] : acc) out.items.emplace_back(idx, v);
    std::sort(out.items.begin(), out.items.end());
    if (weighting == Weighting::tfidf && !out.items.empty()) {
        double max_value = 0.0;
        for (auto& [idx, v] : out.items) {
            v *= idf(vocab, vocab.terms[idx].key, total_docs);
            max_value = std::max(max_value, v);
        }
        if (max_value > 0.0)
            for (auto& [idx, v] : out.items) v /= max_value;
    }
    return out;
}

double kmeans_objective(const std::vector<std::vector<double>>& points,
                        const std::vector<std::vector<double>>& centroids) {
    double total = 0.0;
    for (const auto& p : points) {
        double best = std::numeric_limits<double>::infinity();
        for (const auto& c : centroids) best = std::min(best, squared_distance(p, c));
        total += best;
    }
    return total;
}

std::vector<std::vector<double>> kmeans(const std::vector<std::vector<double>>& points, int k,
                                        std::uint64_t seed, int max_iters) {
    if (k < 1 || static_cast<std::size_t>(k) > points.size())
        throw ConfigError("kmeans: k must satisfy 1 <= k <= number of points");
    const std::size_t n = points.size();
    const std::size_t dim = points[0].size();
    RngStream rng = RngStream::derive(seed, "kmeans");

    // Distance-weighted (k-means++ style) seeding.
    std::vector<std::vector<double>> centroids;
    centroids.reserve(k);
    centroids.push_back(points[rng.next_below(n)]);
    std::vector<double> dist2(n);
    for (int c = 1; c < k; ++c) {
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double best = std::numeric_limits<double>::infinity();
            for (const auto& cen : centroids)
                best = std::min(best, squared_distance(points[i], cen));
            dist2[i] = best;
            total += best;
        }
        std::size_t pick = 0;
        if (total > 0.0) {
            double u = rng.next_double() * total;
            double running = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                running += dist2[i];
                if (u < running) {
                    pick = i;
                    break;
                }
            }
        } else {
            pick = rng.next_below(n);
        }
        centroids.push_back(points[pick]);
    }

    std::vector<int> assignment(n, -1);
    for (int iter = 0; iter < max_iters; ++iter) {
        bool changed = false;
        for (std::size_t i = 0; i < n; ++i) {
            int best = 0;
            double best_d = squared_distance(points[i], centroids[0]);
            for (int c = 1; c < k; ++c) {
                double d = squared_distance(points[i], centroids[c]);
                if (d < best_d) {
                    best_d = d;
                    best = c;
                }
            }
            if (assignment[i] != best) {
                assignment[i] = best;
                changed = true;
            }
        }
        if (!changed && iter > 0) break;

        std::vector<std::vector<double>> sums(k, std::vector<double>(dim, 0.0));
        std::vector<std::size_t> sizes(k, 0);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t d = 0; d < dim; ++d) sums[assignment[i]][d] += points[i][d];
            ++sizes[assignment[i]];
        }
        for (int c = 0; c < k; ++c) {
            if (sizes[c] == 0) {
                // Re-seed the empty cluster from the farthest point.
                std::size_t far = 0;
                double far_d = -1.0;
                for (std::size_t i = 0; i < n; ++i) {
                    double d = squared_distance(points[i], centroids[assignment[i]]);
                    if (d > far_d) {
                        far_d = d;
                        far = i;
                    }
                }
                centroids[c] = points[far];
                continue;
            }
            for (std::size_t d = 0; d < dim; ++d)
                centroids[c][d] = sums[c][d] / static_cast<double>(sizes[c]);
        }
    }
    return centroids;
}

EmbeddingTable load_embeddings(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open embedding file: " + path);
    EmbeddingTable table;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string word;
        ls >> word;
        std::vector<double> vec;
        double v;
        while (ls >> v) vec.push_back(v);
        if (word.empty() || vec.empty())
            throw FormatError(path + ":" + std::to_string(line_no) + ": malformed embedding line");
        if (table.dim == 0) table.dim = static_cast<int>(vec.size());
        if (static_cast<int>(vec.size()) != table.dim)
            throw FormatError(path + ":" + std::to_string(line_no) +
                              ": embedding dimension mismatch");
        table.vectors[to_lower_ascii(word)] = std::move(vec);
    }
    return table;
}

SparseVector bag_of_means_featurize(std::string_view text, const EmbeddingTable& embeddings,
                                    const std::vector<std::vector<double>>& centroids) {
    if (centroids.empty()) throw ConfigError("bag_of_means_featurize: no centroids");
    std::unordered_map<int, double> acc;
    for (const std::string& token : tokenize_lower(text)) {
        auto it = embeddings.vectors.find(token);
        if (it == embeddings.vectors.end()) continue;
        int best = 0;
        double best_d = squared_distance(it->second, centroids[0]);
        for (int c = 1; c < static_cast<int>(centroids.size()); ++c) {
            double d = squared_distance(it->second, centroids[c]);
            if (d < best_d) {
                best_d = d;
                best = c;
            }
        }
        acc[best] += 1.0;
    }
    SparseVector out;
    out.items.assign(acc.begin(), acc.end());
    std::sort(out.items.begin(), out.items.end());
    return out;
}

std::vector<double> logreg_scores(const LogRegModel& model, const SparseVector& features) {
    std::vector<double> scores(model.bias);
    for (int c = 0; c < model.num_classes; ++c) {
        const double* row =
            model.weights.data() + static_cast<std::size_t>(c) * model.num_features;
        for (const auto& [idx, v] : features.items) {
            if (idx < 0 || idx >= model.num_features)
                throw GeometryError("logreg: feature index out of range");
            scores[c] += row[idx] * v;
        }
    }
    return scores;
}

double logreg_loss_grad(const LogRegModel& model, const std::vector<SparseVector>& features,
                        const std::vector<int>& labels, std::vector<double>& grad_w,
                        std::vector<double>& grad_b) {
    grad_w.assign(model.weights.size(), 0.0);
    grad_b.assign(model.bias.size(), 0.0);
    if (features.empty()) return 0.0;
    double loss_sum = 0.0;
    const double inv_n = 1.0 / static_cast<double>(features.size());
    for (std::size_t s = 0; s < features.size(); ++s) {
        std::vector<double> scores = logreg_scores(model, features[s]);
        SoftmaxNll<double> nll = softmax_nll(scores, labels[s]);
        loss_sum += nll.loss;
        for (int c = 0; c < model.num_classes; ++c) {
            double g = nll.grad_logits[c] * inv_n;
            grad_b[c] += g;
            double* row = grad_w.data() + static_cast<std::size_t>(c) * model.num_features;
            for (const auto& [idx, v] : features[s].items) row[idx] += g * v;
        }
    }
    return loss_sum * inv_n;
}

LogRegModel train_logreg(const std::vector<SparseVector>& features,
                         const std::vector<int>& labels, int num_classes, int num_features,
                         const TrainConfig& cfg) {
    validate(cfg);
    if (features.size() != labels.size())
        throw GeometryError("train_logreg: features/labels size mismatch");
    LogRegModel model;
    model.num_classes = num_classes;
    model.num_features = num_features;
    model.weights.assign(static_cast<std::size_t>(num_classes) * num_features, 0.0);
    model.bias.assign(num_classes, 0.0);
    std::vector<double> vel_w(model.weights.size(), 0.0), vel_b(model.bias.size(), 0.0);
    std::vector<double> grad_w, grad_b;

    // Same class-uniform epoch sampler as the ConvNet trainer; the Dataset
    // carries only labels here, texts stay empty.
    std::vector<Sample> shells(labels.size());
    for (std::size_t i = 0; i < labels.size(); ++i) shells[i].label = labels[i];
    Dataset dataset = make_dataset(std::move(shells), num_classes);

    std::vector<SparseVector> batch_features;
    std::vector<int> batch_labels;
    for (int epoch = 1; epoch <= cfg.total_epochs; ++epoch) {
        RngStream rng = RngStream::derive(cfg.seed, "logreg-epoch", epoch);
        double lr = lr_schedule(epoch, cfg);
        for (const auto& batch : sample_epoch(dataset, cfg, rng)) {
            batch_features.clear();
            batch_labels.clear();
            for (std::size_t idx : batch) {
                batch_features.push_back(features[idx]);
                batch_labels.push_back(labels[idx]);
            }
            logreg_loss_grad(model, batch_features, batch_labels, grad_w, grad_b);
            for (std::size_t i = 0; i < model.weights.size(); ++i) {
                vel_w[i] = cfg.momentum * vel_w[i] - lr * grad_w[i];
                model.weights[i] += vel_w[i];
            }
            for (std::size_t i = 0; i < model.bias.size(); ++i) {
                vel_b[i] = cfg.momentum * vel_b[i] - lr * grad_b[i];
                model.bias[i] += vel_b[i];
            }
        }
    }
    return model;
}

int predict_logreg(const LogRegModel& model, const SparseVector& features) {
    std::vector<double> scores = logreg_scores(model, features);
    int best = 0;
    for (int c = 1; c < model.num_classes; ++c)
        if (scores[c] > scores[best]) best = c;
    return best + 1;
}

} // namespace ccnet
