#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "ccnet/augment.hpp"
#include "ccnet/trainer.hpp"

namespace ccnet {

struct Term {
    std::string key;
    long long count = 0; // corpus occurrence count
    long long df = 0;    // number of documents containing the term
};

// Most frequent words or n-grams of a corpus, descending corpus count with
// lexicographic tie-break, capped at max_features.
struct Vocabulary {
    std::vector<Term> terms;
    std::unordered_map<std::string, int> index; // key -> position in terms
    int ngram_max = 1;

    int find(const std::string& key) const {
        auto it = index.find(key);
        return it == index.end() ? -1 : it->second;
    }
};

Vocabulary build_vocab(const std::vector<std::string>& corpus, std::size_t max_features,
                       int ngram_max);

// ln(total_docs / df(term)).
double idf(const Vocabulary& vocab, const std::string& term, long long total_docs);

enum class Weighting { counts, tfidf };

// (index, value) pairs with strictly increasing indices.
struct SparseVector {
    std::vector<std::pair<int, double>> items;
};

// counts mode: raw term counts. tfidf mode: count * idf, then every value is
// divided by the vector's own maximum (nonzero vectors end with max 1).
SparseVector featurize(std::string_view text, const Vocabulary& vocab, Weighting weighting,
                       long long total_docs);

// Lloyd's iterations from distance-weighted seeding; empty clusters are
// re-seeded from the point farthest from its assigned centroid.
std::vector<std::vector<double>> kmeans(const std::vector<std::vector<double>>& points, int k,
                                        std::uint64_t seed, int max_iters = 100);

double kmeans_objective(const std::vector<std::vector<double>>& points,
                        const std::vector<std::vector<double>>& centroids);

// word -> embedding vector, uniform dimensionality.
struct EmbeddingTable {
    int dim = 0;
    std::unordered_map<std::string, std::vector<double>> vectors;
};

// One word plus its decimals per whitespace-separated line, UTF-8.
EmbeddingTable load_embeddings(const std::string& path);

// Counts of nearest-centroid assignments (Euclidean, ties to the smallest
// centroid index) over the in-embedding tokens of the text.
SparseVector bag_of_means_featurize(std::string_view text, const EmbeddingTable& embeddings,
                                    const std::vector<std::vector<double>>& centroids);

struct LogRegModel {
    int num_classes = 0;
    int num_features = 0;
    std::vector<double> weights; // [class][feature]
    std::vector<double> bias;    // [class]
};

std::vector<double> logreg_scores(const LogRegModel& model, const SparseVector& features);

// Mean softmax negative log-likelihood over the given samples plus its exact
// gradient; grad buffers are overwritten.
double logreg_loss_grad(const LogRegModel& model, const std::vector<SparseVector>& features,
                        const std::vector<int>& labels, std::vector<double>& grad_w,
                        std::vector<double>& grad_b);

// Momentum SGD with the same class-uniform sampler and step schedule as the
// ConvNet trainer. Deterministic given cfg.seed.
LogRegModel train_logreg(const std::vector<SparseVector>& features,
                         const std::vector<int>& labels, int num_classes, int num_features,
                         const TrainConfig& cfg);

// Argmax of class scores, ties to the smallest class index; 1-based.
int predict_logreg(const LogRegModel& model, const SparseVector& features);

} // namespace ccnet
