#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "ccnet/dataset_io.hpp"
#include "ccnet/report.hpp"

namespace ccnet {

// Everything a `train` run needs; may be populated from flags or a JSON
// manifest file. One master seed per manifest; module-level streams are
// derived by mixing (master, purpose tag, index).
struct RunManifest {
    // large | small | tiny | bow | bow-tfidf | ngrams | ngrams-tfidf | bag-of-means
    std::string model = "small";
    std::string alphabet = "folded"; // folded | full
    DatasetSpec data;
    std::optional<DatasetSpec> test_data;
    TrainConfig train;
    int l0 = 1014;
    double dropout_p = 0.5;
    double holdout_fraction = 0.0; // 0 -> no holdout split
    std::string thesaurus_path;    // non-empty enables augmentation
    double aug_p = 0.5;
    double aug_q = 0.5;
    std::size_t max_features = 50000; // 500000 for n-gram models
    int ngram_max = 1;
    std::string embedding_path; // bag-of-means
    int num_means = 5000;
    int kmeans_iters = 100;
    std::string model_out;
    std::string metrics_out;
};

RunManifest load_manifest(const std::string& path);
void validate_manifest(const RunManifest& manifest);

CaseMode parse_case_mode(const std::string& name);
DataFormat parse_data_format(const std::string& name);

// Train per the manifest (ConvNet or baseline), write the model file and the
// metrics file, and return the report. error_pct comes from the test set when
// given, else the holdout, else the training set.
MetricsReport cmd_train(const RunManifest& manifest);

// Evaluate a saved model on a dataset; writes the metrics file when
// metrics_out is non-empty. embedding_path is required only for saved
// bag-of-means models.
MetricsReport cmd_eval(const std::string& model_path, const DatasetSpec& data,
                       const std::string& metrics_out = "",
                       const std::string& embedding_path = "");

// (err_A - err_B) / err_A in percent, reading the errors from metrics files.
double cmd_compare(const std::string& metrics_a_path, const std::string& metrics_b_path);

// Line-by-line thesaurus augmentation; each line gets a stream derived from
// (seed, line index), so the output is order-independent reproducible.
void cmd_augment(const std::string& input_path, const std::string& output_path,
                 const std::string& thesaurus_path, double p, double q, std::uint64_t seed);

// Build a vocabulary over a dataset and write per-document sparse features.
void cmd_featurize(const DatasetSpec& data, const std::string& mode, std::size_t max_features,
                   int ngram_max, const std::string& output_path);

// Debug: write the one-hot matrix of a string, one feature row of 0/1 per line.
void cmd_quantize_dump(const std::string& text, const std::string& alphabet_mode, int l0,
                       std::ostream& out);

} // namespace ccnet
