#include "ccnet/commands.hpp"

#include <algorithm>
#include <bit>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iostream>

#include "ccnet/augment.hpp"
#include "ccnet/baselines.hpp"
#include "ccnet/serialize.hpp"

#include <json.hpp>

namespace ccnet {

namespace {

constexpr char kBaselineMagic[8] = {'C', 'C', 'N', 'E', 'T', 'L', 'R', 'B'};
constexpr std::uint32_t kBaselineVersion = 1;

void write_u32(std::ostream& out, std::uint32_t v) {
    char b[4] = {static_cast<char>(v & 0xFF), static_cast<char>((v >> 8) & 0xFF),
                 static_cast<char>((v >> 16) & 0xFF), static_cast<char>((v >> 24) & 0xFF)};
    out.write(b, 4);
}

std::uint32_t read_u32(std::istream& in) {
    unsigned char b[4];
    in.read(reinterpret_cast<char*>(b), 4);
    if (!in) throw FormatError("corrupt model file: truncated integer");
    return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
           (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

void write_u64(std::ostream& out, std::uint64_t v) {
    write_u32(out, static_cast<std::uint32_t>(v & 0xFFFFFFFFULL));
    write_u32(out, static_cast<std::uint32_t>(v >> 32));
}

std::uint64_t read_u64(std::istream& in) {
    std::uint64_t lo = read_u32(in);
    std::uint64_t hi = read_u32(in);
    return lo | (hi << 32);
}

void write_f64(std::ostream& out, double v) { write_u64(out, std::bit_cast<std::uint64_t>(v)); }
double read_f64(std::istream& in) { return std::bit_cast<double>(read_u64(in)); }

void write_string(std::ostream& out, const std::string& s) {
    write_u32(out, static_cast<std::uint32_t>(s.size()));
    out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string read_string(std::istream& in) {
    std::uint32_t len = read_u32(in);
    std::string s(len, '\0');
    in.read(s.data(), len);
    if (!in) throw FormatError("corrupt model file: truncated string");
    return s;
}

bool is_conv_variant(const std::string& model) {
    return model == "large" || model == "small" || model == "tiny";
}

bool is_baseline(const std::string& model) {
    return model == "bow" || model == "bow-tfidf" || model == "ngrams" ||
           model == "ngrams-tfidf" || model == "bag-of-means";
}

Variant parse_variant(const std::string& name) {
    if (name == "large") return Variant::large;
    if (name == "small") return Variant::small;
    if (name == "tiny") return Variant::tiny;
    throw ConfigError("unknown ConvNet variant: " + name);
}

// Everything a trained baseline needs at evaluation time.
struct BaselineModel {
    std::string kind;
    int ngram_max = 1;
    long long total_docs = 0;
    Vocabulary vocab;                            // word / n-gram models
    std::string embedding_path;                  // bag-of-means
    std::vector<std::vector<double>> centroids;  // bag-of-means
    LogRegModel logreg;

    SparseVector featurize_text(std::string_view text, const EmbeddingTable* embeddings) const {
        if (kind == "bag-of-means") {
            if (!embeddings)
                throw ConfigError("bag-of-means evaluation requires an embedding table");
            return bag_of_means_featurize(text, *embeddings, centroids);
        }
        Weighting w = (kind == "bow-tfidf" || kind == "ngrams-tfidf") ? Weighting::tfidf
                                                                      : Weighting::counts;
        return featurize(text, vocab, w, total_docs);
    }
};

void save_baseline(const BaselineModel& model, const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw FormatError("cannot open model file for writing: " + path);
    out.write(kBaselineMagic, sizeof(kBaselineMagic));
    write_u32(out, kBaselineVersion);
    write_string(out, model.kind);
    write_u32(out, static_cast<std::uint32_t>(model.ngram_max));
    write_u64(out, static_cast<std::uint64_t>(model.total_docs));
    write_u32(out, static_cast<std::uint32_t>(model.vocab.terms.size()));
    for (const auto& t : model.vocab.terms) {
        write_string(out, t.key);
        write_u64(out, static_cast<std::uint64_t>(t.count));
        write_u64(out, static_cast<std::uint64_t>(t.df));
    }
    write_string(out, model.embedding_path);
    write_u32(out, static_cast<std::uint32_t>(model.centroids.size()));
    write_u32(out, model.centroids.empty()
                       ? 0
                       : static_cast<std::uint32_t>(model.centroids[0].size()));
    for (const auto& c : model.centroids)
        for (double v : c) write_f64(out, v);
    write_u32(out, static_cast<std::uint32_t>(model.logreg.num_classes));
    write_u32(out, static_cast<std::uint32_t>(model.logreg.num_features));
    for (double v : model.logreg.weights) write_f64(out, v);
    for (double v : model.logreg.bias) write_f64(out, v);
    if (!out) throw FormatError("failed writing model file: " + path);
}

BaselineModel load_baseline(std::istream& in, const std::string& path) {
    std::uint32_t version = read_u32(in);
    if (version != kBaselineVersion)
        throw FormatError(path + ": unsupported baseline format version");
    BaselineModel model;
    model.kind = read_string(in);
    model.ngram_max = static_cast<int>(read_u32(in));
    model.total_docs = static_cast<long long>(read_u64(in));
    std::uint32_t term_count = read_u32(in);
    model.vocab.ngram_max = model.ngram_max;
    model.vocab.terms.reserve(term_count);
    for (std::uint32_t i = 0; i < term_count; ++i) {
        Term t;
        t.key = read_string(in);
        t.count = static_cast<long long>(read_u64(in));
        t.df = static_cast<long long>(read_u64(in));
        model.vocab.index.emplace(t.key, static_cast<int>(i));
        model.vocab.terms.push_back(std::move(t));
    }
    model.embedding_path = read_string(in);
    std::uint32_t k = read_u32(in);
    std::uint32_t dim = read_u32(in);
    model.centroids.assign(k, std::vector<double>(dim));
    for (auto& c : model.centroids)
        for (double& v : c) v = read_f64(in);
    model.logreg.num_classes = static_cast<int>(read_u32(in));
    model.logreg.num_features = static_cast<int>(read_u32(in));
    model.logreg.weights.resize(static_cast<std::size_t>(model.logreg.num_classes) *
                                model.logreg.num_features);
    model.logreg.bias.resize(model.logreg.num_classes);
    for (double& v : model.logreg.weights) v = read_f64(in);
    for (double& v : model.logreg.bias) v = read_f64(in);
    if (!in) throw FormatError(path + ": truncated baseline model file");
    return model;
}

double baseline_error_pct(const BaselineModel& model, const Dataset& dataset,
                          const EmbeddingTable* embeddings) {
    if (dataset.samples.empty()) return 0.0;
    std::size_t wrong = 0;
    for (const auto& s : dataset.samples)
        if (predict_logreg(model.logreg, model.featurize_text(s.text, embeddings)) != s.label)
            ++wrong;
    return 100.0 * static_cast<double>(wrong) / static_cast<double>(dataset.samples.size());
}

MetricsReport train_baseline(const RunManifest& manifest, const Dataset& train_set,
                             const Dataset& eval_set) {
    BaselineModel model;
    model.kind = manifest.model;
    const bool ngram_model = manifest.model.rfind("ngrams", 0) == 0;
    model.ngram_max = ngram_model ? (manifest.ngram_max > 1 ? manifest.ngram_max : 5)
                                  : 1;
    model.total_docs = static_cast<long long>(train_set.samples.size());

    std::vector<std::string> corpus;
    corpus.reserve(train_set.samples.size());
    for (const auto& s : train_set.samples) corpus.push_back(s.text);

    EmbeddingTable embeddings;
    const EmbeddingTable* embeddings_ptr = nullptr;
    int num_features = 0;
    if (manifest.model == "bag-of-means") {
        if (manifest.embedding_path.empty())
            throw ConfigError("bag-of-means requires an embedding file");
        embeddings = load_embeddings(manifest.embedding_path);
        embeddings_ptr = &embeddings;
        model.embedding_path = manifest.embedding_path;
        // Cluster the embeddings of words appearing more than 5 times in the
        // training subset.
        std::unordered_map<std::string, long long> word_counts;
        for (const auto& doc : corpus)
            for (const auto& tok : tokenize_lower(doc)) ++word_counts[tok];
        std::vector<std::string> kept;
        for (const auto& [word, count] : word_counts)
            if (count > 5 && embeddings.vectors.count(word)) kept.push_back(word);
        std::sort(kept.begin(), kept.end());
        if (kept.empty()) throw DataError("bag-of-means: no words pass the frequency filter");
        std::vector<std::vector<double>> points;
        points.reserve(kept.size());
        for (const auto& w : kept) points.push_back(embeddings.vectors.at(w));
        int k = std::min<int>(manifest.num_means, static_cast<int>(points.size()));
        model.centroids = kmeans(points, k, manifest.train.seed, manifest.kmeans_iters);
        num_features = k;
    } else {
        std::size_t cap = manifest.max_features;
        if (ngram_model && cap == 50000) cap = 500000; // wider default for n-grams
        model.vocab = build_vocab(corpus, cap, model.ngram_max);
        num_features = static_cast<int>(model.vocab.terms.size());
    }

    std::vector<SparseVector> features;
    std::vector<int> labels;
    features.reserve(train_set.samples.size());
    for (const auto& s : train_set.samples) {
        features.push_back(model.featurize_text(s.text, embeddings_ptr));
        labels.push_back(s.label);
    }
    model.logreg =
        train_logreg(features, labels, train_set.num_classes, num_features, manifest.train);

    MetricsReport report;
    report.model_name = manifest.model;
    report.dataset_name = manifest.data.path;
    report.error_pct = baseline_error_pct(model, eval_set, embeddings_ptr);
    if (!manifest.model_out.empty()) save_baseline(model, manifest.model_out);
    return report;
}

MetricsReport train_convnet(const RunManifest& manifest, const Dataset& train_set,
                            const Dataset& eval_set, const Dataset* holdout) {
    ModelConfig cfg;
    cfg.variant = parse_variant(manifest.model);
    cfg.alphabet = build_alphabet(parse_case_mode(manifest.alphabet));
    cfg.l0 = manifest.l0;
    cfg.num_classes = train_set.num_classes;
    cfg.dropout_p = manifest.dropout_p;
    Model<float> model = build_model<float>(cfg, manifest.train.seed);

    Augmenter augmenter;
    const Augmenter* augmenter_ptr = nullptr;
    Thesaurus thesaurus;
    if (!manifest.thesaurus_path.empty()) {
        thesaurus = load_thesaurus(manifest.thesaurus_path);
        AugmentConfig aug_cfg{manifest.aug_p, manifest.aug_q};
        aug_cfg.validate();
        augmenter = [&thesaurus, aug_cfg](const std::string& text, RngStream& rng) {
            return augment(text, thesaurus, aug_cfg, rng);
        };
        augmenter_ptr = &augmenter;
    }

    MetricsReport report;
    report.model_name = manifest.model;
    report.dataset_name = manifest.data.path;
    report.log = train(model, train_set, manifest.train, augmenter_ptr, holdout);
    report.error_pct = evaluate(model, eval_set);
    if (!manifest.model_out.empty()) save_model(model, manifest.model_out);
    return report;
}

} // namespace

CaseMode parse_case_mode(const std::string& name) {
    if (name == "folded") return CaseMode::fold_lower;
    if (name == "full") return CaseMode::distinguish;
    throw ConfigError("unknown alphabet mode: " + name + " (expected folded or full)");
}

DataFormat parse_data_format(const std::string& name) {
    if (name == "csv") return DataFormat::csv;
    if (name == "tsv") return DataFormat::tsv;
    throw ConfigError("unknown data format: " + name + " (expected csv or tsv)");
}

RunManifest load_manifest(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open manifest file: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(path + ": " + e.what());
    }
    RunManifest m;
    try {
        m.model = j.value("model", m.model);
        m.alphabet = j.value("alphabet", m.alphabet);
        m.data.path = j.value("data", "");
        m.data.num_classes = j.value("classes", 0);
        m.data.format = parse_data_format(j.value("data_format", "csv"));
        m.data.field_join = j.value("field_join", " ");
        if (j.contains("max_samples")) m.data.max_samples = j["max_samples"].get<std::size_t>();
        if (j.contains("test_data")) {
            DatasetSpec t = m.data;
            t.path = j["test_data"].get<std::string>();
            t.max_samples.reset();
            m.test_data = t;
        }
        m.train.batch_size = j.value("batch_size", m.train.batch_size);
        m.train.momentum = j.value("momentum", m.train.momentum);
        m.train.initial_lr = j.value("lr", m.train.initial_lr);
        m.train.halve_every = j.value("halve_every", m.train.halve_every);
        m.train.num_halvings = j.value("num_halvings", m.train.num_halvings);
        m.train.epoch_size = j.value("epoch_size", m.train.epoch_size);
        m.train.total_epochs = j.value("epochs", m.train.total_epochs);
        m.train.seed = j.value("seed", m.train.seed);
        m.l0 = j.value("l0", m.l0);
        m.dropout_p = j.value("dropout", m.dropout_p);
        m.holdout_fraction = j.value("holdout", m.holdout_fraction);
        m.thesaurus_path = j.value("thesaurus", m.thesaurus_path);
        m.aug_p = j.value("p", m.aug_p);
        m.aug_q = j.value("q", m.aug_q);
        m.max_features = j.value("max_features", m.max_features);
        m.ngram_max = j.value("ngram_max", m.ngram_max);
        m.embedding_path = j.value("embeddings", m.embedding_path);
        m.num_means = j.value("num_means", m.num_means);
        m.kmeans_iters = j.value("kmeans_iters", m.kmeans_iters);
        m.model_out = j.value("model_out", m.model_out);
        m.metrics_out = j.value("metrics_out", m.metrics_out);
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(path + ": " + e.what());
    }
    return m;
}

void validate_manifest(const RunManifest& manifest) {
    if (!is_conv_variant(manifest.model) && !is_baseline(manifest.model))
        throw ConfigError("unknown model kind: " + manifest.model);
    if (manifest.data.path.empty()) throw ConfigError("no training data path given");
    if (manifest.data.num_classes < 2) throw ConfigError("classes must be >= 2");
    if (manifest.train.total_epochs < 1) throw ConfigError("epochs must be >= 1");
    validate(manifest.train);
    if (is_conv_variant(manifest.model) && manifest.model != "tiny")
        output_frame_length(manifest.l0); // throws naming the (l0-96)/27 constraint
    if (manifest.holdout_fraction < 0.0 || manifest.holdout_fraction >= 1.0)
        throw ConfigError("holdout fraction must lie in [0, 1)");
    if (!manifest.model_out.empty() && manifest.model_out == manifest.metrics_out)
        throw ConfigError("model and metrics output paths collide");
    parse_case_mode(manifest.alphabet);
}

MetricsReport cmd_train(const RunManifest& manifest) {
    validate_manifest(manifest);
    Dataset full = load_dataset(manifest.data);
    Dataset train_set;
    Dataset holdout;
    const Dataset* holdout_ptr = nullptr;
    if (manifest.holdout_fraction > 0.0) {
        auto parts = split_holdout(full, manifest.holdout_fraction, manifest.train.seed);
        train_set = std::move(parts.first);
        holdout = std::move(parts.second);
        holdout_ptr = &holdout;
    } else {
        train_set = std::move(full);
    }
    Dataset test_set;
    const Dataset* eval_ptr = &train_set;
    if (manifest.test_data) {
        test_set = load_dataset(*manifest.test_data);
        eval_ptr = &test_set;
    } else if (holdout_ptr) {
        eval_ptr = holdout_ptr;
    }

    MetricsReport report = is_conv_variant(manifest.model)
                               ? train_convnet(manifest, train_set, *eval_ptr, holdout_ptr)
                               : train_baseline(manifest, train_set, *eval_ptr);
    if (!manifest.metrics_out.empty()) write_metrics(report, manifest.metrics_out);
    return report;
}

MetricsReport cmd_eval(const std::string& model_path, const DatasetSpec& data,
                       const std::string& metrics_out, const std::string& embedding_path) {
    std::ifstream probe(model_path, std::ios::binary);
    if (!probe) throw FormatError("cannot open model file: " + model_path);
    char magic[8] = {};
    probe.read(magic, sizeof(magic));
    if (!probe) throw FormatError(model_path + ": corrupt model file: truncated magic");

    Dataset dataset = load_dataset(data);
    MetricsReport report;
    report.dataset_name = data.path;
    if (std::memcmp(magic, kBaselineMagic, sizeof(kBaselineMagic)) == 0) {
        BaselineModel model = load_baseline(probe, model_path);
        EmbeddingTable embeddings;
        const EmbeddingTable* embeddings_ptr = nullptr;
        if (model.kind == "bag-of-means") {
            std::string path =
                !embedding_path.empty() ? embedding_path : model.embedding_path;
            embeddings = load_embeddings(path);
            embeddings_ptr = &embeddings;
        }
        report.model_name = model.kind;
        report.error_pct = baseline_error_pct(model, dataset, embeddings_ptr);
    } else {
        Model<float> model = load_model(model_path);
        report.model_name = model.config.variant == Variant::large   ? "large"
                            : model.config.variant == Variant::small ? "small"
                                                                     : "tiny";
        report.error_pct = evaluate(model, dataset);
    }
    std::printf("%.2f\n", report.error_pct);
    if (!metrics_out.empty()) write_metrics(report, metrics_out);
    return report;
}

double cmd_compare(const std::string& metrics_a_path, const std::string& metrics_b_path) {
    MetricsReport a = read_metrics(metrics_a_path);
    MetricsReport b = read_metrics(metrics_b_path);
    if (!a.dataset_name.empty() && !b.dataset_name.empty() &&
        a.dataset_name != b.dataset_name)
        throw ConfigError("compare: reports are for different datasets (" + a.dataset_name +
                          " vs " + b.dataset_name + ")");
    double rel = relative_error_pct(a.error_pct, b.error_pct);
    std::printf("%.2f\n", rel);
    return rel;
}

void cmd_augment(const std::string& input_path, const std::string& output_path,
                 const std::string& thesaurus_path, double p, double q, std::uint64_t seed) {
    Thesaurus thesaurus = load_thesaurus(thesaurus_path);
    AugmentConfig cfg{p, q};
    cfg.validate();
    std::ifstream in(input_path);
    if (!in) throw FormatError("cannot open input file: " + input_path);
    std::ofstream out(output_path, std::ios::trunc);
    if (!out) throw FormatError("cannot open output file for writing: " + output_path);
    std::string line;
    std::uint64_t line_index = 0;
    while (std::getline(in, line)) {
        RngStream rng = RngStream::derive(seed, "augment-line", line_index++);
        out << augment(line, thesaurus, cfg, rng) << "\n";
    }
    if (!out) throw FormatError("failed writing output file: " + output_path);
}

void cmd_featurize(const DatasetSpec& data, const std::string& mode, std::size_t max_features,
                   int ngram_max, const std::string& output_path) {
    Weighting weighting;
    if (mode == "counts")
        weighting = Weighting::counts;
    else if (mode == "tfidf")
        weighting = Weighting::tfidf;
    else
        throw ConfigError("unknown featurize mode: " + mode + " (expected counts or tfidf)");
    Dataset dataset = load_dataset(data);
    std::vector<std::string> corpus;
    corpus.reserve(dataset.samples.size());
    for (const auto& s : dataset.samples) corpus.push_back(s.text);
    Vocabulary vocab = build_vocab(corpus, max_features, ngram_max);

    std::ofstream out(output_path, std::ios::trunc);
    if (!out) throw FormatError("cannot open output file for writing: " + output_path);
    out << "ccnet-features 1\n";
    out << "mode " << mode << " ngram_max " << ngram_max << " terms " << vocab.terms.size()
        << " docs " << dataset.samples.size() << "\n";
    for (const auto& t : vocab.terms)
        out << "term " << t.key << "\t" << t.count << "\t" << t.df << "\n";
    char buf[32];
    for (const auto& s : dataset.samples) {
        out << s.label;
        SparseVector v = featurize(s.text, vocab, weighting,
                                   static_cast<long long>(dataset.samples.size()));
        for (const auto& [idx, value] : v.items) {
            std::snprintf(buf, sizeof(buf), "%.17g", value);
            out << " " << idx << ":" << buf;
        }
        out << "\n";
    }
    if (!out) throw FormatError("failed writing output file: " + output_path);
}

void cmd_quantize_dump(const std::string& text, const std::string& alphabet_mode, int l0,
                       std::ostream& out) {
    Alphabet alphabet = build_alphabet(parse_case_mode(alphabet_mode));
    FeatureMap<float> matrix = quantize<float>(text, alphabet, l0);
    for (int i = 0; i < matrix.features; ++i) {
        for (int x = 0; x < matrix.frames; ++x)
            out.put(matrix.at(i, x) != 0.0f ? '1' : '0');
        out.put('\n');
    }
}

} // namespace ccnet
