// ccnet: character-level convolutional text classifier and baselines.
//
// Subcommands: train, eval, augment, compare, featurize, quantize-dump.
// Exit codes: 0 success, 1 validation error, 2 runtime error, 3 data format.

#include <cstdio>
#include <iostream>

#include <CLI11.hpp>

#include "ccnet/commands.hpp"

namespace {

int run(int argc, char** argv) {
    CLI::App app{"character-level ConvNet text classifier"};
    app.require_subcommand(1);

    // train
    auto* train = app.add_subcommand("train", "train a ConvNet or baseline model");
    std::string manifest_path;
    ccnet::RunManifest manifest;
    std::string data_format = "csv";
    std::string test_path;
    std::size_t max_samples = 0;
    train->add_option("--manifest", manifest_path, "JSON manifest supplying all flags");
    train->add_option("--model", manifest.model,
                      "large|small|tiny|bow|bow-tfidf|ngrams|ngrams-tfidf|bag-of-means");
    train->add_option("--alphabet", manifest.alphabet, "folded|full");
    train->add_option("--data", manifest.data.path, "training data file");
    train->add_option("--classes", manifest.data.num_classes, "number of classes");
    train->add_option("--data-format", data_format, "csv|tsv");
    train->add_option("--field-join", manifest.data.field_join,
                      "string joining CSV text columns");
    train->add_option("--max-samples", max_samples, "cap on loaded training samples");
    train->add_option("--test-data", test_path, "test data file (same format)");
    train->add_option("--epochs", manifest.train.total_epochs, "total training epochs");
    train->add_option("--batch-size", manifest.train.batch_size, "minibatch size");
    train->add_option("--epoch-size", manifest.train.epoch_size,
                      "minibatches per epoch (0 = dataset size / batch)");
    train->add_option("--lr", manifest.train.initial_lr, "initial step size");
    train->add_option("--momentum", manifest.train.momentum, "SGD momentum");
    train->add_option("--halve-every", manifest.train.halve_every,
                      "epochs between step-size halvings");
    train->add_option("--num-halvings", manifest.train.num_halvings, "schedule floor");
    train->add_option("--seed", manifest.train.seed, "master seed");
    train->add_option("--l0", manifest.l0, "input frame count");
    train->add_option("--dropout", manifest.dropout_p, "dropout probability");
    train->add_option("--holdout", manifest.holdout_fraction, "held-out fraction");
    train->add_option("--thesaurus", manifest.thesaurus_path,
                      "thesaurus file (enables augmentation)");
    train->add_option("--p", manifest.aug_p, "geometric parameter for replacement count");
    train->add_option("--q", manifest.aug_q, "geometric parameter for synonym rank");
    train->add_option("--max-features", manifest.max_features, "vocabulary cap");
    train->add_option("--ngram-max", manifest.ngram_max, "n-gram order cap");
    train->add_option("--embeddings", manifest.embedding_path, "embedding table file");
    train->add_option("--num-means", manifest.num_means, "bag-of-means cluster count");
    train->add_option("--out", manifest.model_out, "model output path");
    train->add_option("--metrics", manifest.metrics_out, "metrics output path");

    // eval
    auto* eval = app.add_subcommand("eval", "evaluate a saved model");
    std::string eval_model, eval_metrics, eval_embeddings;
    ccnet::DatasetSpec eval_data;
    std::string eval_format = "csv";
    eval->add_option("--model", eval_model, "model file")->required();
    eval->add_option("--data", eval_data.path, "dataset file")->required();
    eval->add_option("--classes", eval_data.num_classes, "number of classes")->required();
    eval->add_option("--data-format", eval_format, "csv|tsv");
    eval->add_option("--field-join", eval_data.field_join, "string joining CSV text columns");
    eval->add_option("--metrics", eval_metrics, "metrics output path");
    eval->add_option("--embeddings", eval_embeddings,
                     "embedding table (bag-of-means models)");

    // augment
    auto* augment = app.add_subcommand("augment", "thesaurus-augment a text file line by line");
    std::string aug_in, aug_out, aug_thesaurus;
    double aug_p = 0.5, aug_q = 0.5;
    std::uint64_t aug_seed = 0;
    augment->add_option("--input", aug_in, "input text file")->required();
    augment->add_option("--output", aug_out, "output text file")->required();
    augment->add_option("--thesaurus", aug_thesaurus, "thesaurus file")->required();
    augment->add_option("--p", aug_p, "geometric parameter for replacement count");
    augment->add_option("--q", aug_q, "geometric parameter for synonym rank");
    augment->add_option("--seed", aug_seed, "master seed");

    // compare
    auto* compare = app.add_subcommand(
        "compare", "relative error between a comparison model (A) and ours (B)");
    std::string cmp_a, cmp_b;
    compare->add_option("--comparison", cmp_a, "metrics file of the comparison model")
        ->required();
    compare->add_option("--ours", cmp_b, "metrics file of our model")->required();

    // featurize
    auto* featurize = app.add_subcommand("featurize", "build a vocabulary and write features");
    ccnet::DatasetSpec feat_data;
    std::string feat_format = "csv", feat_mode = "counts", feat_out;
    std::size_t feat_max = 50000;
    int feat_ngram = 1;
    featurize->add_option("--data", feat_data.path, "dataset file")->required();
    featurize->add_option("--classes", feat_data.num_classes, "number of classes")->required();
    featurize->add_option("--data-format", feat_format, "csv|tsv");
    featurize->add_option("--mode", feat_mode, "counts|tfidf");
    featurize->add_option("--max-features", feat_max, "vocabulary cap");
    featurize->add_option("--ngram-max", feat_ngram, "n-gram order cap");
    featurize->add_option("--out", feat_out, "output file")->required();

    // quantize-dump
    auto* qdump = app.add_subcommand("quantize-dump",
                                     "write the one-hot matrix of a string (debug)");
    std::string qd_text, qd_alphabet = "folded";
    int qd_l0 = 1014;
    qdump->add_option("--text", qd_text, "input string")->required();
    qdump->add_option("--alphabet", qd_alphabet, "folded|full");
    qdump->add_option("--l0", qd_l0, "frame count");

    CLI11_PARSE(app, argc, argv);

    if (*train) {
        if (!manifest_path.empty()) {
            // A manifest supplies the whole configuration.
            manifest = ccnet::load_manifest(manifest_path);
        } else {
            manifest.data.format = ccnet::parse_data_format(data_format);
            if (max_samples > 0) manifest.data.max_samples = max_samples;
            if (!test_path.empty()) {
                ccnet::DatasetSpec t = manifest.data;
                t.path = test_path;
                t.max_samples.reset();
                manifest.test_data = t;
            }
        }
        ccnet::MetricsReport report = ccnet::cmd_train(manifest);
        std::printf("%s on %s: error %.2f\n", report.model_name.c_str(),
                    report.dataset_name.c_str(), report.error_pct);
    } else if (*eval) {
        eval_data.format = ccnet::parse_data_format(eval_format);
        ccnet::cmd_eval(eval_model, eval_data, eval_metrics, eval_embeddings);
    } else if (*augment) {
        ccnet::cmd_augment(aug_in, aug_out, aug_thesaurus, aug_p, aug_q, aug_seed);
    } else if (*compare) {
        ccnet::cmd_compare(cmp_a, cmp_b);
    } else if (*featurize) {
        feat_data.format = ccnet::parse_data_format(feat_format);
        ccnet::cmd_featurize(feat_data, feat_mode, feat_max, feat_ngram, feat_out);
    } else if (*qdump) {
        ccnet::cmd_quantize_dump(qd_text, qd_alphabet, qd_l0, std::cout);
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const ccnet::ConfigError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    } catch (const ccnet::GeometryError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    } catch (const ccnet::FormatError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    } catch (const ccnet::DataError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
}
