#pragma once

#include <cstdint>
#include <istream>
#include <optional>
#include <string>

#include "ccnet/trainer.hpp"

namespace ccnet {

enum class DataFormat {
    csv, // RFC-4180-style: column 1 = 1-based class index, remaining columns joined
    tsv, // line-delimited `label TAB text`, for synthetic corpora
};

struct DatasetSpec {
    std::string path;
    int num_classes = 0;
    DataFormat format = DataFormat::csv;
    std::string field_join = " ";
    std::optional<std::size_t> max_samples;
};

Dataset load_dataset(const DatasetSpec& spec);
Dataset parse_csv(std::istream& in, const DatasetSpec& spec, const std::string& source_name);
Dataset parse_tsv(std::istream& in, const DatasetSpec& spec, const std::string& source_name);

// Deterministic stratified split preserving class proportions within one
// sample per class; `fraction` is the holdout share.
std::pair<Dataset, Dataset> split_holdout(const Dataset& dataset, double fraction,
                                          std::uint64_t seed);

} // namespace ccnet
