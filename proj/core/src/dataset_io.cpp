#include "ccnet/dataset_io.hpp"

#include <cmath>
#include <fstream>

#include "ccnet/rng.hpp"

namespace ccnet {

namespace {

// One RFC-4180 record (double-quoted fields, doubled quotes as escapes,
// newlines allowed inside quotes). Returns false at end of input.
bool read_csv_record(std::istream& in, std::vector<std::string>& fields, std::size_t& line_no,
                     const std::string& source) {
    fields.clear();
    int c = in.peek();
    if (c == EOF) return false;
    std::string field;
    bool in_quotes = false;
    bool any = false;
    while ((c = in.get()) != EOF) {
        any = true;
        char ch = static_cast<char>(c);
        if (in_quotes) {
            if (ch == '"') {
                if (in.peek() == '"') {
                    field += '"';
                    in.get();
                } else {
                    in_quotes = false;
                }
            } else {
                if (ch == '\n') ++line_no;
                field += ch;
            }
        } else if (ch == '"') {
            if (!field.empty())
                throw FormatError(source + ": row at line " + std::to_string(line_no) +
                                  ": quote inside unquoted field");
            in_quotes = true;
        } else if (ch == ',') {
            fields.push_back(std::move(field));
            field.clear();
        } else if (ch == '\r') {
            if (in.peek() == '\n') in.get();
            ++line_no;
            break;
        } else if (ch == '\n') {
            ++line_no;
            break;
        } else {
            field += ch;
        }
    }
    if (in_quotes)
        throw FormatError(source + ": row at line " + std::to_string(line_no) +
                          ": unterminated quoted field");
    if (!any) return false;
    fields.push_back(std::move(field));
    return true;
}

int parse_label(const std::string& s, std::size_t row, int num_classes,
                const std::string& source) {
    std::size_t consumed = 0;
    int label = 0;
    try {
        label = std::stoi(s, &consumed);
    } catch (const std::exception&) {
        throw FormatError(source + ": row " + std::to_string(row) + ": malformed label `" + s +
                          "`");
    }
    if (consumed != s.size())
        throw FormatError(source + ": row " + std::to_string(row) + ": malformed label `" + s +
                          "`");
    if (label < 1 || label > num_classes)
        throw DataError(source + ": row " + std::to_string(row) + ": label " +
                        std::to_string(label) + " outside 1.." + std::to_string(num_classes));
    return label;
}

} // namespace

Dataset parse_csv(std::istream& in, const DatasetSpec& spec, const std::string& source_name) {
    std::vector<Sample> samples;
    std::vector<std::string> fields;
    std::size_t line_no = 1;
    std::size_t row = 0;
    while (read_csv_record(in, fields, line_no, source_name)) {
        ++row;
        if (fields.size() == 1 && fields[0].empty()) continue; // blank line
        if (fields.empty())
            throw FormatError(source_name + ": row " + std::to_string(row) + ": empty record");
        Sample s;
        s.label = parse_label(fields[0], row, spec.num_classes, source_name);
        std::string text;
        for (std::size_t i = 1; i < fields.size(); ++i) {
            if (i > 1) text += spec.field_join;
            text += fields[i];
        }
        s.text = std::move(text);
        samples.push_back(std::move(s));
        if (spec.max_samples && samples.size() >= *spec.max_samples) break;
    }
    return make_dataset(std::move(samples), spec.num_classes);
}

Dataset parse_tsv(std::istream& in, const DatasetSpec& spec, const std::string& source_name) {
    std::vector<Sample> samples;
    std::string line;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty()) continue;
        std::size_t tab = line.find('\t');
        if (tab == std::string::npos)
            throw FormatError(source_name + ": row " + std::to_string(row) +
                              ": expected `label TAB text`");
        Sample s;
        s.label = parse_label(line.substr(0, tab), row, spec.num_classes, source_name);
        s.text = line.substr(tab + 1);
        samples.push_back(std::move(s));
        if (spec.max_samples && samples.size() >= *spec.max_samples) break;
    }
    return make_dataset(std::move(samples), spec.num_classes);
}

Dataset load_dataset(const DatasetSpec& spec) {
    if (spec.num_classes < 2) throw ConfigError("dataset spec: num_classes must be >= 2");
    std::ifstream in(spec.path, std::ios::binary);
    if (!in) throw FormatError("cannot open dataset file: " + spec.path);
    return spec.format == DataFormat::csv ? parse_csv(in, spec, spec.path)
                                          : parse_tsv(in, spec, spec.path);
}

std::pair<Dataset, Dataset> split_holdout(const Dataset& dataset, double fraction,
                                          std::uint64_t seed) {
    if (fraction <= 0.0 || fraction >= 1.0)
        throw ConfigError("split_holdout: fraction must lie strictly between 0 and 1");
    std::vector<Sample> train_samples, holdout_samples;
    RngStream rng = RngStream::derive(seed, "holdout-split");
    for (int c = 0; c < dataset.num_classes; ++c) {
        std::vector<std::size_t> indices = dataset.per_class[c];
        if (indices.size() < 2)
            throw DataError("split_holdout: class " + std::to_string(c + 1) +
                            " has fewer than 2 samples");
        for (std::size_t i = indices.size(); i > 1; --i)
            std::swap(indices[i - 1], indices[rng.next_below(i)]);
        std::size_t hold = static_cast<std::size_t>(
            std::llround(fraction * static_cast<double>(indices.size())));
        hold = std::min(std::max<std::size_t>(hold, 1), indices.size() - 1);
        for (std::size_t i = 0; i < indices.size(); ++i)
            (i < hold ? holdout_samples : train_samples).push_back(dataset.samples[indices[i]]);
    }
    return {make_dataset(std::move(train_samples), dataset.num_classes),
            make_dataset(std::move(holdout_samples), dataset.num_classes)};
}

} // namespace ccnet
