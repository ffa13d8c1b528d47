#include "ccnet/report.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace ccnet {

namespace {

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

} // namespace

double relative_error_pct(double err_comparison, double err_ours) {
    if (err_comparison == 0.0)
        throw ConfigError("relative error undefined: comparison model error is zero");
    return (err_comparison - err_ours) / err_comparison * 100.0;
}

void write_metrics(const MetricsReport& report, const std::string& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw FormatError("cannot open metrics file for writing: " + path);
    out << "model " << report.model_name << "\n";
    out << "dataset " << report.dataset_name << "\n";
    out << "error_pct " << format_double(report.error_pct) << "\n";
    for (const auto& rec : report.log) {
        out << "epoch " << rec.epoch << " lr " << format_double(rec.lr) << " mean_loss "
            << format_double(rec.mean_loss);
        if (rec.eval_error) out << " eval_error " << format_double(*rec.eval_error);
        out << "\n";
    }
    if (!out) throw FormatError("failed writing metrics file: " + path);
}

MetricsReport read_metrics(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open metrics file: " + path);
    MetricsReport report;
    bool saw_error = false;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string key;
        ls >> key;
        if (key == "model") {
            ls >> std::ws;
            std::getline(ls, report.model_name);
        } else if (key == "dataset") {
            ls >> std::ws;
            std::getline(ls, report.dataset_name);
        } else if (key == "error_pct") {
            if (!(ls >> report.error_pct))
                throw FormatError(path + ":" + std::to_string(line_no) + ": bad error_pct");
            saw_error = true;
        } else if (key == "epoch") {
            EpochRecord rec;
            std::string field;
            if (!(ls >> rec.epoch))
                throw FormatError(path + ":" + std::to_string(line_no) + ": bad epoch line");
            while (ls >> field) {
                double value;
                if (!(ls >> value))
                    throw FormatError(path + ":" + std::to_string(line_no) + ": bad epoch line");
                if (field == "lr")
                    rec.lr = value;
                else if (field == "mean_loss")
                    rec.mean_loss = value;
                else if (field == "eval_error")
                    rec.eval_error = value;
                else
                    throw FormatError(path + ":" + std::to_string(line_no) +
                                      ": unknown epoch field `" + field + "`");
            }
            report.log.push_back(rec);
        } else {
            throw FormatError(path + ":" + std::to_string(line_no) + ": unknown key `" + key +
                              "`");
        }
    }
    if (!saw_error) throw FormatError(path + ": missing error_pct");
    return report;
}

} // namespace ccnet
