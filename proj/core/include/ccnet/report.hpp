#pragma once

#include <string>

#include "ccnet/trainer.hpp"

namespace ccnet {

struct MetricsReport {
    std::string model_name;
    std::string dataset_name;
    double error_pct = 0.0; // in [0, 100]
    TrainLog log;
};

// Relative error in percent: (err_comparison - err_ours) / err_comparison.
// Positive means ours is better.
double relative_error_pct(double err_comparison, double err_ours);

// Line-delimited structured text: `model`, `dataset`, `error_pct` lines, then
// one `epoch <i> lr <v> mean_loss <v> [eval_error <v>]` line per epoch.
// Deliberately free of wall-clock so reruns are byte-identical.
void write_metrics(const MetricsReport& report, const std::string& path);
MetricsReport read_metrics(const std::string& path);

} // namespace ccnet
