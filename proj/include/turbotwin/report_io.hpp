#pragma once

#include <string>

#include "turbotwin/calibration.hpp"
#include "turbotwin/evaluation.hpp"

namespace twin {

/// JSON documents for the reporting surfaces. Wall-clock measurements always
/// live under a "timings" key so reproducibility checks can strip them.
std::string eval_report_json(const EvalReport& report);
std::string grid_report_json(const GridResult& result);
std::string benchmark_report_json(const BenchmarkReport& report);
std::string calibration_json(const CalibrationFit& fit);

/// One CSV row per grid combination:
/// index,lookback,skip,alpha,features,status,nrmse
std::string grid_results_csv(const GridResult& result);

/// Plot-ready CSV: time,truth,prediction,label. Prediction cells are blank
/// on warmup steps; label is the slice label covering the row, blank when
/// uncovered.
std::string prediction_csv(const RunDataset& ds, const std::string& target_channel,
                           const RunPrediction& prediction, const SliceSpec* slices = nullptr);

CalibrationFit load_calibration_json(const std::string& path);

} // namespace twin
