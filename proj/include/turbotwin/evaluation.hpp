#pragma once

#include <optional>
#include <string>
#include <vector>

#include "turbotwin/dataset.hpp"
#include "turbotwin/ngrc.hpp"

namespace twin {

/// Root-mean-square error normalized by the range of the ground truth.
double nrmse(ConstRefVec<double> predicted, ConstRefVec<double> truth);

/// Trains a readout on the train slices of ds: merges the train ranges
/// (junctions at every seam), fits normalization on that portion only,
/// builds features per contiguous segment and solves the ridge system.
TrainedModel fit(const RunDataset& ds, const SliceSpec& slices,
                 const std::vector<std::string>& input_channels,
                 const std::string& target_channel, const Metaparameters& metaparams);

struct EvalReport {
    double nrmse = 0.0;                  // pooled over test slices, physical units
    std::vector<double> per_slice_nrmse; // one per test slice
    Metaparameters metaparams;
    Index n_train = 0;
    Index n_test = 0;
    double train_seconds = 0.0;
    double inference_seconds_per_step = 0.0;
};

/// Scores the model over the test slices of ds (physical units). Delay
/// history is drawn only from within each slice; the first k*s steps of a
/// slice are warmup and are not scored.
EvalReport evaluate(const TrainedModel& model, const RunDataset& ds, const SliceSpec& slices);

/// Metaparameter grid, evaluated in lexicographic (lookback, skip, alpha)
/// order.
struct GridSpec {
    std::vector<int> lookbacks{1, 2, 3};
    std::vector<int> skips{1, 2, 3};
    std::vector<double> alphas{1e-8, 1e-7, 1e-6, 1e-5, 1e-4, 1e-3, 1e-2, 1e-1};

    void validate() const;
    std::size_t size() const { return lookbacks.size() * skips.size() * alphas.size(); }
};

struct GridRow {
    int index = 0;
    Metaparameters metaparams;
    Index feature_count = 0;
    bool ok = false;
    double nrmse = 0.0;     // valid when ok
    double train_seconds = 0.0;
    std::string error;      // set when !ok
};

struct GridResult {
    std::vector<GridRow> rows;
    int best_index = -1; // -1 when every combination failed
    const GridRow& best() const;
};

/// Trains and scores every combination. Failures are recorded per row, not
/// fatal. Winner: smallest pooled test NRMSE, ties broken by fewer features,
/// then smaller alpha.
GridResult grid_search(const RunDataset& ds, const SliceSpec& slices,
                       const std::vector<std::string>& input_channels,
                       const std::string& target_channel, const GridSpec& grid);

struct BenchmarkBudgets {
    double train_seconds = 0.1;      // ceiling for one training solve
    double per_step_seconds = 100e-6; // ceiling for one inference step
};

struct BenchmarkReport {
    Index n_train = 0;
    Index n_steps = 0;
    double train_seconds_median = 0.0;    // median of 31 runs
    double per_step_seconds_median = 0.0; // median of 31 full-run predictions
    BenchmarkBudgets budgets;
    bool train_within_budget = false;
    bool inference_within_budget = false;
};

/// Median-of-31 wall-clock timing of the training solve and of per-step
/// inference over ds, treating all of ds as one training block.
BenchmarkReport benchmark(const TrainedModel& model, const RunDataset& ds,
                          const BenchmarkBudgets& budgets = {});

} // namespace twin
