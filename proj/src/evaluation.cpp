#include "turbotwin/evaluation.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

namespace twin {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

Matd input_block(const RunDataset& ds, const std::vector<std::string>& channels) {
    Matd block(static_cast<Index>(channels.size()), ds.length());
    for (std::size_t c = 0; c < channels.size(); ++c)
        block.row(static_cast<Index>(c)) = ds.channel(channels[c]);
    return block;
}

double median(std::vector<double> xs) {
    std::sort(xs.begin(), xs.end());
    return xs[xs.size() / 2];
}

} // namespace

double nrmse(ConstRefVec<double> predicted, ConstRefVec<double> truth) {
    if (predicted.size() != truth.size())
        throw ConfigError("nrmse: length mismatch (" + std::to_string(predicted.size()) + " vs "
                          + std::to_string(truth.size()) + ")");
    if (truth.size() < 2) throw ConfigError("nrmse: need at least 2 points");
    const double range = truth.maxCoeff() - truth.minCoeff();
    if (!(range > 0.0)) throw DataError("nrmse: ground truth has degenerate range");
    return std::sqrt((predicted - truth).squaredNorm() / static_cast<double>(truth.size()))
           / range;
}

TrainedModel fit(const RunDataset& ds, const SliceSpec& slices,
                 const std::vector<std::string>& input_channels,
                 const std::string& target_channel, const Metaparameters& metaparams) {
    metaparams.validate();
    slices.validate(ds.length());
    if (input_channels.empty()) throw ConfigError("no input channels selected");

    std::vector<RunPart> train_parts;
    for (const Slice& s : slices.with_label(SliceLabel::train))
        train_parts.push_back({&ds, s.begin, s.end});
    if (train_parts.empty()) throw ConfigError("slice spec contains no training slices");
    const RunDataset train_ds = merge_runs(train_parts);

    std::vector<std::string> fitted = input_channels;
    fitted.push_back(target_channel);
    NormalizationSpec norm = fit_normalization(train_ds, fitted);
    const RunDataset normalized = apply_normalization(train_ds, norm, fitted);

    const Matd inputs = input_block(normalized, input_channels);
    const auto target = normalized.channel(target_channel);

    // One feature block per contiguous segment so no delay window straddles
    // a slice seam or run junction.
    const Index warmup = metaparams.warmup();
    std::vector<Matd> feature_blocks;
    std::vector<Vecd> target_blocks;
    Index n_train = 0;
    for (const auto& [begin, end] : normalized.segments()) {
        if (end - begin <= warmup) continue;
        auto fm = build_features<double>(inputs.middleCols(begin, end - begin), metaparams);
        target_blocks.emplace_back(
            target.segment(begin + fm.first_valid, fm.n_valid()).transpose());
        n_train += fm.n_valid();
        feature_blocks.push_back(std::move(fm.features));
    }
    if (n_train == 0)
        throw ConfigError("every training slice is shorter than the lookback window ("
                          + std::to_string(warmup + 1) + " samples)");

    Matd features(feature_dim(static_cast<Index>(input_channels.size()), metaparams.lookback),
                  n_train);
    Vecd targets(n_train);
    Index offset = 0;
    for (std::size_t i = 0; i < feature_blocks.size(); ++i) {
        features.middleCols(offset, feature_blocks[i].cols()) = feature_blocks[i];
        targets.segment(offset, target_blocks[i].size()) = target_blocks[i];
        offset += feature_blocks[i].cols();
    }

    const auto t0 = Clock::now();
    Vecd w = train_readout<double>(features, targets, metaparams.alpha);
    const double train_seconds = seconds_since(t0);

    TrainedModel model;
    model.w_out = std::move(w);
    model.metaparams = metaparams;
    model.input_channels = input_channels;
    model.target_channel = target_channel;
    model.normalization = std::move(norm);
    model.training_stats = {n_train, train_seconds};
    return model;
}

EvalReport evaluate(const TrainedModel& model, const RunDataset& ds, const SliceSpec& slices) {
    model.validate();
    slices.validate(ds.length());
    const auto test_slices = slices.with_label(SliceLabel::test);
    if (test_slices.empty()) throw ConfigError("slice spec contains no test slices");

    const Index warmup = model.metaparams.warmup();
    const RunDataset normalized =
        apply_normalization(ds, model.normalization, model.input_channels);
    const Matd inputs = input_block(normalized, model.input_channels);
    const auto truth_all = ds.channel(model.target_channel);

    EvalReport report;
    report.metaparams = model.metaparams;
    report.n_train = model.training_stats.n_train;
    report.train_seconds = model.training_stats.train_seconds;

    std::vector<Vecd> predicted_chunks, truth_chunks;
    Index n_test = 0;
    double inference_seconds = 0.0;
    for (std::size_t i = 0; i < test_slices.size(); ++i) {
        const Slice& slice = test_slices[i];
        if (slice.end - slice.begin < warmup + 2)
            throw ConfigError("test slice #" + std::to_string(i) + " ["
                              + std::to_string(slice.begin) + ", " + std::to_string(slice.end)
                              + ") is too short: needs at least " + std::to_string(warmup + 2)
                              + " samples for warmup plus scoring");

        Vecd predicted(slice.end - slice.begin - warmup);
        Vecd truth(predicted.size());
        Index filled = 0;
        // Junctions inside the slice split it further; windows never straddle.
        for (const auto& [seg_begin, seg_end] : ds.segments()) {
            const Index begin = std::max(seg_begin, slice.begin);
            const Index end = std::min(seg_end, slice.end);
            if (end <= begin || end - begin <= warmup) continue;
            const auto t0 = Clock::now();
            const auto fm =
                build_features<double>(inputs.middleCols(begin, end - begin), model.metaparams);
            const Vecd normalized_pred = apply_readout<double>(model.w_out, fm.features);
            inference_seconds += seconds_since(t0);
            predicted.segment(filled, fm.n_valid()) = denormalize(
                model.normalization, model.target_channel, normalized_pred);
            truth.segment(filled, fm.n_valid()) =
                truth_all.segment(begin + fm.first_valid, fm.n_valid()).transpose();
            filled += fm.n_valid();
        }
        predicted.conservativeResize(filled);
        truth.conservativeResize(filled);
        if (filled < 2)
            throw ConfigError("test slice #" + std::to_string(i)
                              + " has no scoreable span after junction splitting");
        report.per_slice_nrmse.push_back(nrmse(predicted, truth));
        n_test += filled;
        predicted_chunks.push_back(std::move(predicted));
        truth_chunks.push_back(std::move(truth));
    }

    Vecd pooled_pred(n_test), pooled_truth(n_test);
    Index offset = 0;
    for (std::size_t i = 0; i < predicted_chunks.size(); ++i) {
        pooled_pred.segment(offset, predicted_chunks[i].size()) = predicted_chunks[i];
        pooled_truth.segment(offset, truth_chunks[i].size()) = truth_chunks[i];
        offset += predicted_chunks[i].size();
    }
    report.nrmse = nrmse(pooled_pred, pooled_truth);
    report.n_test = n_test;
    report.inference_seconds_per_step =
        n_test > 0 ? inference_seconds / static_cast<double>(n_test) : 0.0;
    return report;
}

void GridSpec::validate() const {
    if (lookbacks.empty() || skips.empty() || alphas.empty())
        throw ConfigError("grid must list at least one lookback, skip and alpha");
    for (double a : alphas)
        if (!(a > 0.0)) throw ConfigError("grid alphas must be > 0");
}

const GridRow& GridResult::best() const {
    if (best_index < 0) throw ConfigError("grid search found no working combination");
    return rows[static_cast<std::size_t>(best_index)];
}

GridResult grid_search(const RunDataset& ds, const SliceSpec& slices,
                       const std::vector<std::string>& input_channels,
                       const std::string& target_channel, const GridSpec& grid) {
    grid.validate();
    GridResult result;
    int index = 0;
    for (int k : grid.lookbacks) {
        for (int s : grid.skips) {
            for (double alpha : grid.alphas) {
                GridRow row;
                row.index = index++;
                row.metaparams = {k, s, alpha};
                row.feature_count =
                    feature_dim(static_cast<Index>(input_channels.size()), k);
                try {
                    const TrainedModel model =
                        fit(ds, slices, input_channels, target_channel, row.metaparams);
                    const EvalReport report = evaluate(model, ds, slices);
                    row.ok = true;
                    row.nrmse = report.nrmse;
                    row.train_seconds = report.train_seconds;
                } catch (const Error& e) {
                    row.error = e.what();
                }
                result.rows.push_back(std::move(row));
            }
        }
    }

    for (const GridRow& row : result.rows) {
        if (!row.ok) continue;
        if (result.best_index < 0) {
            result.best_index = row.index;
            continue;
        }
        const GridRow& best = result.rows[static_cast<std::size_t>(result.best_index)];
        const bool better =
            row.nrmse < best.nrmse
            || (row.nrmse == best.nrmse
                && (row.feature_count < best.feature_count
                    || (row.feature_count == best.feature_count
                        && row.metaparams.alpha < best.metaparams.alpha)));
        if (better) result.best_index = row.index;
    }
    return result;
}

BenchmarkReport benchmark(const TrainedModel& model, const RunDataset& ds,
                          const BenchmarkBudgets& budgets) {
    model.validate();
    constexpr int kRepeats = 31;

    const RunDataset normalized =
        apply_normalization(ds, model.normalization, model.input_channels);
    const Matd inputs = input_block(normalized, model.input_channels);
    const auto fm = build_features<double>(inputs, model.metaparams);
    const Vecd targets = normalized.channel(model.target_channel)
                             .segment(fm.first_valid, fm.n_valid())
                             .transpose();

    BenchmarkReport report;
    report.budgets = budgets;
    report.n_train = fm.n_valid();
    report.n_steps = fm.n_valid();

    std::vector<double> train_times, predict_times;
    Vecd sink;
    for (int r = 0; r < kRepeats; ++r) {
        const auto t0 = Clock::now();
        sink = train_readout<double>(fm.features, targets, model.metaparams.alpha);
        train_times.push_back(seconds_since(t0));
    }
    for (int r = 0; r < kRepeats; ++r) {
        const auto t0 = Clock::now();
        const auto step_fm = build_features<double>(inputs, model.metaparams);
        sink = apply_readout<double>(model.w_out, step_fm.features);
        predict_times.push_back(seconds_since(t0) / static_cast<double>(step_fm.n_valid()));
    }

    report.train_seconds_median = median(std::move(train_times));
    report.per_step_seconds_median = median(std::move(predict_times));
    report.train_within_budget = report.train_seconds_median < budgets.train_seconds;
    report.inference_within_budget = report.per_step_seconds_median < budgets.per_step_seconds;
    return report;
}

} // namespace twin
