#pragma once

#include <chrono>
#include <string>
#include <vector>

#include <Eigen/Cholesky>

#include "turbotwin/dataset.hpp"
#include "turbotwin/errors.hpp"
#include "turbotwin/types.hpp"

namespace twin {

/// The full tunable surface of the NG-RC.
struct Metaparameters {
    int lookback = 1;    // k: past taps beyond the current step
    int skip = 1;        // s: spacing between consecutive taps, in samples
    double alpha = 1e-5; // ridge regularization parameter

    void validate() const {
        if (lookback < 0) throw ConfigError("lookback must be >= 0");
        if (skip < 1) throw ConfigError("skip must be >= 1");
        if (!(alpha > 0.0)) throw ConfigError("alpha must be > 0");
    }
    /// Samples consumed as delay history before the first valid step.
    Index warmup() const { return static_cast<Index>(lookback) * skip; }
};

/// Number of linear features for m input channels: m taps at the current
/// step plus m per lookback tap.
constexpr Index linear_dim(Index m, int lookback) {
    return m * (static_cast<Index>(lookback) + 1);
}

/// Total feature count: constant + linear + unique quadratic monomials.
constexpr Index feature_dim(Index m, int lookback) {
    const Index dl = linear_dim(m, lookback);
    return 1 + dl + dl * (dl + 1) / 2;
}

/// Stacked feature vectors, one column per valid time step.
template <typename Scalar>
struct FeatureMatrix {
    Mat<Scalar> features; // d x n_valid
    Index d_linear = 0;
    Index first_valid = 0; // offset of column 0 into the source series

    Index d() const { return features.rows(); }
    Index n_valid() const { return features.cols(); }
};

/// Builds the feature matrix from an m x T input block. Column c describes
/// source step n = first_valid + c and is laid out as:
///   row 0:            constant 1
///   rows 1 .. d_lin:  inputs at n, n-s, ..., n-k*s (m values per tap)
///   remaining rows:   products lin_i * lin_j for i <= j, row-major order
template <typename Scalar>
FeatureMatrix<Scalar> build_features(ConstRefMat<Scalar> inputs, const Metaparameters& meta) {
    meta.validate();
    const Index m = inputs.rows();
    const Index steps = inputs.cols();
    const Index warmup = meta.warmup();
    if (m < 1) throw ConfigError("feature construction needs at least one input channel");
    if (steps <= warmup)
        throw ConfigError("insufficient history: " + std::to_string(steps)
                          + " steps cannot cover a lookback window of " + std::to_string(warmup));
    if (!inputs.allFinite()) throw NumericError("inputs contain non-finite values");

    const Index d_lin = linear_dim(m, meta.lookback);
    const Index n_valid = steps - warmup;

    FeatureMatrix<Scalar> out;
    out.d_linear = d_lin;
    out.first_valid = warmup;
    out.features.resize(feature_dim(m, meta.lookback), n_valid);
    out.features.row(0).setOnes();

    for (Index tap = 0; tap <= meta.lookback; ++tap)
        out.features.middleRows(1 + tap * m, m) =
            inputs.middleCols(warmup - tap * meta.skip, n_valid);

    Index row = 1 + d_lin;
    for (Index i = 0; i < d_lin; ++i)
        for (Index j = i; j < d_lin; ++j)
            out.features.row(row++) =
                out.features.row(1 + i).cwiseProduct(out.features.row(1 + j));
    return out;
}

/// Ridge readout: the weight vector w minimizing |y - w^T O|^2 + alpha |w|^2,
/// obtained by solving the symmetric positive-definite system
/// (O O^T + alpha I) w = O y rather than forming an inverse.
template <typename Scalar>
Vec<Scalar> train_readout(ConstRefMat<Scalar> features, ConstRefVec<Scalar> targets,
                          Scalar alpha) {
    if (!(alpha > Scalar{0})) throw ConfigError("alpha must be > 0");
    if (targets.size() != features.cols())
        throw ConfigError("got " + std::to_string(targets.size()) + " targets for "
                          + std::to_string(features.cols()) + " feature columns");
    if (!features.allFinite() || !targets.allFinite())
        throw NumericError("training data contains non-finite values");

    const Index d = features.rows();
    Mat<Scalar> gram = Mat<Scalar>::Zero(d, d);
    gram.template selfadjointView<Eigen::Lower>().rankUpdate(features);
    gram.diagonal().array() += alpha;

    const Eigen::LDLT<Mat<Scalar>, Eigen::Lower> solver(gram);
    if (solver.info() != Eigen::Success)
        throw NumericError("ridge system factorization failed");
    Vec<Scalar> w = solver.solve(features * targets);
    if (!w.allFinite()) throw NumericError("ridge solve produced non-finite weights");
    return w;
}

/// Readout applied across all feature columns (open loop: predictions are
/// never fed back).
template <typename Scalar>
Vec<Scalar> apply_readout(ConstRefVec<Scalar> w, ConstRefMat<Scalar> features) {
    if (w.size() != features.rows())
        throw ConfigError("readout length " + std::to_string(w.size())
                          + " does not match feature dimension "
                          + std::to_string(features.rows()));
    return features.transpose() * w;
}

struct TrainingStats {
    Index n_train = 0;
    double train_seconds = 0.0;
};

/// A trained readout plus everything needed to reapply it: metaparameters,
/// channel bindings and the normalization fitted on the training portion.
struct TrainedModel {
    Vecd w_out;
    Metaparameters metaparams;
    std::vector<std::string> input_channels;
    std::string target_channel;
    NormalizationSpec normalization;
    TrainingStats training_stats;

    Index feature_count() const {
        return feature_dim(static_cast<Index>(input_channels.size()), metaparams.lookback);
    }
    /// Throws on any violated structural invariant (wrong w_out length,
    /// uncovered channels, bad metaparameters).
    void validate() const;
};

/// Normalized step-by-step inference over an m x T input block whose rows
/// follow model.input_channels.
struct SeriesPrediction {
    Vecd values;           // one per valid step
    Index first_valid = 0; // offset of values[0] into the inputs
};
SeriesPrediction predict(const TrainedModel& model, ConstRefMat<double> inputs);

/// Inference over a physical-units dataset: normalizes the model's input
/// channels, predicts per contiguous segment (respecting junctions), and
/// returns de-normalized values with their global sample indices.
struct RunPrediction {
    std::vector<Index> indices; // into the dataset
    Vecd values;                // physical units
};
RunPrediction predict_run(const TrainedModel& model, const RunDataset& ds);

} // namespace twin
