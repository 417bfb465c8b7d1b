#include "turbotwin/ngrc.hpp"

#include <cmath>

namespace twin {

void TrainedModel::validate() const {
    metaparams.validate();
    if (input_channels.empty()) throw DataError("model has no input channels");
    if (target_channel.empty()) throw DataError("model has no target channel");
    if (w_out.size() != feature_count())
        throw DataError("readout length " + std::to_string(w_out.size())
                        + " does not match the feature dimension "
                        + std::to_string(feature_count()) + " implied by "
                        + std::to_string(input_channels.size()) + " channels at lookback "
                        + std::to_string(metaparams.lookback));
    if (!w_out.allFinite()) throw DataError("model weights contain non-finite values");
    for (const std::string& name : input_channels)
        if (!normalization.covers(name))
            throw DataError("model normalization does not cover input channel '" + name + "'");
    if (!normalization.covers(target_channel))
        throw DataError("model normalization does not cover the target channel '"
                        + target_channel + "'");
}

SeriesPrediction predict(const TrainedModel& model, ConstRefMat<double> inputs) {
    if (inputs.rows() != static_cast<Index>(model.input_channels.size()))
        throw DataError("input block has " + std::to_string(inputs.rows())
                        + " rows; model expects " + std::to_string(model.input_channels.size())
                        + " channels");
    const auto fm = build_features<double>(inputs, model.metaparams);
    return {apply_readout<double>(model.w_out, fm.features), fm.first_valid};
}

RunPrediction predict_run(const TrainedModel& model, const RunDataset& ds) {
    model.validate();
    for (const std::string& name : model.input_channels)
        if (!ds.has_channel(name))
            throw DataError("run '" + ds.run_id + "' is missing model input channel '" + name
                            + "'");

    const RunDataset normalized =
        apply_normalization(ds, model.normalization, model.input_channels);
    Matd inputs(static_cast<Index>(model.input_channels.size()), ds.length());
    for (std::size_t c = 0; c < model.input_channels.size(); ++c)
        inputs.row(static_cast<Index>(c)) = normalized.channel(model.input_channels[c]);

    const Index warmup = model.metaparams.warmup();
    RunPrediction out;
    std::vector<Vecd> chunks;
    Index total = 0;
    for (const auto& [begin, end] : ds.segments()) {
        if (end - begin <= warmup) continue; // too short for a single window
        const auto fm =
            build_features<double>(inputs.middleCols(begin, end - begin), model.metaparams);
        Vecd normalized_pred = apply_readout<double>(model.w_out, fm.features);
        chunks.push_back(
            denormalize(model.normalization, model.target_channel, normalized_pred));
        for (Index i = 0; i < fm.n_valid(); ++i)
            out.indices.push_back(begin + fm.first_valid + i);
        total += fm.n_valid();
    }
    if (total == 0)
        throw DataError("run '" + ds.run_id + "' has no segment longer than the lookback window");

    out.values.resize(total);
    Index offset = 0;
    for (const Vecd& chunk : chunks) {
        out.values.segment(offset, chunk.size()) = chunk;
        offset += chunk.size();
    }
    return out;
}

} // namespace twin
