#include "turbotwin/model_io.hpp"

#include <fstream>

#include <json.hpp>

namespace twin {

namespace {

constexpr const char* kFormat = "turbotwin-model";
constexpr int kVersion = 1;

using json = nlohmann::json;

} // namespace

std::string serialize(const TrainedModel& model) {
    model.validate();
    json doc;
    doc["format"] = kFormat;
    doc["version"] = kVersion;
    doc["metaparameters"] = {{"lookback", model.metaparams.lookback},
                             {"skip", model.metaparams.skip},
                             {"alpha", model.metaparams.alpha}};
    doc["input_channels"] = model.input_channels;
    doc["target_channel"] = model.target_channel;
    json norm = json::object();
    for (const auto& [name, range] : model.normalization.ranges)
        norm[name] = {{"min", range.min}, {"max", range.max}};
    doc["normalization"] = norm;
    doc["w_out"] = std::vector<double>(model.w_out.data(), model.w_out.data() + model.w_out.size());
    doc["training"] = {{"n_train", model.training_stats.n_train},
                       {"timings", {{"train_seconds", model.training_stats.train_seconds}}}};
    return doc.dump(2) + "\n";
}

TrainedModel deserialize(const std::string& bytes) {
    json doc;
    try {
        doc = json::parse(bytes);
    } catch (const json::exception& e) {
        throw DataError(std::string("model file is not valid JSON: ") + e.what());
    }
    try {
        if (doc.value("format", "") != kFormat)
            throw DataError("not a " + std::string(kFormat) + " document");
        const int version = doc.at("version").get<int>();
        if (version != kVersion)
            throw DataError("model file version " + std::to_string(version)
                            + " is not supported (expected " + std::to_string(kVersion) + ")");

        TrainedModel model;
        const json& mp = doc.at("metaparameters");
        model.metaparams.lookback = mp.at("lookback").get<int>();
        model.metaparams.skip = mp.at("skip").get<int>();
        model.metaparams.alpha = mp.at("alpha").get<double>();
        model.input_channels = doc.at("input_channels").get<std::vector<std::string>>();
        model.target_channel = doc.at("target_channel").get<std::string>();
        for (const auto& [name, range] : doc.at("normalization").items())
            model.normalization.ranges[name] = {range.at("min").get<double>(),
                                                range.at("max").get<double>()};
        const auto weights = doc.at("w_out").get<std::vector<double>>();
        model.w_out = Eigen::Map<const Vecd>(weights.data(), static_cast<Index>(weights.size()));
        const json& training = doc.at("training");
        model.training_stats.n_train = training.at("n_train").get<Index>();
        if (training.contains("timings"))
            model.training_stats.train_seconds =
                training.at("timings").value("train_seconds", 0.0);
        model.validate();
        return model;
    } catch (const json::exception& e) {
        throw DataError(std::string("malformed model document: ") + e.what());
    }
}

void save_model(const TrainedModel& model, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write model file '" + path + "'");
    out << serialize(model);
    if (!out) throw DataError("failed writing model file '" + path + "'");
}

TrainedModel load_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open model file '" + path + "'");
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return deserialize(bytes);
}

} // namespace twin
