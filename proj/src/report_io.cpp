#include "turbotwin/report_io.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "turbotwin/dataset_io.hpp"

namespace twin {

namespace {

using json = nlohmann::json;

json metaparams_json(const Metaparameters& mp) {
    return {{"lookback", mp.lookback}, {"skip", mp.skip}, {"alpha", mp.alpha}};
}

} // namespace

std::string eval_report_json(const EvalReport& report) {
    json doc;
    doc["format"] = "turbotwin-eval";
    doc["version"] = 1;
    doc["nrmse"] = report.nrmse;
    doc["per_slice_nrmse"] = report.per_slice_nrmse;
    doc["metaparameters"] = metaparams_json(report.metaparams);
    doc["n_train"] = report.n_train;
    doc["n_test"] = report.n_test;
    doc["timings"] = {{"train_seconds", report.train_seconds},
                      {"inference_seconds_per_step", report.inference_seconds_per_step}};
    return doc.dump(2) + "\n";
}

std::string grid_report_json(const GridResult& result) {
    json rows = json::array();
    for (const GridRow& row : result.rows) {
        json r;
        r["index"] = row.index;
        r["metaparameters"] = metaparams_json(row.metaparams);
        r["features"] = row.feature_count;
        r["status"] = row.ok ? "ok" : "failed";
        if (row.ok) {
            r["nrmse"] = row.nrmse;
            r["timings"] = {{"train_seconds", row.train_seconds}};
        } else {
            r["error"] = row.error;
        }
        rows.push_back(std::move(r));
    }
    json doc;
    doc["format"] = "turbotwin-grid";
    doc["version"] = 1;
    doc["combinations"] = std::move(rows);
    if (result.best_index >= 0) {
        doc["best_index"] = result.best_index;
        doc["best"] = metaparams_json(result.best().metaparams);
    }
    return doc.dump(2) + "\n";
}

std::string benchmark_report_json(const BenchmarkReport& report) {
    json doc;
    doc["format"] = "turbotwin-benchmark";
    doc["version"] = 1;
    doc["n_train"] = report.n_train;
    doc["n_steps"] = report.n_steps;
    doc["timings"] = {{"train_seconds_median", report.train_seconds_median},
                      {"per_step_seconds_median", report.per_step_seconds_median}};
    doc["budgets"] = {{"train_seconds", report.budgets.train_seconds},
                      {"per_step_seconds", report.budgets.per_step_seconds}};
    doc["train_within_budget"] = report.train_within_budget;
    doc["inference_within_budget"] = report.inference_within_budget;
    return doc.dump(2) + "\n";
}

std::string calibration_json(const CalibrationFit& fit) {
    json doc;
    doc["format"] = "turbotwin-calibration";
    doc["version"] = 1;
    doc["slope_newtons_per_volt"] = fit.slope;
    doc["intercept_newtons"] = fit.intercept;
    doc["mse_newtons_squared"] = fit.mse;
    doc["n_points"] = fit.n_points;
    return doc.dump(2) + "\n";
}

CalibrationFit load_calibration_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open calibration file '" + path + "'");
    json doc;
    try {
        in >> doc;
        if (doc.value("format", "") != "turbotwin-calibration")
            throw DataError("not a turbotwin-calibration document");
        CalibrationFit fit;
        fit.slope = doc.at("slope_newtons_per_volt").get<double>();
        fit.intercept = doc.at("intercept_newtons").get<double>();
        fit.mse = doc.at("mse_newtons_squared").get<double>();
        fit.n_points = doc.at("n_points").get<int>();
        return fit;
    } catch (const json::exception& e) {
        throw DataError(path + ": malformed calibration document: " + e.what());
    }
}

std::string grid_results_csv(const GridResult& result) {
    std::ostringstream out;
    out << "index,lookback,skip,alpha,features,status,nrmse\n";
    for (const GridRow& row : result.rows) {
        out << row.index << "," << row.metaparams.lookback << "," << row.metaparams.skip << ","
            << format_double(row.metaparams.alpha) << "," << row.feature_count << ","
            << (row.ok ? "ok" : "failed") << ",";
        if (row.ok) out << format_double(row.nrmse);
        out << "\n";
    }
    return out.str();
}

std::string prediction_csv(const RunDataset& ds, const std::string& target_channel,
                           const RunPrediction& prediction, const SliceSpec* slices) {
    const bool has_truth = ds.has_channel(target_channel);
    std::vector<std::string> predicted(static_cast<std::size_t>(ds.length()));
    for (std::size_t i = 0; i < prediction.indices.size(); ++i)
        predicted[static_cast<std::size_t>(prediction.indices[i])] =
            format_double(prediction.values(static_cast<Index>(i)));

    std::ostringstream out;
    out << "time," << (has_truth ? "truth," : "") << "prediction" << (slices ? ",label" : "")
        << "\n";
    for (Index i = 0; i < ds.length(); ++i) {
        out << format_double(ds.time_at(i)) << ",";
        if (has_truth) out << format_double(ds.channel(target_channel)(i)) << ",";
        out << predicted[static_cast<std::size_t>(i)];
        if (slices) {
            out << ",";
            for (const Slice& s : slices->slices)
                if (i >= s.begin && i < s.end) {
                    out << (s.label == SliceLabel::train ? "train" : "test");
                    break;
                }
        }
        out << "\n";
    }
    return out.str();
}

} // namespace twin
