// turbotwin: simulate a surrogate turbine, ingest sensor runs, calibrate the
// load cell, train the NG-RC readout and score its thrust predictions.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "turbotwin/calibration.hpp"
#include "turbotwin/dataset.hpp"
#include "turbotwin/dataset_io.hpp"
#include "turbotwin/engine_sim.hpp"
#include "turbotwin/evaluation.hpp"
#include "turbotwin/model_io.hpp"
#include "turbotwin/report_io.hpp"
#include "turbotwin/rng.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace twin;

namespace {

struct GlobalOpts {
    std::string out_dir = "out";
    std::uint64_t seed = 0;
    bool quiet = false;
};

std::ostream& info(const GlobalOpts& opts) {
    static std::ofstream null_sink;
    if (opts.quiet) {
        null_sink.setstate(std::ios::badbit);
        return null_sink;
    }
    return std::cout;
}

// --- manifest -------------------------------------------------------------

std::uint64_t fnv1a64(const std::string& bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

void strip_timings(json& j) {
    if (j.is_object()) {
        j.erase("timings");
        for (auto& [key, value] : j.items()) strip_timings(value);
    } else if (j.is_array()) {
        for (auto& value : j) strip_timings(value);
    }
}

/// Content fingerprint. Wall-clock fields (every "timings" object) are
/// stripped from JSON artifacts first, so re-runs with the same seed match.
std::string fingerprint_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (path.extension() == ".json") {
        json doc = json::parse(bytes, nullptr, false);
        if (!doc.is_discarded()) {
            strip_timings(doc);
            bytes = doc.dump();
        }
    }
    char buf[32];
    std::snprintf(buf, sizeof(buf), "fnv1a:%016llx",
                  static_cast<unsigned long long>(fnv1a64(bytes)));
    return buf;
}

class Manifest {
  public:
    Manifest(const CLI::App& root, const CLI::App& sub, const GlobalOpts& opts, int argc,
             char** argv)
        : opts_(opts) {
        doc_["format"] = "turbotwin-manifest";
        doc_["version"] = 1;
        doc_["command"] = sub.get_name();
        doc_["seed"] = opts.seed;
        std::vector<std::string> argv_copy(argv, argv + argc);
        doc_["command_line"] = argv_copy;
        doc_["config_ini"] = root.config_to_str(true, false);
        doc_["outputs"] = json::object();
    }

    /// Writes `content` under the output directory and records its
    /// fingerprint.
    fs::path emit(const std::string& name, const std::string& content) {
        const fs::path path = fs::path(opts_.out_dir) / name;
        std::ofstream out(path, std::ios::binary);
        if (!out) throw DataError("cannot write '" + path.string() + "'");
        out << content;
        out.close();
        record(name, path);
        return path;
    }

    void record(const std::string& name, const fs::path& path) {
        doc_["outputs"][name] = fingerprint_file(path);
    }

    void add_note(const std::string& key, const json& value) { doc_[key] = value; }

    void write() {
        const fs::path path =
            fs::path(opts_.out_dir) / (doc_["command"].get<std::string>() + "_manifest.json");
        std::ofstream out(path, std::ios::binary);
        out << doc_.dump(2) << "\n";
    }

  private:
    const GlobalOpts& opts_;
    json doc_;
};

// --- shared pipeline pieces ------------------------------------------------

struct SliceOpts {
    int n_slices = 9;
    std::string pattern = "alternating";
    std::string first = "test";
};

void add_slice_options(CLI::App* cmd, SliceOpts& opts) {
    cmd->add_option("--n-slices", opts.n_slices, "Number of temporal slices")
        ->check(CLI::Range(2, 1000))
        ->capture_default_str();
    cmd->add_option("--slice-pattern", opts.pattern, "Slice labelling pattern")
        ->check(CLI::IsMember({"alternating", "random"}))
        ->capture_default_str();
    cmd->add_option("--slice-first", opts.first,
                    "Label of the first slice (alternating pattern)")
        ->check(CLI::IsMember({"train", "test"}))
        ->capture_default_str();
}

SliceSpec build_slices(const SliceOpts& opts, Index length, std::uint64_t seed) {
    const auto pattern =
        opts.pattern == "random" ? SlicePattern::random : SlicePattern::alternating;
    const auto first = opts.first == "train" ? SliceLabel::train : SliceLabel::test;
    return make_slices(length, opts.n_slices, pattern, first, derive_seed(seed, "slices"));
}

struct DataOpts {
    std::string run_path;
    double rate = 0.0; // 0 = lowest native channel rate
    std::vector<std::string> inputs{"requested_speed", "actual_speed", "egt", "far"};
    std::string target = "thrust";
};

void add_data_options(CLI::App* cmd, DataOpts& opts, bool need_target = true) {
    cmd->add_option("--run", opts.run_path, "Run file (CSV, sectioned or wide)")
        ->required()
        ->check(CLI::ExistingFile);
    cmd->add_option("--rate", opts.rate,
                    "Common sampling rate to align to, S/s (default: lowest channel rate)");
    cmd->add_option("--inputs", opts.inputs, "Input channels, comma separated")
        ->delimiter(',')
        ->capture_default_str();
    if (need_target)
        cmd->add_option("--target", opts.target, "Target channel")->capture_default_str();
}

RunDataset load_aligned(const DataOpts& opts) {
    const RawRun raw = load_run(opts.run_path);
    double rate = opts.rate;
    if (rate <= 0.0) {
        rate = raw.channels.front().rate;
        for (const Channel& ch : raw.channels) rate = std::min(rate, ch.rate);
    }
    return align(raw, rate);
}

// --- simulate ---------------------------------------------------------------

struct SimulateOpts {
    std::string profile = "default";
    double duration = kProfileDuration;
    std::string run_id;
    EngineParams params;
};

void add_engine_options(CLI::App* cmd, EngineParams& p) {
    auto* grp = cmd->add_option_group("engine", "Surrogate engine parameters");
    grp->add_option("--dt", p.dt, "Sample period, s")->capture_default_str();
    grp->add_option("--tau-spool", p.tau_spool, "Spool time constant, s")->capture_default_str();
    grp->add_option("--kp", p.kp, "Proportional gain")->capture_default_str();
    grp->add_option("--ki", p.ki, "Integral gain")->capture_default_str();
    grp->add_option("--c-fuel", p.c_fuel, "Steady speed per unit FAR")->capture_default_str();
    grp->add_option("--far-min", p.far_min, "FAR lower clamp")->capture_default_str();
    grp->add_option("--far-max", p.far_max, "FAR upper clamp")->capture_default_str();
    grp->add_option("--thrust-a2", p.thrust_a2, "Thrust map n^2 coefficient, N")
        ->capture_default_str();
    grp->add_option("--thrust-a1", p.thrust_a1, "Thrust map n coefficient, N")
        ->capture_default_str();
    grp->add_option("--thrust-a0", p.thrust_a0, "Thrust map offset, N")->capture_default_str();
    grp->add_option("--egt-b-far", p.egt_b_far, "EGT map FAR coefficient, degC")
        ->capture_default_str();
    grp->add_option("--egt-b-n2", p.egt_b_n2, "EGT map n^2 coefficient, degC")
        ->capture_default_str();
    grp->add_option("--egt-b0", p.egt_b0, "EGT map offset, degC")->capture_default_str();
    grp->add_option("--noise-sigma", p.noise_sigma, "Sensor noise scale")->capture_default_str();
}

int cmd_simulate(const GlobalOpts& global, SimulateOpts& opts, Manifest& manifest) {
    if (opts.duration <= 0.0) throw UsageError("--duration must be positive");
    opts.params.seed = derive_seed(global.seed, "sim-noise");

    const FlightProfile profile =
        profile_by_name(opts.profile, derive_seed(global.seed, "profile"));
    const auto records = simulate(profile, opts.params, opts.duration);

    const std::string run_id = opts.run_id.empty()
                                   ? "run-" + opts.profile + "-" + std::to_string(global.seed)
                                   : opts.run_id;
    RunDataset ds = to_run_dataset(records, opts.params, run_id);
    ds.meta["profile"] = opts.profile;
    ds.meta["master_seed"] = std::to_string(global.seed);

    const fs::path path = fs::path(global.out_dir) / (run_id + ".csv");
    save_run(ds, path.string());
    manifest.record(run_id + ".csv", path);
    info(global) << "wrote " << path.string() << " (" << ds.length() << " samples, "
                 << ds.n_channels() << " channels)\n";
    return 0;
}

// --- calibrate ---------------------------------------------------------------

int cmd_calibrate(const GlobalOpts& global, const std::string& points_path,
                  Manifest& manifest) {
    const auto points = load_calibration_points(points_path);
    const CalibrationFit fit = fit_calibration(points);
    manifest.emit("calibration.json", calibration_json(fit));
    info(global) << "calibration: slope " << fit.slope << " N/V, intercept " << fit.intercept
                 << " N, mse " << fit.mse << " N^2 over " << fit.n_points << " points\n";
    return 0;
}

// --- train ---------------------------------------------------------------

struct MetaOpts {
    int lookback = 1;
    int skip = 1;
    double alpha = 1e-5;
};

void add_meta_options(CLI::App* cmd, MetaOpts& opts) {
    cmd->add_option("--lookback,-k", opts.lookback, "Past taps beyond the current step")
        ->capture_default_str();
    cmd->add_option("--skip,-s", opts.skip, "Samples between consecutive taps")
        ->capture_default_str();
    cmd->add_option("--alpha,-a", opts.alpha, "Ridge regularization parameter")
        ->capture_default_str();
}

void emit_model_outputs(const GlobalOpts& global, Manifest& manifest, const TrainedModel& model,
                        const EvalReport& report, const RunDataset& ds,
                        const SliceSpec& slices) {
    manifest.emit("model.json", serialize(model));
    manifest.emit("eval_report.json", eval_report_json(report));
    manifest.emit("predictions.csv",
                  prediction_csv(ds, model.target_channel, predict_run(model, ds), &slices));
    info(global) << "test NRMSE " << report.nrmse * 100.0 << "% pooled over " << report.n_test
                 << " points (" << report.per_slice_nrmse.size() << " slices); trained on "
                 << report.n_train << " points in " << report.train_seconds * 1e3 << " ms\n";
}

int cmd_train(const GlobalOpts& global, const DataOpts& data, const SliceOpts& slicing,
              const MetaOpts& meta, Manifest& manifest) {
    const RunDataset ds = load_aligned(data);
    const SliceSpec slices = build_slices(slicing, ds.length(), global.seed);
    const Metaparameters mp{meta.lookback, meta.skip, meta.alpha};

    const TrainedModel model = fit(ds, slices, data.inputs, data.target, mp);
    const EvalReport report = evaluate(model, ds, slices);
    const EvalReport in_sample = evaluate(model, ds, slices.flipped());
    manifest.add_note("train_nrmse", in_sample.nrmse);

    emit_model_outputs(global, manifest, model, report, ds, slices);
    info(global) << "in-sample NRMSE " << in_sample.nrmse * 100.0 << "%\n";
    return 0;
}

// --- predict ---------------------------------------------------------------

int cmd_predict(const GlobalOpts& global, const DataOpts& data, const std::string& model_path,
                Manifest& manifest) {
    const TrainedModel model = load_model(model_path);
    const RunDataset ds = load_aligned(data);
    const RunPrediction prediction = predict_run(model, ds);

    manifest.emit("predictions.csv", prediction_csv(ds, model.target_channel, prediction));

    json report;
    report["format"] = "turbotwin-prediction";
    report["version"] = 1;
    report["n_predicted"] = prediction.indices.size();
    if (ds.has_channel(model.target_channel)) {
        Vecd truth(static_cast<Index>(prediction.indices.size()));
        const auto target_row = ds.channel(model.target_channel);
        for (std::size_t i = 0; i < prediction.indices.size(); ++i)
            truth(static_cast<Index>(i)) = target_row(prediction.indices[i]);
        const double score = nrmse(prediction.values, truth);
        report["nrmse"] = score;
        info(global) << "NRMSE vs recorded " << model.target_channel << ": " << score * 100.0
                     << "%\n";
    } else {
        info(global) << "no '" << model.target_channel
                     << "' channel in the run; wrote predictions only\n";
    }
    manifest.emit("prediction_report.json", report.dump(2) + "\n");
    return 0;
}

// --- evaluate ---------------------------------------------------------------

int cmd_evaluate(const GlobalOpts& global, const DataOpts& data, const SliceOpts& slicing,
                 const std::string& model_path, Manifest& manifest) {
    const TrainedModel model = load_model(model_path);
    const RunDataset ds = load_aligned(data);
    const SliceSpec slices = build_slices(slicing, ds.length(), global.seed);

    const EvalReport report = evaluate(model, ds, slices);
    manifest.emit("eval_report.json", eval_report_json(report));
    manifest.emit("predictions.csv",
                  prediction_csv(ds, model.target_channel, predict_run(model, ds), &slices));
    info(global) << "test NRMSE " << report.nrmse * 100.0 << "% pooled over " << report.n_test
                 << " points\n";
    return 0;
}

// --- gridsearch ---------------------------------------------------------------

struct GridOpts {
    std::vector<int> lookbacks{1, 2, 3};
    std::vector<int> skips{1, 2, 3};
    std::vector<double> alphas{1e-8, 1e-7, 1e-6, 1e-5, 1e-4, 1e-3, 1e-2, 1e-1};
};

void add_grid_options(CLI::App* cmd, GridOpts& opts) {
    cmd->add_option("--lookbacks", opts.lookbacks, "Lookback values to try")
        ->delimiter(',')
        ->capture_default_str();
    cmd->add_option("--skips", opts.skips, "Skip values to try")
        ->delimiter(',')
        ->capture_default_str();
    cmd->add_option("--alphas", opts.alphas, "Ridge parameters to try")
        ->delimiter(',')
        ->capture_default_str();
}

int cmd_gridsearch(const GlobalOpts& global, const DataOpts& data, const SliceOpts& slicing,
                   const GridOpts& grid_opts, Manifest& manifest) {
    const RunDataset ds = load_aligned(data);
    const SliceSpec slices = build_slices(slicing, ds.length(), global.seed);

    GridSpec grid;
    grid.lookbacks = grid_opts.lookbacks;
    grid.skips = grid_opts.skips;
    grid.alphas = grid_opts.alphas;

    const GridResult result = grid_search(ds, slices, data.inputs, data.target, grid);
    manifest.emit("grid_results.csv", grid_results_csv(result));
    manifest.emit("grid_report.json", grid_report_json(result));

    const GridRow& best = result.best(); // throws if everything failed
    info(global) << "grid: " << result.rows.size() << " combinations, best k="
                 << best.metaparams.lookback << " s=" << best.metaparams.skip
                 << " alpha=" << best.metaparams.alpha << " (NRMSE " << best.nrmse * 100.0
                 << "%)\n";

    const TrainedModel model = fit(ds, slices, data.inputs, data.target, best.metaparams);
    const EvalReport report = evaluate(model, ds, slices);
    emit_model_outputs(global, manifest, model, report, ds, slices);
    return 0;
}

// --- benchmark ---------------------------------------------------------------

int cmd_benchmark(const GlobalOpts& global, const DataOpts& data, const std::string& model_path,
                  Index max_points, BenchmarkBudgets budgets, Manifest& manifest) {
    const TrainedModel model = load_model(model_path);
    RunDataset ds = load_aligned(data);
    if (max_points > 0 && max_points < ds.length()) ds = merge_runs({{&ds, 0, max_points}});

    const BenchmarkReport report = benchmark(model, ds, budgets);
    manifest.emit("benchmark_report.json", benchmark_report_json(report));
    info(global) << "train: " << report.train_seconds_median * 1e3 << " ms median over "
                 << report.n_train << " points ("
                 << (report.train_within_budget ? "within" : "over") << " budget)\n"
                 << "inference: " << report.per_step_seconds_median * 1e6
                 << " us/step median (" << (report.inference_within_budget ? "within" : "over")
                 << " budget)\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"NG-RC digital-twin toolkit for turbine thrust prediction"};
    app.require_subcommand(1);
    app.fallthrough();
    app.set_config("--config", "", "Read options from an INI file");

    GlobalOpts global;
    app.add_option("--out", global.out_dir, "Output directory")->capture_default_str();
    app.add_option("--seed", global.seed, "Master seed for all randomness")
        ->capture_default_str();
    app.add_flag("--quiet", global.quiet, "Suppress progress output");

    auto* sim_cmd = app.add_subcommand("simulate", "Generate a surrogate engine run");
    SimulateOpts sim;
    sim_cmd->add_option("--profile", sim.profile,
                        "Flight profile: default, unit_step, ascending, descending, eccentric")
        ->capture_default_str();
    sim_cmd->add_option("--duration", sim.duration, "Run duration, s")->capture_default_str();
    sim_cmd->add_option("--run-id", sim.run_id, "Run identifier (default: run-<profile>-<seed>)");
    add_engine_options(sim_cmd, sim.params);

    auto* cal_cmd = app.add_subcommand("calibrate", "Fit the load-cell line from points CSV");
    std::string points_path;
    cal_cmd->add_option("--points", points_path, "Two-column CSV: volts, newtons")
        ->required()
        ->check(CLI::ExistingFile);

    auto* train_cmd = app.add_subcommand("train", "Train a readout and score it");
    DataOpts train_data;
    SliceOpts train_slices;
    MetaOpts train_meta;
    add_data_options(train_cmd, train_data);
    add_slice_options(train_cmd, train_slices);
    add_meta_options(train_cmd, train_meta);

    auto* predict_cmd = app.add_subcommand("predict", "Open-loop inference with a saved model");
    DataOpts predict_data;
    std::string predict_model;
    add_data_options(predict_cmd, predict_data, false);
    predict_cmd->add_option("--model", predict_model, "Model JSON")
        ->required()
        ->check(CLI::ExistingFile);

    auto* eval_cmd = app.add_subcommand("evaluate", "Score a saved model over test slices");
    DataOpts eval_data;
    SliceOpts eval_slices;
    std::string eval_model;
    add_data_options(eval_cmd, eval_data, false);
    add_slice_options(eval_cmd, eval_slices);
    eval_cmd->add_option("--model", eval_model, "Model JSON")
        ->required()
        ->check(CLI::ExistingFile);

    auto* grid_cmd = app.add_subcommand("gridsearch", "Sweep metaparameters, keep the best");
    DataOpts grid_data;
    SliceOpts grid_slices;
    GridOpts grid;
    add_data_options(grid_cmd, grid_data);
    add_slice_options(grid_cmd, grid_slices);
    add_grid_options(grid_cmd, grid);

    auto* bench_cmd = app.add_subcommand("benchmark", "Time training and per-step inference");
    DataOpts bench_data;
    std::string bench_model;
    Index bench_points = 0;
    BenchmarkBudgets budgets;
    double budget_train_ms = budgets.train_seconds * 1e3;
    double budget_step_us = budgets.per_step_seconds * 1e6;
    add_data_options(bench_cmd, bench_data, false);
    bench_cmd->add_option("--model", bench_model, "Model JSON")
        ->required()
        ->check(CLI::ExistingFile);
    bench_cmd->add_option("--points", bench_points, "Truncate the run to this many samples");
    bench_cmd->add_option("--budget-train-ms", budget_train_ms, "Training time budget, ms")
        ->capture_default_str();
    bench_cmd->add_option("--budget-step-us", budget_step_us, "Per-step inference budget, us")
        ->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    }

    try {
        fs::create_directories(global.out_dir);
        CLI::App* sub = app.get_subcommands().front();
        Manifest manifest(app, *sub, global, argc, argv);

        int rc = 1;
        if (sub == sim_cmd) rc = cmd_simulate(global, sim, manifest);
        if (sub == cal_cmd) rc = cmd_calibrate(global, points_path, manifest);
        if (sub == train_cmd)
            rc = cmd_train(global, train_data, train_slices, train_meta, manifest);
        if (sub == predict_cmd) rc = cmd_predict(global, predict_data, predict_model, manifest);
        if (sub == eval_cmd)
            rc = cmd_evaluate(global, eval_data, eval_slices, eval_model, manifest);
        if (sub == grid_cmd)
            rc = cmd_gridsearch(global, grid_data, grid_slices, grid, manifest);
        if (sub == bench_cmd) {
            budgets.train_seconds = budget_train_ms * 1e-3;
            budgets.per_step_seconds = budget_step_us * 1e-6;
            rc = cmd_benchmark(global, bench_data, bench_model, bench_points, budgets, manifest);
        }
        manifest.write();
        return rc;
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 3;
    } catch (const NumericError& e) {
        std::cerr << "numeric error: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
