#include "turbotwin/engine_sim.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "turbotwin/dataset_io.hpp"
#include "turbotwin/rng.hpp"

namespace twin {

namespace {

void require(bool ok, const char* field, const std::string& what) {
    if (!ok) throw ConfigError(std::string("invalid engine parameter '") + field + "': " + what);
}

} // namespace

double FlightProfile::requested_at(double t) const {
    double speed = segments.front().requested_speed;
    for (const Segment& seg : segments) {
        if (seg.start_time > t) break;
        speed = seg.requested_speed;
    }
    return speed;
}

void FlightProfile::validate() const {
    if (segments.empty()) throw ConfigError("flight profile has no segments");
    if (segments.front().start_time != 0.0)
        throw ConfigError("flight profile must start at time 0");
    double prev = -1.0;
    for (const Segment& seg : segments) {
        if (!(seg.start_time > prev))
            throw ConfigError("flight profile start times must be strictly increasing");
        prev = seg.start_time;
        if (!(seg.requested_speed >= 0.1 && seg.requested_speed <= 1.0))
            throw ConfigError("requested speed " + std::to_string(seg.requested_speed)
                              + " outside [0.1, 1.0]");
    }
}

void EngineParams::validate() const {
    require(std::isfinite(dt) && dt > 0.0, "dt", "must be > 0");
    require(std::isfinite(tau_spool) && tau_spool > 0.0, "tau_spool", "must be > 0");
    require(std::isfinite(kp) && kp >= 0.0, "kp", "must be >= 0");
    require(std::isfinite(ki) && ki >= 0.0, "ki", "must be >= 0");
    require(std::isfinite(c_fuel) && c_fuel > 0.0, "c_fuel", "must be > 0");
    require(std::isfinite(far_min) && std::isfinite(far_max) && far_min < far_max, "far_min",
            "requires far_min < far_max");
    require(std::isfinite(thrust_a2) && thrust_a2 > 0.0, "thrust_a2", "must be > 0");
    require(std::isfinite(thrust_a1), "thrust_a1", "must be finite");
    require(std::isfinite(thrust_a0), "thrust_a0", "must be finite");
    require(std::isfinite(egt_b_far), "egt_b_far", "must be finite");
    require(std::isfinite(egt_b_n2), "egt_b_n2", "must be finite");
    require(std::isfinite(egt_b0), "egt_b0", "must be finite");
    require(std::isfinite(noise_sigma) && noise_sigma >= 0.0, "noise_sigma", "must be >= 0");
}

std::vector<SimRecord> simulate(const FlightProfile& profile, const EngineParams& params,
                                double duration) {
    params.validate();
    profile.validate();
    if (!(duration >= params.dt))
        throw ConfigError("duration must be at least one sample period");

    const auto n_steps = static_cast<Index>(std::floor(duration / params.dt)) + 1;
    std::vector<SimRecord> records;
    records.reserve(static_cast<std::size_t>(n_steps));

    Rng rng(params.seed);
    const bool noisy = params.noise_sigma > 0.0;

    // Start settled at the first setpoint: integral state preloaded so the
    // controller already commands the steady-state fuel-to-air ratio.
    const double r0 = profile.segments.front().requested_speed;
    double actual = r0;
    double integral = params.ki > 0.0 ? r0 / (params.c_fuel * params.ki) : 0.0;

    for (Index n = 0; n < n_steps; ++n) {
        const double t = static_cast<double>(n) * params.dt;
        const double requested = profile.requested_at(t);
        const double error = requested - actual;

        // Anti-windup: the integral state only advances while the command is
        // inside the clamps.
        const double integral_next = integral + error * params.dt;
        const double command = params.kp * error + params.ki * integral_next;
        const double far = std::clamp(command, params.far_min, params.far_max);
        if (command == far) integral = integral_next;

        double thrust = params.thrust_a2 * actual * actual + params.thrust_a1 * actual
                        + params.thrust_a0;
        double egt = params.egt_b_far * far + params.egt_b_n2 * actual * actual + params.egt_b0;
        if (noisy) {
            thrust += gaussian(rng) * params.noise_sigma * params.thrust_a2;
            egt += gaussian(rng) * params.noise_sigma * params.egt_b0;
        }

        if (!std::isfinite(thrust) || !std::isfinite(actual) || actual < 0.0 || actual > 1.2)
            throw NumericError("simulation left its operating envelope at t="
                               + std::to_string(t));

        records.push_back({t, requested, actual, thrust, egt, far});
        actual += (params.dt / params.tau_spool) * (params.c_fuel * far - actual);
    }
    return records;
}

FlightProfile default_profile() {
    // Near-full throttle down to near idle and back up; 2 s plateaus.
    const double speeds[] = {0.95, 0.84, 0.73, 0.62, 0.51, 0.40, 0.30,
                             0.41, 0.52, 0.63, 0.74, 0.85, 0.95};
    FlightProfile profile;
    double t = 0.0;
    for (double speed : speeds) {
        profile.segments.push_back({t, speed});
        t += 2.0;
    }
    return profile;
}

FlightProfile profile_library(ProfileKind kind, std::uint64_t seed) {
    FlightProfile profile;
    switch (kind) {
    case ProfileKind::unit_step:
        profile.segments = {{0.0, 0.1}, {13.0, 1.0}};
        break;
    case ProfileKind::ascending:
        for (int i = 0; i < 13; ++i)
            profile.segments.push_back({2.0 * i, 0.30 + 0.05 * i});
        break;
    case ProfileKind::descending:
        for (int i = 0; i < 13; ++i)
            profile.segments.push_back({2.0 * i, 0.90 - 0.05 * i});
        break;
    case ProfileKind::eccentric: {
        Rng rng(seed);
        // Random plateaus over the full speed range; redraw until the values
        // span at least 80% of [0.1, 1.0].
        for (;;) {
            profile.segments.clear();
            double t = 0.0;
            double lo = 1.0, hi = 0.0;
            while (t < kProfileDuration) {
                const double speed = uniform(rng, 0.1, 1.0);
                profile.segments.push_back({t, speed});
                lo = std::min(lo, speed);
                hi = std::max(hi, speed);
                t += 1.5 + 0.5 * static_cast<double>(uniform_index(rng, 4));
            }
            if (hi - lo >= 0.8 * 0.9) break;
        }
        break;
    }
    default:
        throw UsageError("unknown profile kind");
    }
    return profile;
}

RunDataset to_run_dataset(const std::vector<SimRecord>& records, const EngineParams& params,
                          const std::string& run_id) {
    if (records.empty()) throw ConfigError("cannot build a dataset from zero records");

    RunDataset ds;
    ds.run_id = run_id;
    ds.rate = 1.0 / params.dt;
    ds.start_time = records.front().time;
    ds.channel_names = {"requested_speed", "actual_speed", "thrust", "egt", "far"};
    ds.units = {{"requested_speed", "frac"},
                {"actual_speed", "frac"},
                {"thrust", "N"},
                {"egt", "degC"},
                {"far", "frac"}};
    ds.data.resize(5, static_cast<Index>(records.size()));
    for (std::size_t i = 0; i < records.size(); ++i) {
        const auto c = static_cast<Index>(i);
        ds.data(0, c) = records[i].requested_speed;
        ds.data(1, c) = records[i].actual_speed;
        ds.data(2, c) = records[i].thrust;
        ds.data(3, c) = records[i].egt;
        ds.data(4, c) = records[i].far;
    }

    ds.meta["sim.dt"] = format_double(params.dt);
    ds.meta["sim.tau_spool"] = format_double(params.tau_spool);
    ds.meta["sim.kp"] = format_double(params.kp);
    ds.meta["sim.ki"] = format_double(params.ki);
    ds.meta["sim.c_fuel"] = format_double(params.c_fuel);
    ds.meta["sim.far_min"] = format_double(params.far_min);
    ds.meta["sim.far_max"] = format_double(params.far_max);
    ds.meta["sim.thrust_a2"] = format_double(params.thrust_a2);
    ds.meta["sim.thrust_a1"] = format_double(params.thrust_a1);
    ds.meta["sim.thrust_a0"] = format_double(params.thrust_a0);
    ds.meta["sim.egt_b_far"] = format_double(params.egt_b_far);
    ds.meta["sim.egt_b_n2"] = format_double(params.egt_b_n2);
    ds.meta["sim.egt_b0"] = format_double(params.egt_b0);
    ds.meta["sim.noise_sigma"] = format_double(params.noise_sigma);
    ds.meta["sim.seed"] = std::to_string(params.seed);
    return ds;
}

FlightProfile profile_by_name(const std::string& name, std::uint64_t seed) {
    if (name == "default") return default_profile();
    if (name == "unit_step") return profile_library(ProfileKind::unit_step);
    if (name == "ascending") return profile_library(ProfileKind::ascending);
    if (name == "descending") return profile_library(ProfileKind::descending);
    if (name == "eccentric") return profile_library(ProfileKind::eccentric, seed);
    throw UsageError("unknown profile '" + name
                     + "' (expected default, unit_step, ascending, descending or eccentric)");
}

} // namespace twin
