#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "turbotwin/dataset.hpp"
#include "turbotwin/errors.hpp"

namespace twin {

/// Piecewise-constant requested shaft-speed schedule. Speeds are
/// dimensionless fractions of full speed; the last segment holds until the
/// simulation ends.
struct FlightProfile {
    struct Segment {
        double start_time = 0.0;     // seconds
        double requested_speed = 0.0; // fraction of full speed, [0.1, 1.0]
    };
    std::vector<Segment> segments;

    /// Setpoint at time t (first segment extends backwards, last forwards).
    double requested_at(double t) const;

    /// Throws ConfigError unless start times are strictly increasing from 0
    /// and every speed lies in [0.1, 1.0].
    void validate() const;
};

/// Surrogate closed-loop turbine model: first-order spool dynamics driven by
/// a PI controller on the fuel-to-air ratio, plus quadratic thrust and EGT
/// output maps with optional additive sensor noise.
struct EngineParams {
    double dt = 0.015;        // seconds per sample
    double tau_spool = 0.8;   // spool inertia time constant, seconds
    double kp = 0.02;         // proportional gain
    double ki = 0.05;         // integral gain
    double c_fuel = 30.0;     // steady-state speed per unit fuel-to-air ratio
    double far_min = 0.002;   // fuel-to-air ratio clamps
    double far_max = 0.04;
    double thrust_a2 = 16000.0; // thrust = a2*n^2 + a1*n + a0, newtons
    double thrust_a1 = 1200.0;
    double thrust_a0 = 2100.0;
    double egt_b_far = 8000.0; // egt = b_far*far + b_n2*n^2 + b0, deg C
    double egt_b_n2 = 150.0;
    double egt_b0 = 350.0;
    double noise_sigma = 0.0; // measurement-noise scale (dimensionless)
    std::uint64_t seed = 0;

    /// Throws ConfigError naming the offending field.
    void validate() const;
};

struct SimRecord {
    double time = 0.0;            // seconds
    double requested_speed = 0.0; // fraction of full speed
    double actual_speed = 0.0;
    double thrust = 0.0; // newtons
    double egt = 0.0;    // degrees Celsius
    double far = 0.0;    // fuel-to-air ratio
};

/// Runs the closed loop for floor(duration/dt)+1 steps. Deterministic for a
/// fixed seed. The engine starts settled at the profile's first setpoint.
std::vector<SimRecord> simulate(const FlightProfile& profile, const EngineParams& params,
                                double duration);

enum class ProfileKind { unit_step, ascending, descending, eccentric };

/// Descending-then-ascending staircase over [0.3, 0.95], thirteen 2 s
/// plateaus, 26 s total.
FlightProfile default_profile();

/// Canned test profiles, all designed for a 26 s window. The seed only
/// affects the eccentric kind.
FlightProfile profile_library(ProfileKind kind, std::uint64_t seed = 0);

/// Parses "default", "unit_step", "ascending", "descending" or "eccentric".
/// Throws UsageError on anything else. "default" maps to default_profile().
FlightProfile profile_by_name(const std::string& name, std::uint64_t seed = 0);

/// Nominal duration every canned profile is laid out for.
constexpr double kProfileDuration = 26.0;

/// Packs simulator records into an aligned dataset (channels
/// requested_speed, actual_speed, thrust, egt, far at rate 1/dt) with the
/// generating parameters recorded as run metadata.
RunDataset to_run_dataset(const std::vector<SimRecord>& records, const EngineParams& params,
                          const std::string& run_id);

} // namespace twin
