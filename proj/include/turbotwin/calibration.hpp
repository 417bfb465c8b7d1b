#pragma once

#include <string>
#include <vector>

#include "turbotwin/errors.hpp"
#include "turbotwin/types.hpp"

namespace twin {

/// One averaged load-cell reading: a known applied force (negative =
/// compression) against the mean voltage it produced.
struct CalibrationPoint {
    double applied_force = 0.0; // newtons
    double mean_voltage = 0.0;  // volts
    int n_samples = 1;          // raw readings averaged into mean_voltage
};

/// Least-squares line mapping volts to newtons.
struct CalibrationFit {
    double slope = 0.0;     // newtons per volt
    double intercept = 0.0; // newtons
    double mse = 0.0;       // mean squared residual, newtons^2
    int n_points = 0;
};

/// Ordinary least squares of force on voltage. Requires at least two points
/// with at least two distinct voltages.
CalibrationFit fit_calibration(const std::vector<CalibrationPoint>& points);

/// Elementwise slope * v + intercept.
Vecd apply_calibration(const CalibrationFit& fit, ConstRefVec<double> voltages);

/// Two-column CSV (volts, newtons), optional `#` comment lines and an
/// optional `voltage,force` header row.
std::vector<CalibrationPoint> load_calibration_points(const std::string& path);

} // namespace twin
