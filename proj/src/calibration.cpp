#include "turbotwin/calibration.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "turbotwin/dataset_io.hpp"

namespace twin {

CalibrationFit fit_calibration(const std::vector<CalibrationPoint>& points) {
    const auto n = static_cast<Index>(points.size());
    if (n < 2) throw ConfigError("calibration needs at least 2 points, got " + std::to_string(n));

    Vecd volts(n), force(n);
    for (Index i = 0; i < n; ++i) {
        const CalibrationPoint& p = points[static_cast<std::size_t>(i)];
        if (!std::isfinite(p.mean_voltage) || !std::isfinite(p.applied_force))
            throw NumericError("calibration point " + std::to_string(i) + " is not finite");
        if (p.n_samples < 1)
            throw ConfigError("calibration point " + std::to_string(i) + " averages no samples");
        volts(i) = p.mean_voltage;
        force(i) = p.applied_force;
    }

    const double v_mean = volts.mean();
    const double f_mean = force.mean();
    const Vecd dv = volts.array() - v_mean;
    const double svv = dv.squaredNorm();
    if (svv == 0.0)
        throw NumericError("all calibration voltages are identical; slope is undetermined");

    CalibrationFit fit;
    fit.slope = dv.dot(force) / svv;
    fit.intercept = f_mean - fit.slope * v_mean;
    fit.n_points = static_cast<int>(n);
    const Vecd residual = force - (fit.slope * volts.array() + fit.intercept).matrix();
    fit.mse = residual.squaredNorm() / static_cast<double>(n);
    return fit;
}

Vecd apply_calibration(const CalibrationFit& fit, ConstRefVec<double> voltages) {
    return (fit.slope * voltages.array() + fit.intercept).matrix();
}

std::vector<CalibrationPoint> load_calibration_points(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open calibration file '" + path + "'");

    std::vector<CalibrationPoint> points;
    std::string line;
    int line_no = 0;
    while (++line_no, std::getline(in, line)) {
        std::stringstream ss(line);
        std::string volts, force;
        if (!std::getline(ss, volts, ',')) continue;
        const auto b = volts.find_first_not_of(" \t\r");
        if (b == std::string::npos || volts[b] == '#') continue;
        if (line_no == 1 && volts.find_first_not_of("+-.0123456789eE \t\r") != std::string::npos)
            continue; // header row
        if (!std::getline(ss, force))
            throw DataError(path + ":" + std::to_string(line_no)
                            + ": expected two columns (volts, newtons)");
        const std::string where = path + ":" + std::to_string(line_no);
        CalibrationPoint p;
        p.mean_voltage = parse_double(volts.substr(b, volts.find_last_not_of(" \t\r") - b + 1),
                                      where + ":col1");
        const auto fb = force.find_first_not_of(" \t\r");
        if (fb == std::string::npos)
            throw DataError(where + ":col2: empty force value");
        p.applied_force =
            parse_double(force.substr(fb, force.find_last_not_of(" \t\r") - fb + 1),
                         where + ":col2");
        points.push_back(p);
    }
    if (points.empty()) throw DataError(path + ": no calibration points");
    return points;
}

} // namespace twin
