#pragma once

#include <string>

#include "turbotwin/ngrc.hpp"

namespace twin {

/// Versioned JSON document capturing every model field at full float
/// precision; deserialize(serialize(m)) predicts bit-identically.
std::string serialize(const TrainedModel& model);

/// Rejects unknown versions and any document violating the model's
/// structural invariants (DataError).
TrainedModel deserialize(const std::string& bytes);

void save_model(const TrainedModel& model, const std::string& path);
TrainedModel load_model(const std::string& path);

} // namespace twin
