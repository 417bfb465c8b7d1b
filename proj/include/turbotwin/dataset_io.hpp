#pragma once

#include <string>

#include "turbotwin/dataset.hpp"

namespace twin {

/// Loads a run file in either supported flavor:
///  - sectioned: `# key: value` metadata, then one `## channel,<name>,<unit>,<rate>`
///    header per channel followed by one value per line;
///  - wide: `# key: value` metadata, then a `time,<name>,...` CSV of
///    pre-aligned columns (rate inferred from the time column).
/// See docs/file-formats.md. Malformed headers, non-numeric cells and NaNs
/// raise DataError with the row/column location.
RawRun load_run(const std::string& path);

/// Writes a dataset as a wide run file. Floats are written with
/// shortest-round-trip precision, so identical datasets produce
/// byte-identical files.
void save_run(const RunDataset& ds, const std::string& path);

/// Shortest decimal representation that parses back to exactly x.
std::string format_double(double x);

/// Strict double parser (whole string must be consumed, NaN/inf rejected).
/// `where` prefixes the error message.
double parse_double(const std::string& text, const std::string& where);

} // namespace twin
