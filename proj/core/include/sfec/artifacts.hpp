#pragma once

#include <string>
#include <vector>

#include "sfec/metrics.hpp"
#include "sfec/sinc.hpp"

namespace sfec {

/// Writes to a temp file in the same directory, then renames, so readers see
/// either the full file or none.
void atomic_write_file(const std::string& path, const std::string& content);

std::string metrics_to_json(const EvalReport& report);

/// Header-labeled rows and columns; rows are true classes.
std::string confusion_to_csv(const EvalReport& report, const std::vector<std::string>& labels);

/// The SVG is derived from the CSV text alone, so regenerating from a written
/// confusion.csv reproduces the plot byte for byte.
std::string confusion_svg_from_csv(const std::string& csv);

/// One row per filter: index, band edges in Hz, then the magnitude response
/// sampled at 257 points from DC to Nyquist.
std::string filters_to_csv(const SincLayer<float>& sinc);

}  // namespace sfec
