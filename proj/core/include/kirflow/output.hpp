#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "kirflow/driver.hpp"

namespace kirflow {

struct OutputFormats {
    bool csv = true;
    bool vtk = false;   // 2D/3D only; 3D also gets x-slices at 0, l1/4, l1/2, 3l1/4, l1
};

// Shortest decimal text that parses back to the same double.
std::string format_double(double v);

// Run summary as JSON text: settings, diagnostics, iteration counts, mass series, metrics.
std::string summary_json(const RunReport& r, const std::vector<std::string>& files = {});

// Writes per-output-time profiles (and grids) plus <name>_summary.json into dir, creating it.
// Returns the written paths in order. Throws IoError naming the path on failure.
std::vector<std::filesystem::path> write_outputs(const RunReport& r, const std::filesystem::path& dir,
                                                 const OutputFormats& formats = {});

}  // namespace kirflow
