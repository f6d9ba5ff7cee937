#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "kirflow/oracle.hpp"
#include "kirflow/soil_field.hpp"
#include "kirflow/stepper.hpp"

namespace kirflow {

struct Units {
    std::string length = "m";
    std::string time = "day";
    bool operator==(const Units&) const = default;
};

// A named soil table file: every record shares one unit system.
struct SoilTable {
    std::string name;
    std::string description;
    Units units;
    std::vector<SoilParams> soils;
    std::vector<std::optional<double>> theta_0;   // parallel to soils, when the table lists one

    const SoilParams* find(const std::string& soil) const;
};

// Pass/fail thresholds used by verify; unset entries are reported but not enforced.
struct Thresholds {
    std::optional<double> rmse_max;
    std::optional<double> l1_max;
    std::optional<double> mass_balance_max;   // |ΔI - net inflow| / I(T)
    std::optional<double> mass_compare_max;   // relative gap to the matched 1D oracle mass (2D/3D)
    std::optional<double> mass_compare_until; // compare only up to this time
    bool operator==(const Thresholds&) const = default;
};

struct Scenario {
    std::string name;
    std::string description;
    Units units;
    Extents extents;
    Geometry geometry;
    InitialCondition initial;
    BoundarySpec boundary;
    double c = 0.6;
    int n_s = 3;
    std::array<int, 3> counts{1, 1, 1};   // Nx, Ny, Nz
    StepperConfig stepper;
    double t_end = 0.0;
    std::vector<double> output_times;
    OracleConfig oracle;
    Thresholds thresholds;

    SoilField field() const { return SoilField(geometry, extents); }
    // Throws ConfigError on the first violated invariant.
    void validate() const;
    bool operator==(const Scenario&) const = default;
};

struct ParseOptions {
    // Directories searched for "<table>.yaml" after the scenario's own soils/ and ../soils/.
    std::vector<std::filesystem::path> table_dirs;
};

// Built-in search path: $KIRFLOW_DATA_DIR/soils, then the source and install data trees.
std::vector<std::filesystem::path> default_table_dirs();

SoilTable parse_soil_table(const std::filesystem::path& path);
std::vector<SoilTable> list_soil_tables(const std::vector<std::filesystem::path>& dirs = default_table_dirs());

Scenario parse_scenario(const std::filesystem::path& path, const ParseOptions& opt = {});
// name is used in error locations.
Scenario parse_scenario_text(const std::string& text, const std::string& name = "<string>",
                             const ParseOptions& opt = {});

// Fully inlined form; parse_scenario_text(serialize_scenario(s)) == s.
std::string serialize_scenario(const Scenario& s);

struct Overrides {
    std::optional<double> grid_scale;   // N -> round((N - 1) f) + 1 on every active axis
    std::optional<double> dt;
    std::optional<double> t_end;        // output times beyond it are dropped, t_end is added
};

Scenario apply_overrides(Scenario s, const Overrides& o);

}  // namespace kirflow
