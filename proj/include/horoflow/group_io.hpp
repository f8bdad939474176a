#pragma once

// Disk formats. Group specs, raw element lists, and density experiment
// configs are JSON documents; unknown keys are rejected everywhere so a
// typo in a config never silently falls back to a default.

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "horoflow/density.hpp"
#include "horoflow/fuchsian.hpp"

namespace horoflow {

// Ingestion policy for matrices read from disk. normalize_det accepts any
// positive determinant; det_tol is the acceptance width around 1 otherwise,
// overridable in the CLI through the HOROFLOW_TOL environment variable.
// Either way a matrix admitted from beyond the library's 1e-9 det-1
// invariant is rescaled onto determinant 1; closer ones pass through
// bitwise.
struct SpecOptions {
    bool normalize_det = false;
    double det_tol = 1e-9;
};

// Group spec document:
//   {"name": ..., "generators": [[a,b,c,d], ...], "names": [...],
//    "relators": [[1,2,-1,-2], ...], "kernel_weights": [...]}
// name, generators and names are required; the parsed presentation is
// validated before it is returned.
GroupPresentation read_group_spec(std::istream& in, const SpecOptions& opt = {});
GroupPresentation load_group_spec(const std::string& path, const SpecOptions& opt = {});
void write_group_spec(std::ostream& os, const GroupPresentation& G);

// Named example groups: "genus2" is the octagon group carrying kernel
// weights (1,0,0,0); "cylinder" is the deck group of the systole-2
// cylinder with weight (1).
std::optional<GroupPresentation> builtin_group(const std::string& name);

// A builtin when the name matches one, otherwise a spec file path.
GroupPresentation resolve_group(const std::string& name_or_path,
                                const SpecOptions& opt = {});

// Raw element list for crossing searches: {"elements": [[a,b,c,d], ...]}.
// Words are left empty.
std::vector<GroupElement> read_element_list(std::istream& in,
                                            const SpecOptions& opt = {});
std::vector<GroupElement> load_element_list(const std::string& path,
                                            const SpecOptions& opt = {});

FlowKind flow_kind_from_name(const std::string& name);

// Density experiment config document:
//   {"group": "genus2" or a path, "flow": "horocycle" | "affine",
//    "seed": [a,b,c,d] (optional, identity frame), "budgets": [...],
//    "ds": ..., "grid": {"x_bins", "y_bins", "angle_bins",
//    "radius" or "box": [x0,x1,y0,y1]}, "return_time": ... (optional)}
struct DensityConfig {
    std::string group;
    FlowKind flow = FlowKind::HOROCYCLE;
    MoebiusMap seed;
    std::vector<double> budgets;
    double ds = 0.0;
    int x_bins = 0;
    int y_bins = 0;
    int angle_bins = 0;
    std::optional<double> radius; // disk box about i when set, else the box below
    double x_min = 0.0, x_max = 0.0, y_min = 0.0, y_max = 0.0;
    std::optional<double> return_time;

    CoverageGrid make_grid() const;
};

DensityConfig read_density_config(std::istream& in);
DensityConfig load_density_config(const std::string& path);

} // namespace horoflow
