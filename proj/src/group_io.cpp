#include "horoflow/group_io.hpp"

#include <cmath>
#include <fstream>
#include <ostream>
#include <set>
#include <string>

#include "json.hpp"

namespace horoflow {

namespace {

using nlohmann::json;
using ordered = nlohmann::ordered_json;

json parse_stream(std::istream& in, const char* what) {
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw Error(Err::Parse, std::string(what) + ": " + e.what());
    }
}

void require_object(const json& j, const char* what) {
    if (!j.is_object())
        throw Error(Err::Parse, std::string(what) + " must be a JSON object");
}

void reject_unknown_keys(const json& j, const std::set<std::string>& allowed,
                         const char* what) {
    for (auto it = j.begin(); it != j.end(); ++it)
        if (allowed.find(it.key()) == allowed.end())
            throw Error(Err::Parse,
                        std::string(what) + ": unknown key \"" + it.key() + "\"");
}

const json& require_key(const json& j, const char* key, const char* what) {
    const auto it = j.find(key);
    if (it == j.end())
        throw Error(Err::Parse, std::string(what) + ": missing key \"" + key + "\"");
    return *it;
}

double as_number(const json& j, const std::string& what) {
    if (!j.is_number() || !std::isfinite(j.get<double>()))
        throw Error(Err::Parse, what + " must be a finite number");
    return j.get<double>();
}

int as_int(const json& j, const std::string& what) {
    if (!j.is_number_integer())
        throw Error(Err::Parse, what + " must be an integer");
    return j.get<int>();
}

MoebiusMap matrix_from(const json& j, const std::string& what, const SpecOptions& opt) {
    if (!j.is_array() || j.size() != 4)
        throw Error(Err::Parse, what + " must be a row-major [a, b, c, d] array");
    MoebiusMap m{as_number(j[0], what), as_number(j[1], what), as_number(j[2], what),
                 as_number(j[3], what)};
    const double dt = m.det();
    if (opt.normalize_det) {
        if (!(dt > 0.0) || !std::isfinite(dt))
            throw Error(Err::Parse, what + ": determinant must be positive");
    } else if (!(std::fabs(dt - 1.0) <= opt.det_tol)) {
        throw Error(Err::Parse,
                    what + ": determinant differs from 1 beyond tolerance");
    }
    // Matrices near determinant 1 pass through untouched so round trips are
    // bitwise; anything admitted from further away is rescaled onto the
    // library's det-1 invariant.
    if (std::fabs(dt - 1.0) <= 1e-9)
        return m;
    return m.normalized();
}

std::ifstream open_file(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw Error(Err::Parse, "cannot open file: " + path);
    return in;
}

} // namespace

GroupPresentation read_group_spec(std::istream& in, const SpecOptions& opt) {
    const json j = parse_stream(in, "group spec");
    require_object(j, "group spec");
    reject_unknown_keys(j, {"name", "generators", "names", "relators", "kernel_weights"},
                        "group spec");

    GroupPresentation G;
    const json& name = require_key(j, "name", "group spec");
    if (!name.is_string())
        throw Error(Err::Parse, "group spec: name must be a string");
    G.name = name.get<std::string>();

    const json& gens = require_key(j, "generators", "group spec");
    if (!gens.is_array() || gens.empty())
        throw Error(Err::Parse, "group spec: generators must be a nonempty array");
    for (std::size_t k = 0; k < gens.size(); ++k)
        G.generators.push_back(
            matrix_from(gens[k], "generators[" + std::to_string(k) + "]", opt));

    const json& names = require_key(j, "names", "group spec");
    if (!names.is_array())
        throw Error(Err::Parse, "group spec: names must be an array");
    for (std::size_t k = 0; k < names.size(); ++k) {
        if (!names[k].is_string())
            throw Error(Err::Parse, "group spec: names entries must be strings");
        G.names.push_back(names[k].get<std::string>());
    }

    if (j.contains("relators")) {
        const json& rel = j["relators"];
        if (!rel.is_array())
            throw Error(Err::Parse, "group spec: relators must be an array of words");
        for (std::size_t k = 0; k < rel.size(); ++k) {
            const json& word = rel[k];
            if (!word.is_array())
                throw Error(Err::Parse, "group spec: each relator must be an array");
            std::vector<int> w;
            for (const json& tok : word)
                w.push_back(as_int(tok, "relators[" + std::to_string(k) + "] token"));
            G.relators.push_back(std::move(w));
        }
    }

    if (j.contains("kernel_weights")) {
        const json& kw = j["kernel_weights"];
        if (!kw.is_array())
            throw Error(Err::Parse, "group spec: kernel_weights must be an array");
        for (const json& w : kw)
            G.kernel_weights.push_back(as_int(w, "kernel_weights entry"));
    }

    validate_presentation(G);
    return G;
}

GroupPresentation load_group_spec(const std::string& path, const SpecOptions& opt) {
    std::ifstream in = open_file(path);
    return read_group_spec(in, opt);
}

void write_group_spec(std::ostream& os, const GroupPresentation& G) {
    ordered j;
    j["name"] = G.name;
    auto gens = ordered::array();
    for (const MoebiusMap& m : G.generators)
        gens.push_back({m.a, m.b, m.c, m.d});
    j["generators"] = std::move(gens);
    j["names"] = G.names;
    if (!G.relators.empty())
        j["relators"] = G.relators;
    if (!G.kernel_weights.empty())
        j["kernel_weights"] = G.kernel_weights;
    os << j.dump(2) << '\n';
}

std::optional<GroupPresentation> builtin_group(const std::string& name) {
    if (name == "genus2") {
        GroupPresentation G = genus2_octagon_group();
        G.kernel_weights = {1, 0, 0, 0};
        return G;
    }
    if (name == "cylinder") {
        GroupPresentation G = cylinder_group(HyperbolicCylinder(2.0));
        G.kernel_weights = {1};
        return G;
    }
    return std::nullopt;
}

GroupPresentation resolve_group(const std::string& name_or_path,
                                const SpecOptions& opt) {
    if (std::optional<GroupPresentation> G = builtin_group(name_or_path))
        return *G;
    return load_group_spec(name_or_path, opt);
}

std::vector<GroupElement> read_element_list(std::istream& in, const SpecOptions& opt) {
    const json j = parse_stream(in, "element list");
    require_object(j, "element list");
    reject_unknown_keys(j, {"elements"}, "element list");
    const json& rows = require_key(j, "elements", "element list");
    if (!rows.is_array() || rows.empty())
        throw Error(Err::Parse, "element list: elements must be a nonempty array");
    std::vector<GroupElement> out;
    for (std::size_t k = 0; k < rows.size(); ++k)
        out.push_back(GroupElement{
            matrix_from(rows[k], "elements[" + std::to_string(k) + "]", opt), {}});
    return out;
}

std::vector<GroupElement> load_element_list(const std::string& path,
                                            const SpecOptions& opt) {
    std::ifstream in = open_file(path);
    return read_element_list(in, opt);
}

FlowKind flow_kind_from_name(const std::string& name) {
    if (name == "horocycle")
        return FlowKind::HOROCYCLE;
    if (name == "geodesic")
        return FlowKind::GEODESIC;
    if (name == "affine")
        return FlowKind::AFFINE;
    throw Error(Err::Parse, "unknown flow kind: " + name);
}

CoverageGrid DensityConfig::make_grid() const {
    if (radius)
        return grid_for_disk(x_bins, y_bins, angle_bins, *radius);
    return CoverageGrid(x_bins, y_bins, angle_bins, x_min, x_max, y_min, y_max);
}

DensityConfig read_density_config(std::istream& in) {
    const json j = parse_stream(in, "density config");
    require_object(j, "density config");
    reject_unknown_keys(
        j, {"group", "flow", "seed", "budgets", "ds", "grid", "return_time"},
        "density config");

    DensityConfig cfg;
    const json& group = require_key(j, "group", "density config");
    if (!group.is_string() || group.get<std::string>().empty())
        throw Error(Err::Parse, "density config: group must be a nonempty string");
    cfg.group = group.get<std::string>();

    const json& flow = require_key(j, "flow", "density config");
    if (!flow.is_string())
        throw Error(Err::Parse, "density config: flow must be a string");
    cfg.flow = flow_kind_from_name(flow.get<std::string>());

    if (j.contains("seed"))
        cfg.seed = matrix_from(j["seed"], "seed", SpecOptions{true, 1e-9});

    const json& budgets = require_key(j, "budgets", "density config");
    if (!budgets.is_array() || budgets.empty())
        throw Error(Err::Parse, "density config: budgets must be a nonempty array");
    for (std::size_t k = 0; k < budgets.size(); ++k) {
        const double b = as_number(budgets[k], "budgets[" + std::to_string(k) + "]");
        if (!(b > 0.0))
            throw Error(Err::Parse, "density config: budgets must be positive");
        if (!cfg.budgets.empty() && !(b > cfg.budgets.back()))
            throw Error(Err::Parse,
                        "density config: budgets must be strictly increasing");
        cfg.budgets.push_back(b);
    }

    cfg.ds = as_number(require_key(j, "ds", "density config"), "ds");
    if (!(cfg.ds > 0.0))
        throw Error(Err::Parse, "density config: ds must be positive");

    const json& grid = require_key(j, "grid", "density config");
    require_object(grid, "grid");
    reject_unknown_keys(grid, {"x_bins", "y_bins", "angle_bins", "radius", "box"},
                        "grid");
    cfg.x_bins = as_int(require_key(grid, "x_bins", "grid"), "x_bins");
    cfg.y_bins = as_int(require_key(grid, "y_bins", "grid"), "y_bins");
    cfg.angle_bins = as_int(require_key(grid, "angle_bins", "grid"), "angle_bins");
    const bool has_radius = grid.contains("radius");
    const bool has_box = grid.contains("box");
    if (has_radius == has_box)
        throw Error(Err::Parse, "grid: exactly one of radius or box is required");
    if (has_radius) {
        cfg.radius = as_number(grid["radius"], "radius");
    } else {
        const json& box = grid["box"];
        if (!box.is_array() || box.size() != 4)
            throw Error(Err::Parse, "grid: box must be [x_min, x_max, y_min, y_max]");
        cfg.x_min = as_number(box[0], "box[0]");
        cfg.x_max = as_number(box[1], "box[1]");
        cfg.y_min = as_number(box[2], "box[2]");
        cfg.y_max = as_number(box[3], "box[3]");
    }
    (void)cfg.make_grid(); // surface bad grid shapes at parse time

    if (j.contains("return_time")) {
        const double t0 = as_number(j["return_time"], "return_time");
        if (!(t0 > 0.0))
            throw Error(Err::Parse, "density config: return_time must be positive");
        cfg.return_time = t0;
    }
    return cfg;
}

DensityConfig load_density_config(const std::string& path) {
    std::ifstream in = open_file(path);
    return read_density_config(in);
}

} // namespace horoflow
