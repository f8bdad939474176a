// Command-line driver. Thin shell over the library: every behavior here is
// a composition of public calls, and all emitted formats are fixed-width
// deterministic text so repeated runs are byte-identical at any thread
// count.
//
// Exit codes: 0 success, 1 numeric failure, 2 usage/validation/parse
// errors, 3 inconclusive verdict (no Busemann cluster, no escaping
// subsequence).

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "CLI11.hpp"
#include "horoflow/density.hpp"
#include "horoflow/error.hpp"
#include "horoflow/fuchsian.hpp"
#include "horoflow/group_io.hpp"
#include "horoflow/hirsch.hpp"
#include "horoflow/hyperbolic.hpp"
#include "horoflow/keylemma.hpp"
#include "horoflow/textio.hpp"

using namespace horoflow;

namespace {

int exit_code_for(const Error& e) {
    switch (e.code()) {
    case Err::Parse:
    case Err::Validation:
        return 2;
    case Err::NoCluster:
    case Err::EscapeFail:
        return 3;
    default:
        return 1;
    }
}

template <typename F>
int guarded(F f) {
    try {
        return f();
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_code_for(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}

// Frames are ingested like spec matrices: positive determinant required,
// rescaled onto det 1 unless already within 1e-9.
MoebiusMap frame_matrix(const std::vector<double>& v) {
    const MoebiusMap m{v[0], v[1], v[2], v[3]};
    const double dt = m.det();
    if (!(dt > 0.0) || !std::isfinite(dt))
        throw Error(Err::Validation, "frame determinant must be positive");
    return std::fabs(dt - 1.0) <= 1e-9 ? m : m.normalized();
}

std::ostream& open_out(const std::string& path, std::ofstream& file) {
    if (path.empty())
        return std::cout;
    file.open(path);
    if (!file)
        throw Error(Err::Validation, "cannot open output file: " + path);
    return file;
}

std::string word_text(const GroupPresentation& G, const std::vector<int>& word) {
    if (word.empty())
        return "e";
    std::string s;
    for (int tok : word) {
        if (!s.empty())
            s += '.';
        s += G.names.at(static_cast<std::size_t>(std::abs(tok)) - 1);
        if (tok < 0)
            s += '\'';
    }
    return s;
}

std::string boundary_text(const BoundaryPoint& p) {
    return p.infinite ? "inf" : format_real(p.v);
}

void print_frame_row(std::ostream& os, const Frame& v) {
    const FrameGeometry geo = frame_geometry(v);
    os << format_real(geo.base.re) << ',' << format_real(geo.base.im) << ','
       << format_real(geo.direction) << ',' << format_real(v.g.a) << ','
       << format_real(v.g.b) << ',' << format_real(v.g.c) << ','
       << format_real(v.g.d) << '\n';
}

struct FlowArgs {
    std::vector<double> frame{1.0, 0.0, 0.0, 1.0};
    std::vector<double> t, s, alpha, beta;
    bool geodesic = false, horocycle = false, affine = false;
    std::string out;
};

int run_flow(const FlowArgs& a) {
    const int modes = (a.geodesic ? 1 : 0) + (a.horocycle ? 1 : 0) + (a.affine ? 1 : 0);
    if (modes != 1)
        throw Error(Err::Validation,
                    "choose exactly one of --geodesic, --horocycle, --affine");
    const Frame u{frame_matrix(a.frame)};
    std::ofstream file;
    std::ostream& os = open_out(a.out, file);

    if (a.geodesic) {
        if (a.t.empty())
            throw Error(Err::Validation, "--geodesic needs at least one --t value");
        os << "t,base_re,base_im,direction,a,b,c,d\n";
        for (double t : a.t) {
            os << format_real(t) << ',';
            print_frame_row(os, geodesic_flow(u, t));
        }
        return 0;
    }
    if (a.horocycle) {
        if (a.s.empty())
            throw Error(Err::Validation, "--horocycle needs at least one --s value");
        os << "s,base_re,base_im,direction,a,b,c,d\n";
        for (double s : a.s) {
            os << format_real(s) << ',';
            print_frame_row(os, horocycle_flow(u, s));
        }
        return 0;
    }
    if (a.alpha.empty())
        throw Error(Err::Validation, "--affine needs at least one --a value");
    std::vector<double> beta = a.beta;
    if (beta.empty())
        beta.assign(a.alpha.size(), 0.0);
    if (beta.size() != a.alpha.size())
        throw Error(Err::Validation, "--a and --b need the same number of values");
    for (double al : a.alpha)
        if (!(al > 0.0))
            throw Error(Err::Validation, "affine scale --a must be positive");
    os << "alpha,beta,base_re,base_im,direction,a,b,c,d\n";
    for (std::size_t k = 0; k < a.alpha.size(); ++k) {
        os << format_real(a.alpha[k]) << ',' << format_real(beta[k]) << ',';
        print_frame_row(os, affine_act(u, a.alpha[k], beta[k]));
    }
    return 0;
}

struct GroupArgs {
    std::string group;
    bool normalize_det = false;
    std::vector<double> band;
    int maxlen = 6;
    std::vector<double> frame{1.0, 0.0, 0.0, 1.0};
    std::string out;
};

SpecOptions spec_options(bool normalize_det, double det_tol) {
    SpecOptions opt;
    opt.normalize_det = normalize_det;
    opt.det_tol = det_tol;
    return opt;
}

int run_group_validate(const GroupArgs& a, double det_tol) {
    const GroupPresentation G = resolve_group(a.group, spec_options(a.normalize_det, det_tol));
    std::cout << "name " << G.name << '\n';
    std::cout << "generators " << G.generators.size() << '\n';
    bool all_ok = true;
    for (std::size_t k = 0; k < G.relators.size(); ++k) {
        const double res = projective_distance(word_matrix(G, G.relators[k]),
                                               MoebiusMap::identity());
        const bool ok = res <= 1e-8;
        all_ok = all_ok && ok;
        std::cout << "relator " << k << " residual " << format_real(res) << ' '
                  << (ok ? "ok" : "FAIL") << '\n';
    }
    return all_ok ? 0 : 1;
}

int run_group_geodesics(const GroupArgs& a, double det_tol) {
    const GroupPresentation G = resolve_group(a.group, spec_options(a.normalize_det, det_tol));
    const auto recs = closed_geodesics_in_band(G, a.maxlen, a.band[0], a.band[1]);
    std::ofstream file;
    std::ostream& os = open_out(a.out, file);
    os << "word,length,trace,repelling,attracting\n";
    for (const ClosedGeodesicRec& rec : recs) {
        os << word_text(G, rec.element.word) << ',' << format_real(rec.length) << ','
           << format_real(rec.element.matrix.trace()) << ','
           << boundary_text(rec.repelling) << ',' << boundary_text(rec.attracting)
           << '\n';
    }
    return 0;
}

int run_group_reduce(const GroupArgs& a, double det_tol) {
    const GroupPresentation G = resolve_group(a.group, spec_options(a.normalize_det, det_tol));
    const ReduceResult res = dirichlet_reduce(G, Frame{frame_matrix(a.frame)});
    const FrameGeometry geo = frame_geometry(res.reduced);
    std::cout << "base " << format_real(geo.base.re) << ' ' << format_real(geo.base.im)
              << '\n';
    std::cout << "direction " << format_real(geo.direction) << '\n';
    std::cout << "word " << word_text(G, res.applied.word) << '\n';
    std::cout << "steps " << res.applied.word.size() << '\n';
    return 0;
}

struct KeyLemmaArgs {
    std::string group;
    std::string elements;
    bool normalize_det = false;
    std::vector<double> frame{1.0, 0.0, 0.0, 1.0};
    KernelCoverConfig cfg; // defaults overwritten below
    std::vector<double> band;
    std::string json_path;
    std::string csv_path;
};

int run_keylemma(const KeyLemmaArgs& a, double det_tol) {
    const Frame u{frame_matrix(a.frame)};
    KernelCoverConfig cfg = a.cfg;
    if (!a.band.empty()) {
        cfg.band_lo = a.band[0];
        cfg.band_hi = a.band[1];
    }

    KeyLemmaRun run;
    if (!a.elements.empty()) {
        if (!a.group.empty())
            throw Error(Err::Validation, "choose one of --group or --elements");
        if (a.band.empty())
            throw Error(Err::Validation, "--elements needs an explicit --band");
        const auto elems =
            load_element_list(a.elements, spec_options(a.normalize_det, det_tol));
        const auto crossings =
            find_crossings(elems, u, cfg.band_lo, cfg.band_hi, cfg.horizon);
        if (crossings.size() < 5)
            throw Error(Err::NoCluster, "fewer than 5 crossings found in the band");
        const int k = select_power(cfg.band_lo, cfg.margin);
        run = verify_convergence(u, crossings, k, cfg.band_lo, cfg.band_hi, cfg.eps_xi,
                                 cfg.eps_b);
    } else {
        if (a.group.empty())
            throw Error(Err::Validation, "one of --group or --elements is required");
        const GroupPresentation G =
            resolve_group(a.group, spec_options(a.normalize_det, det_tol));
        run = run_kernel_cover(G, u, cfg);
    }

    std::cout << "band " << format_real(run.band_lo) << ' ' << format_real(run.band_hi)
              << '\n';
    std::cout << "power " << run.power << '\n';
    std::cout << "crossings " << run.crossings.size() << '\n';
    std::cout << "t0 " << format_real(run.t0) << '\n';
    std::cout << "selected " << run.selected.size() << '\n';
    if (!run.witnesses.empty())
        std::cout << "frame_error " << format_real(run.witnesses.back().frame_error)
                  << '\n';

    if (!a.json_path.empty()) {
        std::ofstream file;
        write_run_json(open_out(a.json_path, file), run);
    }
    if (!a.csv_path.empty()) {
        std::ofstream file;
        write_crossings_csv(open_out(a.csv_path, file), run);
    }
    return 0;
}

struct HirschArgs {
    int qmax = 16;
    long long p = 0;
    long long q = 1;
    int depth = 5;
    double cuff = 1.0;
    std::string out;
};

int run_hirsch_classify(const HirschArgs& a) {
    std::ofstream file;
    write_leaf_classification_csv(open_out(a.out, file), a.qmax);
    return 0;
}

int run_hirsch_tree(const HirschArgs& a) {
    const PantsTree tree = pants_tree(AngleParam(a.p, a.q), a.depth, a.cuff);
    std::ofstream file;
    write_tree_edges(open_out(a.out, file), tree);
    return 0;
}

struct DensityArgs {
    std::string config;
    std::string flow_override;
    bool normalize_det = false;
    std::string out;
    std::string points;
    std::string heat;
};

void write_points_csv(std::ostream& os, const OrbitSample& sample) {
    os << "base_re,base_im,direction\n";
    for (const ReducedFrame& f : sample.frames)
        os << format_real(f.base.re) << ',' << format_real(f.base.im) << ','
           << format_real(f.direction) << '\n';
}

void write_heat_csv(std::ostream& os, const CoverageGrid& grid) {
    os << "x_bin,y_bin,hits\n";
    for (int yb = 0; yb < grid.y_bins; ++yb)
        for (int xb = 0; xb < grid.x_bins; ++xb) {
            int n = 0;
            for (int ab = 0; ab < grid.angle_bins; ++ab)
                n += grid.hit[grid.cell_id(xb, yb, ab)] ? 1 : 0;
            os << xb << ',' << yb << ',' << n << '\n';
        }
}

int run_density(const DensityArgs& a, double det_tol) {
    DensityConfig cfg = load_density_config(a.config);
    if (!a.flow_override.empty())
        cfg.flow = flow_kind_from_name(a.flow_override);
    const GroupPresentation G =
        resolve_group(cfg.group, spec_options(a.normalize_det, det_tol));
    const Frame u{cfg.seed};
    const CoverageGrid grid = cfg.make_grid();

    std::vector<CoverageRow> rows;
    if (cfg.flow == FlowKind::HOROCYCLE) {
        const DichotomyReport rep =
            dichotomy_experiment(G, u, cfg.budgets, cfg.ds, grid, cfg.return_time);
        rows = rep.rows;
    } else if (cfg.flow == FlowKind::AFFINE) {
        for (double budget : cfg.budgets) {
            const AffineProbeReport rep =
                affine_minimality_probe(G, u, budget, cfg.ds, grid);
            rows.push_back(rep.horocycle);
            rows.push_back(rep.affine);
        }
    } else {
        throw Error(Err::Validation,
                    "coverage experiments drive the horocycle or affine flow; "
                    "use the flow subcommand for plain geodesic trajectories");
    }

    std::ofstream file;
    write_coverage_csv(open_out(a.out, file), rows);

    if (!a.points.empty() || !a.heat.empty()) {
        const OrbitSample sample =
            sample_orbit(G, u, cfg.flow, cfg.budgets.back(), cfg.ds);
        if (!a.points.empty()) {
            std::ofstream pf;
            write_points_csv(open_out(a.points, pf), sample);
        }
        if (!a.heat.empty()) {
            CoverageGrid heat_grid = grid;
            heat_grid.clear();
            heat_grid.mark(sample);
            std::ofstream hf;
            write_heat_csv(open_out(a.heat, hf), heat_grid);
        }
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    double det_tol = 1e-9;
    if (const char* env = std::getenv("HOROFLOW_TOL")) {
        char* end = nullptr;
        det_tol = std::strtod(env, &end);
        if (end == env || *end != '\0' || !(det_tol > 0.0) || !std::isfinite(det_tol)) {
            std::cerr << "error: HOROFLOW_TOL must be a positive number\n";
            return 2;
        }
    }

    CLI::App app{"flows, Fuchsian groups, horoball shadowing, pants towers and "
                 "orbit-density experiments on hyperbolic surfaces"};
    app.require_subcommand(1);
    int threads = 0;
    app.add_option("--threads", threads, "cap worker threads (output is identical "
                                         "for any value)")
        ->check(CLI::PositiveNumber);

    FlowArgs flow_args;
    CLI::App* flow = app.add_subcommand("flow", "evaluate flows from a frame, CSV "
                                                "trajectory per parameter");
    flow->add_option("--frame", flow_args.frame, "frame matrix a b c d")->expected(4);
    flow->add_flag("--geodesic", flow_args.geodesic, "geodesic flow g_t");
    flow->add_flag("--horocycle", flow_args.horocycle, "horocycle flow h_s");
    flow->add_flag("--affine", flow_args.affine, "affine action (alpha, beta)");
    flow->add_option("--t", flow_args.t, "geodesic times");
    flow->add_option("--s", flow_args.s, "horocycle times");
    flow->add_option("--a", flow_args.alpha, "affine scales (> 0)");
    flow->add_option("--b", flow_args.beta, "affine shears (default 0)");
    flow->add_option("--out", flow_args.out, "write CSV here instead of stdout");

    GroupArgs group_args;
    CLI::App* group = app.add_subcommand("group", "group spec utilities");
    group->require_subcommand(1);
    CLI::App* gvalidate = group->add_subcommand("validate", "check spec and relators");
    CLI::App* ggeod = group->add_subcommand("geodesics", "closed geodesics in a "
                                                         "length band, CSV");
    CLI::App* greduce = group->add_subcommand("reduce", "Dirichlet-reduce a frame");
    for (CLI::App* sub : {gvalidate, ggeod, greduce}) {
        sub->add_option("--group", group_args.group, "builtin name (genus2, cylinder) "
                                                     "or spec path")
            ->required();
        sub->add_flag("--normalize-det", group_args.normalize_det,
                      "rescale spec matrices onto det 1");
    }
    ggeod->add_option("--band", group_args.band, "length band lo hi")
        ->expected(2)
        ->required();
    ggeod->add_option("--maxlen", group_args.maxlen, "max word length")
        ->check(CLI::PositiveNumber);
    ggeod->add_option("--out", group_args.out, "write CSV here instead of stdout");
    greduce->add_option("--frame", group_args.frame, "frame matrix a b c d")->expected(4);

    KeyLemmaArgs kl_args;
    kl_args.cfg.tube_radius = 13.0;
    kl_args.cfg.tube_length = 12.0;
    kl_args.cfg.horizon = 13.0;
    CLI::App* keylemma = app.add_subcommand("keylemma", "kernel-cover horoball "
                                                        "shadowing run");
    keylemma->add_option("--group", kl_args.group, "builtin name or spec path with "
                                                   "kernel weights");
    keylemma->add_option("--elements", kl_args.elements, "raw element list document "
                                                         "(needs --band)");
    keylemma->add_flag("--normalize-det", kl_args.normalize_det,
                       "rescale ingested matrices onto det 1");
    keylemma->add_option("--frame", kl_args.frame, "frame matrix a b c d")->expected(4);
    keylemma->add_option("--maxlen", kl_args.cfg.max_word_length, "max word length");
    keylemma->add_option("--tube", kl_args.cfg.tube_radius, "pruning tube radius");
    keylemma->add_option("--tube-length", kl_args.cfg.tube_length,
                         "pruning tube segment length");
    keylemma->add_option("--horizon", kl_args.cfg.horizon, "crossing horizon");
    keylemma->add_option("--band-factor", kl_args.cfg.band_factor,
                         "band = [a0, factor*a0] when no --band");
    keylemma->add_option("--band", kl_args.band, "explicit band lo hi")->expected(2);
    keylemma->add_option("--margin", kl_args.cfg.margin, "power selection margin");
    keylemma->add_option("--eps-xi", kl_args.cfg.eps_xi, "escape threshold");
    keylemma->add_option("--eps-b", kl_args.cfg.eps_b, "cluster gap");
    keylemma->add_option("--cap", kl_args.cfg.element_cap, "enumeration element cap");
    keylemma->add_option("--json", kl_args.json_path, "write the run report here");
    keylemma->add_option("--csv", kl_args.csv_path, "write the crossing table here");

    HirschArgs hirsch_args;
    CLI::App* hirsch = app.add_subcommand("hirsch", "doubling-map leaf combinatorics");
    hirsch->require_subcommand(1);
    CLI::App* hclassify = hirsch->add_subcommand("classify", "leaf types for all "
                                                             "p/q with q <= qmax, CSV");
    hclassify->add_option("--qmax", hirsch_args.qmax, "largest denominator")
        ->check(CLI::PositiveNumber);
    hclassify->add_option("--out", hirsch_args.out, "write CSV here instead of stdout");
    CLI::App* htree = hirsch->add_subcommand("tree", "pants tower edge list for a "
                                                     "base angle");
    htree->add_option("--p", hirsch_args.p, "angle numerator")->required();
    htree->add_option("--q", hirsch_args.q, "angle denominator")->required();
    htree->add_option("--depth", hirsch_args.depth, "tree depth (levels)")
        ->check(CLI::PositiveNumber);
    htree->add_option("--cuff", hirsch_args.cuff, "uniform cuff length");
    htree->add_option("--out", hirsch_args.out, "write edges here instead of stdout");

    DensityArgs density_args;
    CLI::App* density = app.add_subcommand("density", "orbit coverage experiment "
                                                      "from a config document");
    density->add_option("--config", density_args.config, "experiment config path")
        ->required();
    density->add_option("--flow", density_args.flow_override,
                        "override the config's flow kind");
    density->add_flag("--normalize-det", density_args.normalize_det,
                      "rescale spec matrices onto det 1");
    density->add_option("--out", density_args.out, "write coverage CSV here");
    density->add_option("--points", density_args.points,
                        "also write the reduced orbit point cloud (largest budget)");
    density->add_option("--heat", density_args.heat,
                        "also write per-cell hit counts (largest budget)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

#ifdef _OPENMP
    if (threads > 0)
        omp_set_num_threads(threads);
#endif

    if (flow->parsed())
        return guarded([&] { return run_flow(flow_args); });
    if (group->parsed()) {
        if (gvalidate->parsed())
            return guarded([&] { return run_group_validate(group_args, det_tol); });
        if (ggeod->parsed())
            return guarded([&] { return run_group_geodesics(group_args, det_tol); });
        return guarded([&] { return run_group_reduce(group_args, det_tol); });
    }
    if (keylemma->parsed())
        return guarded([&] { return run_keylemma(kl_args, det_tol); });
    if (hirsch->parsed()) {
        if (hclassify->parsed())
            return guarded([&] { return run_hirsch_classify(hirsch_args); });
        return guarded([&] { return run_hirsch_tree(hirsch_args); });
    }
    return guarded([&] { return run_density(density_args, det_tol); });
}
