// niforge: nearest negative-imaginary systems toolkit.
//
// Subcommands: check-ni, nearest-ni, flex-plant, lqg, bode, step, pipeline.
// Exit codes: 0 ok / property holds, 1 property fails, 2 input error,
// 3 iteration budget exhausted, 4 synthesis failure.

#include <CLI11.hpp>
#include <json.hpp>

#include "niforge/lqg.hpp"
#include "niforge/nearest_ni.hpp"
#include "niforge/ni_analysis.hpp"
#include "niforge/ph_form.hpp"
#include "niforge/state_space.hpp"
#include "niforge/system_io.hpp"

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>

namespace fs = std::filesystem;
using nlohmann::json;
using namespace niforge;

namespace {

enum ExitCode : int {
    kOk = 0,
    kPropertyFails = 1,
    kInputError = 2,
    kIterationBudget = 3,
    kSynthesisFailure = 4,
};

int default_grid_points() {
    if (const char* env = std::getenv("NI_FORGE_GRID_POINTS")) {
        const int v = std::atoi(env);
        if (v >= 1) return v;
        std::cerr << "warning: ignoring invalid NI_FORGE_GRID_POINTS='" << env << "'\n";
    }
    return 500;
}

struct GridOptions {
    double wmin = 1e-2;
    double wmax = 1e3;
    int points = default_grid_points();

    void attach(CLI::App* cmd) {
        cmd->add_option("--wmin", wmin, "lowest angular frequency, rad/s");
        cmd->add_option("--wmax", wmax, "highest angular frequency, rad/s");
        cmd->add_option("--points", points, "number of logarithmic grid points");
    }
    FrequencyGrid build() const { return FrequencyGrid::logspace(wmin, wmax, points); }
};

NamedSystem load_system_checked(const std::string& path) {
    NamedSystem ns = load_system(path);
    const std::string warn = minimality_warning(ns.sys);
    if (!warn.empty()) std::cerr << "warning: " << path << ": " << warn << "\n";
    return ns;
}

json verdict_to_json(const NiVerdict& v) {
    return json{{"is_ni", v.is_ni},
                {"min_margin", v.min_margin},
                {"worst_omega", v.worst_omega},
                {"rhp_pole_count", v.rhp_pole_count},
                {"d_symmetric", v.d_symmetric},
                {"skipped_omegas", v.skipped_omegas}};
}

json report_to_json(const PerturbationReport& r) {
    return json{{"A", {{"abs", r.abs_a}, {"rel", r.rel_a}}},
                {"B", {{"abs", r.abs_b}, {"rel", r.rel_b}}},
                {"C", {{"abs", r.abs_c}, {"rel", r.rel_c}}},
                {"D", {{"abs", r.abs_d}, {"rel", r.rel_d}}},
                {"total_squared", r.total}};
}

const char* stop_reason_name(StopReason s) {
    switch (s) {
        case StopReason::ExactZero: return "exact_zero";
        case StopReason::RelTolWindow: return "rel_tol_window";
        case StopReason::Stalled: return "stalled";
        case StopReason::MaxIter: return "max_iter";
    }
    return "unknown";
}

void write_trace_csv(const fs::path& path, const std::vector<double>& trace) {
    std::vector<std::vector<double>> rows;
    rows.reserve(trace.size());
    for (std::size_t i = 0; i < trace.size(); ++i)
        rows.push_back({static_cast<double>(i), trace[i]});
    write_csv_atomic(path, {"iter", "objective"}, rows);
}

void write_bode_csv(const fs::path& path, const StateSpace& sys, const FrequencyGrid& grid) {
    if (sys.m() != 1) throw IoError("bode output requires a SISO system");
    std::vector<std::vector<double>> rows;
    rows.reserve(grid.size());
    for (const double w : grid.points()) {
        const Complex g = tf_eval(sys, Complex(0.0, w))(0, 0);
        rows.push_back({w, 20.0 * std::log10(std::abs(g)), std::arg(g) * 180.0 / M_PI,
                        g.real(), g.imag()});
    }
    write_csv_atomic(path, {"omega_rad_s", "magnitude_db", "phase_deg", "re", "im"}, rows);
}

void write_step_csv(const fs::path& path, const StateSpace& sys, double horizon, double dt) {
    const auto traj = step_response(sys, horizon, dt);
    std::vector<std::string> header{"t_s"};
    if (sys.m() == 1) {
        header.push_back("y");
    } else {
        for (Eigen::Index i = 0; i < sys.m(); ++i) header.push_back("y" + std::to_string(i));
    }
    std::vector<std::vector<double>> rows;
    rows.reserve(traj.size());
    for (const auto& s : traj) {
        std::vector<double> row{s.t};
        for (Eigen::Index i = 0; i < s.y.size(); ++i) row.push_back(s.y[i]);
        rows.push_back(std::move(row));
    }
    write_csv_atomic(path, header, rows);
}

// Weight option: empty = default, scalar = scaled identity, '@file' or inline
// JSON = explicit matrix.
Matrix parse_weight(const std::string& text, Eigen::Index rows, Eigen::Index cols,
                    const Matrix& fallback, const std::string& key) {
    if (text.empty()) return fallback;
    try {
        std::size_t used = 0;
        const double scalar = std::stod(text, &used);
        if (used == text.size()) {
            if (rows != cols)
                throw IoError("option --" + key + ": scalar form needs a square matrix");
            return scalar * Matrix::Identity(rows, rows);
        }
    } catch (const std::invalid_argument&) {
        // fall through to JSON parsing
    }
    json doc;
    try {
        if (!text.empty() && text.front() == '@') {
            std::ifstream in(text.substr(1));
            if (!in) throw IoError("option --" + key + ": cannot open '" + text.substr(1) + "'");
            in >> doc;
        } else {
            doc = json::parse(text);
        }
    } catch (const json::parse_error& e) {
        throw IoError("option --" + key + ": " + e.what());
    }
    const Matrix M = matrix_from_json(doc, key);
    if (M.rows() != rows || M.cols() != cols)
        throw IoError("option --" + key + ": expected " + std::to_string(rows) + "x" +
                      std::to_string(cols) + " matrix");
    return M;
}

std::vector<ModeSpec> parse_modes(const std::string& text) {
    std::vector<ModeSpec> modes;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const auto colon = item.find(':');
        if (colon == std::string::npos)
            throw IoError("mode '" + item + "': expected omega:zeta");
        try {
            std::size_t used = 0;
            const double omega = std::stod(item.substr(0, colon), &used);
            if (used != colon) throw std::invalid_argument(item);
            const std::string ztext = item.substr(colon + 1);
            const double zeta = std::stod(ztext, &used);
            if (used != ztext.size()) throw std::invalid_argument(item);
            modes.push_back({omega, zeta});
        } catch (const std::exception&) {
            throw IoError("mode '" + item + "': malformed number");
        }
    }
    if (modes.empty()) throw IoError("empty mode list");
    return modes;
}

// ---------------------------------------------------------------------------
// Subcommand payloads
// ---------------------------------------------------------------------------

int run_check_ni(const std::string& system_path, const GridOptions& grid_opts, double tol) {
    const NamedSystem ns = load_system_checked(system_path);
    const NiVerdict v = ni_sample_check(ns.sys, grid_opts.build(), tol);
    json out = verdict_to_json(v);
    if (!ns.name.empty()) out["name"] = ns.name;
    std::cout << out.dump(2) << "\n";
    return v.is_ni ? kOk : kPropertyFails;
}

struct NearestNiArgs {
    std::string system_path;
    double w1 = 1.0, w2 = 1.0;
    std::string init = "standard";
    int max_iter = 100000;
    double rel_tol = 1e-10;
    std::string dc_plant_path;
    double epsilon = 1e-2;
    std::string out_path;
    std::string trace_path;
    std::string report_path;
};

int run_nearest_ni(const NearestNiArgs& args) {
    const NamedSystem ns = load_system_checked(args.system_path);

    std::optional<DcConstraint> dc;
    if (!args.dc_plant_path.empty()) {
        const NamedSystem plant = load_system_checked(args.dc_plant_path);
        if (plant.sys.m() != 1 || ns.sys.m() != 1)
            throw IoError("--dc-plant: the DC-gain constraint applies to SISO systems only");
        dc = DcConstraint{dc_gain(plant.sys)(0, 0), args.epsilon};
    }

    const NearestNiProblem problem(ns.sys, args.w1, args.w2, dc);
    SolverConfig config;
    config.max_iter = args.max_iter;
    config.rel_tol = args.rel_tol;
    config.init = args.init == "lmi" ? InitKind::LmiRelaxed : InitKind::Standard;

    const SolverResult res = solve(problem, config);

    if (!args.out_path.empty())
        save_system(res.nearest, args.out_path,
                    ns.name.empty() ? "nearest_ni" : ns.name + "_nearest_ni");
    if (!args.trace_path.empty()) write_trace_csv(args.trace_path, res.objective_trace);

    json report{{"objective", res.final_objective},
                {"iterations", res.iterations},
                {"converged", res.converged},
                {"stop", stop_reason_name(res.stop)},
                {"perturbation", report_to_json(res.report)}};
    if (problem.dc) {
        report["dc_constraint"] = {{"plant_dc_gain", problem.dc->plant_dc_gain},
                                   {"epsilon", problem.dc->epsilon},
                                   {"feasible", res.dc_feasible}};
    }
    std::cout << report.dump(2) << "\n";
    if (!args.report_path.empty()) write_file_atomic(args.report_path, report.dump(2) + "\n");

    return res.stop == StopReason::MaxIter ? kIterationBudget : kOk;
}

int run_flex_plant(const std::string& modes_text, const std::string& out_path) {
    std::vector<ModeSpec> modes = parse_modes(modes_text);
    try {
        StateSpace plant = flex_plant(modes);
        save_system(plant, out_path, "flex_plant_N" + std::to_string(modes.size()));
    } catch (const std::invalid_argument& e) {
        throw IoError(e.what());
    }
    return kOk;
}

struct LqgArgs {
    std::string plant_path;
    std::string qc, rc, nc, w, v;
    std::string out_path;
};

int run_lqg(const LqgArgs& args) {
    const NamedSystem plant = load_system_checked(args.plant_path);
    const Eigen::Index n = plant.sys.n(), m = plant.sys.m();
    LqgWeights weights = LqgWeights::defaults(plant.sys);
    weights.Qc = parse_weight(args.qc, n, n, weights.Qc, "qc");
    weights.Rc = parse_weight(args.rc, m, m, weights.Rc, "rc");
    weights.Nc = parse_weight(args.nc, n, m, weights.Nc, "nc");
    weights.W = parse_weight(args.w, n, n, weights.W, "w");
    weights.V = parse_weight(args.v, m, m, weights.V, "v");
    try {
        weights.validate(n, m);
    } catch (const std::invalid_argument& e) {
        throw IoError(e.what());
    }
    const StateSpace controller = lqg_controller(plant.sys, weights);
    save_system(controller, args.out_path,
                plant.name.empty() ? "lqg_controller" : plant.name + "_lqg");
    return kOk;
}

int run_bode(const std::string& system_path, const GridOptions& grid_opts,
             const std::string& out_path) {
    const NamedSystem ns = load_system_checked(system_path);
    write_bode_csv(out_path, ns.sys, grid_opts.build());
    return kOk;
}

int run_step(const std::string& system_path, double horizon, double dt,
             const std::string& out_path) {
    const NamedSystem ns = load_system_checked(system_path);
    try {
        write_step_csv(out_path, ns.sys, horizon, dt);
    } catch (const std::invalid_argument& e) {
        throw IoError(e.what());
    }
    return kOk;
}

struct PipelineArgs {
    std::string plant_path;
    std::vector<std::string> eval_plant_paths;
    std::string controller_path;
    std::string out_dir;
    double w1 = 1.0, w2 = 1.0;
    std::string init = "standard";
    int max_iter = 100000;
    double epsilon = 1e-2;
    bool no_dc = false;
    double horizon = 60.0;
    double dt = 0.02;
    GridOptions grid;
};

int run_pipeline(const PipelineArgs& args) {
    const fs::path out(args.out_dir);
    fs::create_directories(out);
    const FrequencyGrid grid = args.grid.build();

    json report;
    report["grid"] = {{"wmin", args.grid.wmin}, {"wmax", args.grid.wmax},
                      {"points", args.grid.points}};

    // Design plant plus optional evaluation plants; the design plant is
    // always evaluated.
    const NamedSystem design = load_system_checked(args.plant_path);
    struct EvalPlant {
        std::string label;
        StateSpace sys;
    };
    std::vector<EvalPlant> eval_plants{{design.name.empty() ? "design" : design.name,
                                        design.sys}};
    for (std::size_t i = 0; i < args.eval_plant_paths.size(); ++i) {
        const NamedSystem ep = load_system_checked(args.eval_plant_paths[i]);
        eval_plants.push_back(
            {ep.name.empty() ? "eval" + std::to_string(i) : ep.name, ep.sys});
    }
    for (std::size_t i = 1; i < eval_plants.size(); ++i) {  // disambiguate labels
        for (std::size_t j = 0; j < i; ++j)
            if (eval_plants[i].label == eval_plants[j].label)
                eval_plants[i].label += "_" + std::to_string(i);
    }

    report["design_plant"] = {{"file", args.plant_path},
                              {"ni", verdict_to_json(ni_sample_check(design.sys, grid))}};

    // Stage 1: obtain the optimal (typically non-NI) controller.
    std::optional<StateSpace> controller;
    if (!args.controller_path.empty()) {
        controller = load_system_checked(args.controller_path).sys;
        report["controller"]["source"] = "loaded";
        report["controller"]["file"] = args.controller_path;
    } else {
        controller = lqg_controller(design.sys, LqgWeights::defaults(design.sys));
        save_system(*controller, out / "controller.json", "lqg_controller");
        report["controller"]["source"] = "designed";
        report["controller"]["file"] = (out / "controller.json").string();
    }
    report["controller"]["ni"] = verdict_to_json(ni_sample_check(*controller, grid));

    // Stage 2: nearest NI controller. The DC constraint must cover every
    // plant the loop will be closed against, so the largest DC gain wins.
    std::optional<DcConstraint> dc;
    if (!args.no_dc && controller->m() == 1) {
        double g0 = 0.0;
        bool usable = true;
        for (const auto& ep : eval_plants) {
            if (ep.sys.m() != 1) {
                usable = false;
                break;
            }
            g0 = std::max(g0, dc_gain(ep.sys)(0, 0));
        }
        if (usable && g0 > 0.0) dc = DcConstraint{g0, args.epsilon};
    }
    NearestNiProblem problem(*controller, args.w1, args.w2, dc);
    SolverConfig config;
    config.max_iter = args.max_iter;
    config.init = args.init == "lmi" ? InitKind::LmiRelaxed : InitKind::Standard;
    const SolverResult res = solve(problem, config);

    save_system(res.nearest, out / "nearest.json", "nearest_ni_controller");
    write_trace_csv(out / "trace.csv", res.objective_trace);

    report["nearest"] = {{"file", (out / "nearest.json").string()},
                         {"objective", res.final_objective},
                         {"iterations", res.iterations},
                         {"converged", res.converged},
                         {"stop", stop_reason_name(res.stop)},
                         {"perturbation", report_to_json(res.report)},
                         {"ni", verdict_to_json(ni_sample_check(res.nearest, grid))},
                         {"sni", verdict_to_json(sni_check(res.nearest, grid, 1e-10))}};
    report["nearest"]["dc_constraint"] =
        dc ? json{{"enabled", true},
                  {"plant_dc_gain", dc->plant_dc_gain},
                  {"epsilon", dc->epsilon},
                  {"feasible", res.dc_feasible}}
           : json{{"enabled", false}};

    // Stage 3: verification on every plant with both controllers.
    report["dc_condition"] = json::array();
    for (const auto& ep : eval_plants) {
        try {
            const auto [ok, lam] = dc_gain_condition(ep.sys, res.nearest);
            report["dc_condition"].push_back(
                {{"plant", ep.label}, {"lambda_max", lam}, {"satisfied", ok}});
        } catch (const std::invalid_argument& e) {
            report["dc_condition"].push_back({{"plant", ep.label}, {"error", e.what()}});
        }
    }

    report["closed_loops"] = json::array();
    for (const auto& ep : eval_plants) {
        const struct {
            const char* label;
            const StateSpace* ctrl;
        } loops[] = {{"raw", &*controller}, {"nearest_ni", &res.nearest}};
        for (const auto& loop : loops) {
            json entry{{"plant", ep.label}, {"controller", loop.label}};
            try {
                const StateSpace cl = positive_feedback(ep.sys, *loop.ctrl);
                const ComplexVector p = poles(cl);
                entry["hurwitz"] = is_hurwitz(cl);
                entry["max_re_pole"] = p.real().maxCoeff();
                if (cl.m() == 1) {
                    const fs::path csv =
                        out / ("step_" + ep.label + "_" + loop.label + ".csv");
                    write_step_csv(csv, cl, args.horizon, args.dt);
                    entry["step_csv"] = csv.string();
                }
            } catch (const std::invalid_argument& e) {
                entry["error"] = e.what();
            }
            report["closed_loops"].push_back(std::move(entry));
        }
    }

    if (design.sys.m() == 1) write_bode_csv(out / "bode_plant.csv", design.sys, grid);
    if (controller->m() == 1) {
        write_bode_csv(out / "bode_controller.csv", *controller, grid);
        write_bode_csv(out / "bode_nearest.csv", res.nearest, grid);
    }

    write_file_atomic(out / "report.json", report.dump(2) + "\n");
    std::cout << report.dump(2) << "\n";

    return res.stop == StopReason::MaxIter ? kIterationBudget : kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"nearest negative-imaginary systems toolkit"};
    app.require_subcommand(1);

    // check-ni
    std::string ci_system;
    GridOptions ci_grid;
    double ci_tol = 1e-8;
    auto* check_ni = app.add_subcommand("check-ni", "sampled NI test for a system file");
    check_ni->add_option("--system", ci_system, "system JSON file")->required();
    ci_grid.attach(check_ni);
    check_ni->add_option("--tol", ci_tol, "margin tolerance");

    // nearest-ni
    NearestNiArgs nn;
    auto* nearest_ni =
        app.add_subcommand("nearest-ni", "nearest NI system via projected fast gradient");
    nearest_ni->add_option("--system", nn.system_path, "target system JSON file")->required();
    nearest_ni->add_option("--w1", nn.w1, "weight on the A term");
    nearest_ni->add_option("--w2", nn.w2, "weight on the B term");
    nearest_ni->add_option("--init", nn.init, "initialization: standard or lmi")
        ->check(CLI::IsMember({"standard", "lmi"}));
    nearest_ni->add_option("--max-iter", nn.max_iter, "iteration budget");
    nearest_ni->add_option("--rel-tol", nn.rel_tol, "windowed relative decrease threshold");
    nearest_ni->add_option("--dc-plant", nn.dc_plant_path,
                           "plant file enabling the DC-gain constraint");
    nearest_ni->add_option("--epsilon", nn.epsilon, "DC-rescale margin");
    nearest_ni->add_option("--out", nn.out_path, "output system file");
    nearest_ni->add_option("--trace", nn.trace_path, "objective trace CSV");
    nearest_ni->add_option("--report", nn.report_path, "perturbation report JSON");

    // flex-plant
    std::string fp_modes, fp_out;
    auto* flex = app.add_subcommand("flex-plant", "flexible-structure plant generator");
    flex->add_option("--modes", fp_modes, "mode list omega:zeta,omega:zeta,...")->required();
    flex->add_option("--out", fp_out, "output system file")->required();

    // lqg
    LqgArgs lq;
    auto* lqg = app.add_subcommand("lqg", "LQG controller synthesis");
    lqg->add_option("--plant", lq.plant_path, "plant system file")->required();
    lqg->add_option("--qc", lq.qc, "state cost (scalar, @file, or inline JSON)");
    lqg->add_option("--rc", lq.rc, "input cost");
    lqg->add_option("--nc", lq.nc, "cross term");
    lqg->add_option("--w", lq.w, "process noise covariance");
    lqg->add_option("--v", lq.v, "measurement noise covariance");
    lqg->add_option("--out", lq.out_path, "output controller file")->required();

    // bode
    std::string bo_system, bo_out;
    GridOptions bo_grid;
    auto* bode = app.add_subcommand("bode", "frequency response CSV");
    bode->add_option("--system", bo_system, "system JSON file")->required();
    bo_grid.attach(bode);
    bode->add_option("--out", bo_out, "output CSV")->required();

    // step
    std::string st_system, st_out;
    double st_horizon = 10.0, st_dt = 0.01;
    auto* step = app.add_subcommand("step", "unit step response CSV");
    step->add_option("--system", st_system, "system JSON file")->required();
    step->add_option("--horizon", st_horizon, "simulation horizon, s");
    step->add_option("--dt", st_dt, "sample period, s");
    step->add_option("--out", st_out, "output CSV")->required();

    // pipeline
    PipelineArgs pl;
    auto* pipeline =
        app.add_subcommand("pipeline", "design -> nearest-NI -> verification, end to end");
    pipeline->add_option("--plant", pl.plant_path, "design plant file")->required();
    pipeline->add_option("--eval-plant", pl.eval_plant_paths,
                         "additional evaluation plant files");
    pipeline->add_option("--controller", pl.controller_path,
                         "controller file (designed via LQG when omitted)");
    pipeline->add_option("--out", pl.out_dir, "output directory")->required();
    pipeline->add_option("--w1", pl.w1, "weight on the A term");
    pipeline->add_option("--w2", pl.w2, "weight on the B term");
    pipeline->add_option("--init", pl.init, "initialization: standard or lmi")
        ->check(CLI::IsMember({"standard", "lmi"}));
    pipeline->add_option("--max-iter", pl.max_iter, "solver iteration budget");
    pipeline->add_option("--epsilon", pl.epsilon, "DC-rescale margin");
    pipeline->add_flag("--no-dc", pl.no_dc, "disable the DC-gain constraint");
    pipeline->add_option("--horizon", pl.horizon, "step response horizon, s");
    pipeline->add_option("--dt", pl.dt, "step response sample period, s");
    pl.grid.attach(pipeline);

    CLI11_PARSE(app, argc, argv);

    try {
        if (app.got_subcommand(check_ni)) return run_check_ni(ci_system, ci_grid, ci_tol);
        if (app.got_subcommand(nearest_ni)) return run_nearest_ni(nn);
        if (app.got_subcommand(flex)) return run_flex_plant(fp_modes, fp_out);
        if (app.got_subcommand(lqg)) return run_lqg(lq);
        if (app.got_subcommand(bode)) return run_bode(bo_system, bo_grid, bo_out);
        if (app.got_subcommand(step)) return run_step(st_system, st_horizon, st_dt, st_out);
        if (app.got_subcommand(pipeline)) return run_pipeline(pl);
    } catch (const RiccatiError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kSynthesisFailure;
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kInputError;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kInputError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kInputError;
    }
    return kInputError;
}
