#include "sldp/cli.hpp"

#include "sldp/action.hpp"
#include "sldp/errors.hpp"
#include "sldp/ldp.hpp"
#include "sldp/probes.hpp"
#include "sldp/problem_file.hpp"
#include "sldp/simulate.hpp"
#include "sldp/verify.hpp"
#include "sldp/zvonkin.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace sldp {

namespace {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

struct Common {
    std::string problem;
    std::string out = "sldp-out";
    std::uint64_t seed = 20261017;
    int workers = 1;
};

struct ValidateArgs {
    std::size_t pairs = 4000;
    std::size_t points = 2000;
};

struct ZvonkinArgs {
    double lambda = 0.0;
    double lambda_start = 0.0;
    double lambda_growth = 0.0;
    int resolution = 0;
    double tol = 1e-10;
    int max_iters = 200;
    double cap_factor = 1048576.0;
};

struct SimulateArgs {
    double eps = 0.5;
    long n_paths = 10;
    int steps = 0;
    bool transformed = false;
};

struct RateArgs {
    std::string kind = "point";
    std::vector<double> target;
    double radius = 0.0;
    double level = 0.0;
    int intervals = 20;
    int steps_per_interval = 5;
    int restarts = 8;
    std::string gradient = "fd";
    bool transform = false;
};

struct LdpArgs {
    std::vector<double> eps_ladder;
    long n_paths = 0;
    int steps = 0;
    int coordinate = 0;
    double threshold = 0.0;
    bool without_singular = false;
    bool compare = false;
    bool no_rate = false;
    std::string model = "power";
};

struct VerifyArgs {
    std::vector<std::string> skip;
    long n_paths = 0;
    int restarts = 8;
};

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw InputError("cannot write " + path.string());
    f << text;
}

void write_json(const fs::path& path, const Json& j) { write_text(path, j.dump(2) + "\n"); }

fs::path prepare_out(const Common& c) {
    const fs::path dir(c.out);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw InputError("cannot create output directory " + dir.string() + ": " + ec.message());
    return dir;
}

std::string toml_value(const CLI::Option* opt) {
    std::vector<std::string> vals = opt->count() > 0 ? opt->reduced_results() : std::vector<std::string>{};
    if (opt->count() == 0) {
        const std::string d = opt->get_default_str();
        if (!d.empty()) vals.push_back(d);
        if (d.empty() && opt->get_type_size() == 0) vals.push_back("false");
    }
    auto quote = [&](const std::string& v) {
        if (opt->get_type_size() == 0) return v;  // flag
        if (!v.empty() && v.find_first_not_of("+-.0123456789eE") == std::string::npos) return v;
        return "\"" + v + "\"";
    };
    if (opt->get_expected_max() > 1) {
        std::string s = "[";
        for (std::size_t i = 0; i < vals.size(); ++i) s += (i ? ", " : "") + quote(vals[i]);
        return s + "]";
    }
    if (vals.empty()) return "";
    return quote(vals.front());
}

void append_options(std::string& text, const CLI::App& app) {
    for (const CLI::Option* opt : app.get_options()) {
        if (opt->get_lnames().empty()) continue;
        const std::string& name = opt->get_lnames().front();
        if (name == "help" || name == "version" || name == "config") continue;
        const std::string v = toml_value(opt);
        if (v.empty()) continue;
        text += name + "=" + v + "\n";
    }
}

// Records the resolved invocation, including defaults, so `sldp --config` reproduces it.
void write_manifest(const CLI::App& app, const fs::path& dir) {
    std::string text = "# sldp " + std::string(kVersion) + " manifest, format_version " +
                       std::to_string(kFormatVersion) + "\n# rerun with: sldp --config <this file>\n";
    append_options(text, app);
    for (const CLI::App* sub : app.get_subcommands()) {
        text += "[" + sub->get_name() + "]\n";
        append_options(text, *sub);
    }
    write_text(dir / "manifest.toml", text);
}

Json vec_json(const Vec& v) { return to_std(v); }

// --- verbs -------------------------------------------------------------------

int verb_validate(const Common& c, const ValidateArgs& a, const ProblemBundle& b, const fs::path& dir,
                  std::ostream& out) {
    ValidationOptions vo;
    vo.n_pairs = a.pairs;
    vo.n_points = a.points;
    vo.seed = c.seed;
    vo.eps_ladder = b.experiment.eps_ladder;
    const ValidationReport report = validate_problem(b.problem, vo);
    out << report.table();
    Json j;
    j["problem"] = report.problem;
    j["box"] = {{"lo", vec_json(report.box.lo)}, {"hi", vec_json(report.box.hi)}};
    j["passed"] = report.passed();
    j["checks"] = Json::array();
    for (const auto& ch : report.checks) {
        j["checks"].push_back(
            {{"assumption", ch.assumption}, {"verdict", ch.verdict}, {"witness", ch.witness}, {"value", ch.value}});
    }
    write_json(dir / "validate.json", j);
    return report.passed() ? exit_pass : exit_gate_failure;
}

ResolventOptions resolvent_options(const ProblemBundle& b, const ZvonkinArgs& a) {
    ResolventOptions r;
    r.box = b.experiment.zvonkin_box;
    r.resolution = a.resolution > 0 ? a.resolution : b.experiment.resolution;
    r.margin = b.experiment.margin;
    r.tol = a.tol;
    r.max_iters = a.max_iters;
    return r;
}

Json ladder_json(const std::vector<LadderRung>& ladder) {
    Json j = Json::array();
    for (const auto& r : ladder) {
        Json rung{{"lambda", r.lambda}, {"converged", r.converged}};
        if (r.converged) {
            rung["iterations"] = r.iterations;
            rung["norms"] = {r.norms.u, r.norms.grad, r.norms.hess};
            rung["sum"] = r.norms.sum();
            rung["certified"] = r.certified;
        } else {
            rung["note"] = r.note;
        }
        j.push_back(rung);
    }
    return j;
}

int verb_zvonkin(const ZvonkinArgs& a, const ProblemBundle& b, const fs::path& dir, std::ostream& out,
                 std::ostream& err) {
    const ResolventOptions ro = resolvent_options(b, a);
    std::shared_ptr<const ZvonkinMap> map;
    std::vector<LadderRung> ladder;
    if (a.lambda > 0.0) {
        map = std::make_shared<const ZvonkinMap>(solve_resolvent(b.problem, a.lambda, ro));
    } else {
        const double start = a.lambda_start > 0.0 ? a.lambda_start : b.experiment.lambda_start;
        const double growth = a.lambda_growth > 0.0 ? a.lambda_growth : b.experiment.lambda_growth;
        try {
            LambdaSearch s = find_lambda0(b.problem, ro, start, growth, a.cap_factor);
            map = s.map;
            ladder = std::move(s.ladder);
        } catch (const CertificationError& e) {
            write_json(dir / "ladder.json", ladder_json(e.ladder()));
            err << e.what();
            return exit_no_convergence;
        }
        write_json(dir / "ladder.json", ladder_json(ladder));
    }
    write_map(*map, dir / "map.json", dir / "map.csv");
    write_text(dir / "certificate.txt", map->certificate() + "\n");
    out << map->certificate() << '\n';
    return map->certified() ? exit_pass : exit_gate_failure;
}

std::shared_ptr<const ZvonkinMap> certified_map(const ProblemBundle& b) {
    ResolventOptions ro;
    ro.box = b.experiment.zvonkin_box;
    ro.resolution = b.experiment.resolution;
    ro.margin = b.experiment.margin;
    return find_lambda0(b.problem, ro, b.experiment.lambda_start, b.experiment.lambda_growth).map;
}

void write_path_csv(const fs::path& path, const std::vector<double>& times, const std::vector<Vec>& states) {
    std::ostringstream os;
    os << 't';
    const int n = states.empty() ? 0 : static_cast<int>(states.front().size());
    for (int i = 0; i < n; ++i) os << ",x" << i + 1;
    os << '\n';
    for (std::size_t k = 0; k < states.size(); ++k) {
        os << num(times[k]);
        for (int i = 0; i < n; ++i) os << ',' << num(states[k][i]);
        os << '\n';
    }
    write_text(path, os.str());
}

int verb_simulate(const Common& c, const SimulateArgs& a, const ProblemBundle& b, const fs::path& dir,
                  std::ostream& out) {
    if (a.n_paths < 1) throw InputError("--n-paths must be at least 1");
    const auto t0 = std::chrono::steady_clock::now();
    const int steps = a.steps > 0 ? a.steps : b.experiment.n_steps;
    std::unique_ptr<Dynamics> dyn;
    if (a.transformed) {
        dyn = std::make_unique<TransformedSde>(b.problem, certified_map(b));
    } else {
        dyn = std::make_unique<OriginalDynamics>(b.problem);
    }
    BatchSummary s;
    s.n_paths = a.n_paths;
    s.epsilon = a.eps;
    s.dt = b.problem.horizon / steps;
    const int width = static_cast<int>(std::to_string(a.n_paths - 1).size());
    for (long i = 0; i < a.n_paths; ++i) {
        SimulationOptions so;
        so.path_index = static_cast<std::uint64_t>(i);
        try {
            const PathSample p = simulate(*dyn, a.eps, steps, c.seed, so);
            std::string index = std::to_string(i);
            index.insert(0, static_cast<std::size_t>(std::max(0, width - static_cast<int>(index.size()))), '0');
            write_path_csv(dir / ("path_" + index + ".csv"), p.times, p.states);
        } catch (const EscapeError&) {
            ++s.escapes;
        }
    }
    s.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    Json j{{"n_paths", s.n_paths},
           {"eps", s.epsilon},
           {"dt", s.dt},
           {"escapes", s.escapes},
           {"system", a.transformed ? "transformed" : "original"},
           {"wall_time", s.wall_time}};
    write_json(dir / "summary.json", j);
    out << "simulated " << s.n_paths << " paths (" << s.escapes << " escaped), eps=" << s.epsilon << " dt=" << s.dt
        << '\n';
    return exit_pass;
}

Target rate_target(const RateArgs& a, const ProblemBundle& b) {
    const int off = b.problem.noise_offset();
    const int m = b.problem.noise_dim();
    const Vec v = a.target.empty() ? b.experiment.rate_target : make_vec(a.target);
    if (v.size() != m) throw InputError("--target needs " + std::to_string(m) + " values (the noisy block)");
    if (a.kind == "point") return Target::point(v, off);
    if (a.kind == "ball") return Target::ball(v, a.radius, off);
    if (a.kind == "half-space") return Target::half_space(v, a.level, off);
    throw InputError("--kind must be point, ball or half-space");
}

RateOptions rate_options(const Common& c, const RateArgs& a) {
    RateOptions o;
    o.n_intervals = a.intervals;
    o.steps_per_interval = a.steps_per_interval;
    o.restarts = a.restarts;
    o.seed = c.seed;
    o.workers = c.workers;
    if (a.gradient == "fd") {
        o.gradient = GradientMode::finite_difference;
    } else if (a.gradient == "adjoint") {
        o.gradient = GradientMode::adjoint;
    } else {
        throw InputError("--gradient must be fd or adjoint");
    }
    return o;
}

int verb_rate(const Common& c, const RateArgs& a, const ProblemBundle& b, const fs::path& dir, std::ostream& out) {
    const Target target = rate_target(a, b);
    const RateOptions o = rate_options(c, a);
    RateResult r;
    if (a.transform) {
        const TransformedSde tsde(b.problem, certified_map(b));
        r = rate_via_transform(tsde, target, o);
    } else {
        r = minimize_rate(OriginalDynamics(b.problem), target, o);
    }
    std::ostringstream csv;
    csv << "interval";
    for (int j = 0; j < r.minimizer.dim; ++j) csv << ",hdot_" << j + 1;
    csv << '\n';
    for (int i = 0; i < r.minimizer.n_intervals; ++i) {
        csv << i;
        for (int j = 0; j < r.minimizer.dim; ++j) csv << ',' << num(r.minimizer.hdot[i * r.minimizer.dim + j]);
        csv << '\n';
    }
    write_text(dir / "minimizer.csv", csv.str());
    Json restarts = Json::array();
    for (double v : r.restart_values) restarts.push_back(std::isnan(v) ? Json(nullptr) : Json(v));
    Json j{{"value", r.value},
           {"feasibility_residual", r.feasibility_residual},
           {"multistart_spread", r.multistart_spread},
           {"n_intervals", r.n_intervals},
           {"restarts", r.restarts},
           {"minimizer_csv_path", "minimizer.csv"},
           {"converged", r.converged},
           {"target", target.describe()},
           {"system", a.transform ? "transformed" : "original"},
           {"endpoint", vec_json(r.endpoint)},
           {"restart_values", restarts}};
    write_json(dir / "rate.json", j);
    out << "rate " << num(r.value) << " (feasibility " << r.feasibility_residual << ", spread " << r.multistart_spread
        << ")\n";
    return r.converged ? exit_pass : exit_no_convergence;
}

std::string ladder_csv(const LdpEstimate& e) {
    std::ostringstream os;
    os << "eps,n_paths,hits,p_hat,ci_lo,ci_hi\n";
    for (const auto& p : e.ladder) {
        os << num(p.eps) << ',' << p.n_paths << ',' << p.hits << ',' << num(p.p_hat) << ',' << num(p.ci_lo) << ','
           << num(p.ci_hi) << '\n';
    }
    return os.str();
}

Json fit_json(const LdpEstimate& e) {
    Json j{{"with_singular", e.with_singular},
           {"slope", e.fit.slope},
           {"stderr", e.fit.std_error},
           {"model", e.fit.model == SlopeModel::affine ? "affine" : "power_prefactor"},
           {"intercept", e.fit.intercept},
           {"prefactor_exponent", e.fit.prefactor_exponent},
           {"affine_slope", e.fit.affine_slope},
           {"affine_stderr", e.fit.affine_stderr},
           {"used_points", e.fit.used_points},
           {"dropped_points", e.fit.dropped_points},
           {"max_escape_fraction", e.max_escape_fraction()}};
    return j;
}

int verb_ldp(const Common& c, const LdpArgs& a, const ProblemBundle& b, const fs::path& dir, std::ostream& out) {
    const auto& ex = b.experiment;
    const std::vector<double> ladder = a.eps_ladder.empty() ? ex.eps_ladder : a.eps_ladder;
    const long n_paths = a.n_paths > 0 ? a.n_paths : ex.n_paths;
    const int steps = a.steps > 0 ? a.steps : ex.n_steps;
    const int coordinate = a.coordinate > 0 ? a.coordinate - 1 : ex.event_coordinate;
    if (coordinate < 0 || coordinate >= b.problem.state_dim) throw InputError("--coordinate out of range");
    const double threshold = a.threshold != 0.0 ? a.threshold : ex.event_threshold;
    SlopeModel model = SlopeModel::power_prefactor;
    if (a.model == "affine") {
        model = SlopeModel::affine;
    } else if (a.model != "power") {
        throw InputError("--model must be power or affine");
    }
    const EventSpec event = EventSpec::terminal_half_space(Vec::Ones(1), threshold, coordinate);

    const bool primary_with = !a.without_singular;
    const LdpEstimate main =
        ldp_experiment(b.problem, event, ladder, n_paths, steps, c.seed, primary_with, c.workers, model);
    write_text(dir / "ladder.csv", ladder_csv(main));
    Json j = fit_json(main);
    j["event"] = main.event;
    out << "slope " << num(main.fit.slope) << " +- " << main.fit.std_error << '\n';

    if (a.compare) {
        const LdpEstimate other =
            ldp_experiment(b.problem, event, ladder, n_paths, steps, c.seed, !primary_with, c.workers, model);
        write_text(dir / "ladder_compare.csv", ladder_csv(other));
        j["compare"] = fit_json(other);
        out << "compare slope " << num(other.fit.slope) << " +- " << other.fit.std_error << '\n';
    }

    bool passed = true;
    if (!a.no_rate) {
        RateOptions ro;
        ro.seed = c.seed;
        ro.workers = c.workers;
        ro.gradient = GradientMode::adjoint;
        const RateResult r = minimize_rate(OriginalDynamics(b.problem), *event.as_target(), ro);
        const BoundCheck upper = bound_check(main, r, BoundSide::upper_for_closed);
        const BoundCheck lower = bound_check(main, r, BoundSide::lower_for_open);
        j["rate_value"] = r.value;
        j["bound_checks"] = Json::array();
        for (const auto* bc : {&upper, &lower}) {
            j["bound_checks"].push_back({{"side", bc->side == BoundSide::upper_for_closed ? "upper_for_closed"
                                                                                           : "lower_for_open"},
                                         {"slope", bc->slope},
                                         {"rate_value", bc->rate_value},
                                         {"margin", bc->margin},
                                         {"passed", bc->passed}});
            out << bc->describe() << '\n';
        }
        passed = upper.passed;
    } else {
        j["rate_value"] = nullptr;
        j["bound_checks"] = Json::array();
    }
    write_json(dir / "ldp.json", j);
    return passed ? exit_pass : exit_gate_failure;
}

int verb_verify(const Common& c, const VerifyArgs& a, const ProblemBundle& b, const fs::path& dir,
                std::ostream& out) {
    VerifyOptions vo;
    vo.seed = c.seed;
    vo.workers = c.workers;
    vo.n_paths = a.n_paths;
    vo.restarts = a.restarts;
    vo.skip = std::set<std::string>(a.skip.begin(), a.skip.end());
    const auto results = run_verify(b, vo);
    fs::create_directories(dir / "gates");
    Json summary{{"problem", b.problem.name}, {"gates", Json::array()}};
    bool all = true;
    for (const auto& r : results) {
        const std::string status = r.skipped ? "SKIP" : (r.passed ? "PASS" : "FAIL");
        if (!r.skipped && !r.passed) all = false;
        out << status << "  " << r.name;
        if (!r.note.empty()) out << "  (" << r.note << ")";
        out << '\n';
        Json g{{"gate", r.name}, {"claim", r.claim}, {"status", status}, {"note", r.note}, {"details", r.details}};
        write_json(dir / "gates" / (r.name + ".json"), g);
        summary["gates"].push_back({{"gate", r.name}, {"status", status}, {"note", r.note}});
    }
    summary["passed"] = all;
    write_json(dir / "verify.json", summary);
    return all ? exit_pass : exit_gate_failure;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Zvonkin transform and small-noise large-deviation laboratory", "sldp"};
    app.set_version_flag("--version", std::string(kVersion));
    app.set_config("--config", "", "Rerun from a manifest written by a previous run");
    app.require_subcommand(1);
    app.fallthrough();
    app.option_defaults()->always_capture_default();

    Common common;
    app.add_option("--problem", common.problem, "Registry name or problem file")->required();
    app.add_option("--out", common.out, "Output directory");
    app.add_option("--seed", common.seed, "Random seed");
    app.add_option("--workers", common.workers, "Worker threads (0 = all cores)")->check(CLI::NonNegativeNumber);

    ValidateArgs va;
    auto* validate = app.add_subcommand("validate", "Run the regularity probes")->configurable();
    validate->add_option("--pairs", va.pairs, "Sampled pairs per difference-quotient probe");
    validate->add_option("--points", va.points, "Sampled points per pointwise probe");

    ZvonkinArgs za;
    auto* zvonkin = app.add_subcommand("zvonkin", "Solve the resolvent equation and certify the map")->configurable();
    zvonkin->add_option("--lambda", za.lambda, "Solve at this lambda only (no search)");
    zvonkin->add_option("--lambda-start", za.lambda_start, "First lambda of the ladder");
    zvonkin->add_option("--lambda-growth", za.lambda_growth, "Ladder growth factor");
    zvonkin->add_option("--cap-factor", za.cap_factor, "Largest lambda as a multiple of the start");
    zvonkin->add_option("--resolution", za.resolution, "Grid points per axis");
    zvonkin->add_option("--tol", za.tol, "Picard update tolerance");
    zvonkin->add_option("--max-iters", za.max_iters, "Picard iteration limit");

    SimulateArgs sa;
    auto* sim = app.add_subcommand("simulate", "Euler-Maruyama paths")->configurable();
    sim->add_option("--eps", sa.eps, "Noise level");
    sim->add_option("--n-paths", sa.n_paths, "Number of paths");
    sim->add_option("--steps", sa.steps, "Time steps");
    sim->add_flag("--transformed", sa.transformed, "Simulate the transformed system");

    RateArgs ra;
    auto* rate = app.add_subcommand("rate", "Minimum-action rate for a terminal target")->configurable();
    rate->add_option("--kind", ra.kind, "point, ball or half-space");
    rate->add_option("--target", ra.target, "Point, ball centre or half-space normal (noisy block)");
    rate->add_option("--radius", ra.radius, "Ball radius");
    rate->add_option("--level", ra.level, "Half-space level: normal . z_T >= level");
    rate->add_option("--intervals", ra.intervals, "Control intervals");
    rate->add_option("--steps-per-interval", ra.steps_per_interval, "RK4 steps per control interval");
    rate->add_option("--restarts", ra.restarts, "Multistart count");
    rate->add_option("--gradient", ra.gradient, "fd or adjoint");
    rate->add_flag("--transform", ra.transform, "Minimize on the transformed system");

    LdpArgs la;
    auto* ldp = app.add_subcommand("ldp", "Monte Carlo ladder and slope fit")->configurable();
    ldp->add_option("--eps-ladder", la.eps_ladder, "Noise levels");
    ldp->add_option("--n-paths", la.n_paths, "Paths per ladder point");
    ldp->add_option("--steps", la.steps, "Time steps");
    ldp->add_option("--coordinate", la.coordinate, "Event coordinate (1-based)");
    ldp->add_option("--threshold", la.threshold, "Event threshold: z_T[coordinate] >= threshold");
    ldp->add_flag("--without-singular", la.without_singular, "Drop the eps b2 term");
    ldp->add_flag("--compare", la.compare, "Also run with the singular term toggled");
    ldp->add_flag("--no-rate", la.no_rate, "Skip the rate computation and bound checks");
    ldp->add_option("--model", la.model, "Slope model: power or affine");

    VerifyArgs vfa;
    auto* verify = app.add_subcommand("verify", "Run the full gate pipeline")->configurable();
    verify->add_option("--skip", vfa.skip, "Gate to skip (echoed in the report)");
    verify->add_option("--n-paths", vfa.n_paths, "Paths per ladder point");
    verify->add_option("--restarts", vfa.restarts, "Multistart count for rates");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return exit_pass;
    } catch (const CLI::CallForVersion& e) {
        out << kVersion << '\n';
        return exit_pass;
    } catch (const CLI::ParseError& e) {
        err << "sldp: " << e.what() << '\n';
        return exit_input_error;
    }

    try {
        const ProblemBundle bundle = resolve_problem(common.problem);
        const fs::path dir = prepare_out(common);
        write_manifest(app, dir);
        if (validate->parsed()) return verb_validate(common, va, bundle, dir, out);
        if (zvonkin->parsed()) return verb_zvonkin(za, bundle, dir, out, err);
        if (sim->parsed()) return verb_simulate(common, sa, bundle, dir, out);
        if (rate->parsed()) return verb_rate(common, ra, bundle, dir, out);
        if (ldp->parsed()) return verb_ldp(common, la, bundle, dir, out);
        if (verify->parsed()) return verb_verify(common, vfa, bundle, dir, out);
        err << "sldp: no verb given\n";
        return exit_input_error;
    } catch (const InputError& e) {
        err << "sldp: input error: " << e.what() << '\n';
        return exit_input_error;
    } catch (const ConvergenceError& e) {
        err << "sldp: no convergence: " << e.what() << '\n';
        return exit_no_convergence;
    } catch (const Error& e) {
        err << "sldp: " << e.what() << '\n';
        return exit_gate_failure;
    }
}

}  // namespace sldp
