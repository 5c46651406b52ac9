#include "qvi/run_config.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "qvi/oracle.hpp"
#include "qvi/operators.hpp"

namespace qvi {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

[[noreturn]] void fail_at(const std::string& path, const std::string& what) {
    throw ConfigError("config error at " + path + ": " + what);
}

const json& member(const json& j, const std::string& path, const std::string& key) {
    if (!j.is_object()) fail_at(path, "expected an object");
    auto it = j.find(key);
    if (it == j.end()) fail_at(path + "/" + key, "missing");
    return *it;
}

double as_number(const json& j, const std::string& path) {
    if (!j.is_number()) fail_at(path, "expected a number");
    return j.get<double>();
}

Vec as_vec(const json& j, const std::string& path) {
    if (!j.is_array() || j.empty()) fail_at(path, "expected a non-empty array of numbers");
    Vec v(j.size());
    for (std::size_t i = 0; i < j.size(); ++i) v[i] = as_number(j[i], path);
    return v;
}

RunConfig parse_config_json(const json& j) {
    RunConfig cfg;

    const json& prob = member(j, "", "problem");
    cfg.problem_name = member(prob, "/problem", "name").get<std::string>();
    if (auto it = prob.find("params"); it != prob.end()) {
        if (!it->is_object()) fail_at("/problem/params", "expected an object");
        for (auto& [key, val] : it->items())
            cfg.problem_params[key] = as_number(val, "/problem/params/" + key);
    }

    const json& grid = member(j, "", "grid");
    cfg.grid_lo = as_vec(member(grid, "/grid", "lo"), "/grid/lo");
    cfg.grid_hi = as_vec(member(grid, "/grid", "hi"), "/grid/hi");
    const json& nodes = member(grid, "/grid", "nodes");
    if (!nodes.is_array()) fail_at("/grid/nodes", "expected an array of integers");
    for (std::size_t i = 0; i < nodes.size(); ++i)
        cfg.grid_nodes.push_back(static_cast<int>(as_number(nodes[i], "/grid/nodes")));

    if (auto it = j.find("solver"); it != j.end()) {
        const json& s = *it;
        if (auto h = s.find("h"); h != s.end()) {
            if (h->is_string()) {
                if (h->get<std::string>() != "auto")
                    fail_at("/solver/h", "expected a number or \"auto\"");
            } else {
                cfg.h = as_number(*h, "/solver/h");
            }
        }
        if (auto t = s.find("tol_fix"); t != s.end()) cfg.tol_fix = as_number(*t, "/solver/tol_fix");
        if (auto m = s.find("max_iters"); m != s.end())
            cfg.max_iters = static_cast<int>(as_number(*m, "/solver/max_iters"));
        if (auto in = s.find("init"); in != s.end()) {
            if (in->is_string()) {
                if (in->get<std::string>() != "zeros") fail_at("/solver/init", "unknown init");
                cfg.init = InitKind::zeros;
            } else if (in->is_object() && in->contains("constant")) {
                cfg.init = InitKind::constant;
                cfg.init_constant = as_number((*in)["constant"], "/solver/init/constant");
            } else if (in->is_object() && in->contains("field_csv")) {
                cfg.init = InitKind::field;
                cfg.init_field_csv = (*in)["field_csv"].get<std::string>();
            } else {
                fail_at("/solver/init", "expected \"zeros\", {\"constant\": k} or {\"field_csv\": path}");
            }
        }
    }

    const json& forms = member(j, "", "forms");
    if (!forms.is_array() || forms.empty()) fail_at("/forms", "expected a non-empty array");
    for (const auto& f : forms) {
        try {
            cfg.forms.push_back(QviForm::parse(f.get<std::string>()));
        } catch (const std::exception& e) {
            fail_at("/forms", e.what());
        }
    }

    if (auto it = j.find("outputs"); it != j.end()) cfg.outputs = it->get<std::string>();
    if (auto it = j.find("threads"); it != j.end())
        cfg.threads = static_cast<int>(as_number(*it, "/threads"));

    if (auto it = j.find("simulate"); it != j.end()) {
        RunConfig::SimulateBlock sim;
        sim.x0 = as_vec(member(*it, "/simulate", "x0"), "/simulate/x0");
        sim.horizon = as_number(member(*it, "/simulate", "horizon"), "/simulate/horizon");
        sim.h = as_number(member(*it, "/simulate", "h"), "/simulate/h");
        if (auto f = it->find("form"); f != it->end()) {
            try {
                sim.form = QviForm::parse(f->get<std::string>());
            } catch (const std::exception& e) {
                fail_at("/simulate/form", e.what());
            }
        }
        cfg.simulate = sim;
    }

    if (auto it = j.find("verify"); it != j.end()) {
        if (auto t = it->find("lemma1_tol"); t != it->end())
            cfg.verify.lemma1_tol = as_number(*t, "/verify/lemma1_tol");
        if (auto m = it->find("mu"); m != it->end()) cfg.verify.mu = as_number(*m, "/verify/mu");
    }

    return cfg;
}

json config_to_json(const RunConfig& cfg, double resolved_h) {
    json j;
    j["problem"]["name"] = cfg.problem_name;
    j["problem"]["params"] = json::object();
    for (const auto& [k, v] : cfg.problem_params) j["problem"]["params"][k] = v;
    j["grid"]["lo"] = json::array();
    j["grid"]["hi"] = json::array();
    for (std::size_t k = 0; k < cfg.grid_lo.size(); ++k) {
        j["grid"]["lo"].push_back(cfg.grid_lo[k]);
        j["grid"]["hi"].push_back(cfg.grid_hi[k]);
    }
    j["grid"]["nodes"] = cfg.grid_nodes;
    j["solver"]["h"] = resolved_h;
    j["solver"]["tol_fix"] = cfg.tol_fix;
    j["solver"]["max_iters"] = cfg.max_iters;
    switch (cfg.init) {
    case InitKind::zeros: j["solver"]["init"] = "zeros"; break;
    case InitKind::constant: j["solver"]["init"] = {{"constant", cfg.init_constant}}; break;
    case InitKind::field: j["solver"]["init"] = {{"field_csv", cfg.init_field_csv}}; break;
    }
    j["forms"] = json::array();
    for (const auto& f : cfg.forms) j["forms"].push_back(f.name());
    j["threads"] = cfg.threads;
    if (cfg.simulate) {
        json s;
        s["x0"] = json::array();
        for (std::size_t k = 0; k < cfg.simulate->x0.size(); ++k)
            s["x0"].push_back(cfg.simulate->x0[k]);
        s["horizon"] = cfg.simulate->horizon;
        s["h"] = cfg.simulate->h;
        if (cfg.simulate->form) s["form"] = cfg.simulate->form->name();
        j["simulate"] = s;
    }
    j["verify"]["lemma1_tol"] = cfg.verify.lemma1_tol;
    j["verify"]["mu"] = cfg.verify.mu;
    return j;
}

struct RunContext {
    RunConfig cfg;
    ProblemSpec problem;
    GridPtr grid;
    double h = 0.0;
    fs::path out_dir;

    SolverParams solver_params() const {
        SolverParams p;
        p.step = {h, grid};
        p.tol_fix = cfg.tol_fix;
        p.max_iters = cfg.max_iters;
        p.init = cfg.init;
        p.init_constant = cfg.init_constant;
        p.threads = cfg.threads;
        if (cfg.init == InitKind::field)
            p.init_field = read_field_csv(grid, cfg.init_field_csv);
        return p;
    }
};

RunContext prepare(const RunConfig& cfg) {
    RunContext ctx;
    ctx.cfg = cfg;
    ctx.problem = make_builtin(cfg.problem_name, cfg.problem_params);
    ctx.grid = build_grid(cfg.grid_lo, cfg.grid_hi, cfg.grid_nodes);
    if (ctx.problem.dim != ctx.grid->dim())
        throw ConfigError("config error at /grid: grid dimension " +
                          std::to_string(ctx.grid->dim()) + " does not match the problem (" +
                          std::to_string(ctx.problem.dim) + ")");
    ctx.h = cfg.h ? *cfg.h : auto_step(ctx.problem, *ctx.grid);
    ctx.out_dir = cfg.outputs;
    fs::create_directories(ctx.out_dir);
    return ctx;
}

void write_json(const json& j, const fs::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
    out << j.dump(2) << "\n";
}

json report_to_json(const RunContext& ctx, const SolveReport& report,
                    const std::string& field_csv_name) {
    json j;
    j["form"] = report.form.name();
    j["iterations"] = report.iterations;
    j["converged"] = report.converged;
    j["final_delta"] = report.final_delta();
    j["residual_history"] = report.residual_history;
    j["field_csv_path"] = field_csv_name;
    j["wall_time_s"] = report.wall_time;
    j["config"] = config_to_json(ctx.cfg, ctx.h);
    return j;
}

int validate_or_fail(const RunContext& ctx) {
    const ValidationReport rep = validate_problem(ctx.problem, *ctx.grid);
    std::cout << rep.summary();
    if (rep.fatal) {
        std::cerr << "validation failed: the impulse-cost strict-positivity assumption does not "
                     "hold for this problem\n";
        return 2;
    }
    return 0;
}

int cmd_solve(const RunContext& ctx) {
    if (int rc = validate_or_fail(ctx)) return rc;
    for (const auto& form : ctx.cfg.forms) {
        const SolveReport report = solve(ctx.problem, ctx.grid, form, ctx.solver_params());
        const std::string csv_name = "field_" + form.name() + ".csv";
        write_field_csv(report.field, (ctx.out_dir / csv_name).string());
        write_json(report_to_json(ctx, report, csv_name),
                   ctx.out_dir / ("report_" + form.name() + ".json"));
        std::cout << "solve[" << form.name() << "]: " << (report.converged ? "converged" : "NOT converged")
                  << " in " << report.iterations << " sweeps, final delta " << report.final_delta()
                  << ", " << report.wall_time << " s\n";
    }
    return 0;
}

int cmd_simulate(const RunContext& ctx) {
    if (!ctx.cfg.simulate)
        throw ConfigError("config error at /simulate: block required for the simulate command");
    if (int rc = validate_or_fail(ctx)) return rc;
    const auto& sim = *ctx.cfg.simulate;
    const QviForm form = sim.form ? *sim.form : ctx.cfg.forms.front();

    const SolveReport report = solve(ctx.problem, ctx.grid, form, ctx.solver_params());
    const PolicyField policy = extract_policy(report, ctx.problem, {ctx.h, ctx.grid});
    SimulateParams sp;
    sp.horizon = sim.horizon;
    sp.h = sim.h;
    const TrajectoryRecord rec = simulate(ctx.problem, policy, sim.x0, sp);

    write_trajectory_csv(rec, (ctx.out_dir / "trajectory.csv").string());
    json j;
    j["form"] = form.name();
    j["x0"] = json::array();
    for (std::size_t k = 0; k < sim.x0.size(); ++k) j["x0"].push_back(sim.x0[k]);
    j["payoff"] = rec.payoff;
    j["flow_payoff"] = rec.flow_payoff;
    j["impulse_count"] = rec.impulses.size();
    json events = json::array();
    for (const auto& e : rec.impulses)
        events.push_back({{"time", e.time},
                          {"player", e.player == Player::eta ? "eta" : "xi"},
                          {"action", e.action},
                          {"cost_paid", e.cost_paid}});
    j["impulses"] = events;
    j["field_at_x0"] = interpolate(report.field, sim.x0);
    j["payoff_vs_field_gap"] = std::abs(rec.payoff - interpolate(report.field, sim.x0));
    j["truncation_error_bound"] = rec.truncation_error_bound;
    j["truncated"] = rec.truncated;
    j["config"] = config_to_json(ctx.cfg, ctx.h);
    write_json(j, ctx.out_dir / "simulate_summary.json");
    std::cout << "simulate[" << form.name() << "]: payoff " << rec.payoff << ", "
              << rec.impulses.size() << " impulses, field(x0) " << j["field_at_x0"].get<double>()
              << "\n";
    return 0;
}

int cmd_verify(const RunContext& ctx) {
    if (int rc = validate_or_fail(ctx)) return rc;
    const double lambda = ctx.problem.discount;
    const double f_sup = gain_sup_norm(ctx.problem, *ctx.grid);
    json j;
    j["config"] = config_to_json(ctx.cfg, ctx.h);
    bool all_ok = true;

    for (const auto& form : ctx.cfg.forms) {
        const SolveReport report = solve(ctx.problem, ctx.grid, form, ctx.solver_params());
        json block;
        block["converged"] = report.converged;
        block["iterations"] = report.iterations;

        const auto violations = check_lemma1(report, ctx.problem, ctx.cfg.verify.lemma1_tol);
        block["lemma1_violations"] = violations.size();

        const double sup = sup_norm(report.field);
        const double bound = f_sup / lambda + ctx.cfg.tol_fix;
        block["sup_norm"] = sup;
        block["boundedness_bound"] = bound;
        block["boundedness_ok"] = sup <= bound;

        const ValueField residual = hjbi_residual(report.field, ctx.problem, form);
        block["residual_sup"] = sup_norm(residual);

        // mu-scaled game solved independently must land on mu times the field
        const double mu = ctx.cfg.verify.mu;
        const ProblemSpec scaled = scale_gains_and_costs(ctx.problem, mu);
        const SolveReport scaled_report = solve(scaled, ctx.grid, form, ctx.solver_params());
        ValueField expected(ctx.grid);
        for (std::size_t i = 0; i < expected.values.size(); ++i)
            expected.values[i] = mu * report.field.values[i];
        const double mu_gap = sup_norm_diff(scaled_report.field, expected);
        block["mu"] = mu;
        block["mu_scaling_gap"] = mu_gap;
        block["mu_scaling_ok"] = mu_gap <= 2.0 * ctx.cfg.tol_fix;

        const bool ok = report.converged && violations.empty() && sup <= bound &&
                        mu_gap <= 2.0 * ctx.cfg.tol_fix;
        block["ok"] = ok;
        all_ok = all_ok && ok;
        j["forms"][form.name()] = block;
        std::cout << "verify[" << form.name() << "]: lemma1 violations " << violations.size()
                  << ", sup " << sup << " (bound " << bound << "), residual sup "
                  << block["residual_sup"].get<double>() << ", mu gap " << mu_gap << " -> "
                  << (ok ? "ok" : "FAIL") << "\n";
    }
    j["ok"] = all_ok;
    write_json(j, ctx.out_dir / "verify.json");
    return all_ok ? 0 : 2;
}

int cmd_compare(const RunContext& ctx) {
    if (int rc = validate_or_fail(ctx)) return rc;
    json j;
    j["config"] = config_to_json(ctx.cfg, ctx.h);

    auto solve_form = [&](QviForm form) {
        return solve(ctx.problem, ctx.grid, form, ctx.solver_params());
    };
    const double gap_lu = isaacs_gap(solve_form(QviForm::L()), solve_form(QviForm::U()));
    const double gap_minmax = isaacs_gap(solve_form(QviForm::Lmax()), solve_form(QviForm::Umin()));
    j["isaacs_gap_LU"] = gap_lu;
    j["isaacs_gap_LmaxUmin"] = gap_minmax;
    write_json(j, ctx.out_dir / "compare.json");
    std::cout << "compare: |V_L - V_U| = " << gap_lu << ", |V_Lmax - V_Umin| = " << gap_minmax
              << "\n";
    return 0;
}

} // namespace

RunConfig parse_config_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    return parse_config_json(j);
}

RunConfig parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str());
}

int run(const std::vector<std::string>& args) {
    CLI::App app{"grid solver for two-player zero-sum differential games with continuous and "
                 "impulse controls"};
    app.require_subcommand(1);

    std::string config_path, out_override;
    int threads_override = 0;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "run configuration (JSON)")->required();
        sub->add_option("--out", out_override, "output directory (overrides the config)");
        sub->add_option("--threads", threads_override, "worker threads (overrides QVI_THREADS)");
    };
    CLI::App* c_solve = app.add_subcommand("solve", "solve the configured forms");
    CLI::App* c_sim = app.add_subcommand("simulate", "solve, extract a policy and simulate");
    CLI::App* c_verify = app.add_subcommand("verify", "run the structural property checks");
    CLI::App* c_compare = app.add_subcommand("compare", "solve both form pairs and report gaps");
    for (CLI::App* sub : {c_solve, c_sim, c_verify, c_compare}) add_common(sub);

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
        std::cout << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 1;
    }

    try {
        RunConfig cfg = parse_config_file(config_path);
        if (!out_override.empty()) cfg.outputs = out_override;
        if (threads_override > 0) {
            cfg.threads = threads_override;
        } else if (const char* env = std::getenv("QVI_THREADS")) {
            const int t = std::atoi(env);
            if (t > 0) cfg.threads = t;
        }

        const RunContext ctx = prepare(cfg);
        if (app.got_subcommand(c_solve)) return cmd_solve(ctx);
        if (app.got_subcommand(c_sim)) return cmd_simulate(ctx);
        if (app.got_subcommand(c_verify)) return cmd_verify(ctx);
        return cmd_compare(ctx);
    } catch (const ConfigError& e) {
        std::cerr << e.what() << "\n";
        return 1;
    } catch (const DivergenceError& e) {
        std::cerr << "divergence guard: " << e.what() << "\n";
        return 3;
    } catch (const std::invalid_argument& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

int run(int argc, char** argv) {
    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
    return run(args);
}

} // namespace qvi
