#include "blendloop/cli.hpp"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "blendloop/charts.hpp"
#include "blendloop/csv.hpp"
#include "blendloop/random.hpp"
#include "blendloop/fixtures.hpp"
#include "blendloop/simulator.hpp"
#include "blendloop/timeseries.hpp"
#include "blendloop/tuner.hpp"

namespace blendloop::cli {

namespace fs = std::filesystem;

namespace {

constexpr std::string_view kFixturePrefix = "fixture:";
constexpr std::uint64_t kDefaultSeed = 1;

// Thrown for bad flag values or combinations; maps to exit 2.
struct UsageError : InvalidInput {
    using InvalidInput::InvalidInput;
};

// ---------------------------------------------------------------------------
// Config file: `key = value` lines, '#' comments. Keys are long flag names.

std::map<std::string, std::string> read_config(const fs::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw UsageError("cannot open config file '" + path.string() + "'");
    std::map<std::string, std::string> out;
    std::string line;
    std::size_t line_no = 0;
    auto trim = [](std::string s) {
        const auto b = s.find_first_not_of(" \t\r");
        const auto e = s.find_last_not_of(" \t\r");
        return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos)
            line.erase(hash);
        line = trim(line);
        if (line.empty())
            continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw UsageError(path.string() + ":" + std::to_string(line_no) +
                             ": expected 'key = value'");
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (key.empty())
            throw UsageError(path.string() + ":" + std::to_string(line_no) + ": empty key");
        out[key] = value;
    }
    return out;
}

bool flag_given(const std::vector<std::string>& args, const std::string& key)
{
    const std::string flag = "--" + key;
    for (const auto& a : args)
        if (a == flag || a.starts_with(flag + "="))
            return true;
    return false;
}

// ---------------------------------------------------------------------------
// Shared simulation flags

struct SimFlags {
    double mu{10};
    double phi{0.7};
    std::optional<double> sigma_v;
    std::optional<double> var_v;
    std::optional<double> sigma_eps;
    std::optional<double> var_eps;
    double u0{6};
    double tau{16};
    double flow_rate{100};
    bool exact_balance{false};
    bool clamp{false};
    std::size_t horizon{50};
    std::size_t reps{30};
    std::optional<std::uint64_t> seed;
    unsigned threads{0};
    std::string out_dir{"."};
};

void add_sim_flags(CLI::App& cmd, SimFlags& f)
{
    cmd.add_option("--mu", f.mu, "Mean raw-flour protein level")->capture_default_str();
    cmd.add_option("--phi", f.phi, "AR(1) coefficient, 0 <= phi < 1")->capture_default_str();
    auto* sv = cmd.add_option("--sigma-v", f.sigma_v, "Innovation standard deviation");
    auto* vv = cmd.add_option("--var-v", f.var_v, "Innovation variance (default 0.5)");
    sv->excludes(vv);
    auto* se = cmd.add_option("--sigma-eps", f.sigma_eps, "Measurement noise standard deviation");
    auto* ve = cmd.add_option("--var-eps", f.var_eps, "Measurement noise variance (default 0.5)");
    se->excludes(ve);
    cmd.add_option("--u0", f.u0, "Initial gluten feed rate, g/s")->capture_default_str();
    cmd.add_option("--tau", f.tau, "Target, rescaled units")->capture_default_str();
    cmd.add_option("--flow-rate", f.flow_rate, "Raw flour flow rate D, g/s")->capture_default_str();
    cmd.add_flag("--exact-balance", f.exact_balance, "Use the exact mass balance plant");
    cmd.add_flag("--clamp", f.clamp, "Clamp the feed rate at 0");
    cmd.add_option("--horizon", f.horizon, "Steps per trace")->capture_default_str();
    cmd.add_option("--reps", f.reps, "Replications")->capture_default_str();
    cmd.add_option("--seed", f.seed, "Base seed (default: $BLENDLOOP_SEED, else 1)");
    cmd.add_option("--threads", f.threads, "Worker threads, 0 = all cores")->capture_default_str();
    cmd.add_option("--out", f.out_dir, "Output directory")->capture_default_str();
}

std::uint64_t resolve_seed(const std::optional<std::uint64_t>& flag)
{
    if (flag)
        return *flag;
    if (const char* env = std::getenv("BLENDLOOP_SEED"); env && *env) {
        std::uint64_t v = 0;
        std::istringstream in(env);
        if (!(in >> v) || !in.eof())
            throw UsageError(std::string("BLENDLOOP_SEED is not an unsigned integer: ") + env);
        return v;
    }
    return kDefaultSeed;
}

SimConfig to_config(const SimFlags& f)
{
    SimConfig c;
    c.process = {f.flow_rate, f.u0, f.tau, f.exact_balance};
    const double sigma_v = f.sigma_v ? *f.sigma_v : std::sqrt(f.var_v.value_or(0.5));
    const double sigma_eps = f.sigma_eps ? *f.sigma_eps : std::sqrt(f.var_eps.value_or(0.5));
    if (f.var_v && !(*f.var_v >= 0))
        throw UsageError("--var-v must be >= 0");
    if (f.var_eps && !(*f.var_eps >= 0))
        throw UsageError("--var-eps must be >= 0");
    c.disturbance = {f.mu, f.phi, sigma_v};
    c.sensor = {sigma_eps};
    c.horizon = f.horizon;
    c.clamp_u = f.clamp;
    if (f.horizon < 1)
        throw UsageError("--horizon must be >= 1");
    if (f.reps < 1)
        throw UsageError("--reps must be >= 1");
    validate(c);
    return c;
}

double parse_double(const std::string& text, const std::string& what)
{
    std::size_t used = 0;
    double v = 0;
    try {
        v = std::stod(text, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used == 0 || used != text.size())
        throw UsageError(what + ": '" + text + "' is not a number");
    return v;
}

// "integral" | "first-order" | "first-order:<lambda1>:<lambda2>"
ControlRule<double> parse_rule(const std::string& text, std::optional<double> lambda1,
                               std::optional<double> lambda2)
{
    ControlRule<double> rule;
    if (text == "integral") {
        if (lambda1 || lambda2)
            throw UsageError("--lambda1/--lambda2 do not apply to the integral rule");
        rule = IntegralRule{};
    } else if (text == "first-order") {
        rule = FirstOrderRule<double>{lambda1.value_or(0.5), lambda2.value_or(0.5)};
    } else if (text.starts_with("first-order:")) {
        if (lambda1 || lambda2)
            throw UsageError("give lambdas either in the rule spec or as flags, not both");
        const std::string rest = text.substr(std::string("first-order:").size());
        const auto colon = rest.find(':');
        if (colon == std::string::npos)
            throw UsageError("rule '" + text + "': expected first-order:<lambda1>:<lambda2>");
        rule = FirstOrderRule<double>{parse_double(rest.substr(0, colon), "lambda1"),
                                      parse_double(rest.substr(colon + 1), "lambda2")};
    } else {
        throw UsageError("unknown rule '" + text + "' (integral|first-order[:l1:l2])");
    }
    validate(rule);
    return rule;
}

void ensure_dir(const fs::path& dir)
{
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir))
        throw UsageError("cannot create output directory '" + dir.string() + "'");
}

std::ofstream open_out(const fs::path& path)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw UsageError("cannot write '" + path.string() + "'");
    return out;
}

Series<double> load_input(const std::string& input)
{
    if (input.starts_with(kFixturePrefix))
        return fixture_series(input.substr(kFixturePrefix.size()));
    return read_series_csv(fs::path(input));
}

std::string join_indices(const std::vector<Eigen::Index>& idx)
{
    std::string s;
    for (std::size_t k = 0; k < idx.size(); ++k) {
        if (k)
            s += ' ';
        s += std::to_string(idx[k] + 1);
    }
    return s.empty() ? "-" : s;
}

void report_chart(std::ostream& out, std::string_view name, const ControlChart<double>& c)
{
    out << name << ": center=" << format_number(c.center) << " ucl=" << format_number(c.ucl)
        << " lcl=" << format_number(c.lcl) << " signals=" << c.signals.size()
        << " idx=" << join_indices(c.signals) << '\n';
}

// ---------------------------------------------------------------------------
// Subcommands

struct EstimateArgs {
    std::string input;
    std::string out_dir{"."};
};

int cmd_estimate(const EstimateArgs& a, std::ostream& out, std::ostream& err)
{
    const Series<double> series = load_input(a.input);
    const auto fit = estimate_ar1(series);
    const Series<double> resid = ar1_residuals(series, fit);

    out << "observations: " << series.size() << '\n'
        << "n_used: " << fit.n_used << '\n'
        << "phi_hat: " << format_number(fit.phi_hat) << '\n'
        << "intercept_hat: " << format_number(fit.intercept_hat) << '\n'
        << "mu_hat: " << format_number(fit.mu_hat) << '\n'
        << "se_phi: " << format_number(fit.se_phi) << '\n'
        << "t_phi: " << format_number(fit.t_phi) << '\n'
        << "sigma_v_hat: " << format_number(fit.sigma_v_hat) << '\n';

    if (series.size() >= 10) {
        const auto df = dickey_fuller(series);
        out << "dickey_fuller_t: " << format_number(df.t_stat) << '\n'
            << "dickey_fuller_crit_5pct: " << format_number(df.critical_5pct) << '\n'
            << "reject_unit_root: " << (df.reject_unit_root ? "yes" : "no") << '\n';
    }
    if (resid.size() >= 8) {
        try {
            const auto jb = jarque_bera(resid);
            out << "residual_skewness: " << format_number(jb.skewness) << '\n'
                << "residual_kurtosis: " << format_number(jb.kurtosis) << '\n'
                << "jarque_bera: " << format_number(jb.jb_stat) << '\n'
                << "jarque_bera_p: " << format_number(jb.p_value) << '\n';
        } catch (const DegenerateData&) {
            err << "warning: residuals have zero variance, Jarque-Bera skipped\n";
        }
    }

    ensure_dir(a.out_dir);
    const fs::path path = fs::path(a.out_dir) / "residuals.csv";
    auto f = open_out(path);
    write_series_csv(f, resid, 2);
    out << "residuals: " << path.string() << '\n';
    return kOk;
}

struct ChartArgs {
    std::string input;
    bool residuals_of_ar1{false};
    bool fail_on_signal{false};
    std::string out_dir{"."};
};

int cmd_chart(const ChartArgs& a, std::ostream& out, std::ostream& err)
{
    Series<double> series = load_input(a.input);
    if (a.residuals_of_ar1) {
        const auto fit = estimate_ar1(series);
        series = ar1_residuals(series, fit);
        out << "charting AR(1) residuals, phi_hat=" << format_number(fit.phi_hat) << '\n';
    }
    const auto charts = build_charts(series);
    if (is_degenerate(charts.individuals))
        err << "warning: zero moving range, control limits are degenerate\n";

    ensure_dir(a.out_dir);
    {
        auto f = open_out(fs::path(a.out_dir) / "chart_individuals.csv");
        write_chart_csv(f, charts.individuals);
    }
    {
        auto f = open_out(fs::path(a.out_dir) / "chart_mr.csv");
        write_chart_csv(f, charts.moving_range);
    }
    report_chart(out, "individuals", charts.individuals);
    report_chart(out, "moving_range", charts.moving_range);
    const std::size_t total = charts.individuals.signals.size() + charts.moving_range.signals.size();
    out << "total_signals: " << total << '\n';
    return (a.fail_on_signal && total > 0) ? kSignal : kOk;
}

struct SimulateArgs {
    SimFlags sim;
    std::string rule{"integral"};
    std::optional<double> lambda1;
    std::optional<double> lambda2;
};

int cmd_simulate(const SimulateArgs& a, std::ostream& out, std::ostream& err)
{
    SimConfig config = to_config(a.sim);
    config.rule = parse_rule(a.rule, a.lambda1, a.lambda2);
    const std::uint64_t seed = resolve_seed(a.sim.seed);

    const auto summary = run_replications(config, a.sim.reps, seed, a.sim.threads);
    const auto trace = run_trace(config, replication_seed(seed, 0));

    ensure_dir(a.sim.out_dir);
    const fs::path dir(a.sim.out_dir);
    {
        auto f = open_out(dir / "trace.csv");
        write_trace_csv(f, trace);
    }
    {
        auto f = open_out(dir / "summary.csv");
        write_summary_header(f);
        write_summary_row(f, rule_label(config.rule), summary);
    }
    {
        auto f = open_out(dir / "per_step.csv");
        write_per_step_csv(f, summary.per_step_mean_z);
    }

    out << "rule=" << rule_label(config.rule) << " n_reps=" << summary.n_reps
        << " horizon=" << summary.horizon << " seed=" << seed
        << " mean_z=" << format_number(summary.mean_z) << " var_z=" << format_number(summary.var_z)
        << " abs_offset=" << format_number(std::abs(summary.mean_z - summary.tau)) << '\n';
    if (!trace.clamp_events.empty())
        out << "clamp_events: " << trace.clamp_events.size() << '\n';

    // Monitoring chart on z - tau of the exported trace.
    if (trace.z.size() >= 2) {
        const Series<double> error = trace.z.array() - config.process.tau;
        const auto charts = build_charts(error);
        {
            auto f = open_out(dir / "monitor_individuals.csv");
            write_chart_csv(f, charts.individuals);
        }
        {
            auto f = open_out(dir / "monitor_mr.csv");
            write_chart_csv(f, charts.moving_range);
        }
        report_chart(out, "monitor_individuals", charts.individuals);
        report_chart(out, "monitor_moving_range", charts.moving_range);
    } else {
        err << "warning: horizon 1, monitoring chart skipped\n";
    }
    return kOk;
}

struct CompareArgs {
    SimFlags sim;
    std::vector<std::string> rules;
};

int cmd_compare(const CompareArgs& a, std::ostream& out, std::ostream&)
{
    if (a.rules.size() < 2)
        throw UsageError("compare needs at least 2 --rule options");
    SimConfig config = to_config(a.sim);
    std::vector<ControlRule<double>> rules;
    for (const auto& r : a.rules)
        rules.push_back(parse_rule(r, std::nullopt, std::nullopt));
    const std::uint64_t seed = resolve_seed(a.sim.seed);

    const auto rows = compare_rules(config, rules, a.sim.reps, seed, a.sim.threads);

    ensure_dir(a.sim.out_dir);
    auto f = open_out(fs::path(a.sim.out_dir) / "comparison.csv");
    write_summary_header(f);
    write_summary_header(out);
    for (const auto& row : rows) {
        write_summary_row(f, rule_label(row.rule), row.summary);
        write_summary_row(out, rule_label(row.rule), row.summary);
    }
    return kOk;
}

struct TuneArgs {
    SimFlags sim;
    GridAxis l1;
    GridAxis l2;
    std::string objective{"mse"};
};

int cmd_tune(const TuneArgs& a, std::ostream& out, std::ostream&)
{
    const SimConfig config = to_config(a.sim);
    TuneSpec spec;
    spec.lambda1_grid = a.l1;
    spec.lambda2_grid = a.l2;
    spec.objective = parse_objective(a.objective);
    spec.n_reps = a.sim.reps;
    spec.base_seed = resolve_seed(a.sim.seed);
    validate(spec);

    const auto result = grid_search(config, spec, a.sim.threads);

    ensure_dir(a.sim.out_dir);
    auto f = open_out(fs::path(a.sim.out_dir) / "surface.csv");
    write_surface_csv(f, result.surface);
    out << "objective: " << to_string(spec.objective) << '\n'
        << "grid_points: " << result.surface.size() << '\n'
        << "best_lambda1: " << format_number(result.best_lambda1) << '\n'
        << "best_lambda2: " << format_number(result.best_lambda2) << '\n'
        << "best_objective: " << format_number(result.best_objective) << '\n';
    return kOk;
}

struct FixturesArgs {
    std::string name;
    std::string out_file;
};

int cmd_fixtures_list(std::ostream& out)
{
    for (const auto& f : fixtures())
        out << f.name << '\t' << f.values.size() << '\t' << f.description << '\n';
    return kOk;
}

int cmd_fixtures_export(const FixturesArgs& a, std::ostream& out)
{
    const Series<double> s = fixture_series(a.name);
    if (a.out_file.empty() || a.out_file == "-") {
        write_series_csv(out, s);
    } else {
        auto f = open_out(a.out_file);
        write_series_csv(f, s);
    }
    return kOk;
}

void add_grid_flags(CLI::App& cmd, const std::string& name, GridAxis& axis)
{
    cmd.add_option("--" + name + "-min", axis.min)->capture_default_str();
    cmd.add_option("--" + name + "-max", axis.max)->capture_default_str();
    cmd.add_option("--" + name + "-step", axis.step)->capture_default_str();
}

} // namespace

int run(const std::vector<std::string>& args_in, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Closed-loop gluten blending: AR(1) estimation, control charts, "
                 "feedback rule simulation and tuning",
                 "blendloop"};
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all");

    EstimateArgs estimate;
    auto* estimate_cmd = app.add_subcommand("estimate", "Fit AR(1) to a series and write residuals");
    estimate_cmd->add_option("input", estimate.input, "Series CSV or fixture:<name>")->required();
    estimate_cmd->add_option("--out", estimate.out_dir, "Output directory")->capture_default_str();

    ChartArgs chart;
    auto* chart_cmd = app.add_subcommand("chart", "Individuals and moving-range charts");
    chart_cmd->add_option("input", chart.input, "Series CSV or fixture:<name>")->required();
    chart_cmd->add_flag("--residuals-of-ar1", chart.residuals_of_ar1, "Chart AR(1) residuals");
    chart_cmd->add_flag("--fail-on-signal", chart.fail_on_signal, "Exit 4 when a signal is found");
    chart_cmd->add_option("--out", chart.out_dir, "Output directory")->capture_default_str();

    SimulateArgs simulate;
    auto* simulate_cmd = app.add_subcommand("simulate", "Simulate the closed loop");
    add_sim_flags(*simulate_cmd, simulate.sim);
    simulate_cmd->add_option("--rule", simulate.rule, "integral|first-order[:l1:l2]")
        ->capture_default_str();
    simulate_cmd->add_option("--lambda1", simulate.lambda1, "First-order rule lambda1");
    simulate_cmd->add_option("--lambda2", simulate.lambda2, "First-order rule lambda2");

    CompareArgs compare;
    auto* compare_cmd = app.add_subcommand("compare", "Compare rules on common random numbers");
    add_sim_flags(*compare_cmd, compare.sim);
    compare_cmd->add_option("--rule", compare.rules, "Rule, repeat for each: integral|first-order:l1:l2");

    TuneArgs tune;
    tune.sim.horizon = 500;
    tune.sim.reps = 20;
    auto* tune_cmd = app.add_subcommand("tune", "Grid search over (lambda1, lambda2)");
    add_sim_flags(*tune_cmd, tune.sim);
    add_grid_flags(*tune_cmd, "lambda1", tune.l1);
    add_grid_flags(*tune_cmd, "lambda2", tune.l2);
    tune_cmd->add_option("--objective", tune.objective, "mse|variance|abs-offset")
        ->capture_default_str();

    FixturesArgs fixtures_args;
    auto* fixtures_cmd = app.add_subcommand("fixtures", "List or export bundled data");
    fixtures_cmd->require_subcommand(1);
    auto* fixtures_list = fixtures_cmd->add_subcommand("list", "List bundled fixtures");
    auto* fixtures_export = fixtures_cmd->add_subcommand("export", "Write a fixture as series CSV");
    fixtures_export->add_option("name", fixtures_args.name)->required();
    fixtures_export->add_option("--out", fixtures_args.out_file, "Output file, '-' for stdout");

    try {
        // Pull out --config and splice file values in for flags not given.
        std::vector<std::string> args;
        std::optional<std::string> config_path;
        for (std::size_t k = 1; k < args_in.size(); ++k) {
            const auto& a = args_in[k];
            if (a == "--config") {
                if (k + 1 >= args_in.size())
                    throw UsageError("--config needs a file argument");
                config_path = args_in[++k];
            } else if (a.starts_with("--config=")) {
                config_path = a.substr(9);
            } else {
                args.push_back(a);
            }
        }
        if (config_path && !args.empty()) {
            CLI::App* sub = nullptr;
            for (auto* s : app.get_subcommands([](CLI::App*) { return true; }))
                if (s->get_name() == args.front())
                    sub = s;
            if (sub) {
                for (const auto& [key, value] : read_config(*config_path)) {
                    if (!sub->get_option_no_throw("--" + key)) {
                        err << "warning: config key '" << key << "' ignored by "
                            << sub->get_name() << '\n';
                        continue;
                    }
                    if (!flag_given(args, key))
                        args.push_back("--" + key + "=" + value);
                }
            }
        }

        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);

        if (*estimate_cmd)
            return cmd_estimate(estimate, out, err);
        if (*chart_cmd)
            return cmd_chart(chart, out, err);
        if (*simulate_cmd)
            return cmd_simulate(simulate, out, err);
        if (*compare_cmd)
            return cmd_compare(compare, out, err);
        if (*tune_cmd)
            return cmd_tune(tune, out, err);
        if (*fixtures_list)
            return cmd_fixtures_list(out);
        if (*fixtures_export)
            return cmd_fixtures_export(fixtures_args, out);
        return kInputError;
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            app.exit(e, out, err);
            return kOk;
        }
        err << "error: " << e.what() << '\n';
        return kInputError;
    } catch (const InsufficientData& e) {
        err << "error: " << e.what() << '\n';
        return kDegenerateData;
    } catch (const DegenerateData& e) {
        err << "error: " << e.what() << '\n';
        return kDegenerateData;
    } catch (const NoFixedPoint& e) {
        err << "error: " << e.what() << '\n';
        return kDegenerateData;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return kInputError;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kInputError;
    }
}

} // namespace blendloop::cli
