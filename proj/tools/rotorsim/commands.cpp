#include "commands.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <numbers>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "rotor/abelian.hpp"
#include "rotor/error.hpp"
#include "rotor/experiments.hpp"
#include "rotor/potential.hpp"
#include "rotor/random_walk.hpp"

#ifndef ROTORSIM_DEFAULT_CALIBRATION
#define ROTORSIM_DEFAULT_CALIBRATION ""
#endif
#ifndef ROTORSIM_SOURCE_CALIBRATION
#define ROTORSIM_SOURCE_CALIBRATION ""
#endif
#ifndef ROTORSIM_VERSION
#define ROTORSIM_VERSION "0"
#endif

namespace rotorsim {

namespace fs = std::filesystem;
using nlohmann::json;
using namespace rotor;

namespace {

constexpr int kSidecarSchema = 1;

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InvalidArgument("cannot read " + path);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

fs::path output_root() {
    const char* env = std::getenv("ROTOR_OUTPUT_ROOT");
    return env && *env ? fs::path(env) : fs::path(".");
}

fs::path resolve_out(const RunConfig& c, const std::string& fallback) {
    fs::path p = c.out.empty() ? fs::path(fallback) : fs::path(c.out);
    if (p.is_relative()) p = output_root() / p;
    fs::create_directories(p);
    return p;
}

void write_sidecar(const fs::path& dir, RunConfig config, const json& metadata, const json& results) {
    config.out = dir.string();
    json j;
    j["schema_version"] = kSidecarSchema;
    j["tool"] = "rotorsim";
    j["version"] = ROTORSIM_VERSION;
    j["config"] = to_json(config);
    j["metadata"] = metadata;
    j["results"] = results;
    write_atomic((dir / "run.json").string(), j.dump(2) + "\n");
}

InitialRule make_rule(const RunConfig& c) {
    if (c.rule.rfind("table:", 0) == 0) return parse_rule_table(read_file(c.rule.substr(6)), c.d);
    return parse_rule(c.rule);
}

CyclicOrder make_order(const RunConfig& c) {
    if (c.order.empty()) throw CLI::RequiredError("--order");
    return parse_order(c.order, c.d);
}

json meta_json(const SeriesMetadata& m) {
    return {{"d", m.d}, {"order", m.order}, {"rule", m.rule}, {"regime", m.regime},
            {"axis_permutation", m.axis_permutation}, {"determinism", m.determinism}, {"engine", m.engine}};
}

std::optional<double> reference_rate(const RunConfig& c) {
    if (c.d == 2) return std::numbers::pi / 2;
    std::string path = c.calibration;
    if (path.empty()) {
        const char* env = std::getenv("ROTOR_CALIBRATION");
        for (const char* candidate : {env ? env : "", ROTORSIM_DEFAULT_CALIBRATION, ROTORSIM_SOURCE_CALIBRATION}) {
            if (*candidate && fs::exists(candidate)) {
                path = candidate;
                break;
            }
        }
    }
    if (path.empty()) return std::nullopt;
    const auto cal = Calibration::load(path);
    if (auto e = cal.get("alpha_" + std::to_string(c.d))) return e->value;
    return std::nullopt;
}

int cmd_escape_rate(const RunConfig& c, std::ostream& out) {
    SeriesConfig sc;
    sc.order = make_order(c);
    sc.rule = make_rule(c);
    sc.n_max = c.n;
    sc.checkpoints = c.checkpoints;
    if (!sc.checkpoints.empty()) sc.checkpoints = merge_checkpoints(sc.checkpoints, {c.n});
    sc.engine = parse_engine(c.engine);
    sc.walk.step_budget = c.budget;
    if (c.regime != "return" && c.regime != "escape-only") {
        throw InvalidArgument("--regime must be 'return' or 'escape-only'");
    }
    const auto series = c.regime == "return" ? escape_rate_series(c.d, sc) : escape_only_series(c.d, sc);
    const fs::path dir = resolve_out(c, "escape-rate-d" + std::to_string(c.d) + "-n" + std::to_string(c.n));
    std::ostringstream csv;
    write_series_csv(csv, series);
    write_atomic((dir / "series.csv").string(), csv.str());

    const auto problems = check_series_invariants(series);
    const auto norm = rate_normalizer(series);
    const auto terminal = norm.empty() ? std::nullopt : normalized_rate(series, norm.back());
    const auto reference = reference_rate(c);
    const auto& last = series.checkpoints.back();
    json results{{"n", last.n}, {"escaped", last.escaped}, {"u0", last.u0}, {"h_plus", last.h_plus},
                 {"h_minus", last.h_minus}, {"breadth", last.breadth}, {"steps", last.steps},
                 {"invariant_violations", problems}};
    results["normalized_rate"] = terminal ? json(*terminal) : json(nullptr);
    results["reference"] = reference ? json(*reference) : json(nullptr);
    write_sidecar(dir, c, meta_json(series.meta), results);

    out << "n = " << last.n << "  I = " << last.escaped << "  u0 = " << last.u0 << "\n";
    out << "normalized_rate = " << (terminal ? fmt(*terminal) : "n/a") << "  reference = "
        << (reference ? fmt(*reference) : "n/a (no calibrated alpha)") << "\n";
    out << "series: " << (dir / "series.csv").string() << "\n";
    for (const auto& p : problems) out << "invariant violated: " << p << "\n";
    return problems.empty() ? kOk : kFailure;
}

template <int D>
std::string site_row(const Site<D>& x) {
    std::string s;
    for (int i = 0; i < D; ++i) {
        if (i) s += ',';
        s += std::to_string(x[i]);
    }
    return s;
}

std::string coord_header(int d) {
    std::string s;
    for (int i = 1; i <= d; ++i) s += (i > 1 ? ",x" : "x") + std::to_string(i);
    return s;
}

int cmd_aggregate(const RunConfig& c, std::ostream& out) {
    const auto order = c.order.empty() ? ccw_order(c.d) : make_order(c);
    const auto rule = make_rule(c);
    const fs::path dir = resolve_out(c, "aggregate-d" + std::to_string(c.d) + "-n" + std::to_string(c.n));
    return dispatch_dimension(c.d, [&]<int D>() {
        WalkOptions opts;
        opts.step_budget = c.budget;
        const auto res = aggregate<D>(order, rule, c.n, opts);
        auto cluster = res.cluster;
        std::sort(cluster.begin(), cluster.end());
        std::ostringstream csv;
        csv << "# schema_version=1\n" << coord_header(D) << "\n";
        for (const auto& x : cluster) csv << site_row<D>(x) << "\n";
        write_atomic((dir / "cluster.csv").string(), csv.str());
        json results{{"n", res.n}, {"inradius", res.inradius}, {"outradius", res.outradius},
                     {"volume_radius", res.volume_radius()}, {"steps", res.steps}};
        if constexpr (D == 2) {
            std::int64_t x0 = 0, x1 = 0, y0 = 0, y1 = 0;
            for (const auto& x : cluster) {
                x0 = std::min(x0, x[0]);
                x1 = std::max(x1, x[0]);
                y0 = std::min(y0, x[1]);
                y1 = std::max(y1, x[1]);
            }
            const auto w = static_cast<std::size_t>(x1 - x0 + 1), h = static_cast<std::size_t>(y1 - y0 + 1);
            std::string pixels(w * h, '\0');
            for (const auto& x : cluster) {
                pixels[static_cast<std::size_t>(y1 - x[1]) * w + static_cast<std::size_t>(x[0] - x0)] = '\xff';
            }
            write_atomic((dir / "cluster.pgm").string(),
                         "P5\n" + std::to_string(w) + " " + std::to_string(h) + "\n255\n" + pixels);
            results["pgm_origin"] = {x0, y1};
        }
        json meta{{"d", D}, {"order", order.to_string()}, {"rule", rule.describe()}};
        write_sidecar(dir, c, meta, results);
        out << "n = " << res.n << "  inradius = " << fmt(res.inradius) << "  outradius = " << fmt(res.outradius)
            << "  volume_radius = " << fmt(res.volume_radius()) << "\n";
        out << "cluster: " << (dir / "cluster.csv").string() << "\n";
        return static_cast<int>(kOk);
    });
}

int cmd_ball(const RunConfig& c, std::ostream& out) {
    const auto order = make_order(c);
    const auto rule = make_rule(c);
    const fs::path dir = resolve_out(c, "ball-d" + std::to_string(c.d) + "-n" + std::to_string(c.n) + "-r" + fmt(c.r));
    return dispatch_dimension(c.d, [&]<int D>() {
        WalkOptions opts;
        opts.step_budget = c.budget;
        const auto run = ball_odometer<D>(order, rule, c.n, c.r, opts);
        const auto flux = flux_residual<D>(run.state, c.r);
        const auto conservation = check_ball_conservation<D>(run.state, c.r, c.n, run.absorbed_total());
        const double rho = c.rho > 0 ? c.rho : c.r / 2;
        const auto uncovered = uncovered_shell_sites<D>(run, rho);
        std::vector<std::pair<Site<D>, std::uint64_t>> field;
        for (const auto& [x, s] : run.state.sites()) field.emplace_back(x, s.odometer);
        std::sort(field.begin(), field.end());
        std::ostringstream csv;
        csv << "# schema_version=1\n" << coord_header(D) << ",u\n";
        for (const auto& [x, u] : field) csv << site_row<D>(x) << ',' << u << "\n";
        write_atomic((dir / "odometer.csv").string(), csv.str());
        const std::int64_t limit = 4 * D - 2;
        json results{{"n", c.n}, {"r", c.r}, {"steps", run.steps}, {"absorbed", run.absorbed_total()},
                     {"flux_max_residual", flux.max_abs_residual}, {"flux_limit", limit},
                     {"flux_edges", flux.edges}, {"conservation_violations", conservation},
                     {"shell_radius", rho}, {"uncovered_shell_sites", uncovered.size()}};
        json meta{{"d", D}, {"order", order.to_string()}, {"rule", rule.describe()}};
        write_sidecar(dir, c, meta, results);
        out << "flux residual = " << flux.max_abs_residual << " (limit " << limit << ")  uncovered shell sites at rho "
            << fmt(rho) << " = " << uncovered.size() << "\n";
        for (const auto& p : conservation) out << "conservation violated: " << p << "\n";
        return flux.max_abs_residual <= limit && conservation.empty() ? static_cast<int>(kOk)
                                                                      : static_cast<int>(kFailure);
    });
}

std::vector<Schedule> battery(std::uint64_t salt) {
    std::vector<Schedule> s{Schedule::fifo(), Schedule::lifo(), Schedule::round_robin()};
    for (std::uint64_t k = 0; k < 20; ++k) s.push_back(Schedule::random(salt * 100 + k));
    return s;
}

struct GraphCheck {
    bool abelian = true;
    bool flow = true;
    bool hp = true;
    double hp_gap = 0, hp_bound = 0;
};

GraphCheck check_graph(const FiniteRotorGraph& g, const std::vector<int>& target, std::uint64_t salt) {
    GraphCheck r;
    const auto base = stabilize(g, Schedule::fifo());
    for (const auto& s : battery(salt)) r.abelian = r.abelian && stabilize(g, s).same_outcome(base);
    r.flow = flow_violations(g, base).empty();
    const auto hp = holroyd_propp_check(g, target);
    r.hp = hp.verdict;
    r.hp_gap = std::abs(hp.rotor_mass - hp.walk_mass);
    r.hp_bound = hp.bound;
    return r;
}

int cmd_abelian(const RunConfig& c, std::ostream& out) {
    const fs::path dir = resolve_out(c, c.graph.empty() ? "abelian-fuzz" + std::to_string(c.fuzz) : "abelian-graph");
    json results;
    bool ok = true;
    if (!c.graph.empty()) {
        const auto g = load_graph(c.graph);
        int first_sink = -1;
        for (int v = 0; v < g.size() && first_sink < 0; ++v) {
            if (g.sink[static_cast<std::size_t>(v)]) first_sink = v;
        }
        const auto e = enumerate_schedules(g);
        const auto chk = check_graph(g, {first_sink}, c.seed);
        ok = e.mismatches == 0 && chk.abelian && chk.flow && chk.hp;
        results = {{"graph", c.graph}, {"enumerated_schedules", e.leaves}, {"enumeration_truncated", e.truncated},
                   {"mismatches", e.mismatches}, {"battery_identical", chk.abelian}, {"flow_ok", chk.flow},
                   {"holroyd_propp", chk.hp}, {"hp_gap", chk.hp_gap}, {"hp_bound", chk.hp_bound},
                   {"placement", e.first.placement}, {"exits", e.first.exits}};
        out << "schedules enumerated = " << e.leaves << "  mismatches = " << e.mismatches
            << "  holroyd-propp " << (chk.hp ? "ok" : "VIOLATED") << "\n";
    } else {
        if (c.fuzz == 0) throw InvalidArgument("abelian needs --graph or --fuzz N");
        CounterRng rng(c.seed, 0);
        RandomGraphOptions opts;
        opts.max_vertices = c.max_vertices;
        opts.max_particles = c.max_particles;
        opts.directed = c.directed;
        std::uint64_t abelian_fail = 0, flow_fail = 0, hp_fail = 0;
        for (std::uint64_t k = 0; k < c.fuzz; ++k) {
            const auto g = random_rotor_graph(rng, opts);
            std::vector<int> target;
            for (int v = 0; v < g.size(); ++v) {
                if (g.sink[static_cast<std::size_t>(v)] && (target.empty() || rng.below(2) == 0)) target.push_back(v);
            }
            const auto chk = check_graph(g, target, k);
            abelian_fail += chk.abelian ? 0 : 1;
            flow_fail += chk.flow ? 0 : 1;
            hp_fail += chk.hp ? 0 : 1;
        }
        ok = abelian_fail + flow_fail + hp_fail == 0;
        results = {{"instances", c.fuzz}, {"schedules_per_instance", 24}, {"abelian_failures", abelian_fail},
                   {"flow_failures", flow_fail}, {"holroyd_propp_failures", hp_fail}};
        out << c.fuzz << " instances: abelian failures " << abelian_fail << ", flow failures " << flow_fail
            << ", holroyd-propp failures " << hp_fail << "\n";
    }
    results["all_verdicts_true"] = ok;
    write_sidecar(dir, c, json::object(), results);
    return ok ? kOk : kFailure;
}

int cmd_mc_alpha(const RunConfig& c, std::ostream& out) {
    McOptions opts;
    opts.seed = c.seed;
    opts.threads = c.threads;
    opts.accelerate = c.accelerate;
    const auto a = mc_alpha(c.d, c.trials, c.radius, opts);
    json results{{"d", a.d}, {"trials", a.trials}, {"radius", a.radius}, {"seed", a.seed},
                 {"escaped", a.escaped}, {"estimate", a.estimate}, {"std_error", a.std_error},
                 {"moves", a.moves}, {"method", a.method}};
    const fs::path dir = resolve_out(c, "mc-alpha-d" + std::to_string(c.d) + "-seed" + std::to_string(c.seed));
    write_sidecar(dir, c, json{{"determinism", "seeded"}}, results);
    out << results.dump(2) << "\n";
    return kOk;
}

int cmd_calibrate(const RunConfig& c, std::ostream& out) {
    CalibrationOptions opts;
    opts.include_d3 = !c.skip_d3;
    const auto cal = calibrate(opts);
    fs::path target = c.out.empty() ? fs::path("calibration.txt") : fs::path(c.out);
    if (target.is_relative()) target = output_root() / target;
    if (target.has_parent_path()) fs::create_directories(target.parent_path());
    write_atomic(target.string(), cal.to_text());
    out << cal.to_text();
    out << "written: " << target.string() << "\n";
    return kOk;
}

// Grid file: "key = v1, v2, ..." lines; the cartesian product of all lists is
// run, each combination in its own subdirectory.
int cmd_batch(const RunConfig& c, std::ostream& out) {
    if (c.grid.empty()) throw InvalidArgument("batch needs --grid FILE");
    std::vector<std::pair<std::string, std::vector<std::string>>> axes;
    std::string command;
    for (const auto& tok : config_file_tokens(read_file(c.grid))) {
        const auto eq = tok.find('=');
        const std::string key = tok.substr(2, eq - 2);
        std::vector<std::string> values;
        std::istringstream in(tok.substr(eq + 1));
        for (std::string v; std::getline(in, v, ',');) {
            v.erase(0, v.find_first_not_of(' '));
            v.erase(v.find_last_not_of(' ') + 1);
            if (!v.empty()) values.push_back(v);
        }
        if (key == "command") {
            command = values.at(0);
        } else if (key == "out" || key == "grid") {
            throw InvalidArgument("batch grids may not set '" + key + "'");
        } else {
            axes.emplace_back(key, values);
        }
    }
    if (command.empty() || command == "batch") throw InvalidArgument("grid file needs a 'command' line");
    std::vector<std::vector<std::string>> runs{{}};
    for (const auto& [key, values] : axes) {
        std::vector<std::vector<std::string>> next;
        for (const auto& prefix : runs) {
            for (const auto& v : values) {
                auto r = prefix;
                r.push_back("--" + key + "=" + v);
                next.push_back(std::move(r));
            }
        }
        runs = std::move(next);
    }
    const fs::path dir = resolve_out(c, "batch");
    std::vector<int> codes(runs.size(), 0);
    std::vector<std::string> logs(runs.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t k; (k = next++) < runs.size();) {
            std::vector<std::string> args{"rotorsim", command};
            args.insert(args.end(), runs[k].begin(), runs[k].end());
            args.push_back("--out=" + (dir / ("run-" + std::to_string(k))).string());
            std::ostringstream o, e;
            codes[k] = run_cli(args, o, e);
            logs[k] = o.str() + e.str();
        }
    };
    const unsigned workers = std::max(1u, std::min<unsigned>(c.threads, static_cast<unsigned>(runs.size())));
    std::vector<std::thread> pool;
    for (unsigned w = 1; w < workers; ++w) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    json index = json::array();
    int worst = kOk;
    for (std::size_t k = 0; k < runs.size(); ++k) {
        index.push_back({{"run", k}, {"args", runs[k]}, {"exit_code", codes[k]}});
        worst = std::max(worst, codes[k]);
        out << "run-" << k << " exit " << codes[k] << "\n" << logs[k];
    }
    write_sidecar(dir, c, json{{"command", command}}, json{{"runs", index}});
    return worst;
}

void add_common(CLI::App* sub, RunConfig& c, bool lattice) {
    sub->add_option("--config", "key = value file with defaults for any option");
    sub->add_option("--out", c.out, "artifact directory (relative paths use $ROTOR_OUTPUT_ROOT)");
    if (lattice) {
        sub->add_option("--d", c.d, "dimension")->check(CLI::Range(2, 5));
        sub->add_option("--order", c.order, "cyclic rotor order: ccw, cw or e1,e2,-e1,-e2");
        sub->add_option("--rule", c.rule, "initial rotors: rho0, uniform-up or table:<file>");
        sub->add_option("--n", c.n, "number of particles");
        sub->add_option("--budget", c.budget, "step budget per particle");
    }
}

}  // namespace

void write_atomic(const std::string& path, const std::string& content) {
    const fs::path target(path);
    fs::path tmp = target;
    tmp += ".tmp";
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) throw std::runtime_error("cannot write " + tmp.string());
        f << content;
        f.flush();
        if (!f) throw std::runtime_error("write failed for " + tmp.string());
    }
    fs::rename(tmp, target);
}

int run_command(const RunConfig& c, std::ostream& out) {
    if (c.command == "escape-rate") return cmd_escape_rate(c, out);
    if (c.command == "aggregate") return cmd_aggregate(c, out);
    if (c.command == "ball") return cmd_ball(c, out);
    if (c.command == "abelian") return cmd_abelian(c, out);
    if (c.command == "mc-alpha") return cmd_mc_alpha(c, out);
    if (c.command == "calibrate") return cmd_calibrate(c, out);
    if (c.command == "batch") return cmd_batch(c, out);
    throw InvalidArgument("unknown command '" + c.command + "'");
}

namespace {

void error_json(std::ostream& err, const std::string& kind, const std::string& message) {
    err << json{{"error", kind}, {"message", message}}.dump() << "\n";
}

// Expands "--config FILE" into its tokens, placed before the explicit
// arguments so the command line wins.
std::vector<std::string> expand_config(const std::vector<std::string>& args) {
    std::vector<std::string> head(args.begin(), args.begin() + std::min<std::size_t>(args.size(), 2));
    std::vector<std::string> from_file, rest;
    for (std::size_t i = head.size(); i < args.size(); ++i) {
        std::string path;
        if (args[i] == "--config" && i + 1 < args.size()) {
            path = args[++i];
        } else if (args[i].rfind("--config=", 0) == 0) {
            path = args[i].substr(9);
        } else {
            rest.push_back(args[i]);
            continue;
        }
        const auto toks = config_file_tokens(read_file(path));
        from_file.insert(from_file.end(), toks.begin(), toks.end());
    }
    head.insert(head.end(), from_file.begin(), from_file.end());
    head.insert(head.end(), rest.begin(), rest.end());
    return head;
}

}  // namespace

int run_cli(const std::vector<std::string>& raw_args, std::ostream& out, std::ostream& err) {
    RunConfig c;
    CLI::App app{"rotor walk experiments on Z^d", "rotorsim"};
    app.require_subcommand(1);
    app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

    auto* escape = app.add_subcommand("escape-rate", "escape counts I(rho, n) or escape-only odometers");
    add_common(escape, c, true);
    escape->add_option("--checkpoints", c.checkpoints, "explicit checkpoints (default geometric)")->delimiter(',');
    escape->add_option("--regime", c.regime, "return or escape-only");
    escape->add_option("--engine", c.engine, "sparse or dense");
    escape->add_option("--calibration", c.calibration, "calibration file for the d >= 3 reference");

    auto* agg = app.add_subcommand("aggregate", "rotor-router aggregation cluster");
    add_common(agg, c, true);

    auto* ball = app.add_subcommand("ball", "odometer of n particles stopped on the boundary of B_r");
    add_common(ball, c, true);
    ball->add_option("--r", c.r, "ball radius");
    ball->add_option("--rho", c.rho, "shell radius for the coverage check (default r/2)");

    auto* ab = app.add_subcommand("abelian", "schedule independence and Holroyd-Propp checks");
    add_common(ab, c, false);
    ab->add_option("--graph", c.graph, "graph fixture file");
    ab->add_option("--fuzz", c.fuzz, "number of random instances");
    ab->add_option("--max-vertices", c.max_vertices)->check(CLI::Range(3, 10000));
    ab->add_option("--max-particles", c.max_particles);
    ab->add_flag("--directed", c.directed, "directed random graphs");
    ab->add_option("--seed", c.seed);

    auto* mc = app.add_subcommand("mc-alpha", "Monte Carlo escape probability of simple random walk");
    add_common(mc, c, false);
    mc->add_option("--d", c.d)->check(CLI::Range(3, 5));
    mc->add_option("--trials", c.trials);
    mc->add_option("--radius", c.radius);
    mc->add_option("--seed", c.seed);
    mc->add_option("--threads", c.threads, "worker threads, 0 = all cores");
    mc->add_option("--accelerate", c.accelerate, "cube jumps and far-field moves (true/false)");

    auto* cal = app.add_subcommand("calibrate", "recompute the potential-theory constants");
    add_common(cal, c, false);
    cal->add_flag("--skip-d3", c.skip_d3, "skip the d = 3 solve");

    auto* batch = app.add_subcommand("batch", "cartesian grid of runs");
    add_common(batch, c, false);
    batch->add_option("--grid", c.grid, "grid file")->required();
    batch->add_option("--threads", c.threads, "parallel runs");

    auto* replay = app.add_subcommand("replay", "rerun from a run.json sidecar");
    std::string sidecar, replay_out;
    replay->add_option("sidecar", sidecar)->required();
    replay->add_option("--out", replay_out, "override the artifact directory");

    try {
        const auto args = expand_config(raw_args);
        std::vector<std::string> reversed(args.rbegin(), args.rend() - 1);
        app.parse(reversed);
        if (replay->parsed()) {
            const auto j = json::parse(read_file(sidecar));
            c = from_json(j.at("config"));
            if (!replay_out.empty()) c.out = replay_out;
        } else {
            c.command = app.get_subcommands().front()->get_name();
        }
        return run_command(c, out);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kOk;
    } catch (const CLI::ParseError& e) {
        error_json(err, "usage", e.what());
        err << app.help();
        return kUsage;
    } catch (const OrderViolation& e) {
        error_json(err, "order-violation", e.what());
        return kUsage;
    } catch (const rotor::BudgetExceeded& e) {
        error_json(err, "budget-exceeded", e.what());
        return kBudget;
    } catch (const std::invalid_argument& e) {
        error_json(err, "invalid-argument", e.what());
        return kUsage;
    } catch (const json::exception& e) {
        error_json(err, "invalid-sidecar", e.what());
        return kUsage;
    } catch (const std::exception& e) {
        error_json(err, "failure", e.what());
        return kFailure;
    }
}

}  // namespace rotorsim
