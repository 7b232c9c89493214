#include "rotor/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "rotor/dense.hpp"
#include "rotor/error.hpp"

namespace rotor {

std::vector<std::uint64_t> geometric_checkpoints(std::uint64_t n_max, double ratio) {
    if (!(ratio > 1.0)) throw InvalidArgument("checkpoint ratio must exceed 1");
    std::vector<std::uint64_t> out;
    double power = 1.0;
    while (true) {
        const auto n = static_cast<std::uint64_t>(std::ceil(power - 1e-9));
        if (n >= n_max) break;
        if (out.empty() || out.back() != n) out.push_back(n);
        power *= ratio;
    }
    if (n_max > 0) out.push_back(n_max);
    return out;
}

std::vector<std::uint64_t> merge_checkpoints(std::vector<std::uint64_t> a,
                                             const std::vector<std::uint64_t>& b) {
    a.insert(a.end(), b.begin(), b.end());
    std::sort(a.begin(), a.end());
    a.erase(std::unique(a.begin(), a.end()), a.end());
    a.erase(std::remove(a.begin(), a.end(), 0U), a.end());
    return a;
}

template <int D>
EscapeExperiment<D>::EscapeExperiment(const CyclicOrder& order, InitialRule rule, StopKind kind,
                                      WalkOptions options)
    : permutation_(),
      state_([&] {
          NormalizedOrder norm = normalize_order(order);
          permutation_ = norm.axis_permutation;
          return LatticeState<D>(std::move(norm.order), std::move(rule));
      }()),
      options_(std::move(options)) {
    if (kind == StopKind::absorb_origin_or_escape) {
        regime_ = StopRegime<D>::origin_or_escape();
    } else if (kind == StopKind::escape_only) {
        regime_ = StopRegime<D>::escape_only();
    } else {
        throw InvalidArgument("escape experiments use origin-or-escape or escape-only regimes");
    }
}

template <int D>
WalkOutcome<D> EscapeExperiment<D>::launch() {
    WalkOutcome<D> out = run_particle<D>(state_, Site<D>{}, regime_, options_);
    ++launched_;
    steps_ += out.steps;
    if (out.status == OutcomeStatus::escaped) ++escaped_;
    return out;
}

template <int D>
Checkpoint EscapeExperiment<D>::checkpoint() const {
    Checkpoint c;
    c.n = launched_;
    c.escaped = escaped_;
    c.u0 = origin_odometer();
    c.h_plus = state_.h_plus();
    c.h_minus = state_.h_minus();
    c.breadth = state_.breadth();
    c.steps = steps_;
    return c;
}

template <int D>
SeriesMetadata EscapeExperiment<D>::metadata() const {
    SeriesMetadata m;
    m.d = D;
    m.order = state_.order().to_string();
    m.rule = state_.rule().describe();
    m.regime = to_string(regime_.kind);
    m.axis_permutation = permutation_;
    return m;
}

std::string to_string(SeriesEngine engine) {
    return engine == SeriesEngine::dense ? "dense" : "sparse";
}

SeriesEngine parse_engine(std::string_view name) {
    if (name == "sparse") return SeriesEngine::sparse;
    if (name == "dense") return SeriesEngine::dense;
    throw InvalidArgument("unknown engine '" + std::string(name) + "' (expected sparse or dense)");
}

namespace {

template <class Experiment>
ExperimentSeries drive(Experiment& exp, const SeriesConfig& config) {
    const auto marks = config.checkpoints.empty() ? geometric_checkpoints(config.n_max)
                                                  : merge_checkpoints(config.checkpoints, {});
    ExperimentSeries series;
    series.meta = exp.metadata();
    for (std::uint64_t n : marks) {
        if (n > config.n_max) break;
        exp.launch_until(n);
        series.checkpoints.push_back(exp.checkpoint());
        if (config.on_checkpoint) config.on_checkpoint(series.checkpoints.back());
    }
    return series;
}

ExperimentSeries run_series(int d, const SeriesConfig& config, StopKind kind) {
    if (config.engine == SeriesEngine::dense) {
        return dispatch_dimension(d, [&]<int D>() {
            DenseEscape<D> exp(config.order, config.rule, kind, config.walk.step_budget);
            return drive(exp, config);
        });
    }
    return dispatch_dimension(d, [&]<int D>() {
        EscapeExperiment<D> exp(config.order, config.rule, kind, config.walk);
        return drive(exp, config);
    });
}

}  // namespace

ExperimentSeries escape_rate_series(int d, const SeriesConfig& config) {
    return run_series(d, config, StopKind::absorb_origin_or_escape);
}

ExperimentSeries escape_only_series(int d, const SeriesConfig& config) {
    return run_series(d, config, StopKind::escape_only);
}

std::vector<std::string> check_series_invariants(const ExperimentSeries& series) {
    std::vector<std::string> problems;
    std::uint64_t prev = 0;
    for (const Checkpoint& c : series.checkpoints) {
        const std::string at = " at n=" + std::to_string(c.n);
        if (c.n <= prev && prev != 0) problems.push_back("n not strictly increasing" + at);
        prev = c.n;
        if (c.escaped > c.n) problems.push_back("I > n" + at);
        if (c.h_plus < 0 || static_cast<std::uint64_t>(c.h_plus) > c.n) {
            problems.push_back("h_plus > n" + at);
        }
        if (c.h_minus < 0 || static_cast<std::uint64_t>(c.h_minus) > c.n) {
            problems.push_back("h_minus > n" + at);
        }
    }
    return problems;
}

std::vector<NormalizedPoint> rate_normalizer(const ExperimentSeries& series) {
    const int d = series.meta.d;
    const bool escape_only = series.meta.regime == to_string(StopKind::escape_only);
    std::vector<NormalizedPoint> out;
    for (const Checkpoint& c : series.checkpoints) {
        NormalizedPoint p;
        p.n = c.n;
        const auto n = static_cast<double>(c.n);
        const auto escaped = static_cast<double>(c.escaped);
        if (d == 2) {
            if (c.n >= 2) p.primal = escaped * std::log(n) / n;
        } else if (c.n >= 1) {
            p.primal = escaped / n;
        }
        if (escape_only) {
            const auto u0 = static_cast<double>(c.u0);
            if (d == 2) {
                if (c.u0 >= 2) p.dual = n * std::log(u0) / u0;
            } else if (c.u0 >= 1) {
                p.dual = n / u0;
            }
        }
        out.push_back(p);
    }
    return out;
}

std::optional<double> normalized_rate(const ExperimentSeries& series, const NormalizedPoint& p) {
    if (series.meta.regime == to_string(StopKind::escape_only)) return p.dual;
    return p.primal;
}

void write_series_csv(std::ostream& out, const ExperimentSeries& series) {
    out << "# schema_version=" << kSeriesCsvSchema << "\n";
    out << "n,I,u0,h_plus,h_minus,breadth,steps,normalized_rate\n";
    const auto norm = rate_normalizer(series);
    char buf[64];
    for (std::size_t k = 0; k < series.checkpoints.size(); ++k) {
        const Checkpoint& c = series.checkpoints[k];
        out << c.n << ',' << c.escaped << ',' << c.u0 << ',' << c.h_plus << ',' << c.h_minus
            << ',' << c.breadth << ',' << c.steps << ',';
        if (auto v = normalized_rate(series, norm[k])) {
            std::snprintf(buf, sizeof buf, "%.10g", *v);
            out << buf;
        }
        out << '\n';
    }
}

template <int D>
BallRun<D> ball_odometer(const CyclicOrder& order, const InitialRule& rule, std::uint64_t n,
                         double r, const WalkOptions& options) {
    if (!(r >= 1.0)) throw InvalidArgument("ball radius must be at least 1");
    BallRun<D> run{LatticeState<D>(order, rule), r, n, 0, {}};
    const auto regime = StopRegime<D>::ball(r);
    run.state.add_provenance(kTagBall);
    run.state.set_ball_radius(r);
    for (std::uint64_t k = 0; k < n; ++k) {
        const WalkOutcome<D> out = run_particle<D>(run.state, Site<D>{}, regime, options);
        run.steps += out.steps;
        ++run.absorbed[out.site];
    }
    return run;
}

template <int D>
std::vector<Site<D>> uncovered_shell_sites(const BallRun<D>& run, double rho) {
    std::vector<Site<D>> out;
    for (const Site<D>& x : ball_boundary_sites<D>(rho)) {
        if (run.u(x) == 0) out.push_back(x);
    }
    return out;
}

double unit_ball_volume(int d) {
    return std::pow(std::numbers::pi, d / 2.0) / std::tgamma(d / 2.0 + 1.0);
}

template <int D>
double AggregationResult<D>::volume_radius() const {
    return std::pow(static_cast<double>(n) / unit_ball_volume(D), 1.0 / D);
}

template <int D>
Aggregator<D>::Aggregator(const CyclicOrder& order, InitialRule rule, WalkOptions options)
    : state_(order, std::move(rule)), options_(std::move(options)) {
    state_.add_provenance(kTagAggregation);
}

template <int D>
void Aggregator<D>::add_particle() {
    Site<D> pos{};
    std::uint64_t steps = 0;
    // Exited sites are always occupied, so the set lookup is only needed on
    // sites the state has never materialized.
    for (;;) {
        SiteState* s = state_.find(pos);
        if (s == nullptr) {
            if (!occupied_.contains(pos)) {
                occupied_.insert(pos);
                order_of_arrival_.push_back(pos);
                steps_ += steps;
                return;
            }
            s = &state_.materialize(pos, state_.find_column(column_of<D>(pos)));
        }
        if (steps >= options_.step_budget) {
            throw BudgetExceeded("aggregation particle exceeded step budget",
                                 options_.step_budget);
        }
        const Direction dir = Direction::from_index(state_.fire(*s, pos));
        if (options_.trace) options_.trace->on_step(pos, dir, steps);
        pos[dir.axis] += dir.sign;
        ++steps;
    }
}

template <int D>
AggregationResult<D> Aggregator<D>::result() const {
    AggregationResult<D> res;
    res.cluster = order_of_arrival_;
    res.n = occupied_.size();
    res.steps = steps_;
    std::int64_t max2 = 0;
    std::int64_t min_out2 = std::numeric_limits<std::int64_t>::max();
    for (const Site<D>& x : order_of_arrival_) {
        max2 = std::max(max2, norm2<D>(x));
        for (int k = 0; k < 2 * D; ++k) {
            const Direction dir = Direction::from_index(k);
            Site<D> y = x;
            y[dir.axis] += dir.sign;
            if (!occupied_.contains(y)) min_out2 = std::min(min_out2, norm2<D>(y));
        }
    }
    res.outradius = std::sqrt(static_cast<double>(max2));
    res.inradius = res.n == 0 ? 0.0 : std::sqrt(static_cast<double>(min_out2));
    return res;
}

template <int D>
AggregationResult<D> aggregate(const CyclicOrder& order, const InitialRule& rule, std::uint64_t n,
                               const WalkOptions& options) {
    if (n < 1) throw InvalidArgument("aggregation needs at least one particle");
    Aggregator<D> agg(order, rule, options);
    agg.grow_to(n);
    return agg.result();
}

#define ROTOR_INSTANTIATE_EXPERIMENTS(D)                                                       \
    template class EscapeExperiment<D>;                                                        \
    template struct AggregationResult<D>;                                                      \
    template class Aggregator<D>;                                                              \
    template BallRun<D> ball_odometer<D>(const CyclicOrder&, const InitialRule&,               \
                                         std::uint64_t, double, const WalkOptions&);           \
    template std::vector<Site<D>> uncovered_shell_sites<D>(const BallRun<D>&, double);         \
    template AggregationResult<D> aggregate<D>(const CyclicOrder&, const InitialRule&,         \
                                               std::uint64_t, const WalkOptions&);

ROTOR_INSTANTIATE_EXPERIMENTS(2)
ROTOR_INSTANTIATE_EXPERIMENTS(3)
ROTOR_INSTANTIATE_EXPERIMENTS(4)
ROTOR_INSTANTIATE_EXPERIMENTS(5)

#undef ROTOR_INSTANTIATE_EXPERIMENTS

}  // namespace rotor
