#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "absl/container/flat_hash_map.h"
#include "absl/container/flat_hash_set.h"
#include "rotor/lattice.hpp"
#include "rotor/walk.hpp"

namespace rotor {

/// One row of a measurement series.
struct Checkpoint {
    std::uint64_t n = 0;         // particles launched
    std::uint64_t escaped = 0;   // I(rho, n)
    std::uint64_t u0 = 0;        // exits from the origin
    std::int64_t h_plus = 0;
    std::int64_t h_minus = 0;
    std::int64_t breadth = 0;
    std::uint64_t steps = 0;     // cumulative over all particles
};

struct SeriesMetadata {
    int d = 2;
    std::string order;           // explicit cycle, after axis normalization
    std::string rule;
    std::string regime;
    std::vector<int> axis_permutation;
    std::string determinism = "seedless";
    std::string engine = "sparse";
};

struct ExperimentSeries {
    SeriesMetadata meta;
    std::vector<Checkpoint> checkpoints;
};

/// ceil(ratio^k) for k = 0, 1, ..., deduplicated, capped and terminated by n_max.
std::vector<std::uint64_t> geometric_checkpoints(std::uint64_t n_max, double ratio = 1.3);
/// Sorted union, dropping zeros.
std::vector<std::uint64_t> merge_checkpoints(std::vector<std::uint64_t> a,
                                             const std::vector<std::uint64_t>& b);

/// sparse: hash-map lattice, any extent. dense: growing box array, much
/// faster for long runs; identical results.
enum class SeriesEngine { sparse, dense };

std::string to_string(SeriesEngine engine);
SeriesEngine parse_engine(std::string_view name);

struct SeriesConfig {
    CyclicOrder order = ccw_order(2);
    InitialRule rule = InitialRule::rho0();
    std::uint64_t n_max = 0;
    /// Empty: geometric_checkpoints(n_max).
    std::vector<std::uint64_t> checkpoints;
    WalkOptions walk;
    SeriesEngine engine = SeriesEngine::sparse;
    /// Called after each checkpoint is recorded.
    std::function<void(const Checkpoint&)> on_checkpoint;
};

/// Sequential particles from the origin for either the return-or-escape
/// experiment (I(rho, n)) or the escape-only experiment (u_n).
template <int D>
class EscapeExperiment {
  public:
    /// Normalizes the order so the separating axis is d-2; throws
    /// OrderViolation if there is none.
    EscapeExperiment(const CyclicOrder& order, InitialRule rule, StopKind kind,
                     WalkOptions options = {});

    WalkOutcome<D> launch();
    void launch_until(std::uint64_t n) {
        while (launched_ < n) launch();
    }

    std::uint64_t launched() const noexcept { return launched_; }
    std::uint64_t escaped() const noexcept { return escaped_; }
    std::uint64_t total_steps() const noexcept { return steps_; }
    std::uint64_t origin_odometer() const { return state_.odometer(Site<D>{}); }
    Checkpoint checkpoint() const;

    const LatticeState<D>& state() const noexcept { return state_; }
    const std::vector<int>& axis_permutation() const noexcept { return permutation_; }
    SeriesMetadata metadata() const;

  private:
    std::vector<int> permutation_;
    LatticeState<D> state_;
    StopRegime<D> regime_;
    WalkOptions options_;
    std::uint64_t launched_ = 0;
    std::uint64_t escaped_ = 0;
    std::uint64_t steps_ = 0;
};

ExperimentSeries escape_rate_series(int d, const SeriesConfig& config);
ExperimentSeries escape_only_series(int d, const SeriesConfig& config);

/// n strictly increasing, I <= n, h_plus and h_minus <= n.
std::vector<std::string> check_series_invariants(const ExperimentSeries& series);

struct NormalizedPoint {
    std::uint64_t n = 0;
    /// d = 2: I log n / n (n >= 2); d >= 3: I / n.
    std::optional<double> primal;
    /// Escape-only series only. d = 2: n log u0 / u0 (u0 >= 2); d >= 3: n / u0.
    std::optional<double> dual;
};

std::vector<NormalizedPoint> rate_normalizer(const ExperimentSeries& series);

/// Value printed in the normalized_rate column: primal for return-or-escape
/// series, dual for escape-only series.
std::optional<double> normalized_rate(const ExperimentSeries& series, const NormalizedPoint& p);

inline constexpr int kSeriesCsvSchema = 1;

/// "# schema_version=1" line, header row, one row per checkpoint.
void write_series_csv(std::ostream& out, const ExperimentSeries& series);

/// Odometer field u_n^r from n particles absorbed on the boundary of B_r.
template <int D>
struct BallRun {
    LatticeState<D> state;
    double r = 0.0;
    std::uint64_t n = 0;
    std::uint64_t steps = 0;
    absl::flat_hash_map<Site<D>, std::uint64_t> absorbed;

    std::uint64_t u(const Site<D>& x) const { return state.odometer(x); }
    std::uint64_t absorbed_total() const {
        std::uint64_t t = 0;
        for (const auto& [x, c] : absorbed) t += c;
        return t;
    }
};

template <int D>
BallRun<D> ball_odometer(const CyclicOrder& order, const InitialRule& rule, std::uint64_t n,
                         double r, const WalkOptions& options = {});

/// Boundary sites of B_rho where u is zero (empty means the shell is covered).
template <int D>
std::vector<Site<D>> uncovered_shell_sites(const BallRun<D>& run, double rho);

/// Volume of the unit ball in R^d.
double unit_ball_volume(int d);

template <int D>
struct AggregationResult {
    std::vector<Site<D>> cluster;
    std::uint64_t n = 0;
    /// min |y| over sites y outside the cluster: the largest r with B_r in A_n.
    double inradius = 0.0;
    /// max |x| over the cluster: the smallest closed ball radius covering A_n.
    double outradius = 0.0;
    std::uint64_t steps = 0;
    /// (n / omega_d)^{1/d}
    double volume_radius() const;
};

/// Rotor-router aggregation: each particle walks from the origin until it
/// stands on a site no earlier particle stopped at.
template <int D>
AggregationResult<D> aggregate(const CyclicOrder& order, const InitialRule& rule, std::uint64_t n,
                               const WalkOptions& options = {});

/// Incremental aggregation for callers that sample radii along the way.
template <int D>
class Aggregator {
  public:
    Aggregator(const CyclicOrder& order, InitialRule rule, WalkOptions options = {});
    void add_particle();
    void grow_to(std::uint64_t n) {
        while (size() < n) add_particle();
    }
    std::uint64_t size() const noexcept { return occupied_.size(); }
    AggregationResult<D> result() const;
    const LatticeState<D>& state() const noexcept { return state_; }
    bool occupied(const Site<D>& x) const { return occupied_.contains(x); }

  private:
    LatticeState<D> state_;
    WalkOptions options_;
    absl::flat_hash_set<Site<D>> occupied_;
    std::vector<Site<D>> order_of_arrival_;
    std::uint64_t steps_ = 0;
};

}  // namespace rotor
