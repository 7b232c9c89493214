#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <type_traits>
#include <vector>

#include "absl/container/flat_hash_set.h"
#include "rotor/error.hpp"
#include "rotor/lattice.hpp"

namespace rotor {

/// When a particle stops.
///
///   absorb_origin_or_escape  returns to the origin or escapes to infinity
///   absorb_ball_boundary     first site with |x| >= radius (ties absorb)
///   escape_only              only escape stops; origin returns pass through
///   absorb_custom_set        enters a site of `sites`, or escapes along a ray
///                            that misses every site of `sites`
enum class StopKind { absorb_origin_or_escape, absorb_ball_boundary, escape_only, absorb_custom_set };

std::string to_string(StopKind kind);

template <int D>
struct StopRegime {
    StopKind kind = StopKind::absorb_origin_or_escape;
    double radius = 0.0;
    absl::flat_hash_set<Site<D>> sites;

    static StopRegime origin_or_escape() { return {StopKind::absorb_origin_or_escape, 0.0, {}}; }
    static StopRegime escape_only() { return {StopKind::escape_only, 0.0, {}}; }
    static StopRegime ball(double r) {
        if (!(r > 0.0)) throw InvalidArgument("ball radius must be positive");
        return {StopKind::absorb_ball_boundary, r, {}};
    }
    static StopRegime custom_set(absl::flat_hash_set<Site<D>> set) {
        return {StopKind::absorb_custom_set, 0.0, std::move(set)};
    }
};

enum class OutcomeStatus { absorbed_origin, absorbed_boundary, escaped };

std::string to_string(OutcomeStatus status);

template <int D>
struct WalkOutcome {
    OutcomeStatus status = OutcomeStatus::absorbed_origin;
    /// Absorption site, or the launch site of the escape ray.
    Site<D> site{};
    /// +1 / -1 for escapes along +-e_d, 0 otherwise.
    int sign = 0;
    std::uint64_t steps = 0;

    Column<D> column() const noexcept { return column_of<D>(site); }
};

/// Observer for single steps. Off by default.
class TraceSink {
  public:
    virtual ~TraceSink() = default;
    virtual void on_step(std::span<const std::int64_t> site, Direction dir, std::uint64_t step) = 0;
};

struct WalkOptions {
    std::uint64_t step_budget = 1'000'000'000'000ULL;
    TraceSink* trace = nullptr;
    /// Called every 2^32 steps of a single particle with the step count.
    std::function<void(std::uint64_t)> progress;
};

/// Escape test at a fresh site x (never exited, not on a ray) from the rule
/// and the column record of x (null if the column is untouched). Returns the
/// escape sign, or nullopt if the straight ray from x in its rotor direction
/// meets a turned rotor or an override.
template <int D>
std::optional<int> escape_decision(const InitialRule& rule, const Site<D>& x,
                                   const ColumnRecord* col) noexcept {
    const std::int64_t xd = x[D - 1];
    int sign = (rule.fallback() == RuleKind::uniform_up || xd >= 0) ? 1 : -1;

    if (rule.kind() == RuleKind::custom && !rule.overrides().empty()) {
        const auto& lo = rule.box_min();
        const auto& hi = rule.box_max();
        bool column_hits_box = true;
        for (int i = 0; i + 1 < D; ++i) {
            if (x[i] < lo[i] || x[i] > hi[i]) column_hits_box = false;
        }
        if (column_hits_box) {
            if (sign > 0 && hi[D - 1] >= xd) return std::nullopt;
            if (sign < 0 && lo[D - 1] <= xd) return std::nullopt;
        }
    }
    if (col == nullptr) return sign;
    if (sign > 0) {
        if (col->has_up_ray()) return std::nullopt;
        if (col->has_sites() && col->hi >= xd) return std::nullopt;
    } else {
        if (col->has_down_ray()) return std::nullopt;
        if (col->has_sites() && col->lo <= xd) return std::nullopt;
    }
    return sign;
}

template <int D>
std::optional<int> escape_detect(const LatticeState<D>& state, const Site<D>& x,
                                 const ColumnRecord* col) noexcept {
    return escape_decision<D>(state.rule(), x, col);
}

template <int D>
std::optional<int> escape_detect(const LatticeState<D>& state, const Site<D>& x) noexcept {
    return escape_detect<D>(state, x, state.find_column(column_of<D>(x)));
}

/// Default detector policy for walk_until.
struct ColumnEscapeDetector {
    static constexpr bool enabled = true;
    template <int D>
    std::optional<int> operator()(const LatticeState<D>& state,
                                  const std::type_identity_t<Site<D>>& x,
                                  const ColumnRecord* col) const noexcept {
        return escape_detect<D>(state, x, col);
    }
};

/// Detector policy for bounded regimes.
struct NoEscapeDetector {
    static constexpr bool enabled = false;
    template <int D>
    std::optional<int> operator()(const LatticeState<D>&, const std::type_identity_t<Site<D>>&,
                                  const ColumnRecord*) const noexcept {
        return std::nullopt;
    }
};

/// Wraps a detector so a ray that would pass through a site of `sites` is
/// not declared an escape.
template <int D, class Inner>
struct SetAwareDetector {
    static constexpr bool enabled = std::remove_cvref_t<Inner>::enabled;
    Inner& inner;
    const absl::flat_hash_set<Site<D>>& sites;

    std::optional<int> operator()(const LatticeState<D>& state, const Site<D>& x,
                                  const ColumnRecord* col) const {
        auto sign = inner(state, x, col);
        if (!sign) return sign;
        for (const auto& y : sites) {
            bool same = true;
            for (int i = 0; i + 1 < D; ++i) same = same && y[i] == x[i];
            if (same && (*sign > 0 ? y[D - 1] >= x[D - 1] : y[D - 1] <= x[D - 1])) return std::nullopt;
        }
        return sign;
    }
};

/// Core rotor-walk loop. The particle at `pos` always makes its first move;
/// after every move `stop(pos)` decides absorption. Whenever the particle
/// stands on a fresh site the detector may declare an escape, which records
/// the ray in the state.
template <int D, class Stop, class Detector>
WalkOutcome<D> walk_until(LatticeState<D>& state, Site<D> pos, Stop&& stop, Detector&& detect,
                          const WalkOptions& options) {
    std::uint64_t steps = 0;
    for (;;) {
        SiteState* s = state.find(pos);
        if (s == nullptr) {
            const ColumnRecord* col = state.find_column(column_of<D>(pos));
            if constexpr (std::remove_cvref_t<Detector>::enabled) {
                if (col == nullptr || !col->on_ray(pos[D - 1])) {
                    if (auto sign = detect(state, pos, col)) {
                        state.record_escape(pos, *sign);
                        return WalkOutcome<D>{OutcomeStatus::escaped, pos, *sign, steps};
                    }
                }
            }
            s = &state.materialize(pos, col);
        }
        if (steps >= options.step_budget) {
            throw BudgetExceeded("particle exceeded step budget of " +
                                     std::to_string(options.step_budget) + " steps",
                                 options.step_budget);
        }
        const int dir = state.fire(*s, pos);
        const Direction step = Direction::from_index(dir);
        if (options.trace) options.trace->on_step(pos, step, steps);
        pos[step.axis] += step.sign;
        ++steps;
        if ((steps & 0xFFFFFFFFULL) == 0 && options.progress) options.progress(steps);
        if (auto status = stop(pos)) return WalkOutcome<D>{*status, pos, 0, steps};
    }
}

/// One particle from `source` under `regime`. For origin-absorbing regimes
/// the first move out of the source is always made; the origin's rotor turns
/// on emission and not on the absorbing return.
template <int D>
WalkOutcome<D> run_particle(LatticeState<D>& state, const Site<D>& source,
                            const StopRegime<D>& regime, const WalkOptions& options = {});

/// Same, with an explicit escape detector (used by the soundness oracle).
template <int D, class Detector>
WalkOutcome<D> run_particle_with(LatticeState<D>& state, const Site<D>& source,
                                 const StopRegime<D>& regime, Detector&& detect,
                                 const WalkOptions& options = {}) {
    switch (regime.kind) {
        case StopKind::absorb_origin_or_escape: {
            state.add_provenance(kTagAbsorbOrigin);
            auto stop = [](const Site<D>& x) -> std::optional<OutcomeStatus> {
                for (auto v : x) {
                    if (v != 0) return std::nullopt;
                }
                return OutcomeStatus::absorbed_origin;
            };
            return walk_until<D>(state, source, stop, detect, options);
        }
        case StopKind::escape_only: {
            state.add_provenance(kTagEscapeOnly);
            auto stop = [](const Site<D>&) -> std::optional<OutcomeStatus> { return std::nullopt; };
            return walk_until<D>(state, source, stop, detect, options);
        }
        case StopKind::absorb_ball_boundary: {
            state.add_provenance(kTagBall);
            state.set_ball_radius(regime.radius);
            const double r2 = regime.radius * regime.radius;
            auto stop = [r2](const Site<D>& x) -> std::optional<OutcomeStatus> {
                if (static_cast<double>(norm2<D>(x)) >= r2) return OutcomeStatus::absorbed_boundary;
                return std::nullopt;
            };
            return walk_until<D>(state, source, stop, NoEscapeDetector{}, options);
        }
        case StopKind::absorb_custom_set: {
            state.add_provenance(kTagCustomSet);
            const auto& set = regime.sites;
            auto stop = [&set](const Site<D>& x) -> std::optional<OutcomeStatus> {
                if (set.contains(x)) return OutcomeStatus::absorbed_boundary;
                return std::nullopt;
            };
            SetAwareDetector<D, std::remove_reference_t<Detector>> guarded{detect, set};
            return walk_until<D>(state, source, stop, guarded, options);
        }
    }
    throw InvalidArgument("unknown stop regime");
}

template <int D>
WalkOutcome<D> run_particle(LatticeState<D>& state, const Site<D>& source,
                            const StopRegime<D>& regime, const WalkOptions& options) {
    return run_particle_with<D>(state, source, regime, ColumnEscapeDetector{}, options);
}

/// Residual of the odometer-flux relation on one lattice edge (x, x + e_axis).
template <int D>
struct EdgeResidual {
    Site<D> from{};
    int axis = 0;
    std::int64_t grad_u = 0;  // u(y) - u(x)
    std::int64_t flux = 0;    // K(x, y) = N(x -> y) - N(y -> x)
    std::int64_t residual = 0;  // grad_u + 2d * flux
};

template <int D>
struct FluxReport {
    std::int64_t max_abs_residual = 0;
    std::uint64_t edges = 0;
    std::vector<EdgeResidual<D>> field;  // filled on request
};

/// max over edges with both ends in B_r of |grad u + 2d K|. Only accepts a
/// state driven exclusively by ball runs of the same radius.
template <int D>
FluxReport<D> flux_residual(const LatticeState<D>& state, double r, bool want_field = false);

/// Interior entries equal exits, and every launched particle was absorbed on
/// the boundary. Returns violations.
template <int D>
std::vector<std::string> check_ball_conservation(const LatticeState<D>& state, double r,
                                                 std::uint64_t particles,
                                                 std::uint64_t absorbed);

/// All lattice sites with |x| < r.
template <int D>
std::vector<Site<D>> ball_sites(double r);

/// Outer vertex boundary of B_r: sites with |x| >= r adjacent to B_r.
template <int D>
std::vector<Site<D>> ball_boundary_sites(double r);

extern template FluxReport<2> flux_residual<2>(const LatticeState<2>&, double, bool);
extern template FluxReport<3> flux_residual<3>(const LatticeState<3>&, double, bool);
extern template FluxReport<4> flux_residual<4>(const LatticeState<4>&, double, bool);
extern template FluxReport<5> flux_residual<5>(const LatticeState<5>&, double, bool);

}  // namespace rotor
