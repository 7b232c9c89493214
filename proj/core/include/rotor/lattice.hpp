#pragma once

#include <array>
#include <cstdint>
#include <cstdlib>
#include <limits>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "absl/container/flat_hash_map.h"
#include "rotor/direction.hpp"
#include "rotor/error.hpp"
#include "rotor/initial_rule.hpp"

namespace rotor {

template <int D>
using Site = std::array<std::int64_t, D>;

/// Transverse coordinates (x_1 .. x_{d-1}) of a site.
template <int D>
using Column = std::array<std::int64_t, D - 1>;

template <int D>
Column<D> column_of(const Site<D>& x) noexcept {
    Column<D> c{};
    for (int i = 0; i + 1 < D; ++i) c[i] = x[i];
    return c;
}

template <int D>
std::int64_t norm2(const Site<D>& x) noexcept {
    std::int64_t s = 0;
    for (auto v : x) s += v * v;
    return s;
}

template <int D>
std::string format_site(const Site<D>& x) {
    std::string out = "(";
    for (int i = 0; i < D; ++i) {
        if (i) out += ',';
        out += std::to_string(x[i]);
    }
    return out + ")";
}

/// Per-site record of an exited site. Exit counts per direction are not
/// stored: the j-th exit always leaves along m^j(initial rotor), so they
/// follow from the odometer (see LatticeState::exits).
struct SiteState {
    std::uint64_t odometer = 0;
    std::uint8_t rotor = 0;  // Direction::index()
};

/// Column index entry. [lo, hi] spans the materialized (exited) sites of the
/// column. An escape along +e_d launched at height h turns every rotor on
/// {x_d >= h}; that ray is kept symbolically instead of materialized.
struct ColumnRecord {
    static constexpr std::int64_t kNoUpRay = std::numeric_limits<std::int64_t>::max();
    static constexpr std::int64_t kNoDownRay = std::numeric_limits<std::int64_t>::min();

    std::int64_t lo = std::numeric_limits<std::int64_t>::max();
    std::int64_t hi = std::numeric_limits<std::int64_t>::min();
    std::int64_t up_ray = kNoUpRay;      // ray sites: x_d >= up_ray
    std::int64_t down_ray = kNoDownRay;  // ray sites: x_d <= down_ray

    bool has_sites() const noexcept { return lo <= hi; }
    bool has_up_ray() const noexcept { return up_ray != kNoUpRay; }
    bool has_down_ray() const noexcept { return down_ray != kNoDownRay; }
    bool on_ray(std::int64_t xd) const noexcept { return xd >= up_ray || xd <= down_ray; }
};

/// Experiment kinds a state has been driven by; flux_residual only accepts
/// states produced by ball runs alone.
enum RegimeTag : std::uint8_t {
    kTagAbsorbOrigin = 1,
    kTagBall = 2,
    kTagEscapeOnly = 4,
    kTagCustomSet = 8,
    kTagAggregation = 16,
};

/// Sparse rotor configuration on Z^D for a single cyclic order m.
///
/// Sites enter the map on their first exit. A site that is absent and not on
/// an escape ray has its initial rotor and odometer 0. Single writer.
template <int D>
class LatticeState {
    static_assert(D >= 2 && D <= kMaxDimension);

  public:
    using SiteMap = absl::flat_hash_map<Site<D>, SiteState>;
    using ColumnMap = absl::flat_hash_map<Column<D>, ColumnRecord>;

    LatticeState(CyclicOrder order, InitialRule rule);

    static constexpr int dimension() noexcept { return D; }
    const CyclicOrder& order() const noexcept { return order_; }
    const InitialRule& rule() const noexcept { return rule_; }

    int initial_index(const Site<D>& x) const noexcept {
        if (rule_kind_ == RuleKind::custom) {
            if (in_override_box(x)) {
                auto it = overrides_.find(x);
                if (it != overrides_.end()) return it->second;
            }
            return fallback_index(x);
        }
        return fallback_index(x);
    }
    Direction initial_rotor(const Site<D>& x) const noexcept {
        return Direction::from_index(initial_index(x));
    }

    /// rho_n(x): the direction the next particle at x will leave along.
    Direction rotor_at(const Site<D>& x) const;
    /// u(x): number of exits from x so far (1 on escape rays).
    std::uint64_t odometer(const Site<D>& x) const;
    /// Exits from x along `dir` so far.
    std::uint64_t exits(const Site<D>& x, Direction dir) const;

    /// Moves one particle out of x: returns the current rotor, then turns it.
    Direction exit_once(const Site<D>& x);

    // Low-level access used by the walk loop.
    SiteState* find(const Site<D>& x) noexcept {
        auto it = sites_.find(x);
        return it == sites_.end() ? nullptr : &it->second;
    }
    const SiteState* find(const Site<D>& x) const noexcept {
        auto it = sites_.find(x);
        return it == sites_.end() ? nullptr : &it->second;
    }
    const ColumnRecord* find_column(const Column<D>& c) const noexcept {
        auto it = columns_.find(c);
        return it == columns_.end() ? nullptr : &it->second;
    }
    /// Creates the record of a not-yet-materialized site; `col` is its column
    /// record as looked up before the call (may be null).
    SiteState& materialize(const Site<D>& x, const ColumnRecord* col);
    /// Sends the particle at x out along the current rotor.
    int fire(SiteState& s, const Site<D>& x) noexcept {
        const int dir = s.rotor;
        s.rotor = static_cast<std::uint8_t>(next_[dir]);
        ++s.odometer;
        ++total_odometer_;
        if (s.odometer == 2) note_revisited(x);
        return dir;
    }
    /// Registers an escape launched from fresh site x along sign * e_d.
    void record_escape(const Site<D>& x, int sign);

    void add_provenance(std::uint8_t tag) noexcept { provenance_ |= tag; }
    void set_ball_radius(double r) noexcept { ball_radius_ = r; }
    std::uint8_t provenance() const noexcept { return provenance_; }
    double ball_radius() const noexcept { return ball_radius_; }

    const SiteMap& sites() const noexcept { return sites_; }
    const ColumnMap& columns() const noexcept { return columns_; }
    std::size_t materialized_count() const noexcept { return sites_.size(); }
    std::uint64_t total_odometer() const noexcept { return total_odometer_; }
    std::uint64_t escape_rays() const noexcept { return escape_rays_; }

    /// Largest x_d >= 0 over sites exited at least twice (0 if none).
    std::int64_t h_plus() const noexcept { return h_plus_; }
    /// Largest -x_d over sites with x_d < 0 exited at least twice (0 if none).
    std::int64_t h_minus() const noexcept { return h_minus_; }
    /// max over exited sites and escape columns of max_{i<d} |x_i|.
    std::int64_t breadth() const noexcept { return breadth_; }

    /// Full-scan consistency check; returns human-readable violations.
    std::vector<std::string> audit() const;

    /// Text snapshot: one line per materialized site, sorted, then the rays.
    void write_snapshot(std::ostream& out) const;

  private:
    int fallback_index(const Site<D>& x) const noexcept {
        if (fallback_kind_ == RuleKind::uniform_up) return up_index_;
        return x[D - 1] >= 0 ? up_index_ : down_index_;
    }
    bool in_override_box(const Site<D>& x) const noexcept {
        for (int i = 0; i < D; ++i) {
            if (x[i] < box_min_[i] || x[i] > box_max_[i]) return false;
        }
        return true;
    }
    void note_revisited(const Site<D>& x) noexcept {
        const std::int64_t xd = x[D - 1];
        if (xd >= 0) {
            if (xd > h_plus_) h_plus_ = xd;
        } else if (-xd > h_minus_) {
            h_minus_ = -xd;
        }
    }
    void widen_breadth(const Site<D>& x) noexcept {
        for (int i = 0; i + 1 < D; ++i) {
            const std::int64_t a = x[i] < 0 ? -x[i] : x[i];
            if (a > breadth_) breadth_ = a;
        }
    }

    CyclicOrder order_;
    InitialRule rule_;
    RuleKind rule_kind_;
    RuleKind fallback_kind_;
    int up_index_;
    int down_index_;
    std::array<int, kMaxDirections> next_{};
    absl::flat_hash_map<Site<D>, int> overrides_;
    Site<D> box_min_{};
    Site<D> box_max_{};

    SiteMap sites_;
    ColumnMap columns_;
    std::uint64_t total_odometer_ = 0;
    std::uint64_t escape_rays_ = 0;
    std::int64_t h_plus_ = 0;
    std::int64_t h_minus_ = 0;
    std::int64_t breadth_ = 0;
    std::uint8_t provenance_ = 0;
    double ball_radius_ = 0.0;
};

extern template class LatticeState<2>;
extern template class LatticeState<3>;
extern template class LatticeState<4>;
extern template class LatticeState<5>;

/// Calls f.template operator()<D>() for the runtime dimension d.
template <class F>
decltype(auto) dispatch_dimension(int d, F&& f) {
    switch (d) {
        case 2:
            return f.template operator()<2>();
        case 3:
            return f.template operator()<3>();
        case 4:
            return f.template operator()<4>();
        case 5:
            return f.template operator()<5>();
        default:
            break;
    }
    throw InvalidArgument("dimension " + std::to_string(d) + " not supported (2.." +
                                std::to_string(kMaxDimension) + ")");
}

}  // namespace rotor
