#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <vector>

#include "rotor/experiments.hpp"
#include "rotor/lattice.hpp"
#include "rotor/walk.hpp"

namespace rotor {

/// Escape experiments on a dense box that grows on demand, for long series.
/// Same dynamics, escape rays and statistics as EscapeExperiment over a
/// LatticeState; odometers are 32-bit (overflow throws BudgetExceeded).
template <int D>
class DenseEscape {
  public:
    struct Ray {
        Column<D> column{};
        int sign = 0;
        std::int64_t height = 0;
    };

    /// Normalizes the order like EscapeExperiment. `kind` is
    /// absorb_origin_or_escape or escape_only.
    DenseEscape(const CyclicOrder& order, InitialRule rule, StopKind kind,
                std::uint64_t step_budget = 1'000'000'000'000ULL);

    /// Runs one particle from the origin. Returns true on escape.
    bool launch();
    void launch_until(std::uint64_t n) {
        while (launched_ < n) launch();
    }

    std::uint64_t launched() const noexcept { return launched_; }
    std::uint64_t escaped() const noexcept { return escaped_; }
    std::uint64_t total_steps() const noexcept { return steps_; }
    std::uint64_t origin_odometer() const noexcept { return odometer(Site<D>{}); }
    /// Exits from x so far (1 on escape rays).
    std::uint64_t odometer(const Site<D>& x) const noexcept;
    std::int64_t h_plus() const noexcept { return h_plus_; }
    std::int64_t h_minus() const noexcept { return h_minus_; }
    std::int64_t breadth() const noexcept { return breadth_; }
    std::uint64_t materialized_count() const noexcept { return materialized_; }
    std::size_t box_cells() const noexcept { return odo_.size(); }
    Checkpoint checkpoint() const;
    SeriesMetadata metadata() const;

    const CyclicOrder& order() const noexcept { return proto_.order(); }
    const std::vector<int>& axis_permutation() const noexcept { return permutation_; }
    const std::vector<Ray>& rays() const noexcept { return rays_; }

    /// Every exited site with its odometer and current rotor index.
    void for_each_site(const std::function<void(const Site<D>&, std::uint64_t, int)>& f) const;

  private:
    static constexpr std::uint8_t kBorder = 0xFF;

    std::size_t index(const Site<D>& x) const noexcept;
    Site<D> coord(std::size_t idx) const noexcept;
    std::size_t column_index(const Site<D>& x) const noexcept;
    bool inside_interior(const Site<D>& x) const noexcept;
    void rebuild(const Site<D>& new_lo, const Site<D>& new_hi);
    void grow_to_include(const Site<D>& x);
    // Handles a cell with odometer 0. Returns false if the particle escaped.
    bool prepare_fresh(std::size_t& idx);
    void note_revisited(std::size_t idx) noexcept;

    std::vector<int> permutation_;
    LatticeState<D> proto_;  // rule and order lookups only
    StopKind kind_;
    std::uint64_t budget_;
    std::array<int, 2 * D> next_{};

    // Interior box [lo_, hi_]; the stored box has one border layer more.
    Site<D> lo_{};
    Site<D> hi_{};
    std::array<std::int64_t, D> ext_{};     // stored extent per axis
    std::array<std::int64_t, D> stride_{};
    std::array<std::int64_t, 2 * D> offset_{};
    std::vector<std::uint32_t> odo_;
    std::vector<std::uint8_t> rot_;
    std::size_t origin_ = 0;

    std::vector<ColumnRecord> columns_;  // over the stored transverse box
    std::vector<Ray> rays_;

    std::uint64_t launched_ = 0;
    std::uint64_t escaped_ = 0;
    std::uint64_t steps_ = 0;
    std::uint64_t materialized_ = 0;
    std::int64_t h_plus_ = 0;
    std::int64_t h_minus_ = 0;
    std::int64_t breadth_ = 0;
};

extern template class DenseEscape<2>;
extern template class DenseEscape<3>;
extern template class DenseEscape<4>;
extern template class DenseEscape<5>;

}  // namespace rotor
