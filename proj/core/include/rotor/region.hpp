#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace rotor {

/// Finite region of Z^d stored on a dense box: interior sites where an
/// equation is solved, boundary sites carrying Dirichlet data, and the rest.
class GridRegion {
  public:
    enum class Cell : std::uint8_t { outside, interior, boundary };
    using Point = std::vector<std::int64_t>;

    /// Interior B_r = {|x| < r}; boundary = its outer vertex boundary.
    static GridRegion ball(int d, double r);
    /// Interior [-half, half]^d; boundary = sites one step outside a face.
    static GridRegion cube(int d, std::int64_t half);
    /// Arbitrary sets. Every neighbour of an interior site must be interior or
    /// boundary; throws InvalidArgument otherwise.
    static GridRegion from_sites(int d, const std::vector<Point>& interior,
                                 const std::vector<Point>& boundary);

    int dimension() const noexcept { return d_; }
    std::size_t box_size() const noexcept { return cells_.size(); }
    std::size_t interior_count() const noexcept { return interior_.size(); }
    std::size_t boundary_count() const noexcept { return boundary_.size(); }

    /// Box index of x, or -1 if x lies outside the box.
    std::int64_t index(std::span<const std::int64_t> x) const noexcept;
    Point point(std::size_t idx) const;
    Cell cell(std::size_t idx) const noexcept { return cells_[idx]; }
    Cell cell_at(std::span<const std::int64_t> x) const noexcept {
        const auto idx = index(x);
        return idx < 0 ? Cell::outside : cells_[static_cast<std::size_t>(idx)];
    }

    const std::vector<std::size_t>& interior() const noexcept { return interior_; }
    const std::vector<std::size_t>& boundary() const noexcept { return boundary_; }
    /// Box-index offsets of the 2d neighbours (+e_1, -e_1, +e_2, ...).
    const std::vector<std::int64_t>& neighbor_offsets() const noexcept { return offsets_; }

    /// Interior sites that cannot reach the boundary through interior sites.
    std::size_t stranded_interior() const;

  private:
    GridRegion(int d, Point lo, Point hi);
    void finalize();

    int d_;
    Point lo_;
    Point hi_;
    std::vector<std::int64_t> strides_;
    std::vector<Cell> cells_;
    std::vector<std::size_t> interior_;
    std::vector<std::size_t> boundary_;
    std::vector<std::int64_t> offsets_;
};

/// Scalar field over a region's box (zero outside the region).
struct GridField {
    GridRegion region;
    std::vector<double> values;
    /// max over interior x of |u(x) - mean_{y~x} u(y) - source(x)| after the solve.
    double residual = 0.0;
    std::size_t iterations = 0;

    double at(std::span<const std::int64_t> x) const;
};

struct SolveOptions {
    double tolerance = 1e-12;  // target max-norm residual
    std::size_t max_iterations = 200000;
};

/// Solves u(x) - mean_{y~x} u(y) = source(x) for interior x with u = data on
/// the boundary. `source` and `data` are box-indexed (entries off their sets
/// are ignored). Conjugate gradients on the symmetric interior operator.
GridField solve_dirichlet(GridRegion region, const std::vector<double>& source,
                          const std::vector<double>& data, const SolveOptions& options = {});

/// Recomputes the max interior residual of `field` against `source`.
double dirichlet_residual(const GridField& field, const std::vector<double>& source);

}  // namespace rotor
