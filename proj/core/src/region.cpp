#include "rotor/region.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>

#include "rotor/error.hpp"

namespace rotor {

GridRegion::GridRegion(int d, Point lo, Point hi) : d_(d), lo_(std::move(lo)), hi_(std::move(hi)) {
    if (d < 1) throw InvalidArgument("region dimension must be positive");
    strides_.resize(d);
    std::size_t size = 1;
    for (int i = 0; i < d; ++i) {
        strides_[i] = static_cast<std::int64_t>(size);
        size *= static_cast<std::size_t>(hi_[i] - lo_[i] + 1);
        if (size > (std::size_t{1} << 31)) throw SolverError("region box too large");
    }
    cells_.assign(size, Cell::outside);
    for (int i = 0; i < d; ++i) {
        offsets_.push_back(strides_[i]);
        offsets_.push_back(-strides_[i]);
    }
}

std::int64_t GridRegion::index(std::span<const std::int64_t> x) const noexcept {
    std::int64_t idx = 0;
    for (int i = 0; i < d_; ++i) {
        if (x[i] < lo_[i] || x[i] > hi_[i]) return -1;
        idx += (x[i] - lo_[i]) * strides_[i];
    }
    return idx;
}

GridRegion::Point GridRegion::point(std::size_t idx) const {
    Point x(d_);
    auto rest = static_cast<std::int64_t>(idx);
    for (int i = d_ - 1; i >= 0; --i) {
        x[i] = rest / strides_[i] + lo_[i];
        rest %= strides_[i];
    }
    return x;
}

void GridRegion::finalize() {
    interior_.clear();
    boundary_.clear();
    for (std::size_t k = 0; k < cells_.size(); ++k) {
        if (cells_[k] == Cell::interior) interior_.push_back(k);
        if (cells_[k] == Cell::boundary) boundary_.push_back(k);
    }
}

namespace {

template <class F>
void for_each_point(const std::vector<std::int64_t>& lo, const std::vector<std::int64_t>& hi,
                    F&& f) {
    std::vector<std::int64_t> x = lo;
    const int d = static_cast<int>(lo.size());
    for (;;) {
        f(x);
        int i = 0;
        while (i < d) {
            if (x[i] < hi[i]) {
                ++x[i];
                break;
            }
            x[i] = lo[i];
            ++i;
        }
        if (i == d) return;
    }
}

}  // namespace

GridRegion GridRegion::ball(int d, double r) {
    if (!(r > 0.0)) throw InvalidArgument("ball radius must be positive");
    const auto half = static_cast<std::int64_t>(std::ceil(r)) + 1;
    GridRegion region(d, Point(d, -half), Point(d, half));
    const double r2 = r * r;
    for_each_point(region.lo_, region.hi_, [&](const Point& x) {
        double s = 0;
        for (auto v : x) s += static_cast<double>(v * v);
        if (s < r2) region.cells_[static_cast<std::size_t>(region.index(x))] = Cell::interior;
    });
    for (std::size_t k = 0; k < region.cells_.size(); ++k) {
        if (region.cells_[k] != Cell::interior) continue;
        for (auto off : region.offsets_) {
            auto& c = region.cells_[static_cast<std::size_t>(static_cast<std::int64_t>(k) + off)];
            if (c == Cell::outside) c = Cell::boundary;
        }
    }
    region.finalize();
    return region;
}

GridRegion GridRegion::cube(int d, std::int64_t half) {
    if (half < 0) throw InvalidArgument("cube half-width must be non-negative");
    GridRegion region(d, Point(d, -half - 1), Point(d, half + 1));
    for_each_point(region.lo_, region.hi_, [&](const Point& x) {
        int outside = 0;
        for (auto v : x) {
            if (v < -half || v > half) ++outside;
        }
        Cell c = outside == 0 ? Cell::interior : (outside == 1 ? Cell::boundary : Cell::outside);
        region.cells_[static_cast<std::size_t>(region.index(x))] = c;
    });
    region.finalize();
    return region;
}

GridRegion GridRegion::from_sites(int d, const std::vector<Point>& interior,
                                  const std::vector<Point>& boundary) {
    if (interior.empty() && boundary.empty()) throw InvalidArgument("empty region");
    Point lo(d, std::numeric_limits<std::int64_t>::max());
    Point hi(d, std::numeric_limits<std::int64_t>::min());
    for (const auto* set : {&interior, &boundary}) {
        for (const Point& x : *set) {
            if (static_cast<int>(x.size()) != d) throw InvalidArgument("site dimension mismatch");
            for (int i = 0; i < d; ++i) {
                lo[i] = std::min(lo[i], x[i] - 1);
                hi[i] = std::max(hi[i], x[i] + 1);
            }
        }
    }
    GridRegion region(d, lo, hi);
    for (const Point& x : boundary) {
        region.cells_[static_cast<std::size_t>(region.index(x))] = Cell::boundary;
    }
    for (const Point& x : interior) {
        auto& c = region.cells_[static_cast<std::size_t>(region.index(x))];
        if (c == Cell::boundary) throw InvalidArgument("site listed as interior and boundary");
        c = Cell::interior;
    }
    for (std::size_t k = 0; k < region.cells_.size(); ++k) {
        if (region.cells_[k] != Cell::interior) continue;
        for (auto off : region.offsets_) {
            if (region.cells_[static_cast<std::size_t>(static_cast<std::int64_t>(k) + off)] ==
                Cell::outside) {
                throw InvalidArgument("interior site has a neighbour outside the region");
            }
        }
    }
    region.finalize();
    return region;
}

std::size_t GridRegion::stranded_interior() const {
    std::vector<char> seen(cells_.size(), 0);
    std::deque<std::size_t> queue;
    for (std::size_t b : boundary_) {
        seen[b] = 1;
        queue.push_back(b);
    }
    while (!queue.empty()) {
        const std::size_t k = queue.front();
        queue.pop_front();
        for (auto off : offsets_) {
            const auto j = static_cast<std::int64_t>(k) + off;
            if (j < 0 || j >= static_cast<std::int64_t>(cells_.size())) continue;
            const auto u = static_cast<std::size_t>(j);
            if (!seen[u] && cells_[u] == Cell::interior) {
                // Box wrap-around across rows is harmless: interior cells never
                // sit on the box faces.
                seen[u] = 1;
                queue.push_back(u);
            }
        }
    }
    std::size_t stranded = 0;
    for (std::size_t k : interior_) stranded += seen[k] ? 0 : 1;
    return stranded;
}

double GridField::at(std::span<const std::int64_t> x) const {
    const auto idx = region.index(x);
    return idx < 0 ? 0.0 : values[static_cast<std::size_t>(idx)];
}

double dirichlet_residual(const GridField& field, const std::vector<double>& source) {
    const auto& offs = field.region.neighbor_offsets();
    const double inv = 1.0 / static_cast<double>(offs.size());
    double worst = 0.0;
    for (std::size_t k : field.region.interior()) {
        double mean = 0.0;
        for (auto off : offs) mean += field.values[static_cast<std::size_t>(static_cast<std::int64_t>(k) + off)];
        const double res = field.values[k] - inv * mean - (source.empty() ? 0.0 : source[k]);
        worst = std::max(worst, std::abs(res));
    }
    return worst;
}

GridField solve_dirichlet(GridRegion region, const std::vector<double>& source,
                          const std::vector<double>& data, const SolveOptions& options) {
    const std::size_t n = region.box_size();
    const auto& interior = region.interior();
    const auto& offs = region.neighbor_offsets();
    const double inv = 1.0 / static_cast<double>(offs.size());
    const auto at = [](std::size_t k, std::int64_t off) {
        return static_cast<std::size_t>(static_cast<std::int64_t>(k) + off);
    };

    std::vector<double> boundary_values(n, 0.0);
    for (std::size_t k : region.boundary()) boundary_values[k] = data.empty() ? 0.0 : data[k];

    // b = source + (1/2d) * boundary contributions
    std::vector<double> x(n, 0.0), r(n, 0.0), p(n, 0.0), ap(n, 0.0);
    for (std::size_t k : interior) {
        double b = source.empty() ? 0.0 : source[k];
        for (auto off : offs) b += inv * boundary_values[at(k, off)];
        r[k] = b;
        p[k] = b;
    }
    double rr = 0.0;
    double rmax = 0.0;
    for (std::size_t k : interior) {
        rr += r[k] * r[k];
        rmax = std::max(rmax, std::abs(r[k]));
    }
    std::size_t it = 0;
    while (rmax > options.tolerance && it < options.max_iterations) {
        double pap = 0.0;
        for (std::size_t k : interior) {
            double s = 0.0;
            for (auto off : offs) s += p[at(k, off)];
            ap[k] = p[k] - inv * s;
            pap += p[k] * ap[k];
        }
        const double alpha = rr / pap;
        double rr_new = 0.0;
        rmax = 0.0;
        for (std::size_t k : interior) {
            x[k] += alpha * p[k];
            r[k] -= alpha * ap[k];
            rr_new += r[k] * r[k];
            rmax = std::max(rmax, std::abs(r[k]));
        }
        const double beta = rr_new / rr;
        rr = rr_new;
        for (std::size_t k : interior) p[k] = r[k] + beta * p[k];
        ++it;
    }
    if (rmax > options.tolerance) {
        throw SolverError("conjugate gradients did not reach tolerance after " +
                          std::to_string(it) + " iterations");
    }
    for (std::size_t k : region.boundary()) x[k] = boundary_values[k];
    GridField field{std::move(region), std::move(x), 0.0, it};
    field.residual = dirichlet_residual(field, source);
    return field;
}

}  // namespace rotor
