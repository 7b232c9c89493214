#include "rotor/dense.hpp"

#include <algorithm>
#include <cstring>

#include "rotor/error.hpp"

namespace rotor {

template <int D>
DenseEscape<D>::DenseEscape(const CyclicOrder& order, InitialRule rule, StopKind kind,
                            std::uint64_t step_budget)
    : permutation_(),
      proto_([&] {
          NormalizedOrder norm = normalize_order(order);
          permutation_ = norm.axis_permutation;
          return LatticeState<D>(std::move(norm.order), std::move(rule));
      }()),
      kind_(kind),
      budget_(step_budget) {
    if (kind != StopKind::absorb_origin_or_escape && kind != StopKind::escape_only) {
        throw InvalidArgument("escape experiments use origin-or-escape or escape-only regimes");
    }
    if (proto_.order().dimension() != D) throw InvalidArgument("order dimension mismatch");
    for (int i = 0; i < 2 * D; ++i) next_[i] = proto_.order().next_index(i);
    Site<D> lo{}, hi{};
    for (int i = 0; i < D; ++i) {
        lo[i] = -8;
        hi[i] = 8;
    }
    rebuild(lo, hi);
}

template <int D>
std::size_t DenseEscape<D>::index(const Site<D>& x) const noexcept {
    std::int64_t idx = 0;
    for (int i = 0; i < D; ++i) idx += (x[i] - lo_[i] + 1) * stride_[i];
    return static_cast<std::size_t>(idx);
}

template <int D>
Site<D> DenseEscape<D>::coord(std::size_t idx) const noexcept {
    Site<D> x{};
    auto rest = static_cast<std::int64_t>(idx);
    for (int i = D - 1; i >= 0; --i) {
        x[i] = rest / stride_[i] + lo_[i] - 1;
        rest %= stride_[i];
    }
    return x;
}

template <int D>
std::size_t DenseEscape<D>::column_index(const Site<D>& x) const noexcept {
    std::int64_t idx = 0;
    for (int i = 0; i + 1 < D; ++i) idx += (x[i] - lo_[i] + 1) * stride_[i];
    return static_cast<std::size_t>(idx);
}

template <int D>
bool DenseEscape<D>::inside_interior(const Site<D>& x) const noexcept {
    for (int i = 0; i < D; ++i) {
        if (x[i] < lo_[i] || x[i] > hi_[i]) return false;
    }
    return true;
}

template <int D>
void DenseEscape<D>::rebuild(const Site<D>& new_lo, const Site<D>& new_hi) {
    std::array<std::int64_t, D> ext{}, stride{};
    std::int64_t cells = 1;
    for (int i = 0; i < D; ++i) {
        ext[i] = new_hi[i] - new_lo[i] + 3;
        stride[i] = cells;
        cells *= ext[i];
    }
    if (cells > (std::int64_t{1} << 33)) throw BudgetExceeded("dense box too large", 0);
    std::int64_t col_cells = 1;
    for (int i = 0; i + 1 < D; ++i) col_cells *= ext[i];

    std::vector<std::uint32_t> odo(static_cast<std::size_t>(cells), 0);
    std::vector<std::uint8_t> rot(static_cast<std::size_t>(cells), kBorder);
    std::vector<ColumnRecord> cols(static_cast<std::size_t>(col_cells));

    // Fill initial rotors of the new interior.
    Site<D> x = new_lo;
    for (;;) {
        std::int64_t idx = 0;
        for (int i = 0; i < D; ++i) idx += (x[i] - new_lo[i] + 1) * stride[i];
        rot[static_cast<std::size_t>(idx)] = static_cast<std::uint8_t>(proto_.initial_index(x));
        int i = 0;
        for (; i < D; ++i) {
            if (x[i] < new_hi[i]) {
                ++x[i];
                break;
            }
            x[i] = new_lo[i];
        }
        if (i == D) break;
    }
    // Copy the old interior (rows along axis 0 are contiguous in both boxes).
    if (!odo_.empty()) {
        Site<D> y = lo_;
        const auto row = static_cast<std::size_t>(hi_[0] - lo_[0] + 1);
        for (;;) {
            std::int64_t from = 0, to = 0;
            for (int i = 0; i < D; ++i) {
                from += (y[i] - lo_[i] + 1) * stride_[i];
                to += (y[i] - new_lo[i] + 1) * stride[i];
            }
            std::memcpy(&odo[static_cast<std::size_t>(to)], &odo_[static_cast<std::size_t>(from)],
                        row * sizeof(std::uint32_t));
            std::memcpy(&rot[static_cast<std::size_t>(to)], &rot_[static_cast<std::size_t>(from)], row);
            int i = 1;
            for (; i < D; ++i) {
                if (y[i] < hi_[i]) {
                    ++y[i];
                    break;
                }
                y[i] = lo_[i];
            }
            if (i == D) break;
        }
        Column<D> c{};
        for (int i = 0; i + 1 < D; ++i) c[i] = lo_[i];
        for (;;) {
            std::int64_t from = 0, to = 0;
            for (int i = 0; i + 1 < D; ++i) {
                from += (c[i] - lo_[i] + 1) * stride_[i];
                to += (c[i] - new_lo[i] + 1) * stride[i];
            }
            cols[static_cast<std::size_t>(to)] = columns_[static_cast<std::size_t>(from)];
            int i = 0;
            for (; i + 1 < D; ++i) {
                if (c[i] < hi_[i]) {
                    ++c[i];
                    break;
                }
                c[i] = lo_[i];
            }
            if (i + 1 == D) break;
        }
    }
    odo_ = std::move(odo);
    rot_ = std::move(rot);
    columns_ = std::move(cols);
    lo_ = new_lo;
    hi_ = new_hi;
    ext_ = ext;
    stride_ = stride;
    for (int i = 0; i < D; ++i) {
        offset_[2 * i] = stride_[i];
        offset_[2 * i + 1] = -stride_[i];
    }
    origin_ = index(Site<D>{});
}

template <int D>
void DenseEscape<D>::grow_to_include(const Site<D>& x) {
    Site<D> lo = lo_, hi = hi_;
    for (int i = 0; i < D; ++i) {
        const std::int64_t grow = std::max<std::int64_t>(16, (hi_[i] - lo_[i] + 1) / 2);
        if (x[i] < lo[i]) lo[i] = std::min(x[i], lo_[i] - grow);
        if (x[i] > hi[i]) hi[i] = std::max(x[i], hi_[i] + grow);
    }
    rebuild(lo, hi);
}

template <int D>
void DenseEscape<D>::note_revisited(std::size_t idx) noexcept {
    const std::int64_t xd = coord(idx)[D - 1];
    if (xd >= 0) {
        if (xd > h_plus_) h_plus_ = xd;
    } else if (-xd > h_minus_) {
        h_minus_ = -xd;
    }
}

template <int D>
bool DenseEscape<D>::prepare_fresh(std::size_t& idx) {
    Site<D> x = coord(idx);
    if (rot_[idx] == kBorder) {
        grow_to_include(x);
        idx = index(x);
    }
    ColumnRecord& col = columns_[column_index(x)];
    const std::int64_t xd = x[D - 1];
    if (col.on_ray(xd)) {
        odo_[idx] = 1;
        rot_[idx] = static_cast<std::uint8_t>(next_[rot_[idx]]);
    } else if (auto sign = escape_decision<D>(proto_.rule(), x, &col)) {
        if (*sign > 0) {
            if (col.has_up_ray()) throw std::logic_error("second upward ray in a column");
            col.up_ray = xd;
        } else {
            if (col.has_down_ray()) throw std::logic_error("second downward ray in a column");
            col.down_ray = xd;
        }
        rays_.push_back(Ray{column_of<D>(x), *sign, xd});
        for (int i = 0; i + 1 < D; ++i) breadth_ = std::max(breadth_, x[i] < 0 ? -x[i] : x[i]);
        return false;
    }
    col.lo = std::min(col.lo, xd);
    col.hi = std::max(col.hi, xd);
    for (int i = 0; i + 1 < D; ++i) breadth_ = std::max(breadth_, x[i] < 0 ? -x[i] : x[i]);
    ++materialized_;
    return true;
}

template <int D>
bool DenseEscape<D>::launch() {
    const bool absorb = kind_ == StopKind::absorb_origin_or_escape;
    std::size_t idx = origin_;
    std::uint64_t steps = 0;
    bool escaped = false;
    for (;;) {
        if (odo_[idx] == 0 && !prepare_fresh(idx)) {
            escaped = true;
            break;
        }
        if (steps_ + steps >= budget_) {
            throw BudgetExceeded("run exceeded step budget of " + std::to_string(budget_) + " steps", budget_);
        }
        const std::uint8_t r = rot_[idx];
        rot_[idx] = static_cast<std::uint8_t>(next_[r]);
        const std::uint32_t o = ++odo_[idx];
        if (o <= 2) {
            if (o == 0) throw BudgetExceeded("site odometer exceeds 32 bits", 0);
            if (o == 2) note_revisited(idx);
        }
        idx = static_cast<std::size_t>(static_cast<std::int64_t>(idx) + offset_[r]);
        ++steps;
        if (absorb && idx == origin_) break;
    }
    steps_ += steps;
    ++launched_;
    if (escaped) ++escaped_;
    return escaped;
}

template <int D>
std::uint64_t DenseEscape<D>::odometer(const Site<D>& x) const noexcept {
    if (inside_interior(x)) {
        if (auto o = odo_[index(x)]; o != 0) return o;
        return columns_[column_index(x)].on_ray(x[D - 1]) ? 1 : 0;
    }
    for (const Ray& ray : rays_) {
        if (ray.column == column_of<D>(x) && (ray.sign > 0 ? x[D - 1] >= ray.height : x[D - 1] <= ray.height)) {
            return 1;
        }
    }
    return 0;
}

template <int D>
Checkpoint DenseEscape<D>::checkpoint() const {
    Checkpoint c;
    c.n = launched_;
    c.escaped = escaped_;
    c.u0 = origin_odometer();
    c.h_plus = h_plus_;
    c.h_minus = h_minus_;
    c.breadth = breadth_;
    c.steps = steps_;
    return c;
}

template <int D>
SeriesMetadata DenseEscape<D>::metadata() const {
    SeriesMetadata m;
    m.d = D;
    m.order = proto_.order().to_string();
    m.rule = proto_.rule().describe();
    m.regime = to_string(kind_);
    m.axis_permutation = permutation_;
    m.engine = "dense";
    return m;
}

template <int D>
void DenseEscape<D>::for_each_site(
    const std::function<void(const Site<D>&, std::uint64_t, int)>& f) const {
    for (std::size_t k = 0; k < odo_.size(); ++k) {
        if (odo_[k] != 0) f(coord(k), odo_[k], rot_[k]);
    }
}

template class DenseEscape<2>;
template class DenseEscape<3>;
template class DenseEscape<4>;
template class DenseEscape<5>;

}  // namespace rotor
