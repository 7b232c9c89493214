#include "rotor/lattice.hpp"

#include <algorithm>

#include "rotor/error.hpp"

namespace rotor {

template <int D>
LatticeState<D>::LatticeState(CyclicOrder order, InitialRule rule)
    : order_(std::move(order)),
      rule_(std::move(rule)),
      rule_kind_(rule_.kind()),
      fallback_kind_(rule_.fallback()),
      up_index_(Direction::up(D).index()),
      down_index_(Direction::down(D).index()) {
    if (order_.dimension() != D) {
        throw InvalidArgument("cyclic order dimension " + std::to_string(order_.dimension()) +
                              " does not match lattice dimension " + std::to_string(D));
    }
    for (int k = 0; k < 2 * D; ++k) next_[k] = order_.next_index(k);
    if (rule_kind_ == RuleKind::custom) {
        for (const auto& [key, dir] : rule_.overrides()) {
            if (static_cast<int>(key.size()) != D) {
                throw InvalidArgument("rule override has wrong dimension");
            }
            Site<D> x{};
            std::copy(key.begin(), key.end(), x.begin());
            overrides_[x] = dir.index();
        }
        if (!rule_.overrides().empty()) {
            std::copy(rule_.box_min().begin(), rule_.box_min().end(), box_min_.begin());
            std::copy(rule_.box_max().begin(), rule_.box_max().end(), box_max_.begin());
        } else {
            // Empty table: make the box test always fail.
            box_min_.fill(1);
            box_max_.fill(0);
        }
    }
}

template <int D>
Direction LatticeState<D>::rotor_at(const Site<D>& x) const {
    if (const SiteState* s = find(x)) return Direction::from_index(s->rotor);
    const int init = initial_index(x);
    const ColumnRecord* col = find_column(column_of<D>(x));
    if (col && col->on_ray(x[D - 1])) return Direction::from_index(next_[init]);
    return Direction::from_index(init);
}

template <int D>
std::uint64_t LatticeState<D>::odometer(const Site<D>& x) const {
    if (const SiteState* s = find(x)) return s->odometer;
    const ColumnRecord* col = find_column(column_of<D>(x));
    return (col && col->on_ray(x[D - 1])) ? 1 : 0;
}

template <int D>
std::uint64_t LatticeState<D>::exits(const Site<D>& x, Direction dir) const {
    const std::uint64_t odo = odometer(x);
    const auto offset =
        static_cast<std::uint64_t>(order_.distance(initial_rotor(x), dir));
    if (odo <= offset) return 0;
    return (odo - offset - 1) / static_cast<std::uint64_t>(2 * D) + 1;
}

template <int D>
SiteState& LatticeState<D>::materialize(const Site<D>& x, const ColumnRecord* col) {
    const int init = initial_index(x);
    const bool ray = col && col->on_ray(x[D - 1]);
    SiteState fresh;
    fresh.odometer = ray ? 1 : 0;
    fresh.rotor = static_cast<std::uint8_t>(ray ? next_[init] : init);
    if (ray) ++total_odometer_;

    ColumnRecord& rec = columns_[column_of<D>(x)];
    rec.lo = std::min(rec.lo, x[D - 1]);
    rec.hi = std::max(rec.hi, x[D - 1]);
    widen_breadth(x);
    return sites_.try_emplace(x, fresh).first->second;
}

template <int D>
Direction LatticeState<D>::exit_once(const Site<D>& x) {
    SiteState* s = find(x);
    if (!s) s = &materialize(x, find_column(column_of<D>(x)));
    return Direction::from_index(fire(*s, x));
}

template <int D>
void LatticeState<D>::record_escape(const Site<D>& x, int sign) {
    ColumnRecord& rec = columns_[column_of<D>(x)];
    if (sign > 0) {
        if (rec.has_up_ray()) throw std::logic_error("second upward ray in one column");
        rec.up_ray = x[D - 1];
    } else {
        if (rec.has_down_ray()) throw std::logic_error("second downward ray in one column");
        rec.down_ray = x[D - 1];
    }
    widen_breadth(x);
    ++escape_rays_;
}

template <int D>
std::vector<std::string> LatticeState<D>::audit() const {
    std::vector<std::string> problems;
    std::uint64_t total = 0;
    ColumnMap recomputed;
    std::int64_t breadth = 0;
    std::int64_t h_plus = 0;
    std::int64_t h_minus = 0;
    for (const auto& [x, s] : sites_) {
        total += s.odometer;
        const Column<D> c = column_of<D>(x);
        auto it = columns_.find(c);
        const bool ray = it != columns_.end() && it->second.on_ray(x[D - 1]);
        // Ray sites were turned once by the escaping particle before being
        // materialized; their history starts one step later.
        const Direction expect = order_.advance(initial_rotor(x), s.odometer);
        if (Direction::from_index(s.rotor) != expect) {
            problems.push_back("rotor mismatch at " + format_site<D>(x));
        }
        if (ray && s.odometer == 0) {
            problems.push_back("ray site with zero odometer at " + format_site<D>(x));
        }
        std::uint64_t sum = 0;
        for (Direction dir : all_directions(D)) sum += exits(x, dir);
        if (sum != s.odometer) {
            problems.push_back("exit counts do not sum to odometer at " + format_site<D>(x));
        }
        ColumnRecord& rec = recomputed[c];
        rec.lo = std::min(rec.lo, x[D - 1]);
        rec.hi = std::max(rec.hi, x[D - 1]);
        for (int i = 0; i + 1 < D; ++i) breadth = std::max(breadth, std::abs(x[i]));
        if (s.odometer >= 2) {
            if (x[D - 1] >= 0) {
                h_plus = std::max(h_plus, x[D - 1]);
            } else {
                h_minus = std::max(h_minus, -x[D - 1]);
            }
        }
    }
    if (total != total_odometer_) {
        problems.push_back("total odometer " + std::to_string(total_odometer_) +
                           " != recomputed " + std::to_string(total));
    }
    for (const auto& [c, rec] : columns_) {
        auto it = recomputed.find(c);
        const bool any = it != recomputed.end();
        if (any != rec.has_sites() ||
            (any && (it->second.lo != rec.lo || it->second.hi != rec.hi))) {
            problems.push_back("column range mismatch");
        }
        if (rec.has_up_ray() || rec.has_down_ray()) {
            for (int i = 0; i + 1 < D; ++i) breadth = std::max(breadth, std::abs(c[i]));
        }
    }
    for (const auto& [c, rec] : recomputed) {
        if (!columns_.contains(c)) problems.push_back("column missing from index");
    }
    if (breadth != breadth_) problems.push_back("breadth mismatch");
    if (h_plus != h_plus_ || h_minus != h_minus_) problems.push_back("height mismatch");
    return problems;
}

template <int D>
void LatticeState<D>::write_snapshot(std::ostream& out) const {
    out << "# rotor-lattice-snapshot v1 d=" << D << " order=" << order_.to_string()
        << " rule=" << rule_.describe() << "\n";
    out << "# x1..x" << D << " rotor odometer exits[";
    for (int k = 0; k < 2 * D; ++k) out << (k ? " " : "") << to_string(Direction::from_index(k));
    out << "]\n";
    std::vector<Site<D>> keys;
    keys.reserve(sites_.size());
    for (const auto& entry : sites_) keys.push_back(entry.first);
    std::sort(keys.begin(), keys.end());
    for (const Site<D>& x : keys) {
        const SiteState& s = sites_.at(x);
        for (int i = 0; i < D; ++i) out << x[i] << ' ';
        out << to_string(Direction::from_index(s.rotor)) << ' ' << s.odometer;
        for (int k = 0; k < 2 * D; ++k) out << ' ' << exits(x, Direction::from_index(k));
        out << '\n';
    }
    std::vector<std::pair<Column<D>, ColumnRecord>> rays;
    for (const auto& [c, rec] : columns_) {
        if (rec.has_up_ray() || rec.has_down_ray()) rays.emplace_back(c, rec);
    }
    std::sort(rays.begin(), rays.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    for (const auto& [c, rec] : rays) {
        if (rec.has_up_ray()) {
            out << "ray";
            for (auto v : c) out << ' ' << v;
            out << " + " << rec.up_ray << '\n';
        }
        if (rec.has_down_ray()) {
            out << "ray";
            for (auto v : c) out << ' ' << v;
            out << " - " << rec.down_ray << '\n';
        }
    }
}

template class LatticeState<2>;
template class LatticeState<3>;
template class LatticeState<4>;
template class LatticeState<5>;

}  // namespace rotor
