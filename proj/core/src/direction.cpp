#include "rotor/direction.hpp"

#include <algorithm>
#include <charconv>
#include <sstream>

#include "rotor/error.hpp"

namespace rotor {

std::string to_string(Direction dir) {
    std::string out = dir.sign < 0 ? "-e" : "e";
    out += std::to_string(dir.axis + 1);
    return out;
}

Direction parse_direction(std::string_view text, int d) {
    std::string_view rest = text;
    while (!rest.empty() && rest.front() == ' ') rest.remove_prefix(1);
    while (!rest.empty() && rest.back() == ' ') rest.remove_suffix(1);
    std::int8_t sign = 1;
    if (!rest.empty() && (rest.front() == '-' || rest.front() == '+')) {
        sign = rest.front() == '-' ? -1 : 1;
        rest.remove_prefix(1);
    }
    if (rest.size() < 2 || rest.front() != 'e') {
        throw InvalidArgument("malformed direction '" + std::string(text) + "'");
    }
    rest.remove_prefix(1);
    int axis = 0;
    auto [ptr, ec] = std::from_chars(rest.data(), rest.data() + rest.size(), axis);
    if (ec != std::errc{} || ptr != rest.data() + rest.size() || axis < 1 || axis > d) {
        throw InvalidArgument("direction '" + std::string(text) + "' out of range for d=" +
                              std::to_string(d));
    }
    return Direction{static_cast<std::uint8_t>(axis - 1), sign};
}

std::vector<Direction> all_directions(int d) {
    std::vector<Direction> out;
    for (int k = 0; k < 2 * d; ++k) out.push_back(Direction::from_index(k));
    return out;
}

CyclicOrder::CyclicOrder(int d, std::vector<Direction> sequence)
    : d_(d), sequence_(std::move(sequence)) {
    if (d < 1 || d > kMaxDimension) {
        throw InvalidArgument("dimension " + std::to_string(d) + " not supported (1.." +
                              std::to_string(kMaxDimension) + ")");
    }
    if (static_cast<int>(sequence_.size()) != 2 * d) {
        throw InvalidArgument("cyclic order must list " + std::to_string(2 * d) +
                              " directions, got " + std::to_string(sequence_.size()));
    }
    position_.fill(-1);
    for (int k = 0; k < 2 * d; ++k) {
        const Direction dir = sequence_[k];
        if (dir.axis >= d || (dir.sign != 1 && dir.sign != -1)) {
            throw InvalidArgument("direction out of range in cyclic order");
        }
        if (position_[dir.index()] != -1) {
            throw InvalidArgument("duplicate direction " + rotor::to_string(dir) +
                                  " in cyclic order");
        }
        position_[dir.index()] = k;
    }
    for (int k = 0; k < 2 * d; ++k) {
        next_[sequence_[k].index()] = sequence_[(k + 1) % (2 * d)].index();
    }
}

Direction CyclicOrder::advance(Direction dir, std::uint64_t k) const noexcept {
    const int n = size();
    const int pos = position_[dir.index()];
    return sequence_[(pos + static_cast<int>(k % static_cast<std::uint64_t>(n))) % n];
}

int CyclicOrder::distance(Direction from, Direction to) const noexcept {
    const int n = size();
    return ((position_[to.index()] - position_[from.index()]) % n + n) % n;
}

std::vector<Direction> CyclicOrder::from_up() const {
    std::vector<Direction> out;
    Direction cur = Direction::up(d_);
    for (int k = 0; k < size(); ++k) {
        out.push_back(cur);
        cur = next(cur);
    }
    return out;
}

std::string CyclicOrder::to_string() const {
    std::string out;
    for (std::size_t k = 0; k < sequence_.size(); ++k) {
        if (k) out += ',';
        out += rotor::to_string(sequence_[k]);
    }
    return out;
}

bool operator==(const CyclicOrder& a, const CyclicOrder& b) {
    return a.d_ == b.d_ && a.next_ == b.next_;
}

OrderCheck validate_order(const CyclicOrder& order) {
    const int d = order.dimension();
    OrderCheck check;
    check.eta.resize(2 * d);
    for (int k = 0; k < 2 * d; ++k) check.eta[k] = order.eta(Direction::from_index(k));
    const int down = check.eta[Direction::down(d).index()];
    for (int axis = 0; axis + 1 < d; ++axis) {
        const int plus = check.eta[Direction{static_cast<std::uint8_t>(axis), 1}.index()];
        const int minus = check.eta[Direction{static_cast<std::uint8_t>(axis), -1}.index()];
        if ((plus - down) * (minus - down) < 0) {
            check.ok = true;
            check.witness_axis = axis;
            break;
        }
    }
    return check;
}

OrderCheck validate_order(int d, std::span<const Direction> sequence) {
    return validate_order(CyclicOrder(d, std::vector<Direction>(sequence.begin(), sequence.end())));
}

namespace {

Direction axis_dir(int axis, int sign) {
    return Direction{static_cast<std::uint8_t>(axis), static_cast<std::int8_t>(sign)};
}

}  // namespace

CyclicOrder ccw_order(int d) {
    if (d < 2) throw InvalidArgument("ccw preset needs d >= 2");
    std::vector<Direction> seq{axis_dir(d - 2, 1), axis_dir(d - 1, 1), axis_dir(d - 2, -1),
                               axis_dir(d - 1, -1)};
    for (int axis = 0; axis + 2 < d; ++axis) {
        seq.push_back(axis_dir(axis, 1));
        seq.push_back(axis_dir(axis, -1));
    }
    return CyclicOrder(d, std::move(seq));
}

CyclicOrder cw_order(int d) {
    auto seq = ccw_order(d).sequence();
    std::reverse(seq.begin(), seq.end());
    return CyclicOrder(d, std::move(seq));
}

CyclicOrder parse_order(std::string_view spec, int d) {
    if (spec == "ccw") return ccw_order(d);
    if (spec == "cw") return cw_order(d);
    std::vector<Direction> seq;
    std::size_t start = 0;
    while (start <= spec.size()) {
        std::size_t comma = spec.find_first_of(",;", start);
        if (comma == std::string_view::npos) comma = spec.size();
        seq.push_back(parse_direction(spec.substr(start, comma - start), d));
        start = comma + 1;
    }
    return CyclicOrder(d, std::move(seq));
}

NormalizedOrder normalize_order(const CyclicOrder& order) {
    const int d = order.dimension();
    const OrderCheck check = validate_order(order);
    if (!check.ok) {
        throw OrderViolation("cyclic order " + order.to_string() +
                                 " has no axis pair separating e_d from -e_d",
                             order.to_string());
    }
    std::vector<int> perm(d);
    for (int k = 0; k < d; ++k) perm[k] = k;
    const int down = check.eta[Direction::down(d).index()];
    const auto separates = [&](int axis) {
        return (check.eta[axis_dir(axis, 1).index()] - down) *
                   (check.eta[axis_dir(axis, -1).index()] - down) <
               0;
    };
    if (separates(d - 2)) return NormalizedOrder{order, perm};
    const int witness = *check.witness_axis;

    std::swap(perm[witness], perm[d - 2]);
    std::vector<Direction> seq;
    for (Direction dir : order.sequence()) {
        int axis = dir.axis;
        if (axis == witness) {
            axis = d - 2;
        } else if (axis == d - 2) {
            axis = witness;
        }
        seq.push_back(axis_dir(axis, dir.sign));
    }
    return NormalizedOrder{CyclicOrder(d, std::move(seq)), perm};
}

}  // namespace rotor
