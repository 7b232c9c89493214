#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace rotor {

/// Largest lattice dimension the engine is instantiated for.
inline constexpr int kMaxDimension = 5;
inline constexpr int kMaxDirections = 2 * kMaxDimension;

/// One of the 2d cardinal directions +-e_{axis+1}. Axes are 0-based; the
/// "vertical" axis used by the escape experiments is axis d-1.
struct Direction {
    std::uint8_t axis = 0;
    std::int8_t sign = 1;

    constexpr int index() const noexcept { return 2 * axis + (sign < 0 ? 1 : 0); }
    static constexpr Direction from_index(int idx) noexcept {
        return Direction{static_cast<std::uint8_t>(idx / 2),
                         static_cast<std::int8_t>(idx % 2 == 0 ? 1 : -1)};
    }
    constexpr Direction operator-() const noexcept {
        return Direction{axis, static_cast<std::int8_t>(-sign)};
    }
    friend constexpr bool operator==(Direction, Direction) = default;

    static constexpr Direction up(int d) noexcept {
        return Direction{static_cast<std::uint8_t>(d - 1), 1};
    }
    static constexpr Direction down(int d) noexcept {
        return Direction{static_cast<std::uint8_t>(d - 1), -1};
    }
};

/// "e3", "-e1", "+e2" (1-based axis in text).
std::string to_string(Direction dir);
Direction parse_direction(std::string_view text, int d);

/// All 2d directions in index order.
std::vector<Direction> all_directions(int d);

/// A cyclic permutation m of the 2d directions. The stored sequence lists the
/// cycle as given; next() maps each direction to its successor.
class CyclicOrder {
  public:
    /// Throws InvalidArgument unless `sequence` lists each of the 2d
    /// directions exactly once.
    CyclicOrder(int d, std::vector<Direction> sequence);

    int dimension() const noexcept { return d_; }
    int size() const noexcept { return 2 * d_; }
    const std::vector<Direction>& sequence() const noexcept { return sequence_; }

    Direction next(Direction dir) const noexcept {
        return Direction::from_index(next_[dir.index()]);
    }
    int next_index(int dir_index) const noexcept { return next_[dir_index]; }
    /// m^k(dir), k may be any non-negative count.
    Direction advance(Direction dir, std::uint64_t k) const noexcept;
    /// Number of steps from `from` forward to `to` around the cycle.
    int distance(Direction from, Direction to) const noexcept;

    /// eta(e): the k in [0, 2d) with m^k(e_d) = e.
    int eta(Direction e) const noexcept { return distance(Direction::up(d_), e); }

    /// Same cycle, read starting from e_d: position k holds m^k(e_d).
    std::vector<Direction> from_up() const;

    std::string to_string() const;
    friend bool operator==(const CyclicOrder& a, const CyclicOrder& b);

  private:
    int d_;
    std::vector<Direction> sequence_;
    std::array<int, kMaxDirections> next_{};
    std::array<int, kMaxDirections> position_{};
};

/// Result of the separation test on a cyclic order: some pair +-e_i with
/// i < d-1 must lie on opposite sides of the e_d ... -e_d split.
struct OrderCheck {
    bool ok = false;
    /// 0-based axis of the first witness, when ok.
    std::optional<int> witness_axis;
    /// eta table indexed by Direction::index().
    std::vector<int> eta;
};

OrderCheck validate_order(const CyclicOrder& order);
/// Checks the sequence is a permutation first; throws InvalidArgument if not.
OrderCheck validate_order(int d, std::span<const Direction> sequence);

/// Named presets. In d = 2, "ccw" is e1 -> e2 -> -e1 -> -e2. In higher d the
/// planar rotation acts on (e_{d-1}, e_d) and the remaining axes follow in
/// index order as e_1, -e_1, e_2, -e_2, ...; "cw" is the reversed cycle.
CyclicOrder ccw_order(int d);
CyclicOrder cw_order(int d);

/// "ccw", "cw" or an explicit comma separated cycle such as "e1,e2,-e1,-e2".
CyclicOrder parse_order(std::string_view spec, int d);

/// Axis relabeling applied so that the separating axis is d-2 (0-based).
/// perm[new_axis] = old_axis.
struct NormalizedOrder {
    CyclicOrder order;
    std::vector<int> axis_permutation;
};

/// Throws OrderViolation when the order has no separating axis.
NormalizedOrder normalize_order(const CyclicOrder& order);

}  // namespace rotor
