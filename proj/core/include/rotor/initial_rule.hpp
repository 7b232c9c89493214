#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rotor/direction.hpp"

namespace rotor {

enum class RuleKind { rho0, uniform_up, custom };

std::string to_string(RuleKind kind);

/// Total rule assigning the initial rotor of every site.
///
///   rho0        +e_d where x_d >= 0, -e_d where x_d < 0
///   uniform_up  +e_d everywhere
///   custom      finite override table on top of a rho0 / uniform_up default
class InitialRule {
  public:
    using Overrides = std::map<std::vector<std::int64_t>, Direction>;

    static InitialRule rho0() { return InitialRule(RuleKind::rho0); }
    static InitialRule uniform_up() { return InitialRule(RuleKind::uniform_up); }
    /// Throws InvalidArgument if `fallback` is custom or any key has the wrong
    /// length for d.
    static InitialRule custom(int d, Overrides overrides, RuleKind fallback = RuleKind::rho0);

    RuleKind kind() const noexcept { return kind_; }
    /// The rule used outside the override table (== kind() unless custom).
    RuleKind fallback() const noexcept { return fallback_; }
    const Overrides& overrides() const noexcept { return overrides_; }

    /// Axis-aligned bounding box of the override keys; empty for non-custom.
    const std::vector<std::int64_t>& box_min() const noexcept { return box_min_; }
    const std::vector<std::int64_t>& box_max() const noexcept { return box_max_; }

    Direction at(std::span<const std::int64_t> x) const;

    /// Default-rule value, ignoring overrides.
    static Direction fallback_at(RuleKind fallback, std::span<const std::int64_t> x) {
        const int d = static_cast<int>(x.size());
        if (fallback == RuleKind::uniform_up) return Direction::up(d);
        return x[d - 1] >= 0 ? Direction::up(d) : Direction::down(d);
    }

    std::string describe() const;

  private:
    explicit InitialRule(RuleKind kind) : kind_(kind), fallback_(kind) {}

    RuleKind kind_;
    RuleKind fallback_;
    Overrides overrides_;
    std::vector<std::int64_t> box_min_;
    std::vector<std::int64_t> box_max_;
};

/// "rho0", "uniform-up". Custom tables come from parse_rule_table.
InitialRule parse_rule(std::string_view spec);

/// Line-oriented override table:
///   default rho0|uniform-up
///   x1 x2 ... xd  direction
/// '#' starts a comment.
InitialRule parse_rule_table(std::string_view text, int d);

}  // namespace rotor
