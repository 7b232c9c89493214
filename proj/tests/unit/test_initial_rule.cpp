#include <gtest/gtest.h>

#include "rotor/error.hpp"
#include "rotor/initial_rule.hpp"

using namespace rotor;

TEST(InitialRule, SplitConfiguration) {
    const InitialRule r = InitialRule::rho0();
    const std::vector<std::int64_t> above{4, 0}, below{-3, -1};
    EXPECT_EQ(r.at(above), Direction::up(2));
    EXPECT_EQ(r.at(below), Direction::down(2));
    const std::vector<std::int64_t> deep{1, 2, -7};
    EXPECT_EQ(r.at(deep), Direction::down(3));
    EXPECT_EQ(r.describe(), "rho0");
}

TEST(InitialRule, UniformUp) {
    const InitialRule r = InitialRule::uniform_up();
    const std::vector<std::int64_t> below{0, -5};
    EXPECT_EQ(r.at(below), Direction::up(2));
    EXPECT_EQ(parse_rule("uniform-up").kind(), RuleKind::uniform_up);
    EXPECT_EQ(parse_rule("rho0").kind(), RuleKind::rho0);
    EXPECT_THROW(parse_rule("diagonal"), InvalidArgument);
}

TEST(InitialRule, CustomTableOverridesFallback) {
    const InitialRule r = parse_rule_table(
        "# two overrides\n"
        "default uniform-up\n"
        "0 -1  e1\n"
        "2 3   -e2   # comment\n",
        2);
    EXPECT_EQ(r.kind(), RuleKind::custom);
    EXPECT_EQ(r.fallback(), RuleKind::uniform_up);
    EXPECT_EQ(r.overrides().size(), 2u);
    const std::vector<std::int64_t> a{0, -1}, b{2, 3}, c{1, -4};
    EXPECT_EQ(r.at(a), parse_direction("e1", 2));
    EXPECT_EQ(r.at(b), parse_direction("-e2", 2));
    EXPECT_EQ(r.at(c), Direction::up(2));
    EXPECT_EQ(r.box_min(), (std::vector<std::int64_t>{0, -1}));
    EXPECT_EQ(r.box_max(), (std::vector<std::int64_t>{2, 3}));
}

TEST(InitialRule, CustomTableErrors) {
    EXPECT_THROW(parse_rule_table("0 0 e1 e2\n", 2), InvalidArgument);
    EXPECT_THROW(parse_rule_table("0 e1\n", 2), InvalidArgument);
    EXPECT_THROW(parse_rule_table("default custom\n", 2), InvalidArgument);
    EXPECT_THROW(parse_rule_table("0 0 e3\n", 2), InvalidArgument);
    EXPECT_THROW(InitialRule::custom(2, {{{1, 2, 3}, Direction::up(2)}}), InvalidArgument);
}
