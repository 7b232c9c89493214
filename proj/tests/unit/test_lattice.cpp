#include <sstream>

#include <gtest/gtest.h>

#include "rotor/lattice.hpp"
#include "rotor/walk.hpp"

using namespace rotor;

namespace {

Direction dir(const char* name, int d) { return parse_direction(name, d); }

}  // namespace

TEST(LatticeState, FreshStateShowsInitialRule) {
    LatticeState<2> s(ccw_order(2), InitialRule::rho0());
    EXPECT_EQ(s.rotor_at({5, 0}), Direction::up(2));
    EXPECT_EQ(s.rotor_at({5, -1}), Direction::down(2));
    EXPECT_EQ(s.odometer({0, 0}), 0u);
    EXPECT_EQ(s.materialized_count(), 0u);
    EXPECT_TRUE(s.audit().empty());
}

TEST(LatticeState, ExitSequenceAtOriginFollowsTheCycle) {
    LatticeState<2> s(ccw_order(2), InitialRule::rho0());
    const char* expected[] = {"e2", "-e1", "-e2", "e1", "e2"};
    for (const char* name : expected) EXPECT_EQ(s.exit_once({0, 0}), dir(name, 2));
    EXPECT_EQ(s.odometer({0, 0}), 5u);
    EXPECT_EQ(s.exits({0, 0}, Direction::up(2)), 2u);
    EXPECT_EQ(s.exits({0, 0}, dir("-e1", 2)), 1u);
    EXPECT_EQ(s.exits({0, 0}, dir("e1", 2)), 1u);
    EXPECT_EQ(s.rotor_at({0, 0}), dir("-e1", 2));
    EXPECT_TRUE(s.audit().empty());
}

TEST(LatticeState, HeightsCountSitesExitedTwice) {
    LatticeState<2> s(ccw_order(2), InitialRule::rho0());
    s.exit_once({3, 7});
    EXPECT_EQ(s.h_plus(), 0);
    s.exit_once({3, 7});
    EXPECT_EQ(s.h_plus(), 7);
    s.exit_once({-2, -4});
    s.exit_once({-2, -4});
    EXPECT_EQ(s.h_minus(), 4);
    EXPECT_EQ(s.breadth(), 3);
}

TEST(LatticeState, EscapeRaysTurnEveryRotorOnTheRay) {
    LatticeState<2> s(ccw_order(2), InitialRule::rho0());
    s.record_escape({4, 2}, +1);
    EXPECT_EQ(s.odometer({4, 2}), 1u);
    EXPECT_EQ(s.odometer({4, 1000000}), 1u);
    EXPECT_EQ(s.odometer({4, 1}), 0u);
    EXPECT_EQ(s.rotor_at({4, 9}), ccw_order(2).next(Direction::up(2)));
    EXPECT_EQ(s.exits({4, 9}, Direction::up(2)), 1u);
    EXPECT_EQ(s.breadth(), 4);
    EXPECT_EQ(s.escape_rays(), 1u);
    EXPECT_THROW(s.record_escape({4, 5}, +1), std::logic_error);
    s.record_escape({4, -3}, -1);
    EXPECT_EQ(s.odometer({4, -10}), 1u);
    EXPECT_TRUE(s.audit().empty());
}

TEST(LatticeState, SnapshotListsSitesThenRays) {
    LatticeState<2> s(ccw_order(2), InitialRule::rho0());
    s.exit_once({0, 0});
    s.exit_once({0, 0});
    s.record_escape({-1, 0}, +1);
    std::ostringstream out;
    s.write_snapshot(out);
    EXPECT_EQ(out.str(),
              "# rotor-lattice-snapshot v1 d=2 order=e1,e2,-e1,-e2 rule=rho0\n"
              "# x1..x2 rotor odometer exits[e1 -e1 e2 -e2]\n"
              "0 0 -e2 2 0 1 1 0\n"
              "ray -1 + 0\n");
}

TEST(LatticeState, CustomOverridesInsideTheirBox) {
    const InitialRule rule = InitialRule::custom(3, {{{1, 1, 1}, dir("-e1", 3)}}, RuleKind::uniform_up);
    LatticeState<3> s(ccw_order(3), rule);
    EXPECT_EQ(s.rotor_at({1, 1, 1}), dir("-e1", 3));
    EXPECT_EQ(s.rotor_at({1, 1, -1}), Direction::up(3));
}

TEST(DispatchDimension, CoversTwoToFive) {
    for (int d = 2; d <= 5; ++d) {
        EXPECT_EQ(dispatch_dimension(d, []<int D>() { return D; }), d);
    }
    EXPECT_THROW(dispatch_dimension(6, []<int D>() { return D; }), InvalidArgument);
    EXPECT_THROW(dispatch_dimension(1, []<int D>() { return D; }), InvalidArgument);
}
