#include <random>

#include <gtest/gtest.h>

#include "naive_lattice.hpp"
#include "rotor/experiments.hpp"
#include "rotor/walk.hpp"
#include "slow_detector.hpp"

using namespace rotor;

namespace {

std::vector<naive::Point> naive_cycle(const CyclicOrder& m) {
    std::vector<naive::Point> out;
    for (Direction e : m.sequence()) out.push_back(naive::unit(m.dimension(), e.axis, e.sign));
    return out;
}

template <int D>
Site<D> to_site(const naive::Point& p) {
    Site<D> x{};
    for (int i = 0; i < D; ++i) x[i] = p[i];
    return x;
}

// Runs n particles through both implementations and compares every outcome
// and the full odometer and rotor fields on the naive cube.
template <int D>
void compare_with_naive(const CyclicOrder& order, StopKind kind, int n, long half) {
    SCOPED_TRACE(order.to_string() + " " + to_string(kind));
    const auto cycle = naive_cycle(order);
    naive::Lattice ref(D, half, cycle, naive::split_init(cycle));
    LatticeState<D> state(order, InitialRule::rho0());
    const auto regime = kind == StopKind::escape_only ? StopRegime<D>::escape_only()
                                                      : StopRegime<D>::origin_or_escape();
    for (int k = 0; k < n; ++k) {
        const auto want = ref.run(kind != StopKind::escape_only);
        const auto got = run_particle<D>(state, Site<D>{}, regime);
        ASSERT_EQ(got.status == OutcomeStatus::escaped, want.status == 1) << "particle " << k;
        if (want.status == 1) {
            EXPECT_EQ(got.sign, want.sign) << "particle " << k;
            for (int i = 0; i + 1 < D; ++i) EXPECT_EQ(got.site[i], want.column[i]) << "particle " << k;
        }
    }
    naive::Point p(D, -half);
    std::size_t cells = 1;
    for (int i = 0; i < D; ++i) cells *= static_cast<std::size_t>(2 * half + 1);
    for (std::size_t k = 0; k < cells; ++k) {
        const Site<D> x = to_site<D>(p);
        ASSERT_EQ(state.odometer(x), static_cast<std::uint64_t>(ref.odometer(p))) << format_site<D>(x);
        const auto& e = cycle[static_cast<std::size_t>(ref.rotor(p))];
        Direction want{};
        for (int i = 0; i < D; ++i) {
            if (e[i] != 0) want = Direction{static_cast<std::uint8_t>(i), static_cast<std::int8_t>(e[i])};
        }
        ASSERT_EQ(state.rotor_at(x), want) << format_site<D>(x);
        for (int i = 0; i < D; ++i) {
            if (++p[i] <= half) break;
            p[i] = -half;
        }
    }
    EXPECT_TRUE(state.audit().empty());
}

}  // namespace

TEST(Walk, FirstParticleEscapesAlongTheOriginColumn) {
    LatticeState<2> s(ccw_order(2), InitialRule::rho0());
    const auto out = run_particle<2>(s, {0, 0}, StopRegime<2>::origin_or_escape());
    EXPECT_EQ(out.status, OutcomeStatus::escaped);
    EXPECT_EQ(out.sign, 1);
    EXPECT_EQ(out.steps, 0u);
    EXPECT_EQ(s.odometer({0, 0}), 1u);
    EXPECT_EQ(s.odometer({0, 50}), 1u);
    // Second particle leaves along -e1 and escapes up column -1.
    const auto second = run_particle<2>(s, {0, 0}, StopRegime<2>::origin_or_escape());
    EXPECT_EQ(second.status, OutcomeStatus::escaped);
    EXPECT_EQ(second.site, (Site<2>{-1, 0}));
    EXPECT_EQ(second.steps, 1u);
    EXPECT_EQ(s.odometer({0, 0}), 2u);
}

TEST(Walk, MatchesNaiveLatticeInTwoDimensions) {
    const std::vector<Direction> alt{parse_direction("e2", 2), parse_direction("e1", 2),
                                     parse_direction("-e2", 2), parse_direction("-e1", 2)};
    for (const CyclicOrder& m : {ccw_order(2), cw_order(2), CyclicOrder(2, alt)}) {
        compare_with_naive<2>(m, StopKind::absorb_origin_or_escape, 300, 150);
        compare_with_naive<2>(m, StopKind::escape_only, 120, 150);
    }
}

TEST(Walk, MatchesNaiveLatticeInThreeDimensions) {
    compare_with_naive<3>(ccw_order(3), StopKind::absorb_origin_or_escape, 200, 30);
    compare_with_naive<3>(cw_order(3), StopKind::escape_only, 60, 30);
}

TEST(Walk, GoldenEscapeCountsCounterclockwise) {
    // I(rho0, n) for n = 1..20 from the naive lattice.
    const std::vector<std::uint64_t> golden{1, 2, 3, 4, 5, 6, 7, 7, 7, 8,
                                            8, 9, 10, 10, 11, 12, 12, 13, 13, 13};
    EscapeExperiment<2> e(ccw_order(2), InitialRule::rho0(), StopKind::absorb_origin_or_escape);
    for (std::uint64_t want : golden) {
        e.launch();
        EXPECT_EQ(e.escaped(), want) << "n=" << e.launched();
    }
}

TEST(Walk, SlowDetectorAgreesOnSmallRuns) {
    std::mt19937_64 rng(3);
    for (int run = 0; run < 20; ++run) {
        const int n = 1 + static_cast<int>(rng() % 40);
        LatticeState<2> fast(ccw_order(2), InitialRule::rho0());
        LatticeState<2> slow(ccw_order(2), InitialRule::rho0());
        const auto regime = StopRegime<2>::origin_or_escape();
        for (int k = 0; k < n; ++k) {
            const auto a = run_particle<2>(fast, {0, 0}, regime);
            const auto b = run_particle_with<2>(slow, {0, 0}, regime, rotor::testing::SlowEscapeDetector{});
            ASSERT_EQ(a.status, b.status);
            ASSERT_EQ(a.sign, b.sign);
            ASSERT_EQ(a.column(), b.column());
        }
        for (const auto& [x, st] : slow.sites()) {
            EXPECT_EQ(fast.odometer(x), st.odometer);
            EXPECT_EQ(fast.rotor_at(x), Direction::from_index(st.rotor));
        }
    }
}

TEST(Walk, BallRunOfOneParticleTurnsTheVerticalRay) {
    for (double r : {1.0, 4.0, 7.5}) {
        const auto run = ball_odometer<3>(ccw_order(3), InitialRule::rho0(), 1, r);
        for (const auto& [x, st] : run.state.sites()) {
            EXPECT_EQ(x[0], 0);
            EXPECT_EQ(x[1], 0);
            EXPECT_GE(x[2], 0);
            EXPECT_LT(static_cast<double>(x[2]), r);
            EXPECT_EQ(st.odometer, 1u);
        }
        EXPECT_EQ(run.state.materialized_count(), static_cast<std::size_t>(std::ceil(r)));
        EXPECT_EQ(run.absorbed_total(), 1u);
    }
}

TEST(Walk, BallConservationAndFluxResidual) {
    for (double r : {3.0, 6.5}) {
        const auto run2 = ball_odometer<2>(ccw_order(2), InitialRule::rho0(), 500, r);
        EXPECT_TRUE(check_ball_conservation<2>(run2.state, r, 500, run2.absorbed_total()).empty());
        EXPECT_LE(flux_residual<2>(run2.state, r).max_abs_residual, 6);
        const auto run3 = ball_odometer<3>(cw_order(3), InitialRule::uniform_up(), 300, r);
        EXPECT_TRUE(check_ball_conservation<3>(run3.state, r, 300, run3.absorbed_total()).empty());
        EXPECT_LE(flux_residual<3>(run3.state, r).max_abs_residual, 10);
    }
}

TEST(Walk, FluxResidualRefusesForeignStates) {
    LatticeState<2> s(ccw_order(2), InitialRule::rho0());
    run_particle<2>(s, {0, 0}, StopRegime<2>::origin_or_escape());
    EXPECT_THROW(flux_residual<2>(s, 5.0), InvalidArgument);
    auto run = ball_odometer<2>(ccw_order(2), InitialRule::rho0(), 10, 5.0);
    EXPECT_THROW(flux_residual<2>(run.state, 6.0), InvalidArgument);
}

TEST(Walk, BallSitesAndBoundary) {
    EXPECT_EQ(ball_sites<2>(1.0).size(), 1u);
    EXPECT_EQ(ball_sites<2>(1.4).size(), 5u);
    EXPECT_EQ(ball_sites<2>(1.5).size(), 9u);
    EXPECT_EQ(ball_boundary_sites<2>(1.0).size(), 4u);
    EXPECT_EQ(ball_sites<3>(1.5).size(), 19u);
    EXPECT_EQ(ball_sites<3>(2.0).size(), 27u);
}

TEST(Walk, StepBudgetIsEnforced) {
    LatticeState<2> s(ccw_order(2), InitialRule::rho0());
    WalkOptions opts;
    opts.step_budget = 3;
    EXPECT_THROW(
        {
            for (int k = 0; k < 100; ++k) run_particle<2>(s, {0, 0}, StopRegime<2>::ball(50.0), opts);
        },
        BudgetExceeded);
}

TEST(Walk, CustomSetStopsOnEntry) {
    absl::flat_hash_set<Site<2>> target{{0, 3}};
    LatticeState<2> s(ccw_order(2), InitialRule::rho0());
    const auto out = run_particle<2>(s, {0, 0}, StopRegime<2>::custom_set(target));
    EXPECT_EQ(out.status, OutcomeStatus::absorbed_boundary);
    EXPECT_EQ(out.site, (Site<2>{0, 3}));
    EXPECT_EQ(out.steps, 3u);
}

TEST(Walk, TraceSeesEveryStep) {
    struct Counter : TraceSink {
        std::uint64_t steps = 0;
        void on_step(std::span<const std::int64_t>, Direction, std::uint64_t) override { ++steps; }
    } counter;
    LatticeState<2> s(ccw_order(2), InitialRule::rho0());
    WalkOptions opts;
    opts.trace = &counter;
    std::uint64_t total = 0;
    for (int k = 0; k < 30; ++k) total += run_particle<2>(s, {0, 0}, StopRegime<2>::origin_or_escape(), opts).steps;
    EXPECT_EQ(counter.steps, total);
}
