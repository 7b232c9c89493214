#include <cmath>
#include <fstream>
#include <numeric>

#include <gtest/gtest.h>

#include "rotor/abelian.hpp"
#include "rotor/error.hpp"

using namespace rotor;

namespace {

// Path 0 - 1 - 2 - 3 - 4 with sinks at both ends.
FiniteRotorGraph path_graph(std::uint64_t particles) {
    FiniteRotorGraph g;
    g.out = {{}, {0, 2}, {1, 3}, {2, 4}, {}};
    g.sink = {1, 0, 0, 0, 1};
    g.rotor = {0, 0, 0, 0, 0};
    g.particles = {0, 0, particles, 0, 0};
    return g;
}

std::vector<Schedule> all_schedules(int randoms) {
    std::vector<Schedule> s{Schedule::fifo(), Schedule::lifo(), Schedule::round_robin()};
    for (int k = 0; k < randoms; ++k) s.push_back(Schedule::random(1000 + static_cast<std::uint64_t>(k)));
    return s;
}

// Jacobi iteration for the hitting probabilities.
std::vector<double> jacobi_hitting(const FiniteRotorGraph& g, const std::vector<int>& target) {
    std::vector<double> h(static_cast<std::size_t>(g.size()), 0.0);
    for (int y : target) h[static_cast<std::size_t>(y)] = 1.0;
    for (int it = 0; it < 200000; ++it) {
        std::vector<double> next = h;
        double change = 0;
        for (int v = 0; v < g.size(); ++v) {
            if (g.sink[static_cast<std::size_t>(v)]) continue;
            double s = 0;
            for (int t : g.out[static_cast<std::size_t>(v)]) s += h[static_cast<std::size_t>(t)];
            next[static_cast<std::size_t>(v)] = s / static_cast<double>(g.out[static_cast<std::size_t>(v)].size());
            change = std::max(change, std::abs(next[static_cast<std::size_t>(v)] - h[static_cast<std::size_t>(v)]));
        }
        h.swap(next);
        if (change < 1e-15) break;
    }
    return h;
}

}  // namespace

TEST(Abelian, PathGraphByHand) {
    // Every rotor flips an even number of times, so all return to their start.
    const auto r = stabilize(path_graph(2), Schedule::fifo());
    EXPECT_EQ(r.placement, (std::vector<std::uint64_t>{1, 0, 0, 0, 1}));
    EXPECT_EQ(r.exits, (std::vector<std::uint64_t>{0, 2, 4, 2, 0}));
    EXPECT_EQ(r.rotors, (std::vector<int>{0, 0, 0, 0, 0}));
    EXPECT_EQ(r.steps, 8u);
    EXPECT_TRUE(flow_violations(path_graph(2), r).empty());
}

TEST(Abelian, GridFixtureEnumeration) {
    for (int rotation = 0; rotation < 4; ++rotation) {
        const auto g = grid_fixture(rotation, 3);
        EXPECT_EQ(g.size(), 21);
        EXPECT_EQ(grid_fixture_vertex(0, 0), 4);
        EXPECT_EQ(g.particles[4], 3u);
        const auto e = enumerate_schedules(g);
        EXPECT_FALSE(e.truncated);
        EXPECT_GT(e.leaves, 1u);
        EXPECT_EQ(e.mismatches, 0u);
        EXPECT_EQ(std::accumulate(e.first.placement.begin(), e.first.placement.end(), std::uint64_t{0}), 3u);
        for (const auto& s : all_schedules(5)) EXPECT_TRUE(stabilize(g, s).same_outcome(e.first)) << to_string(s);
    }
    EXPECT_EQ(grid_fixture_vertex(2, 2), -1);
    EXPECT_GE(grid_fixture_vertex(2, 0), 9);
}

TEST(Abelian, FuzzedGraphsAreScheduleIndependent) {
    CounterRng rng(21, 0);
    for (int k = 0; k < 300; ++k) {
        RandomGraphOptions opts;
        opts.directed = k % 2 == 1;
        const auto g = random_rotor_graph(rng, opts);
        ASSERT_NO_THROW(g.validate());
        const auto base = stabilize(g, Schedule::fifo());
        for (const auto& s : all_schedules(8)) {
            ASSERT_TRUE(stabilize(g, s).same_outcome(base)) << "graph " << k << " " << to_string(s) << "\n"
                                                           << format_graph(g);
        }
        EXPECT_TRUE(flow_violations(g, base).empty());
        std::uint64_t on_sinks = 0;
        for (int v = 0; v < g.size(); ++v) {
            if (g.sink[static_cast<std::size_t>(v)]) on_sinks += base.placement[static_cast<std::size_t>(v)];
            else EXPECT_EQ(base.placement[static_cast<std::size_t>(v)], 0u);
        }
        EXPECT_EQ(on_sinks, g.total_particles());
    }
}

TEST(Abelian, FlowViolationsDetectTampering) {
    const auto g = path_graph(3);
    auto r = stabilize(g, Schedule::lifo());
    EXPECT_TRUE(flow_violations(g, r).empty());
    r.exits[1] += 1;
    EXPECT_FALSE(flow_violations(g, r).empty());
}

TEST(Abelian, ExplicitSequence) {
    const auto g = path_graph(1);
    const auto r = stabilize(g, Schedule::explicit_sequence({2, 1}));
    EXPECT_EQ(r.placement[0], 1u);
    EXPECT_THROW(stabilize(g, Schedule::explicit_sequence({1})), InvalidArgument);
    EXPECT_THROW(stabilize(g, Schedule::explicit_sequence({2})), InvalidArgument);
    EXPECT_THROW(stabilize(g, Schedule::explicit_sequence({2, 0})), InvalidArgument);
    StabilizeOptions tight;
    tight.step_budget = 2;
    EXPECT_THROW(stabilize(path_graph(5), Schedule::fifo(), tight), BudgetExceeded);
}

TEST(Abelian, HittingMatchesJacobi) {
    CounterRng rng(5, 1);
    for (int k = 0; k < 50; ++k) {
        RandomGraphOptions opts;
        opts.directed = k % 2 == 0;
        const auto g = random_rotor_graph(rng, opts);
        std::vector<int> target;
        for (int v = 0; v < g.size(); ++v) {
            if (g.sink[static_cast<std::size_t>(v)] && (target.empty() || v % 2 == 0)) target.push_back(v);
        }
        const auto sol = graph_hitting(g, target);
        const auto want = jacobi_hitting(g, target);
        EXPECT_LE(sol.residual, 1e-9);
        for (int v = 0; v < g.size(); ++v) {
            EXPECT_NEAR(sol.h[static_cast<std::size_t>(v)], want[static_cast<std::size_t>(v)], 1e-9);
        }
    }
}

TEST(Abelian, HolroydProppOnFuzzedGraphs) {
    CounterRng rng(77, 0);
    for (int k = 0; k < 300; ++k) {
        RandomGraphOptions opts;
        opts.directed = k % 3 == 0;
        const auto g = random_rotor_graph(rng, opts);
        std::vector<int> target;
        for (int v = 0; v < g.size(); ++v) {
            if (g.sink[static_cast<std::size_t>(v)]) {
                target.push_back(v);
                break;
            }
        }
        const auto rep = holroyd_propp_check(g, target);
        EXPECT_TRUE(rep.verdict) << format_graph(g);
        EXPECT_LE(rep.residual, 1e-9);
        EXPECT_LE(std::abs(rep.rotor_mass - rep.walk_mass), rep.bound + 1e-9);
    }
}

TEST(Abelian, HolroydProppPathGolden) {
    // Hitting the right end from vertex i of the path is i / 4.
    const auto rep = holroyd_propp_check(path_graph(4), {4});
    EXPECT_NEAR(rep.walk_mass, 2.0, 1e-12);
    EXPECT_DOUBLE_EQ(rep.rotor_mass, 2.0);
    EXPECT_NEAR(rep.bound, 1.5, 1e-12);
    EXPECT_TRUE(rep.verdict);
    EXPECT_THROW(holroyd_propp_check(path_graph(1), {2}), InvalidArgument);
}

TEST(Abelian, FixtureFileRoundTrip) {
    const auto g = load_graph(std::string(ROTOR_TEST_DATA_DIR) + "/grid3x3.graph");
    const auto ref = grid_fixture(0, 3);
    EXPECT_EQ(g.out, ref.out);
    EXPECT_EQ(g.sink, ref.sink);
    EXPECT_EQ(g.rotor, ref.rotor);
    EXPECT_EQ(g.particles, ref.particles);
    const auto back = parse_graph(format_graph(g));
    EXPECT_EQ(back.out, g.out);
    EXPECT_EQ(back.particles, g.particles);
}

TEST(Abelian, MalformedGraphsAreRejected) {
    EXPECT_THROW(parse_graph("rotor-graph 2\nvertices 1\nsinks 1 0\n0 0 0 0\n"), InvalidArgument);
    EXPECT_THROW(parse_graph("rotor-graph 1\nvertices 2\nsinks 1 1\n0 0 0 1 1\n"), InvalidArgument);
    EXPECT_THROW(parse_graph("rotor-graph 1\nvertices 2\nsinks 1 1\n0 3 0 1 1\n1 0 0 0\n"), InvalidArgument);
    // Non-sink cycle with no route to the sink.
    EXPECT_THROW(parse_graph("rotor-graph 1\nvertices 3\nsinks 1 2\n0 0 0 1 1\n1 0 0 1 0\n2 0 0 0\n"),
                 InvalidArgument);
    EXPECT_THROW(load_graph("/nonexistent.graph"), InvalidArgument);
}
