#include <algorithm>
#include <cmath>
#include <sstream>

#include <gtest/gtest.h>

#include "naive_lattice.hpp"
#include "rotor/experiments.hpp"

using namespace rotor;

TEST(Experiments, GeometricCheckpoints) {
    EXPECT_EQ(geometric_checkpoints(10, 2.0), (std::vector<std::uint64_t>{1, 2, 4, 8, 10}));
    EXPECT_EQ(geometric_checkpoints(1), (std::vector<std::uint64_t>{1}));
    EXPECT_TRUE(geometric_checkpoints(0).empty());
    const auto marks = geometric_checkpoints(1000);
    EXPECT_TRUE(std::is_sorted(marks.begin(), marks.end()));
    EXPECT_EQ(std::adjacent_find(marks.begin(), marks.end()), marks.end());
    EXPECT_EQ(marks.back(), 1000u);
    EXPECT_THROW(geometric_checkpoints(10, 1.0), InvalidArgument);
    EXPECT_EQ(merge_checkpoints({5, 0, 3}, {3, 9}), (std::vector<std::uint64_t>{3, 5, 9}));
}

namespace {

// Escape-only after n escapes has exited the origin u times; the
// return-or-escape run then has exactly n escapes after u particles, and
// stays at n until the next escape-only origin count.
template <int D>
void check_identity(const CyclicOrder& m, std::uint64_t n_max) {
    EscapeExperiment<D> dual(m, InitialRule::rho0(), StopKind::escape_only);
    EscapeExperiment<D> primal(m, InitialRule::rho0(), StopKind::absorb_origin_or_escape);
    std::uint64_t u_prev = 0;
    for (std::uint64_t n = 1; n <= n_max; ++n) {
        dual.launch_until(n);
        const std::uint64_t u = dual.origin_odometer();
        ASSERT_GT(u, u_prev);
        for (std::uint64_t N = std::max<std::uint64_t>(u_prev, 1); N < u; ++N) {
            primal.launch_until(N);
            ASSERT_EQ(primal.escaped(), n - 1) << "d=" << D << " N=" << N;
        }
        primal.launch_until(u);
        ASSERT_EQ(primal.escaped(), n) << "d=" << D << " n=" << n;
        u_prev = u;
    }
}

}  // namespace

TEST(Experiments, EscapeCountIdentityAndPlateau) {
    check_identity<2>(ccw_order(2), 80);
    check_identity<2>(cw_order(2), 80);
    check_identity<3>(ccw_order(3), 60);
}

TEST(Experiments, SeriesInvariantsAndMetadata) {
    SeriesConfig cfg;
    cfg.order = parse_order("e1,-e2,-e1,e2", 2);
    cfg.n_max = 500;
    const auto s = escape_rate_series(2, cfg);
    EXPECT_TRUE(check_series_invariants(s).empty());
    EXPECT_EQ(s.checkpoints.back().n, 500u);
    EXPECT_EQ(s.meta.regime, "absorb-origin-or-escape");
    EXPECT_EQ(s.meta.engine, "sparse");
    EXPECT_EQ(s.meta.axis_permutation, (std::vector<int>{0, 1}));
    for (const auto& c : s.checkpoints) EXPECT_EQ(c.u0, c.n);

    ExperimentSeries bad = s;
    bad.checkpoints[1].escaped = bad.checkpoints[1].n + 1;
    bad.checkpoints[2].n = bad.checkpoints[1].n;
    bad.checkpoints[2].escaped = 0;
    EXPECT_EQ(check_series_invariants(bad).size(), 2u);
}

TEST(Experiments, NormalizerValues) {
    ExperimentSeries s;
    s.meta.d = 2;
    s.meta.regime = to_string(StopKind::absorb_origin_or_escape);
    s.checkpoints.push_back(Checkpoint{1, 1, 1});
    s.checkpoints.push_back(Checkpoint{8, 4, 8});
    auto norm = rate_normalizer(s);
    EXPECT_FALSE(norm[0].primal.has_value());
    EXPECT_NEAR(*norm[1].primal, 4 * std::log(8.0) / 8, 1e-12);
    EXPECT_NEAR(*norm[1].primal, 1.0397, 1e-4);
    EXPECT_FALSE(norm[1].dual.has_value());

    s.meta.regime = to_string(StopKind::escape_only);
    s.checkpoints = {Checkpoint{3, 3, 10}};
    norm = rate_normalizer(s);
    EXPECT_NEAR(*norm[0].dual, 3 * std::log(10.0) / 10, 1e-12);
    EXPECT_EQ(normalized_rate(s, norm[0]), norm[0].dual);

    s.meta.d = 3;
    s.checkpoints = {Checkpoint{4, 4, 12, 0, 0, 0, 0}};
    s.checkpoints[0].escaped = 3;
    norm = rate_normalizer(s);
    EXPECT_DOUBLE_EQ(*norm[0].primal, 0.75);
    EXPECT_DOUBLE_EQ(*norm[0].dual, 4.0 / 12.0);
}

TEST(Experiments, CsvLayout) {
    SeriesConfig cfg;
    cfg.n_max = 20;
    cfg.checkpoints = {1, 8, 20};
    std::ostringstream out;
    write_series_csv(out, escape_rate_series(2, cfg));
    std::istringstream in(out.str());
    std::string line;
    std::getline(in, line);
    EXPECT_EQ(line, "# schema_version=1");
    std::getline(in, line);
    EXPECT_EQ(line, "n,I,u0,h_plus,h_minus,breadth,steps,normalized_rate");
    std::getline(in, line);
    EXPECT_EQ(line.substr(0, 6), "1,1,1,");
    EXPECT_EQ(line.back(), ',');
    std::getline(in, line);
    EXPECT_EQ(line.substr(0, 4), "8,7,");
    std::getline(in, line);
    EXPECT_EQ(line.substr(0, 6), "20,13,");
}

TEST(Experiments, CheckpointCallbackSeesEveryRow) {
    SeriesConfig cfg;
    cfg.order = ccw_order(3);
    cfg.n_max = 100;
    std::vector<std::uint64_t> seen;
    cfg.on_checkpoint = [&](const Checkpoint& c) { seen.push_back(c.n); };
    const auto s = escape_only_series(3, cfg);
    ASSERT_EQ(seen.size(), s.checkpoints.size());
    EXPECT_EQ(seen.back(), 100u);
    EXPECT_TRUE(check_series_invariants(s).empty());
}

TEST(Experiments, RejectsUnsupportedRegimes) {
    EXPECT_THROW(EscapeExperiment<2>(ccw_order(2), InitialRule::rho0(), StopKind::absorb_ball_boundary),
                 InvalidArgument);
    const std::vector<Direction> bad{Direction::up(2), Direction::down(2), Direction{0, 1}, Direction{0, -1}};
    EXPECT_THROW(EscapeExperiment<2>(CyclicOrder(2, bad), InitialRule::rho0(), StopKind::escape_only),
                 OrderViolation);
    EXPECT_THROW(parse_engine("gpu"), InvalidArgument);
    EXPECT_EQ(parse_engine(to_string(SeriesEngine::dense)), SeriesEngine::dense);
}

TEST(Aggregation, GoldenPlusShape) {
    const auto res = aggregate<2>(ccw_order(2), InitialRule::rho0(), 5);
    std::vector<Site<2>> got = res.cluster;
    std::sort(got.begin(), got.end());
    EXPECT_EQ(got, (std::vector<Site<2>>{{-1, 0}, {0, -1}, {0, 0}, {0, 1}, {1, 0}}));
    EXPECT_DOUBLE_EQ(res.outradius, 1.0);
    EXPECT_DOUBLE_EQ(res.inradius, std::sqrt(2.0));
}

TEST(Aggregation, MatchesNaiveLattice) {
    for (const CyclicOrder& m : {ccw_order(2), cw_order(2)}) {
        std::vector<naive::Point> cycle;
        for (Direction e : m.sequence()) cycle.push_back(naive::unit(2, e.axis, e.sign));
        naive::Lattice ref(2, 60, cycle, naive::split_init(cycle));
        std::vector<Site<2>> want;
        for (int k = 0; k < 400; ++k) {
            const auto o = ref.run(false, true);
            want.push_back({o.site[0], o.site[1]});
        }
        auto got = aggregate<2>(m, InitialRule::rho0(), 400).cluster;
        std::sort(want.begin(), want.end());
        std::sort(got.begin(), got.end());
        EXPECT_EQ(got, want) << m.to_string();
    }
}

TEST(Aggregation, RadiiBracketTheLatticeCount) {
    for (std::uint64_t n : {50u, 300u, 2000u}) {
        const auto res = aggregate<2>(ccw_order(2), InitialRule::rho0(), n);
        ASSERT_EQ(res.cluster.size(), n);
        EXPECT_LE(res.inradius, res.outradius + 1.0);
        const double in2 = res.inradius * res.inradius, out2 = res.outradius * res.outradius;
        std::uint64_t open_in = 0, closed_out = 0;
        const auto lim = static_cast<std::int64_t>(std::ceil(res.outradius)) + 1;
        for (std::int64_t x = -lim; x <= lim; ++x) {
            for (std::int64_t y = -lim; y <= lim; ++y) {
                const auto r2 = static_cast<double>(x * x + y * y);
                if (r2 < in2) ++open_in;
                if (r2 <= out2) ++closed_out;
            }
        }
        EXPECT_LE(open_in, n);
        EXPECT_GE(closed_out, n);
        EXPECT_GT(res.volume_radius(), 0.0);
    }
}

TEST(Aggregation, ClockwiseIsTheMirrorImage) {
    const auto a = aggregate<2>(ccw_order(2), InitialRule::rho0(), 1500).cluster;
    const auto b = aggregate<2>(cw_order(2), InitialRule::rho0(), 1500).cluster;
    std::vector<Site<2>> mirrored;
    for (const auto& x : a) mirrored.push_back({-x[0], x[1]});
    std::vector<Site<2>> sorted_b = b;
    std::sort(mirrored.begin(), mirrored.end());
    std::sort(sorted_b.begin(), sorted_b.end());
    EXPECT_EQ(mirrored, sorted_b);
}

TEST(Aggregation, IncrementalMatchesOneShot) {
    Aggregator<3> agg(ccw_order(3), InitialRule::rho0());
    agg.grow_to(200);
    const auto a = agg.result();
    const auto b = aggregate<3>(ccw_order(3), InitialRule::rho0(), 200);
    EXPECT_EQ(a.cluster, b.cluster);
    EXPECT_EQ(a.steps, b.steps);
    EXPECT_NEAR(unit_ball_volume(2), M_PI, 1e-12);
    EXPECT_NEAR(unit_ball_volume(3), 4.0 * M_PI / 3.0, 1e-12);
}

TEST(BallRun, ShellIsCoveredOnceEnoughParticlesArrive) {
    const auto run = ball_odometer<2>(ccw_order(2), InitialRule::rho0(), 3000, 12.0);
    EXPECT_TRUE(uncovered_shell_sites<2>(run, 8.0).empty());
    EXPECT_EQ(run.absorbed_total(), 3000u);
    const auto thin = ball_odometer<2>(ccw_order(2), InitialRule::rho0(), 1, 12.0);
    EXPECT_FALSE(uncovered_shell_sites<2>(thin, 8.0).empty());
}
