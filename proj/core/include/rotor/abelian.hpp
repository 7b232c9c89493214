#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rotor/random_walk.hpp"

namespace rotor {

/// Finite directed multigraph with rotors. A particle at a non-sink vertex v
/// moves along out[v][rotor[v]], then rotor[v] advances cyclically. Sinks
/// absorb.
struct FiniteRotorGraph {
    std::vector<std::vector<int>> out;  // cyclic out-edge order (targets, repeats allowed)
    std::vector<char> sink;
    std::vector<int> rotor;
    std::vector<std::uint64_t> particles;

    int size() const noexcept { return static_cast<int>(out.size()); }
    /// Throws InvalidArgument on shape errors, a non-sink without out-edges,
    /// a bad rotor index, or a non-sink with no directed path to a sink.
    void validate() const;
    std::uint64_t total_particles() const noexcept;
};

struct Schedule {
    enum class Kind { fifo, lifo, round_robin, random, sequence };
    Kind kind = Kind::fifo;
    std::uint64_t seed = 0;
    std::vector<int> sequence;  // vertex to fire at each step, for Kind::sequence

    static Schedule fifo() { return {Kind::fifo, 0, {}}; }
    static Schedule lifo() { return {Kind::lifo, 0, {}}; }
    static Schedule round_robin() { return {Kind::round_robin, 0, {}}; }
    static Schedule random(std::uint64_t seed) { return {Kind::random, seed, {}}; }
    static Schedule explicit_sequence(std::vector<int> seq) { return {Kind::sequence, 0, std::move(seq)}; }
};

std::string to_string(const Schedule& schedule);

struct StabilizeResult {
    std::vector<std::uint64_t> placement;  // particles per vertex at the end (sinks only)
    std::vector<std::uint64_t> exits;      // firings per vertex
    std::vector<int> rotors;               // final rotor indices
    std::uint64_t steps = 0;

    bool same_outcome(const StabilizeResult& other) const noexcept {
        return placement == other.placement && exits == other.exits && rotors == other.rotors;
    }
};

struct StabilizeOptions {
    std::uint64_t step_budget = 1'000'000'000ULL;
};

/// Fires particles one step at a time in the order the schedule picks until
/// every particle sits on a sink. Throws InvalidArgument if an explicit
/// sequence names an empty vertex or a sink, or ends early; BudgetExceeded
/// past the step budget.
StabilizeResult stabilize(const FiniteRotorGraph& graph, const Schedule& schedule,
                          const StabilizeOptions& options = {});

struct EnumerationResult {
    std::uint64_t leaves = 0;
    std::uint64_t mismatches = 0;  // leaves whose outcome differs from the first
    bool truncated = false;        // stopped at the leaf cap
    StabilizeResult first;
};

/// Depth-first walk over every maximal schedule (choice of occupied non-sink
/// vertex at each step), comparing all leaf outcomes.
EnumerationResult enumerate_schedules(const FiniteRotorGraph& graph,
                                      std::uint64_t leaf_cap = 1'000'000);

/// Non-sink vertices whose exit count differs from initial particles plus
/// incoming firings implied by the exit counts and initial rotors.
std::vector<int> flow_violations(const FiniteRotorGraph& graph, const StabilizeResult& result);

/// P_x(walk first reaches the sinks inside Y), with the walk choosing an
/// out-edge uniformly (parallel edges weighted). Dense LU on the non-sinks.
struct HittingSolution {
    std::vector<double> h;
    double residual = 0.0;  // max |h(u) - mean over out-edges| over non-sinks
};

HittingSolution graph_hitting(const FiniteRotorGraph& graph, const std::vector<int>& target);

struct HolroydProppReport {
    double rotor_mass = 0.0;   // H_r: particles stopped in Y
    double walk_mass = 0.0;    // H_w: expected number for independent walks
    double bound = 0.0;        // sum over non-sinks u and out-edges (u, v) of |H(u) - H(v)|
    double residual = 0.0;
    bool verdict = false;
};

/// Y must be a subset of the sinks. Rotor side uses stabilize with fifo.
HolroydProppReport holroyd_propp_check(const FiniteRotorGraph& graph, const std::vector<int>& target);

/// 3x3 block of Z^2 with its 12 outer boundary sites as sinks. Interior out-
/// edges follow e1, e2, -e1, -e2; every interior rotor starts at `rotation`.
/// Vertices: interior in row-major order from (-1,-1), then boundary sites.
FiniteRotorGraph grid_fixture(int rotation, std::uint64_t particles_at_center);

/// Vertex index of (x, y) in grid_fixture, or -1.
int grid_fixture_vertex(int x, int y);

struct RandomGraphOptions {
    int max_vertices = 12;
    std::uint64_t max_particles = 8;
    bool directed = false;
};

/// Random instance: connected undirected multigraph or directed graph with
/// guaranteed routes to sinks, random cyclic orders, rotors and particles
/// (particles may start on sinks).
FiniteRotorGraph random_rotor_graph(CounterRng& rng, const RandomGraphOptions& options);

/// Line format:
///   rotor-graph 1
///   vertices V
///   sinks k w_1 .. w_k
///   then one line per vertex: index rotor particles degree t_1 .. t_degree
FiniteRotorGraph parse_graph(const std::string& text);
FiniteRotorGraph load_graph(const std::string& path);
std::string format_graph(const FiniteRotorGraph& graph);

}  // namespace rotor
