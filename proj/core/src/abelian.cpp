#include "rotor/abelian.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <fstream>
#include <functional>
#include <sstream>

#include <Eigen/Dense>

#include "rotor/error.hpp"

namespace rotor {

void FiniteRotorGraph::validate() const {
    const auto n = out.size();
    if (sink.size() != n || rotor.size() != n || particles.size() != n) {
        throw InvalidArgument("graph arrays disagree in length");
    }
    for (std::size_t v = 0; v < n; ++v) {
        for (int w : out[v]) {
            if (w < 0 || static_cast<std::size_t>(w) >= n) throw InvalidArgument("edge target out of range");
        }
        if (sink[v]) continue;
        if (out[v].empty()) throw InvalidArgument("non-sink vertex " + std::to_string(v) + " has no out-edges");
        if (rotor[v] < 0 || static_cast<std::size_t>(rotor[v]) >= out[v].size()) {
            throw InvalidArgument("rotor of vertex " + std::to_string(v) + " is not a valid out-edge index");
        }
    }
    // Reverse reachability from the sinks.
    std::vector<std::vector<int>> in(n);
    for (std::size_t v = 0; v < n; ++v) {
        if (sink[v]) continue;
        for (int w : out[v]) in[static_cast<std::size_t>(w)].push_back(static_cast<int>(v));
    }
    std::vector<char> seen(n, 0);
    std::deque<int> queue;
    for (std::size_t v = 0; v < n; ++v) {
        if (sink[v]) {
            seen[v] = 1;
            queue.push_back(static_cast<int>(v));
        }
    }
    while (!queue.empty()) {
        const int w = queue.front();
        queue.pop_front();
        for (int v : in[static_cast<std::size_t>(w)]) {
            if (!seen[static_cast<std::size_t>(v)]) {
                seen[static_cast<std::size_t>(v)] = 1;
                queue.push_back(v);
            }
        }
    }
    for (std::size_t v = 0; v < n; ++v) {
        if (!seen[v]) throw InvalidArgument("vertex " + std::to_string(v) + " has no path to a sink");
    }
}

std::uint64_t FiniteRotorGraph::total_particles() const noexcept {
    std::uint64_t total = 0;
    for (auto p : particles) total += p;
    return total;
}

std::string to_string(const Schedule& schedule) {
    switch (schedule.kind) {
        case Schedule::Kind::fifo: return "fifo";
        case Schedule::Kind::lifo: return "lifo";
        case Schedule::Kind::round_robin: return "round-robin";
        case Schedule::Kind::random: return "random(" + std::to_string(schedule.seed) + ")";
        case Schedule::Kind::sequence: return "sequence[" + std::to_string(schedule.sequence.size()) + "]";
    }
    return "unknown";
}

namespace {

struct Machine {
    const FiniteRotorGraph& g;
    std::vector<std::uint64_t> count;
    std::vector<std::uint64_t> exits;
    std::vector<int> rotors;
    std::uint64_t steps = 0;
    std::uint64_t active = 0;  // particles on non-sinks
    std::uint64_t budget;

    Machine(const FiniteRotorGraph& graph, std::uint64_t step_budget)
        : g(graph), count(graph.particles), exits(graph.out.size(), 0), rotors(graph.rotor),
          budget(step_budget) {
        for (std::size_t v = 0; v < count.size(); ++v) {
            if (!g.sink[v]) active += count[v];
        }
    }

    int fire(int v) {
        const auto uv = static_cast<std::size_t>(v);
        if (steps >= budget) throw BudgetExceeded("stabilization exceeded the step budget", budget);
        const int w = g.out[uv][static_cast<std::size_t>(rotors[uv])];
        rotors[uv] = (rotors[uv] + 1) % static_cast<int>(g.out[uv].size());
        ++exits[uv];
        --count[uv];
        ++count[static_cast<std::size_t>(w)];
        ++steps;
        if (g.sink[static_cast<std::size_t>(w)]) --active;
        return w;
    }

    void undo(int v, int w) {
        const auto uv = static_cast<std::size_t>(v);
        const int deg = static_cast<int>(g.out[uv].size());
        rotors[uv] = (rotors[uv] + deg - 1) % deg;
        --exits[uv];
        ++count[uv];
        --count[static_cast<std::size_t>(w)];
        --steps;
        if (g.sink[static_cast<std::size_t>(w)]) ++active;
    }

    StabilizeResult result() const { return {count, exits, rotors, steps}; }
};

}  // namespace

StabilizeResult stabilize(const FiniteRotorGraph& graph, const Schedule& schedule,
                          const StabilizeOptions& options) {
    graph.validate();
    Machine m(graph, options.step_budget);
    const int n = graph.size();
    switch (schedule.kind) {
        case Schedule::Kind::fifo:
        case Schedule::Kind::lifo: {
            std::deque<int> tokens;
            for (int v = 0; v < n; ++v) {
                if (graph.sink[static_cast<std::size_t>(v)]) continue;
                for (std::uint64_t k = 0; k < graph.particles[static_cast<std::size_t>(v)]; ++k) tokens.push_back(v);
            }
            const bool fifo = schedule.kind == Schedule::Kind::fifo;
            while (!tokens.empty()) {
                int v;
                if (fifo) {
                    v = tokens.front();
                    tokens.pop_front();
                } else {
                    v = tokens.back();
                    tokens.pop_back();
                }
                const int w = m.fire(v);
                if (!graph.sink[static_cast<std::size_t>(w)]) tokens.push_back(w);
            }
            break;
        }
        case Schedule::Kind::round_robin: {
            int cursor = n - 1;
            while (m.active > 0) {
                int v = cursor;
                do {
                    v = (v + 1) % n;
                } while (graph.sink[static_cast<std::size_t>(v)] || m.count[static_cast<std::size_t>(v)] == 0);
                m.fire(v);
                cursor = v;
            }
            break;
        }
        case Schedule::Kind::random: {
            CounterRng rng(schedule.seed, 0);
            std::vector<int> occupied;
            std::vector<int> slot(static_cast<std::size_t>(n), -1);
            auto add = [&](int v) {
                slot[static_cast<std::size_t>(v)] = static_cast<int>(occupied.size());
                occupied.push_back(v);
            };
            auto remove = [&](int v) {
                const int s = slot[static_cast<std::size_t>(v)];
                const int last = occupied.back();
                occupied[static_cast<std::size_t>(s)] = last;
                slot[static_cast<std::size_t>(last)] = s;
                occupied.pop_back();
                slot[static_cast<std::size_t>(v)] = -1;
            };
            for (int v = 0; v < n; ++v) {
                if (!graph.sink[static_cast<std::size_t>(v)] && m.count[static_cast<std::size_t>(v)] > 0) add(v);
            }
            while (!occupied.empty()) {
                const int v = occupied[rng.below(occupied.size())];
                const int w = m.fire(v);
                if (m.count[static_cast<std::size_t>(v)] == 0) remove(v);
                if (!graph.sink[static_cast<std::size_t>(w)] && slot[static_cast<std::size_t>(w)] < 0) add(w);
            }
            break;
        }
        case Schedule::Kind::sequence: {
            for (std::size_t i = 0; i < schedule.sequence.size(); ++i) {
                const int v = schedule.sequence[i];
                if (v < 0 || v >= n) throw InvalidArgument("schedule names a vertex out of range");
                if (graph.sink[static_cast<std::size_t>(v)]) {
                    throw InvalidArgument("schedule step " + std::to_string(i) + " names sink " + std::to_string(v));
                }
                if (m.count[static_cast<std::size_t>(v)] == 0) {
                    throw InvalidArgument("schedule step " + std::to_string(i) + " names empty vertex " +
                                          std::to_string(v));
                }
                m.fire(v);
            }
            if (m.active > 0) throw InvalidArgument("schedule ended before the particles stopped");
            break;
        }
    }
    return m.result();
}

EnumerationResult enumerate_schedules(const FiniteRotorGraph& graph, std::uint64_t leaf_cap) {
    graph.validate();
    Machine m(graph, ~0ULL);
    EnumerationResult res;
    const int n = graph.size();
    std::function<void()> dfs = [&]() {
        if (res.truncated) return;
        bool any = false;
        for (int v = 0; v < n && !res.truncated; ++v) {
            if (graph.sink[static_cast<std::size_t>(v)] || m.count[static_cast<std::size_t>(v)] == 0) continue;
            any = true;
            const int w = m.fire(v);
            dfs();
            m.undo(v, w);
        }
        if (any) return;
        if (res.leaves == 0) {
            res.first = m.result();
        } else if (!res.first.same_outcome(m.result())) {
            ++res.mismatches;
        }
        ++res.leaves;
        if (res.leaves >= leaf_cap) res.truncated = true;
    };
    dfs();
    return res;
}

std::vector<int> flow_violations(const FiniteRotorGraph& graph, const StabilizeResult& result) {
    const auto n = graph.out.size();
    std::vector<std::uint64_t> inflow(graph.particles);
    for (std::size_t u = 0; u < n; ++u) {
        if (graph.sink[u] || graph.out[u].empty()) continue;
        const auto deg = graph.out[u].size();
        for (std::uint64_t j = 0; j < result.exits[u]; ++j) {
            const auto edge = (static_cast<std::size_t>(graph.rotor[u]) + j) % deg;
            ++inflow[static_cast<std::size_t>(graph.out[u][edge])];
        }
    }
    std::vector<int> bad;
    for (std::size_t v = 0; v < n; ++v) {
        if (!graph.sink[v] && inflow[v] != result.exits[v]) bad.push_back(static_cast<int>(v));
        if (graph.sink[v] && inflow[v] != result.placement[v]) bad.push_back(static_cast<int>(v));
    }
    return bad;
}

HittingSolution graph_hitting(const FiniteRotorGraph& graph, const std::vector<int>& target) {
    graph.validate();
    const int n = graph.size();
    std::vector<double> indicator(static_cast<std::size_t>(n), 0.0);
    for (int y : target) {
        if (y < 0 || y >= n || !graph.sink[static_cast<std::size_t>(y)]) {
            throw InvalidArgument("target vertex " + std::to_string(y) + " is not a sink");
        }
        indicator[static_cast<std::size_t>(y)] = 1.0;
    }
    std::vector<int> slot(static_cast<std::size_t>(n), -1);
    int m = 0;
    for (int v = 0; v < n; ++v) {
        if (!graph.sink[static_cast<std::size_t>(v)]) slot[static_cast<std::size_t>(v)] = m++;
    }
    if (m > 4000) throw SolverError("graph too large for a dense solve");
    Eigen::MatrixXd a = Eigen::MatrixXd::Identity(m, m);
    Eigen::VectorXd b = Eigen::VectorXd::Zero(m);
    for (int v = 0; v < n; ++v) {
        const int i = slot[static_cast<std::size_t>(v)];
        if (i < 0) continue;
        const auto& edges = graph.out[static_cast<std::size_t>(v)];
        const double w = 1.0 / static_cast<double>(edges.size());
        for (int t : edges) {
            const int j = slot[static_cast<std::size_t>(t)];
            if (j >= 0) {
                a(i, j) -= w;
            } else {
                b(i) += w * indicator[static_cast<std::size_t>(t)];
            }
        }
    }
    const Eigen::VectorXd x = a.partialPivLu().solve(b);
    HittingSolution sol;
    sol.h = indicator;
    for (int v = 0; v < n; ++v) {
        const int i = slot[static_cast<std::size_t>(v)];
        if (i >= 0) sol.h[static_cast<std::size_t>(v)] = x(i);
    }
    for (int v = 0; v < n; ++v) {
        if (graph.sink[static_cast<std::size_t>(v)]) continue;
        const auto& edges = graph.out[static_cast<std::size_t>(v)];
        double mean = 0.0;
        for (int t : edges) mean += sol.h[static_cast<std::size_t>(t)];
        mean /= static_cast<double>(edges.size());
        sol.residual = std::max(sol.residual, std::abs(sol.h[static_cast<std::size_t>(v)] - mean));
    }
    return sol;
}

HolroydProppReport holroyd_propp_check(const FiniteRotorGraph& graph, const std::vector<int>& target) {
    const auto hit = graph_hitting(graph, target);
    const auto result = stabilize(graph, Schedule::fifo());
    HolroydProppReport rep;
    rep.residual = hit.residual;
    for (int y : target) rep.rotor_mass += static_cast<double>(result.placement[static_cast<std::size_t>(y)]);
    for (int v = 0; v < graph.size(); ++v) {
        rep.walk_mass += static_cast<double>(graph.particles[static_cast<std::size_t>(v)]) *
                         hit.h[static_cast<std::size_t>(v)];
        if (graph.sink[static_cast<std::size_t>(v)]) continue;
        for (int t : graph.out[static_cast<std::size_t>(v)]) {
            rep.bound += std::abs(hit.h[static_cast<std::size_t>(v)] - hit.h[static_cast<std::size_t>(t)]);
        }
    }
    rep.verdict = std::abs(rep.rotor_mass - rep.walk_mass) <= rep.bound + 1e-9;
    return rep;
}

namespace {

struct GridLayout {
    std::vector<std::pair<int, int>> sites;

    GridLayout() {
        for (int y = -1; y <= 1; ++y) {
            for (int x = -1; x <= 1; ++x) sites.emplace_back(x, y);
        }
        for (int y = -2; y <= 2; ++y) {
            for (int x = -2; x <= 2; ++x) {
                const bool inner = std::abs(x) <= 1 && std::abs(y) <= 1;
                const bool adjacent = (std::abs(x) == 2 && std::abs(y) <= 1) || (std::abs(y) == 2 && std::abs(x) <= 1);
                if (!inner && adjacent) sites.emplace_back(x, y);
            }
        }
    }
};

const GridLayout& layout() {
    static const GridLayout l;
    return l;
}

}  // namespace

int grid_fixture_vertex(int x, int y) {
    const auto& s = layout().sites;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i].first == x && s[i].second == y) return static_cast<int>(i);
    }
    return -1;
}

FiniteRotorGraph grid_fixture(int rotation, std::uint64_t particles_at_center) {
    if (rotation < 0 || rotation > 3) throw InvalidArgument("rotation must be in 0..3");
    const auto& s = layout().sites;
    FiniteRotorGraph g;
    const std::size_t n = s.size();
    g.out.resize(n);
    g.sink.assign(n, 0);
    g.rotor.assign(n, 0);
    g.particles.assign(n, 0);
    static constexpr int dx[4] = {1, 0, -1, 0};
    static constexpr int dy[4] = {0, 1, 0, -1};
    for (std::size_t i = 0; i < n; ++i) {
        const auto [x, y] = s[i];
        if (std::abs(x) == 2 || std::abs(y) == 2) {
            g.sink[i] = 1;
            continue;
        }
        for (int k = 0; k < 4; ++k) g.out[i].push_back(grid_fixture_vertex(x + dx[k], y + dy[k]));
        g.rotor[i] = rotation;
    }
    g.particles[static_cast<std::size_t>(grid_fixture_vertex(0, 0))] = particles_at_center;
    return g;
}

FiniteRotorGraph random_rotor_graph(CounterRng& rng, const RandomGraphOptions& options) {
    if (options.max_vertices < 2) throw InvalidArgument("need at least two vertices");
    const int n = 2 + static_cast<int>(rng.below(static_cast<std::uint64_t>(options.max_vertices - 1)));
    const int sinks = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(std::max(1, n / 3))));
    const int inner = n - sinks;  // vertices [0, inner) are non-sinks
    FiniteRotorGraph g;
    g.out.resize(static_cast<std::size_t>(n));
    g.sink.assign(static_cast<std::size_t>(n), 0);
    g.rotor.assign(static_cast<std::size_t>(n), 0);
    g.particles.assign(static_cast<std::size_t>(n), 0);
    for (int v = inner; v < n; ++v) g.sink[static_cast<std::size_t>(v)] = 1;

    auto add_edge = [&](int u, int v) {
        if (!g.sink[static_cast<std::size_t>(u)]) g.out[static_cast<std::size_t>(u)].push_back(v);
    };
    if (!options.directed) {
        // Random spanning tree plus extra edges (parallel edges allowed).
        std::vector<int> order(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
        for (int i = n - 1; i > 0; --i) {
            std::swap(order[static_cast<std::size_t>(i)], order[rng.below(static_cast<std::uint64_t>(i + 1))]);
        }
        for (int i = 1; i < n; ++i) {
            const int u = order[static_cast<std::size_t>(i)];
            const int v = order[rng.below(static_cast<std::uint64_t>(i))];
            add_edge(u, v);
            add_edge(v, u);
        }
        const auto extra = rng.below(static_cast<std::uint64_t>(n) + 1);
        for (std::uint64_t k = 0; k < extra; ++k) {
            const int u = static_cast<int>(rng.below(static_cast<std::uint64_t>(n)));
            const int v = static_cast<int>(rng.below(static_cast<std::uint64_t>(n)));
            if (u == v) continue;
            add_edge(u, v);
            add_edge(v, u);
        }
    } else {
        // Rank the non-sinks; each gets one edge to a later vertex (sinks come last).
        std::vector<int> rank(static_cast<std::size_t>(inner));
        for (int i = 0; i < inner; ++i) rank[static_cast<std::size_t>(i)] = i;
        for (int i = inner - 1; i > 0; --i) {
            std::swap(rank[static_cast<std::size_t>(i)], rank[rng.below(static_cast<std::uint64_t>(i + 1))]);
        }
        for (int p = 0; p < inner; ++p) {
            const int u = rank[static_cast<std::size_t>(p)];
            const auto later = static_cast<std::uint64_t>(n - p - 1);
            const auto pick = static_cast<int>(rng.below(later));
            const int v = pick < inner - p - 1 ? rank[static_cast<std::size_t>(p + 1 + pick)]
                                               : inner + (pick - (inner - p - 1));
            add_edge(u, v);
            const auto more = rng.below(4);
            for (std::uint64_t k = 0; k < more; ++k) add_edge(u, static_cast<int>(rng.below(static_cast<std::uint64_t>(n))));
        }
    }
    for (int v = 0; v < inner; ++v) {
        auto& edges = g.out[static_cast<std::size_t>(v)];
        for (std::size_t i = edges.size(); i > 1; --i) std::swap(edges[i - 1], edges[rng.below(i)]);
        g.rotor[static_cast<std::size_t>(v)] = static_cast<int>(rng.below(edges.size()));
    }
    const auto total = rng.below(options.max_particles + 1);
    for (std::uint64_t k = 0; k < total; ++k) ++g.particles[rng.below(static_cast<std::uint64_t>(n))];
    return g;
}

FiniteRotorGraph parse_graph(const std::string& text) {
    std::istringstream in(text);
    std::vector<std::string> lines;
    for (std::string line; std::getline(in, line);) {
        if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
        if (line.find_first_not_of(" \t\r") != std::string::npos) lines.push_back(line);
    }
    auto fail = [](const std::string& what) -> FiniteRotorGraph { throw InvalidArgument("graph fixture: " + what); };
    if (lines.size() < 3) return fail("too few lines");
    std::string tag;
    int version = 0;
    if (!(std::istringstream(lines[0]) >> tag >> version) || tag != "rotor-graph" || version != 1) {
        return fail("missing 'rotor-graph 1' header");
    }
    int n = 0;
    if (!(std::istringstream(lines[1]) >> tag >> n) || tag != "vertices" || n < 1) return fail("bad vertices line");
    FiniteRotorGraph g;
    g.out.resize(static_cast<std::size_t>(n));
    g.sink.assign(static_cast<std::size_t>(n), 0);
    g.rotor.assign(static_cast<std::size_t>(n), 0);
    g.particles.assign(static_cast<std::size_t>(n), 0);
    {
        std::istringstream s(lines[2]);
        int k = 0;
        if (!(s >> tag >> k) || tag != "sinks" || k < 0) return fail("bad sinks line");
        for (int i = 0; i < k; ++i) {
            int w = -1;
            if (!(s >> w) || w < 0 || w >= n) return fail("bad sink index");
            g.sink[static_cast<std::size_t>(w)] = 1;
        }
    }
    if (static_cast<int>(lines.size()) != 3 + n) return fail("expected one line per vertex");
    std::vector<char> seen(static_cast<std::size_t>(n), 0);
    for (int i = 0; i < n; ++i) {
        std::istringstream s(lines[static_cast<std::size_t>(3 + i)]);
        int v = -1, rot = 0, deg = 0;
        std::uint64_t particles = 0;
        if (!(s >> v >> rot >> particles >> deg) || v < 0 || v >= n || deg < 0) return fail("bad vertex line");
        if (seen[static_cast<std::size_t>(v)]) return fail("duplicate vertex line");
        seen[static_cast<std::size_t>(v)] = 1;
        auto& edges = g.out[static_cast<std::size_t>(v)];
        for (int k = 0; k < deg; ++k) {
            int t = -1;
            if (!(s >> t)) return fail("missing out-edge");
            edges.push_back(t);
        }
        g.rotor[static_cast<std::size_t>(v)] = rot;
        g.particles[static_cast<std::size_t>(v)] = particles;
    }
    g.validate();
    return g;
}

FiniteRotorGraph load_graph(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvalidArgument("cannot read graph fixture " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_graph(buf.str());
}

std::string format_graph(const FiniteRotorGraph& graph) {
    std::ostringstream out;
    out << "rotor-graph 1\nvertices " << graph.size() << "\nsinks";
    std::vector<int> sinks;
    for (int v = 0; v < graph.size(); ++v) {
        if (graph.sink[static_cast<std::size_t>(v)]) sinks.push_back(v);
    }
    out << ' ' << sinks.size();
    for (int w : sinks) out << ' ' << w;
    out << '\n';
    for (int v = 0; v < graph.size(); ++v) {
        const auto uv = static_cast<std::size_t>(v);
        out << v << ' ' << graph.rotor[uv] << ' ' << graph.particles[uv] << ' ' << graph.out[uv].size();
        for (int t : graph.out[uv]) out << ' ' << t;
        out << '\n';
    }
    return out.str();
}

}  // namespace rotor
