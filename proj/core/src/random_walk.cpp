#include "rotor/random_walk.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <thread>

#include "rotor/error.hpp"
#include "rotor/region.hpp"

namespace rotor {

namespace {

constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ULL;

std::uint64_t mix(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

}  // namespace

CounterRng::CounterRng(std::uint64_t seed, std::uint64_t stream) noexcept
    : key_(mix(mix(seed) ^ (stream * 0xD1B54A32D192ED03ULL + 0x8CB92BA72F3D8DD7ULL))) {}

std::uint64_t CounterRng::next() noexcept {
    ++counter_;
    return mix(key_ + counter_ * kGamma);
}

std::uint64_t CounterRng::below(std::uint64_t n) noexcept {
    auto m = static_cast<unsigned __int128>(next()) * n;
    auto low = static_cast<std::uint64_t>(m);
    if (low < n) {
        const std::uint64_t threshold = -n % n;
        while (low < threshold) {
            m = static_cast<unsigned __int128>(next()) * n;
            low = static_cast<std::uint64_t>(m);
        }
    }
    return static_cast<std::uint64_t>(m >> 64);
}

std::int64_t max_cube_half_width(int d) {
    switch (d) {
        case 3: return 32;
        case 4: return 16;
        case 5: return 8;
        default: throw InvalidArgument("cube exit laws exist for d in {3, 4, 5}");
    }
}

namespace {

struct CubeLaw {
    std::int64_t half = 0;
    std::vector<double> pmf;
    std::vector<double> cdf;
};

const CubeLaw& cube_law(int d, std::int64_t half) {
    static std::mutex mu;
    static std::map<std::pair<int, std::int64_t>, std::unique_ptr<CubeLaw>> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto& slot = cache[{d, half}];
    if (slot) return *slot;

    GridRegion region = GridRegion::cube(d, half);
    std::vector<double> source(region.box_size(), 0.0);
    const std::vector<std::int64_t> origin(d, 0);
    source[static_cast<std::size_t>(region.index(origin))] = 1.0;
    SolveOptions opts;
    opts.tolerance = 1e-13;
    const GridField g = solve_dirichlet(std::move(region), source, {}, opts);

    auto law = std::make_unique<CubeLaw>();
    law->half = half;
    const std::int64_t side = 2 * half + 1;
    std::size_t count = 1;
    for (int i = 1; i < d; ++i) count *= static_cast<std::size_t>(side);
    law->pmf.resize(count);
    std::vector<std::int64_t> p(d, 0);
    p[0] = half;
    double total = 0.0;
    for (std::size_t k = 0; k < count; ++k) {
        std::size_t rest = k;
        for (int i = 1; i < d; ++i) {
            p[i] = static_cast<std::int64_t>(rest % static_cast<std::size_t>(side)) - half;
            rest /= static_cast<std::size_t>(side);
        }
        law->pmf[k] = g.at(p);
        total += law->pmf[k];
    }
    law->cdf.resize(count);
    double acc = 0.0;
    for (std::size_t k = 0; k < count; ++k) {
        law->pmf[k] /= total;
        acc += law->pmf[k];
        law->cdf[k] = acc;
    }
    law->cdf.back() = 1.0;
    slot = std::move(law);
    return *slot;
}

template <int D>
struct TrialRunner {
    double radius;
    bool accelerate;
    std::vector<const CubeLaw*> laws;  // ascending half-width
    double far_start = 0.0;            // 0 disables the far-field shortcut
    double far_return = 0.0;

    TrialRunner(double r, bool acc) : radius(r), accelerate(acc) {
        if (!accelerate) return;
        const std::int64_t lmax = max_cube_half_width(D);
        for (std::int64_t l = 1; l <= lmax; l *= 2) laws.push_back(&cube_law(D, l));
        const double s0 = 8.0 * static_cast<double>(lmax);
        if (radius > 4.0 * s0) {
            far_start = s0;
            far_return = s0 / 2.0;
        }
    }

    static void single_step(std::array<std::int64_t, D>& x, CounterRng& rng) {
        const auto k = rng.below(2 * D);
        x[k >> 1] += (k & 1) ? -1 : 1;
    }

    // Returns true on escape.
    bool run(CounterRng& rng, std::uint64_t& moves) const {
        std::array<std::int64_t, D> x{};
        const double r2 = radius * radius;
        single_step(x, rng);
        ++moves;
        for (;;) {
            std::int64_t inf = 0;
            double n2 = 0.0;
            for (int i = 0; i < D; ++i) {
                inf = std::max(inf, std::abs(x[i]));
                n2 += static_cast<double>(x[i]) * static_cast<double>(x[i]);
            }
            if (inf == 0) return false;
            if (n2 >= r2) return true;
            ++moves;
            if (accelerate) {
                const double n = std::sqrt(n2);
                if (far_start > 0.0 && n >= far_start) {
                    // Brownian return probability to radius far_return before radius.
                    const double e = 2.0 - D;
                    const double p = (std::pow(n, e) - std::pow(radius, e)) /
                                     (std::pow(far_return, e) - std::pow(radius, e));
                    if (rng.uniform() >= p) return true;
                    for (int i = 0; i < D; ++i) {
                        x[i] = std::llround(static_cast<double>(x[i]) * far_return / n);
                    }
                    continue;
                }
                const CubeLaw* law = nullptr;
                for (auto it = laws.rbegin(); it != laws.rend(); ++it) {
                    const auto l = static_cast<double>((*it)->half);
                    const double reach = std::sqrt((l + 1) * (l + 1) + (D - 1) * l * l);
                    if ((*it)->half + 1 <= inf && n + reach < radius) {
                        law = *it;
                        break;
                    }
                }
                if (law != nullptr) {
                    const auto face = rng.below(2 * D);
                    const int axis = static_cast<int>(face >> 1);
                    const std::int64_t sign = (face & 1) ? -1 : 1;
                    const double u = rng.uniform();
                    auto k = static_cast<std::size_t>(
                        std::upper_bound(law->cdf.begin(), law->cdf.end(), u) - law->cdf.begin());
                    if (k >= law->cdf.size()) k = law->cdf.size() - 1;
                    const std::int64_t side = 2 * law->half + 1;
                    x[axis] += sign * (law->half + 1);
                    for (int i = 0; i < D; ++i) {
                        if (i == axis) continue;
                        x[i] += static_cast<std::int64_t>(k % static_cast<std::size_t>(side)) - law->half;
                        k /= static_cast<std::size_t>(side);
                    }
                    continue;
                }
            }
            single_step(x, rng);
        }
    }
};

struct ShardResult {
    std::uint64_t escaped = 0;
    std::uint64_t moves = 0;
};

template <int D>
AlphaEstimate run_mc(std::uint64_t trials, double radius, const McOptions& options) {
    const TrialRunner<D> runner(radius, options.accelerate);
    std::vector<ShardResult> shards(kMcShards);
    auto work = [&](int shard) {
        std::uint64_t count = trials / kMcShards + (static_cast<std::uint64_t>(shard) < trials % kMcShards ? 1 : 0);
        CounterRng rng(options.seed, static_cast<std::uint64_t>(shard));
        ShardResult res;
        for (std::uint64_t t = 0; t < count; ++t) {
            if (runner.run(rng, res.moves)) ++res.escaped;
        }
        shards[static_cast<std::size_t>(shard)] = res;
    };
    unsigned threads = options.threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : options.threads;
    threads = std::min<unsigned>(threads, kMcShards);
    if (threads <= 1) {
        for (int s = 0; s < kMcShards; ++s) work(s);
    } else {
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < threads; ++t) {
            pool.emplace_back([&, t] {
                for (int s = static_cast<int>(t); s < kMcShards; s += static_cast<int>(threads)) work(s);
            });
        }
        for (auto& th : pool) th.join();
    }
    AlphaEstimate est;
    est.d = D;
    est.trials = trials;
    est.radius = radius;
    est.seed = options.seed;
    for (const auto& s : shards) {
        est.escaped += s.escaped;
        est.moves += s.moves;
    }
    est.estimate = static_cast<double>(est.escaped) / static_cast<double>(trials);
    est.std_error = std::sqrt(est.estimate * (1.0 - est.estimate) / static_cast<double>(trials));
    est.method = options.accelerate ? (runner.far_start > 0.0 ? "cube-jumps+radial-far-field" : "cube-jumps")
                                    : "single-steps";
    return est;
}

}  // namespace

const std::vector<double>& cube_face_law(int d, std::int64_t half) {
    if (d < 2 || d > 5) throw InvalidArgument("cube exit laws exist for d in {2, .., 5}");
    if (half < 1) throw InvalidArgument("cube half-width must be at least 1");
    return cube_law(d, half).pmf;
}

AlphaEstimate mc_alpha(int d, std::uint64_t trials, double radius, const McOptions& options) {
    if (d < 3) throw InvalidArgument("simple random walk is recurrent for d < 3");
    if (d > 5) throw InvalidArgument("dimension must be at most 5");
    if (trials < 1) throw InvalidArgument("trials must be at least 1");
    if (!(radius >= 10.0)) throw InvalidArgument("confinement radius must be at least 10");
    switch (d) {
        case 3: return run_mc<3>(trials, radius, options);
        case 4: return run_mc<4>(trials, radius, options);
        default: return run_mc<5>(trials, radius, options);
    }
}

AlphaReport mc_alpha_report(int d, std::uint64_t trials, double radius, const McOptions& options) {
    return {mc_alpha(d, trials, radius, options), mc_alpha(d, trials, 2.0 * radius, options)};
}

double direction_chi_square(int d, std::uint64_t seed, std::uint64_t draws) {
    if (d < 1 || draws == 0) throw InvalidArgument("need d >= 1 and draws >= 1");
    const auto k = static_cast<std::uint64_t>(2 * d);
    std::vector<std::uint64_t> counts(k, 0);
    CounterRng rng(seed, 0);
    for (std::uint64_t i = 0; i < draws; ++i) ++counts[rng.below(k)];
    const double expected = static_cast<double>(draws) / static_cast<double>(k);
    double chi = 0.0;
    for (auto c : counts) chi += (static_cast<double>(c) - expected) * (static_cast<double>(c) - expected) / expected;
    return chi;
}

double chi_square_critical_001(int k) {
    static constexpr std::array<double, 9> table{10.828, 13.816, 16.266, 18.467, 20.515,
                                                 22.458, 24.322, 26.124, 27.877};
    if (k < 1 || k > 9) throw InvalidArgument("tabulated for 1 <= k <= 9");
    return table[static_cast<std::size_t>(k - 1)];
}

}  // namespace rotor
