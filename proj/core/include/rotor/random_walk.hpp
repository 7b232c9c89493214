#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace rotor {

/// Counter-based generator: output k of stream s is SplitMix64 applied to
/// key(seed, s) + k * golden_gamma. Streams never share a counter sequence.
class CounterRng {
  public:
    CounterRng(std::uint64_t seed, std::uint64_t stream) noexcept;

    std::uint64_t next() noexcept;
    /// Uniform in [0, 1) with 53 random bits.
    double uniform() noexcept { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
    /// Uniform in [0, n), unbiased (multiply-shift with rejection).
    std::uint64_t below(std::uint64_t n) noexcept;
    std::uint64_t counter() const noexcept { return counter_; }

  private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

struct McOptions {
    std::uint64_t seed = 1;
    /// Exact cube jumps plus the radial far-field shortcut. When false every
    /// trial is a plain step-by-step walk.
    bool accelerate = true;
    /// Worker threads; 0 = hardware concurrency. Results do not depend on it.
    unsigned threads = 1;
};

inline constexpr int kMcShards = 64;

struct AlphaEstimate {
    int d = 3;
    std::uint64_t trials = 0;
    double radius = 0.0;
    std::uint64_t escaped = 0;
    double estimate = 0.0;
    double std_error = 0.0;
    std::uint64_t seed = 0;
    std::uint64_t moves = 0;  // single steps + cube jumps + far-field moves
    std::string method;
};

struct AlphaReport {
    AlphaEstimate at_radius;
    AlphaEstimate at_double_radius;
};

/// Fraction of simple random walks from the origin that leave B_radius
/// (reach |x| >= radius) before returning to the origin, with binomial
/// standard error. Requires d in {3, 4, 5}, trials >= 1, radius >= 10.
AlphaEstimate mc_alpha(int d, std::uint64_t trials, double radius, const McOptions& options = {});

/// mc_alpha at radius and 2 * radius with the same seed.
AlphaReport mc_alpha_report(int d, std::uint64_t trials, double radius, const McOptions& options = {});

/// Chi-square statistic of `draws` uniform direction choices among 2d,
/// drawn the same way the walks draw single steps.
double direction_chi_square(int d, std::uint64_t seed, std::uint64_t draws);

/// Upper 0.001 quantile of the chi-square law with k degrees of freedom,
/// tabulated for k <= 9.
double chi_square_critical_001(int k);

/// Largest cube half-width with a precomputed exit law in dimension d.
std::int64_t max_cube_half_width(int d);

/// Exit law on the +e_1 face of [-L, L]^d from its centre: entry c is the
/// probability, given exit through that face, of leaving at (L+1, c) with c
/// enumerated in lexicographic order over [-L, L]^{d-1}.
const std::vector<double>& cube_face_law(int d, std::int64_t half);

}  // namespace rotor
