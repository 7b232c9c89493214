#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rotor/region.hpp"

namespace rotor {

/// Largest interior accepted by the exact solvers.
inline constexpr std::size_t kMaxExactSites = 5'000'000;

enum class GreenForm { asymptotic_d2, asymptotic_dge3, exact_solve };

std::string to_string(GreenForm form);

struct GreenEstimate {
    int d = 2;
    double r = 0.0;
    std::vector<std::int64_t> at;
    double value = 0.0;
    GreenForm form = GreenForm::exact_solve;
};

/// Measured constants with uncertainties, stored as "key = value +- error"
/// lines. '#' starts a comment.
class Calibration {
  public:
    struct Entry {
        double value = 0.0;
        double error = 0.0;
        std::string note;
    };

    void set(const std::string& key, double value, double error, std::string note = {});
    std::optional<Entry> get(const std::string& key) const;
    bool has(const std::string& key) const { return entries_.count(key) != 0; }
    const std::map<std::string, Entry>& entries() const noexcept { return entries_; }

    static Calibration parse(const std::string& text);
    static Calibration load(const std::string& path);
    std::string to_text() const;

  private:
    std::map<std::string, Entry> entries_;
};

/// Leading-order G_r(0, x). d = 2: (2/pi) log r at the origin and
/// (2/pi)(log r - log|x|) elsewhere. d >= 3: a_d(|x|^{2-d} - r^{2-d}) off the
/// origin and g00_d - a_d r^{2-d} at the origin, both read from `calibration`
/// (keys a_<d>, g00_<d>); throws InvalidArgument if missing.
GreenEstimate green_asymptotic(int d, double r, std::span<const std::int64_t> x,
                               const Calibration* calibration = nullptr);

/// G_r(., y) over B_r: expected visits to y before leaving B_r, counting
/// time 0. Solves u - mean(u) = 1_{y} with zero data on the outer boundary.
GridField green_field(int d, double r, std::span<const std::int64_t> y,
                      const SolveOptions& options = {});

/// G_r(x, y). Both points must lie in B_r.
double exact_green(int d, double r, std::span<const std::int64_t> x,
                   std::span<const std::int64_t> y, const SolveOptions& options = {});

/// Harmonic extension of the indicator of `target` (a subset of the region's
/// boundary): the probability that simple random walk from x first hits the
/// boundary inside `target`.
GridField hitting_field(const GridRegion& region, const std::vector<GridRegion::Point>& target,
                        const SolveOptions& options = {});

/// Sum over interior u with |u - center| <= rho of sum over the 2d neighbours
/// v of |f(u) - f(v)|. Negative rho means no distance cut.
double gradient_sum(const GridField& field, std::span<const std::int64_t> center, double rho);
double gradient_sum(const GridField& field);

/// Fits G_r(0,x) ~ a (|x|^{2-d} - r^{2-d}) over fit_lo <= |x| <= fit_hi.
Calibration::Entry fit_green_constant(int d, double r, double fit_lo, double fit_hi);

struct CalibrationOptions {
    bool include_d3 = true;  // a_3, g00_3, alpha_3 (large solve)
    double d3_radius = 60.0;
};

/// Recomputes every constant: offset_2, a_3, g00_3, alpha_3, J_2, Jprime_2,
/// C_gradient_2, C_gradient_3.
Calibration calibrate(const CalibrationOptions& options = {});

/// G_r(0,0) - (2/pi) log r in d = 2.
double green_offset_d2(double r);

/// max over interior x of H(x)|x - y| for B_rho with y = (rho, 0, ..).
double hitting_decay_constant(int d, double rho);

/// gradient_sum of the same hitting field over all of B_rho.
double hitting_gradient_total(int d, double rho);

/// Sum over y in B_r with |y| <= rho of sum_{z~y} |G_r(0,y) - G_r(0,z)|,
/// divided by rho.
double green_gradient_ratio(int d, double r, double rho);

}  // namespace rotor
