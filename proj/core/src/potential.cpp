#include "rotor/potential.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <sstream>

#include "rotor/error.hpp"

namespace rotor {

namespace {

double norm(std::span<const std::int64_t> x) {
    double s = 0;
    for (auto v : x) s += static_cast<double>(v) * static_cast<double>(v);
    return std::sqrt(s);
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

void require_inside(const GridRegion& region, std::span<const std::int64_t> x, const char* what) {
    if (static_cast<int>(x.size()) != region.dimension()) {
        throw InvalidArgument(std::string(what) + " has the wrong dimension");
    }
    if (region.cell_at(x) != GridRegion::Cell::interior) {
        throw InvalidArgument(std::string(what) + " lies outside B_r");
    }
}

GridRegion checked_ball(int d, double r) {
    if (d < 1 || d > 8) throw InvalidArgument("dimension out of range");
    // Rough pre-check before allocating the box.
    const double box = std::pow(2.0 * std::ceil(r) + 3.0, d);
    if (box > 4.0 * static_cast<double>(kMaxExactSites)) {
        throw SolverError("B_r too large for an exact solve");
    }
    GridRegion region = GridRegion::ball(d, r);
    if (region.interior_count() > kMaxExactSites) throw SolverError("B_r too large for an exact solve");
    return region;
}

}  // namespace

std::string to_string(GreenForm form) {
    switch (form) {
        case GreenForm::asymptotic_d2: return "asymptotic-d2";
        case GreenForm::asymptotic_dge3: return "asymptotic-dge3";
        case GreenForm::exact_solve: return "exact-solve";
    }
    return "unknown";
}

void Calibration::set(const std::string& key, double value, double error, std::string note) {
    entries_[key] = Entry{value, error, std::move(note)};
}

std::optional<Calibration::Entry> Calibration::get(const std::string& key) const {
    auto it = entries_.find(key);
    if (it == entries_.end()) return std::nullopt;
    return it->second;
}

Calibration Calibration::parse(const std::string& text) {
    Calibration cal;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string note;
        if (auto hash = line.find('#'); hash != std::string::npos) {
            note = trim(line.substr(hash + 1));
            line = line.substr(0, hash);
        }
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw InvalidArgument("calibration line " + std::to_string(lineno) + ": expected key = value");
        }
        const std::string key = trim(line.substr(0, eq));
        std::string rest = trim(line.substr(eq + 1));
        double error = 0.0;
        if (auto pm = rest.find("+-"); pm != std::string::npos) {
            try {
                error = std::stod(trim(rest.substr(pm + 2)));
            } catch (const std::exception&) {
                throw InvalidArgument("calibration line " + std::to_string(lineno) + ": bad error");
            }
            rest = trim(rest.substr(0, pm));
        }
        double value = 0.0;
        try {
            std::size_t used = 0;
            value = std::stod(rest, &used);
            if (used != rest.size()) throw std::invalid_argument("trailing");
        } catch (const std::exception&) {
            throw InvalidArgument("calibration line " + std::to_string(lineno) + ": bad value");
        }
        if (key.empty()) throw InvalidArgument("calibration line " + std::to_string(lineno) + ": empty key");
        cal.set(key, value, error, note);
    }
    return cal;
}

Calibration Calibration::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvalidArgument("cannot read calibration file " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return parse(buf.str());
}

std::string Calibration::to_text() const {
    std::ostringstream out;
    out << "# rotor calibration, format 1\n";
    out << std::setprecision(10);
    for (const auto& [key, e] : entries_) {
        out << key << " = " << e.value << " +- " << e.error;
        if (!e.note.empty()) out << "  # " << e.note;
        out << '\n';
    }
    return out.str();
}

GreenEstimate green_asymptotic(int d, double r, std::span<const std::int64_t> x,
                               const Calibration* calibration) {
    if (d < 2) throw InvalidArgument("dimension must be at least 2");
    if (static_cast<int>(x.size()) != d) throw InvalidArgument("site has the wrong dimension");
    const double len = norm(x);
    if (!(r > 0.0)) throw InvalidArgument("radius must be positive");
    if (len > r) throw InvalidArgument("site lies outside B_r");
    GreenEstimate est{d, r, std::vector<std::int64_t>(x.begin(), x.end()), 0.0,
                      d == 2 ? GreenForm::asymptotic_d2 : GreenForm::asymptotic_dge3};
    if (d == 2) {
        est.value = len == 0.0 ? 2.0 / std::numbers::pi * std::log(r)
                               : 2.0 / std::numbers::pi * (std::log(r) - std::log(len));
        return est;
    }
    const std::string suffix = std::to_string(d);
    if (calibration == nullptr || !calibration->has("a_" + suffix)) {
        throw InvalidArgument("green_asymptotic in d=" + suffix + " needs a calibration with a_" + suffix);
    }
    const double a = calibration->get("a_" + suffix)->value;
    const double tail = a * std::pow(r, 2.0 - d);
    if (len == 0.0) {
        auto g00 = calibration->get("g00_" + suffix);
        if (!g00) throw InvalidArgument("origin value in d=" + suffix + " needs g00_" + suffix);
        est.value = g00->value - tail;
    } else {
        est.value = a * std::pow(len, 2.0 - d) - tail;
    }
    return est;
}

GridField green_field(int d, double r, std::span<const std::int64_t> y, const SolveOptions& options) {
    GridRegion region = checked_ball(d, r);
    require_inside(region, y, "source point");
    std::vector<double> source(region.box_size(), 0.0);
    source[static_cast<std::size_t>(region.index(y))] = 1.0;
    return solve_dirichlet(std::move(region), source, {}, options);
}

double exact_green(int d, double r, std::span<const std::int64_t> x, std::span<const std::int64_t> y,
                   const SolveOptions& options) {
    GridRegion region = checked_ball(d, r);
    require_inside(region, x, "x");
    require_inside(region, y, "y");
    std::vector<double> source(region.box_size(), 0.0);
    source[static_cast<std::size_t>(region.index(y))] = 1.0;
    const auto field = solve_dirichlet(std::move(region), source, {}, options);
    return field.at(x);
}

GridField hitting_field(const GridRegion& region, const std::vector<GridRegion::Point>& target,
                        const SolveOptions& options) {
    if (region.interior_count() > kMaxExactSites) throw SolverError("region too large for an exact solve");
    if (region.stranded_interior() != 0) {
        throw InvalidArgument("region has interior sites that cannot reach the boundary");
    }
    std::vector<double> data(region.box_size(), 0.0);
    for (const auto& y : target) {
        if (region.cell_at(y) != GridRegion::Cell::boundary) {
            throw InvalidArgument("target site is not on the region boundary");
        }
        data[static_cast<std::size_t>(region.index(y))] = 1.0;
    }
    return solve_dirichlet(region, {}, data, options);
}

double gradient_sum(const GridField& field, std::span<const std::int64_t> center, double rho) {
    const auto& region = field.region;
    const auto& offs = region.neighbor_offsets();
    const double rho2 = rho * rho;
    double total = 0.0;
    for (std::size_t k : region.interior()) {
        if (rho >= 0.0) {
            const auto p = region.point(k);
            double s = 0.0;
            for (std::size_t i = 0; i < p.size(); ++i) {
                const double diff = static_cast<double>(p[i] - (center.empty() ? 0 : center[i]));
                s += diff * diff;
            }
            if (s > rho2) continue;
        }
        const double fu = field.values[k];
        for (auto off : offs) {
            total += std::abs(fu - field.values[static_cast<std::size_t>(static_cast<std::int64_t>(k) + off)]);
        }
    }
    return total;
}

double gradient_sum(const GridField& field) { return gradient_sum(field, {}, -1.0); }

Calibration::Entry fit_green_constant(int d, double r, double fit_lo, double fit_hi) {
    if (d < 3) throw InvalidArgument("the Green constant fit needs d >= 3");
    const std::vector<std::int64_t> origin(d, 0);
    const auto field = green_field(d, r, origin);
    const double tail = std::pow(r, 2.0 - d);
    double sff = 0, sfg = 0, sgg = 0;
    std::size_t m = 0;
    for (std::size_t k : field.region.interior()) {
        const auto p = field.region.point(k);
        const double len = norm(p);
        if (len < fit_lo || len > fit_hi) continue;
        const double f = std::pow(len, 2.0 - d) - tail;
        const double g = field.values[k];
        sff += f * f;
        sfg += f * g;
        sgg += g * g;
        ++m;
    }
    if (m < 2) throw InvalidArgument("fit window contains too few sites");
    const double a = sfg / sff;
    const double rss = std::max(0.0, sgg - 2 * a * sfg + a * a * sff);
    const double se = std::sqrt(rss / static_cast<double>(m - 1) / sff);
    return {a, se, "fit over " + std::to_string(m) + " sites"};
}

double green_offset_d2(double r) {
    const std::vector<std::int64_t> origin{0, 0};
    return exact_green(2, r, origin, origin) - 2.0 / std::numbers::pi * std::log(r);
}

namespace {

GridField sphere_hitting(int d, double rho, std::vector<std::int64_t>& y) {
    GridRegion region = checked_ball(d, rho);
    y.assign(d, 0);
    y[0] = static_cast<std::int64_t>(std::ceil(rho));
    if (region.cell_at(y) != GridRegion::Cell::boundary) {
        throw InvalidArgument("axis point is not on the boundary of B_rho");
    }
    return hitting_field(region, {y});
}

}  // namespace

double hitting_decay_constant(int d, double rho) {
    std::vector<std::int64_t> y;
    const auto field = sphere_hitting(d, rho, y);
    double worst = 0.0;
    for (std::size_t k : field.region.interior()) {
        const auto p = field.region.point(k);
        double s = 0;
        for (int i = 0; i < d; ++i) s += static_cast<double>((p[i] - y[i]) * (p[i] - y[i]));
        worst = std::max(worst, field.values[k] * std::pow(std::sqrt(s), d - 1));
    }
    return worst;
}

double hitting_gradient_total(int d, double rho) {
    std::vector<std::int64_t> y;
    return gradient_sum(sphere_hitting(d, rho, y));
}

double green_gradient_ratio(int d, double r, double rho) {
    const std::vector<std::int64_t> origin(d, 0);
    const auto field = green_field(d, r, origin);
    return gradient_sum(field, origin, rho) / rho;
}

Calibration calibrate(const CalibrationOptions& options) {
    Calibration cal;
    {
        double lo = 1e300, hi = -1e300, last = 0;
        for (double r : {20.0, 40.0, 80.0}) {
            last = green_offset_d2(r);
            lo = std::min(lo, last);
            hi = std::max(hi, last);
        }
        cal.set("offset_2", last, hi - lo, "G_r(0,0) - (2/pi) log r at r = 80; error = spread over r = 20, 40, 80");
    }
    cal.set("J_2", hitting_decay_constant(2, 20.0), 0.0, "max H(x)|x-y| on B_20");
    {
        double jp = 0;
        for (double rho : {10.0, 20.0, 40.0, 80.0}) jp = std::max(jp, hitting_gradient_total(2, rho) / std::log(rho));
        cal.set("Jprime_2", jp, 0.0, "max gradient sum / log rho over rho = 10, 20, 40, 80");
    }
    for (int d : {2, 3}) {
        double c = 0;
        for (double rho : {5.0, 10.0, 20.0}) c = std::max(c, green_gradient_ratio(d, 40.0, rho));
        cal.set("C_gradient_" + std::to_string(d), c, 0.0, "r = 40, rho = 5, 10, 20");
    }
    if (options.include_d3) {
        const double r = options.d3_radius;
        auto a = fit_green_constant(3, r, 10.0, 25.0);
        cal.set("a_3", a.value, a.error, "fit of G_r(0,x) over 10 <= |x| <= 25");
        const std::vector<std::int64_t> origin(3, 0);
        const double g = exact_green(3, r, origin, origin) + a.value / r;
        // The r^{-2} correction is the leading unmodelled term.
        const double gerr = a.error / r + 1.0 / (r * r);
        cal.set("g00_3", g, gerr, "G_r(0,0) + a_3 / r");
        cal.set("alpha_3", 1.0 / g, gerr / (g * g), "1 / g00_3");
    }
    return cal;
}

}  // namespace rotor
