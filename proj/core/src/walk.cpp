#include "rotor/walk.hpp"

#include <cmath>

namespace rotor {

std::string to_string(StopKind kind) {
    switch (kind) {
        case StopKind::absorb_origin_or_escape:
            return "absorb-origin-or-escape";
        case StopKind::absorb_ball_boundary:
            return "absorb-ball-boundary";
        case StopKind::escape_only:
            return "escape-only";
        case StopKind::absorb_custom_set:
            return "absorb-custom-set";
    }
    return "?";
}

std::string to_string(OutcomeStatus status) {
    switch (status) {
        case OutcomeStatus::absorbed_origin:
            return "absorbed-origin";
        case OutcomeStatus::absorbed_boundary:
            return "absorbed-boundary";
        case OutcomeStatus::escaped:
            return "escaped";
    }
    return "?";
}

namespace {

template <int D, class F>
void for_each_in_box(std::int64_t half, F&& f) {
    Site<D> x;
    x.fill(-half);
    for (;;) {
        f(x);
        int i = 0;
        while (i < D) {
            if (x[i] < half) {
                ++x[i];
                break;
            }
            x[i] = -half;
            ++i;
        }
        if (i == D) return;
    }
}

}  // namespace

template <int D>
std::vector<Site<D>> ball_sites(double r) {
    std::vector<Site<D>> out;
    if (!(r > 0.0)) return out;
    const auto half = static_cast<std::int64_t>(std::ceil(r));
    const double r2 = r * r;
    for_each_in_box<D>(half, [&](const Site<D>& x) {
        if (static_cast<double>(norm2<D>(x)) < r2) out.push_back(x);
    });
    return out;
}

template <int D>
std::vector<Site<D>> ball_boundary_sites(double r) {
    std::vector<Site<D>> out;
    const auto half = static_cast<std::int64_t>(std::ceil(r)) + 1;
    const double r2 = r * r;
    for_each_in_box<D>(half, [&](const Site<D>& x) {
        if (static_cast<double>(norm2<D>(x)) < r2) return;
        for (int i = 0; i < D; ++i) {
            for (int s : {-1, 1}) {
                Site<D> y = x;
                y[i] += s;
                if (static_cast<double>(norm2<D>(y)) < r2) {
                    out.push_back(x);
                    return;
                }
            }
        }
    });
    return out;
}

template <int D>
FluxReport<D> flux_residual(const LatticeState<D>& state, double r, bool want_field) {
    const std::uint8_t tags = state.provenance();
    if ((tags & ~kTagBall) != 0 || state.escape_rays() != 0) {
        throw InvalidArgument("flux_residual needs a state produced by ball runs only");
    }
    if ((tags & kTagBall) != 0 && state.ball_radius() != r) {
        throw InvalidArgument("flux_residual radius does not match the ball run radius");
    }
    FluxReport<D> report;
    const double r2 = r * r;
    for (const Site<D>& x : ball_sites<D>(r)) {
        const auto ux = static_cast<std::int64_t>(state.odometer(x));
        for (int axis = 0; axis < D; ++axis) {
            Site<D> y = x;
            ++y[axis];
            if (static_cast<double>(norm2<D>(y)) >= r2) continue;
            const Direction plus{static_cast<std::uint8_t>(axis), 1};
            const auto uy = static_cast<std::int64_t>(state.odometer(y));
            const auto flux = static_cast<std::int64_t>(state.exits(x, plus)) -
                              static_cast<std::int64_t>(state.exits(y, -plus));
            const std::int64_t grad = uy - ux;
            const std::int64_t residual = grad + 2 * D * flux;
            report.max_abs_residual = std::max(report.max_abs_residual, std::abs(residual));
            ++report.edges;
            if (want_field) report.field.push_back({x, axis, grad, flux, residual});
        }
    }
    return report;
}

template <int D>
std::vector<std::string> check_ball_conservation(const LatticeState<D>& state, double r,
                                                 std::uint64_t particles,
                                                 std::uint64_t absorbed) {
    std::vector<std::string> problems;
    if (absorbed != particles) {
        problems.push_back("absorbed " + std::to_string(absorbed) + " of " +
                           std::to_string(particles) + " particles");
    }
    for (const Site<D>& x : ball_sites<D>(r)) {
        std::uint64_t entries = 0;
        bool origin = true;
        for (auto v : x) origin = origin && v == 0;
        if (origin) entries += particles;
        for (int k = 0; k < 2 * D; ++k) {
            const Direction dir = Direction::from_index(k);
            Site<D> y = x;
            y[dir.axis] -= dir.sign;
            entries += state.exits(y, dir);
        }
        if (entries != state.odometer(x)) {
            problems.push_back("entries " + std::to_string(entries) + " != exits " +
                               std::to_string(state.odometer(x)) + " at " + format_site<D>(x));
        }
    }
    return problems;
}

#define ROTOR_INSTANTIATE_WALK(D)                                                              \
    template std::vector<Site<D>> ball_sites<D>(double);                                       \
    template std::vector<Site<D>> ball_boundary_sites<D>(double);                              \
    template FluxReport<D> flux_residual<D>(const LatticeState<D>&, double, bool);             \
    template std::vector<std::string> check_ball_conservation<D>(                              \
        const LatticeState<D>&, double, std::uint64_t, std::uint64_t);

ROTOR_INSTANTIATE_WALK(2)
ROTOR_INSTANTIATE_WALK(3)
ROTOR_INSTANTIATE_WALK(4)
ROTOR_INSTANTIATE_WALK(5)

#undef ROTOR_INSTANTIATE_WALK

}  // namespace rotor
