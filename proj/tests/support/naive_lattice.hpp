#pragma once

// Brute-force rotor walk on a dense cube [-W, W]^d. Leaving the cube counts
// as an escape, so results are only meaningful while all activity stays well
// inside. Shares no code with the library.

#include <cstdint>
#include <cstdlib>
#include <functional>
#include <stdexcept>
#include <vector>

namespace naive {

using Point = std::vector<long>;

struct Outcome {
    int status = 0;  // 0 returned to origin, 1 escaped, 2 stopped on a new site
    int sign = 0;    // escapes: +1 / -1 along the last axis
    Point column;    // escapes: transverse coordinates
    Point site;      // stops
};

class Lattice {
  public:
    // cycle: unit vectors in rotor order; init(x) gives the starting position
    // in that cycle.
    Lattice(int d, long half, std::vector<Point> cycle, std::function<int(const Point&)> init)
        : d_(d), half_(half), cycle_(std::move(cycle)) {
        side_ = 2 * half_ + 1;
        std::size_t cells = 1;
        for (int i = 0; i < d_; ++i) cells *= static_cast<std::size_t>(side_);
        rotor_.resize(cells);
        odo_.assign(cells, 0);
        occupied_.assign(cells, 0);
        Point x(d_, -half_);
        for (std::size_t k = 0; k < cells; ++k) {
            rotor_[k] = init(x);
            for (int i = 0; i < d_; ++i) {
                if (++x[i] <= half_) break;
                x[i] = -half_;
            }
        }
    }

    bool inside(const Point& x) const {
        for (long v : x) {
            if (v < -half_ || v > half_) return false;
        }
        return true;
    }

    std::size_t index(const Point& x) const {
        std::size_t k = 0, mul = 1;
        for (int i = 0; i < d_; ++i) {
            k += static_cast<std::size_t>(x[i] + half_) * mul;
            mul *= static_cast<std::size_t>(side_);
        }
        return k;
    }

    long odometer(const Point& x) const { return odo_[index(x)]; }
    int rotor(const Point& x) const { return rotor_[index(x)]; }

    // One particle from the origin. absorb_origin: returning to the origin
    // stops it. aggregate: stepping onto a never-occupied site stops it.
    Outcome run(bool absorb_origin, bool aggregate = false) {
        Point x(d_, 0);
        if (aggregate && !occupied_[index(x)]) {
            occupied_[index(x)] = 1;
            return Outcome{2, 0, {}, x};
        }
        int last_axis = 0, last_sign = 0;
        for (std::uint64_t steps = 0;; ++steps) {
            if (steps > 2'000'000'000ULL) throw std::runtime_error("naive walk runaway");
            const std::size_t k = index(x);
            const Point& dir = cycle_[static_cast<std::size_t>(rotor_[k])];
            rotor_[k] = (rotor_[k] + 1) % static_cast<int>(cycle_.size());
            ++odo_[k];
            for (int i = 0; i < d_; ++i) {
                if (dir[i] != 0) {
                    last_axis = i;
                    last_sign = static_cast<int>(dir[i]);
                }
                x[i] += dir[i];
            }
            if (!inside(x)) {
                if (last_axis != d_ - 1) throw std::runtime_error("naive walk left the cube sideways");
                return Outcome{1, last_sign, Point(x.begin(), x.end() - 1), {}};
            }
            bool at_origin = true;
            for (long v : x) at_origin = at_origin && v == 0;
            if (absorb_origin && at_origin) return Outcome{0, 0, {}, {}};
            if (aggregate && !occupied_[index(x)]) {
                occupied_[index(x)] = 1;
                return Outcome{2, 0, {}, x};
            }
        }
    }

    int dimension() const { return d_; }
    long half() const { return half_; }

  private:
    int d_;
    long half_;
    long side_;
    std::vector<Point> cycle_;
    std::vector<int> rotor_;
    std::vector<long> odo_;
    std::vector<char> occupied_;
};

inline Point unit(int d, int axis, int sign) {
    Point p(d, 0);
    p[axis] = sign;
    return p;
}

// Split configuration: +e_d on x_d >= 0, -e_d below.
inline std::function<int(const Point&)> split_init(const std::vector<Point>& cycle) {
    const int d = static_cast<int>(cycle.front().size());
    int up = -1, down = -1;
    for (std::size_t i = 0; i < cycle.size(); ++i) {
        if (cycle[i] == unit(d, d - 1, 1)) up = static_cast<int>(i);
        if (cycle[i] == unit(d, d - 1, -1)) down = static_cast<int>(i);
    }
    return [up, down, d](const Point& x) { return x[d - 1] >= 0 ? up : down; };
}

}  // namespace naive
