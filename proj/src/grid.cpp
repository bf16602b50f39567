#include "fredholm/grid.hpp"

#include <cmath>

#include "fredholm/error.hpp"

namespace fredholm {

Grid1D::Grid1D(double a, double b, std::size_t n, Scheme scheme, Topology topology)
    : a_(a), b_(b), spacing_(0.0), scheme_(scheme), topology_(topology) {
    if (!std::isfinite(a) || !std::isfinite(b)) throw ValidationError("grid endpoints must be finite");
    if (!(b > a)) throw ValidationError("grid requires b > a");
    if (n < 2) throw ValidationError("grid requires at least 2 nodes, got " + std::to_string(n));
    if (topology == Topology::periodic && scheme == Scheme::closed) {
        throw ValidationError("closed scheme repeats the endpoint and cannot be periodic");
    }

    const double length = b - a;
    spacing_ = scheme == Scheme::closed ? length / static_cast<double>(n - 1)
                                        : length / static_cast<double>(n);
    const double offset = scheme == Scheme::midpoint ? 0.5 : 0.0;
    nodes_.resize(n);
    for (std::size_t j = 0; j < n; ++j) {
        nodes_[j] = a + (static_cast<double>(j) + offset) * spacing_;
    }
    if (scheme == Scheme::closed) nodes_.back() = b;
}

bool Grid1D::contains(double x) const noexcept {
    const double slack = 1e-12 * (b_ - a_);
    return x >= a_ - slack && x <= b_ + slack;
}

Grid1D uniform_grid(double a, double b, std::size_t n, Scheme scheme, Topology topology) {
    return Grid1D(a, b, n, scheme, topology);
}

NearestNode nearest_index(const Grid1D& grid, double x) {
    if (!std::isfinite(x)) throw ValidationError("nearest_index: non-finite coordinate");
    const std::size_t n = grid.size();
    const double dz = grid.spacing();
    const double first = grid[0];

    if (grid.periodic()) {
        const double period = grid.period();
        double shifted = std::fmod(x - first, period);
        if (shifted < 0.0) shifted += period;
        auto lo = static_cast<std::size_t>(std::floor(shifted / dz));
        if (lo >= n) lo = n - 1;
        const std::size_t hi = (lo + 1) % n;
        auto wrapped = [&](std::size_t j) {
            double d = std::fabs(std::fmod(x - grid[j], period));
            return std::min(d, period - d);
        };
        const double dlo = wrapped(lo);
        const double dhi = wrapped(hi);
        if (dhi < dlo || (dhi == dlo && hi < lo)) return {hi, dhi};
        return {lo, dlo};
    }

    if (!grid.contains(x)) {
        throw ValidationError("point " + std::to_string(x) + " outside grid interval [" +
                              std::to_string(grid.a()) + ", " + std::to_string(grid.b()) + "]");
    }
    double s = std::floor((x - first) / dz);
    std::size_t lo = s < 0.0 ? 0 : static_cast<std::size_t>(s);
    if (lo >= n) lo = n - 1;
    const std::size_t hi = lo + 1 < n ? lo + 1 : lo;
    const double dlo = std::fabs(x - grid[lo]);
    const double dhi = std::fabs(x - grid[hi]);
    if (dhi < dlo) return {hi, dhi};
    return {lo, dlo};
}

Scheme parse_scheme(std::string_view text) {
    if (text == "left") return Scheme::left;
    if (text == "midpoint") return Scheme::midpoint;
    if (text == "closed") return Scheme::closed;
    throw ValidationError("unknown grid scheme '" + std::string(text) + "' (left|midpoint|closed)");
}

std::string_view to_string(Scheme scheme) {
    switch (scheme) {
        case Scheme::left: return "left";
        case Scheme::midpoint: return "midpoint";
        case Scheme::closed: return "closed";
    }
    return "?";
}

std::string_view to_string(Topology topology) {
    return topology == Topology::periodic ? "periodic" : "interval";
}

}  // namespace fredholm
