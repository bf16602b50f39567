#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace fredholm {

/// Node placement within [a, b].
///   left:     z_j = a + j*dz,          dz = (b-a)/N
///   midpoint: z_j = a + (j+1/2)*dz,    dz = (b-a)/N
///   closed:   z_j = a + j*dz,          dz = (b-a)/(N-1)  (both endpoints are nodes)
/// j = 0..N-1.
enum class Scheme { left, midpoint, closed };

/// Periodic grids treat [a, b) as a circle; the integrand must be (b-a)-periodic.
enum class Topology { interval, periodic };

class Grid1D {
public:
    Grid1D(double a, double b, std::size_t n, Scheme scheme, Topology topology);

    double a() const noexcept { return a_; }
    double b() const noexcept { return b_; }
    std::size_t size() const noexcept { return nodes_.size(); }
    double spacing() const noexcept { return spacing_; }
    Scheme scheme() const noexcept { return scheme_; }
    Topology topology() const noexcept { return topology_; }
    bool periodic() const noexcept { return topology_ == Topology::periodic; }
    double period() const noexcept { return b_ - a_; }

    std::span<const double> nodes() const noexcept { return nodes_; }
    double operator[](std::size_t j) const { return nodes_[j]; }

    /// True if x lies in [a, b] up to a relative tolerance of 1e-12.
    bool contains(double x) const noexcept;

private:
    double a_;
    double b_;
    double spacing_;
    Scheme scheme_;
    Topology topology_;
    std::vector<double> nodes_;
};

Grid1D uniform_grid(double a, double b, std::size_t n, Scheme scheme = Scheme::left,
                    Topology topology = Topology::interval);

struct NearestNode {
    std::size_t index;  // 0-based
    double distance;    // periodic (wrapped) distance on periodic grids
};

/// Node minimising |z_j - x|; ties go to the smaller index.
NearestNode nearest_index(const Grid1D& grid, double x);

Scheme parse_scheme(std::string_view text);
std::string_view to_string(Scheme scheme);
std::string_view to_string(Topology topology);

}  // namespace fredholm
