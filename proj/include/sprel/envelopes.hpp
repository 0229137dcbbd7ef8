#pragma once

#include <array>
#include <vector>

#include "sprel/spgraph.hpp"

namespace sprel {

// Composition functions on [0,1]^2. Arguments outside the unit square throw
// std::invalid_argument.
double f1(double x, double y);  // xy
double f2(double x, double y);  // 1-(1-x)(1-y)
double f3(double x, double y);  // xy/(x+y-xy), 0 at the origin

struct Box {
    double lx = 0.0, ux = 1.0;
    double ly = 0.0, uy = 1.0;
};

/// Overestimator z <= cx*x + cy*y + c0.
struct Plane {
    double cx = 0.0;
    double cy = 0.0;
    double c0 = 0.0;

    double at(double x, double y) const { return cx * x + cy * y + c0; }
};

/// Overestimator z <= slope*y + c0 in the single free operand y.
struct Line {
    double slope = 0.0;
    double c0 = 0.0;

    double at(double y) const { return slope * y + c0; }
};

/// False for planes with a non-finite coefficient or one above 1e8 in
/// magnitude; such cuts are dropped instead of entering the LP.
bool numerically_safe(const Plane& plane);
bool numerically_safe(const Line& line);

/// The two McCormick overestimators of xy; their minimum is the concave
/// envelope on the box.
std::array<Plane, 2> mccormick_f1_cuts(const Box& box);

/// The two overestimators of x+y-xy obtained from the McCormick
/// underestimators of xy.
std::array<Plane, 2> f2_overestimator_cuts(const Box& box);

/// Concave envelope of f3 on [0,ux]x[0,uy]:
///   xy/(x+y-ux*y)  when x/ux >= y/uy,  xy/(x+y-x*uy) otherwise.
/// Returns 0 at the origin or when either upper bound is 0.
double f3_envelope(double x, double y, double ux, double uy);

/// Closed-form gradient of the active envelope piece (same tie rule).
std::array<double, 2> f3_envelope_gradient(double x, double y, double ux, double uy);

/// Tangent plane of the envelope at (xs, ys). Both envelope pieces are
/// homogeneous of degree one, so c0 is always exactly zero.
Plane f3_tangent_cut(double xs, double ys, double ux, double uy);

/// z <= x and z <= y.
std::array<Plane, 2> f3_default_cuts();

/// Tangent of y -> f3(p, y) at ys. Valid for every y in [0,1].
Line f3_fixed_edge_cut(double p, double ys);

/// Two planes tangent at the lower corner (lj, lk); valid on
/// [lj,uj]x[lk,uk]. Refuses the (0,0) corner.
std::array<Plane, 2> f3_corner_cuts(double lj, double uj, double lk, double uk);

enum class Fix : unsigned char { Free, Zero, One };

/// Interval bounds for every Y, Omega and OmegaBar, indexed by node id
/// (entry 0 unused).
struct BoundSet {
    std::vector<double> y_lo, y_hi;
    std::vector<double> om_lo, om_hi;
    std::vector<double> ob_lo, ob_hi;

    double r_lo(int root) const;
    double r_hi(int root) const;
};

/// Pushes edge fixings through the composition sequence. `fixed` has one
/// entry per edge (index e-1).
BoundSet propagate_bounds(const Instance& instance, const std::vector<Fix>& fixed);

}  // namespace sprel
