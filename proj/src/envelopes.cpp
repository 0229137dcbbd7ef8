#include "sprel/envelopes.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace sprel {

namespace {

constexpr double kMaxCoefficient = 1e8;
constexpr double kDomainSlack = 1e-12;

void check_unit(double v, const char* fn, const char* arg) {
    if (!(v >= 0.0 && v <= 1.0)) {
        throw std::invalid_argument(std::string(fn) + ": " + arg + "=" + std::to_string(v) + " outside [0,1]");
    }
}

// x clamped into [0, hi], tolerating rounding noise of kDomainSlack.
double in_range(double x, double hi, const char* fn, const char* arg) {
    if (!(x >= -kDomainSlack && x <= hi + kDomainSlack)) {
        throw std::invalid_argument(std::string(fn) + ": " + arg + "=" + std::to_string(x) + " outside [0," +
                                    std::to_string(hi) + "]");
    }
    return std::clamp(x, 0.0, hi);
}

double f3_unchecked(double x, double y) {
    // Monotone under rounding; see evaluate().
    return (x == 0.0 || y == 0.0) ? 0.0 : 1.0 / (1.0 / x + 1.0 / y - 1.0);
}

bool first_piece(double x, double y, double ux, double uy) { return x * uy >= y * ux; }

}  // namespace

double f1(double x, double y) {
    check_unit(x, "f1", "x");
    check_unit(y, "f1", "y");
    return x * y;
}

double f2(double x, double y) {
    check_unit(x, "f2", "x");
    check_unit(y, "f2", "y");
    return 1.0 - (1.0 - x) * (1.0 - y);
}

double f3(double x, double y) {
    check_unit(x, "f3", "x");
    check_unit(y, "f3", "y");
    return f3_unchecked(x, y);
}

bool numerically_safe(const Plane& p) {
    for (double c : {p.cx, p.cy, p.c0}) {
        if (!std::isfinite(c) || std::abs(c) > kMaxCoefficient) {
            return false;
        }
    }
    return true;
}

bool numerically_safe(const Line& l) {
    return std::isfinite(l.slope) && std::isfinite(l.c0) && std::abs(l.slope) <= kMaxCoefficient &&
           std::abs(l.c0) <= kMaxCoefficient;
}

std::array<Plane, 2> mccormick_f1_cuts(const Box& b) {
    return {Plane{b.ly, b.ux, -b.ux * b.ly}, Plane{b.uy, b.lx, -b.lx * b.uy}};
}

std::array<Plane, 2> f2_overestimator_cuts(const Box& b) {
    return {Plane{1.0 - b.ly, 1.0 - b.lx, b.lx * b.ly}, Plane{1.0 - b.uy, 1.0 - b.ux, b.ux * b.uy}};
}

double f3_envelope(double x, double y, double ux, double uy) {
    check_unit(ux, "f3_envelope", "ux");
    check_unit(uy, "f3_envelope", "uy");
    x = in_range(x, ux, "f3_envelope", "x");
    y = in_range(y, uy, "f3_envelope", "y");
    if (ux == 0.0 || uy == 0.0 || (x == 0.0 && y == 0.0)) {
        return 0.0;
    }
    // Written as y * x/(x + (1-ux)y) so that ux = 1 reproduces y exactly.
    if (first_piece(x, y, ux, uy)) {
        return y * (x / (x + (1.0 - ux) * y));
    }
    return x * (y / (y + (1.0 - uy) * x));
}

std::array<double, 2> f3_envelope_gradient(double x, double y, double ux, double uy) {
    check_unit(ux, "f3_envelope_gradient", "ux");
    check_unit(uy, "f3_envelope_gradient", "uy");
    x = in_range(x, ux, "f3_envelope_gradient", "x");
    y = in_range(y, uy, "f3_envelope_gradient", "y");
    if (ux == 0.0 || uy == 0.0) {
        return {0.0, 0.0};
    }
    if (x == 0.0 && y == 0.0) {
        throw std::invalid_argument("f3_envelope_gradient: not differentiable at the origin");
    }
    if (first_piece(x, y, ux, uy)) {
        const double d = x + (1.0 - ux) * y;
        return {(1.0 - ux) * (y / d) * (y / d), (x / d) * (x / d)};
    }
    const double d = y + (1.0 - uy) * x;
    return {(y / d) * (y / d), (1.0 - uy) * (x / d) * (x / d)};
}

Plane f3_tangent_cut(double xs, double ys, double ux, double uy) {
    if (ux == 0.0 || uy == 0.0) {
        return {0.0, 0.0, 0.0};
    }
    if (xs == 0.0 && ys == 0.0) {
        throw std::invalid_argument("f3_tangent_cut: no unique tangent at the origin");
    }
    const auto g = f3_envelope_gradient(xs, ys, ux, uy);
    return {g[0], g[1], 0.0};
}

std::array<Plane, 2> f3_default_cuts() { return {Plane{1.0, 0.0, 0.0}, Plane{0.0, 1.0, 0.0}}; }

Line f3_fixed_edge_cut(double p, double ys) {
    if (!(p > 0.0 && p <= 1.0)) {
        throw std::invalid_argument("f3_fixed_edge_cut: p must lie in (0,1], got " + std::to_string(p));
    }
    check_unit(ys, "f3_fixed_edge_cut", "ys");
    const double d = ys + p - ys * p;
    const double slope = (p / d) * (p / d);
    return {slope, p * ys / d - slope * ys};
}

std::array<Plane, 2> f3_corner_cuts(double lj, double uj, double lk, double uk) {
    check_unit(lj, "f3_corner_cuts", "lj");
    check_unit(uj, "f3_corner_cuts", "uj");
    check_unit(lk, "f3_corner_cuts", "lk");
    check_unit(uk, "f3_corner_cuts", "uk");
    if (lj > uj || lk > uk) {
        throw std::invalid_argument("f3_corner_cuts: lower bound above upper bound");
    }
    if (lj == 0.0 && lk == 0.0) {
        throw std::invalid_argument("f3_corner_cuts: the (0,0) corner is already exact under the envelope");
    }
    const double corner = f3_unchecked(lj, lk);
    const double d_ll = lj + lk - lj * lk;
    const double d_ul = uj + lk - uj * lk;
    const double d_lu = lj + uk - lj * uk;
    // d/dx f3 = y^2/(x+y-xy)^2, d/dy f3 = x^2/(x+y-xy)^2.
    const double a_x = (lk / d_ll) * (lk / d_ll);
    const double a_y = (uj / d_ul) * (uj / d_ul);
    const double b_x = (uk / d_lu) * (uk / d_lu);
    const double b_y = (lj / d_ll) * (lj / d_ll);
    return {Plane{a_x, a_y, corner - a_x * lj - a_y * lk}, Plane{b_x, b_y, corner - b_x * lj - b_y * lk}};
}

double BoundSet::r_lo(int root) const {
    return y_lo[static_cast<std::size_t>(root)] * ob_lo[static_cast<std::size_t>(root)];
}

double BoundSet::r_hi(int root) const {
    return y_hi[static_cast<std::size_t>(root)] * ob_hi[static_cast<std::size_t>(root)];
}

BoundSet propagate_bounds(const Instance& instance, const std::vector<Fix>& fixed) {
    const int m = instance.m();
    if (static_cast<int>(fixed.size()) != m) {
        throw std::invalid_argument("propagate_bounds: expected " + std::to_string(m) + " fixings");
    }
    const auto n = static_cast<std::size_t>(2 * m);
    BoundSet b;
    b.y_lo.assign(n, 0.0);
    b.y_hi.assign(n, 0.0);
    b.om_lo.assign(n, 1.0);
    b.om_hi.assign(n, 1.0);
    b.ob_lo.assign(n, 1.0);
    b.ob_hi.assign(n, 1.0);
    for (int e = 1; e <= m; ++e) {
        const auto i = static_cast<std::size_t>(e);
        const Fix f = fixed[i - 1];
        b.y_hi[i] = f == Fix::Zero ? 0.0 : instance.p(e);
        b.y_lo[i] = f == Fix::One ? instance.p(e) : 0.0;
    }
    // Same rounded operations as evaluate(), so fully fixed inputs reproduce
    // the trace bit for bit.
    auto either = [](double a, double c) { return 1.0 - (1.0 - a) * (1.0 - c); };
    for (const auto& s : instance.seq.steps) {
        const auto i = static_cast<std::size_t>(s.result_id);
        const auto j = static_cast<std::size_t>(s.left_id);
        const auto k = static_cast<std::size_t>(s.right_id);
        if (s.kind == CompositionKind::Parallel) {
            b.y_lo[i] = either(b.y_lo[j], b.y_lo[k]);
            b.y_hi[i] = either(b.y_hi[j], b.y_hi[k]);
        } else {
            b.y_lo[i] = f3_unchecked(b.y_lo[j], b.y_lo[k]);
            b.y_hi[i] = f3_unchecked(b.y_hi[j], b.y_hi[k]);
            b.om_lo[i] = either(b.y_lo[j], b.y_lo[k]);
            b.om_hi[i] = either(b.y_hi[j], b.y_hi[k]);
        }
        b.ob_lo[i] = b.ob_lo[i - 1] * b.om_lo[i];
        b.ob_hi[i] = b.ob_hi[i - 1] * b.om_hi[i];
    }
    return b;
}

}  // namespace sprel
