#include <doctest.h>

#include <cmath>

#include "sprel/envelopes.hpp"
#include "sprel/reliability.hpp"
#include "support.hpp"

using namespace sprel;
using namespace sprel::testing;

namespace {

double min_of(const std::array<Plane, 2>& planes, double x, double y) {
    return std::min(planes[0].at(x, y), planes[1].at(x, y));
}

}  // namespace

TEST_SUITE("envelopes") {

TEST_CASE("composition functions") {
    CHECK(f3(0.0, 0.7) == 0.0);
    CHECK(f3(0.0, 0.0) == 0.0);
    CHECK(f2(1.0, 0.3) == 1.0);
    CHECK(f2(1.0, 0.0) == 1.0);
    CHECK(f3(0.5, 0.5) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
    CHECK(f1(0.4, 0.5) == doctest::Approx(0.2));
    CHECK_THROWS_AS(f3(1.2, 0.5), std::invalid_argument);
    CHECK_THROWS_AS(f2(-0.1, 0.5), std::invalid_argument);
    CHECK_THROWS_AS(f1(0.5, std::nan("")), std::invalid_argument);
}

TEST_CASE("McCormick rows for a product") {
    const auto unit = mccormick_f1_cuts({0, 1, 0, 1});
    // z <= y and z <= x on the unit box
    CHECK(unit[0].cx == 0.0);
    CHECK(unit[0].cy == 1.0);
    CHECK(unit[1].cx == 1.0);
    CHECK(unit[1].cy == 0.0);

    const auto point = mccormick_f1_cuts({0.3, 0.3, 0.6, 0.6});
    CHECK(point[0].at(0.3, 0.6) == doctest::Approx(0.18));
    CHECK(point[1].at(0.3, 0.6) == doctest::Approx(0.18));

    const auto corner = mccormick_f1_cuts({0, 0.8, 0, 0.9});
    CHECK(corner[0].at(0.8, 0.9) == doctest::Approx(0.72).epsilon(1e-15));
    CHECK(corner[1].at(0.8, 0.9) == doctest::Approx(0.72).epsilon(1e-15));
}

TEST_CASE("overestimators of x+y-xy") {
    const auto unit = f2_overestimator_cuts({0, 1, 0, 1});
    CHECK(unit[0].cx == 1.0);
    CHECK(unit[0].cy == 1.0);
    CHECK(unit[0].c0 == 0.0);
    CHECK(unit[1].cx == 0.0);
    CHECK(unit[1].cy == 0.0);
    CHECK(unit[1].c0 == 1.0);

    const Box b{0.2, 0.7, 0.1, 0.6};
    const auto rows = f2_overestimator_cuts(b);
    // Tight where the product's underestimator is: x or y at a lower bound
    // for the first row, at an upper bound for the second.
    CHECK(rows[0].at(0.2, 0.5) == doctest::Approx(f2(0.2, 0.5)));
    CHECK(rows[0].at(0.4, 0.1) == doctest::Approx(f2(0.4, 0.1)));
    CHECK(rows[1].at(0.7, 0.3) == doctest::Approx(f2(0.7, 0.3)));
    CHECK(rows[1].at(0.5, 0.6) == doctest::Approx(f2(0.5, 0.6)));
    CHECK(rows[0].at(0.5, 0.4) > f2(0.5, 0.4));

    CHECK(f2_overestimator_cuts({0, 0.9, 0, 0.9})[0].at(0.5, 0.5) == doctest::Approx(1.0));
}

TEST_CASE("envelope of f3: unit box, boundary, hand value") {
    CHECK(f3_envelope(0.3, 0.7, 1, 1) == 0.3);
    CHECK(f3_envelope(0.8, 0.2, 1, 1) == 0.2);
    CHECK(std::abs(f3_envelope(0.8, 0.35, 0.8, 0.9) - f3(0.8, 0.35)) <= 1e-12);
    CHECK(std::abs(f3_envelope(0.2, 0.9, 0.8, 0.9) - f3(0.2, 0.9)) <= 1e-12);
    CHECK(f3_envelope(0.4, 0.2, 0.8, 0.9) == doctest::Approx(0.08 / 0.44).epsilon(1e-14));
    CHECK(f3_envelope(0.0, 0.0, 0.8, 0.9) == 0.0);
    CHECK(f3_envelope(0.0, 0.3, 0.0, 0.9) == 0.0);
    CHECK_THROWS_AS(f3_envelope(0.9, 0.2, 0.8, 0.9), std::invalid_argument);
}

TEST_CASE("tangent cuts of the envelope") {
    const Plane a = f3_tangent_cut(0.7, 0.0, 0.7, 0.9);
    CHECK(a.cx == doctest::Approx(0.0));
    CHECK(a.cy == doctest::Approx(1.0));
    CHECK(a.c0 == 0.0);
    const Plane b = f3_tangent_cut(0.0, 0.9, 0.7, 0.9);
    CHECK(b.cx == doctest::Approx(1.0));
    CHECK(b.cy == doctest::Approx(0.0));
    const Plane c = f3_tangent_cut(0.35, 0.6, 0.8, 0.95);
    CHECK(c.at(0.35, 0.6) == doctest::Approx(f3_envelope(0.35, 0.6, 0.8, 0.95)).epsilon(1e-14));
    CHECK(c.c0 == 0.0);
    CHECK_THROWS_AS(f3_tangent_cut(0.0, 0.0, 0.7, 0.9), std::invalid_argument);
}

TEST_CASE("default f3 rows") {
    const auto d = f3_default_cuts();
    CHECK(min_of(d, 0.5, 0.9) == 0.5);
    CHECK(d[0].at(0.5, 0.9) >= f3(0.5, 0.9));
    CHECK(d[1].at(0.9, 0.5) >= f3(0.9, 0.5));
}

TEST_CASE("fixed-operand tangent") {
    const Line one = f3_fixed_edge_cut(1.0, 0.4);
    CHECK(one.slope == doctest::Approx(1.0));
    CHECK(one.c0 == doctest::Approx(0.0));

    // At y* = 0 the derivative of f3(p, y) is p^2/p^2 = 1.
    const Line zero = f3_fixed_edge_cut(0.9, 0.0);
    CHECK(zero.slope == doctest::Approx(1.0));
    CHECK(zero.c0 == doctest::Approx(0.0));

    const Line mid = f3_fixed_edge_cut(0.9, 0.9);
    CHECK(mid.slope == doctest::Approx(std::pow(0.9 / 0.99, 2)).epsilon(1e-14));
    CHECK(mid.at(0.9) == doctest::Approx(0.81 / 0.99).epsilon(1e-14));
    CHECK_THROWS_AS(f3_fixed_edge_cut(0.0, 0.5), std::invalid_argument);
}

TEST_CASE("corner cuts") {
    const double L = 0.35;
    for (const Plane& p : f3_corner_cuts(L, L, L, L)) {
        CHECK(p.at(L, L) == doctest::Approx(L / (2 - L)).epsilon(1e-14));
    }
    const auto c = f3_corner_cuts(0.3, 0.8, 0.4, 0.9);
    CHECK(c[0].cx == doctest::Approx(0.16 / (0.58 * 0.58)).epsilon(1e-14));
    CHECK(c[0].cy == doctest::Approx(0.64 / 0.7744).epsilon(1e-14));
    CHECK(c[0].at(0.3, 0.4) == doctest::Approx(0.12 / 0.58).epsilon(1e-14));
    CHECK(c[0].at(0.8, 0.9) >= f3(0.8, 0.9));
    CHECK(c[1].at(0.8, 0.9) >= f3(0.8, 0.9));
    CHECK_THROWS_AS(f3_corner_cuts(0.0, 0.5, 0.0, 0.5), std::invalid_argument);
    CHECK_THROWS_AS(f3_corner_cuts(0.6, 0.5, 0.2, 0.5), std::invalid_argument);
}

TEST_CASE("numerical safety filter") {
    CHECK(numerically_safe(Plane{1, 2, 3}));
    CHECK_FALSE(numerically_safe(Plane{1e9, 0, 0}));
    CHECK_FALSE(numerically_safe(Plane{0, std::nan(""), 0}));
    CHECK_FALSE(numerically_safe(Line{INFINITY, 0}));
}

TEST_CASE("bound propagation on the triangle") {
    const Instance tri = triangle(0.9, 0.9, 0.9);
    const BoundSet free = propagate_bounds(tri, {Fix::Free, Fix::Free, Fix::Free});
    CHECK(free.y_hi[5] == doctest::Approx(f2(f3(0.9, 0.9), 0.9)).epsilon(1e-15));
    CHECK(free.y_hi[5] == doctest::Approx(0.98182).epsilon(1e-5));
    CHECK(free.ob_hi[5] == doctest::Approx(0.99).epsilon(1e-15));
    CHECK(free.y_lo[5] == 0.0);

    const BoundSet one = propagate_bounds(tri, {Fix::One, Fix::One, Fix::One});
    const EvalTrace t = evaluate(tri, ones(3));
    for (int i = 1; i <= 5; ++i) {
        const auto si = static_cast<std::size_t>(i);
        CHECK(one.y_lo[si] == one.y_hi[si]);
        CHECK(one.y_lo[si] == t.Y[si]);
        CHECK(one.ob_lo[si] == t.OmegaBar[si]);
    }

    const BoundSet zero = propagate_bounds(tri, {Fix::Zero, Fix::Free, Fix::Free});
    CHECK(zero.y_hi[4] == 0.0);
    CHECK(zero.om_hi[4] == 0.9);
    CHECK_THROWS(propagate_bounds(tri, {Fix::Free}));
}

TEST_CASE("property: propagated bounds bracket every completion") {
    SplitMix64 rng(31);
    for (int rep = 0; rep < 100; ++rep) {
        const int m = 2 + static_cast<int>(rng.below(9));
        const Instance inst = generate(m, rng.next());
        std::vector<Fix> fixed(static_cast<std::size_t>(m));
        for (auto& f : fixed) {
            const auto r = rng.below(3);
            f = r == 0 ? Fix::Free : (r == 1 ? Fix::Zero : Fix::One);
        }
        const BoundSet b = propagate_bounds(inst, fixed);
        for (unsigned bits = 0; bits < (1U << m); ++bits) {
            std::vector<bool> mask = mask_of(bits, m);
            bool consistent = true;
            for (int e = 0; e < m; ++e) {
                const Fix f = fixed[static_cast<std::size_t>(e)];
                consistent = consistent && (f == Fix::Free || (f == Fix::One) == mask[static_cast<std::size_t>(e)]);
            }
            if (!consistent) {
                continue;
            }
            const EvalTrace t = evaluate(inst, mask);
            for (int i = 1; i <= 2 * m - 1; ++i) {
                const auto si = static_cast<std::size_t>(i);
                CHECK(t.Y[si] >= b.y_lo[si]);
                CHECK(t.Y[si] <= b.y_hi[si]);
                CHECK(t.Omega[si] >= b.om_lo[si]);
                CHECK(t.Omega[si] <= b.om_hi[si]);
                CHECK(t.OmegaBar[si] >= b.ob_lo[si]);
                CHECK(t.OmegaBar[si] <= b.ob_hi[si]);
            }
        }
    }
}

TEST_CASE("property: the envelope dominates f3, is concave and has the closed-form gradient") {
    SplitMix64 rng(5);
    for (int rep = 0; rep < 2000; ++rep) {
        const double ux = 0.05 + 0.95 * rng.uniform();
        const double uy = 0.05 + 0.95 * rng.uniform();
        const double x = ux * rng.uniform();
        const double y = uy * rng.uniform();
        CHECK(f3_envelope(x, y, ux, uy) >= f3(x, y) - 1e-12);
        const double x2 = ux * rng.uniform();
        const double y2 = uy * rng.uniform();
        const double mid = f3_envelope((x + x2) / 2, (y + y2) / 2, ux, uy);
        CHECK(mid >= (f3_envelope(x, y, ux, uy) + f3_envelope(x2, y2, ux, uy)) / 2 - 1e-9);
        const double h = 1e-6;
        if (x > 2 * h && y > 2 * h && x < ux - 2 * h && y < uy - 2 * h && std::abs(x * uy - y * ux) > 1e-3) {
            const auto g = f3_envelope_gradient(x, y, ux, uy);
            const double gx = (f3_envelope(x + h, y, ux, uy) - f3_envelope(x - h, y, ux, uy)) / (2 * h);
            const double gy = (f3_envelope(x, y + h, ux, uy) - f3_envelope(x, y - h, ux, uy)) / (2 * h);
            CHECK(std::abs(g[0] - gx) <= 1e-6);
            CHECK(std::abs(g[1] - gy) <= 1e-6);
            CHECK(gx >= 0.0);
            CHECK(gy >= 0.0);
        }
    }
}

TEST_CASE("property: the envelope is linear along rays through the origin") {
    SplitMix64 rng(6);
    for (int rep = 0; rep < 500; ++rep) {
        const double ux = 0.05 + 0.95 * rng.uniform();
        const double uy = 0.05 + 0.95 * rng.uniform();
        const double x = ux * rng.uniform();
        const double y = uy * rng.uniform();
        if (x == 0.0 && y == 0.0) {
            continue;
        }
        // Scale the point onto the box boundary.
        const double t_hit = std::min(ux / x, uy / y);
        const double xb = std::min(x * t_hit, ux);
        const double yb = std::min(y * t_hit, uy);
        CHECK(std::abs(f3_envelope(xb, yb, ux, uy) - f3(xb, yb)) <= 1e-12);
        const double lambda = rng.uniform();
        CHECK(std::abs(f3_envelope(lambda * xb, lambda * yb, ux, uy) - lambda * f3(xb, yb)) <= 1e-12);
    }
}

}  // TEST_SUITE
