#include <doctest.h>

#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "tacpalm/errors.hpp"
#include "tacpalm/poisson.hpp"
#include "test_util.hpp"

using namespace tacpalm;
constexpr double kPi = std::numbers::pi;

TEST_CASE("divergence: trivial fields") {
    // Constant gradients have zero divergence in the interior.
    GradientField g = GradientField::zeros(6, 5);
    for (auto& v : g.p) v = 0.7;
    for (auto& v : g.q) v = -0.3;
    const ScalarField f = poisson::divergence(g);
    for (int y = 1; y < 4; ++y) {
        for (int x = 1; x < 5; ++x) {
            CHECK(f.at(x, y) == 0.0);
        }
    }

    // A linear ramp p = x differentiates to exactly 1 in the interior.
    GradientField ramp = GradientField::zeros(7, 6);
    for (int y = 0; y < 6; ++y) {
        for (int x = 0; x < 7; ++x) {
            ramp.p[ramp.index(x, y)] = static_cast<double>(x);
        }
    }
    const ScalarField fr = poisson::divergence(ramp);
    for (int y = 1; y < 5; ++y) {
        for (int x = 1; x < 6; ++x) {
            CHECK(fr.at(x, y) == 1.0);
        }
    }
}

TEST_CASE("divergence equals the dense adjoint operator on random fields") {
    // Independent oracle: assemble f(x,y) = p - p(left) + q - q(up) literally
    // from a dense double loop with explicit zero padding.
    auto gen = testutil::rng(11);
    for (int trial = 0; trial < 20; ++trial) {
        const GradientField g = testutil::random_gradient_field(8, 8, gen);
        const ScalarField f = poisson::divergence(g);
        for (int y = 0; y < 8; ++y) {
            for (int x = 0; x < 8; ++x) {
                const double p = g.p[g.index(x, y)];
                const double pl = x > 0 ? g.p[g.index(x - 1, y)] : 0.0;
                const double q = g.q[g.index(x, y)];
                const double qu = y > 0 ? g.q[g.index(x, y - 1)] : 0.0;
                CHECK(f.at(x, y) == (p - pl) + (q - qu));
            }
        }
    }
}

TEST_CASE("integrate: zero gradients give the zero depth map") {
    const DepthMap z = poisson::integrate(GradientField::zeros(9, 7));
    for (double v : z.z) CHECK(v == 0.0);
}

TEST_CASE("integrate: boundary ring is exactly zero") {
    auto gen = testutil::rng(13);
    const GradientField g = testutil::random_gradient_field(12, 10, gen);
    const DepthMap z = poisson::integrate(g);
    for (int x = 0; x < 12; ++x) {
        CHECK(z.at(x, 0) == 0.0);
        CHECK(z.at(x, 9) == 0.0);
    }
    for (int y = 0; y < 10; ++y) {
        CHECK(z.at(0, y) == 0.0);
        CHECK(z.at(11, y) == 0.0);
    }
}

TEST_CASE("integrate: sine eigenfunction sampled with forward differences") {
    const int n = 64;
    DepthMap truth = DepthMap::zeros(n, n);
    for (int y = 0; y < n; ++y) {
        for (int x = 0; x < n; ++x) {
            truth.at(x, y) = std::sin(kPi * x / (n - 1)) * std::sin(kPi * y / (n - 1));
        }
    }
    GradientField g = GradientField::zeros(n, n);
    for (int y = 0; y < n; ++y) {
        for (int x = 0; x < n; ++x) {
            if (x + 1 < n) g.p[g.index(x, y)] = truth.at(x + 1, y) - truth.at(x, y);
            if (y + 1 < n) g.q[g.index(x, y)] = truth.at(x, y + 1) - truth.at(x, y);
        }
    }
    const DepthMap z = poisson::integrate(g);
    CHECK(testutil::rmse(z.z, truth.z) <= 1e-3 * testutil::max_abs(truth.z));
    // The sampled equations are exactly consistent, so recovery is near exact.
    CHECK(testutil::rmse(z.z, truth.z) <= 1e-10);
}

TEST_CASE("integrate: analytic gaussian bump gradients") {
    const int n = 128;
    const double sigma = n / 8.0, amp = 1.0;
    const double cx = (n - 1) / 2.0, cy = (n - 1) / 2.0;
    auto depth_at = [&](double x, double y) {
        const double dx = x - cx, dy = y - cy;
        return amp * std::exp(-(dx * dx + dy * dy) / (2.0 * sigma * sigma));
    };
    DepthMap truth = DepthMap::zeros(n, n);
    GradientField g = GradientField::zeros(n, n);
    for (int y = 0; y < n; ++y) {
        for (int x = 0; x < n; ++x) {
            truth.at(x, y) = depth_at(x, y);
            // Forward differences live on the staggered half-grid; sample the
            // analytic gradient there.
            const double zx = depth_at(x + 0.5, y);
            g.p[g.index(x, y)] = -zx * (x + 0.5 - cx) / (sigma * sigma);
            const double zy = depth_at(x, y + 0.5);
            g.q[g.index(x, y)] = -zy * (y + 0.5 - cy) / (sigma * sigma);
        }
    }
    const DepthMap z = poisson::integrate(g);
    const double rel = testutil::rmse(z.z, truth.z) / testutil::max_abs(truth.z);
    CHECK(rel <= 0.01);
}

TEST_CASE("integrate matches the dense least-squares oracle on small grids") {
    auto gen = testutil::rng(17);
    for (int n = 5; n <= 12; ++n) {
        const GradientField g = testutil::random_gradient_field(n, n, gen);
        const DepthMap fast = poisson::integrate(g);
        const DepthMap dense = testutil::dense_poisson_solve(g);
        double max_diff = 0.0;
        for (std::size_t i = 0; i < fast.z.size(); ++i) {
            max_diff = std::max(max_diff, std::abs(fast.z[i] - dense.z[i]));
        }
        CHECK(max_diff <= 1e-8);
    }
}

TEST_CASE("property: linearity of integration") {
    auto gen = testutil::rng(19);
    std::uniform_real_distribution<double> coef(-2.0, 2.0);
    for (int trial = 0; trial < 100; ++trial) {
        const GradientField g1 = testutil::random_gradient_field(32, 32, gen);
        const GradientField g2 = testutil::random_gradient_field(32, 32, gen);
        const double a = coef(gen), b = coef(gen);
        GradientField combo = GradientField::zeros(32, 32);
        for (std::size_t i = 0; i < combo.p.size(); ++i) {
            combo.p[i] = a * g1.p[i] + b * g2.p[i];
            combo.q[i] = a * g1.q[i] + b * g2.q[i];
        }
        const DepthMap z1 = poisson::integrate(g1);
        const DepthMap z2 = poisson::integrate(g2);
        const DepthMap zc = poisson::integrate(combo);
        double max_diff = 0.0;
        for (std::size_t i = 0; i < zc.z.size(); ++i) {
            max_diff = std::max(max_diff, std::abs(zc.z[i] - (a * z1.z[i] + b * z2.z[i])));
        }
        CHECK(max_diff <= 1e-10);
    }
}

TEST_CASE("property: mirror-symmetric gradients give mirror-symmetric depth") {
    auto gen = testutil::rng(23);
    for (int trial = 0; trial < 100; ++trial) {
        const int w = 17, h = 12;
        GradientField g = testutil::random_gradient_field(w, h, gen);
        // Symmetrize about the vertical axis: p is odd in x, q is even. Build
        // the field from its left half so symmetry holds exactly in floats.
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w / 2; ++x) {
                const int xm = w - 2 - x;  // forward differences mirror to x-1
                if (xm >= 0 && xm < w) {
                    g.p[g.index(xm, y)] = -g.p[g.index(x, y)];
                }
                g.q[g.index(w - 1 - x, y)] = g.q[g.index(x, y)];
            }
            g.p[g.index(w - 1, y)] = 0.0;
            if (w % 2 == 0) g.p[g.index(w / 2, y)] = 0.0;
        }
        if (w % 2 == 1) {
            for (int y = 0; y < h; ++y) {
                // central column of p pairs with itself under the mirror
                g.p[g.index((w - 1) / 2, y)] = -g.p[g.index((w - 1) / 2 - 1 + 1, y)];
                g.p[g.index((w - 1) / 2, y)] = 0.0;
            }
        }
        const DepthMap z = poisson::integrate(g);
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) {
                CHECK(z.at(x, y) == doctest::Approx(z.at(w - 1 - x, y)).epsilon(1e-12));
            }
        }
    }
}

TEST_CASE("integrate rejects bad input") {
    CHECK_THROWS_AS((void)poisson::integrate(GradientField::zeros(2, 8)), UsageError);
    GradientField g = GradientField::zeros(8, 8);
    g.p[10] = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS((void)poisson::integrate(g), NumericError);
    GradientField g2 = GradientField::zeros(8, 8);
    g2.q[3] = std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS((void)poisson::integrate(g2), NumericError);
}
