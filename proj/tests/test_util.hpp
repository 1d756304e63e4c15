#pragma once

// Shared test helpers and independent oracles. Everything here is written
// against the problem definitions only, never against the library's
// implementation path, so these routines can serve as ground truth.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <random>
#include <stack>
#include <string>
#include <vector>

#include "tacpalm/grid.hpp"

namespace testutil {

inline std::filesystem::path temp_dir(const std::string& tag) {
    auto dir = std::filesystem::temp_directory_path() /
               ("tacpalm_test_" + tag + "_" + std::to_string(::getpid()));
    std::filesystem::create_directories(dir);
    return dir;
}

// Dense Gaussian elimination with partial pivoting; a is row-major n x n.
inline std::vector<double> solve_dense(std::vector<double> a, std::vector<double> b) {
    const std::size_t n = b.size();
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t pivot = col;
        for (std::size_t r = col + 1; r < n; ++r) {
            if (std::abs(a[r * n + col]) > std::abs(a[pivot * n + col])) pivot = r;
        }
        if (pivot != col) {
            for (std::size_t c = 0; c < n; ++c) std::swap(a[col * n + c], a[pivot * n + c]);
            std::swap(b[col], b[pivot]);
        }
        const double d = a[col * n + col];
        for (std::size_t r = col + 1; r < n; ++r) {
            const double f = a[r * n + col] / d;
            if (f == 0.0) continue;
            for (std::size_t c = col; c < n; ++c) a[r * n + c] -= f * a[col * n + c];
            b[r] -= f * b[col];
        }
    }
    std::vector<double> x(n);
    for (std::size_t ri = n; ri-- > 0;) {
        double s = b[ri];
        for (std::size_t c = ri + 1; c < n; ++c) s -= a[ri * n + c] * x[c];
        x[ri] = s / a[ri * n + ri];
    }
    return x;
}

// Least-squares gradient integration oracle: assembles the normal equations
// of  min sum_x<=W-2 (z(x+1,y)-z(x,y)-p)^2 + sum_y<=H-2 (z(x,y+1)-z(x,y)-q)^2
// over interior unknowns (boundary ring clamped to zero) and solves densely.
inline tacpalm::DepthMap dense_poisson_solve(const tacpalm::GradientField& grad) {
    const int w = grad.width, h = grad.height;
    const int nx = w - 2, ny = h - 2;
    const std::size_t n = static_cast<std::size_t>(nx) * ny;
    auto unknown = [&](int x, int y) -> long {
        if (x < 1 || x > w - 2 || y < 1 || y > h - 2) return -1;  // boundary: fixed 0
        return static_cast<long>(y - 1) * nx + (x - 1);
    };

    std::vector<double> ata(n * n, 0.0);
    std::vector<double> atb(n, 0.0);
    auto add_equation = [&](long u1, long u2, double rhs) {
        // residual: z[u2] - z[u1] - rhs, with missing unknowns fixed at 0
        const long idx[2] = {u1, u2};
        const double coef[2] = {-1.0, 1.0};
        for (int i = 0; i < 2; ++i) {
            if (idx[i] < 0) continue;
            for (int j = 0; j < 2; ++j) {
                if (idx[j] < 0) continue;
                ata[static_cast<std::size_t>(idx[i]) * n + idx[j]] += coef[i] * coef[j];
            }
            atb[static_cast<std::size_t>(idx[i])] += coef[i] * rhs;
        }
    };
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x + 1 < w; ++x) {
            add_equation(unknown(x, y), unknown(x + 1, y), grad.p[grad.index(x, y)]);
        }
    }
    for (int y = 0; y + 1 < h; ++y) {
        for (int x = 0; x < w; ++x) {
            add_equation(unknown(x, y), unknown(x, y + 1), grad.q[grad.index(x, y)]);
        }
    }

    const std::vector<double> z = solve_dense(std::move(ata), std::move(atb));
    tacpalm::DepthMap depth = tacpalm::DepthMap::zeros(w, h);
    for (int y = 1; y <= h - 2; ++y) {
        for (int x = 1; x <= w - 2; ++x) {
            depth.at(x, y) = z[static_cast<std::size_t>(unknown(x, y))];
        }
    }
    return depth;
}

struct FloodComponent {
    std::size_t area = 0;
    int min_x = 0, min_y = 0, max_x = 0, max_y = 0;
};

// Brute-force 8-connected flood fill, scan order of first pixels.
inline std::vector<FloodComponent> flood_components(const tacpalm::ContactMask& mask) {
    const int w = mask.width, h = mask.height;
    std::vector<char> seen(static_cast<std::size_t>(w) * h, 0);
    std::vector<FloodComponent> out;
    for (int y0 = 0; y0 < h; ++y0) {
        for (int x0 = 0; x0 < w; ++x0) {
            const std::size_t i0 = static_cast<std::size_t>(y0) * w + x0;
            if (!mask.mask[i0] || seen[i0]) continue;
            FloodComponent comp;
            comp.min_x = comp.max_x = x0;
            comp.min_y = comp.max_y = y0;
            std::stack<std::pair<int, int>> stack;
            stack.push({x0, y0});
            seen[i0] = 1;
            while (!stack.empty()) {
                auto [x, y] = stack.top();
                stack.pop();
                ++comp.area;
                comp.min_x = std::min(comp.min_x, x);
                comp.max_x = std::max(comp.max_x, x);
                comp.min_y = std::min(comp.min_y, y);
                comp.max_y = std::max(comp.max_y, y);
                for (int dy = -1; dy <= 1; ++dy) {
                    for (int dx = -1; dx <= 1; ++dx) {
                        const int nx2 = x + dx, ny2 = y + dy;
                        if (nx2 < 0 || nx2 >= w || ny2 < 0 || ny2 >= h) continue;
                        const std::size_t ni = static_cast<std::size_t>(ny2) * w + nx2;
                        if (mask.mask[ni] && !seen[ni]) {
                            seen[ni] = 1;
                            stack.push({nx2, ny2});
                        }
                    }
                }
            }
            out.push_back(comp);
        }
    }
    return out;
}

// Finite-difference Euler-Bernoulli oracle for a tip-loaded cantilever with
// constant EI. Nodes x_i = i*h, h = L/(N-1). Stencils:
//   clamp:  z_0 = 0,   z'(0) = 0 via (-3 z_0 + 4 z_1 - z_2) / (2h) = 0
//   field:  (z_{i-2} - 4 z_{i-1} + 6 z_i - 4 z_{i+1} + z_{i+2}) / h^4 = 0,
//           i = 2 .. N-4  (no distributed load)
//   tip:    z''(L) = 0  via (2 z_{N-1} - 5 z_{N-2} + 4 z_{N-3} - z_{N-4}) / h^2
//           z'''(L-) = -F/(EI), the shear jump of the point load, via the
//           one-sided stencil
//           (-5/2 z_{N-1} + 9 z_{N-2} - 12 z_{N-3} + 7 z_{N-4} - 3/2 z_{N-5}) / h^3
// All stencils are second order; the clamp-slope equation carries the O(h^2)
// truncation term that drives the (observable) quadratic convergence.
struct BeamFdResult {
    double tip_deflection = 0.0;  // m
    double root_moment = 0.0;     // N*m, EI z''(0) from a one-sided stencil
};

inline BeamFdResult beam_fd_oracle(double length, double youngs_modulus, double second_moment,
                                   double force, int nodes) {
    const int n = nodes;
    const double h = length / (n - 1);
    const double ei = youngs_modulus * second_moment;
    std::vector<double> a(static_cast<std::size_t>(n) * n, 0.0);
    std::vector<double> b(n, 0.0);
    auto at = [&](int r, int c) -> double& { return a[static_cast<std::size_t>(r) * n + c]; };

    at(0, 0) = 1.0;                                  // z(0) = 0
    at(1, 0) = -3.0; at(1, 1) = 4.0; at(1, 2) = -1.0;  // z'(0) = 0
    for (int i = 2; i <= n - 4; ++i) {
        at(i, i - 2) = 1.0;
        at(i, i - 1) = -4.0;
        at(i, i) = 6.0;
        at(i, i + 1) = -4.0;
        at(i, i + 2) = 1.0;
    }
    {  // z''(L) = 0
        const int r = n - 3;
        at(r, n - 1) = 2.0; at(r, n - 2) = -5.0; at(r, n - 3) = 4.0; at(r, n - 4) = -1.0;
    }
    {  // z'''(L-) = -F / EI
        const int r = n - 2;
        at(r, n - 1) = -2.5; at(r, n - 2) = 9.0; at(r, n - 3) = -12.0;
        at(r, n - 4) = 7.0; at(r, n - 5) = -1.5;
        b[r] = -force / ei * h * h * h;
    }
    {  // one extra field equation keeps the system square (i = n-3 stencil row
       // was reused for the z'' condition, so place the field at i = n-3 here)
        const int r = n - 1;
        const int i = n - 3;
        at(r, i - 2) = 1.0; at(r, i - 1) = -4.0; at(r, i) = 6.0;
        at(r, i + 1) = -4.0; at(r, i + 2) = 1.0;
    }

    const std::vector<double> z = solve_dense(std::move(a), std::move(b));
    BeamFdResult result;
    result.tip_deflection = z[n - 1];
    result.root_moment = ei * (2.0 * z[0] - 5.0 * z[1] + 4.0 * z[2] - z[3]) / (h * h);
    return result;
}

// Deterministic RNG helpers.
inline std::mt19937_64 rng(std::uint64_t seed) { return std::mt19937_64(seed); }

inline tacpalm::GradientField random_gradient_field(int w, int h, std::mt19937_64& gen,
                                                    double scale = 1.0) {
    std::uniform_real_distribution<double> dist(-scale, scale);
    tacpalm::GradientField g = tacpalm::GradientField::zeros(w, h);
    for (auto& v : g.p) v = dist(gen);
    for (auto& v : g.q) v = dist(gen);
    return g;
}

inline double rmse(const std::vector<double>& a, const std::vector<double>& b) {
    double ss = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        ss += d * d;
    }
    return std::sqrt(ss / a.size());
}

inline double max_abs(const std::vector<double>& a) {
    double m = 0.0;
    for (double v : a) m = std::max(m, std::abs(v));
    return m;
}

}  // namespace testutil
