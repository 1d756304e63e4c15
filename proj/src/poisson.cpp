#include "tacpalm/poisson.hpp"

#include <fftw3.h>

#include <cmath>
#include <mutex>
#include <numbers>
#include <vector>

#include "tacpalm/errors.hpp"

namespace tacpalm::poisson {

namespace {

// FFTW plan creation is not thread-safe; execution of a plan on its own
// arrays is. Plans are per-call, so only planning needs the lock.
std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

void require_finite(const GradientField& grad) {
    for (double v : grad.p) {
        if (!std::isfinite(v)) throw NumericError("gradient field contains non-finite p values");
    }
    for (double v : grad.q) {
        if (!std::isfinite(v)) throw NumericError("gradient field contains non-finite q values");
    }
}

}  // namespace

ScalarField divergence(const GradientField& grad) {
    require_finite(grad);
    const int w = grad.width, h = grad.height;
    ScalarField f = ScalarField::zeros(w, h);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const double px = grad.p[grad.index(x, y)];
            const double px_prev = x > 0 ? grad.p[grad.index(x - 1, y)] : 0.0;
            const double qy = grad.q[grad.index(x, y)];
            const double qy_prev = y > 0 ? grad.q[grad.index(x, y - 1)] : 0.0;
            f.at(x, y) = (px - px_prev) + (qy - qy_prev);
        }
    }
    return f;
}

DepthMap integrate(const GradientField& grad) {
    const int w = grad.width, h = grad.height;
    if (w < 3 || h < 3) {
        throw UsageError("poisson::integrate requires width and height >= 3");
    }
    const ScalarField rhs = divergence(grad);

    const int nx = w - 2;
    const int ny = h - 2;
    std::vector<double> buf(static_cast<std::size_t>(nx) * ny);
    for (int y = 0; y < ny; ++y) {
        for (int x = 0; x < nx; ++x) {
            buf[static_cast<std::size_t>(y) * nx + x] = rhs.at(x + 1, y + 1);
        }
    }

    fftw_plan plan;
    {
        std::lock_guard<std::mutex> lock(planner_mutex());
        plan = fftw_plan_r2r_2d(ny, nx, buf.data(), buf.data(), FFTW_RODFT00, FFTW_RODFT00,
                                FFTW_ESTIMATE);
    }
    fftw_execute(plan);

    // Dirichlet Laplacian eigenvalues; all strictly negative, so the system
    // is uniquely solvable with no gauge freedom.
    constexpr double pi = std::numbers::pi;
    std::vector<double> lam_x(nx), lam_y(ny);
    for (int k = 0; k < nx; ++k) lam_x[k] = 2.0 * std::cos(pi * (k + 1) / (w - 1)) - 2.0;
    for (int k = 0; k < ny; ++k) lam_y[k] = 2.0 * std::cos(pi * (k + 1) / (h - 1)) - 2.0;

    // RODFT00 applied twice scales by 2(n+1) per axis.
    const double norm = 1.0 / (4.0 * (w - 1) * (h - 1));
    for (int y = 0; y < ny; ++y) {
        for (int x = 0; x < nx; ++x) {
            buf[static_cast<std::size_t>(y) * nx + x] *= norm / (lam_x[x] + lam_y[y]);
        }
    }

    fftw_execute(plan);
    {
        std::lock_guard<std::mutex> lock(planner_mutex());
        fftw_destroy_plan(plan);
    }

    DepthMap depth = DepthMap::zeros(w, h);
    for (int y = 0; y < ny; ++y) {
        for (int x = 0; x < nx; ++x) {
            depth.at(x + 1, y + 1) = buf[static_cast<std::size_t>(y) * nx + x];
        }
    }
    return depth;
}

}  // namespace tacpalm::poisson
