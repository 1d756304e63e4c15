#pragma once

#include "tacpalm/grid.hpp"

namespace tacpalm::poisson {

// Discrete divergence of a gradient field, the right-hand side of the
// least-squares normal equations:
//   f(x,y) = (p(x,y) - p(x-1,y)) + (q(x,y) - q(x,y-1))
// with out-of-range neighbors treated as zero (backward differences, the
// adjoint of the forward-difference gradient).
ScalarField divergence(const GradientField& grad);

// Integrates a gradient field into a depth map: the unique minimizer of
// sum ||grad z - (p,q)||^2 over fields that vanish on the boundary ring
// (homogeneous Dirichlet). Solved with a DST-I diagonalization of the
// 5-point Laplacian on the (W-2)x(H-2) interior; per-axis eigenvalues are
// 2*cos(pi*k/(N-1)) - 2. O(W H log(W H)), deterministic.
DepthMap integrate(const GradientField& grad);

}  // namespace tacpalm::poisson
