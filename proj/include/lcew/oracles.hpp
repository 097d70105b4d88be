#pragma once

#include <functional>
#include <vector>

#include "lcew/collision.hpp"
#include "lcew/core.hpp"
#include "lcew/tensor.hpp"

namespace lcew::oracles {

// Reference implementations kept deliberately independent of the main code
// paths they check. Brute force over elegance.

// Area of the intersection of two convex polygons (Sutherland-Hodgman).
double convex_intersection_area(const std::vector<Vec2>& a, const std::vector<Vec2>& b);

// Exact overlap test for two oriented boxes via polygon clipping.
bool obb_overlap_exact(const OBB& a, const OBB& b);

// Smallest |interval overlap depth| across the four detection axes; used to
// exclude borderline-touching pairs from oracle comparisons.
double min_axis_overlap_abs(const OBB& a, const OBB& b, double lane_heading);

// Analytic MI of a bivariate Gaussian with correlation rho, in nats.
double gaussian_mi_analytic(double rho);

// Central finite difference of eval with respect to *param.
double finite_difference(const std::function<double()>& eval, double* param, double h);

// Eigenvalues of a small symmetric matrix by cyclic Jacobi rotations.
std::vector<double> symmetric_eigenvalues(const Mat& m);

// Scalar-loop displacement error metrics (no shared code with the library).
struct LoopMetrics {
  double ade, fde, rmse_x, rmse_y;
};
LoopMetrics loop_metrics(const Tensor3& pred, const Tensor3& truth);

}  // namespace lcew::oracles
