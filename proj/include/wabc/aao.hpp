#pragma once

#include "wabc/bezier.hpp"
#include "wabc/point_cloud.hpp"
#include "wabc/rng.hpp"

#include <cstdint>
#include <vector>

namespace wabc {

struct AaoConfig {
    int max_outer_iters = 100;
    int t_newton_iters = 20;
    double t_tol = 1e-8;
    double loss_tol = 1e-10;
    std::uint64_t seed = 0;

    void validate() const;
};

struct LeastSquaresFit {
    ControlPointSet control_points;
    Eigen::Index rank = 0;
    bool rank_deficient = false;
};

/// Exact OLS fit of all control points for fixed parameters t_i, one column
/// per objective, via a complete orthogonal decomposition (minimum-norm when
/// the Bernstein design matrix is rank deficient).
LeastSquaresFit fit_control_points(const PointCloud& data, const std::vector<SimplexParam>& params, int order);

/// n x K matrix of Bernstein weights B_d(t_i).
Matrix design_matrix(const BezierBasis& basis, const std::vector<SimplexParam>& params);

/// Mean squared residual (1/n) sum_i |x_i - b(t_i)|^2.
double ols_loss(const BezierModel& model, const PointCloud& data, const std::vector<SimplexParam>& params);

/// Jacobian of b with respect to the chart coordinates s_k = t_k (k < M),
/// t_M = 1 - sum_k s_k. M x (M-1).
Matrix chart_jacobian(const BezierModel& model, const Vector& t);

struct Projection {
    SimplexParam t;
    double loss = 0.0;  ///< |x - b(t)|^2
    int iterations = 0;
    bool converged = false;
};

/// Foot of the perpendicular from x onto the Bezier simplex, by damped Newton
/// steps in the chart with clipping back onto the simplex. Returns the best
/// iterate; `converged` is false when t_newton_iters ran out first.
Projection project_parameter(const BezierModel& model, const Vector& x, const SimplexParam& t0, const AaoConfig& cfg);

/// Softmax over negated min-max normalized objectives: points good in
/// objective m start near vertex m.
std::vector<SimplexParam> initial_parameters(const PointCloud& data);

struct AaoResult {
    BezierModel model;
    std::vector<SimplexParam> params;
    /// OLS loss after every control-point fit.
    std::vector<double> loss_trajectory;
    int outer_iterations = 0;
    std::size_t unconverged_projections = 0;
    double seconds = 0.0;
};

/// Projects all parameters in one sweep; the serial path is the reference.
std::vector<Projection> project_all(const BezierModel& model, const PointCloud& data,
                                    const std::vector<SimplexParam>& params, const AaoConfig& cfg,
                                    Exec exec = Exec::parallel);

/// All-at-once fitting: alternate parameter projection and control-point least squares.
AaoResult aao_fit(const PointCloud& data, int order, const AaoConfig& cfg, Exec exec = Exec::parallel);

/// Same, starting from the given parameters instead of initial_parameters(data).
AaoResult aao_fit(const PointCloud& data, int order, std::vector<SimplexParam> params, const AaoConfig& cfg,
                  Exec exec = Exec::parallel);

}  // namespace wabc
