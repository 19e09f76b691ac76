#include "wabc/aao.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace wabc {

void AaoConfig::validate() const
{
    if (max_outer_iters < 1 || t_newton_iters < 1) {
        throw std::invalid_argument("AaoConfig: iteration limits must be positive");
    }
    if (!(t_tol > 0.0) || !(loss_tol > 0.0)) {
        throw std::invalid_argument("AaoConfig: tolerances must be positive");
    }
}

Matrix design_matrix(const BezierBasis& basis, const std::vector<SimplexParam>& params)
{
    Matrix phi(static_cast<Eigen::Index>(params.size()), static_cast<Eigen::Index>(basis.size()));
    for (std::size_t i = 0; i < params.size(); ++i) {
        if (params[i].dim() != basis.dim()) {
            throw std::invalid_argument("design_matrix: parameter dimension mismatch");
        }
        phi.row(static_cast<Eigen::Index>(i)) = basis.weights(params[i].coords()).transpose();
    }
    return phi;
}

LeastSquaresFit fit_control_points(const PointCloud& data, const std::vector<SimplexParam>& params, int order)
{
    if (params.size() != data.size()) {
        throw std::invalid_argument("fit_control_points: one parameter per data point required");
    }
    if (data.empty()) {
        throw std::invalid_argument("fit_control_points: empty data");
    }
    auto basis = BezierBasis::make(order, static_cast<int>(data.dim()));
    const Matrix phi = design_matrix(*basis, params);
    const Matrix x = data.matrix();
    Eigen::CompleteOrthogonalDecomposition<Matrix> cod(phi);
    const Matrix p = cod.solve(x);
    LeastSquaresFit out{ControlPointSet(basis, RowMatrix(p)), cod.rank(), false};
    out.rank_deficient = out.rank < static_cast<Eigen::Index>(basis->size());
    return out;
}

double ols_loss(const BezierModel& model, const PointCloud& data, const std::vector<SimplexParam>& params)
{
    if (params.size() != data.size() || data.empty()) {
        throw std::invalid_argument("ols_loss: one parameter per data point required");
    }
    double s = 0.0;
    for (std::size_t i = 0; i < data.size(); ++i) {
        s += (data.row(i).transpose() - model.evaluate(params[i])).squaredNorm();
    }
    return s / static_cast<double>(data.size());
}

namespace {

// Partial derivatives of the Bernstein weights with respect to t (all M
// coordinates treated as independent): grad(k, j) = dB_k/dt_j and
// hess[k](i, j) = d2B_k/dt_i dt_j.
struct WeightDerivatives {
    Matrix grad;
    std::vector<Matrix> hess;
};

double monomial(const BezierBasis& basis, std::size_t k, const Vector& t, int di, int dj, int i, int j)
{
    // coefficient * d^(di) / dt_i * d^(dj) / dt_j of prod_m t_m^{d_m}; i == j allowed
    const auto& d = basis.degree(k);
    double v = basis.coeff(k);
    for (int m = 0; m < basis.dim(); ++m) {
        int e = d[static_cast<std::size_t>(m)];
        int drop = (m == i ? di : 0) + (m == j ? dj : 0);
        for (int q = 0; q < drop; ++q) {
            if (e == 0) {
                return 0.0;
            }
            v *= e;
            --e;
        }
        v *= ipow(t(m), e);
    }
    return v;
}

WeightDerivatives weight_derivatives(const BezierBasis& basis, const Vector& t, bool second)
{
    const auto k_count = static_cast<Eigen::Index>(basis.size());
    const int dim = basis.dim();
    WeightDerivatives out{Matrix(k_count, dim), {}};
    for (std::size_t k = 0; k < basis.size(); ++k) {
        for (int j = 0; j < dim; ++j) {
            out.grad(static_cast<Eigen::Index>(k), j) = monomial(basis, k, t, 1, 0, j, j);
        }
    }
    if (second) {
        out.hess.assign(basis.size(), Matrix(dim, dim));
        for (std::size_t k = 0; k < basis.size(); ++k) {
            for (int i = 0; i < dim; ++i) {
                for (int j = i; j < dim; ++j) {
                    const double v = monomial(basis, k, t, 1, 1, i, j);
                    out.hess[k](i, j) = v;
                    out.hess[k](j, i) = v;
                }
            }
        }
    }
    return out;
}

Matrix chart_directions(int dim, const std::vector<int>& free, int ref)
{
    Matrix a = Matrix::Zero(dim, static_cast<Eigen::Index>(free.size()));
    for (std::size_t c = 0; c < free.size(); ++c) {
        a(free[c], static_cast<Eigen::Index>(c)) = 1.0;
        a(ref, static_cast<Eigen::Index>(c)) = -1.0;
    }
    return a;
}

Vector clip_to_simplex(Vector t)
{
    t = t.cwiseMax(0.0);
    const double s = t.sum();
    if (!(s > 0.0)) {
        return Vector::Constant(t.size(), 1.0 / static_cast<double>(t.size()));
    }
    t /= s;
    // absorb rounding so the coordinates sum to one within SimplexParam tolerance
    Eigen::Index top = 0;
    t.maxCoeff(&top);
    t(top) += 1.0 - t.sum();
    return t;
}

}  // namespace

Matrix chart_jacobian(const BezierModel& model, const Vector& t)
{
    const int dim = model.dim();
    const auto wd = weight_derivatives(model.control_points().basis(), t, false);
    const Matrix jt = model.control_points().points().transpose() * wd.grad;  // M x M
    std::vector<int> free;
    for (int k = 0; k < dim - 1; ++k) {
        free.push_back(k);
    }
    return jt * chart_directions(dim, free, dim - 1);
}

Projection project_parameter(const BezierModel& model, const Vector& x, const SimplexParam& t0, const AaoConfig& cfg)
{
    const int dim = model.dim();
    if (x.size() != dim || t0.dim() != dim) {
        throw std::invalid_argument("project_parameter: dimension mismatch");
    }
    const auto& basis = model.control_points().basis();
    const Matrix pt = model.control_points().points().transpose();  // M x K

    Vector t = t0.coords();
    Vector r = x - pt * basis.weights(t);
    double loss = r.squaredNorm();
    Projection best{t0, loss, 0, false};

    for (int it = 0; it < cfg.t_newton_iters; ++it) {
        const auto wd = weight_derivatives(basis, t, true);
        const Matrix jt = pt * wd.grad;              // db/dt, M x M
        const Vector g = -(jt.transpose() * r);      // half gradient of |r|^2 in t

        // Reference coordinate: the largest one. Coordinates sitting at zero whose
        // gradient pushes outward stay fixed at zero.
        Eigen::Index ref_idx = 0;
        t.maxCoeff(&ref_idx);
        const int ref = static_cast<int>(ref_idx);
        std::vector<int> free;
        double kkt = 0.0;
        for (int j = 0; j < dim; ++j) {
            if (j == ref) {
                continue;
            }
            const double rel = g(j) - g(ref);
            if (t(j) > 0.0) {
                free.push_back(j);
                kkt = std::max(kkt, std::abs(rel));
            } else if (rel < 0.0) {
                free.push_back(j);
                kkt = std::max(kkt, -rel);
            }
        }
        if (kkt <= cfg.t_tol) {
            best.converged = true;
            best.iterations = it;
            return best;
        }

        const Matrix a = chart_directions(dim, free, ref);
        const Matrix js = jt * a;
        const Vector grad = -(js.transpose() * r);
        Matrix hess = js.transpose() * js;
        for (int c = 0; c < dim; ++c) {
            Matrix hc = Matrix::Zero(dim, dim);
            for (std::size_t k = 0; k < basis.size(); ++k) {
                hc += pt(c, static_cast<Eigen::Index>(k)) * wd.hess[k];
            }
            hess -= r(c) * (a.transpose() * hc * a);
        }

        Vector step;
        Eigen::LLT<Matrix> llt(hess);
        if (llt.info() == Eigen::Success) {
            step = llt.solve(-grad);
        }
        if (step.size() == 0 || !step.allFinite() || step.dot(grad) >= 0.0) {
            // Gauss-Newton with a small Levenberg shift when the Hessian is indefinite
            Matrix gn = js.transpose() * js;
            const double shift = 1e-12 * std::max(1.0, gn.trace());
            gn.diagonal().array() += shift;
            step = gn.ldlt().solve(-grad);
        }

        bool improved = false;
        double alpha = 1.0;
        for (int ls = 0; ls < 40; ++ls, alpha *= 0.5) {
            const Vector cand = clip_to_simplex(t + alpha * (a * step));
            const Vector rc = x - pt * basis.weights(cand);
            const double lc = rc.squaredNorm();
            if (lc < loss) {
                t = cand;
                r = rc;
                loss = lc;
                improved = true;
                break;
            }
        }
        best.iterations = it + 1;
        if (!improved) {
            // no descent possible along the Newton direction; stationary up to rounding
            best.converged = kkt <= std::sqrt(cfg.t_tol);
            return best;
        }
        best.t = SimplexParam(t);
        best.loss = loss;
    }

    // final optimality check on the last iterate
    const auto wd = weight_derivatives(basis, t, false);
    const Vector g = -((pt * wd.grad).transpose() * r);
    Eigen::Index ref_idx = 0;
    t.maxCoeff(&ref_idx);
    double kkt = 0.0;
    for (int j = 0; j < dim; ++j) {
        const double rel = g(j) - g(ref_idx);
        kkt = std::max(kkt, t(j) > 0.0 ? std::abs(rel) : -rel);
    }
    best.converged = kkt <= cfg.t_tol;
    return best;
}

std::vector<SimplexParam> initial_parameters(const PointCloud& data)
{
    constexpr double temperature = 0.25;
    const auto dim = static_cast<Eigen::Index>(data.dim());
    const Vector lo = data.matrix().colwise().minCoeff().transpose();
    const Vector hi = data.matrix().colwise().maxCoeff().transpose();
    std::vector<SimplexParam> out;
    out.reserve(data.size());
    Vector w(dim);
    for (std::size_t i = 0; i < data.size(); ++i) {
        for (Eigen::Index m = 0; m < dim; ++m) {
            const double range = hi(m) - lo(m);
            const double z = range > 0.0 ? (data.row(i)(m) - lo(m)) / range : 0.5;
            w(m) = -z / temperature;
        }
        w = (w.array() - w.maxCoeff()).exp();
        out.emplace_back(clip_to_simplex(w / w.sum()));
    }
    return out;
}

std::vector<Projection> project_all(const BezierModel& model, const PointCloud& data,
                                    const std::vector<SimplexParam>& params, const AaoConfig& cfg, Exec exec)
{
    if (params.size() != data.size()) {
        throw std::invalid_argument("project_all: one parameter per data point required");
    }
    std::vector<Projection> out(data.size(), Projection{SimplexParam::vertex(model.dim(), 0), 0.0, 0, false});
    if (exec == Exec::serial) {
        for (std::size_t i = 0; i < data.size(); ++i) {
            out[i] = project_parameter(model, data.row(i).transpose(), params[i], cfg);
        }
    } else {
#pragma omp parallel for schedule(dynamic, 8)
        for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(data.size()); ++i) {
            const auto u = static_cast<std::size_t>(i);
            out[u] = project_parameter(model, data.row(u).transpose(), params[u], cfg);
        }
    }
    return out;
}

AaoResult aao_fit(const PointCloud& data, int order, const AaoConfig& cfg, Exec exec)
{
    return aao_fit(data, order, initial_parameters(data), cfg, exec);
}

AaoResult aao_fit(const PointCloud& data, int order, std::vector<SimplexParam> params, const AaoConfig& cfg,
                  Exec exec)
{
    cfg.validate();
    if (params.size() != data.size()) {
        throw std::invalid_argument("aao_fit: need one starting parameter per point");
    }
    const auto basis_size = binomial(order + static_cast<int>(data.dim()) - 1, static_cast<int>(data.dim()) - 1);
    if (data.size() < basis_size) {
        throw std::invalid_argument("aao_fit: need at least as many points as control points");
    }
    const auto start = std::chrono::steady_clock::now();

    auto fit = fit_control_points(data, params, order);
    AaoResult out{BezierModel(fit.control_points), params, {}, 0, 0, 0.0};
    out.loss_trajectory.push_back(ols_loss(out.model, data, params));

    for (int it = 0; it < cfg.max_outer_iters; ++it) {
        const auto proj = project_all(out.model, data, out.params, cfg, exec);
        std::size_t unconverged = 0;
        for (std::size_t i = 0; i < proj.size(); ++i) {
            out.params[i] = proj[i].t;
            unconverged += proj[i].converged ? 0 : 1;
        }
        out.unconverged_projections = unconverged;
        fit = fit_control_points(data, out.params, order);
        out.model = BezierModel(fit.control_points);
        const double loss = ols_loss(out.model, data, out.params);
        const double previous = out.loss_trajectory.back();
        out.loss_trajectory.push_back(loss);
        out.outer_iterations = it + 1;
        if (previous - loss < cfg.loss_tol) {
            break;
        }
    }
    out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return out;
}

}  // namespace wabc
