#include <doctest.h>

#include "test_helpers.hpp"
#include "wabc/aao.hpp"

#include <cmath>
#include <random>

using namespace wabc;

namespace {

BezierModel random_model(int order, int dim, Rng& rng, double scale = 1.0)
{
    std::normal_distribution<double> normal(0.0, scale);
    auto cps = ControlPointSet::zeros(order, dim);
    for (Eigen::Index k = 0; k < cps.points().rows(); ++k) {
        for (Eigen::Index m = 0; m < cps.points().cols(); ++m) {
            cps.points()(k, m) = normal(rng);
        }
    }
    return BezierModel(std::move(cps));
}

// Curved triangle-like surface in R^3 whose vertices are the unit vectors.
BezierModel bowl_model()
{
    auto cps = ControlPointSet::zeros(2, 3);
    for (const auto& d : cps.basis().degrees()) {
        Vector p(3);
        for (int m = 0; m < 3; ++m) {
            p(m) = d[static_cast<std::size_t>(m)] / 2.0;
        }
        // pull the interior towards the origin
        if (*std::max_element(d.begin(), d.end()) < 2) {
            p *= 0.6;
        }
        cps.set(d, p);
    }
    return BezierModel(std::move(cps));
}

SimplexParam interior_param(int dim, Rng& rng)
{
    auto t = sample_uniform_simplex(dim, 1, rng).front().coords();
    t = 0.8 * t + Vector::Constant(dim, 0.2 / dim);
    return SimplexParam(t);
}

}  // namespace

TEST_CASE("AaoConfig validation")
{
    AaoConfig cfg;
    CHECK_NOTHROW(cfg.validate());
    cfg.t_tol = 0.0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = {};
    cfg.max_outer_iters = 0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = {};
    cfg.t_newton_iters = 0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = {};
    cfg.loss_tol = -1.0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}

TEST_CASE("design_matrix rows are Bernstein weights")
{
    Rng rng(2);
    const auto basis = BezierBasis::make(3, 3);
    const auto params = sample_uniform_simplex(3, 20, rng);
    const Matrix a = design_matrix(*basis, params);
    CHECK(a.rows() == 20);
    CHECK(a.cols() == static_cast<Eigen::Index>(basis->size()));
    CHECK((a.rowwise().sum().array() - 1.0).abs().maxCoeff() <= 1e-12);
    CHECK(a.minCoeff() >= 0.0);
}

TEST_CASE("fit_control_points: noiseless recovery")
{
    Rng rng(5);
    for (int trial = 0; trial < 10; ++trial) {
        const int order = 1 + trial % 3;
        const int dim = 2 + trial % 2;
        const auto truth = random_model(order, dim, rng);
        const auto params = sample_uniform_simplex(dim, 40, rng);
        const auto data = truth.evaluate_many(params);
        const auto fit = fit_control_points(data, params, order);
        CHECK_FALSE(fit.rank_deficient);
        CHECK((fit.control_points.points() - truth.control_points().points()).cwiseAbs().maxCoeff() <= 1e-8);
        CHECK(ols_loss(BezierModel(fit.control_points), data, params) <= 1e-20);
    }
}

TEST_CASE("fit_control_points: vertex parameters average their points")
{
    const auto data = PointCloud::from_rows({{0, 1}, {0.2, 1.2}, {1, 0}, {1.4, 0.2}, {0.9, -0.2}});
    const std::vector<SimplexParam> params{SimplexParam::vertex(2, 0), SimplexParam::vertex(2, 0),
                                           SimplexParam::vertex(2, 1), SimplexParam::vertex(2, 1),
                                           SimplexParam::vertex(2, 1)};
    const auto fit = fit_control_points(data, params, 1);
    CHECK((fit.control_points.at({1, 0}) - Vector{{0.1, 1.1}}).norm() <= 1e-12);
    CHECK((fit.control_points.at({0, 1}) - Vector{{1.1, 0.0}}).norm() <= 1e-12);
}

TEST_CASE("fit_control_points: translation equivariance")
{
    Rng rng(6);
    const auto params = sample_uniform_simplex(3, 25, rng);
    const auto data = testing::random_cloud(25, 3, rng);
    const Vector shift{{3.0, -1.0, 0.5}};
    PointCloud moved = data;
    for (std::size_t i = 0; i < moved.size(); ++i) {
        moved.row(i) += shift.transpose();
    }
    const auto a = fit_control_points(data, params, 2).control_points.points();
    const auto b = fit_control_points(moved, params, 2).control_points.points();
    CHECK(((b - a).rowwise() - shift.transpose()).cwiseAbs().maxCoeff() <= 1e-9);
}

TEST_CASE("fit_control_points: rank deficiency is flagged")
{
    const auto data = PointCloud::from_rows({{0, 1}, {1, 0}, {0.5, 0.5}, {0.4, 0.4}});
    const SimplexParam mid(Vector{{0.5, 0.5}});
    const auto fit = fit_control_points(data, {mid, mid, mid, mid}, 2);
    CHECK(fit.rank_deficient);
    CHECK(fit.rank == 1);
    CHECK_THROWS_AS(fit_control_points(data, {mid}, 2), std::invalid_argument);
}

TEST_CASE("property: chart Jacobian matches central differences")
{
    Rng rng(7);
    const double h = 1e-6;
    for (int trial = 0; trial < 100; ++trial) {
        const int dim = 2 + trial % 3;
        const int order = 1 + trial % 4;
        const auto model = random_model(order, dim, rng);
        const Vector t = interior_param(dim, rng).coords();
        const Matrix j = chart_jacobian(model, t);
        REQUIRE(j.rows() == dim);
        REQUIRE(j.cols() == dim - 1);
        for (int k = 0; k < dim - 1; ++k) {
            Vector tp = t, tm = t;
            tp(k) += h;
            tp(dim - 1) -= h;
            tm(k) -= h;
            tm(dim - 1) += h;
            const Vector fd = (model.evaluate(tp) - model.evaluate(tm)) / (2.0 * h);
            CHECK((fd - j.col(k)).norm() <= 1e-5 * std::max(1.0, j.col(k).norm()));
        }
    }
}

TEST_CASE("project_parameter: exact point is a fixpoint")
{
    Rng rng(8);
    const auto model = random_model(2, 3, rng);
    const auto t = interior_param(3, rng);
    const auto p = project_parameter(model, model.evaluate(t), t, AaoConfig{});
    CHECK((p.t.coords() - t.coords()).norm() == 0.0);
    CHECK(p.loss == 0.0);
    CHECK(p.converged);
}

TEST_CASE("project_parameter: segment matches closed form")
{
    Rng rng(9);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (int trial = 0; trial < 100; ++trial) {
        const auto model = random_model(1, 2, rng);
        const Vector a = model.control_points().at({1, 0});
        const Vector b = model.control_points().at({0, 1});
        const Vector x{{normal(rng), normal(rng)}};
        // b(t) = t1 a + (1 - t1) b; closed-form clamp
        const double s = std::clamp((x - b).dot(a - b) / (a - b).squaredNorm(), 0.0, 1.0);
        const auto p = project_parameter(model, x, SimplexParam(Vector{{0.5, 0.5}}), AaoConfig{});
        CHECK(std::abs(p.t[0] - s) <= 1e-8);
        CHECK(std::abs(p.t[0] + p.t[1] - 1.0) <= 1e-12);
    }
}

TEST_CASE("project_parameter: boundary optimum at a vertex")
{
    const auto model = bowl_model();
    // outward from vertex e_1, away from the rest of the surface
    const Vector x{{3.0, -1.0, -1.0}};
    const auto p = project_parameter(model, x, SimplexParam(Vector::Constant(3, 1.0 / 3.0)), AaoConfig{});

    // dense grid oracle over the simplex, ~10^4 points
    const int steps = 140;
    double best = INFINITY;
    Vector best_t;
    for (int i = 0; i <= steps; ++i) {
        for (int j = 0; i + j <= steps; ++j) {
            const Vector t{{double(i) / steps, double(j) / steps, double(steps - i - j) / steps}};
            const double l = (x - model.evaluate(t)).squaredNorm();
            if (l < best) {
                best = l;
                best_t = t;
            }
        }
    }
    CHECK(best_t == Vector{{1.0, 0.0, 0.0}});
    CHECK((p.t.coords() - Vector{{1.0, 0.0, 0.0}}).norm() <= 1e-8);
    CHECK(p.loss <= best + 1e-12);
}

TEST_CASE("property: interior projections are stationary")
{
    Rng rng(10);
    std::normal_distribution<double> noise(0.0, 0.05);
    const auto model = bowl_model();
    const AaoConfig cfg;
    int interior = 0;
    for (int trial = 0; trial < 100; ++trial) {
        const auto t = interior_param(3, rng);
        Vector x = model.evaluate(t);
        for (int m = 0; m < 3; ++m) {
            x(m) += noise(rng);
        }
        const auto p = project_parameter(model, x, SimplexParam(Vector::Constant(3, 1.0 / 3.0)), cfg);
        if (p.t.coords().minCoeff() <= 1e-9 || !p.converged) {
            continue;
        }
        ++interior;
        const Vector r = x - model.evaluate(p.t);
        const Matrix j = chart_jacobian(model, p.t.coords());
        for (int k = 0; k < 2; ++k) {
            CHECK(std::abs(r.dot(j.col(k))) < cfg.t_tol);
        }
    }
    CHECK(interior >= 50);
}

TEST_CASE("project_all: serial and parallel agree")
{
    Rng rng(11);
    const auto model = bowl_model();
    const auto data = testing::random_cloud(50, 3, rng, 0.5);
    const auto params = initial_parameters(data);
    const auto a = project_all(model, data, params, AaoConfig{}, Exec::serial);
    const auto b = project_all(model, data, params, AaoConfig{}, Exec::parallel);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].t.coords() == b[i].t.coords());
        CHECK(a[i].loss == b[i].loss);
    }
}

TEST_CASE("initial_parameters")
{
    const auto data = PointCloud::from_rows({{0, 1}, {1, 0}, {0.5, 0.5}});
    const auto t = initial_parameters(data);
    REQUIRE(t.size() == 3);
    CHECK(t[0][0] > 0.9);
    CHECK(t[1][1] > 0.9);
    CHECK(t[2][0] == doctest::Approx(0.5));
}

TEST_CASE("aao_fit: noiseless data")
{
    Rng rng(12);
    const auto model = bowl_model();
    std::normal_distribution<double> jitter(0.0, 0.02);
    const auto truth_t = sample_uniform_simplex(3, 100, rng);
    const auto data = model.evaluate_many(truth_t);
    // good initialization: true parameters perturbed and renormalized
    std::vector<SimplexParam> start;
    for (const auto& t : truth_t) {
        Vector c = t.coords();
        for (int m = 0; m < 3; ++m) {
            c(m) = std::max(0.0, c(m) + jitter(rng));
        }
        start.emplace_back(c / c.sum());
    }
    const auto res = aao_fit(data, 2, start, AaoConfig{});
    REQUIRE(!res.loss_trajectory.empty());
    CHECK(res.loss_trajectory.back() < 1e-6);
    CHECK_THROWS_AS(aao_fit(data, 2, std::vector<SimplexParam>(start.begin(), start.end() - 1), AaoConfig{}),
                    std::invalid_argument);

    // default softmax start on the same data still drives the loss down
    const auto cold = aao_fit(data, 2, AaoConfig{});
    CHECK(cold.loss_trajectory.back() < 1e-2 * cold.loss_trajectory.front());
    CHECK(res.params.size() == 100);
    CHECK(res.outer_iterations >= 1);
    CHECK(res.outer_iterations <= AaoConfig{}.max_outer_iters);
}

TEST_CASE("property: control-point half-step never increases the loss")
{
    Rng rng(13);
    std::normal_distribution<double> noise(0.0, 0.1);
    const auto model = bowl_model();
    PointCloud data = sample_model(model, 60, rng);
    for (std::size_t i = 0; i < data.size(); ++i) {
        for (int m = 0; m < 3; ++m) {
            data.row(i)(m) += noise(rng);
        }
    }
    const AaoConfig cfg;
    auto params = initial_parameters(data);
    BezierModel current(fit_control_points(data, params, 2).control_points);
    for (int it = 0; it < 10; ++it) {
        const auto proj = project_all(current, data, params, cfg, Exec::serial);
        for (std::size_t i = 0; i < params.size(); ++i) {
            params[i] = proj[i].t;
        }
        const double before = ols_loss(current, data, params);
        current = BezierModel(fit_control_points(data, params, 2).control_points);
        CHECK(ols_loss(current, data, params) <= before);
    }

    const auto res = aao_fit(data, 2, cfg);
    for (std::size_t k = 1; k < res.loss_trajectory.size(); ++k) {
        CHECK(res.loss_trajectory[k] <= res.loss_trajectory[k - 1] * (1.0 + 1e-9));
    }
    CHECK_THROWS_AS(aao_fit(data.select(std::vector<std::size_t>{0, 1, 2}), 2, cfg), std::invalid_argument);
}
