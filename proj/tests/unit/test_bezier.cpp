#include <doctest.h>

#include "wabc/bezier.hpp"

#include <algorithm>
#include <cmath>
#include <set>

using namespace wabc;

namespace {

// brute-force oracle: every vector in {0..D}^M with the right sum
std::vector<Degree> brute_degrees(int order, int dim)
{
    std::vector<Degree> out;
    Degree d(static_cast<std::size_t>(dim), 0);
    while (true) {
        int s = 0;
        for (int v : d) {
            s += v;
        }
        if (s == order) {
            out.push_back(d);
        }
        int m = 0;
        while (m < dim && d[static_cast<std::size_t>(m)] == order) {
            d[static_cast<std::size_t>(m)] = 0;
            ++m;
        }
        if (m == dim) {
            break;
        }
        ++d[static_cast<std::size_t>(m)];
    }
    return out;
}

double factorial(int n)
{
    double r = 1.0;
    for (int i = 2; i <= n; ++i) {
        r *= i;
    }
    return r;
}

ControlPointSet random_cps(int order, int dim, Rng& rng)
{
    auto cps = ControlPointSet::zeros(order, dim);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (Eigen::Index k = 0; k < cps.points().rows(); ++k) {
        for (Eigen::Index m = 0; m < dim; ++m) {
            cps.points()(k, m) = normal(rng);
        }
    }
    return cps;
}

}  // namespace

TEST_CASE("enumerate_degrees: small cases")
{
    CHECK(enumerate_degrees(1, 2) == std::vector<Degree>{{1, 0}, {0, 1}});
    CHECK(enumerate_degrees(0, 4) == std::vector<Degree>{{0, 0, 0, 0}});
    CHECK(enumerate_degrees(3, 3).size() == 10);
    CHECK_THROWS_AS(enumerate_degrees(2, 0), std::invalid_argument);
}

TEST_CASE("enumerate_degrees matches brute force, count identity and descending order")
{
    for (int order = 0; order <= 5; ++order) {
        for (int dim = 1; dim <= 5; ++dim) {
            const auto got = enumerate_degrees(order, dim);
            auto expected = brute_degrees(order, dim);
            std::sort(expected.begin(), expected.end(), std::greater<>());
            CHECK(got == expected);
            CHECK(got.size() == binomial(order + dim - 1, dim - 1));
            CHECK(std::set<Degree>(got.begin(), got.end()).size() == got.size());
        }
    }
}

TEST_CASE("multinomial_coeff")
{
    CHECK(multinomial_coeff(3, {3, 0, 0}) == 1);
    CHECK(multinomial_coeff(3, {1, 1, 1}) == 6);
    CHECK(multinomial_coeff(2, {1, 1}) == 2);
    CHECK_THROWS_AS(multinomial_coeff(3, {1, 1}), std::invalid_argument);
    for (const auto& d : enumerate_degrees(6, 4)) {
        double expected = factorial(6);
        for (int v : d) {
            expected /= factorial(v);
        }
        CHECK(static_cast<double>(multinomial_coeff(6, d)) == expected);
    }
}

TEST_CASE("SimplexParam validation")
{
    CHECK_NOTHROW(SimplexParam(Vector::Constant(3, 1.0 / 3.0)));
    Vector bad(2);
    bad << 0.7, 0.4;
    CHECK_THROWS_AS(SimplexParam{bad}, std::invalid_argument);
    bad << 1.1, -0.1;
    CHECK_THROWS_AS(SimplexParam{bad}, std::invalid_argument);
}

TEST_CASE("evaluate: worked examples")
{
    auto cps = ControlPointSet::zeros(1, 2);
    cps.set({1, 0}, Vector::Constant(2, 1.0));
    Vector q(2);
    q << 3.0, -1.0;
    cps.set({0, 1}, q);
    BezierModel line(cps);
    Vector half(2);
    half << 0.5, 0.5;
    const Vector mid = line.evaluate(SimplexParam(half));
    CHECK(mid(0) == doctest::Approx(2.0));
    CHECK(mid(1) == doctest::Approx(0.0));

    auto c2 = ControlPointSet::zeros(2, 2);
    Vector p(2);
    p << 0.0, 0.0;
    c2.set({2, 0}, p);
    p << 1.0, 1.0;
    c2.set({1, 1}, p);
    p << 2.0, 0.0;
    c2.set({0, 2}, p);
    const Vector y = BezierModel(c2).evaluate(SimplexParam(half));
    CHECK(y(0) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(y(1) == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("property: vertex interpolation and partition of unity")
{
    Rng rng(11);
    for (int order = 1; order <= 4; ++order) {
        for (int dim = 2; dim <= 5; ++dim) {
            const BezierModel model(random_cps(order, dim, rng));
            for (int m = 0; m < dim; ++m) {
                Degree d(static_cast<std::size_t>(dim), 0);
                d[static_cast<std::size_t>(m)] = order;
                const Vector v = model.evaluate(SimplexParam::vertex(dim, m));
                CHECK((v - model.control_points().at(d)).cwiseAbs().maxCoeff() <= 1e-12);
            }
            const auto& basis = model.control_points().basis();
            for (const auto& t : sample_uniform_simplex(dim, 100, rng)) {
                CHECK(std::abs(basis.weights(t.coords()).sum() - 1.0) <= 1e-12);
            }
        }
    }
}

TEST_CASE("property: permuting objective axes commutes with evaluation")
{
    Rng rng(5);
    const int order = 3;
    const int dim = 3;
    const auto cps = random_cps(order, dim, rng);
    const BezierModel model(cps);
    const std::vector<int> perm{2, 0, 1};

    // permuted model: p'_{d'} = P p_d with d'_{perm[m]} = d_m, axes permuted the same way
    auto permuted = ControlPointSet::zeros(order, dim);
    for (const auto& d : cps.basis().degrees()) {
        Degree dp(3);
        Vector pp(dim);
        const Vector p = cps.at(d);
        for (int m = 0; m < dim; ++m) {
            dp[static_cast<std::size_t>(perm[static_cast<std::size_t>(m)])] = d[static_cast<std::size_t>(m)];
            pp(perm[static_cast<std::size_t>(m)]) = p(m);
        }
        permuted.set(dp, pp);
    }
    const BezierModel model_p(permuted);
    for (const auto& t : sample_uniform_simplex(dim, 50, rng)) {
        Vector tp(dim);
        for (int m = 0; m < dim; ++m) {
            tp(perm[static_cast<std::size_t>(m)]) = t[m];
        }
        const Vector y = model.evaluate(t);
        const Vector yp = model_p.evaluate(SimplexParam(tp));
        for (int m = 0; m < dim; ++m) {
            CHECK(yp(perm[static_cast<std::size_t>(m)]) == doctest::Approx(y(m)).epsilon(1e-12));
        }
    }
}

TEST_CASE("sample_uniform_simplex: normalization, mean and 1-D marginal")
{
    Rng rng(2024);
    const auto ts = sample_uniform_simplex(3, 100000, rng);
    Vector mean = Vector::Zero(3);
    for (const auto& t : ts) {
        CHECK(std::abs(t.coords().sum() - 1.0) <= 1e-12);
        mean += t.coords();
    }
    mean /= static_cast<double>(ts.size());
    for (int m = 0; m < 3; ++m) {
        CHECK(std::abs(mean(m) - 1.0 / 3.0) < 0.01);
    }

    // M = 2: first coordinate uniform on [0,1]; Kolmogorov-Smirnov statistic
    auto t2 = sample_uniform_simplex(2, 10000, rng);
    std::vector<double> u;
    for (const auto& t : t2) {
        u.push_back(t[0]);
    }
    std::sort(u.begin(), u.end());
    double ks = 0.0;
    const double n = static_cast<double>(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) {
        ks = std::max({ks, std::abs((i + 1) / n - u[i]), std::abs(u[i] - i / n)});
    }
    CHECK(ks < 0.03);
    CHECK_THROWS_AS(sample_uniform_simplex(1, 3, rng), std::invalid_argument);
}

TEST_CASE("sample_model: constant model, convex hull and midpoint mean")
{
    Rng rng(3);
    auto cps = ControlPointSet::zeros(3, 3);
    Vector c(3);
    c << 0.5, -2.0, 7.0;
    for (Eigen::Index k = 0; k < cps.points().rows(); ++k) {
        cps.points().row(k) = c.transpose();
    }
    const auto constant = sample_model(BezierModel(cps), 200, rng);
    for (std::size_t i = 0; i < constant.size(); ++i) {
        CHECK((constant.row(i).transpose() - c).cwiseAbs().maxCoeff() <= 1e-12);
    }

    // D = 1, M = 2: a segment between a and b
    auto seg = ControlPointSet::zeros(1, 2);
    Vector a(2), b(2);
    a << 0.0, 1.0;
    b << 2.0, 3.0;
    seg.set({1, 0}, a);
    seg.set({0, 1}, b);
    const auto cloud = sample_model(BezierModel(seg), 100000, rng);
    Vector mean = Vector::Zero(2);
    for (std::size_t i = 0; i < cloud.size(); ++i) {
        const Vector y = cloud.row(i).transpose();
        // on the segment: y = a + s (b - a), s in [0,1]
        const double s = (y - a).dot(b - a) / (b - a).squaredNorm();
        CHECK(s >= -1e-12);
        CHECK(s <= 1.0 + 1e-12);
        CHECK((a + s * (b - a) - y).norm() <= 1e-12);
        mean += y;
    }
    mean /= static_cast<double>(cloud.size());
    CHECK((mean - 0.5 * (a + b)).norm() < 0.01 * (b - a).norm());
}
