#include <doctest.h>

#include "test_helpers.hpp"
#include "wabc/transport.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

using namespace wabc;
using wabc::testing::cloud_1d;
using wabc::testing::random_cloud;

TEST_CASE("euclidean_aligned")
{
    const auto x = cloud_1d({0.0});
    CHECK(euclidean_aligned(x, x) == 0.0);
    CHECK(euclidean_aligned(x, cloud_1d({3.0})) == doctest::Approx(3.0));
    const auto a = PointCloud::from_rows({{0, 0}, {1, 0}});
    const auto b = PointCloud::from_rows({{0, 1}, {1, 1}});
    CHECK(euclidean_aligned(a, b) == doctest::Approx(std::sqrt(2.0)));
    CHECK_THROWS_AS(euclidean_aligned(a, x), std::invalid_argument);
}

TEST_CASE("wasserstein2: worked examples")
{
    CHECK(wasserstein2(cloud_1d({0, 1}), cloud_1d({1, 0})) == 0.0);
    CHECK(wasserstein2(cloud_1d({0, 2}), cloud_1d({1, 1})) == doctest::Approx(1.0));
    CHECK(wasserstein2(cloud_1d({0, 0}), cloud_1d({1, 3})) == doctest::Approx(std::sqrt(5.0)));
    CHECK_THROWS_AS(wasserstein2(cloud_1d({0, 0}), cloud_1d({1})), std::invalid_argument);
    CHECK_THROWS_AS(wasserstein2(cloud_1d({0}), PointCloud::from_rows({{0, 0}})), std::invalid_argument);
}

TEST_CASE("wasserstein2_bruteforce: edge cases")
{
    const auto x = PointCloud::from_rows({{1, 2}});
    const auto y = PointCloud::from_rows({{4, 6}});
    CHECK(wasserstein2_bruteforce(x, y) == doctest::Approx(5.0));
    const auto d1 = cloud_1d({1, 1, 2, 5});
    const auto d2 = cloud_1d({5, 1, 2, 1});
    CHECK(wasserstein2_bruteforce(d1, d2) == 0.0);
    CHECK(wasserstein2(d1, d2) == 0.0);
    Rng rng(1);
    const auto big = random_cloud(9, 1, rng);
    CHECK_THROWS_AS(wasserstein2_bruteforce(big, big), std::invalid_argument);
}

TEST_CASE("property: assignment solver agrees with permutation enumeration")
{
    Rng rng(77);
    std::uniform_int_distribution<int> pick_n(2, 6), pick_m(1, 3);
    for (int trial = 0; trial < 200; ++trial) {
        const auto n = static_cast<std::size_t>(pick_n(rng));
        const auto m = static_cast<std::size_t>(pick_m(rng));
        const auto x = random_cloud(n, m, rng);
        const auto y = random_cloud(n, m, rng);
        CHECK(std::abs(wasserstein2(x, y) - wasserstein2_bruteforce(x, y)) <= 1e-9);
        // the returned permutation reproduces the reported cost
        const auto a = optimal_matching(x, y);
        std::vector<std::size_t> sorted = a.perm;
        std::sort(sorted.begin(), sorted.end());
        std::vector<std::size_t> iota(n);
        std::iota(iota.begin(), iota.end(), std::size_t{0});
        CHECK(sorted == iota);
        double recomputed = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            recomputed += (x.row(i) - y.row(a.perm[i])).squaredNorm();
        }
        CHECK(std::abs(recomputed / n - a.cost) <= 1e-9);
    }
}

TEST_CASE("property: metric axioms and permutation invariance")
{
    Rng rng(99);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t n = 2 + static_cast<std::size_t>(trial % 20);
        const auto x = random_cloud(n, 2, rng);
        const auto y = random_cloud(n, 2, rng);
        const auto z = random_cloud(n, 2, rng);
        const double xy = wasserstein2(x, y);
        CHECK(xy == wasserstein2(y, x));
        CHECK(xy <= wasserstein2(x, z) + wasserstein2(z, y) + 1e-9);
        std::vector<std::size_t> p(n), q(n);
        std::iota(p.begin(), p.end(), std::size_t{0});
        std::iota(q.begin(), q.end(), std::size_t{0});
        std::shuffle(p.begin(), p.end(), rng);
        std::shuffle(q.begin(), q.end(), rng);
        CHECK(std::abs(wasserstein2(x.permuted(p), y.permuted(q)) - xy) <= 1e-12);
        CHECK(wasserstein2(x, x.permuted(p)) == 0.0);
    }
}

TEST_CASE("in_wasserstein_ball")
{
    Rng rng(4);
    const auto x = random_cloud(5, 2, rng);
    CHECK(in_wasserstein_ball(x, x, 0.0));
    CHECK(in_wasserstein_ball(x, x, 1.0));
    auto y = x;
    y.row(0)(0) += 1e-3;
    CHECK_FALSE(in_wasserstein_ball(x, y, 0.0));
    CHECK_THROWS_AS(in_wasserstein_ball(x, y, -1.0), std::invalid_argument);
}

TEST_CASE("separation_threshold")
{
    // swapped aligned distance sqrt(9 + 9) = 3 sqrt 2, divided by 3 sqrt 2
    CHECK(separation_threshold(cloud_1d({0.0, 3.0})) == doctest::Approx(1.0));
    CHECK_THROWS_AS(separation_threshold(cloud_1d({1.0})), std::invalid_argument);
    CHECK_THROWS_AS(separation_threshold(cloud_1d({1.0, 2.0, 1.0})), std::invalid_argument);

    Rng rng(8);
    for (int trial = 0; trial < 30; ++trial) {
        const std::size_t n = 2 + static_cast<std::size_t>(trial % 5);
        const auto x = random_cloud(n, 2, rng);
        const double t = separation_threshold(x);
        CHECK(t > 0.0);
        // homogeneity
        CHECK(separation_threshold(PointCloud(RowMatrix(2.5 * x.matrix()))) ==
              doctest::Approx(2.5 * t).epsilon(1e-12));
        // the minimizing permutation is the transposition of the closest pair
        double closest = INFINITY;
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = i + 1; j < n; ++j) {
                closest = std::min(closest, (x.row(i) - x.row(j)).norm());
            }
        }
        CHECK(t == doctest::Approx(std::sqrt(2.0) * closest / (3.0 * std::sqrt(double(n)))).epsilon(1e-12));
    }
}
