#include <doctest.h>

#include "test_helpers.hpp"
#include "wabc/io.hpp"

#include <cmath>
#include <filesystem>
#include <limits>

using namespace wabc;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name)
{
    const auto dir = fs::temp_directory_path() / ("wabc_test_io_" + name);
    fs::remove_all(dir);
    return dir;
}

}  // namespace

TEST_CASE("format_double round-trips")
{
    CHECK(format_double(0.1) == "0.1");
    CHECK(format_double(1.0) == "1");
    CHECK(format_double(-2.5e-300) == "-2.5e-300");
    Rng rng(1);
    std::uniform_real_distribution<double> u(-1e6, 1e6);
    for (int i = 0; i < 1000; ++i) {
        const double v = u(rng) * std::pow(10.0, i % 40 - 20);
        CHECK(std::stod(format_double(v)) == v);
    }
}

TEST_CASE("cloud CSV")
{
    Rng rng(2);
    const auto c = testing::random_cloud(50, 3, rng);
    const auto text = cloud_to_csv(c);
    CHECK(text.rfind("f1,f2,f3\n", 0) == 0);
    CHECK(cloud_from_csv(text) == c);

    CHECK(cloud_from_csv("f1,f2\n1,2\r\n3,4\n") == PointCloud::from_rows({{1, 2}, {3, 4}}));
    CHECK_THROWS_AS(cloud_from_csv("f1\n"), DataError);
    CHECK_THROWS_AS(cloud_from_csv(""), DataError);
    CHECK_THROWS_AS(cloud_from_csv("x,y\n1,2\n"), DataError);
    CHECK_THROWS_AS(cloud_from_csv("f1,f2\n1\n"), DataError);
    CHECK_THROWS_AS(cloud_from_csv("f1,f2\n1,abc\n"), DataError);
    CHECK_THROWS_AS(cloud_from_csv("f1,f2\n1,nan\n"), DataError);

    const auto dir = scratch("csv");
    write_cloud_csv(dir / "sub" / "c.csv", c);
    CHECK(read_cloud_csv(dir / "sub" / "c.csv") == c);
    CHECK_THROWS_AS(read_cloud_csv(dir / "missing.csv"), DataError);
    fs::remove_all(dir);
}

TEST_CASE("model JSON")
{
    Rng rng(3);
    auto cps = ControlPointSet::zeros(3, 3);
    cps.points() = testing::random_cloud(cps.size(), 3, rng).matrix();
    const BezierModel m(cps);
    const auto j = model_to_json(m);
    CHECK(j.at("order") == 3);
    CHECK(j.at("dim") == 3);
    CHECK(j.at("control_points").size() == cps.size());
    CHECK(j.at("control_points")[0].at("degree") == std::vector<int>{3, 0, 0});
    const auto back = model_from_json(json::parse(j.dump()));
    CHECK(back.control_points() == m.control_points());

    auto bad = j;
    bad["control_points"].erase(0);
    CHECK_THROWS_AS(model_from_json(bad), DataError);
    bad = j;
    bad["control_points"][0]["degree"] = std::vector<int>{2, 2, 0};
    CHECK_THROWS_AS(model_from_json(bad), DataError);
    CHECK_THROWS_AS(model_from_json(json::object()), DataError);
}

TEST_CASE("hyperparams and fit report JSON")
{
    Rng rng(4);
    const auto data = sample_model(BezierModel(ControlPointSet(BezierBasis::make(2, 2),
                                                               RowMatrix{{0.0, 1.0}, {0.4, 0.4}, {1.0, 0.0}})),
                                   12, rng);
    const auto hp = init_hyperparams(data, 2);
    CHECK(hyperparams_from_json(json::parse(hyperparams_to_json(hp).dump())) == hp);

    AbcConfig cfg;
    cfg.n_abc = 10;
    cfg.n_delta = 10;
    cfg.n_updates = 3;
    cfg.seed = 8;
    const auto rep = wabc_fit(data, hp, cfg);
    const auto j = fit_report_to_json(rep);
    const auto back = fit_report_from_json(json::parse(j.dump()));
    CHECK(back.hyperparams == rep.hyperparams);
    CHECK(back.termination == rep.termination);
    CHECK(back.seed == rep.seed);
    CHECK(back.initial_delta == rep.initial_delta);
    REQUIRE(back.rounds.size() == rep.rounds.size());
    for (std::size_t r = 0; r < rep.rounds.size(); ++r) {
        CHECK(back.rounds[r].delta == rep.rounds[r].delta);
        CHECK(back.rounds[r].attempted == rep.rounds[r].attempted);
        CHECK(*back.rounds[r].hyperparams == *rep.rounds[r].hyperparams);
    }
    CHECK(j.at("termination") == to_string(rep.termination));
    CHECK(fit_report_to_json(rep, false).at("seconds") == 0.0);

    // NaN epsilon of a starved round survives as null
    FitReport starved = rep;
    starved.rounds.back().epsilon = std::numeric_limits<double>::quiet_NaN();
    const auto sj = fit_report_to_json(starved);
    CHECK(sj.at("rounds").back().at("epsilon").is_null());
    CHECK(std::isnan(fit_report_from_json(sj).rounds.back().epsilon));
}

TEST_CASE("text files and hashing")
{
    const auto dir = scratch("text");
    write_text(dir / "a" / "b.txt", "abc");
    CHECK(read_text(dir / "a" / "b.txt") == "abc");
    CHECK(sha256_file(dir / "a" / "b.txt") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    write_json(dir / "x.json", json{{"k", 1}});
    CHECK(read_json(dir / "x.json").at("k") == 1);
    write_text(dir / "bad.json", "{");
    CHECK_THROWS_AS(read_json(dir / "bad.json"), DataError);
    CHECK_THROWS_AS(read_text(dir / "nope"), DataError);
    CHECK_THROWS_AS(sha256_file(dir / "nope"), DataError);
    fs::remove_all(dir);
}
