#include <doctest.h>

#include "wabc/io.hpp"
#include "wabc/metrics.hpp"

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <set>
#include <sstream>

using namespace wabc;
namespace fs = std::filesystem;

namespace {

const fs::path root = fs::temp_directory_path() / "wabc_test_cli";

int run(const std::string& args)
{
    const std::string cmd =
        "cd '" + root.string() + "' && '" WABC_CLI_PATH "' " + args + " >>cli.log 2>&1";
    const int status = std::system(cmd.c_str());
    REQUIRE(WIFEXITED(status));
    return WEXITSTATUS(status);
}

void fresh()
{
    fs::remove_all(root);
    fs::create_directories(root);
}

// Every output file except the manifest, compared byte for byte.
void check_same_outputs(const fs::path& a, const fs::path& b)
{
    std::set<std::string> names;
    for (const auto& e : fs::directory_iterator(a)) {
        names.insert(e.path().filename().string());
    }
    std::set<std::string> other;
    for (const auto& e : fs::directory_iterator(b)) {
        other.insert(e.path().filename().string());
    }
    CHECK(names == other);
    for (const auto& n : names) {
        if (n == "manifest.json") {
            continue;
        }
        INFO(n);
        CHECK(read_text(a / n) == read_text(b / n));
    }
}

std::vector<std::string> lines(const fs::path& p)
{
    std::vector<std::string> out;
    std::istringstream in(read_text(p));
    for (std::string l; std::getline(in, l);) {
        out.push_back(l);
    }
    return out;
}

}  // namespace

TEST_CASE("gen writes the data files and a manifest")
{
    fresh();
    REQUIRE(run("gen --problem 3-med --n 40 --sigma 0.1 --seed 3 -o g") == 0);
    const auto truth = read_cloud_csv(root / "g/truth.csv");
    const auto train = read_cloud_csv(root / "g/train.csv");
    CHECK(truth.size() == 40);
    CHECK(truth.dim() == 3);
    CHECK(train.size() == 40);
    const auto meta = read_json(root / "g/meta.json");
    CHECK(meta.at("problem") == "3-med");
    CHECK(meta.at("pool_size") == 153);
    const auto man = read_json(root / "g/manifest.json");
    CHECK(man.at("command") == "gen");
    CHECK(man.at("outputs").size() == 3);
    for (const auto& o : man.at("outputs")) {
        CHECK(o.at("sha256") == sha256_file(root / "g" / o.at("path").get<std::string>()));
    }
    CHECK(man.at("seeds").at("root") == 3);

    REQUIRE(run("gen --problem schaffer --n 20 --sigma 0 --seed 3 -o s") == 0);
    CHECK(read_text(root / "s/truth.csv") == read_text(root / "s/train.csv"));
    CHECK(read_cloud_csv(root / "s/truth.csv").dim() == 2);
}

TEST_CASE("every command is deterministic under a fixed seed")
{
    fresh();
    for (const std::string d : {"a", "b"}) {
        REQUIRE(run("gen --n 30 --sigma 0.05 --seed 9 -o " + d + "/gen") == 0);
        REQUIRE(run("fit " + d + "/gen/train.csv --n-updates 3 --no-timing --seed 4 -o " + d + "/fit") == 0);
        REQUIRE(run("fit " + d + "/gen/train.csv --method aao --aao-iters 5 --no-timing -o " + d + "/aao") == 0);
        REQUIRE(run("eval --model " + d + "/fit/model.json --truth " + d + "/gen/truth.csv --meta " + d +
                    "/gen/meta.json --seed 5 -o " + d + "/eval") == 0);
        REQUIRE(run("bench --trials 2 --n 20 --n-updates 2 --aao-iters 3 --no-timing --seed 6 -o " + d + "/bench") ==
                0);
        REQUIRE(run("bias-scan --n 5 --n-abc 20 --trials 2 --points 5 --seed 7 -o " + d + "/bias") == 0);
        REQUIRE(run("accept-scan --proposals 20000 --points 3 --seed 8 -o " + d + "/acc") == 0);
    }
    for (const std::string sub : {"gen", "fit", "aao", "eval", "bench", "bias", "acc"}) {
        INFO(sub);
        check_same_outputs(root / "a" / sub, root / "b" / sub);
    }
    // parallel kernels do not change results
    REQUIRE(run("--threads 1 fit a/gen/train.csv --n-updates 3 --no-timing --seed 4 -o c/fit") == 0);
    check_same_outputs(root / "a/fit", root / "c/fit");
    REQUIRE(run("bench --jobs 2 --trials 2 --n 20 --n-updates 2 --aao-iters 3 --no-timing --seed 6 -o c/bench") == 0);
    check_same_outputs(root / "a/bench", root / "c/bench");
}

TEST_CASE("eval of a model against its own surface sample")
{
    fresh();
    REQUIRE(run("gen --n 30 --seed 1 -o g") == 0);
    REQUIRE(run("fit g/train.csv --n-updates 2 -o f") == 0);
    const auto model = model_from_json(read_json(root / "f/model.json"));
    Rng rng(11);
    write_cloud_csv(root / "self.csv", surface_sample_for_metrics(model, 200, rng));
    REQUIRE(run("eval --model f/model.json --truth self.csv --samples 200 --seed 11 --append all.csv -o e") == 0);
    const auto rows = lines(root / "e/metrics.csv");
    REQUIRE(rows.size() == 2);
    CHECK(rows[0] == MetricsRow::csv_header());
    CHECK(rows[1].find(",0,0,0") != std::string::npos);  // gd, igd, seconds
    REQUIRE(run("eval --model f/model.json --truth self.csv --samples 200 --seed 11 --append all.csv -o e") == 0);
    CHECK(lines(root / "all.csv").size() == 3);
}

TEST_CASE("bench tables")
{
    fresh();
    REQUIRE(run("bench --trials 5 --n 20 --sigma 0 0.1 --n-updates 2 --aao-iters 3 --no-timing -o b") == 0);
    const auto results = lines(root / "b/results.csv");
    CHECK(results.size() == 1 + 2 * 5 * 2);
    const auto summary = lines(root / "b/summary.csv");
    CHECK(summary.size() == 1 + 2 * 2);
    const auto pv = lines(root / "b/pvalues.csv");
    REQUIRE(pv.size() == 1 + 2 * 2);
    CHECK(pv[0] == "problem,M,n,sigma,metric,method_a,method_b,statistic,p_value");
    CHECK(pv[1].find(",nan") == std::string::npos);

    REQUIRE(run("bench --trials 3 --n 20 --n-updates 2 --aao-iters 3 -o small") == 0);
    const auto pv3 = lines(root / "small/pvalues.csv");
    REQUIRE(pv3.size() == 3);
    CHECK(pv3[1].substr(pv3[1].size() - 8) == ",nan,nan");
}

TEST_CASE("scan summaries carry the slope check")
{
    fresh();
    REQUIRE(run("accept-scan --proposals 50000 --points 4 --band-lo 0 --band-hi 10 -o acc") == 0);
    const auto s = read_json(root / "acc/summary.json");
    CHECK(s.at("check").at("pass") == true);
    CHECK(lines(root / "acc/acceptance.csv").front() == "log_delta,log_rate");
    REQUIRE(run("bias-scan --n 5 --n-abc 20 --trials 2 --points 5 -o bias") == 0);
    CHECK(read_json(root / "bias/summary.json").at("check").contains("band"));
    CHECK(lines(root / "bias/bias.csv").front() == "log_delta,log_bias");
    CHECK(run("report acc bias -o rep") == 0);
    CHECK(fs::exists(root / "rep/report.txt"));
}

TEST_CASE("exit codes")
{
    fresh();
    CHECK(run("--help") == 0);
    CHECK(run("") == 1);
    CHECK(run("gen --n abc") == 1);
    CHECK(run("gen --problem nope") == 1);
    CHECK(run("gen --sigma -1") == 1);
    CHECK(run("fit missing.csv") == 2);
    CHECK(run("bias-scan --delta-min 2 --delta-max 1") == 1);
    CHECK(run("bench --methods foo") == 1);
    REQUIRE(run("gen --n 10 -o g") == 0);
    CHECK(run("fit g/train.csv --objectives 2") == 2);
    CHECK(run("fit g/train.csv --method aao --degree 5") == 2);  // fewer points than control points
    write_text(root / "bad.csv", "f1,f2\n1,x\n");
    CHECK(run("fit bad.csv") == 2);
    CHECK(run("report g/nothing") == 2);
}
