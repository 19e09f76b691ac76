#pragma once

#include "wabc/io.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace wabc::cli {

namespace fs = std::filesystem;

/// Bad flag values discovered after parsing; exit code 1.
class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// What a command consumed and produced, for the run manifest.
struct RunRecord {
    fs::path out_dir;
    json seeds = json::object();
    std::vector<fs::path> inputs;
    std::vector<std::string> outputs;  ///< file names relative to out_dir
    json extra = json::object();
};

struct GenOptions {
    std::string problem = "3-med";
    std::size_t n = 100;
    double sigma = 0.0;
    std::uint64_t seed = 0;
    std::size_t pool = 0;  ///< 0: the problem's default pool size
    int grid_res = 1024;
    fs::path out = "gen";
};

struct WabcFlags {
    std::size_t n_abc = 100;
    std::size_t n_updates = 50;
    std::size_t n_delta = 100;
    std::size_t max_proposals = 100000;
    double eig_stop = 1e-5;
    double delta_shrink = 0.9;
    std::optional<double> delta;
    double init_var = 0.1;
};

struct AaoFlags {
    int max_outer_iters = 100;
    int t_newton_iters = 20;
    double t_tol = 1e-8;
    double loss_tol = 1e-10;
};

struct FitOptions {
    fs::path input;
    std::string method = "wabc";
    int degree = 3;
    std::optional<int> objectives;
    WabcFlags wabc;
    AaoFlags aao;
    std::uint64_t seed = 0;
    bool no_timing = false;
    fs::path out = "fit";
};

struct EvalOptions {
    fs::path model;
    fs::path truth;
    std::optional<fs::path> meta;
    std::optional<fs::path> append;
    std::string method = "model";
    std::size_t samples = 1000;
    std::uint64_t seed = 0;
    fs::path out = "eval";
};

struct BenchOptions {
    std::vector<std::string> problems{"3-med"};
    std::vector<std::size_t> ns{50};
    std::vector<double> sigmas{0.1};
    std::size_t trials = 5;
    std::vector<std::string> methods{"wabc", "aao"};
    int degree = 3;
    WabcFlags wabc;
    AaoFlags aao;
    std::size_t metric_samples = 1000;
    int grid_res = 1024;
    int jobs = 1;
    std::uint64_t seed = 0;
    bool no_timing = false;
    fs::path out = "bench";
};

struct BiasScanOptions {
    std::string model = "gaussian";
    std::size_t n = 100;
    std::size_t n_abc = 1000;
    std::size_t trials = 10;
    double delta_min = 0.36787944117144233;  // e^-1
    double delta_max = 1.6487212707001282;   // e^0.5
    std::size_t points = 13;
    std::size_t max_proposals = 2000000;
    std::optional<double> band_lo;
    std::optional<double> band_hi;
    std::uint64_t seed = 0;
    fs::path out = "bias-scan";
};

struct AcceptScanOptions {
    std::string model = "gaussian";
    std::size_t n = 2;
    double delta_min = 0.01;
    double delta_max = 0.31622776601683794;  // 10^-0.5
    std::size_t points = 7;
    std::size_t proposals = 4000000;
    std::optional<double> band_lo;
    std::optional<double> band_hi;
    std::uint64_t seed = 0;
    fs::path out = "accept-scan";
};

struct ReportOptions {
    std::vector<fs::path> dirs;
    std::optional<fs::path> out;
};

RunRecord run_gen(const GenOptions& o);
RunRecord run_fit(const FitOptions& o);
RunRecord run_eval(const EvalOptions& o);
RunRecord run_bench(const BenchOptions& o);
RunRecord run_bias_scan(const BiasScanOptions& o);
RunRecord run_accept_scan(const AcceptScanOptions& o);
/// Prints summaries of finished run directories; returns nothing to record unless o.out is set.
std::optional<RunRecord> run_report(const ReportOptions& o);

/// Writes manifest.json into rec.out_dir.
void write_manifest(const RunRecord& rec, const std::string& command, const json& flags);

}  // namespace wabc::cli
