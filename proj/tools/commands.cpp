#include "commands.hpp"

#include "wabc/aao.hpp"
#include "wabc/abc.hpp"
#include "wabc/metrics.hpp"
#include "wabc/problems.hpp"
#include "wabc/theory.hpp"

#include <bit>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <numeric>
#include <sstream>

namespace wabc::cli {

namespace {

ProblemSpec parse_problem(const std::string& name, int grid_res)
{
    ProblemSpec spec;
    try {
        spec = ProblemSpec::parse(name);
        spec.grid_res = grid_res;
        spec.validate();
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
    return spec;
}

template <class F>
void check_flag(bool ok, F&& message)
{
    if (!ok) {
        throw UsageError(message());
    }
}

std::uint64_t bits(double v)
{
    return std::bit_cast<std::uint64_t>(v);
}

struct Dataset {
    PointCloud truth;
    PointCloud train;
    std::size_t pool_size = 0;
};

// Pool of front samples -> n noiseless points (validation set) -> noisy training set.
Dataset make_dataset(const ProblemSpec& spec, std::size_t n, double sigma, std::uint64_t seed, std::size_t pool,
                     const PointCloud* viennet2_grid)
{
    Dataset d;
    d.pool_size = pool ? pool : spec.default_pool_size();
    Rng pool_rng(derive_seed(seed, {label("pool")}));
    PointCloud front;
    try {
        front = spec.kind == ProblemKind::viennet2 && viennet2_grid ? subsample(*viennet2_grid, d.pool_size, pool_rng)
                                                                    : generate_front(spec, d.pool_size, pool_rng);
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
    check_flag(n <= front.size(), [&] {
        return "--n " + std::to_string(n) + " exceeds the pool of " + std::to_string(front.size()) + " points";
    });
    Rng sub_rng(derive_seed(seed, {label("subsample")}));
    d.truth = subsample(front, n, sub_rng);
    d.train = add_noise(d.truth, NoiseSpec{sigma, derive_seed(seed, {label("noise")})});
    return d;
}

AbcConfig abc_config(const WabcFlags& f, std::uint64_t seed)
{
    AbcConfig cfg;
    cfg.delta = f.delta;
    cfg.n_abc = f.n_abc;
    cfg.n_updates = f.n_updates;
    cfg.n_delta = f.n_delta;
    cfg.max_proposals_per_round = f.max_proposals;
    cfg.eig_stop = f.eig_stop;
    cfg.delta_shrink = f.delta_shrink;
    cfg.seed = seed;
    try {
        cfg.validate();
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
    check_flag(f.init_var > 0.0, [] { return std::string("--init-var must be positive"); });
    return cfg;
}

AaoConfig aao_config(const AaoFlags& f, std::uint64_t seed)
{
    AaoConfig cfg;
    cfg.max_outer_iters = f.max_outer_iters;
    cfg.t_newton_iters = f.t_newton_iters;
    cfg.t_tol = f.t_tol;
    cfg.loss_tol = f.loss_tol;
    cfg.seed = seed;
    try {
        cfg.validate();
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
    return cfg;
}

void check_method(const std::string& m)
{
    check_flag(m == "wabc" || m == "aao", [&] { return "unknown method '" + m + "' (expected wabc or aao)"; });
}

std::size_t basis_size(int degree, std::size_t dim)
{
    return binomial(degree + static_cast<int>(dim) - 1, static_cast<int>(dim) - 1);
}

void check_fit_data(const PointCloud& data, int degree, const std::string& method)
{
    if (data.dim() < 2) {
        throw DataError("training data needs at least 2 objectives");
    }
    if (method == "aao" && data.size() < basis_size(degree, data.dim())) {
        throw DataError("aao needs at least " + std::to_string(basis_size(degree, data.dim())) +
                        " points for degree " + std::to_string(degree));
    }
}

struct FitOutcome {
    BezierModel model;
    json report;
    double seconds = 0.0;
};

FitOutcome fit_method(const std::string& method, const PointCloud& train, int degree, const WabcFlags& wf,
                      const AaoFlags& af, std::uint64_t seed, bool with_timing)
{
    if (method == "wabc") {
        const auto cfg = abc_config(wf, seed);
        const auto rep = wabc_fit(train, init_hyperparams(train, degree, wf.init_var), cfg);
        return {rep.model(), fit_report_to_json(rep, with_timing), rep.seconds};
    }
    const auto res = aao_fit(train, degree, aao_config(af, seed));
    return {res.model, aao_result_to_json(res, with_timing), res.seconds};
}

std::string csv_number(double v)
{
    return std::isfinite(v) ? format_double(v) : "nan";
}

struct Band {
    double lo;
    double hi;
};

Band resolve_band(const std::optional<double>& lo, const std::optional<double>& hi, Band fallback)
{
    Band b{lo.value_or(fallback.lo), hi.value_or(fallback.hi)};
    check_flag(b.lo < b.hi, [] { return std::string("--band-lo must be below --band-hi"); });
    return b;
}

std::vector<double> scan_grid(double lo, double hi, std::size_t points)
{
    check_flag(lo > 0.0 && hi > lo, [] { return std::string("need 0 < --delta-min < --delta-max"); });
    check_flag(points >= 2, [] { return std::string("--points must be at least 2"); });
    return log_grid(std::log(lo), std::log(hi), points);
}

double mean_finite(const std::vector<double>& v, std::size_t* count = nullptr)
{
    double s = 0.0;
    std::size_t k = 0;
    for (double x : v) {
        if (std::isfinite(x)) {
            s += x;
            ++k;
        }
    }
    if (count) {
        *count = k;
    }
    return k ? s / static_cast<double>(k) : std::numeric_limits<double>::quiet_NaN();
}

double std_finite(const std::vector<double>& v)
{
    std::size_t k = 0;
    const double m = mean_finite(v, &k);
    if (k < 2) {
        return std::numeric_limits<double>::quiet_NaN();
    }
    double s = 0.0;
    for (double x : v) {
        if (std::isfinite(x)) {
            s += (x - m) * (x - m);
        }
    }
    return std::sqrt(s / static_cast<double>(k - 1));
}

std::vector<double> finite_only(const std::vector<double>& v)
{
    std::vector<double> out;
    for (double x : v) {
        if (std::isfinite(x)) {
            out.push_back(x);
        }
    }
    return out;
}

}  // namespace

void write_manifest(const RunRecord& rec, const std::string& command, const json& flags)
{
    json inputs = json::array();
    for (const auto& p : rec.inputs) {
        inputs.push_back({{"path", p.string()}, {"sha256", sha256_file(p)}});
    }
    json outputs = json::array();
    for (const auto& name : rec.outputs) {
        outputs.push_back({{"path", name}, {"sha256", sha256_file(rec.out_dir / name)}});
    }
    json m = {{"tool", "wabc"},
              {"version", WABC_VERSION},
              {"command", command},
              {"flags", flags},
              {"seeds", rec.seeds},
              {"inputs", std::move(inputs)},
              {"outputs", std::move(outputs)}};
    if (!rec.extra.empty()) {
        m["details"] = rec.extra;
    }
    write_json(rec.out_dir / "manifest.json", m);
}

RunRecord run_gen(const GenOptions& o)
{
    const auto spec = parse_problem(o.problem, o.grid_res);
    check_flag(o.n >= 1, [] { return std::string("--n must be at least 1"); });
    check_flag(o.sigma >= 0.0, [] { return std::string("--sigma must be non-negative"); });
    const auto d = make_dataset(spec, o.n, o.sigma, o.seed, o.pool, nullptr);

    RunRecord rec;
    rec.out_dir = o.out;
    write_cloud_csv(o.out / "truth.csv", d.truth);
    write_cloud_csv(o.out / "train.csv", d.train);
    json meta = {{"problem", spec.name()},
                 {"M", spec.objectives},
                 {"count", o.n},
                 {"sigma", o.sigma},
                 {"seed", o.seed},
                 {"pool_size", d.pool_size}};
    if (spec.kind == ProblemKind::viennet2) {
        meta["grid_res"] = spec.grid_res;
    }
    write_json(o.out / "meta.json", meta);
    rec.outputs = {"truth.csv", "train.csv", "meta.json"};
    rec.seeds = {{"root", o.seed},
                 {"pool", derive_seed(o.seed, {label("pool")})},
                 {"subsample", derive_seed(o.seed, {label("subsample")})},
                 {"noise", derive_seed(o.seed, {label("noise")})}};
    return rec;
}

RunRecord run_fit(const FitOptions& o)
{
    check_method(o.method);
    check_flag(o.degree >= 1, [] { return std::string("--degree must be at least 1"); });
    const auto data = read_cloud_csv(o.input);
    if (o.objectives && static_cast<std::size_t>(*o.objectives) != data.dim()) {
        throw DataError(o.input.string() + " has " + std::to_string(data.dim()) + " objectives, --objectives says " +
                        std::to_string(*o.objectives));
    }
    check_fit_data(data, o.degree, o.method);
    const auto fit = fit_method(o.method, data, o.degree, o.wabc, o.aao, o.seed, !o.no_timing);

    RunRecord rec;
    rec.out_dir = o.out;
    rec.inputs = {o.input};
    json model = model_to_json(fit.model);
    model["method"] = o.method;
    write_json(o.out / "model.json", model);
    write_json(o.out / "report.json", fit.report);
    rec.outputs = {"model.json", "report.json"};
    rec.seeds = {{"root", o.seed}};
    if (o.method == "wabc") {
        rec.seeds["initial_delta"] = wabc_initial_delta_seed(o.seed);
    }
    return rec;
}

RunRecord run_eval(const EvalOptions& o)
{
    check_flag(o.samples >= 1, [] { return std::string("--samples must be at least 1"); });
    const auto model = model_from_json(read_json(o.model));
    const auto truth = read_cloud_csv(o.truth);
    if (truth.dim() != static_cast<std::size_t>(model.dim())) {
        throw DataError("model has " + std::to_string(model.dim()) + " objectives but " + o.truth.string() + " has " +
                        std::to_string(truth.dim()));
    }
    MetricsRow row;
    row.objectives = model.dim();
    row.n = truth.size();
    row.method = o.method;
    row.seed = o.seed;
    RunRecord rec;
    rec.out_dir = o.out;
    rec.inputs = {o.model, o.truth};
    if (o.meta) {
        const auto meta = read_json(*o.meta);
        try {
            row.problem = meta.at("problem").get<std::string>();
            row.sigma = meta.at("sigma").get<double>();
            row.n = meta.at("count").get<std::size_t>();
        } catch (const json::exception& e) {
            throw DataError(o.meta->string() + ": " + e.what());
        }
        rec.inputs.push_back(*o.meta);
    }
    Rng rng(o.seed);
    const auto surface = surface_sample_for_metrics(model, o.samples, rng);
    row.gd = gd(surface, truth);
    row.igd = igd(surface, truth);

    const std::string text = MetricsRow::csv_header() + "\n" + row.to_csv() + "\n";
    write_text(o.out / "metrics.csv", text);
    rec.outputs = {"metrics.csv"};
    rec.seeds = {{"root", o.seed}};
    if (o.append) {
        const bool fresh = !fs::exists(*o.append);
        std::ofstream f(*o.append, std::ios::app);
        if (!f) {
            throw DataError("cannot append to " + o.append->string());
        }
        if (fresh) {
            f << MetricsRow::csv_header() << "\n";
        }
        f << row.to_csv() << "\n";
    }
    std::cout << row.to_csv() << "\n";
    return rec;
}

RunRecord run_bench(const BenchOptions& o)
{
    check_flag(o.trials >= 1, [] { return std::string("--trials must be at least 1"); });
    check_flag(o.jobs >= 1, [] { return std::string("--jobs must be at least 1"); });
    check_flag(o.degree >= 1, [] { return std::string("--degree must be at least 1"); });
    check_flag(!o.problems.empty() && !o.ns.empty() && !o.sigmas.empty() && !o.methods.empty(),
               [] { return std::string("--problems, --n, --sigma and --methods must be non-empty"); });
    for (const auto& m : o.methods) {
        check_method(m);
    }
    for (double s : o.sigmas) {
        check_flag(s >= 0.0, [] { return std::string("--sigma values must be non-negative"); });
    }
    std::vector<ProblemSpec> specs;
    for (const auto& p : o.problems) {
        specs.push_back(parse_problem(p, o.grid_res));
    }
    // validate method flags once, before any work
    abc_config(o.wabc, 0);
    aao_config(o.aao, 0);

    std::map<int, PointCloud> viennet2_grids;
    for (const auto& s : specs) {
        if (s.kind == ProblemKind::viennet2 && !viennet2_grids.count(s.grid_res)) {
            viennet2_grids[s.grid_res] = viennet2_grid_front(s.grid_res);
        }
    }

    struct Task {
        std::size_t problem, n, sigma, trial;
    };
    std::vector<Task> tasks;
    for (std::size_t p = 0; p < specs.size(); ++p) {
        for (std::size_t a = 0; a < o.ns.size(); ++a) {
            for (std::size_t b = 0; b < o.sigmas.size(); ++b) {
                for (std::size_t t = 0; t < o.trials; ++t) {
                    tasks.push_back({p, a, b, t});
                }
            }
        }
    }
    const std::size_t nm = o.methods.size();
    std::vector<MetricsRow> rows(tasks.size() * nm);
    std::vector<std::string> errors(tasks.size() * nm);
    const double nan = std::numeric_limits<double>::quiet_NaN();

    // Trial-level parallelism; each task derives its own seeds, results land by index.
#pragma omp parallel for schedule(dynamic, 1) num_threads(o.jobs)
    for (std::ptrdiff_t ti = 0; ti < static_cast<std::ptrdiff_t>(tasks.size()); ++ti) {
        const auto& task = tasks[static_cast<std::size_t>(ti)];
        const auto& spec = specs[task.problem];
        const std::size_t n = o.ns[task.n];
        const double sigma = o.sigmas[task.sigma];
        const std::uint64_t trial_seed =
            derive_seed(o.seed, {label("bench"), label(spec.name()), n, bits(sigma), task.trial});
        Dataset data;
        std::string data_error;
        try {
            const auto it = viennet2_grids.find(spec.grid_res);
            data = make_dataset(spec, n, sigma, derive_seed(trial_seed, {label("data")}), 0,
                                spec.kind == ProblemKind::viennet2 ? &it->second : nullptr);
        } catch (const std::exception& e) {
            data_error = e.what();
        }
        for (std::size_t mi = 0; mi < nm; ++mi) {
            auto& row = rows[static_cast<std::size_t>(ti) * nm + mi];
            row.problem = spec.name();
            row.objectives = spec.objectives;
            row.n = n;
            row.sigma = sigma;
            row.method = o.methods[mi];
            row.trial = static_cast<int>(task.trial);
            row.seed = derive_seed(trial_seed, {label("fit"), label(o.methods[mi])});
            row.gd = row.igd = row.seconds = nan;
            if (!data_error.empty()) {
                errors[static_cast<std::size_t>(ti) * nm + mi] = data_error;
                continue;
            }
            try {
                check_fit_data(data.train, o.degree, o.methods[mi]);
                const auto fit =
                    fit_method(o.methods[mi], data.train, o.degree, o.wabc, o.aao, row.seed, !o.no_timing);
                Rng eval_rng(derive_seed(trial_seed, {label("eval")}));
                const auto surface = surface_sample_for_metrics(fit.model, o.metric_samples, eval_rng);
                row.gd = gd(surface, data.truth, Exec::serial);
                row.igd = igd(surface, data.truth, Exec::serial);
                row.seconds = o.no_timing ? 0.0 : fit.seconds;
            } catch (const std::exception& e) {
                errors[static_cast<std::size_t>(ti) * nm + mi] = e.what();
            }
        }
    }

    RunRecord rec;
    rec.out_dir = o.out;
    std::ostringstream results;
    results << MetricsRow::csv_header() << "\n";
    for (const auto& r : rows) {
        results << r.problem << ',' << r.objectives << ',' << r.n << ',' << csv_number(r.sigma) << ',' << r.method
                << ',' << r.trial << ',' << r.seed << ',' << csv_number(r.gd) << ',' << csv_number(r.igd) << ','
                << csv_number(r.seconds) << "\n";
    }
    write_text(o.out / "results.csv", results.str());

    std::ostringstream summary, pvalues;
    summary << "problem,M,n,sigma,method,trials,gd_mean,gd_std,igd_mean,igd_std,seconds_mean,seconds_std\n";
    pvalues << "problem,M,n,sigma,metric,method_a,method_b,statistic,p_value\n";
    // rows are grouped by (problem, n, sigma) cell, trials outer and methods inner
    for (std::size_t start = 0; start < rows.size(); start += o.trials * nm) {
        const auto& head = rows[start];
        const std::string cell = head.problem + "," + std::to_string(head.objectives) + "," +
                                 std::to_string(head.n) + "," + csv_number(head.sigma);
        std::vector<std::vector<double>> g(nm), ig(nm), sec(nm);
        for (std::size_t t = 0; t < o.trials; ++t) {
            for (std::size_t mi = 0; mi < nm; ++mi) {
                const auto& r = rows[start + t * nm + mi];
                g[mi].push_back(r.gd);
                ig[mi].push_back(r.igd);
                sec[mi].push_back(r.seconds);
            }
        }
        for (std::size_t mi = 0; mi < nm; ++mi) {
            std::size_t done = 0;
            mean_finite(g[mi], &done);
            summary << cell << ',' << o.methods[mi] << ',' << done << ',' << csv_number(mean_finite(g[mi])) << ','
                    << csv_number(std_finite(g[mi])) << ',' << csv_number(mean_finite(ig[mi])) << ','
                    << csv_number(std_finite(ig[mi])) << ',' << csv_number(mean_finite(sec[mi])) << ','
                    << csv_number(std_finite(sec[mi])) << "\n";
        }
        for (std::size_t a = 0; a < nm; ++a) {
            for (std::size_t b = a + 1; b < nm; ++b) {
                for (int metric = 0; metric < 2; ++metric) {
                    const auto xa = finite_only(metric == 0 ? g[a] : ig[a]);
                    const auto xb = finite_only(metric == 0 ? g[b] : ig[b]);
                    double z = nan, p = nan;
                    if (xa.size() >= 5 && xb.size() >= 5) {
                        const auto rs = ranksum_test(xa, xb);
                        z = rs.statistic;
                        p = rs.p_value;
                    }
                    pvalues << cell << ',' << (metric == 0 ? "gd" : "igd") << ',' << o.methods[a] << ','
                            << o.methods[b] << ',' << csv_number(z) << ',' << csv_number(p) << "\n";
                }
            }
        }
    }
    write_text(o.out / "summary.csv", summary.str());
    write_text(o.out / "pvalues.csv", pvalues.str());
    rec.outputs = {"results.csv", "summary.csv", "pvalues.csv"};

    rec.seeds = {{"root", o.seed}};
    json failures = json::array();
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (!errors[i].empty()) {
            failures.push_back({{"problem", rows[i].problem},
                                {"n", rows[i].n},
                                {"sigma", rows[i].sigma},
                                {"method", rows[i].method},
                                {"trial", rows[i].trial},
                                {"error", errors[i]}});
        }
    }
    rec.extra["failures"] = failures;
    if (!failures.empty()) {
        std::cerr << "bench: " << failures.size() << " trial(s) failed; see manifest.json\n";
    }
    return rec;
}

RunRecord run_bias_scan(const BiasScanOptions& o)
{
    BiasScanConfig cfg;
    try {
        cfg.kind = toy_from_string(o.model);
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
    cfg.n = o.n;
    cfg.n_abc = o.n_abc;
    cfg.trials = o.trials;
    cfg.delta_grid = scan_grid(o.delta_min, o.delta_max, o.points);
    cfg.max_proposals = o.max_proposals;
    cfg.seed = o.seed;
    try {
        cfg.validate();
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
    const Band band = resolve_band(o.band_lo, o.band_hi, cfg.kind == ToyKind::gaussian ? Band{1.7, 2.5} : Band{1.5, 2.7});
    const auto rep = bias_scan(cfg);

    RunRecord rec;
    rec.out_dir = o.out;
    std::ostringstream mean_csv, trial_csv;
    mean_csv << "log_delta,log_bias\n";
    trial_csv << "trial,log_delta,log_bias\n";
    for (std::size_t c = 0; c < cfg.delta_grid.size(); ++c) {
        if (std::isfinite(rep.mean_bias[c]) && rep.mean_bias[c] > 0.0) {
            mean_csv << format_double(std::log(cfg.delta_grid[c])) << ',' << format_double(std::log(rep.mean_bias[c]))
                     << "\n";
        }
    }
    for (std::size_t t = 0; t < rep.trials.size(); ++t) {
        for (std::size_t c = 0; c < cfg.delta_grid.size(); ++c) {
            const auto& b = rep.trials[t].bias[c];
            if (b && *b > 0.0) {
                trial_csv << t << ',' << format_double(std::log(cfg.delta_grid[c])) << ','
                          << format_double(std::log(*b)) << "\n";
            }
        }
    }
    write_text(o.out / "bias.csv", mean_csv.str());
    write_text(o.out / "trials.csv", trial_csv.str());
    json summary = bias_scan_to_json(rep);
    const double stat = rep.slope_mid_mean;
    summary["check"] = {{"statistic", "slope_mid.mean"},
                        {"value", std::isfinite(stat) ? json(stat) : json(nullptr)},
                        {"band", {band.lo, band.hi}},
                        {"pass", std::isfinite(stat) && stat >= band.lo && stat <= band.hi}};
    write_json(o.out / "summary.json", summary);
    rec.outputs = {"bias.csv", "trials.csv", "summary.json"};
    rec.seeds = {{"root", o.seed}};
    if (rep.missing_cells) {
        std::cerr << "bias-scan: " << rep.missing_cells << " cell(s) missed the proposal budget\n";
    }
    return rec;
}

RunRecord run_accept_scan(const AcceptScanOptions& o)
{
    AcceptanceScanConfig cfg;
    try {
        cfg.kind = toy_from_string(o.model);
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
    cfg.n = o.n;
    cfg.delta_grid = scan_grid(o.delta_min, o.delta_max, o.points);
    cfg.proposals = o.proposals;
    cfg.seed = o.seed;
    try {
        cfg.validate();
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
    const double q = static_cast<double>(o.n);
    const Band band = resolve_band(o.band_lo, o.band_hi, Band{q - 0.3, q + 0.3});
    const auto rep = acceptance_scan(cfg);

    RunRecord rec;
    rec.out_dir = o.out;
    std::ostringstream csv;
    csv << "log_delta,log_rate\n";
    for (const auto& c : rep.cells) {
        if (c.accepted > 0) {
            csv << format_double(std::log(c.delta)) << ',' << format_double(std::log(c.rate)) << "\n";
        }
    }
    write_text(o.out / "acceptance.csv", csv.str());
    json summary = acceptance_scan_to_json(rep);
    summary["check"] = {{"statistic", "slope"},
                        {"value", std::isfinite(rep.slope) ? json(rep.slope) : json(nullptr)},
                        {"band", {band.lo, band.hi}},
                        {"pass", std::isfinite(rep.slope) && rep.slope >= band.lo && rep.slope <= band.hi}};
    write_json(o.out / "summary.json", summary);
    rec.outputs = {"acceptance.csv", "summary.json"};
    rec.seeds = {{"root", o.seed},
                 {"data", derive_seed(o.seed, {label("data")})},
                 {"proposals", derive_seed(o.seed, {label("proposals")})}};
    if (rep.flagged_cells) {
        std::cerr << "accept-scan: " << rep.flagged_cells << " cell(s) had no acceptances\n";
    }
    return rec;
}

namespace {

std::string sci(double v)
{
    if (!std::isfinite(v)) {
        return "nan";
    }
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2E", v);
    return buf;
}

std::vector<std::vector<std::string>> read_csv_rows(const fs::path& p)
{
    std::vector<std::vector<std::string>> rows;
    std::istringstream in(read_text(p));
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.empty()) {
            continue;
        }
        std::vector<std::string> cells;
        std::istringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) {
            cells.push_back(cell);
        }
        rows.push_back(std::move(cells));
    }
    return rows;
}

double to_double(const std::string& s)
{
    try {
        return std::stod(s);
    } catch (const std::exception&) {
        return std::numeric_limits<double>::quiet_NaN();
    }
}

void report_bench(const fs::path& dir, std::ostream& out)
{
    const auto summary = read_csv_rows(dir / "summary.csv");
    std::map<std::string, std::string> marks;
    if (fs::exists(dir / "pvalues.csv")) {
        const auto pv = read_csv_rows(dir / "pvalues.csv");
        for (std::size_t i = 1; i < pv.size(); ++i) {
            if (pv[i].size() < 9) {
                throw DataError((dir / "pvalues.csv").string() + ": malformed row");
            }
            const double p = to_double(pv[i][8]);
            if (std::isfinite(p) && p < 0.05) {
                const std::string cell = pv[i][0] + "," + pv[i][2] + "," + pv[i][3] + "," + pv[i][4];
                marks[cell] += "*";
            }
        }
    }
    out << "problem  n  sigma  method  GD (mean+-std)  IGD (mean+-std)  time[s]\n";
    for (std::size_t i = 1; i < summary.size(); ++i) {
        const auto& r = summary[i];
        if (r.size() < 12) {
            throw DataError((dir / "summary.csv").string() + ": malformed row");
        }
        const std::string cell = r[0] + "," + r[2] + "," + r[3];
        out << r[0] << "  " << r[2] << "  " << r[3] << "  " << r[4] << "  " << sci(to_double(r[6])) << "+-"
            << sci(to_double(r[7])) << marks[cell + ",gd"] << "  " << sci(to_double(r[8])) << "+-"
            << sci(to_double(r[9])) << marks[cell + ",igd"] << "  " << sci(to_double(r[10])) << "\n";
    }
    out << "(* rank-sum p < 0.05 between methods in that cell)\n";
}

void report_summary(const fs::path& file, std::ostream& out)
{
    const auto j = read_json(file);
    if (!j.contains("check")) {
        throw DataError(file.string() + ": no check section");
    }
    const auto& c = j.at("check");
    const auto& band = c.at("band");
    out << j.value("model", std::string("?")) << " n=" << j.value("n", 0) << ": " << c.at("statistic").get<std::string>()
        << " = " << (c.at("value").is_null() ? std::string("nan") : format_double(c.at("value").get<double>()))
        << " band [" << format_double(band[0].get<double>()) << ", " << format_double(band[1].get<double>())
        << "] " << (c.at("pass").get<bool>() ? "PASS" : "FAIL") << "\n";
}

void report_fit(const fs::path& file, std::ostream& out)
{
    const auto j = read_json(file);
    if (j.value("method", std::string()) == "wabc") {
        out << "wabc: " << j.at("rounds").size() << " round(s), termination " << j.at("termination").get<std::string>()
            << ", initial delta " << format_double(j.at("initial_delta").get<double>()) << "\n";
    } else {
        const auto& traj = j.at("loss_trajectory");
        out << "aao: " << j.at("outer_iterations").get<int>() << " outer iteration(s), final loss "
            << (traj.empty() ? std::string("nan") : format_double(traj.back().get<double>())) << "\n";
    }
}

}  // namespace

std::optional<RunRecord> run_report(const ReportOptions& o)
{
    check_flag(!o.dirs.empty(), [] { return std::string("report needs at least one run directory"); });
    std::ostringstream text;
    RunRecord rec;
    for (const auto& dir : o.dirs) {
        if (!fs::is_directory(dir)) {
            throw DataError(dir.string() + " is not a directory");
        }
        text << "== " << dir.string() << "\n";
        bool found = false;
        try {
            if (fs::exists(dir / "summary.csv")) {
                report_bench(dir, text);
                rec.inputs.push_back(dir / "summary.csv");
                found = true;
            }
            if (fs::exists(dir / "summary.json")) {
                report_summary(dir / "summary.json", text);
                rec.inputs.push_back(dir / "summary.json");
                found = true;
            }
            if (fs::exists(dir / "report.json")) {
                report_fit(dir / "report.json", text);
                rec.inputs.push_back(dir / "report.json");
                found = true;
            }
            if (fs::exists(dir / "meta.json")) {
                const auto meta = read_json(dir / "meta.json");
                text << "data: " << meta.at("problem").get<std::string>() << ", " << meta.at("count").get<std::size_t>()
                     << " points, sigma " << format_double(meta.at("sigma").get<double>()) << "\n";
                rec.inputs.push_back(dir / "meta.json");
                found = true;
            }
            if (fs::exists(dir / "metrics.csv")) {
                const auto rows = read_csv_rows(dir / "metrics.csv");
                for (std::size_t i = 1; i < rows.size(); ++i) {
                    if (rows[i].size() < 10) {
                        throw DataError((dir / "metrics.csv").string() + ": malformed row");
                    }
                    text << rows[i][4] << ": GD " << sci(to_double(rows[i][7])) << "  IGD "
                         << sci(to_double(rows[i][8])) << "\n";
                }
                rec.inputs.push_back(dir / "metrics.csv");
                found = true;
            }
        } catch (const json::exception& e) {
            throw DataError(dir.string() + ": " + e.what());
        }
        if (!found) {
            throw DataError(dir.string() + " contains no recognized run output");
        }
    }
    std::cout << text.str();
    if (!o.out) {
        return std::nullopt;
    }
    rec.out_dir = *o.out;
    write_text(*o.out / "report.txt", text.str());
    rec.outputs = {"report.txt"};
    return rec;
}

}  // namespace wabc::cli
