#include "wabc/io.hpp"

#include <openssl/evp.h>

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

namespace wabc {

std::string format_double(double v)
{
    std::array<char, 64> buf{};
    const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return {buf.data(), res.ptr};
}

namespace {

std::vector<std::string> split(const std::string& line, char sep)
{
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == sep) {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur.push_back(c);
        }
    }
    out.push_back(cur);
    return out;
}

double parse_double(const std::string& s, std::size_t line)
{
    double v = 0.0;
    const char* first = s.data();
    const char* last = s.data() + s.size();
    while (first < last && *first == ' ') {
        ++first;
    }
    while (last > first && last[-1] == ' ') {
        --last;
    }
    const auto res = std::from_chars(first, last, v);
    if (res.ec != std::errc() || res.ptr != last || first == last) {
        throw DataError("line " + std::to_string(line) + ": cannot parse '" + s + "' as a number");
    }
    if (!std::isfinite(v)) {
        throw DataError("line " + std::to_string(line) + ": non-finite value '" + s + "'");
    }
    return v;
}

// NaN and infinities are written as null.
json number_or_null(double v)
{
    return std::isfinite(v) ? json(v) : json(nullptr);
}

double json_number(const json& j)
{
    return j.is_null() ? std::numeric_limits<double>::quiet_NaN() : j.get<double>();
}

json matrix_to_json(const Matrix& m)
{
    json rows = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index k = 0; k < m.cols(); ++k) {
            row.push_back(m(i, k));
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

json vector_to_json(const Vector& v)
{
    json out = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        out.push_back(v(i));
    }
    return out;
}

Vector vector_from_json(const json& j, Eigen::Index dim)
{
    if (!j.is_array() || static_cast<Eigen::Index>(j.size()) != dim) {
        throw DataError("expected an array of " + std::to_string(dim) + " numbers");
    }
    Vector v(dim);
    for (Eigen::Index i = 0; i < dim; ++i) {
        v(i) = j[static_cast<std::size_t>(i)].get<double>();
    }
    return v;
}

Matrix matrix_from_json(const json& j, Eigen::Index dim)
{
    if (!j.is_array() || static_cast<Eigen::Index>(j.size()) != dim) {
        throw DataError("expected a " + std::to_string(dim) + "x" + std::to_string(dim) + " matrix");
    }
    Matrix m(dim, dim);
    for (Eigen::Index i = 0; i < dim; ++i) {
        m.row(i) = vector_from_json(j[static_cast<std::size_t>(i)], dim).transpose();
    }
    return m;
}

}  // namespace

std::string cloud_to_csv(const PointCloud& cloud)
{
    std::string out;
    for (std::size_t m = 0; m < cloud.dim(); ++m) {
        out += (m ? ",f" : "f") + std::to_string(m + 1);
    }
    out += '\n';
    for (std::size_t i = 0; i < cloud.size(); ++i) {
        const auto p = cloud.point(i);
        for (std::size_t m = 0; m < p.size(); ++m) {
            if (m) {
                out += ',';
            }
            out += format_double(p[m]);
        }
        out += '\n';
    }
    return out;
}

PointCloud cloud_from_csv(const std::string& text)
{
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    std::size_t dim = 0;
    std::vector<std::vector<double>> rows;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.empty()) {
            continue;
        }
        const auto fields = split(line, ',');
        if (dim == 0) {
            for (std::size_t m = 0; m < fields.size(); ++m) {
                if (fields[m] != "f" + std::to_string(m + 1)) {
                    throw DataError("line 1: expected header f1,...,fM");
                }
            }
            dim = fields.size();
            continue;
        }
        if (fields.size() != dim) {
            throw DataError("line " + std::to_string(lineno) + ": expected " + std::to_string(dim) + " fields, got " +
                            std::to_string(fields.size()));
        }
        std::vector<double> row;
        row.reserve(dim);
        for (const auto& f : fields) {
            row.push_back(parse_double(f, lineno));
        }
        rows.push_back(std::move(row));
    }
    if (dim == 0) {
        throw DataError("empty CSV: missing header");
    }
    if (rows.empty()) {
        throw DataError("CSV contains no points");
    }
    return PointCloud::from_rows(rows);
}

std::string read_text(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw DataError("cannot open " + path.string());
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text(const std::filesystem::path& path, const std::string& text)
{
    std::error_code ec;
    if (path.has_parent_path()) {
        std::filesystem::create_directories(path.parent_path(), ec);
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw DataError("cannot write " + path.string());
    }
    out << text;
    if (!out) {
        throw DataError("write failed for " + path.string());
    }
}

void write_cloud_csv(const std::filesystem::path& path, const PointCloud& cloud)
{
    write_text(path, cloud_to_csv(cloud));
}

PointCloud read_cloud_csv(const std::filesystem::path& path)
{
    try {
        return cloud_from_csv(read_text(path));
    } catch (const DataError& e) {
        throw DataError(path.string() + ": " + e.what());
    }
}

json read_json(const std::filesystem::path& path)
{
    try {
        return json::parse(read_text(path));
    } catch (const json::exception& e) {
        throw DataError(path.string() + ": " + e.what());
    }
}

void write_json(const std::filesystem::path& path, const json& j)
{
    write_text(path, j.dump(2) + "\n");
}

json model_to_json(const BezierModel& model)
{
    const auto& cps = model.control_points();
    json points = json::array();
    for (std::size_t k = 0; k < cps.size(); ++k) {
        points.push_back({{"degree", cps.basis().degree(k)},
                          {"point", vector_to_json(cps.points().row(static_cast<Eigen::Index>(k)).transpose())}});
    }
    return {{"order", model.order()}, {"dim", model.dim()}, {"control_points", std::move(points)}};
}

BezierModel model_from_json(const json& j)
{
    try {
        const int order = j.at("order").get<int>();
        const int dim = j.at("dim").get<int>();
        auto basis = BezierBasis::make(order, dim);
        const auto& entries = j.at("control_points");
        if (!entries.is_array() || entries.size() != basis->size()) {
            throw DataError("model: expected " + std::to_string(basis->size()) + " control points");
        }
        RowMatrix pts(static_cast<Eigen::Index>(basis->size()), dim);
        std::vector<char> seen(basis->size(), 0);
        for (const auto& e : entries) {
            const auto degree = e.at("degree").get<Degree>();
            std::size_t k = 0;
            try {
                k = basis->index_of(degree);
            } catch (const std::out_of_range&) {
                throw DataError("model: invalid degree");
            }
            if (seen[k]) {
                throw DataError("model: duplicate degree");
            }
            seen[k] = 1;
            pts.row(static_cast<Eigen::Index>(k)) = vector_from_json(e.at("point"), dim).transpose();
        }
        return BezierModel(ControlPointSet(std::move(basis), std::move(pts)));
    } catch (const json::exception& e) {
        throw DataError(std::string("model: ") + e.what());
    } catch (const std::invalid_argument& e) {
        throw DataError(std::string("model: ") + e.what());
    }
}

json hyperparams_to_json(const PriorHyperParams& hp)
{
    json factors = json::array();
    for (std::size_t k = 0; k < hp.size(); ++k) {
        factors.push_back({{"degree", hp.basis().degree(k)},
                           {"mean", vector_to_json(hp.factor(k).mean)},
                           {"cov", matrix_to_json(hp.factor(k).cov)}});
    }
    return {{"order", hp.order()}, {"dim", hp.dim()}, {"factors", std::move(factors)}};
}

PriorHyperParams hyperparams_from_json(const json& j)
{
    try {
        const int order = j.at("order").get<int>();
        const int dim = j.at("dim").get<int>();
        auto basis = BezierBasis::make(order, dim);
        std::vector<GaussianFactor> factors(basis->size());
        const auto& entries = j.at("factors");
        if (entries.size() != basis->size()) {
            throw DataError("hyperparams: wrong number of factors");
        }
        for (const auto& e : entries) {
            const auto k = basis->index_of(e.at("degree").get<Degree>());
            factors[k] = {vector_from_json(e.at("mean"), dim), matrix_from_json(e.at("cov"), dim)};
        }
        return {std::move(basis), std::move(factors)};
    } catch (const json::exception& e) {
        throw DataError(std::string("hyperparams: ") + e.what());
    }
}

json fit_report_to_json(const FitReport& report, bool with_timing)
{
    json rounds = json::array();
    for (const auto& r : report.rounds) {
        json jr = {{"round", r.round},
                   {"attempted", r.attempted},
                   {"accepted", r.accepted},
                   {"acceptance_rate", r.acceptance_rate},
                   {"delta", r.delta},
                   {"epsilon", number_or_null(r.epsilon)},
                   {"max_eigenvalue", number_or_null(r.max_eigenvalue)}};
        if (r.hyperparams) {
            jr["hyperparams"] = hyperparams_to_json(*r.hyperparams);
        }
        rounds.push_back(std::move(jr));
    }
    return {{"method", "wabc"},
            {"seed", report.seed},
            {"initial_delta", report.initial_delta},
            {"termination", to_string(report.termination)},
            {"seconds", with_timing ? report.seconds : 0.0},
            {"hyperparams", hyperparams_to_json(report.hyperparams)},
            {"rounds", std::move(rounds)}};
}

FitReport fit_report_from_json(const json& j)
{
    try {
        FitReport r;
        r.seed = j.at("seed").get<std::uint64_t>();
        r.initial_delta = j.at("initial_delta").get<double>();
        r.termination = termination_from_string(j.at("termination").get<std::string>());
        r.seconds = j.at("seconds").get<double>();
        r.hyperparams = hyperparams_from_json(j.at("hyperparams"));
        for (const auto& jr : j.at("rounds")) {
            AbcRoundTrace t;
            t.round = jr.at("round").get<std::size_t>();
            t.attempted = jr.at("attempted").get<std::size_t>();
            t.accepted = jr.at("accepted").get<std::size_t>();
            t.acceptance_rate = jr.at("acceptance_rate").get<double>();
            t.delta = jr.at("delta").get<double>();
            t.epsilon = json_number(jr.at("epsilon"));
            t.max_eigenvalue = json_number(jr.at("max_eigenvalue"));
            if (jr.contains("hyperparams")) {
                t.hyperparams = std::make_shared<const PriorHyperParams>(hyperparams_from_json(jr.at("hyperparams")));
            }
            r.rounds.push_back(std::move(t));
        }
        return r;
    } catch (const json::exception& e) {
        throw DataError(std::string("fit report: ") + e.what());
    }
}

json aao_result_to_json(const AaoResult& result, bool with_timing)
{
    return {{"method", "aao"},
            {"outer_iterations", result.outer_iterations},
            {"unconverged_projections", result.unconverged_projections},
            {"loss_trajectory", result.loss_trajectory},
            {"seconds", with_timing ? result.seconds : 0.0}};
}

json bias_scan_to_json(const BiasScanReport& report)
{
    const auto& cfg = report.config;
    json trials = json::array();
    for (const auto& t : report.trials) {
        json bias = json::array();
        for (const auto& b : t.bias) {
            bias.push_back(b ? json(*b) : json(nullptr));
        }
        trials.push_back({{"data_seed", t.data_seed},
                          {"proposal_seed", t.proposal_seed},
                          {"posterior_mean", number_or_null(t.posterior_mean)},
                          {"bias", std::move(bias)},
                          {"attempted", t.attempted},
                          {"slope_all", number_or_null(t.fit_all.slope)},
                          {"intercept_all", number_or_null(t.fit_all.intercept)},
                          {"slope_mid", number_or_null(t.fit_middle.slope)},
                          {"intercept_mid", number_or_null(t.fit_middle.intercept)}});
    }
    json mean_bias = json::array();
    for (double b : report.mean_bias) {
        mean_bias.push_back(number_or_null(b));
    }
    return {{"model", to_string(cfg.kind)},
            {"n", cfg.n},
            {"n_abc", cfg.n_abc},
            {"trials", cfg.trials},
            {"seed", cfg.seed},
            {"max_proposals", cfg.max_proposals},
            {"delta_grid", cfg.delta_grid},
            {"mean_bias", mean_bias},
            {"slope_all",
             {{"mean", number_or_null(report.slope_all_mean)}, {"std", number_or_null(report.slope_all_std)}}},
            {"slope_mid",
             {{"mean", number_or_null(report.slope_mid_mean)}, {"std", number_or_null(report.slope_mid_std)}}},
            {"intercept_all_mean", number_or_null(report.intercept_all_mean)},
            {"intercept_mid_mean", number_or_null(report.intercept_mid_mean)},
            {"missing_cells", report.missing_cells},
            {"per_trial", std::move(trials)}};
}

json acceptance_scan_to_json(const AcceptanceScanReport& report)
{
    const auto& cfg = report.config;
    json cells = json::array();
    for (const auto& c : report.cells) {
        cells.push_back({{"delta", c.delta}, {"accepted", c.accepted}, {"rate", c.rate}});
    }
    return {{"model", to_string(cfg.kind)},
            {"n", cfg.n},
            {"proposals", cfg.proposals},
            {"seed", cfg.seed},
            {"data", report.data},
            {"cells", std::move(cells)},
            {"slope", number_or_null(report.slope)},
            {"intercept", number_or_null(report.intercept)},
            {"predicted_exponent", report.predicted_exponent},
            {"flagged_cells", report.flagged_cells}};
}

std::string sha256_file(const std::filesystem::path& path)
{
    const auto bytes = read_text(path);
    std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), digest.data(), &len, EVP_sha256(), nullptr) != 1) {
        throw std::runtime_error("sha256 failed for " + path.string());
    }
    std::ostringstream hex;
    for (unsigned int i = 0; i < len; ++i) {
        hex << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(digest[i]);
    }
    return hex.str();
}

}  // namespace wabc
