#include "grpx/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <regex>
#include <sstream>

#include <CLI11.hpp>

#include "config_schema_text.hpp"
#include "grpx/conditional.hpp"
#include "grpx/errors.hpp"
#include "grpx/kernel.hpp"
#include "grpx/malliavin.hpp"
#include "grpx/parallel.hpp"
#include "grpx/rde.hpp"
#include "grpx/rough_path.hpp"
#include "grpx/variation.hpp"
#include "grpx/young.hpp"

namespace grpx::cli {
namespace {

const char* kModule = "cli";
using nlohmann::json;

enum class LogLevel { quiet, error, info, debug };

LogLevel log_level() {
    const char* v = std::getenv("GRPX_LOG");
    if (!v) return LogLevel::error;
    const std::string s(v);
    if (s == "quiet" || s == "0") return LogLevel::quiet;
    if (s == "info" || s == "1") return LogLevel::info;
    if (s == "debug" || s == "2") return LogLevel::debug;
    return LogLevel::error;
}

// Non-finite doubles become strings so the JSON stays valid and round-trips.
json jnum(double x) {
    if (std::isfinite(x)) return x;
    if (std::isnan(x)) return "nan";
    return x > 0 ? "inf" : "-inf";
}

json jvec(const Eigen::VectorXd& v) {
    json a = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(jnum(v(i)));
    return a;
}

std::string type_of(const json& v) {
    if (v.is_object()) return "object";
    if (v.is_array()) return "array";
    if (v.is_string()) return "string";
    if (v.is_boolean()) return "boolean";
    if (v.is_null()) return "null";
    if (v.is_number_integer()) return "integer";
    return "number";
}

bool has_type(const json& v, const std::string& t) {
    if (t == "number") return v.is_number();
    if (t == "integer") {
        if (v.is_number_integer()) return true;
        if (!v.is_number_float()) return false;
        const double d = v.get<double>();
        return std::isfinite(d) && d == std::floor(d);
    }
    return type_of(v) == t;
}

void validate_at(const json& schema, const json& v, const std::string& ptr, std::vector<std::string>& errs) {
    const std::string where = ptr.empty() ? "/" : ptr;
    if (schema.contains("type")) {
        const auto& t = schema["type"];
        bool ok = false;
        if (t.is_string()) ok = has_type(v, t.get<std::string>());
        else
            for (const auto& x : t) ok = ok || has_type(v, x.get<std::string>());
        if (!ok) {
            errs.push_back(where + ": expected " + t.dump() + ", got " + type_of(v));
            return;
        }
    }
    if (schema.contains("enum")) {
        const auto& e = schema["enum"];
        if (std::find(e.begin(), e.end(), v) == e.end())
            errs.push_back(where + ": value " + v.dump() + " not in " + e.dump());
    }
    if (v.is_number()) {
        const double x = v.get<double>();
        if (schema.contains("minimum") && x < schema["minimum"].get<double>())
            errs.push_back(where + ": " + v.dump() + " < minimum " + schema["minimum"].dump());
        if (schema.contains("maximum") && x > schema["maximum"].get<double>())
            errs.push_back(where + ": " + v.dump() + " > maximum " + schema["maximum"].dump());
        if (schema.contains("exclusiveMinimum") && !(x > schema["exclusiveMinimum"].get<double>()))
            errs.push_back(where + ": " + v.dump() + " must exceed " + schema["exclusiveMinimum"].dump());
        if (schema.contains("exclusiveMaximum") && !(x < schema["exclusiveMaximum"].get<double>()))
            errs.push_back(where + ": " + v.dump() + " must be below " + schema["exclusiveMaximum"].dump());
    }
    if (v.is_array()) {
        const auto n = static_cast<long long>(v.size());
        if (schema.contains("minItems") && n < schema["minItems"].get<long long>())
            errs.push_back(where + ": needs at least " + schema["minItems"].dump() + " items");
        if (schema.contains("maxItems") && n > schema["maxItems"].get<long long>())
            errs.push_back(where + ": allows at most " + schema["maxItems"].dump() + " items");
        if (schema.contains("items"))
            for (std::size_t i = 0; i < v.size(); ++i)
                validate_at(schema["items"], v[i], ptr + "/" + std::to_string(i), errs);
    }
    if (v.is_object()) {
        if (schema.contains("required"))
            for (const auto& r : schema["required"])
                if (!v.contains(r.get<std::string>()))
                    errs.push_back(where + ": missing required key \"" + r.get<std::string>() + "\"");
        const json props = schema.value("properties", json::object());
        const json patterns = schema.value("patternProperties", json::object());
        const bool closed = schema.contains("additionalProperties") && schema["additionalProperties"].is_boolean() &&
                            !schema["additionalProperties"].get<bool>();
        for (auto it = v.begin(); it != v.end(); ++it) {
            const std::string child = ptr + "/" + it.key();
            bool matched = false;
            if (props.contains(it.key())) {
                matched = true;
                validate_at(props[it.key()], it.value(), child, errs);
            }
            for (auto p = patterns.begin(); p != patterns.end(); ++p)
                if (std::regex_search(it.key(), std::regex(p.key()))) {
                    matched = true;
                    validate_at(p.value(), it.value(), child, errs);
                }
            if (!matched && closed) errs.push_back(child + ": unknown key");
        }
    }
}

// ---- config access ----

json section(const RunContext& ctx, const char* name) {
    return ctx.config.value(name, json::object());
}

CovarianceKernel kernel_of(const RunContext& ctx) {
    if (!ctx.config.contains("kernel")) throw ConfigError(kModule, "this command needs \"kernel\"");
    return CovarianceKernel::from_json(ctx.config["kernel"]);
}

VectorFields fields_of(const RunContext& ctx) {
    if (!ctx.config.contains("fields")) throw ConfigError(kModule, "this command needs \"fields\"");
    return VectorFields::from_json(ctx.config["fields"]);
}

Eigen::VectorXd y0_of(const RunContext& ctx, int e) {
    if (!ctx.config.contains("y0")) throw ConfigError(kModule, "this command needs \"y0\"");
    const auto& a = ctx.config["y0"];
    if (static_cast<int>(a.size()) != e) throw ConfigError(kModule, "y0 must have e = " + std::to_string(e) + " entries");
    Eigen::VectorXd y(e);
    for (int i = 0; i < e; ++i) y(i) = a[static_cast<std::size_t>(i)].get<double>();
    return y;
}

EnsembleConfig ensemble_of(const RunContext& ctx, const json& sec, int n_paths, int grid_size) {
    EnsembleConfig c;
    c.kernel = kernel_of(ctx);
    c.fields = fields_of(ctx);
    c.y0 = y0_of(ctx, c.fields.e);
    c.t = sec.value("t", c.kernel.horizon());
    c.n_paths = sec.value("n_paths", n_paths);
    c.grid_size = sec.value("grid_size", grid_size);
    c.max_substep = sec.value("max_substep", c.max_substep);
    c.base_seed = ctx.seed;
    c.validate();
    return c;
}

std::string join(const std::vector<std::string>& v, const char* sep = ", ") {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? sep : "") + v[i];
    return s;
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char c : s) q += c == '"' ? std::string("\"\"") : std::string(1, c);
    return q + "\"";
}

}  // namespace

const json& config_schema() {
    static const json schema = json::parse(config_schema_text);
    return schema;
}

std::vector<std::string> validate(const json& schema, const json& value) {
    std::vector<std::string> errs;
    validate_at(schema, value, "", errs);
    return errs;
}

std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string hex64(std::uint64_t v) {
    std::ostringstream os;
    os << std::hex << std::setw(16) << std::setfill('0') << v;
    return os.str();
}

std::string format_double(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    std::ostringstream os;
    os.imbue(std::locale::classic());
    os << std::setprecision(17) << x;
    return os.str();
}

std::string Table::to_csv(const std::string& provenance) const {
    std::ostringstream os;
    os << "# " << provenance << "\n";
    std::vector<std::string> head;
    for (const auto& c : columns) head.push_back(csv_field(c));
    os << join(head, ",") << "\n";
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) os << ",";
            std::visit(
                [&](const auto& v) {
                    using T = std::decay_t<decltype(v)>;
                    if constexpr (std::is_same_v<T, double>) os << format_double(v);
                    else if constexpr (std::is_same_v<T, long long>) os << v;
                    else if constexpr (std::is_same_v<T, bool>) os << (v ? "true" : "false");
                    else os << csv_field(v);
                },
                row[i]);
        }
        os << "\n";
    }
    return os.str();
}

json Table::to_json() const {
    json a = json::array();
    for (const auto& row : rows) {
        json o = json::object();
        for (std::size_t i = 0; i < row.size() && i < columns.size(); ++i)
            std::visit(
                [&](const auto& v) {
                    using T = std::decay_t<decltype(v)>;
                    if constexpr (std::is_same_v<T, double>) o[columns[i]] = jnum(v);
                    else o[columns[i]] = v;
                },
                row[i]);
        a.push_back(o);
    }
    return a;
}

// ---- commands ----

CommandResult cmd_check(const RunContext& ctx) {
    const auto k = kernel_of(ctx);
    const json sec = section(ctx, "check");
    const int trials = sec.value("trials", 50), depth = sec.value("depth", 5), max_n = sec.value("max_n", 12);
    const int nd_trials = sec.value("nd_trials", 200), nd_depth = sec.value("nd_depth", 3);

    std::vector<ConditionReport> reps = {
        check_non_determinism(k, nd_trials, nd_depth, ctx.seed),
        check_nonneg_cond_cov(k, trials, depth, ctx.seed),
        check_diag_dominance(k, trials, max_n, ctx.seed),
        check_non_degeneracy(k, trials, max_n, ctx.seed),
    };
    CommandResult res;
    Table tab{"check", {"condition", "pass"}, {}};
    std::vector<std::string> ok, bad;
    json arr = json::array();
    for (const auto& r : reps) {
        arr.push_back(r.to_json());
        tab.rows.push_back({to_string(r.condition), r.pass});
        (r.pass ? ok : bad).push_back(to_string(r.condition));
    }
    if (ctx.config.contains("fields") || ctx.config.contains("y0")) {
        const auto f = fields_of(ctx);
        const auto y0 = y0_of(ctx, f.e);
        const auto h = hormander_rank(f, y0, sec.value("hormander_level", 4));
        arr.push_back({{"condition", "Hormander"},
                       {"pass", h.pass},
                       {"witness", h.pass ? json(nullptr) : json({{"y0", jvec(y0)}, {"rank", h.rank}})},
                       {"statistics", {{"level_attained", h.level_attained},
                                       {"rank", h.rank},
                                       {"rank_per_level", h.rank_per_level}}}});
        tab.rows.push_back({std::string("Hormander"), h.pass});
        (h.pass ? ok : bad).push_back("Hormander");
    }
    res.report = {{"kernel", k.to_json()}, {"reports", arr}, {"verified", ok}, {"failed", bad}};
    res.pass = bad.empty();
    res.summary = bad.empty() ? "hypotheses verified: " + join(ok)
                              : "hypotheses failed: " + join(bad) + (ok.empty() ? "" : "; verified: " + join(ok));
    res.tables.push_back(std::move(tab));
    return res;
}

CommandResult cmd_variation(const RunContext& ctx) {
    const auto k = kernel_of(ctx);
    const json sec = section(ctx, "variation");
    if (!sec.contains("rho")) throw ConfigError(kModule, "variation needs \"rho\"");
    const double rho = sec["rho"].get<double>();
    VariationSearch search{sec.value("max_depth", 8), sec.value("local_moves", 0)};
    std::vector<std::pair<double, double>> intervals;
    if (sec.contains("intervals")) {
        for (const auto& iv : sec["intervals"]) intervals.emplace_back(iv[0].get<double>(), iv[1].get<double>());
    } else {
        for (int j = 0; j <= 4; ++j) intervals.emplace_back(0.0, k.horizon() / std::ldexp(1.0, j));
    }
    for (const auto& [s, t] : intervals)
        if (!(s >= 0 && t > s && t <= k.horizon()))
            throw ConfigError(kModule, "intervals must satisfy 0 <= s < t <= horizon");

    const auto rep = holder_controlled_check(k, rho, intervals, search);
    CommandResult res;
    Table tab{"variation", {"s", "t", "v_rho", "ratio", "c_hat"}, {}};
    for (const auto& r : rep.rows) tab.rows.push_back({r.s, r.t, r.v_rho, r.ratio, rep.c_hat});
    res.report = {{"kernel", k.to_json()}, {"rho", rho},       {"max_depth", search.max_depth},
                  {"local_moves", search.local_moves},      {"c_hat", jnum(rep.c_hat)},
                  {"log_slope", jnum(rep.log_slope)},       {"lower_bound", true}};
    res.pass = rep.pass;
    res.summary = "variation rho=" + format_double(rho) + " c_hat=" + format_double(rep.c_hat) +
                  (rep.pass ? " controlled" : " not controlled");
    res.tables.push_back(std::move(tab));
    return res;
}

CommandResult cmd_qp(const RunContext& ctx) {
    const json sec = section(ctx, "qp");
    if (!sec.contains("Q")) throw ConfigError(kModule, "qp needs \"Q\", \"k\" and \"b\"");
    const auto& rows = sec["Q"];
    const int n = static_cast<int>(rows.size());
    Eigen::MatrixXd q(n, n);
    for (int i = 0; i < n; ++i) {
        if (static_cast<int>(rows[static_cast<std::size_t>(i)].size()) != n)
            throw ConfigError(kModule, "Q must be square");
        for (int j = 0; j < n; ++j) q(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)].get<double>();
    }
    const int kf = sec["k"].get<int>();
    const double b = sec["b"].get<double>();
    const auto r = qp_lower_bound(q, kf, b);

    CommandResult res;
    Table tab{"qp", {"index", "constrained", "minimizer", "dual", "s_row_sum"}, {}};
    const int m = n - kf;
    for (int i = 0; i < n; ++i) {
        const bool con = i >= kf;
        const double rs = con ? r.S.row(i - kf).sum() : 0.0;
        tab.rows.push_back({static_cast<long long>(i), con, r.minimizer(i), r.dual(i), rs});
    }
    res.report = {{"n", n}, {"k", kf}, {"b", b}, {"constrained", m}, {"value", jnum(r.value)}, {"feasible", r.feasible}};
    res.pass = r.feasible;
    res.summary = "qp value=" + format_double(r.value) + (r.feasible ? " feasible" : " infeasible (closed form not the minimum)");
    res.tables.push_back(std::move(tab));
    return res;
}

CommandResult cmd_young(const RunContext& ctx) {
    const auto k = kernel_of(ctx);
    const json sec = section(ctx, "young");
    const int trials = sec.value("trials", 100), depth = sec.value("depth", 10);
    const double gamma = sec.value("gamma", 0.45), S = sec.value("S", k.horizon());
    const auto rows = interpolation_trials(k, trials, gamma, S, depth, ctx.seed);

    CommandResult res;
    Table tab{"young", {"trial", "branch", "lhs", "rhs", "margin", "holds"}, {}};
    int violations = 0, l2 = 0;
    for (const auto& r : rows) {
        tab.rows.push_back({static_cast<long long>(r.trial), to_string(r.branch), r.lhs, r.rhs, r.margin, r.holds});
        violations += r.holds ? 0 : 1;
        l2 += r.branch == InterpolationBranch::l2 ? 1 : 0;
    }
    res.report = {{"kernel", k.to_json()}, {"trials", trials},         {"gamma", gamma},
                  {"S", S},                {"depth", depth},           {"violations", violations},
                  {"l2_branch", l2},       {"inf_branch", trials - l2}};
    res.pass = violations == 0;
    res.summary = "interpolation: " + std::to_string(violations) + " violations in " + std::to_string(trials) + " trials";
    res.tables.push_back(std::move(tab));
    return res;
}

CommandResult cmd_rde(const RunContext& ctx) {
    const auto k = kernel_of(ctx);
    const auto f = fields_of(ctx);
    const auto y0 = y0_of(ctx, f.e);
    const json sec = section(ctx, "rde");
    SolverOptions opts;
    opts.with_jacobian = sec.value("with_jacobian", true);
    opts.max_substep = sec.value("max_substep", opts.max_substep);
    opts.blowup_bound = sec.value("blowup_bound", opts.blowup_bound);
    const int cells = sec.value("cells", 256);
    const auto gl = lift_gaussian(k, Partition::uniform(0.0, k.horizon(), cells), ctx.seed, f.d());
    const auto traj = solve_rde(gl.lift, f, y0, opts);

    CommandResult res;
    Table tab{"rde", {"index", "t"}, {}};
    for (int c = 0; c < f.e; ++c) tab.columns.push_back("y" + std::to_string(c + 1));
    for (int i = 0; i <= traj.grid.cells(); ++i) {
        std::vector<Cell> row = {static_cast<long long>(i), traj.grid[i]};
        for (int c = 0; c < f.e; ++c) row.emplace_back(traj.Y[static_cast<std::size_t>(i)](c));
        tab.rows.push_back(std::move(row));
    }
    const double jk_tol = 1e-6;
    res.report = {{"kernel", k.to_json()},
                  {"fields", f.to_json()},
                  {"y0", jvec(y0)},
                  {"cells", cells},
                  {"N", traj.N},
                  {"gamma", traj.gamma},
                  {"p", gl.exponents.p},
                  {"substeps", traj.substeps},
                  {"with_jacobian", opts.with_jacobian},
                  {"max_jk_deviation", jnum(traj.max_jk_deviation)},
                  {"jk_tolerance", jk_tol},
                  {"final", jvec(traj.Y.back())}};
    res.pass = !opts.with_jacobian || traj.max_jk_deviation < jk_tol;
    res.summary = "rde: " + std::to_string(traj.grid.cells()) + " cells, N=" + std::to_string(traj.N) +
                  (opts.with_jacobian ? ", max |JK-I|=" + format_double(traj.max_jk_deviation) : std::string());
    res.tables.push_back(std::move(tab));
    return res;
}

CommandResult cmd_malliavin(const RunContext& ctx) {
    const json sec = section(ctx, "malliavin");
    const auto cfg = ensemble_of(ctx, sec, 100, 256);
    const json es = sec.value("eps", json::object());
    const auto eps = log_grid(es.value("lo", 1e-4), es.value("hi", 1.0), es.value("n", 13));
    const auto tail = eigenvalue_tail(cfg, eps);

    CommandResult res;
    Table t1{"malliavin_tail", {"eps", "prob"}, {}};
    for (std::size_t i = 0; i < tail.eps.size(); ++i) t1.rows.push_back({tail.eps[i], tail.prob[i]});
    Table t2{"malliavin_paths", {"path", "seed", "min_eigenvalue"}, {}};
    for (std::size_t i = 0; i < tail.min_eigs.size(); ++i)
        t2.rows.push_back({static_cast<long long>(i), static_cast<long long>(cfg.base_seed + i), tail.min_eigs[i]});

    int positive = 0;
    for (double l : tail.min_eigs) positive += l > 0 ? 1 : 0;
    json chain = nullptr;
    if (tail.chain.size() >= 2) {
        // fit on paths of the first half, count violations on the second
        const int half = cfg.n_paths / 2;
        std::vector<ChainSample> tr, ho;
        for (const auto& c : tail.chain) (c.path < half ? tr : ho).push_back(c);
        if (!tr.empty() && !ho.empty()) {
            const auto env = fit_chain_envelope(tr);
            chain = {{"mu", env.mu}, {"M", jnum(env.M)}, {"log_spread", jnum(env.log_spread)},
                     {"training", tr.size()}, {"held_out", ho.size()}, {"violations", chain_violations(env, ho)}};
        }
    }
    res.report = {{"ensemble", cfg.to_json()},          {"exponent", jnum(tail.exponent)},
                  {"fit_points", tail.fit_points},      {"psd_failures", tail.psd_failures},
                  {"positive_min_eigenvalues", positive}, {"chain_envelope", chain}};
    res.pass = tail.psd_failures == 0;
    res.summary = "malliavin: " + std::to_string(positive) + "/" + std::to_string(cfg.n_paths) +
                  " paths with positive min eigenvalue, tail exponent " + format_double(tail.exponent);
    res.tables.push_back(std::move(t1));
    res.tables.push_back(std::move(t2));
    return res;
}

CommandResult cmd_roughness(const RunContext& ctx) {
    const auto k = kernel_of(ctx);
    const json sec = section(ctx, "roughness");
    const int trials = sec.value("trials", 100), cells = sec.value("cells", 256), dim = sec.value("dim", 1);
    const double theta = sec.value("theta", 0.4);
    const Partition grid = Partition::uniform(0.0, k.horizon(), cells);
    const GaussianSampler sampler(k, grid.points());

    std::vector<RoughnessModulus> mods(static_cast<std::size_t>(trials));
    parallel_for(trials, [&](int i) {
        mods[static_cast<std::size_t>(i)] =
            roughness_modulus(grid, sampler.sample(ctx.seed + static_cast<std::uint64_t>(i), dim), theta);
    });

    CommandResult res;
    Table t1{"roughness", {"trial", "seed", "d_theta", "l_lower", "worst_level"}, {}};
    std::vector<double> l;
    int nonpositive = 0;
    for (int i = 0; i < trials; ++i) {
        const auto& m = mods[static_cast<std::size_t>(i)];
        t1.rows.push_back({static_cast<long long>(i), static_cast<long long>(ctx.seed + static_cast<std::uint64_t>(i)),
                           m.d_theta, m.l_lower, static_cast<long long>(m.worst_level)});
        l.push_back(m.l_lower);
        nonpositive += m.d_theta > 0 ? 0 : 1;
    }
    std::sort(l.begin(), l.end());
    // P(L < x) at each distinct sample value
    Table t2{"roughness_cdf", {"x", "p_below"}, {}};
    for (std::size_t i = 0; i < l.size(); ++i)
        if (i == 0 || l[i] != l[i - 1]) t2.rows.push_back({l[i], static_cast<double>(i) / static_cast<double>(l.size())});

    res.report = {{"kernel", k.to_json()}, {"trials", trials}, {"cells", cells}, {"dim", dim}, {"theta", theta},
                  {"nonpositive", nonpositive}, {"min_l_lower", jnum(l.front())}, {"max_l_lower", jnum(l.back())}};
    res.pass = nonpositive == 0;
    res.summary = "roughness: min L_theta lower bound " + format_double(l.front()) + " over " + std::to_string(trials) +
                  " paths";
    res.tables.push_back(std::move(t1));
    res.tables.push_back(std::move(t2));

    if (sec.contains("norris")) {
        const json ns = sec["norris"];
        NorrisTrialConfig cfg;
        cfg.kernel = k;
        if (ctx.config.contains("fields")) cfg.fields = fields_of(ctx);
        cfg.cells = ns.value("cells", 256);
        cfg.theta = ns.value("theta", 0.4);
        cfg.seed = ctx.seed;
        const int train = ns.value("train", 200), held = ns.value("held_out", 200);
        const auto tr = norris_trials(cfg, train, 0);
        const auto ho = norris_trials(cfg, held, static_cast<std::uint64_t>(train));
        const auto env = fit_norris_envelope(tr);
        const int viol = envelope_violations(env, ho);
        Table t3{"norris", {"family", "trial", "lhs", "R", "z_sup", "holds"}, {}};
        for (int i = 0; i < train; ++i) {
            const auto& s = tr[static_cast<std::size_t>(i)];
            t3.rows.push_back({std::string("train"), static_cast<long long>(i), s.lhs, s.R, s.z_sup, s.holds(env.r, env.q, env.M)});
        }
        for (int i = 0; i < held; ++i) {
            const auto& s = ho[static_cast<std::size_t>(i)];
            t3.rows.push_back({std::string("held_out"), static_cast<long long>(train + i), s.lhs, s.R, s.z_sup,
                               s.holds(env.r, env.q, env.M)});
        }
        res.report["norris"] = {{"r", env.r}, {"q", env.q}, {"M", jnum(env.M)}, {"log_spread", jnum(env.log_spread)},
                                {"train", train}, {"held_out", held}, {"violations", viol}, {"theta", cfg.theta}};
        res.pass = res.pass && viol == 0;
        res.summary += "; norris envelope r=" + format_double(env.r) + " q=" + format_double(env.q) + ", " +
                       std::to_string(viol) + " held-out violations";
        res.tables.push_back(std::move(t3));
    }
    return res;
}

CommandResult cmd_density(const RunContext& ctx) {
    const json sec = section(ctx, "density");
    const auto cfg = ensemble_of(ctx, sec, 1000, 64);
    DensityOptions opts;
    opts.component = sec.value("component", 0);
    opts.points = sec.value("points", 1001);
    opts.bandwidth_scale = sec.value("bandwidth_scale", 1.0);
    if (opts.component >= cfg.fields.e) throw ConfigError(kModule, "density component must be < e");
    const auto d = density_estimate(cfg, opts);

    CommandResult res;
    Table tab{"density", {"x", "f_half", "f_base", "f_double"}, {}};
    for (std::size_t i = 0; i < d.x.size(); ++i)
        tab.rows.push_back({d.x[i], d.density[0][i], d.density[1][i], d.density[2][i]});
    json bw = json::array();
    for (double h : d.bandwidth) bw.push_back(jnum(h));
    res.report = {{"ensemble", cfg.to_json()},
                  {"component", opts.component},
                  {"point_mass", d.point_mass},
                  {"mean", jnum(d.mean)},
                  {"sd", jnum(d.sd)},
                  {"bandwidth", bw},
                  {"change_narrow", jnum(d.change_narrow)},
                  {"change_wide", jnum(d.change_wide)},
                  {"second_derivative_change", jnum(d.second_derivative_change)},
                  {"modes", d.modes}};
    // stability of f'' under doubling the bandwidth; halving is reported but too noisy to judge
    res.pass = d.point_mass || d.change_wide < 1.0;
    res.summary = d.point_mass ? std::string("density: point mass at ") + format_double(d.mean)
                               : "density: " + std::to_string(d.modes) + " mode(s), f'' change under doubling " +
                                     format_double(d.change_wide);
    if (!d.point_mass) res.tables.push_back(std::move(tab));
    return res;
}

// ---- driver ----

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    const LogLevel level = log_level();
    auto fail = [&](const std::string& module, const std::string& msg) {
        if (level != LogLevel::quiet) err << "error: " << module << ": " << msg << "\n";
        return exit_error;
    };

    CLI::App app{"Gaussian rough path analysis batch driver", "grpx"};
    std::string config_path, out_dir = ".", format = "csv";
    std::uint64_t seed = 0;
    unsigned threads = 0;
    app.add_option("--config", config_path, "run config (JSON)")->required();
    app.add_option("--out", out_dir, "output directory");
    auto* seed_opt = app.add_option("--seed", seed, "seed, overrides the config");
    app.add_option("--threads", threads, "worker cap, 0 = available parallelism");
    app.add_option("--format", format, "table format")->check(CLI::IsMember({"csv", "json"}));
    using Runner = CommandResult (*)(const RunContext&);
    const std::vector<std::pair<std::string, Runner>> commands = {
        {"check", cmd_check},         {"variation", cmd_variation}, {"qp", cmd_qp},
        {"young", cmd_young},         {"rde", cmd_rde},             {"malliavin", cmd_malliavin},
        {"roughness", cmd_roughness}, {"density", cmd_density}};
    const std::map<std::string, std::string> help = {
        {"check", "kernel condition checks and hypothesis summary"},
        {"variation", "2D rho-variation and Holder control of the covariance"},
        {"qp", "constrained quadratic-form lower bound"},
        {"young", "interpolation inequality trials"},
        {"rde", "solve an RDE with its Jacobian flow along one Gaussian driver"},
        {"malliavin", "Malliavin covariance spectra and eigenvalue tail"},
        {"roughness", "roughness modulus of sample paths and the Norris envelope"},
        {"density", "kernel density estimate of Y_t"}};
    for (const auto& [name, fn] : commands) app.add_subcommand(name, help.at(name))->fallthrough();
    app.require_subcommand(1, 1);

    try {
        std::vector<std::string> rev(args.rbegin(), args.rend());
        app.parse(rev);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return exit_pass;
    } catch (const CLI::ParseError& e) {
        return fail(kModule, e.what());
    }

    std::string command;
    Runner runner = nullptr;
    for (const auto& [name, fn] : commands)
        if (app.got_subcommand(name)) command = name, runner = fn;

    try {
        std::ifstream in(config_path);
        if (!in) return fail(kModule, "cannot open config " + config_path);
        json config;
        try {
            config = json::parse(in);
        } catch (const json::parse_error& e) {
            return fail(kModule, std::string("config is not valid JSON: ") + e.what());
        }
        const auto errs = validate(config_schema(), config);
        if (!errs.empty()) {
            if (level != LogLevel::quiet)
                for (const auto& e : errs) err << "error: cli: schema: " << e << "\n";
            return exit_error;
        }

        RunContext ctx;
        ctx.config = config;
        ctx.seed = seed_opt->count() ? seed : config.value("seed", std::uint64_t{1});
        set_thread_count(threads);

        const std::string hash = hex64(fnv1a64(config.dump()));
        const std::string prov = "config_hash=" + hash + ", seed=" + std::to_string(ctx.seed) + ", command=" + command;
        if (level >= LogLevel::info) err << "grpx[info] " << prov << ", threads=" << thread_count() << "\n";

        const CommandResult res = runner(ctx);

        namespace fs = std::filesystem;
        fs::create_directories(out_dir);
        json doc = {{"command", command}, {"config_hash", hash},        {"seed", ctx.seed},
                    {"config", config},   {"pass", res.pass},           {"report", res.report}};
        auto write = [&](const std::string& name, const std::string& text) {
            const fs::path p = fs::path(out_dir) / name;
            std::ofstream o(p, std::ios::binary);
            o << text;
            if (!o) throw ConfigError(kModule, "cannot write " + p.string());
            if (level >= LogLevel::info) err << "grpx[info] wrote " << p.string() << "\n";
        };
        if (format == "json") {
            doc["tables"] = json::object();
            for (const auto& t : res.tables) doc["tables"][t.name] = t.to_json();
        } else {
            for (const auto& t : res.tables) write(t.name + ".csv", t.to_csv(prov));
        }
        write(command + ".json", doc.dump(2) + "\n");
        out << res.summary << "\n";
        return res.pass ? exit_pass : exit_fail;
    } catch (const Error& e) {
        // what() already starts with the module name
        if (level != LogLevel::quiet) err << "error: " << e.what() << "\n";
        return exit_error;
    } catch (const json::exception& e) {
        return fail(kModule, std::string("config: ") + e.what());
    } catch (const std::exception& e) {
        return fail(kModule, e.what());
    }
}

}  // namespace grpx::cli
