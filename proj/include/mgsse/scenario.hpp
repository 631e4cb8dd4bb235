#pragma once

#include <charconv>
#include <chrono>
#include <cmath>
#include <deque>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "common.hpp"
#include "estimator.hpp"
#include "grid.hpp"
#include "kalman.hpp"
#include "plant.hpp"
#include "stacked.hpp"

namespace mgsse {

inline constexpr const char* csv_schema = "# mgsse-csv v1";

struct EstimatorConfig {
    int K = 3;
    int stride = 1;
    DecodeOptions decode;
};

struct ScenarioConfig {
    std::string grid = "ieee33";  // embedded case name or grid file path
    CaseParams case_params;
    SimParams sim;
    double duration = 20.0;
    double settle_time = 15.0;  // start of the post-transient band in the report
    AttackSpec attack{AttackType::TypeA};
    EstimatorConfig estimator;
    KFConfig kf;
    std::string out_dir = "out";

    long steps() const { return std::lround(duration / sim.delta); }
};

namespace detail {

inline std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

// Accepts plain numbers and simple ratios such as 1/60.
inline double parse_number(const std::string& key, const std::string& v) {
    auto one = [&](const std::string& s) {
        double out = 0.0;
        const auto* end = s.data() + s.size();
        auto [p, ec] = std::from_chars(s.data(), end, out);
        if (ec != std::errc() || p != end) throw ConfigError(key + ": '" + v + "' is not a number");
        return out;
    };
    const auto slash = v.find('/');
    if (slash == std::string::npos) return one(v);
    const double den = one(trim(v.substr(slash + 1)));
    if (den == 0.0) throw ConfigError(key + ": division by zero in '" + v + "'");
    return one(trim(v.substr(0, slash))) / den;
}

inline long parse_int(const std::string& key, const std::string& v) {
    long out = 0;
    const auto* end = v.data() + v.size();
    auto [p, ec] = std::from_chars(v.data(), end, out);
    if (ec != std::errc() || p != end) throw ConfigError(key + ": '" + v + "' is not an integer");
    return out;
}

}  // namespace detail

inline AttackType parse_attack_type(const std::string& v) {
    if (v == "A" || v == "a") return AttackType::TypeA;
    if (v == "B" || v == "b") return AttackType::TypeB;
    if (v == "none") return AttackType::None;
    throw ConfigError("attack.type: expected A, B or none, got '" + v + "'");
}

inline void validate(const ScenarioConfig& c) {
    auto positive = [](double v, const char* name) {
        if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError(std::string(name) + " must be positive");
    };
    positive(c.sim.delta, "delta");
    positive(c.duration, "duration");
    positive(c.sim.omega0, "omega0");
    const double n = c.duration / c.sim.delta;
    if (std::abs(n - std::round(n)) > 1e-6 * std::max(1.0, n)) throw ConfigError("duration/delta must be an integer step count");
    positive(c.case_params.line_x, "grid.line_x");
    positive(c.case_params.fict_x, "grid.fict_x");
    positive(c.case_params.sg_M, "sg.M");
    positive(c.case_params.sg_D, "sg.D");
    positive(c.case_params.sg_tau, "sg.tau");
    positive(c.case_params.inv_D, "inv.D");
    positive(c.case_params.load_D, "load.D");
    if (c.case_params.sg_R < 0.0) throw ConfigError("sg.R must be nonnegative");
    if (c.case_params.line_r < 0.0) throw ConfigError("grid.line_r must be nonnegative");
    if (c.case_params.load_max < c.case_params.load_min) throw ConfigError("grid.load_max must not be below grid.load_min");
    if (c.attack.q < 0) throw ConfigError("attack.q must be nonnegative");
    if (c.attack.angle_mag < 0.0 || c.attack.speed_mag < 0.0) throw ConfigError("attack magnitudes must be nonnegative");
    if (c.estimator.K < 2) throw ConfigError("estimator.window must be at least 2");
    if (c.estimator.stride < 1) throw ConfigError("estimator.stride must be at least 1");
    positive(c.estimator.decode.tol, "estimator.tol");
    positive(c.estimator.decode.residual_tol, "estimator.residual_tol");
    if (c.estimator.decode.max_iter < 1) throw ConfigError("estimator.max_iter must be at least 1");
    validate(c.kf);
}

// `key = value` lines, `#` starts a comment. Unknown and repeated keys are errors.
inline ScenarioConfig parse_config(std::istream& in, const std::string& origin = "config", const std::string& base_dir = "") {
    ScenarioConfig c;
    using Setter = std::function<void(const std::string&, const std::string&)>;
    auto num = [](double& dst) -> Setter { return [&dst](const std::string& k, const std::string& v) { dst = detail::parse_number(k, v); }; };
    auto integer = [](int& dst) -> Setter {
        return [&dst](const std::string& k, const std::string& v) { dst = static_cast<int>(detail::parse_int(k, v)); };
    };
    auto seed = [](std::uint64_t& dst) -> Setter {
        return [&dst](const std::string& k, const std::string& v) {
            const long s = detail::parse_int(k, v);
            if (s < 0) throw ConfigError(k + " must be nonnegative");
            dst = static_cast<std::uint64_t>(s);
        };
    };
    std::string grid_value;
    const std::map<std::string, Setter> keys{
        {"grid", [&](const std::string&, const std::string& v) { grid_value = v; }},
        {"delta", num(c.sim.delta)},
        {"duration", num(c.duration)},
        {"omega0", num(c.sim.omega0)},
        {"seed", seed(c.attack.seed)},
        {"report.settle", num(c.settle_time)},
        {"grid.load_seed", seed(c.case_params.load_seed)},
        {"grid.line_r", num(c.case_params.line_r)},
        {"grid.line_x", num(c.case_params.line_x)},
        {"grid.fict_x", num(c.case_params.fict_x)},
        {"grid.load_min", num(c.case_params.load_min)},
        {"grid.load_max", num(c.case_params.load_max)},
        {"sg.M", num(c.case_params.sg_M)},
        {"sg.D", num(c.case_params.sg_D)},
        {"sg.R", num(c.case_params.sg_R)},
        {"sg.tau", num(c.case_params.sg_tau)},
        {"inv.D", num(c.case_params.inv_D)},
        {"load.D", num(c.case_params.load_D)},
        {"attack.type", [&](const std::string&, const std::string& v) { c.attack.type = parse_attack_type(v); }},
        {"attack.start", num(c.attack.start_time)},
        {"attack.q", integer(c.attack.q)},
        {"attack.angle", num(c.attack.angle_mag)},
        {"attack.speed", num(c.attack.speed_mag)},
        {"estimator.window", integer(c.estimator.K)},
        {"estimator.stride", integer(c.estimator.stride)},
        {"estimator.decoder",
         [&](const std::string& k, const std::string& v) {
             if (v == "free") c.estimator.decode.mode = DecoderMode::Free;
             else if (v == "linked") c.estimator.decode.mode = DecoderMode::Linked;
             else throw ConfigError(k + ": expected free or linked, got '" + v + "'");
         }},
        {"estimator.tol", num(c.estimator.decode.tol)},
        {"estimator.max_iter", integer(c.estimator.decode.max_iter)},
        {"estimator.residual_tol", num(c.estimator.decode.residual_tol)},
        {"kf.q", num(c.kf.q)},
        {"kf.r", num(c.kf.r)},
        {"kf.p0", num(c.kf.p0)},
        {"output", [&](const std::string&, const std::string& v) { c.out_dir = v; }},
    };

    std::map<std::string, int> seen;
    std::string raw;
    int lineno = 0;
    while (std::getline(in, raw)) {
        ++lineno;
        const std::string line = detail::trim(raw.substr(0, raw.find('#')));
        if (line.empty()) continue;
        const auto eq = line.find('=');
        auto where = origin + ":" + std::to_string(lineno) + ": ";
        if (eq == std::string::npos) throw ConfigError(where + "expected key = value");
        const std::string k = detail::trim(line.substr(0, eq)), v = detail::trim(line.substr(eq + 1));
        auto it = keys.find(k);
        if (it == keys.end()) throw ConfigError(where + "unknown key '" + k + "'");
        if (seen.count(k)) throw ConfigError(where + "key '" + k + "' repeated (first on line " + std::to_string(seen[k]) + ")");
        seen[k] = lineno;
        if (v.empty()) throw ConfigError(where + "empty value for '" + k + "'");
        try {
            it->second(k, v);
        } catch (const ConfigError& e) {
            throw ConfigError(where + e.what());
        }
    }
    if (!grid_value.empty()) {
        if (grid_value == "ieee33") c.grid = grid_value;
        else {
            std::filesystem::path p(grid_value);
            if (p.is_relative() && !base_dir.empty()) p = std::filesystem::path(base_dir) / p;
            if (!std::filesystem::exists(p)) throw ConfigError(origin + ": grid file " + p.string() + " does not exist");
            c.grid = p.string();
        }
    }
    validate(c);
    return c;
}

inline ScenarioConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path);
    return parse_config(in, path, std::filesystem::path(path).parent_path().string());
}

inline AugmentedGrid make_grid(const ScenarioConfig& c) { return c.grid == "ieee33" ? ieee33(c.case_params) : load_grid_file(c.grid); }

enum class EstimateSource { None, Warmup, Decoded, Fallback };

inline const char* to_string(EstimateSource s) {
    switch (s) {
        case EstimateSource::None: return "none";
        case EstimateSource::Warmup: return "warmup";
        case EstimateSource::Decoded: return "decoded";
        case EstimateSource::Fallback: return "fallback";
    }
    return "?";
}

struct RunTrace {
    std::vector<VectorXd> x;  // true states
    std::vector<VectorXd> y;  // measurements
    std::vector<VectorXd> e;  // injected attacks
    std::vector<VectorXd> e_hat;
    std::vector<VectorXd> x_dec;  // decoded window states, NaN when unavailable
    std::vector<VectorXd> x_kf;
    std::vector<EstimateSource> source;
};

struct RunReport {
    int scenario = 0;
    std::string attack;
    std::uint64_t seed = 0;
    std::string rng = Rng::name;
    std::string grid;
    long steps = 0;
    double delta = 0.0;
    double attack_start = 0.0, settle_time = 0.0;
    std::vector<double> final_speed_hz;
    double max_dev_hz_after_attack = 0.0;  // over t >= attack start
    double max_dev_hz_settled = 0.0;       // over t > settle time
    int window = 0, stride = 0;
    std::string decoder;
    long windows_decoded = 0, windows_failed = 0, fallback_steps = 0;
    long estimated_steps = 0, exact_steps = 0;
    long attacked_steps = 0, exact_attacked_steps = 0;
    double max_abs_est_err = 0.0;
    double max_kf_state_err = 0.0;
    std::vector<long> failed_windows;  // end step of each failed window
    double wall_seconds = 0.0;

    double exact_fraction() const { return estimated_steps ? static_cast<double>(exact_steps) / static_cast<double>(estimated_steps) : 0.0; }
    double exact_fraction_attacked() const {
        return attacked_steps ? static_cast<double>(exact_attacked_steps) / static_cast<double>(attacked_steps) : 0.0;
    }
};

struct RunResult {
    RunReport report;
    RunTrace trace;
};

inline constexpr double exact_tol = 1e-6;

// Scenario 1: no attack. Scenario 2: attacks, governors read raw speeds.
// Scenario 3: attacks, governors read speeds corrected by the estimator.
inline RunResult run_scenario(const ScenarioConfig& cfg, int scenario) {
    if (scenario < 1 || scenario > 3) throw ConfigError("scenario must be 1, 2 or 3");
    validate(cfg);
    const auto t0 = std::chrono::steady_clock::now();
    const AugmentedGrid g = make_grid(cfg);
    const EnlargedSystem sys = assemble_enlarged(g, cfg.sim);
    const auto ny = static_cast<Eigen::Index>(g.n_meas()), nx = static_cast<Eigen::Index>(g.n_state());
    const double nan = std::numeric_limits<double>::quiet_NaN();
    const int K = cfg.estimator.K;
    const long T = cfg.steps();

    RunResult res;
    RunReport& rep = res.report;
    RunTrace& tr = res.trace;
    rep.scenario = scenario;
    rep.attack = scenario == 1 ? "none" : to_string(cfg.attack.type);
    rep.seed = cfg.attack.seed;
    rep.grid = cfg.grid;
    rep.steps = T;
    rep.delta = cfg.sim.delta;
    rep.attack_start = cfg.attack.start_time;
    rep.settle_time = cfg.settle_time;
    rep.window = K;
    rep.stride = cfg.estimator.stride;
    rep.decoder = to_string(cfg.estimator.decode.mode);

    PlantState st = init_equilibrium(g, cfg.sim.omega0);
    Rng rng(cfg.attack.seed);

    // Scenario 3 bookkeeping: last K-1 steps of (y, U, H, E_hat, eps_hat).
    struct Past {
        VectorXd y, U, E_hat, eps_hat;
        MatrixXd H;
    };
    std::deque<Past> past;
    std::optional<Annihilator> an;
    KFState kf;
    const auto ne = 2 * static_cast<Eigen::Index>(g.n_edge());

    for (long k = 0; k < T; ++k) {
        const VectorXd e = scenario == 1 ? VectorXd::Zero(ny) : gen_attack(g, cfg.attack, k, cfg.sim.delta, rng);
        const MeasurementFrame f = measure(g, st, e, k);
        tr.x.push_back(to_state_vector(g, st));
        tr.y.push_back(f.y);
        tr.e.push_back(e);

        VectorXd corr = VectorXd::Zero(ny);
        if (scenario == 3) {
            VectorXd E_hat = VectorXd::Zero(ny), eps_hat = VectorXd::Zero(ne), x_dec = VectorXd::Constant(nx, nan);
            EstimateSource src = EstimateSource::Warmup;
            std::optional<DecodeResult> dr;
            WindowData w;
            const bool window_ready = static_cast<long>(past.size()) == K - 1 && (k - (K - 1)) % cfg.estimator.stride == 0;
            if (window_ready) {
                for (const auto& p : past) {
                    w.y.push_back(p.y);
                    w.U.push_back(p.U);
                    w.H.push_back(p.H);
                }
                w.y.push_back(f.y);
                const auto stk = build_stack(sys, w, K);
                if (!an) an = annihilate(stk.Phi);
                dr = decode_window(g, stk, *an, cfg.estimator.decode);
                if (dr->recovered) {
                    ++rep.windows_decoded;
                    src = EstimateSource::Decoded;
                    E_hat = dr->E_hat.row(K - 1).transpose();
                    eps_hat = dr->eps_hat.row(K - 1).transpose();
                    x_dec = propagate_window(sys, w, *dr).back();
                    // Later windows refine the estimates of earlier steps.
                    for (int j = 0; j < K - 1; ++j) {
                        past[static_cast<std::size_t>(j)].E_hat = dr->E_hat.row(j).transpose();
                        past[static_cast<std::size_t>(j)].eps_hat = dr->eps_hat.row(j).transpose();
                    }
                } else {
                    ++rep.windows_failed;
                    rep.failed_windows.push_back(k);
                    src = EstimateSource::Fallback;
                }
            } else if (k >= K - 1) {
                src = EstimateSource::Fallback;  // between strides
            }

            if (k == 0) {
                kf.x = VectorXd::Zero(nx);
                for (std::size_t i = 0; i < g.n_bus(); ++i) {
                    kf.x[g.state_row[i]] = f.y[g.meas_row[i]];
                    if (g.is_gen(i)) {
                        kf.x[g.state_row[i] + 1] = f.y[g.meas_row[i] + 1];
                        kf.x[g.state_row[i] + 2] = g.buses[i].p.P_set;
                    }
                }
                kf.P = MatrixXd::Identity(nx, nx) * cfg.kf.p0;
            } else {
                const Past& p = past.back();
                const KFState prior = kf_predict(kf, sys, model_drive(sys, p.U, p.H, p.E_hat, p.eps_hat), cfg.kf);
                if (src == EstimateSource::Fallback) {
                    ++rep.fallback_steps;
                    E_hat = f.y - sys.C * prior.x;
                    kf = prior;
                } else {
                    kf = kf_update(prior, sys, f.y - E_hat, cfg.kf).post;
                }
            }
            corr = E_hat;

            tr.e_hat.push_back(E_hat);
            tr.x_dec.push_back(x_dec);
            tr.x_kf.push_back(kf.x);
            tr.source.push_back(src);

            if (src != EstimateSource::Warmup) {
                const double err = (E_hat - e).cwiseAbs().maxCoeff();
                const bool exact = err <= exact_tol;
                ++rep.estimated_steps;
                rep.exact_steps += exact;
                if (attack_active(cfg.attack, k, cfg.sim.delta)) {
                    ++rep.attacked_steps;
                    rep.exact_attacked_steps += exact;
                }
                rep.max_abs_est_err = std::max(rep.max_abs_est_err, err);
            }
            rep.max_kf_state_err = std::max(rep.max_kf_state_err, (kf.x - tr.x.back()).cwiseAbs().maxCoeff());

            past.push_back({f.y, build_u(g, sys, f.y, corr), E_hat, eps_hat, build_h_reduced(g, sys, f.y)});
            if (static_cast<long>(past.size()) > K - 1) past.pop_front();
        }

        const double t = static_cast<double>(k) * cfg.sim.delta;
        for (Eigen::Index a = 0; a < st.omega.size(); ++a) {
            const double dev = std::abs(st.omega[a] - cfg.sim.omega0) / (2.0 * std::numbers::pi);
            if (scenario != 1 && attack_active(cfg.attack, k, cfg.sim.delta)) rep.max_dev_hz_after_attack = std::max(rep.max_dev_hz_after_attack, dev);
            if (scenario == 1 && t >= cfg.attack.start_time - 1e-9) rep.max_dev_hz_after_attack = std::max(rep.max_dev_hz_after_attack, dev);
            if (t > cfg.settle_time + 1e-9) rep.max_dev_hz_settled = std::max(rep.max_dev_hz_settled, dev);
        }

        st = step_plant(st, g, cfg.sim, e - corr);
    }
    for (std::size_t a = 0; a < g.n_sg(); ++a) rep.final_speed_hz.push_back(tr.x.back()[g.state_row[static_cast<std::size_t>(g.fict_sg[a] - 1)] + 1] / (2.0 * std::numbers::pi));
    rep.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return res;
}

// Shortest round-trip decimal form, identical across runs.
inline std::string fmt(double v) {
    if (std::isnan(v)) return "nan";
    char buf[64];
    auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
    (void)ec;
    return std::string(buf, p);
}

namespace detail {

inline void write_rows(const std::filesystem::path& path, const std::string& kind, const std::vector<std::string>& cols,
                       const std::function<void(std::ostream&, std::size_t)>& row, std::size_t n, const std::string& trailer = "") {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << csv_schema << ' ' << kind << '\n';
    for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << cols[i];
    out << '\n';
    for (std::size_t k = 0; k < n; ++k) {
        row(out, k);
        out << '\n';
    }
    out << trailer;
    if (!out) throw std::runtime_error("write failed for " + path.string());
}

inline void put(std::ostream& o, const VectorXd& v) {
    for (Eigen::Index i = 0; i < v.size(); ++i) o << ',' << fmt(v[i]);
}

inline std::vector<std::string> with_prefix(const std::string& pre, const std::vector<std::string>& labels) {
    std::vector<std::string> out;
    for (const auto& l : labels) out.push_back(pre + l);
    return out;
}

}  // namespace detail

inline std::string format_report(const RunReport& r) {
    std::ostringstream o;
    o << "scenario: " << r.scenario << '\n'
      << "attack: " << r.attack << '\n'
      << "seed: " << r.seed << '\n'
      << "rng: " << r.rng << '\n'
      << "grid: " << r.grid << '\n'
      << "steps: " << r.steps << '\n'
      << "delta: " << fmt(r.delta) << '\n'
      << "attack_start_s: " << fmt(r.attack_start) << '\n'
      << "settle_time_s: " << fmt(r.settle_time) << '\n';
    o << "final_speed_hz:";
    for (double f : r.final_speed_hz) o << ' ' << fmt(f);
    o << '\n'
      << "max_speed_dev_hz_after_attack_start: " << fmt(r.max_dev_hz_after_attack) << '\n'
      << "max_speed_dev_hz_settled: " << fmt(r.max_dev_hz_settled) << '\n';
    if (r.scenario == 3) {
        o << "window: " << r.window << '\n'
          << "stride: " << r.stride << '\n'
          << "decoder: " << r.decoder << '\n'
          << "exact_tol: " << fmt(exact_tol) << '\n'
          << "windows_decoded: " << r.windows_decoded << '\n'
          << "windows_failed: " << r.windows_failed << '\n'
          << "fallback_steps: " << r.fallback_steps << '\n'
          << "estimated_steps: " << r.estimated_steps << '\n'
          << "exact_steps: " << r.exact_steps << '\n'
          << "exact_fraction: " << fmt(r.exact_fraction()) << '\n'
          << "attacked_steps: " << r.attacked_steps << '\n'
          << "exact_attacked_steps: " << r.exact_attacked_steps << '\n'
          << "exact_fraction_attacked: " << fmt(r.exact_fraction_attacked()) << '\n'
          << "max_abs_estimation_error: " << fmt(r.max_abs_est_err) << '\n'
          << "max_kf_state_error: " << fmt(r.max_kf_state_err) << '\n';
        o << "failed_window_end_steps:";
        for (long k : r.failed_windows) o << ' ' << k;
        o << '\n';
    }
    o << "wall_seconds: " << fmt(r.wall_seconds) << '\n';
    return o.str();
}

inline void write_outputs(const RunResult& res, const AugmentedGrid& g, const std::string& dir) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    const fs::path d(dir);
    const auto& tr = res.trace;
    const double delta = res.report.delta;
    const auto n = tr.x.size();
    auto head = [](std::vector<std::string> rest) {
        rest.insert(rest.begin(), {"k", "t"});
        return rest;
    };
    auto kt = [&](std::ostream& o, std::size_t k) { o << k << ',' << fmt(static_cast<double>(k) * delta); };
    const auto sl = g.state_labels(), ml = g.meas_labels();

    detail::write_rows(d / "states.csv", "states", head(sl), [&](std::ostream& o, std::size_t k) { kt(o, k), detail::put(o, tr.x[k]); }, n);
    detail::write_rows(d / "measurements.csv", "measurements", head(ml), [&](std::ostream& o, std::size_t k) { kt(o, k), detail::put(o, tr.y[k]); }, n);
    detail::write_rows(d / "attacks_true.csv", "attacks_true", head(ml), [&](std::ostream& o, std::size_t k) { kt(o, k), detail::put(o, tr.e[k]); }, n);

    if (res.report.scenario == 3) {
        auto cols = head(ml);
        cols.insert(cols.begin() + 2, "source");
        detail::write_rows(
            d / "attacks_est.csv", "attacks_est", cols,
            [&](std::ostream& o, std::size_t k) {
                kt(o, k);
                o << ',' << to_string(tr.source[k]);
                detail::put(o, tr.e_hat[k]);
            },
            n);

        auto ecols = head(detail::with_prefix("err_", ml));
        ecols.insert(ecols.begin() + 2, {"source", "max_abs_err", "exact"});
        const auto& r = res.report;
        std::string trailer = "# summary estimated_steps=" + std::to_string(r.estimated_steps) + " exact_steps=" + std::to_string(r.exact_steps) +
                              " exact_fraction=" + fmt(r.exact_fraction()) + "\n";
        detail::write_rows(
            d / "errors.csv", "errors", ecols,
            [&](std::ostream& o, std::size_t k) {
                const VectorXd err = tr.e_hat[k] - tr.e[k];
                const double m = err.cwiseAbs().maxCoeff();
                kt(o, k);
                o << ',' << to_string(tr.source[k]) << ',' << fmt(m) << ',' << (m <= exact_tol ? 1 : 0);
                detail::put(o, err);
            },
            n, trailer);

        auto scols = head(detail::with_prefix("dec_", sl));
        auto kcols = detail::with_prefix("kf_", sl);
        scols.insert(scols.end(), kcols.begin(), kcols.end());
        detail::write_rows(
            d / "estimates.csv", "estimates", scols,
            [&](std::ostream& o, std::size_t k) {
                kt(o, k);
                detail::put(o, tr.x_dec[k]);
                detail::put(o, tr.x_kf[k]);
            },
            n);
    }

    std::ofstream rep(d / "report.txt");
    rep << format_report(res.report);
    if (!rep) throw std::runtime_error("cannot write report.txt");
}

}  // namespace mgsse
