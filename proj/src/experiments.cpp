#include "inertsim/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <stdexcept>

#include "inertsim/fbm.hpp"
#include "inertsim/market.hpp"
#include "inertsim/model_config.hpp"
#include "inertsim/renewal.hpp"
#include "inertsim/stats.hpp"
#include "inertsim/stochastic_integral.hpp"

namespace inertsim {
namespace {

using json = nlohmann::json;

const std::map<ExperimentKind, std::string>& kind_names()
{
    static const std::map<ExperimentKind, std::string> names{
        {ExperimentKind::limit_verification, "limit-verification"},
        {ExperimentKind::example_a, "example-a"},
        {ExperimentKind::markov_baseline, "markov-baseline"},
        {ExperimentKind::mixed_market, "mixed-market"},
        {ExperimentKind::renewal_tables, "renewal-tables"},
        {ExperimentKind::fbm_selftest, "fbm-selftest"},
        {ExperimentKind::integral_identities, "integral-identities"},
        {ExperimentKind::key_renewal, "key-renewal"},
    };
    return names;
}

std::string num(double x)
{
    std::ostringstream s;
    s << x;
    return s.str();
}

Verdict verdict(std::string name, std::string cell, double value, double lo, double hi)
{
    Verdict v;
    v.name = std::move(name);
    v.cell = std::move(cell);
    v.value = value;
    v.lo = lo;
    v.hi = hi;
    v.band = "[" + num(lo) + ", " + num(hi) + "]";
    v.pass = std::isfinite(value) && value >= lo && value <= hi;
    return v;
}

Verdict flag(std::string name, std::string cell, bool ok, std::string band)
{
    Verdict v;
    v.name = std::move(name);
    v.cell = std::move(cell);
    v.value = ok ? 1.0 : 0.0;
    v.lo = 1.0;
    v.hi = 1.0;
    v.band = std::move(band);
    v.pass = ok;
    return v;
}

double p(const ExperimentSpec& s, const char* key) { return s.params.at(key).get<double>(); }
std::size_t pz(const ExperimentSpec& s, const char* key) { return s.params.at(key).get<std::size_t>(); }
std::vector<double> pv(const ExperimentSpec& s, const char* key)
{
    return s.params.at(key).get<std::vector<double>>();
}

// Opens a CSV in the output directory and records it as an artifact.
std::ofstream open_csv(const ExperimentSpec& spec, Report& report, const std::string& name,
                       const std::string& header)
{
    const auto path = std::filesystem::path(spec.out_dir) / name;
    std::ofstream out(path);
    if (!out)
        throw std::runtime_error("cannot write " + path.string());
    out.precision(17);
    out << header << '\n';
    report.artifacts.push_back(name);
    return out;
}

std::vector<double> log_spaced(double lo, double hi, std::size_t n)
{
    std::vector<double> t(n);
    for (std::size_t k = 0; k < n; ++k)
        t[k] = lo * std::pow(hi / lo, static_cast<double>(k) / static_cast<double>(n - 1));
    return t;
}

json summary(const std::vector<double>& x)
{
    const double m = mean(x);
    const double se = x.size() > 1 ? std::sqrt(variance(x) / static_cast<double>(x.size())) : 0.0;
    return {{"median", median(x)}, {"mean", m}, {"ci95", {m - 1.96 * se, m + 1.96 * se}}, {"values", x}};
}

const std::vector<std::size_t> qv_strides{16, 8, 4, 2, 1};

// ---------------------------------------------------------------- market pipeline

struct HurstRuns
{
    std::vector<double> vario, agg;
    std::vector<std::vector<double>> qv;  ///< per replicate, per stride in qv_strides
    double jumps = 0.0;
};

HurstRuns hurst_runs(const ExperimentSpec& spec, const SemiMarkovModel& model, double eps, std::size_t n,
                     Scaling scaling, std::ofstream& csv, const std::string& cell)
{
    HurstRuns h;
    for (std::size_t r = 0; r < spec.replicates; ++r) {
        MarketConfig cfg(model);
        cfg.n_agents = n;
        cfg.epsilon = eps;
        cfg.horizon = p(spec, "model_horizon") * eps;
        cfg.steps = pz(spec, "steps");
        cfg.seed = spec.seed;
        cfg.replicate = r;
        cfg.threads = spec.threads;
        cfg.memory_budget_mb = spec.budget_mb;
        cfg.max_jumps = p(spec, "max_jumps");
        cfg.scaling = scaling;
        const auto path = simulate_market(cfg);
        const auto v = hurst_variogram(path.x_scaled), a = hurst_aggregated_variance(path.x_scaled);
        h.vario.push_back(v.h_hat);
        h.agg.push_back(a.h_hat);
        std::vector<double> q;
        for (std::size_t s : qv_strides)
            q.push_back(quadratic_variation(path.x_scaled, s));
        h.qv.push_back(q);
        h.jumps += path.jumps;
        csv << cell << ',' << r << ',' << v.h_hat << ',' << a.h_hat << ',' << path.x_scaled.back() << '\n';
    }
    return h;
}

struct RenewalSummary
{
    GridFunction gamma, var;
    double var_slope = NAN, var_r2 = NAN, gamma_slope = NAN;
    double c2 = NAN, c2_fit = NAN;
};

RenewalSummary renewal_summary(const SemiMarkovModel& model, double step, double horizon,
                               const std::vector<double>& var_window, const std::vector<double>& const_window)
{
    RenewalSummary s;
    const auto grid = Grid::covering(horizon, step);
    s.gamma = covariance_gamma(model, grid);
    s.var = variance_of_integral(s.gamma);
    const auto ts = log_spaced(var_window.at(0), var_window.at(1), 32);
    std::vector<double> v, g;
    for (double t : ts)
        v.push_back(s.var.at(t));
    const auto fit = fit_slope(ts, v);
    s.var_slope = fit.slope;
    s.var_r2 = fit.r2;
    const auto tg = log_spaced(const_window.at(0), const_window.at(1), 32);
    for (double t : tg)
        g.push_back(s.gamma.at(t));
    if (std::all_of(g.begin(), g.end(), [](double x) { return x > 0.0; }))
        s.gamma_slope = fit_slope(tg, g).slope;
    if (theorem_condition(model).holds) {
        s.c2 = limit_constant_c2(model);
        s.c2_fit = fit_variance_asymptote(model, s.var, const_window.at(0), const_window.at(1)).level;
    }
    return s;
}

std::string cell_name(double alpha, double eps, std::size_t n)
{
    return "alpha=" + num(alpha) + ",eps=" + num(eps) + ",N=" + std::to_string(n);
}

// limit-verification, example-a and markov-baseline share the pipeline.
void run_hurst_pipeline(const ExperimentSpec& spec, Report& report)
{
    const bool wiener = spec.kind != ExperimentKind::limit_verification;
    const bool markov = spec.kind == ExperimentKind::markov_baseline;
    auto csv = open_csv(spec, report, "hurst.csv", "cell,replicate,h_variogram,h_aggregated,x_T");
    for (double alpha : spec.alphas) {
        const auto model = resolve_model(spec.model, alpha);
        const auto problems = validate_model(model);
        if (!problems.empty())
            throw std::invalid_argument("model: " + problems.front());
        if (markov && model.heavy())
            throw std::invalid_argument("markov-baseline: model must not be heavy-tailed");
        const auto cond = theorem_condition(model);
        const double H = model.hurst();
        const double target = wiener ? 0.5 : H;
        const auto band = spec.params.contains("hurst_halfwidth")
                              ? std::vector<double>{target - p(spec, "hurst_halfwidth"), target + p(spec, "hurst_halfwidth")}
                              : pv(spec, "hurst_band");
        json alpha_cell{{"alpha", model.alpha()},
                        {"hurst_target", target},
                        {"theorem_condition", {{"holds", cond.holds}, {"mu", cond.mu},
                                               {"weighted_sum", cond.weighted_sum},
                                               {"product", cond.product}, {"report", cond.report}}}};
        const std::string acell = "alpha=" + num(model.alpha()), tag = "alpha" + num(model.alpha());
        if (spec.kind == ExperimentKind::example_a)
            report.verdicts.push_back(flag("theorem_condition_fails", acell, !cond.holds, "condition must fail"));
        if (spec.kind == ExperimentKind::limit_verification) {
            report.verdicts.push_back(flag("theorem_condition", acell, cond.holds, "condition must hold"));
            const auto rs = renewal_summary(model, p(spec, "renewal_step"), pv(spec, "variance_window").at(1),
                                            pv(spec, "variance_window"), pv(spec, "constant_window"));
            alpha_cell["variance_slope"] = rs.var_slope;
            alpha_cell["variance_r2"] = rs.var_r2;
            alpha_cell["c2_closed_form"] = rs.c2;
            alpha_cell["c2_fitted"] = rs.c2_fit;
            const double sb = p(spec, "slope_band");
            report.verdicts.push_back(verdict("variance_slope", acell, rs.var_slope, 2 * H - sb, 2 * H + sb));
            const double tol = p(spec, "constant_tolerance");
            report.verdicts.push_back(verdict("limit_constant_ratio", acell, rs.c2_fit / rs.c2, 1 - tol, 1 + tol));
            write_csv((std::filesystem::path(spec.out_dir) / ("variance_" + tag + ".csv")).string(), "var",
                      rs.var, 200);
            report.artifacts.push_back("variance_" + tag + ".csv");
        }
        report.cells.push_back(alpha_cell);

        for (double eps : spec.epsilons)
            for (std::size_t n : spec.agents) {
                const auto cell = cell_name(model.alpha(), eps, n);
                const Scaling scaling = wiener ? Scaling::diffusive : Scaling::fractional;
                const auto h = hurst_runs(spec, model, eps, n, scaling, csv, cell);
                json c{{"cell", cell},
                       {"epsilon", eps},
                       {"agents", n},
                       {"hurst_variogram", summary(h.vario)},
                       {"hurst_aggregated", summary(h.agg)},
                       {"jumps", h.jumps}};
                report.verdicts.push_back(verdict("median_hurst_variogram", cell, median(h.vario), band.at(0), band.at(1)));
                report.verdicts.push_back(verdict("median_hurst_aggregated", cell, median(h.agg), band.at(0), band.at(1)));
                report.verdicts.push_back(verdict("estimator_agreement", cell, std::abs(median(h.vario) - median(h.agg)),
                                                  0.0, p(spec, "estimator_agreement")));
                if (markov) {
                    std::vector<double> ratio;
                    for (const auto& q : h.qv)
                        ratio.push_back(q.back() / q.front());
                    c["qv_finest_over_coarsest"] = summary(ratio);
                    const auto qb = pv(spec, "qv_stability_band");
                    report.verdicts.push_back(verdict("qv_refinement_stable", cell, mean(ratio), qb.at(0), qb.at(1)));
                }
                report.cells.push_back(c);
            }

        if (markov) {
            // Var(X_t) across replicates of a smaller market on a short grid.
            MarketConfig cfg(model);
            cfg.n_agents = pz(spec, "variance_agents");
            cfg.epsilon = spec.epsilons.front();
            cfg.horizon = p(spec, "variance_model_horizon") * cfg.epsilon;
            cfg.steps = 64;
            cfg.seed = spec.seed;
            cfg.threads = spec.threads;
            cfg.memory_budget_mb = spec.budget_mb;
            cfg.max_jumps = p(spec, "max_jumps");
            const std::size_t reps = pz(spec, "variance_replicates");
            std::vector<std::vector<double>> x(cfg.steps + 1);
            for (std::size_t r = 0; r < reps; ++r) {
                cfg.replicate = 1'000'000 + r;
                const auto path = markov_market(cfg);
                for (std::size_t k = 0; k <= cfg.steps; ++k)
                    x[k].push_back(path.x_scaled.values[k]);
            }
            std::vector<double> ts, vs;
            auto vcsv = open_csv(spec, report, "variance_linear.csv", "t,variance");
            for (std::size_t k = 1; k <= cfg.steps; ++k) {
                ts.push_back(cfg.horizon * static_cast<double>(k) / static_cast<double>(cfg.steps));
                vs.push_back(variance(x[k]));
                vcsv << ts.back() << ',' << vs.back() << '\n';
            }
            const auto fit = fit_line(ts, vs);
            const double s2 = markov_diffusion_coefficient(model);
            report.cells.push_back({{"variance_fit", {{"slope", fit.slope}, {"intercept", fit.intercept},
                                                      {"r2", fit.r2}, {"sigma2", s2}}}});
            report.verdicts.push_back(verdict("variance_linear_r2", "variance", fit.r2, p(spec, "min_r2"), 1.0));
            const double tol = p(spec, "variance_slope_tolerance");
            report.verdicts.push_back(verdict("variance_slope_over_sigma2", "variance", fit.slope / s2, 1 - tol, 1 + tol));
        }
    }
}

// ---------------------------------------------------------------- mixed market

void run_mixed(const ExperimentSpec& spec, Report& report)
{
    const auto active = resolve_model(spec.params.at("active_model"), 1.5);
    const double s2 = markov_diffusion_coefficient(active);
    const double T = p(spec, "horizon");
    auto csv = open_csv(spec, report, "mixed_qv.csv", "cell,replicate,stride,qv_inert,qv_active,qv_combined");
    for (double alpha : spec.alphas) {
        const auto model = resolve_model(spec.model, alpha);
        for (double eps : spec.epsilons)
            for (std::size_t n : spec.agents) {
                std::map<double, std::vector<double>> contribution;  // per rho, per replicate
                for (double rho : spec.rhos) {
                    const auto cell = cell_name(model.alpha(), eps, n) + ",rho=" + num(rho);
                    std::vector<std::vector<double>> qi, qc;
                    std::vector<double> contrib;
                    for (std::size_t r = 0; r < spec.replicates; ++r) {
                        MarketConfig cfg(model);
                        cfg.n_agents = n;
                        cfg.epsilon = eps;
                        cfg.horizon = T;
                        cfg.steps = pz(spec, "steps");
                        cfg.seed = spec.seed;
                        cfg.replicate = r;
                        cfg.threads = spec.threads;
                        cfg.memory_budget_mb = spec.budget_mb;
                        cfg.max_jumps = p(spec, "max_jumps");
                        const auto m = mixed_market(cfg, rho, active);
                        std::vector<double> a, c;
                        for (std::size_t s : qv_strides) {
                            a.push_back(quadratic_variation(m.inert.x_scaled, s));
                            c.push_back(quadratic_variation(m.combined, s));
                            csv << cell << ',' << r << ',' << s << ',' << a.back() << ','
                                << quadratic_variation(m.active.x_scaled, s) << ',' << c.back() << '\n';
                        }
                        contrib.push_back(c.back() - a.back());
                        qi.push_back(a);
                        qc.push_back(c);
                    }
                    contribution[rho] = contrib;
                    std::vector<double> mi(qv_strides.size(), 0.0), mc(qv_strides.size(), 0.0);
                    for (std::size_t r = 0; r < spec.replicates; ++r)
                        for (std::size_t l = 0; l < qv_strides.size(); ++l) {
                            mi[l] += qi[r][l] / static_cast<double>(spec.replicates);
                            mc[l] += qc[r][l] / static_cast<double>(spec.replicates);
                        }
                    const double target = s2 * rho * T;
                    report.cells.push_back({{"cell", cell}, {"strides", qv_strides}, {"qv_inert", mi},
                                            {"qv_combined", mc}, {"wiener_target", target}});
                    if (rho > 0.0) {
                        double worst = 0.0;
                        for (double q : mc)
                            worst = std::max(worst, std::abs(q / target - 1.0));
                        report.verdicts.push_back(verdict("combined_qv_deviation", cell, worst, 0.0, p(spec, "qv_band")));
                    }
                    bool decreasing = true;
                    for (std::size_t l = 1; l < mi.size(); ++l)
                        decreasing = decreasing && mi[l] < mi[l - 1];
                    report.verdicts.push_back(flag("inert_qv_decreasing", cell, decreasing, "strictly decreasing"));
                    report.verdicts.push_back(
                        verdict("inert_qv_finest_over_coarsest", cell, mi.back() / mi.front(), 0.0, p(spec, "inert_ratio_max")));
                }
                for (double rho : spec.rhos) {
                    const auto it = contribution.find(2 * rho);
                    if (rho <= 0.0 || it == contribution.end())
                        continue;
                    std::vector<double> q;
                    for (std::size_t r = 0; r < spec.replicates; ++r)
                        q.push_back(it->second[r] / contribution[rho][r]);
                    const double m = mean(q);
                    const double se = q.size() > 1 ? std::sqrt(variance(q) / static_cast<double>(q.size())) : 0.0;
                    const auto cell = cell_name(model.alpha(), eps, n) + ",rho=" + num(rho) + "->" + num(2 * rho);
                    report.cells.push_back({{"cell", cell}, {"wiener_ratio", summary(q)}});
                    report.verdicts.push_back(verdict("rho_doubling_ratio", cell, m, 2.0 - 3 * se, 2.0 + 3 * se));
                }
            }
    }
}

// ---------------------------------------------------------------- renewal tables

void run_renewal_tables(const ExperimentSpec& spec, Report& report)
{
    const double step = p(spec, "step"), horizon = p(spec, "horizon");
    for (double alpha : spec.alphas) {
        const auto model = resolve_model(spec.model, alpha);
        const double H = model.hurst();
        const std::string acell = "alpha=" + num(model.alpha()), tag = "alpha" + num(model.alpha());
        const auto grid = Grid::covering(horizon, step);
        const auto table = stationary_transition(model, grid);
        const std::size_t stride = pz(spec, "csv_stride");
        const auto name = "transition_" + tag + ".csv";
        auto out = open_csv(spec, report, name, "t,i,j,p");
        for (std::size_t k = 0; k < grid.n_points; k += stride)
            for (std::size_t i = 0; i < table.dim; ++i)
                for (std::size_t j = 0; j < table.dim; ++j)
                    out << grid.time(k) << ',' << model.space().label(i) << ',' << model.space().label(j) << ','
                        << table(i, j)[k] << '\n';
        const auto rs = renewal_summary(model, step, horizon, pv(spec, "variance_window"), pv(spec, "gamma_window"));
        write_csv((std::filesystem::path(spec.out_dir) / ("gamma_" + tag + ".csv")).string(), "gamma", rs.gamma, stride);
        write_csv((std::filesystem::path(spec.out_dir) / ("variance_" + tag + ".csv")).string(), "var", rs.var, stride);
        report.artifacts.push_back("gamma_" + tag + ".csv");
        report.artifacts.push_back("variance_" + tag + ".csv");
        json cj = json::object();
        for (int label : model.space().states())
            if (label != 0)
                cj[std::to_string(label)] = tail_constant_Cj(model, label);
        report.cells.push_back({{"cell", acell}, {"gamma_slope", rs.gamma_slope}, {"variance_slope", rs.var_slope},
                                {"c2_closed_form", rs.c2}, {"c2_fitted", rs.c2_fit}, {"C_j", cj},
                                {"nu_lattice", std::vector<double>(table.nu.data(), table.nu.data() + table.dim)}});
        const double sb = p(spec, "slope_band");
        report.verdicts.push_back(verdict("gamma_slope", acell, rs.gamma_slope, 2 * H - 2 - sb, 2 * H - 2 + sb));
        const double tol = p(spec, "constant_tolerance");
        report.verdicts.push_back(verdict("limit_constant_ratio", acell, rs.c2_fit / rs.c2, 1 - tol, 1 + tol));
    }
}

// ---------------------------------------------------------------- fBm self-test

void run_fbm_selftest(const ExperimentSpec& spec, Report& report)
{
    const std::size_t n = pz(spec, "cov_steps"), paths = pz(spec, "cov_paths");
    const std::vector<std::size_t> idx{n / 16, n / 8, n / 4, n / 2, n};
    const double dt = 1.0 / static_cast<double>(n);
    for (double H : pv(spec, "cov_hurst")) {
        const FbmGenerator gen(H, n);
        std::vector<std::vector<double>> prod(15, std::vector<double>(paths));
        for (std::size_t r = 0; r < paths; ++r) {
            Engine rng = make_stream(spec.seed, r, static_cast<std::uint64_t>(std::llround(H * 1000)));
            const auto b = gen.path(dt, rng);
            std::size_t e = 0;
            for (std::size_t a = 0; a < 5; ++a)
                for (std::size_t c = a; c < 5; ++c)
                    prod[e++][r] = b.values[idx[a]] * b.values[idx[c]];
        }
        double worst = 0.0;
        std::size_t e = 0;
        for (std::size_t a = 0; a < 5; ++a)
            for (std::size_t c = a; c < 5; ++c, ++e) {
                const double s = dt * idx[a], t = dt * idx[c];
                const double want = 0.5 * (std::pow(s, 2 * H) + std::pow(t, 2 * H) - std::pow(t - s, 2 * H));
                const double se = std::sqrt(variance(prod[e]) / static_cast<double>(paths));
                worst = std::max(worst, std::abs(mean(prod[e]) - want) / se);
            }
        report.cells.push_back({{"cell", "covariance,H=" + num(H)}, {"max_z", worst}});
        report.verdicts.push_back(verdict("covariance_max_z", "H=" + num(H), worst, 0.0, p(spec, "max_z")));
    }
    auto csv = open_csv(spec, report, "estimators.csv", "H,seed,h_variogram,h_aggregated");
    const std::size_t en = pz(spec, "est_steps");
    for (double H : pv(spec, "est_hurst")) {
        double worst = 0.0, gap = 0.0;
        std::vector<double> hv, ha;
        const FbmGenerator gen(H, en);
        for (std::size_t s = 0; s < pz(spec, "est_seeds"); ++s) {
            Engine rng = make_stream(spec.seed, s, 1'000'000 + static_cast<std::uint64_t>(std::llround(H * 1000)));
            const auto b = gen.path(1.0, rng);
            const double v = hurst_variogram(b).h_hat, a = hurst_aggregated_variance(b).h_hat;
            hv.push_back(v);
            ha.push_back(a);
            worst = std::max({worst, std::abs(v - H), std::abs(a - H)});
            gap = std::max(gap, std::abs(v - a));
            csv << H << ',' << s << ',' << v << ',' << a << '\n';
        }
        const auto cell = "H=" + num(H);
        report.cells.push_back({{"cell", "estimators," + cell}, {"variogram", summary(hv)}, {"aggregated", summary(ha)}});
        report.verdicts.push_back(verdict("estimator_max_error", cell, worst, 0.0, p(spec, "max_error")));
        report.verdicts.push_back(verdict("estimator_max_disagreement", cell, gap, 0.0, p(spec, "max_disagreement")));
    }
}

// ---------------------------------------------------------------- integral identities

void run_integral_identities(const ExperimentSpec& spec, Report& report)
{
    const std::size_t n = pz(spec, "steps");
    const double H = p(spec, "hurst");
    const Grid g(1.0 / static_cast<double>(n), n + 1);
    const auto ladder = PartitionLadder::dyadic(g, pz(spec, "levels"));
    std::vector<double> smooth(g.n_points);
    for (std::size_t k = 0; k < g.n_points; ++k)
        smooth[k] = std::exp(g.time(k));
    const SamplePath psi_smooth(g, smooth);
    const auto amp = AmplitudeModel::diffusion(p(spec, "psi_drift"), p(spec, "psi_volatility"), 1.0);

    double identity = 0.0, min_shrink = INFINITY;
    bool cs = true;
    std::vector<StieltjesResult> runs;
    auto csv = open_csv(spec, report, "integral_levels.csv", "replicate,level,mesh,stieltjes_at_T,parts_sup,qv");
    for (std::size_t r = 0; r < spec.replicates; ++r) {
        Engine rng = make_stream(spec.seed, r, 0);
        const auto b = sample_fbm(H, n, g.step, rng);
        const auto w = sample_wiener(n, g.step, rng);
        const auto psi = simulate_amplitude(amp, g, rng);
        const auto self_b = self_integral_identity(b, ladder), self_w = self_integral_identity(w, ladder);
        identity = std::max({identity, self_b.identity_error, self_w.identity_error});
        const auto parts = integration_by_parts_residual(psi_smooth, b, ladder);
        for (double s : parts.shrink)
            min_shrink = std::min(min_shrink, s);
        cs = cs && cross_variation(b, w, ladder).cauchy_schwarz && cross_variation(b, psi, ladder).cauchy_schwarz;
        runs.push_back(stieltjes_integral(psi, b, ladder));
        for (std::size_t k = 0; k < ladder.levels(); ++k)
            csv << r << ',' << k << ',' << ladder.mesh(k) << ',' << runs.back().at_T[k] << ',' << parts.sup[k] << ','
                << self_b.qv[k] << '\n';
    }
    const auto rc = replicated_convergence(runs);
    report.cells.push_back({{"cell", "identities"}, {"self_identity_error", identity},
                            {"parts_min_shrink", min_shrink}, {"cauchy_schwarz", cs},
                            {"stieltjes_rms_changes", rc.rms_changes},
                            {"stieltjes_paths_converged", rc.paths_converged}});
    report.verdicts.push_back(verdict("self_identity_error", "identities", identity, 0.0, 1e-12));
    report.verdicts.push_back(verdict("parts_min_shrink", "identities", min_shrink, 1.5, INFINITY));
    report.verdicts.push_back(flag("cauchy_schwarz", "identities", cs, "holds on every level"));
    report.verdicts.push_back(flag("stieltjes_converged", "identities", rc.converged, "rms change shrinks >= 1.5 per level"));

    const auto gm = goodness_moments(amp, 1.0, pz(spec, "goodness_paths"), n, spec.seed);
    const double want = expected_bracket(amp, 1.0);
    report.cells.push_back({{"cell", "goodness"}, {"bracket", gm.mm}, {"bracket_se", gm.mm_se},
                            {"bracket_closed_form", want}, {"drift_variation", gm.variation},
                            {"drift_variation_se", gm.variation_se}});
    report.verdicts.push_back(verdict("bracket_z", "goodness", std::abs(gm.mm - want) / gm.mm_se, 0.0, 4.0));

    const auto ld = law_drift(amp, pv(spec, "drift_hurst"), H, pz(spec, "drift_paths"), pz(spec, "drift_steps"),
                              p(spec, "drift_horizon"), spec.seed);
    report.cells.push_back({{"cell", "law_drift"}, {"hurst", ld.hs}, {"ks", ld.ks}});
    report.verdicts.push_back(flag("law_drift_decreasing", "law_drift", ld.decreasing, "KS distance strictly decreasing"));
}

// ---------------------------------------------------------------- key renewal

void run_key_renewal(const ExperimentSpec& spec, Report& report)
{
    const auto law = SojournLaw::pareto(p(spec, "scale"), p(spec, "alpha"));
    const auto res = key_renewal_asymptote(law, [](double t) { return std::exp(-t); },
                                           Grid::covering(p(spec, "horizon"), p(spec, "step")), pv(spec, "ladder"));
    if (!res.applicable)
        throw std::invalid_argument("key-renewal: " + res.note);
    report.cells.push_back({{"cell", "pareto"}, {"kappa", res.kappa}, {"lambda", res.lambda},
                            {"ladder", res.ladder}, {"ratios", res.ratios}, {"note", res.note}});
    auto csv = open_csv(spec, report, "key_renewal.csv", "t,residual,predicted,ratio");
    for (std::size_t k = 0; k < res.ladder.size(); ++k)
        csv << res.ladder[k] << ',' << res.residual.at(res.ladder[k]) << ',' << res.predicted(res.ladder[k]) << ','
            << res.ratios[k] << '\n';
    const auto band = pv(spec, "ratio_band");
    report.verdicts.push_back(verdict("ratio_at_horizon", "pareto", res.ratios.back(), band.at(0), band.at(1)));
    report.verdicts.push_back(flag("monotone_approach", "pareto", res.monotone, "|ratio - 1| nonincreasing"));
}

// ---------------------------------------------------------------- spec parsing

bool whole(const json& j, std::int64_t min)
{
    return j.is_number_integer() && j.get<std::int64_t>() >= min;
}

template <class T>
std::vector<T> read_grid(const json& j, const std::string& where)
{
    if (!j.is_array() || j.empty())
        throw std::invalid_argument(where + ": expected a nonempty array of numbers");
    std::vector<T> out;
    for (std::size_t k = 0; k < j.size(); ++k) {
        if (!j[k].is_number())
            throw std::invalid_argument(where + "[" + std::to_string(k) + "]: expected a number");
        if constexpr (std::is_same_v<T, std::size_t>) {
            if (!whole(j[k], 1))
                throw std::invalid_argument(where + "[" + std::to_string(k) + "]: expected a positive integer");
        }
        out.push_back(j[k].get<T>());
    }
    return out;
}

bool same_shape(const json& a, const json& b)
{
    if (a.is_number() && b.is_number())
        return true;
    if (a.is_array() && b.is_array())
        return std::all_of(b.begin(), b.end(), [](const json& x) { return x.is_number(); });
    return a.type() == b.type();
}

}  // namespace

std::string to_string(ExperimentKind kind) { return kind_names().at(kind); }

ExperimentKind experiment_kind(const std::string& name)
{
    for (const auto& [k, n] : kind_names())
        if (n == name)
            return k;
    throw std::invalid_argument("unknown experiment kind \"" + name + "\"");
}

const std::vector<ExperimentKind>& all_experiment_kinds()
{
    static const std::vector<ExperimentKind> kinds = [] {
        std::vector<ExperimentKind> v;
        for (const auto& [k, n] : kind_names())
            v.push_back(k);
        return v;
    }();
    return kinds;
}

ExperimentSpec ExperimentSpec::defaults(ExperimentKind kind)
{
    ExperimentSpec s;
    s.kind = kind;
    s.epsilons = {1e-3};
    s.agents = {1000};
    s.alphas = {1.5};
    s.rhos = {0.5, 1.0};
    s.replicates = 10;
    s.model = "asymmetric";
    const json market{{"steps", 8192}, {"model_horizon", 1e6}, {"max_jumps", 2e10}, {"hurst_band", {0.43, 0.57}},
                      {"estimator_agreement", 0.06}};
    switch (kind) {
    case ExperimentKind::limit_verification:
        s.params = market;
        s.params.erase("hurst_band");
        s.params["hurst_halfwidth"] = 0.08;
        s.params["renewal_step"] = 0.05;
        s.params["variance_window"] = {100.0, 10000.0};
        s.params["constant_window"] = {1000.0, 10000.0};
        s.params["slope_band"] = 0.1;
        s.params["constant_tolerance"] = 0.2;
        break;
    case ExperimentKind::example_a:
        s.model = "symmetric";
        s.params = market;
        break;
    case ExperimentKind::markov_baseline:
        s.model = "markov";
        s.params = market;
        s.params["qv_stability_band"] = {0.8, 1.25};
        s.params["variance_agents"] = 100;
        s.params["variance_model_horizon"] = 1e4;
        s.params["variance_replicates"] = 200;
        s.params["min_r2"] = 0.95;
        s.params["variance_slope_tolerance"] = 0.2;
        break;
    case ExperimentKind::mixed_market:
        s.epsilons = {1e-5};
        s.alphas = {1.4, 1.6};
        s.params = {{"steps", 1024}, {"horizon", 1.0}, {"max_jumps", 2e10}, {"active_model", "markov"},
                    {"qv_band", 0.15}, {"inert_ratio_max", 0.75}};
        break;
    case ExperimentKind::renewal_tables:
        s.alphas = {1.4, 1.5, 1.6};
        s.replicates = 1;
        s.params = {{"step", 0.05}, {"horizon", 10000.0}, {"csv_stride", 200},
                    {"variance_window", {100.0, 10000.0}}, {"gamma_window", {1000.0, 10000.0}},
                    {"slope_band", 0.1}, {"constant_tolerance", 0.2}};
        break;
    case ExperimentKind::fbm_selftest:
        s.replicates = 1;
        s.params = {{"cov_steps", 1024}, {"cov_paths", 20000}, {"cov_hurst", {0.6, 0.75}}, {"max_z", 4.0},
                    {"est_steps", 16384}, {"est_seeds", 20}, {"est_hurst", {0.5, 0.6, 0.75, 0.9}},
                    {"max_error", 0.05}, {"max_disagreement", 0.06}};
        break;
    case ExperimentKind::integral_identities:
        s.replicates = 5;
        s.params = {{"steps", 16384}, {"levels", 7}, {"hurst", 0.75}, {"psi_drift", 0.1}, {"psi_volatility", 0.3},
                    {"goodness_paths", 2000}, {"drift_hurst", {0.6, 0.65, 0.7, 0.74}}, {"drift_paths", 2000},
                    {"drift_steps", 256}, {"drift_horizon", 4.0}};
        break;
    case ExperimentKind::key_renewal:
        s.replicates = 1;
        s.params = {{"scale", 1.0}, {"alpha", 1.5}, {"step", 0.05}, {"horizon", 10000.0},
                    {"ladder", {100.0, 316.22776601683796, 1000.0, 3162.2776601683795, 10000.0}},
                    {"ratio_band", {0.9, 1.1}}};
        break;
    }
    return s;
}

ExperimentSpec ExperimentSpec::from_json(ExperimentKind kind, const json& config)
{
    ExperimentSpec s = defaults(kind);
    if (!config.is_object())
        throw std::invalid_argument("config: expected an object");
    for (const auto& [key, value] : config.items()) {
        const std::string where = "config." + key;
        if (key == "kind") {
            if (!value.is_string() || experiment_kind(value.get<std::string>()) != kind)
                throw std::invalid_argument(where + ": does not match the subcommand " + to_string(kind));
        } else if (key == "model") {
            if (!value.is_string() && !value.is_object())
                throw std::invalid_argument(where + ": expected a preset name or a model object");
            s.model = value;
        } else if (key == "epsilons") {
            s.epsilons = read_grid<double>(value, where);
        } else if (key == "agents") {
            s.agents = read_grid<std::size_t>(value, where);
        } else if (key == "alphas") {
            s.alphas = read_grid<double>(value, where);
        } else if (key == "rhos") {
            s.rhos = read_grid<double>(value, where);
        } else if (key == "replicates") {
            if (!whole(value, 1))
                throw std::invalid_argument(where + ": expected a positive integer");
            s.replicates = value.get<std::size_t>();
        } else if (key == "seed") {
            if (!whole(value, 0))
                throw std::invalid_argument(where + ": expected a nonnegative integer");
            s.seed = value.get<std::uint64_t>();
        } else if (key == "out_dir") {
            if (!value.is_string())
                throw std::invalid_argument(where + ": expected a string");
            s.out_dir = value.get<std::string>();
        } else if (key == "threads") {
            if (!whole(value, 0))
                throw std::invalid_argument(where + ": expected a nonnegative integer");
            s.threads = value.get<std::size_t>();
        } else if (key == "budget_mb") {
            if (!value.is_number() || !(value.get<double>() > 0.0))
                throw std::invalid_argument(where + ": expected a positive number");
            s.budget_mb = value.get<double>();
        } else if (key == "params") {
            if (!value.is_object())
                throw std::invalid_argument(where + ": expected an object");
            for (const auto& [pk, pvalue] : value.items()) {
                const std::string pw = where + "." + pk;
                if (!s.params.contains(pk))
                    throw std::invalid_argument(pw + ": unknown parameter for " + to_string(kind));
                if (!same_shape(s.params.at(pk), pvalue))
                    throw std::invalid_argument(pw + ": expected " + std::string(s.params.at(pk).type_name()));
                s.params[pk] = pvalue;
            }
        } else {
            throw std::invalid_argument(where + ": unknown key");
        }
    }
    s.validate();
    return s;
}

json ExperimentSpec::to_json() const
{
    return {{"kind", to_string(kind)}, {"model", model},         {"epsilons", epsilons},
            {"agents", agents},        {"alphas", alphas},       {"rhos", rhos},
            {"replicates", replicates}, {"seed", seed},          {"out_dir", out_dir},
            {"threads", threads},      {"budget_mb", budget_mb}, {"params", params}};
}

void ExperimentSpec::validate() const
{
    if (epsilons.empty() || agents.empty() || alphas.empty() || rhos.empty())
        throw std::invalid_argument("config: sweep grids must be nonempty");
    if (replicates < 1)
        throw std::invalid_argument("config.replicates: must be at least 1");
    for (double e : epsilons)
        if (!(e > 0.0))
            throw std::invalid_argument("config.epsilons: values must be positive");
    for (std::size_t n : agents)
        if (n < 1)
            throw std::invalid_argument("config.agents: values must be at least 1");
    for (double r : rhos)
        if (!(r >= 0.0))
            throw std::invalid_argument("config.rhos: values must be nonnegative");
    if (!(budget_mb > 0.0))
        throw std::invalid_argument("config.budget_mb: must be positive");
}

json Verdict::to_json() const
{
    return {{"name", name}, {"cell", cell}, {"band", band}, {"value", value},
            {"lo", lo},     {"hi", hi},     {"pass", pass}};
}

bool Report::passed() const
{
    return std::all_of(verdicts.begin(), verdicts.end(), [](const Verdict& v) { return v.pass; });
}

json Report::to_json() const
{
    json v = json::array();
    for (const auto& x : verdicts)
        v.push_back(x.to_json());
    return {{"schema_version", report_schema_version},
            {"kind", to_string(kind)},
            {"passed", passed()},
            {"spec", spec},
            {"cells", cells},
            {"verdicts", v},
            {"artifacts", artifacts},
            {"provenance", {{"seed", spec.at("seed")}, {"version", library_version},
                            {"threads", spec.at("threads")}, {"wall_time_s", wall_time_s}}}};
}

SemiMarkovModel resolve_model(const json& model, double alpha)
{
    if (model.is_string()) {
        const auto name = model.get<std::string>();
        if (name == "symmetric")
            return presets::three_state(alpha, 0.5);
        if (name == "asymmetric")
            return presets::asymmetric(alpha);
        if (name.ends_with(".json"))
            return model_from_json(load_json_file(name));
        return presets::by_name(name);
    }
    return model_from_json(model);
}

Report run(const ExperimentSpec& spec)
{
    spec.validate();
    std::filesystem::create_directories(spec.out_dir);
    const auto start = std::chrono::steady_clock::now();
    Report report;
    report.kind = spec.kind;
    report.spec = spec.to_json();
    switch (spec.kind) {
    case ExperimentKind::limit_verification:
    case ExperimentKind::example_a:
    case ExperimentKind::markov_baseline:
        run_hurst_pipeline(spec, report);
        break;
    case ExperimentKind::mixed_market:
        run_mixed(spec, report);
        break;
    case ExperimentKind::renewal_tables:
        run_renewal_tables(spec, report);
        break;
    case ExperimentKind::fbm_selftest:
        run_fbm_selftest(spec, report);
        break;
    case ExperimentKind::integral_identities:
        run_integral_identities(spec, report);
        break;
    case ExperimentKind::key_renewal:
        run_key_renewal(spec, report);
        break;
    }
    report.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const auto path = std::filesystem::path(spec.out_dir) / "report.json";
    std::ofstream out(path);
    if (!out)
        throw std::runtime_error("cannot write " + path.string());
    out << report.to_json().dump(2) << '\n';
    return report;
}

}  // namespace inertsim
