#include "inertsim/renewal.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <stdexcept>

#include <boost/math/quadrature/exp_sinh.hpp>

#include "inertsim/convolution.hpp"
#include "inertsim/stats.hpp"

namespace inertsim {
namespace {

std::vector<double> increments_of(const std::vector<double>& v)
{
    std::vector<double> d(v.size());
    double prev = 0.0;
    for (std::size_t k = 0; k < v.size(); ++k) {
        d[k] = v[k] - prev;
        prev = v[k];
    }
    return d;
}

bool all_zero(const std::vector<double>& v)
{
    return std::all_of(v.begin(), v.end(), [](double x) { return x == 0.0; });
}

void check_distribution(const GridFunction& f, const std::string& what)
{
    const double bound = 1.0 + 10.0 * f.grid.step;
    double prev = 0.0;
    for (std::size_t k = 0; k < f.size(); ++k) {
        const double v = f.values[k];
        if (!std::isfinite(v) || v > bound || v < prev - 1e-9)
            throw std::runtime_error(what + ": distribution left [0, 1 + 10 dt] or decreased at t = "
                                     + std::to_string(f.grid.time(k)) + "; the step is too coarse");
        prev = std::max(prev, v);
    }
}

}  // namespace

GridFunction::GridFunction(Grid g, std::vector<double> v, GridKind k)
    : grid(g), values(std::move(v)), kind(k)
{
    if (values.size() != grid.n_points)
        throw std::invalid_argument("GridFunction: length does not match grid");
}

std::vector<double> GridFunction::increments() const { return increments_of(values); }

KernelGrid kernel_on_grid(const SemiMarkovModel& model, const Grid& grid)
{
    KernelGrid k;
    k.grid = grid;
    k.dim = model.size();
    for (std::size_t i = 0; i < k.dim; ++i)
        for (std::size_t j = 0; j < k.dim; ++j) {
            std::vector<double> v(grid.n_points, 0.0);
            if (model.chain()(i, j) > 0.0)
                for (std::size_t n = 0; n < grid.n_points; ++n)
                    v[n] = model.kernel(i, j, grid.time(n));
            k.q.emplace_back(grid, std::move(v), GridKind::distribution);
        }
    return k;
}

std::vector<GridFunction> survival_h(const KernelGrid& kernel)
{
    std::vector<GridFunction> out;
    for (std::size_t i = 0; i < kernel.dim; ++i) {
        std::vector<double> v(kernel.grid.n_points, 1.0);
        for (std::size_t j = 0; j < kernel.dim; ++j)
            for (std::size_t n = 0; n < v.size(); ++n)
                v[n] -= kernel(i, j).values[n];
        out.emplace_back(kernel.grid, std::move(v), GridKind::plain);
    }
    return out;
}

std::vector<GridFunction> first_passage(const KernelGrid& kernel, std::size_t target)
{
    if (target >= kernel.dim)
        throw std::invalid_argument("first_passage: target index out of range");
    MatrixKernel a(kernel.dim, std::vector<std::vector<double>>(kernel.dim));
    std::vector<std::vector<double>> b(kernel.dim);
    for (std::size_t i = 0; i < kernel.dim; ++i) {
        b[i] = kernel(i, target).values;
        for (std::size_t k = 0; k < kernel.dim; ++k)
            if (k != target && !all_zero(kernel(i, k).values))
                a[i][k] = kernel(i, k).increments();
    }
    auto y = solve_volterra(a, std::move(b));
    std::vector<GridFunction> out;
    for (auto& v : y) {
        out.emplace_back(kernel.grid, std::move(v), GridKind::distribution);
        check_distribution(out.back(), "first_passage");
    }
    return out;
}

GridFunction renewal_function(const GridFunction& f_jj)
{
    MatrixKernel a{{f_jj.increments()}};
    auto y = solve_volterra(a, {std::vector<double>(f_jj.size(), 1.0)});
    return GridFunction(f_jj.grid, std::move(y[0]), GridKind::plain);
}

GridFunction delayed_renewal(const GridFunction& r_jj, const GridFunction& f_ij)
{
    if (!(r_jj.grid == f_ij.grid))
        throw std::invalid_argument("delayed_renewal: grids differ");
    return GridFunction(r_jj.grid, convolve(f_ij.increments(), r_jj.values, r_jj.size()),
                        GridKind::plain);
}

GridFunction stationary_renewal(const GridFunction& r_jj, const GridFunction& fstar_ij)
{
    return delayed_renewal(r_jj, fstar_ij);
}

LatticeStart lattice_start(const SemiMarkovModel& model, const Grid& grid)
{
    const std::size_t d = model.size();
    const double dt = grid.step;
    LatticeStart st;
    st.grid = grid;
    st.m = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(d));
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t k = 0; k < d; ++k)
            if (model.chain()(i, k) > 0.0)
                st.m(static_cast<Eigen::Index>(i))
                    += model.chain()(i, k) * model.sojourns().law(i, k).lattice_mean(dt);
    const Eigen::VectorXd pi = stationary_law(model).pi;
    st.nu = pi.cwiseProduct(st.m) / pi.dot(st.m);

    for (std::size_t i = 0; i < d; ++i) {
        const double mi = st.m(static_cast<Eigen::Index>(i));
        std::vector<double> total(grid.n_points, 0.0);
        for (std::size_t k = 0; k < d; ++k) {
            std::vector<double> v(grid.n_points, 0.0);
            const double p = model.chain()(i, k);
            if (p > 0.0) {
                const SojournLaw& law = model.sojourns().law(i, k);
                double acc = 0.0;
                for (std::size_t n = 1; n < grid.n_points; ++n) {
                    acc += law.tail(grid.time(n - 1));
                    v[n] = p / mi * dt * acc;
                }
            }
            for (std::size_t n = 0; n < v.size(); ++n)
                total[n] += v[n];
            st.shat.emplace_back(grid, std::move(v), GridKind::distribution);
        }
        for (auto& x : total)
            x = st.nu(static_cast<Eigen::Index>(i)) * (1.0 - x);
        st.s.emplace_back(grid, std::move(total), GridKind::plain);
    }
    return st;
}

namespace {

GridFunction fstar_from(const LatticeStart& st, const std::vector<GridFunction>& f_to_j, std::size_t i,
                        std::size_t j)
{
    const std::size_t d = f_to_j.size();
    std::vector<double> v = st.shat[i * d + j].values;
    for (std::size_t k = 0; k < d; ++k) {
        if (k == j)
            continue;
        const auto ds = st.shat[i * d + k].increments();
        if (all_zero(ds))
            continue;
        const auto c = convolve(ds, f_to_j[k].values, v.size());
        for (std::size_t n = 0; n < v.size(); ++n)
            v[n] += c[n];
    }
    GridFunction out(st.grid, std::move(v), GridKind::distribution);
    check_distribution(out, "stationary_first_passage");
    return out;
}

void require_resolution(const SemiMarkovModel& model, const Grid& grid)
{
    double shortest = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < model.size(); ++i)
        shortest = std::min(shortest, model.mean_sojourn(i));
    if (grid.step > shortest / 20.0 * (1.0 + 1e-12))
        throw std::invalid_argument("stationary_transition: step " + std::to_string(grid.step)
                                    + " does not resolve the shortest mean sojourn "
                                    + std::to_string(shortest) + " (need step <= mean/20)");
}

}  // namespace

GridFunction stationary_first_passage(const SemiMarkovModel& model, const Grid& grid, std::size_t i,
                                      std::size_t j)
{
    const auto kernel = kernel_on_grid(model, grid);
    const auto f = first_passage(kernel, j);
    return fstar_from(lattice_start(model, grid), f, i, j);
}

TransitionTable stationary_transition(const SemiMarkovModel& model, const Grid& grid, bool nonzero_only)
{
    require_resolution(model, grid);
    const std::size_t d = model.size();
    const std::size_t z = model.space().index_of_zero();
    const auto kernel = kernel_on_grid(model, grid);
    const auto h = survival_h(kernel);
    const auto st = lattice_start(model, grid);

    TransitionTable table;
    table.grid = grid;
    table.dim = d;
    table.nu = st.nu;
    table.p.resize(d * d);
    for (std::size_t j = 0; j < d; ++j) {
        if (nonzero_only && j == z)
            continue;
        const auto f = first_passage(kernel, j);
        const auto r = renewal_function(f[j]);
        for (std::size_t i = 0; i < d; ++i) {
            if (nonzero_only && i == z)
                continue;
            const auto fstar = fstar_from(st, f, i, j);
            const auto rstar = stationary_renewal(r, fstar);
            auto v = convolve(rstar.increments(), h[j].values, grid.n_points);
            if (i == j) {
                const double nui = st.nu(static_cast<Eigen::Index>(i));
                for (std::size_t n = 0; n < v.size(); ++n)
                    v[n] += st.s[i].values[n] / nui;
            }
            table.p[i * d + j] = GridFunction(grid, std::move(v), GridKind::plain);
        }
    }
    if (!nonzero_only) {
        const double tol = 10.0 * grid.step;
        for (std::size_t i = 0; i < d; ++i)
            for (std::size_t n = 0; n < grid.n_points; ++n) {
                double sum = 0.0;
                for (std::size_t j = 0; j < d; ++j)
                    sum += table(i, j).values[n];
                if (std::abs(sum - 1.0) > tol)
                    throw std::runtime_error("stationary_transition: row " + std::to_string(i)
                                             + " sums to " + std::to_string(sum) + " at t = "
                                             + std::to_string(grid.time(n)));
            }
    }
    return table;
}

double tail_constant_Cj(const SemiMarkovModel& model, int j)
{
    if (j == 0)
        throw std::invalid_argument("tail_constant_Cj: j must be an active state");
    const auto law = stationary_law(model);
    const auto k = static_cast<Eigen::Index>(model.space().index_of(j));
    return law.m(k) / (law.eta(k) * law.eta(k)) * expected_visits_before_hit(model, j, j);
}

GridFunction covariance_gamma(const SemiMarkovModel& model, const TransitionTable& table)
{
    const std::size_t d = model.size();
    std::vector<double> g(table.grid.n_points, 0.0);
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j) {
            const double w = static_cast<double>(model.space().label(i)) * model.space().label(j)
                             * table.nu(static_cast<Eigen::Index>(i));
            if (w == 0.0)
                continue;
            const auto& p = table(i, j);
            const double nuj = table.nu(static_cast<Eigen::Index>(j));
            for (std::size_t n = 0; n < g.size(); ++n)
                g[n] += w * (p.values[n] - nuj);
        }
    return GridFunction(table.grid, std::move(g), GridKind::plain);
}

GridFunction covariance_gamma(const SemiMarkovModel& model, const Grid& grid)
{
    return covariance_gamma(model, stationary_transition(model, grid, true));
}

GridFunction variance_of_integral(const GridFunction& gamma)
{
    const double dt = gamma.grid.step;
    std::vector<double> inner(gamma.size(), 0.0), var(gamma.size(), 0.0);
    for (std::size_t n = 1; n < gamma.size(); ++n)
        inner[n] = inner[n - 1] + 0.5 * dt * (gamma.values[n - 1] + gamma.values[n]);
    for (std::size_t n = 1; n < gamma.size(); ++n)
        var[n] = var[n - 1] + dt * (inner[n - 1] + inner[n]);  // 2 * trapezoid
    return GridFunction(gamma.grid, std::move(var), GridKind::plain);
}

double asymptotic_covariance(const SemiMarkovModel& model, double t)
{
    const double c2 = limit_constant_c2(model);
    const double H = model.hurst();
    return c2 * H * (2.0 * H - 1.0) * std::pow(t, 2.0 * H - 2.0) * model.slowly_varying(t);
}

double asymptotic_variance(const SemiMarkovModel& model, double t)
{
    const double c2 = limit_constant_c2(model);
    return c2 * std::pow(t, 2.0 * model.hurst()) * model.slowly_varying(t);
}

AsymptoteFit fit_variance_asymptote(const SemiMarkovModel& model, const GridFunction& var, double t_lo,
                                    double t_hi)
{
    const double H = model.hurst();
    if (!(t_lo > 0.0 && t_hi > t_lo) || t_hi > var.grid.horizon() * (1.0 + 1e-12))
        throw std::invalid_argument("fit_variance_asymptote: bad window");
    std::vector<double> xs, ys;
    const int points = 64;
    for (int k = 0; k < points; ++k) {
        const double t = t_lo * std::pow(t_hi / t_lo, k / static_cast<double>(points - 1));
        const double v = var.at(t);
        const double tg = var.grid.time(var.grid.index_at_or_before(t));
        xs.push_back(std::pow(tg, 1.0 - 2.0 * H));
        ys.push_back(v / (std::pow(tg, 2.0 * H) * model.slowly_varying(tg)));
    }
    const auto f = fit_line(xs, ys);
    return {f.intercept, f.slope, f.r2, f.points};
}

double KeyRenewalResult::predicted(double t) const
{
    return -lambda / ((alpha - 1.0) * kappa * kappa) * std::pow(t, 1.0 - alpha) * law.slowly_varying(t);
}

KeyRenewalResult key_renewal_asymptote(const SojournLaw& f, const std::function<double(double)>& z,
                                       const Grid& grid, std::vector<double> ladder)
{
    KeyRenewalResult out;
    out.law = f;
    out.kappa = f.mean();
    out.alpha = f.tail_index();
    out.applicable = f.heavy() && out.alpha > 1.0 && out.alpha < 2.0;

    const double dt = grid.step;
    const std::size_t n = grid.n_points;
    std::vector<double> zv(n);
    for (std::size_t k = 0; k < n; ++k) {
        zv[k] = z(grid.time(k));
        if (!(zv[k] >= 0.0) || !std::isfinite(zv[k]))
            throw std::invalid_argument("key_renewal_asymptote: z must be finite and nonnegative");
    }
    boost::math::quadrature::exp_sinh<double> integrator;
    out.lambda = all_zero(zv) ? 0.0 : integrator.integrate(z, 0.0, std::numeric_limits<double>::infinity());

    // Lattice centring: dt * sum_k z(k dt) over the lattice mean.
    double lambda_lattice = 0.0;
    for (std::size_t k = 0; k < n; ++k)
        lambda_lattice += zv[k];
    for (std::size_t k = n; k < 100 * n; ++k) {
        const double term = z(static_cast<double>(k) * dt);
        lambda_lattice += term;
        if (term <= 1e-18 * lambda_lattice)
            break;
    }
    lambda_lattice *= dt;
    const double kappa_lattice = f.lattice_mean(dt);

    std::vector<double> fv(n);
    for (std::size_t k = 0; k < n; ++k)
        fv[k] = f.cdf(grid.time(k));
    const auto u = renewal_function(GridFunction(grid, fv, GridKind::distribution));
    const auto conv = convolve(zv, u.increments(), n);
    std::vector<double> h(n);
    for (std::size_t k = 0; k < n; ++k)
        h[k] = lambda_lattice / kappa_lattice - conv[k];
    out.residual = GridFunction(grid, std::move(h), GridKind::plain);

    if (!out.applicable) {
        out.note = "F is not heavy-tailed with index in (1, 2); the heavy-tailed asymptote does not apply";
        return out;
    }
    const double horizon = grid.horizon();
    if (zv.back() > 1e-3 * f.tail(horizon))
        out.note = "z is not negligible against the tail of F at the horizon";

    if (ladder.empty())
        for (double e = 2.0; e <= 4.0 + 1e-9; e += 0.5)
            ladder.push_back(std::pow(10.0, e));
    double prev = std::numeric_limits<double>::infinity();
    out.monotone = true;
    for (double t : ladder) {
        if (t > horizon * (1.0 + 1e-12))
            continue;
        out.ladder.push_back(t);
        const double r = out.residual.at(t) / out.predicted(t);
        out.ratios.push_back(r);
        if (std::abs(r - 1.0) > prev + 1e-12)
            out.monotone = false;
        prev = std::abs(r - 1.0);
    }
    return out;
}

void write_csv(const std::string& path, const std::string& quantity, const GridFunction& f,
               std::size_t stride)
{
    std::ofstream out(path);
    if (!out)
        throw std::runtime_error("cannot write " + path);
    out.precision(12);
    out << "t,quantity,value\n";
    for (std::size_t k = 0; k < f.size(); k += std::max<std::size_t>(stride, 1))
        out << f.grid.time(k) << ',' << quantity << ',' << f.values[k] << '\n';
}

}  // namespace inertsim
