#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "inertsim/distributions.hpp"
#include "inertsim/grid.hpp"
#include "inertsim/semi_markov.hpp"

namespace inertsim {

// All solvers work on the lattice process whose sojourns are rounded up to
// multiples of the grid step. Its kernel coincides with Q(i,j,t) at every grid
// point, the renewal equations become exact finite recursions, and the lattice
// quantities converge to the continuous ones at first order in the step.

enum class GridKind
{
    distribution,
    density,
    plain,
};

/// A function of time sampled on a uniform grid.
struct GridFunction
{
    Grid grid;
    std::vector<double> values;
    GridKind kind = GridKind::plain;

    GridFunction() = default;
    GridFunction(Grid g, std::vector<double> v, GridKind k = GridKind::plain);

    std::size_t size() const { return values.size(); }
    double operator[](std::size_t k) const { return values[k]; }
    /// Value at the last grid point not after t.
    double at(double t) const { return values[grid.index_at_or_before(t)]; }
    /// Increments v[k] - v[k-1], with v[-1] = 0.
    std::vector<double> increments() const;
};

/// Q(i,j,.) on the grid.
struct KernelGrid
{
    Grid grid;
    std::size_t dim = 0;
    std::vector<GridFunction> q;  ///< row-major dim x dim

    const GridFunction& operator()(std::size_t i, std::size_t j) const { return q[i * dim + j]; }
};

KernelGrid kernel_on_grid(const SemiMarkovModel& model, const Grid& grid);

/// h(i,.) = 1 - sum_j Q(i,j,.) for every state index i.
std::vector<GridFunction> survival_h(const KernelGrid& kernel);

/// F(i, target, .) for every state index i (first passage into target after
/// time 0; for i = target this is the next entrance).
std::vector<GridFunction> first_passage(const KernelGrid& kernel, std::size_t target);

/// R(j,j,.) solving R = 1 + F * R.
GridFunction renewal_function(const GridFunction& f_jj);
/// R(i,j,.) = int R(j,j,t-u) F(i,j,du).
GridFunction delayed_renewal(const GridFunction& r_jj, const GridFunction& f_ij);
/// R*(i,j,.) = int R(j,j,t-u) F*(i,j,du).
GridFunction stationary_renewal(const GridFunction& r_jj, const GridFunction& fstar_ij);

/// Equilibrium start of the lattice process.
struct LatticeStart
{
    Grid grid;
    Eigen::VectorXd m;      ///< lattice mean sojourns
    Eigen::VectorXd nu;     ///< lattice occupation law
    /// shat(i,k,.): P{xi_1 = k, T_1 <= t | xi_0 = i}, row-major.
    std::vector<GridFunction> shat;
    /// s(i,.) = nu_i P{T_1 > t | xi_0 = i}.
    std::vector<GridFunction> s;
};
LatticeStart lattice_start(const SemiMarkovModel& model, const Grid& grid);

/// F*(i,j,.) = shat(i,j,.) + sum_{k != j} F(k,j,.) * shat(i,k,.).
GridFunction stationary_first_passage(const SemiMarkovModel& model, const Grid& grid, std::size_t i,
                                      std::size_t j);

/// P*_t(i,j) for all pairs together with the lattice occupation law.
struct TransitionTable
{
    Grid grid;
    std::size_t dim = 0;
    Eigen::VectorXd nu;                ///< lattice occupation law (the limit of P*_t(i,.))
    std::vector<GridFunction> p;       ///< row-major; empty for pairs not requested
    const GridFunction& operator()(std::size_t i, std::size_t j) const { return p[i * dim + j]; }
};

/// Stationary transition probabilities. With `nonzero_only`, pairs involving
/// state 0 are skipped (they do not enter the covariance). Throws if the grid
/// does not resolve the shortest mean sojourn (step > min m / 20) or if a row
/// sum drifts from 1 by more than 10 steps.
TransitionTable stationary_transition(const SemiMarkovModel& model, const Grid& grid,
                                      bool nonzero_only = false);

/// C_j = (m_j / eta_j^2) E N^{j,j}_0 for a state label j != 0.
double tail_constant_Cj(const SemiMarkovModel& model, int j);

/// gamma(t) = sum_{i,j} i j nu_i (P*_t(i,j) - nu_j), centred with the lattice
/// occupation law so that gamma vanishes at infinity.
GridFunction covariance_gamma(const SemiMarkovModel& model, const Grid& grid);
GridFunction covariance_gamma(const SemiMarkovModel& model, const TransitionTable& table);

/// Var(t) = 2 int_0^t int_0^v gamma(u) du dv by cumulative trapezoid rules.
GridFunction variance_of_integral(const GridFunction& gamma);

/// c^2 H (2H - 1) t^{2H-2} L(t).
double asymptotic_covariance(const SemiMarkovModel& model, double t);
/// c^2 t^{2H} L(t).
double asymptotic_variance(const SemiMarkovModel& model, double t);

/// Two-term fit Var(t)/(t^{2H} L(t)) = a + b t^{1-2H} over grid points in
/// [t_lo, t_hi]: `a` estimates c^2 once the short-range linear part of the
/// variance is separated.
struct AsymptoteFit
{
    double level = 0.0;   ///< a
    double linear = 0.0;  ///< b
    double r2 = 0.0;
    std::size_t points = 0;
};
AsymptoteFit fit_variance_asymptote(const SemiMarkovModel& model, const GridFunction& var,
                                    double t_lo, double t_hi);

/// Heavy-tailed key renewal check: h(t) = lambda/kappa - int_0^t z(t-s) U(ds)
/// against -lambda/((alpha-1) kappa^2) t^{1-alpha} L(t).
struct KeyRenewalResult
{
    bool applicable = false;     ///< F heavy-tailed with alpha in (1,2)
    std::string note;            ///< reason when not applicable or warnings
    double kappa = 0.0;          ///< mean of F
    double lambda = 0.0;         ///< integral of z
    double alpha = 0.0;
    GridFunction residual;       ///< numeric h on the grid
    std::vector<double> ladder;  ///< evaluation times
    std::vector<double> ratios;  ///< residual / predicted on the ladder
    bool monotone = false;       ///< |ratio - 1| nonincreasing along the ladder

    SojournLaw law;

    double predicted(double t) const;
};

KeyRenewalResult key_renewal_asymptote(const SojournLaw& f, const std::function<double(double)>& z,
                                       const Grid& grid, std::vector<double> ladder = {});

/// Writes t,quantity,value rows for every `stride`-th grid point.
void write_csv(const std::string& path, const std::string& quantity, const GridFunction& f,
               std::size_t stride = 1);

}  // namespace inertsim
