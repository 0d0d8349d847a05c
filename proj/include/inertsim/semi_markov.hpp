#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "inertsim/distributions.hpp"
#include "inertsim/grid.hpp"
#include "inertsim/rng.hpp"

namespace inertsim {

/// Ordered integer trading moods; must contain the inactive state 0.
class StateSpace
{
public:
    explicit StateSpace(std::vector<int> states);

    const std::vector<int>& states() const { return states_; }
    std::size_t size() const { return states_.size(); }
    int label(std::size_t i) const { return states_.at(i); }
    std::size_t index_of(int label) const;
    std::size_t index_of_zero() const { return zero_; }

private:
    std::vector<int> states_;
    std::size_t zero_ = 0;
};

/// Embedded-chain transition matrix. Only shape and sign are checked here;
/// stochasticity and irreducibility are reported by validate_model.
class TransitionMatrix
{
public:
    explicit TransitionMatrix(Eigen::MatrixXd p);

    double operator()(std::size_t i, std::size_t j) const { return p_(i, j); }
    std::size_t size() const { return static_cast<std::size_t>(p_.rows()); }
    const Eigen::MatrixXd& matrix() const { return p_; }

private:
    Eigen::MatrixXd p_;
};

/// Sojourn laws G(i, j, .) for every edge of the chain.
class SojournFamily
{
public:
    /// Law depends on the current state only.
    static SojournFamily by_state(std::vector<SojournLaw> laws);
    /// Law per (current, next) pair, row-major n x n.
    static SojournFamily by_edge(std::size_t n, std::vector<SojournLaw> laws);

    std::size_t size() const { return n_; }
    const SojournLaw& law(std::size_t i, std::size_t j) const { return laws_[i * n_ + j]; }
    bool edge_dependent() const { return edge_dependent_; }

private:
    std::size_t n_ = 0;
    std::vector<SojournLaw> laws_;
    bool edge_dependent_ = false;
};

/// Semi-Markov kernel Q(i,j,t) = p_ij G(i,j,t) on a finite state space.
class SemiMarkovModel
{
public:
    SemiMarkovModel(StateSpace space, TransitionMatrix chain, SojournFamily sojourns,
                    double alpha, SlowlyVarying l = SlowlyVarying::constant);

    const StateSpace& space() const { return space_; }
    const TransitionMatrix& chain() const { return chain_; }
    const SojournFamily& sojourns() const { return sojourns_; }
    std::size_t size() const { return space_.size(); }
    double alpha() const { return alpha_; }
    SlowlyVarying slowly_varying_kind() const { return l_; }
    /// (3 - alpha)/2, or 1/2 for a model without heavy tails.
    double hurst() const;

    /// h(i,t): probability that a sojourn in state index i exceeds t.
    double survival(std::size_t i, double t) const;
    /// Q(i,j,t).
    double kernel(std::size_t i, std::size_t j, double t) const;
    /// m_i.
    double mean_sojourn(std::size_t i) const;
    /// m_{i,j}; undefined (NaN) when p_ij = 0.
    double conditional_mean(std::size_t i, std::size_t j) const;
    /// L(t) from the sojourn tail in state 0: h(0,t) ~ t^{-alpha} L(t).
    /// Identically 1 for a model without heavy tails.
    double slowly_varying(double t) const;
    /// True when the exits from state 0 are heavy-tailed.
    bool heavy() const;
    /// True when every sojourn law is exponential with a rate depending
    /// only on the current state.
    bool markov() const;

private:
    StateSpace space_;
    TransitionMatrix chain_;
    SojournFamily sojourns_;
    double alpha_;
    SlowlyVarying l_;
};

/// Equilibrium quantities of the stationary process.
struct StationaryLaw
{
    Eigen::VectorXd pi;      ///< embedded-chain stationary vector
    Eigen::VectorXd nu;      ///< occupation law
    Eigen::VectorXd m;       ///< mean sojourns m_i
    Eigen::MatrixXd m_cond;  ///< m_{i,j} (NaN where p_ij = 0)
    Eigen::VectorXd eta;     ///< mean recurrence times
    double mu = 0.0;         ///< stationary mean sum_k k nu_k
};

/// Raised when the positivity hypothesis of the limit theorem fails.
class TheoremConditionError : public std::domain_error
{
public:
    using std::domain_error::domain_error;
};

enum class Strictness
{
    irreducible,        ///< embedded chain irreducible (unique pi)
    strict_positivity,  ///< additionally p_ij > 0 for every i != j
};

/// Human-readable violations; empty when the model is admissible.
std::vector<std::string> validate_model(const SemiMarkovModel& model,
                                        Strictness strictness = Strictness::irreducible);

StationaryLaw stationary_law(const SemiMarkovModel& model);

/// Expected number of visits of the embedded chain to 0 strictly before it
/// first hits `target` (at a time n >= 1), starting from `from`. The visit at
/// time 0 is not counted. States are given by label.
double expected_visits_before_hit(const SemiMarkovModel& model, int from, int target);

/// Factors of the positivity condition mu * sum_k k m_k / eta_k^2 > 0.
struct TheoremCondition
{
    bool holds = false;
    double mu = 0.0;
    double weighted_sum = 0.0;  ///< sum_k k m_k / eta_k^2
    double product = 0.0;
    std::string report;
};
TheoremCondition theorem_condition(const SemiMarkovModel& model);

/// c^2 of the fractional limit. Throws TheoremConditionError when the
/// positivity condition fails.
double limit_constant_c2(const SemiMarkovModel& model);

/// H = (3 - alpha) / 2 for alpha in (1, 2).
double hurst_from_alpha(double alpha);

/// Piecewise-constant path of one agent: state states[k] on
/// [jump_times[k], jump_times[k+1]), the last segment running to horizon.
struct Trajectory
{
    std::vector<double> jump_times;
    std::vector<int> states;
    double horizon = 0.0;

    std::size_t segments() const { return states.size(); }
    int state_at(double t) const;
};

/// Generates the segments of one agent's path lazily.
class TrajectoryStream
{
public:
    struct Segment
    {
        double start = 0.0;
        double end = 0.0;
        std::size_t state = 0;  ///< state index
    };

    /// Non-stationary start: fresh sojourn in `initial_state` (index) at time 0.
    static TrajectoryStream from_state(const SemiMarkovModel& model, std::size_t initial_state,
                                       Engine rng);
    /// Stationary start: (xi_0, xi_1, T_1) drawn from the equilibrium law.
    static TrajectoryStream stationary(const SemiMarkovModel& model, const StationaryLaw& law,
                                       Engine rng);
    /// Stationary start conditioned on xi_0 = `state` (index): (xi_1, T_1)
    /// drawn from their equilibrium law given xi_0.
    static TrajectoryStream stationary_given(const SemiMarkovModel& model, std::size_t state,
                                             Engine rng);

    Segment next();
    Engine& engine() { return rng_; }

private:
    TrajectoryStream(const SemiMarkovModel& model, Engine rng);
    std::size_t draw_next_state(std::size_t from);
    void advance_to(std::size_t state, bool equilibrium);

    const SemiMarkovModel* model_;
    Engine rng_;
    std::vector<double> cumulative_;  ///< row-wise cumulative transition probabilities
    double clock_ = 0.0;
    std::size_t current_ = 0;
    std::size_t upcoming_ = 0;
    double length_ = 0.0;
};

Trajectory sample_path(const SemiMarkovModel& model, int initial_state, double horizon,
                       Engine& rng);
Trajectory sample_stationary_path(const SemiMarkovModel& model, double horizon, Engine& rng);

/// t -> int_0^t w_s x_s ds on `grid`. Without a weight the integral is exact.
/// A weight is held constant between its own grid points (left endpoint) and
/// the product is then integrated exactly on every constant-state piece.
SamplePath integrate_trajectory(const Trajectory& traj, const Grid& grid,
                                const SamplePath* weight = nullptr);

}  // namespace inertsim
