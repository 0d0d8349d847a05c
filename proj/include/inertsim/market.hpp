#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>
#include <json.hpp>

#include "inertsim/grid.hpp"
#include "inertsim/rng.hpp"
#include "inertsim/semi_markov.hpp"

namespace inertsim {

/// Trade size process: a constant level or the diffusion
/// dPsi = drift Psi dt + volatility Psi dW started at `initial`.
struct AmplitudeModel
{
    enum class Kind
    {
        constant,
        diffusion,
    };
    Kind kind = Kind::constant;
    double level = 1.0;
    double drift = 0.0;
    double volatility = 0.0;
    double initial = 1.0;

    static AmplitudeModel constant(double level);
    static AmplitudeModel diffusion(double drift, double volatility, double initial);

    void validate() const;
    nlohmann::json to_json() const;
    static AmplitudeModel from_json(const nlohmann::json& j, const std::string& where = "amplitude");
};

/// Psi on `grid`. The diffusion is stepped in log space, which keeps it
/// positive and is exact at grid points for this linear equation.
SamplePath simulate_amplitude(const AmplitudeModel& amp, const Grid& grid, Engine& rng);

/// Normalisation applied to the centred imbalance.
enum class Scaling
{
    fractional,  ///< eps^{1-H} sqrt(N L(1/eps))
    diffusive,   ///< sqrt(eps N)
};

/// Raised when a run would exceed its work or memory budget.
class BudgetExceeded : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

struct MarketConfig
{
    explicit MarketConfig(SemiMarkovModel m) : model(std::move(m)) {}

    SemiMarkovModel model;
    std::size_t n_agents = 1;
    double epsilon = 1.0;
    AmplitudeModel amplitude;
    double horizon = 1.0;
    std::size_t steps = 1024;  ///< output grid has steps + 1 points on [0, horizon]
    std::uint64_t seed = 0;
    std::uint64_t replicate = 0;
    std::uint64_t first_agent = 0;  ///< stream index of agent 0
    Scaling scaling = Scaling::fractional;
    /// Centring constant; the exact stationary mean when unset.
    std::optional<double> centring;
    double s0 = 0.0;                 ///< initial log-price
    std::size_t threads = 1;
    double max_jumps = 2e10;         ///< work budget on the expected number of sojourns
    double memory_budget_mb = 1024;  ///< bound on accumulator memory

    void validate() const;
    /// Expected number of sojourns over all agents: N (T / eps) / sum_i pi_i m_i.
    double expected_jumps() const;
};

/// Aggregate quantities on one grid over [0, T].
struct AggregatePath
{
    Grid grid;
    std::vector<double> y;         ///< Y_t = Psi_t sum_a x^a_{t/eps}
    SamplePath x_raw;              ///< centred integrated imbalance X^{eps,N}
    SamplePath x_scaled;           ///< x_raw / scale
    SamplePath psi;                ///< amplitude
    SamplePath log_price;          ///< s0 + x_raw
    double scale = 1.0;
    double mu = 0.0;               ///< centring constant used
    double hurst = 0.5;            ///< H of the model
    double jumps = 0.0;            ///< sojourns simulated
};

/// N independent stationary agents on the clock t/eps, integrated exactly
/// against a piecewise-constant (left endpoint) Psi. Deterministic in
/// (cfg, seed, replicate) whatever the thread count: agents are processed in
/// fixed chunks and the chunk sums are combined by a fixed pairwise tree.
AggregatePath simulate_market(const MarketConfig& cfg);

/// simulate_market with diffusive scaling; requires a model without heavy tails.
AggregatePath markov_market(MarketConfig cfg);

/// Inert block of N agents (fractional scaling) plus an active block of
/// round(rho N) agents of `active_model` scaled by 1/sqrt(N eps).
struct MixedPath
{
    AggregatePath inert;
    AggregatePath active;
    SamplePath combined;
    std::size_t active_agents = 0;
};
MixedPath mixed_market(const MarketConfig& cfg, double rho, const SemiMarkovModel& active_model);

/// sigma^2 such that Var int_0^t (x_s - mu) ds ~ sigma^2 t for an
/// all-exponential model, from the deviation matrix of its generator.
double markov_diffusion_coefficient(const SemiMarkovModel& model);

}  // namespace inertsim
