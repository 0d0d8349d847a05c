#pragma once

#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "inertsim/rng.hpp"

namespace inertsim {

class SemiMarkovModel;

/// Choice of the slowly varying factor L(t) in a heavy tail t^{-alpha} L(t).
enum class SlowlyVarying
{
    constant,     ///< pure Pareto, L(t) = x_m^alpha
    logarithmic,  ///< L(t) proportional to log(e + t)
};

/// Pareto law on [scale, inf) with tail (t/scale)^{-alpha}, optionally
/// multiplied by log(e+t)/log(e+scale).
struct Pareto
{
    double scale = 1.0;
    double alpha = 1.5;
    SlowlyVarying l = SlowlyVarying::constant;
};

struct Exponential
{
    double rate = 1.0;
};

/// Uniform on [lower, upper], 0 <= lower < upper.
struct Uniform
{
    double lower = 0.0;
    double upper = 1.0;
};

/// Distribution of one sojourn time. All members are exact closed forms
/// except for the logarithmic Pareto variant, which integrates its tail
/// numerically.
class SojournLaw
{
public:
    using Family = std::variant<Pareto, Exponential, Uniform>;

    SojournLaw() : SojournLaw(Exponential{}) {}
    explicit SojournLaw(Family family);

    static SojournLaw pareto(double scale, double alpha,
                             SlowlyVarying l = SlowlyVarying::constant);
    static SojournLaw exponential(double rate);
    static SojournLaw uniform(double lower, double upper);

    const Family& family() const { return family_; }
    std::string name() const;

    bool heavy() const { return std::holds_alternative<Pareto>(family_); }
    /// Tail index alpha for heavy laws, +inf otherwise.
    double tail_index() const;
    /// L(t) such that tail(t) = t^{-alpha} L(t) at large t. Heavy laws only.
    double slowly_varying(double t) const;

    /// P{X >= t}.
    double tail(double t) const;
    double cdf(double t) const { return 1.0 - tail(t); }
    double density(double t) const;
    double mean() const { return mean_; }
    /// Integral of the tail over [t, inf).
    double integrated_tail(double t) const;

    /// Inverse CDF.
    double quantile(double p) const;
    /// Inverse of the equilibrium (integrated-tail) CDF with density tail(t)/mean.
    double equilibrium_quantile(double p) const;
    double equilibrium_cdf(double t) const { return 1.0 - integrated_tail(t) / mean_; }

    double sample(Engine& rng) const;
    double equilibrium_sample(Engine& rng) const;

    /// Mean of the sojourn rounded up to the lattice dt*N, that is
    /// dt * sum_{r >= 0} tail(r dt).
    double lattice_mean(double dt) const;

    nlohmann::json to_json() const;
    /// Parses {"family": ..., params}; throws std::invalid_argument naming the field.
    static SojournLaw from_json(const nlohmann::json& j, const std::string& where = "law");

private:
    Family family_;
    double mean_ = 0.0;
};

/// Diagnostic for the requirement that active-state tails are
/// o(t^{-(alpha+1)} L(t)).
struct TailReport
{
    struct Row
    {
        int state = 0;
        std::vector<double> horizons;
        std::vector<double> ratios;
        bool decreasing = false;
    };
    std::vector<Row> rows;
    bool ok = true;
    std::vector<std::string> violations;
};

/// Ratios tail_i(t) / (t^{-(alpha+1)} L(t)) for every active state i on the
/// ladder t in {10, 1e2, 1e3, 1e4}. A state is flagged unless its ratios
/// strictly decrease (or vanish) along the ladder.
TailReport check_tail_assumptions(const SemiMarkovModel& model);

}  // namespace inertsim
