#include "inertsim/distributions.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <stdexcept>

#include <boost/math/quadrature/exp_sinh.hpp>

#include "inertsim/semi_markov.hpp"

namespace inertsim {
namespace {

template <class... Ts>
struct Overloaded : Ts...
{
    using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

double log_factor(double t) { return std::log(std::numbers::e + t); }

double log_pareto_tail(const Pareto& p, double t)
{
    if (t <= p.scale)
        return 1.0;
    return std::pow(t / p.scale, -p.alpha) * log_factor(t) / log_factor(p.scale);
}

// Integral of the log-Pareto tail over [t, inf) for t >= scale.
double log_pareto_upper_integral(const Pareto& p, double t)
{
    boost::math::quadrature::exp_sinh<double> integrator;
    // Substitute s = t * e^u so the integrand decays like e^{(1-alpha)u}.
    // Evaluated in log space: s overflows long before the integrand vanishes.
    const double base = t * std::pow(t / p.scale, -p.alpha) / log_factor(p.scale);
    auto f = [&](double u) {
        const double lf = u < 30.0 ? log_factor(t * std::exp(u))
                                   : std::log(t) + u + std::log1p(std::numbers::e * std::exp(-u) / t);
        return base * std::exp((1.0 - p.alpha) * u) * lf;
    };
    return integrator.integrate(f, 0.0, std::numeric_limits<double>::infinity());
}

// Smallest t with g(t) <= target for a nonincreasing g, on [lo, inf).
template <class F>
double invert_decreasing(F g, double target, double lo)
{
    double hi = std::max(2.0 * lo, 1.0);
    while (g(hi) > target)
        hi *= 2.0;
    while (hi - lo > 1e-10 * std::max(1.0, hi)) {
        const double mid = 0.5 * (lo + hi);
        (g(mid) > target ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

void require(bool cond, const std::string& msg)
{
    if (!cond)
        throw std::invalid_argument(msg);
}

}  // namespace

SojournLaw::SojournLaw(Family family) : family_(family)
{
    mean_ = std::visit(
        Overloaded{
            [](const Pareto& p) {
                require(p.scale > 0.0, "pareto: scale must be positive");
                require(p.alpha > 1.0, "pareto: alpha must exceed 1 for a finite mean");
                if (p.l == SlowlyVarying::constant)
                    return p.scale * p.alpha / (p.alpha - 1.0);
                return p.scale + log_pareto_upper_integral(p, p.scale);
            },
            [](const Exponential& e) {
                require(e.rate > 0.0, "exponential: rate must be positive");
                return 1.0 / e.rate;
            },
            [](const Uniform& u) {
                require(u.lower >= 0.0 && u.upper > u.lower,
                        "uniform: need 0 <= lower < upper");
                return 0.5 * (u.lower + u.upper);
            },
        },
        family_);
}

SojournLaw SojournLaw::pareto(double scale, double alpha, SlowlyVarying l)
{
    return SojournLaw(Pareto{scale, alpha, l});
}
SojournLaw SojournLaw::exponential(double rate) { return SojournLaw(Exponential{rate}); }
SojournLaw SojournLaw::uniform(double lower, double upper) { return SojournLaw(Uniform{lower, upper}); }

std::string SojournLaw::name() const
{
    return std::visit(Overloaded{
                          [](const Pareto& p) {
                              return std::string(p.l == SlowlyVarying::constant ? "pareto"
                                                                                : "pareto-log");
                          },
                          [](const Exponential&) { return std::string("exponential"); },
                          [](const Uniform&) { return std::string("uniform"); },
                      },
                      family_);
}

double SojournLaw::tail_index() const
{
    if (const auto* p = std::get_if<Pareto>(&family_))
        return p->alpha;
    return std::numeric_limits<double>::infinity();
}

double SojournLaw::slowly_varying(double t) const
{
    const auto* p = std::get_if<Pareto>(&family_);
    if (!p)
        throw std::logic_error("slowly_varying: only defined for heavy-tailed laws");
    const double base = std::pow(p->scale, p->alpha);
    if (p->l == SlowlyVarying::constant)
        return base;
    return base * log_factor(t) / log_factor(p->scale);
}

double SojournLaw::tail(double t) const
{
    if (t <= 0.0)
        return 1.0;
    return std::visit(Overloaded{
                          [t](const Pareto& p) {
                              if (p.l == SlowlyVarying::logarithmic)
                                  return log_pareto_tail(p, t);
                              return t <= p.scale ? 1.0 : std::pow(t / p.scale, -p.alpha);
                          },
                          [t](const Exponential& e) { return std::exp(-e.rate * t); },
                          [t](const Uniform& u) {
                              if (t <= u.lower)
                                  return 1.0;
                              if (t >= u.upper)
                                  return 0.0;
                              return (u.upper - t) / (u.upper - u.lower);
                          },
                      },
                      family_);
}

double SojournLaw::density(double t) const
{
    if (t < 0.0)
        return 0.0;
    return std::visit(
        Overloaded{
            [t](const Pareto& p) {
                if (t < p.scale)
                    return 0.0;
                const double power = std::pow(t / p.scale, -p.alpha);
                if (p.l == SlowlyVarying::constant)
                    return p.alpha * power / t;
                return power / log_factor(p.scale)
                       * (p.alpha * log_factor(t) / t - 1.0 / (std::numbers::e + t));
            },
            [t](const Exponential& e) { return e.rate * std::exp(-e.rate * t); },
            [t](const Uniform& u) {
                return (t >= u.lower && t <= u.upper) ? 1.0 / (u.upper - u.lower) : 0.0;
            },
        },
        family_);
}

double SojournLaw::integrated_tail(double t) const
{
    if (t < 0.0)
        return mean_ - t;
    return std::visit(
        Overloaded{
            [t](const Pareto& p) {
                if (p.l == SlowlyVarying::logarithmic) {
                    if (t <= p.scale)
                        return (p.scale - t) + log_pareto_upper_integral(p, p.scale);
                    return log_pareto_upper_integral(p, t);
                }
                if (t <= p.scale)
                    return (p.scale - t) + p.scale / (p.alpha - 1.0);
                return p.scale / (p.alpha - 1.0) * std::pow(t / p.scale, 1.0 - p.alpha);
            },
            [t](const Exponential& e) { return std::exp(-e.rate * t) / e.rate; },
            [t](const Uniform& u) {
                const double w = u.upper - u.lower;
                if (t <= u.lower)
                    return (u.lower - t) + 0.5 * w;
                if (t >= u.upper)
                    return 0.0;
                return (u.upper - t) * (u.upper - t) / (2.0 * w);
            },
        },
        family_);
}

double SojournLaw::quantile(double p) const
{
    if (!(p > 0.0 && p < 1.0))
        throw std::invalid_argument("quantile: p must lie in (0,1)");
    const double q = 1.0 - p;
    return std::visit(
        Overloaded{
            [&](const Pareto& par) {
                if (par.l == SlowlyVarying::constant)
                    return par.scale * std::pow(q, -1.0 / par.alpha);
                return invert_decreasing([&](double t) { return log_pareto_tail(par, t); }, q,
                                         par.scale);
            },
            [&](const Exponential& e) { return -std::log1p(-p) / e.rate; },
            [&](const Uniform& u) { return u.lower + p * (u.upper - u.lower); },
        },
        family_);
}

double SojournLaw::equilibrium_quantile(double p) const
{
    if (!(p > 0.0 && p < 1.0))
        throw std::invalid_argument("equilibrium_quantile: p must lie in (0,1)");
    const double target = (1.0 - p) * mean_;  // integrated tail at the answer
    return std::visit(
        Overloaded{
            [&](const Pareto& par) {
                if (par.l == SlowlyVarying::constant) {
                    if (p * mean_ <= par.scale)
                        return p * mean_;
                    return par.scale * std::pow((1.0 - p) * par.alpha, -1.0 / (par.alpha - 1.0));
                }
                if (p * mean_ <= par.scale)
                    return p * mean_;
                return invert_decreasing([&](double t) { return integrated_tail(t); }, target,
                                         par.scale);
            },
            [&](const Exponential& e) { return -std::log1p(-p) / e.rate; },
            [&](const Uniform& u) {
                const double w = u.upper - u.lower;
                if (target >= 0.5 * w)
                    return u.lower + 0.5 * w - target;
                return u.upper - std::sqrt(2.0 * w * target);
            },
        },
        family_);
}

double SojournLaw::sample(Engine& rng) const
{
    const double u = uniform_open(rng);
    if (const auto* par = std::get_if<Pareto>(&family_);
        par && par->l == SlowlyVarying::constant)
        return par->scale * std::pow(u, -1.0 / par->alpha);
    if (const auto* e = std::get_if<Exponential>(&family_))
        return -std::log(u) / e->rate;
    return quantile(u);
}

double SojournLaw::equilibrium_sample(Engine& rng) const
{
    return equilibrium_quantile(uniform_open(rng));
}

double SojournLaw::lattice_mean(double dt) const
{
    if (!(dt > 0.0))
        throw std::invalid_argument("lattice_mean: dt must be positive");
    if (const auto* e = std::get_if<Exponential>(&family_))
        return dt / (-std::expm1(-e->rate * dt));
    if (const auto* u = std::get_if<Uniform>(&family_)) {
        double sum = 0.0;
        for (std::size_t r = 0; static_cast<double>(r) * dt < u->upper; ++r)
            sum += tail(static_cast<double>(r) * dt);
        return dt * sum;
    }
    // Heavy tail: exact head, Euler-Maclaurin remainder.
    const auto& par = std::get<Pareto>(family_);
    const auto r0 = static_cast<std::size_t>(std::ceil(par.scale / dt - 1e-12));
    const std::size_t r1 = r0 + 4096;
    double sum = static_cast<double>(r0);
    for (std::size_t r = r0; r < r1; ++r)
        sum += tail(static_cast<double>(r) * dt);
    const double t1 = static_cast<double>(r1) * dt;
    sum += integrated_tail(t1) / dt + 0.5 * tail(t1) + dt * density(t1) / 12.0;
    return dt * sum;
}

nlohmann::json SojournLaw::to_json() const
{
    return std::visit(Overloaded{
                          [](const Pareto& p) {
                              nlohmann::json j{{"family", "pareto"},
                                               {"scale", p.scale},
                                               {"alpha", p.alpha}};
                              if (p.l == SlowlyVarying::logarithmic)
                                  j["slowly_varying"] = "log";
                              return j;
                          },
                          [](const Exponential& e) {
                              return nlohmann::json{{"family", "exponential"}, {"rate", e.rate}};
                          },
                          [](const Uniform& u) {
                              return nlohmann::json{
                                  {"family", "uniform"}, {"lower", u.lower}, {"upper", u.upper}};
                          },
                      },
                      family_);
}

SojournLaw SojournLaw::from_json(const nlohmann::json& j, const std::string& where)
{
    if (!j.is_object())
        throw std::invalid_argument(where + ": expected an object");
    auto number = [&](const char* key, std::optional<double> fallback = std::nullopt) {
        if (!j.contains(key)) {
            if (fallback)
                return *fallback;
            throw std::invalid_argument(where + "." + key + ": missing");
        }
        if (!j.at(key).is_number())
            throw std::invalid_argument(where + "." + key + ": expected a number");
        return j.at(key).get<double>();
    };
    if (!j.contains("family") || !j.at("family").is_string())
        throw std::invalid_argument(where + ".family: missing or not a string");
    const auto family = j.at("family").get<std::string>();
    try {
        if (family == "pareto") {
            auto l = SlowlyVarying::constant;
            if (j.contains("slowly_varying")) {
                const auto s = j.at("slowly_varying").get<std::string>();
                if (s == "log")
                    l = SlowlyVarying::logarithmic;
                else if (s != "constant")
                    throw std::invalid_argument("slowly_varying: expected 'constant' or 'log'");
            }
            return pareto(number("scale", 1.0), number("alpha"), l);
        }
        if (family == "exponential") {
            if (j.contains("mean"))
                return exponential(1.0 / number("mean"));
            return exponential(number("rate"));
        }
        if (family == "uniform")
            return uniform(number("lower"), number("upper"));
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument(where + ": " + e.what());
    } catch (const std::invalid_argument& e) {
        const std::string msg = e.what();
        if (msg.rfind(where, 0) == 0)
            throw;
        throw std::invalid_argument(where + ": " + msg);
    }
    throw std::invalid_argument(where + ".family: unknown family '" + family + "'");
}

TailReport check_tail_assumptions(const SemiMarkovModel& model)
{
    TailReport report;
    const double alpha = model.alpha();
    const std::vector<double> ladder{10.0, 1e2, 1e3, 1e4};
    const auto& states = model.space().states();
    for (std::size_t i = 0; i < states.size(); ++i) {
        if (states[i] == 0)
            continue;
        TailReport::Row row;
        row.state = states[i];
        row.horizons = ladder;
        for (double t : ladder) {
            const double reference = std::pow(t, -(alpha + 1.0)) * model.slowly_varying(t);
            row.ratios.push_back(model.survival(i, t) / reference);
        }
        row.decreasing = true;
        for (std::size_t k = 1; k < row.ratios.size(); ++k) {
            const bool vanished = row.ratios[k] == 0.0 && row.ratios[k - 1] == 0.0;
            if (!vanished && !(row.ratios[k] < row.ratios[k - 1]))
                row.decreasing = false;
        }
        if (!row.decreasing) {
            report.ok = false;
            report.violations.push_back(
                "state " + std::to_string(row.state)
                + ": active sojourn tail is not o(t^{-(alpha+1)} L(t))");
        }
        report.rows.push_back(std::move(row));
    }
    return report;
}

}  // namespace inertsim
