#include "inertsim/market.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <thread>

namespace inertsim {
namespace {

constexpr std::uint64_t amplitude_stream = std::numeric_limits<std::uint64_t>::max();

double require_number(const nlohmann::json& j, const std::string& key, const std::string& where)
{
    if (!j.contains(key) || !j.at(key).is_number())
        throw std::invalid_argument(where + "." + key + ": expected a number");
    return j.at(key).get<double>();
}

// Occupation integrals of one chunk of agents.
struct ChunkSums
{
    std::vector<double> cell;   ///< sum_a int_{cell k} x^a (macro time)
    std::vector<double> point;  ///< sum_a x^a at grid point k
    double jumps = 0.0;

    void add(const ChunkSums& o)
    {
        for (std::size_t k = 0; k < cell.size(); ++k)
            cell[k] += o.cell[k];
        for (std::size_t k = 0; k < point.size(); ++k)
            point[k] += o.point[k];
        jumps += o.jumps;
    }
};

ChunkSums run_chunk(const MarketConfig& cfg, const StationaryLaw& law, const Grid& grid,
                    std::size_t first, std::size_t last)
{
    const std::size_t cells = grid.n_points - 1;
    const double dt = grid.step, T = grid.horizon(), eps = cfg.epsilon;
    ChunkSums out;
    out.cell.assign(cells, 0.0);
    out.point.assign(grid.n_points, 0.0);
    // Difference arrays for whole cells and for grid points covered by a segment.
    std::vector<double> full(cells + 1, 0.0), pts(grid.n_points + 1, 0.0);
    const auto& space = cfg.model.space();

    for (std::size_t a = first; a < last; ++a) {
        auto stream = TrajectoryStream::stationary(
            cfg.model, law, make_stream(cfg.seed, cfg.replicate, cfg.first_agent + a));
        while (true) {
            const auto seg = stream.next();
            out.jumps += 1.0;
            const double lo = eps * seg.start;
            if (lo >= T)
                break;
            const double hi = std::min(eps * seg.end, T);
            const double v = space.label(seg.state);
            if (v != 0.0 && hi > lo) {
                const std::size_t ka = std::min(static_cast<std::size_t>(lo / dt), cells - 1);
                const std::size_t kb = std::min(static_cast<std::size_t>(hi / dt), cells);
                if (ka == kb) {
                    out.cell[ka] += v * (hi - lo);
                } else {
                    out.cell[ka] += v * (grid.time(ka + 1) - lo);
                    full[ka + 1] += v * dt;
                    full[kb] -= v * dt;
                    if (kb < cells)
                        out.cell[kb] += v * (hi - grid.time(kb));
                }
                // Grid points t_k with lo <= t_k < hi (and T itself for the last segment).
                std::size_t p0 = static_cast<std::size_t>(std::ceil(lo / dt));
                if (p0 > 0 && grid.time(p0 - 1) >= lo)
                    --p0;
                std::size_t p1 = std::min(static_cast<std::size_t>(std::ceil(hi / dt)), grid.n_points);
                if (hi >= T)
                    p1 = grid.n_points;
                if (p1 > p0) {
                    pts[p0] += v;
                    pts[p1] -= v;
                }
            }
            if (eps * seg.end >= T)
                break;
        }
    }
    double run = 0.0;
    for (std::size_t k = 0; k < cells; ++k) {
        run += full[k];
        out.cell[k] += run;
    }
    run = 0.0;
    for (std::size_t k = 0; k < grid.n_points; ++k) {
        run += pts[k];
        out.point[k] += run;
    }
    return out;
}

std::size_t chunk_size(std::size_t n_agents)
{
    return std::max<std::size_t>(16, (n_agents + 255) / 256);
}

double mean_time_per_jump(const StationaryLaw& law)
{
    return law.pi.dot(law.m);
}

}  // namespace

AmplitudeModel AmplitudeModel::constant(double level)
{
    AmplitudeModel a;
    a.kind = Kind::constant;
    a.level = level;
    a.validate();
    return a;
}

AmplitudeModel AmplitudeModel::diffusion(double drift, double volatility, double initial)
{
    AmplitudeModel a;
    a.kind = Kind::diffusion;
    a.drift = drift;
    a.volatility = volatility;
    a.initial = initial;
    a.validate();
    return a;
}

void AmplitudeModel::validate() const
{
    if (kind == Kind::constant) {
        if (!std::isfinite(level))
            throw std::invalid_argument("amplitude.level must be finite");
        return;
    }
    if (!std::isfinite(drift))
        throw std::invalid_argument("amplitude.drift must be finite");
    if (!(volatility >= 0.0) || !std::isfinite(volatility))
        throw std::invalid_argument("amplitude.volatility must be finite and nonnegative");
    if (!(initial > 0.0) || !std::isfinite(initial))
        throw std::invalid_argument("amplitude.initial must be positive");
}

nlohmann::json AmplitudeModel::to_json() const
{
    if (kind == Kind::constant)
        return {{"kind", "constant"}, {"level", level}};
    return {{"kind", "diffusion"}, {"drift", drift}, {"volatility", volatility}, {"initial", initial}};
}

AmplitudeModel AmplitudeModel::from_json(const nlohmann::json& j, const std::string& where)
{
    if (!j.is_object() || !j.contains("kind") || !j.at("kind").is_string())
        throw std::invalid_argument(where + ".kind: expected \"constant\" or \"diffusion\"");
    const auto kind = j.at("kind").get<std::string>();
    try {
        if (kind == "constant")
            return constant(require_number(j, "level", where));
        if (kind == "diffusion")
            return diffusion(require_number(j, "drift", where), require_number(j, "volatility", where),
                             require_number(j, "initial", where));
    } catch (const std::invalid_argument& e) {
        const std::string msg = e.what();
        throw std::invalid_argument(msg.rfind(where, 0) == 0 ? msg : where + ": " + msg);
    }
    throw std::invalid_argument(where + ".kind: unknown kind \"" + kind + "\"");
}

SamplePath simulate_amplitude(const AmplitudeModel& amp, const Grid& grid, Engine& rng)
{
    amp.validate();
    std::vector<double> v(grid.n_points, amp.level);
    if (amp.kind == AmplitudeModel::Kind::diffusion) {
        const double dt = grid.step, sd = amp.volatility * std::sqrt(dt);
        const double shift = (amp.drift - 0.5 * amp.volatility * amp.volatility) * dt;
        double log_psi = std::log(amp.initial);
        v[0] = amp.initial;
        for (std::size_t k = 1; k < grid.n_points; ++k) {
            log_psi += shift + (sd > 0.0 ? sd * standard_normal(rng) : 0.0);
            v[k] = std::exp(log_psi);
        }
    }
    return SamplePath(grid, std::move(v));
}

void MarketConfig::validate() const
{
    if (n_agents < 1)
        throw std::invalid_argument("market.n_agents must be at least 1");
    if (!(epsilon > 0.0) || !std::isfinite(epsilon))
        throw std::invalid_argument("market.epsilon must be positive");
    if (!(horizon > 0.0) || !std::isfinite(horizon))
        throw std::invalid_argument("market.horizon must be positive");
    if (steps < 1)
        throw std::invalid_argument("market.steps must be at least 1");
    amplitude.validate();
}

double MarketConfig::expected_jumps() const
{
    const auto law = stationary_law(model);
    return static_cast<double>(n_agents) * (horizon / epsilon) / mean_time_per_jump(law);
}

AggregatePath simulate_market(const MarketConfig& cfg)
{
    cfg.validate();
    const StationaryLaw law = stationary_law(cfg.model);
    const Grid grid(cfg.horizon / static_cast<double>(cfg.steps), cfg.steps + 1);

    const double jumps = static_cast<double>(cfg.n_agents) * (cfg.horizon / cfg.epsilon)
                         / mean_time_per_jump(law);
    if (jumps > cfg.max_jumps)
        throw BudgetExceeded("market: about " + std::to_string(jumps) + " sojourns exceed the budget of "
                             + std::to_string(cfg.max_jumps));
    const std::size_t csize = chunk_size(cfg.n_agents);
    const std::size_t chunks = (cfg.n_agents + csize - 1) / csize;
    const double mb = static_cast<double>(chunks + 1) * 4.0 * static_cast<double>(grid.n_points)
                      * sizeof(double) / (1024.0 * 1024.0);
    if (mb > cfg.memory_budget_mb)
        throw BudgetExceeded("market: accumulators need " + std::to_string(mb) + " MB, budget is "
                             + std::to_string(cfg.memory_budget_mb) + " MB");

    std::vector<ChunkSums> sums(chunks);
    std::atomic<std::size_t> next{0};
    const auto worker = [&] {
        for (std::size_t c = next++; c < chunks; c = next++)
            sums[c] = run_chunk(cfg, law, grid, c * csize, std::min(cfg.n_agents, (c + 1) * csize));
    };
    std::size_t threads = cfg.threads == 0 ? std::thread::hardware_concurrency() : cfg.threads;
    threads = std::clamp<std::size_t>(threads, 1, chunks);
    std::vector<std::thread> pool;
    for (std::size_t t = 1; t < threads; ++t)
        pool.emplace_back(worker);
    worker();
    for (auto& t : pool)
        t.join();
    // Fixed pairwise tree: the rounding does not depend on the thread count.
    for (std::size_t width = 1; width < chunks; width *= 2)
        for (std::size_t c = 0; c + width < chunks; c += 2 * width)
            sums[c].add(sums[c + width]);
    const ChunkSums& total = sums[0];

    Engine amp_rng = make_stream(cfg.seed, cfg.replicate, amplitude_stream);
    AggregatePath out;
    out.grid = grid;
    out.psi = simulate_amplitude(cfg.amplitude, grid, amp_rng);
    out.mu = cfg.centring.value_or(law.mu);
    out.hurst = cfg.model.hurst();
    out.jumps = total.jumps;

    const double n = static_cast<double>(cfg.n_agents);
    std::vector<double> x(grid.n_points, 0.0);
    for (std::size_t k = 0; k + 1 < grid.n_points; ++k)
        x[k + 1] = x[k] + out.psi.values[k] * (total.cell[k] - n * out.mu * grid.step);
    out.y.resize(grid.n_points);
    for (std::size_t k = 0; k < grid.n_points; ++k)
        out.y[k] = out.psi.values[k] * total.point[k];

    if (cfg.scaling == Scaling::fractional) {
        const double H = out.hurst;
        out.scale = std::pow(cfg.epsilon, 1.0 - H)
                    * std::sqrt(n * cfg.model.slowly_varying(1.0 / cfg.epsilon));
    } else {
        out.scale = std::sqrt(cfg.epsilon * n);
    }
    out.x_raw = SamplePath(grid, x);
    std::vector<double> price(x);
    for (auto& p : price)
        p += cfg.s0;
    out.log_price = SamplePath(grid, std::move(price));
    for (auto& v : x)
        v /= out.scale;
    out.x_scaled = SamplePath(grid, std::move(x));
    return out;
}

AggregatePath markov_market(MarketConfig cfg)
{
    if (cfg.model.heavy())
        throw std::invalid_argument("markov_market: the model has heavy-tailed sojourns");
    cfg.scaling = Scaling::diffusive;
    return simulate_market(cfg);
}

MixedPath mixed_market(const MarketConfig& cfg, double rho, const SemiMarkovModel& active_model)
{
    if (!(rho >= 0.0) || !std::isfinite(rho))
        throw std::invalid_argument("mixed_market: rho must be finite and nonnegative");
    if (cfg.amplitude.kind != AmplitudeModel::Kind::constant || cfg.amplitude.level != 1.0)
        throw std::invalid_argument("mixed_market: requires a constant amplitude equal to 1");
    if (active_model.heavy())
        throw std::invalid_argument("mixed_market: the active model must not be heavy-tailed");

    MixedPath out;
    MarketConfig inert = cfg;
    inert.scaling = Scaling::fractional;
    out.inert = simulate_market(inert);
    out.active_agents = static_cast<std::size_t>(std::llround(rho * static_cast<double>(cfg.n_agents)));

    const double scale = std::sqrt(static_cast<double>(cfg.n_agents) * cfg.epsilon);
    if (out.active_agents == 0) {
        const Grid& g = out.inert.grid;
        out.active.grid = g;
        out.active.y.assign(g.n_points, 0.0);
        out.active.x_raw = SamplePath(g, std::vector<double>(g.n_points, 0.0));
        out.active.x_scaled = out.active.x_raw;
        out.active.psi = out.inert.psi;
        out.active.log_price = out.active.x_raw;
        out.active.scale = scale;
    } else {
        MarketConfig active(active_model);
        active.n_agents = out.active_agents;
        active.epsilon = cfg.epsilon;
        active.amplitude = cfg.amplitude;
        active.horizon = cfg.horizon;
        active.steps = cfg.steps;
        active.seed = cfg.seed;
        active.replicate = cfg.replicate;
        // Disjoint streams from the inert block.
        active.first_agent = cfg.first_agent + (std::uint64_t{1} << 40);
        active.threads = cfg.threads;
        active.max_jumps = cfg.max_jumps;
        active.memory_budget_mb = cfg.memory_budget_mb;
        active.scaling = Scaling::diffusive;
        out.active = simulate_market(active);
        std::vector<double> v = out.active.x_raw.values;
        for (auto& x : v)
            x /= scale;
        out.active.x_scaled = SamplePath(out.active.grid, std::move(v));
        out.active.scale = scale;
    }
    out.combined = out.inert.x_scaled + out.active.x_scaled;
    return out;
}

double markov_diffusion_coefficient(const SemiMarkovModel& model)
{
    if (!model.markov())
        throw std::invalid_argument("markov_diffusion_coefficient: model is not Markov");
    const std::size_t n = model.size();
    const auto law = stationary_law(model);
    Eigen::MatrixXd Q = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
        const double rate = 1.0 / model.mean_sojourn(i);
        for (std::size_t j = 0; j < n; ++j)
            if (j != i)
                Q(i, j) = rate * model.chain()(i, j);
        Q(i, i) = -rate * (1.0 - model.chain()(i, i));
    }
    const Eigen::MatrixXd Pi = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(n)) * law.nu.transpose();
    // Deviation matrix D = int_0^inf (P_t - Pi) dt = (Pi - Q)^{-1} - Pi.
    const Eigen::MatrixXd D = (Pi - Q).fullPivLu().inverse() - Pi;
    Eigen::VectorXd f(n);
    for (std::size_t i = 0; i < n; ++i)
        f(i) = model.space().label(i) - law.mu;
    double s = 0.0;
    const Eigen::VectorXd Df = D * f;
    for (std::size_t i = 0; i < n; ++i)
        s += law.nu(i) * f(i) * Df(i);
    return 2.0 * s;
}

}  // namespace inertsim
