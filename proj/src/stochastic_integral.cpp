#include "inertsim/stochastic_integral.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "inertsim/fbm.hpp"
#include "inertsim/stats.hpp"

namespace inertsim {
namespace {

void require_same_grid(const SamplePath& a, const SamplePath& b, const char* what)
{
    if (!(a.grid == b.grid))
        throw std::invalid_argument(std::string(what) + ": paths live on different grids");
}

// Every `stride`-th point of a path, keeping the grid.
SamplePath level_path(const SamplePath& p, std::size_t stride)
{
    return stride == 1 ? p : p.subsample(stride);
}

}  // namespace

PartitionLadder PartitionLadder::dyadic(const Grid& finest, std::size_t levels)
{
    if (levels < 1)
        throw std::invalid_argument("PartitionLadder: need at least one level");
    const std::size_t n = finest.n_points - 1;
    const std::size_t coarsest = std::size_t{1} << (levels - 1);
    if (n % coarsest != 0)
        throw std::invalid_argument("PartitionLadder: " + std::to_string(n) + " steps do not split into "
                                    + std::to_string(coarsest) + " dyadic blocks");
    PartitionLadder l;
    l.finest_ = finest;
    for (std::size_t k = 0; k < levels; ++k)
        l.strides_.push_back(coarsest >> k);
    return l;
}

void PartitionLadder::require_on_finest(const SamplePath& path, const char* what) const
{
    if (!(path.grid == finest_))
        throw std::invalid_argument(std::string(what) + ": path is not on the finest partition");
}

nlohmann::json StieltjesResult::to_json() const
{
    return {{"at_T", at_T}, {"changes", changes}, {"diagnostic", diagnostic}, {"converged", converged}};
}

SamplePath left_sum(const SamplePath& phi, const SamplePath& z, std::size_t stride)
{
    require_same_grid(phi, z, "left_sum");
    const SamplePath p = level_path(phi, stride), q = level_path(z, stride);
    std::vector<double> v(p.size(), 0.0);
    for (std::size_t i = 0; i + 1 < p.size(); ++i)
        v[i + 1] = v[i] + p.values[i] * (q.values[i + 1] - q.values[i]);
    return SamplePath(p.grid, std::move(v));
}

bool changes_converge(const std::vector<double>& changes)
{
    const std::size_t c = changes.size();
    if (c < 3)
        return false;
    if (changes[c - 1] == 0.0)
        return true;
    return changes[c - 3] >= 1.5 * 1.5 * changes[c - 1];
}

StieltjesResult stieltjes_integral(const SamplePath& phi, const SamplePath& z, const PartitionLadder& ladder)
{
    ladder.require_on_finest(phi, "stieltjes_integral");
    ladder.require_on_finest(z, "stieltjes_integral");
    StieltjesResult r;
    SamplePath prev;
    for (std::size_t k = 0; k < ladder.levels(); ++k) {
        auto s = left_sum(phi, z, ladder.stride(k));
        r.at_T.push_back(s.back());
        if (k > 0) {
            const std::size_t ratio = ladder.stride(k - 1) / ladder.stride(k);
            double sup = 0.0;
            for (std::size_t i = 0; i < prev.size(); ++i)
                sup = std::max(sup, std::abs(s.values[i * ratio] - prev.values[i]));
            r.changes.push_back(sup);
        }
        prev = std::move(s);
    }
    r.value = std::move(prev);
    if (!r.changes.empty())
        r.diagnostic = r.changes.back();
    r.converged = changes_converge(r.changes);
    return r;
}

ReplicatedConvergence replicated_convergence(const std::vector<StieltjesResult>& runs)
{
    ReplicatedConvergence rc;
    rc.replicates = runs.size();
    if (runs.empty())
        return rc;
    rc.rms_changes.assign(runs.front().changes.size(), 0.0);
    for (const auto& r : runs) {
        if (r.changes.size() != rc.rms_changes.size())
            throw std::invalid_argument("replicated_convergence: runs use different ladders");
        for (std::size_t k = 0; k < r.changes.size(); ++k)
            rc.rms_changes[k] += r.changes[k] * r.changes[k];
        rc.paths_converged += r.converged;
    }
    for (auto& v : rc.rms_changes)
        v = std::sqrt(v / static_cast<double>(runs.size()));
    rc.converged = changes_converge(rc.rms_changes);
    return rc;
}

PartsResult integration_by_parts_residual(const SamplePath& psi, const SamplePath& bh,
                                          const PartitionLadder& ladder)
{
    ladder.require_on_finest(psi, "integration_by_parts_residual");
    ladder.require_on_finest(bh, "integration_by_parts_residual");
    PartsResult r;
    for (std::size_t k = 0; k < ladder.levels(); ++k) {
        const std::size_t s = ladder.stride(k);
        const SamplePath p = level_path(psi, s), b = level_path(bh, s);
        const SamplePath b_dpsi = left_sum(b, p), psi_db = left_sum(p, b);
        std::vector<double> res(p.size());
        double sup = 0.0;
        for (std::size_t i = 0; i < p.size(); ++i) {
            res[i] = (-b_dpsi.values[i] + p.values[i] * b.values[i] - p.values[0] * b.values[0])
                     - psi_db.values[i];
            sup = std::max(sup, std::abs(res[i]));
        }
        r.sup.push_back(sup);
        if (k > 0)
            r.shrink.push_back(sup > 0.0 ? r.sup[k - 1] / sup : INFINITY);
        if (k + 1 == ladder.levels())
            r.residual = SamplePath(p.grid, std::move(res));
    }
    return r;
}

SelfIntegralResult self_integral_identity(const SamplePath& z, const PartitionLadder& ladder)
{
    ladder.require_on_finest(z, "self_integral_identity");
    if (z.front() != 0.0)
        throw std::invalid_argument("self_integral_identity: path must start at 0");
    SelfIntegralResult r;
    for (std::size_t k = 0; k < ladder.levels(); ++k) {
        const SamplePath p = level_path(z, ladder.stride(k));
        const SamplePath zdz = left_sum(p, p);
        std::vector<double> res(p.size());
        for (std::size_t i = 0; i < p.size(); ++i)
            res[i] = p.values[i] * p.values[i] - 2.0 * zdz.values[i];
        double qv = 0.0;
        for (std::size_t i = 0; i + 1 < p.size(); ++i) {
            const double d = p.values[i + 1] - p.values[i];
            qv += d * d;
        }
        r.at_T.push_back(res.back());
        r.qv.push_back(qv);
        r.identity_error = std::max(r.identity_error, std::abs(res.back() - qv) / std::max(1.0, qv));
        if (k + 1 == ladder.levels())
            r.residual = SamplePath(p.grid, std::move(res));
    }
    return r;
}

CrossVariation cross_variation(const SamplePath& z, const SamplePath& psi, const PartitionLadder& ladder)
{
    ladder.require_on_finest(z, "cross_variation");
    ladder.require_on_finest(psi, "cross_variation");
    CrossVariation r;
    for (std::size_t k = 0; k < ladder.levels(); ++k) {
        const SamplePath a = level_path(z, ladder.stride(k)), b = level_path(psi, ladder.stride(k));
        double c = 0.0, qa = 0.0, qb = 0.0;
        for (std::size_t i = 0; i + 1 < a.size(); ++i) {
            const double da = a.values[i + 1] - a.values[i], db = b.values[i + 1] - b.values[i];
            c += da * db;
            qa += da * da;
            qb += db * db;
        }
        r.cross.push_back(c);
        r.qv_z.push_back(qa);
        r.qv_psi.push_back(qb);
        // Exact in real arithmetic; allow for the rounding of the three sums.
        if (c * c > qa * qb * (1.0 + 1e-12))
            r.cauchy_schwarz = false;
    }
    return r;
}

GoodnessMoments goodness_moments(const AmplitudeModel& psi, double T, std::size_t n_paths,
                                 std::size_t steps, std::uint64_t seed)
{
    if (n_paths < 2 || steps < 1 || !(T > 0.0))
        throw std::invalid_argument("goodness_moments: need T > 0, two paths and one step");
    GoodnessMoments g;
    if (psi.kind == AmplitudeModel::Kind::constant)
        return g;
    const Grid grid(T / static_cast<double>(steps), steps + 1);
    const double s2 = psi.volatility * psi.volatility, drift = std::abs(psi.drift);
    std::vector<double> mm(n_paths), var(n_paths);
    for (std::size_t r = 0; r < n_paths; ++r) {
        Engine rng = make_stream(seed, r, 0);
        const auto p = simulate_amplitude(psi, grid, rng);
        double q = 0.0, a = 0.0;
        for (std::size_t k = 0; k + 1 < p.size(); ++k) {
            q += p.values[k] * p.values[k] * grid.step;
            a += std::abs(p.values[k]) * grid.step;
        }
        mm[r] = s2 * q;
        var[r] = drift * a;
    }
    g.mm = mean(mm);
    g.mm_se = std::sqrt(variance(mm) / static_cast<double>(n_paths));
    g.variation = mean(var);
    g.variation_se = std::sqrt(variance(var) / static_cast<double>(n_paths));
    g.finite = std::isfinite(g.mm) && std::isfinite(g.variation);
    return g;
}

double expected_bracket(const AmplitudeModel& psi, double T)
{
    if (psi.kind == AmplitudeModel::Kind::constant)
        return 0.0;
    const double s2 = psi.volatility * psi.volatility, rate = 2.0 * psi.drift + s2;
    const double integral = std::abs(rate) < 1e-14 ? T : std::expm1(rate * T) / rate;
    return s2 * psi.initial * psi.initial * integral;
}

LawDrift law_drift(const AmplitudeModel& psi, const std::vector<double>& hs, double reference_h,
                   std::size_t n_paths, std::size_t steps, double T, std::uint64_t seed)
{
    if (hs.empty() || n_paths < 2)
        throw std::invalid_argument("law_drift: need a nonempty H sequence and two paths");
    const Grid grid(T / static_cast<double>(steps), steps + 1);
    std::vector<SamplePath> psis;
    psis.reserve(n_paths);
    for (std::size_t r = 0; r < n_paths; ++r) {
        Engine rng = make_stream(seed, r, 0);
        psis.push_back(simulate_amplitude(psi, grid, rng));
    }
    const auto integrals = [&](double H) {
        const FbmGenerator gen(H, steps);
        std::vector<double> out(n_paths);
        for (std::size_t r = 0; r < n_paths; ++r) {
            Engine rng = make_stream(seed, r, 1);
            out[r] = left_sum(psis[r], gen.path(grid.step, rng)).back();
        }
        return out;
    };
    LawDrift d;
    d.hs = hs;
    d.reference_h = reference_h;
    const auto ref = integrals(reference_h);
    for (double H : hs)
        d.ks.push_back(ks_two_sample(integrals(H), ref).statistic);
    d.decreasing = true;
    for (std::size_t k = 1; k < d.ks.size(); ++k)
        if (!(d.ks[k] < d.ks[k - 1]))
            d.decreasing = false;
    return d;
}

}  // namespace inertsim
