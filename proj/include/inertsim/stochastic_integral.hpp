#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include <json.hpp>

#include "inertsim/grid.hpp"
#include "inertsim/market.hpp"

namespace inertsim {

/// Refining partitions of [0, T] obtained by subsampling a finest grid.
/// Level k uses every strides[k]-th point; levels run from coarse to fine.
class PartitionLadder
{
public:
    /// `levels` dyadic levels ending at the finest grid (stride 1).
    static PartitionLadder dyadic(const Grid& finest, std::size_t levels);

    const Grid& finest() const { return finest_; }
    std::size_t levels() const { return strides_.size(); }
    std::size_t stride(std::size_t level) const { return strides_.at(level); }
    double mesh(std::size_t level) const { return finest_.step * static_cast<double>(stride(level)); }
    /// Throws unless `path` lives on the finest grid.
    void require_on_finest(const SamplePath& path, const char* what) const;

private:
    Grid finest_;
    std::vector<std::size_t> strides_;
};

/// Left-endpoint sums per level.
struct StieltjesResult
{
    SamplePath value;             ///< t -> sum phi(tau_i) (z(tau_{i+1}) - z(tau_i)) at the finest level
    std::vector<double> at_T;     ///< value at T per level
    /// sup over the coarser partition of |I_k - I_{k-1}|, k >= 1.
    std::vector<double> changes;
    double diagnostic = 0.0;      ///< the last change
    /// The last three changes shrink by at least 1.5 per level on average:
    /// changes[c-3] / changes[c-1] >= 1.5^2. Needs four levels.
    bool converged = false;

    nlohmann::json to_json() const;
};
StieltjesResult stieltjes_integral(const SamplePath& phi, const SamplePath& z, const PartitionLadder& ladder);

/// Shrink rule applied to a sequence of level-to-level changes.
bool changes_converge(const std::vector<double>& changes);

/// Convergence over independent replicates: the root-mean-square change per
/// level across replicates must pass the shrink rule.
struct ReplicatedConvergence
{
    std::vector<double> rms_changes;
    std::size_t paths_converged = 0;
    std::size_t replicates = 0;
    bool converged = false;
};
ReplicatedConvergence replicated_convergence(const std::vector<StieltjesResult>& runs);

/// Left-endpoint sum of phi dz on the grid of the paths.
SamplePath left_sum(const SamplePath& phi, const SamplePath& z, std::size_t stride = 1);

/// residual(t) = [-int_0^t B dPsi + Psi_t B_t - Psi_0 B_0] - int_0^t Psi dB, all
/// integrals as left-endpoint sums, per level.
struct PartsResult
{
    SamplePath residual;         ///< at the finest level
    std::vector<double> sup;     ///< sup-norm per level
    std::vector<double> shrink;  ///< sup[k-1] / sup[k]
};
PartsResult integration_by_parts_residual(const SamplePath& psi, const SamplePath& bh,
                                          const PartitionLadder& ladder);

/// z(t)^2 - 2 sum z dz, which equals the discrete quadratic variation.
struct SelfIntegralResult
{
    SamplePath residual;            ///< at the finest level
    std::vector<double> at_T;       ///< residual at T per level
    std::vector<double> qv;         ///< sum (dz)^2 per level
    double identity_error = 0.0;    ///< max over levels of |at_T - qv| / max(1, qv)
};
SelfIntegralResult self_integral_identity(const SamplePath& z, const PartitionLadder& ladder);

/// Discrete cross variation sum dz dpsi per level with the Cauchy-Schwarz check.
struct CrossVariation
{
    std::vector<double> cross;
    std::vector<double> qv_z;
    std::vector<double> qv_psi;
    bool cauchy_schwarz = true;  ///< cross^2 <= qv_z qv_psi on every level
};
CrossVariation cross_variation(const SamplePath& z, const SamplePath& psi, const PartitionLadder& ladder);

/// Monte Carlo estimates of E[M,M]_T and E|A|_T for the decomposition of Psi
/// into its martingale and drift parts.
struct GoodnessMoments
{
    double mm = 0.0;
    double mm_se = 0.0;
    double variation = 0.0;
    double variation_se = 0.0;
    bool finite = true;
};
GoodnessMoments goodness_moments(const AmplitudeModel& psi, double T, std::size_t n_paths,
                                 std::size_t steps, std::uint64_t seed);
/// Closed form sigma^2 Psi_0^2 int_0^T e^{(2 drift + sigma^2) t} dt.
double expected_bracket(const AmplitudeModel& psi, double T);

/// Law of int_0^T Psi dB^{H_n} for a sequence H_n against the reference H.
/// Every H uses the same Psi paths and the same Gaussian draws (common
/// random numbers), so the distance reflects the change of H alone.
struct LawDrift
{
    std::vector<double> hs;
    std::vector<double> ks;    ///< two-sample KS distance to the reference sample
    double reference_h = 0.0;
    bool decreasing = false;   ///< ks strictly decreasing along hs
};
LawDrift law_drift(const AmplitudeModel& psi, const std::vector<double>& hs, double reference_h,
                   std::size_t n_paths, std::size_t steps, double T, std::uint64_t seed);

}  // namespace inertsim
