#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include <json.hpp>

#include "inertsim/grid.hpp"
#include "inertsim/rng.hpp"

namespace inertsim {

/// Autocovariance of unit-variance fractional Gaussian noise at lag k.
double fgn_autocovariance(double H, long long k);

/// Exact fBm sampler on n steps, reusable across paths. Uses circulant
/// embedding and falls back to a Cholesky factor when the embedding has a
/// negative eigenvalue.
class FbmGenerator
{
public:
    FbmGenerator(double H, std::size_t n);

    double hurst() const { return H_; }
    std::size_t steps() const { return n_; }
    bool uses_cholesky() const { return !chol_.empty(); }

    /// Unit-variance fGn increments (length n).
    std::vector<double> noise(Engine& rng) const;
    /// B^H on the grid k * dt, k = 0 .. n; B_0 = 0.
    SamplePath path(double dt, Engine& rng) const;

private:
    double H_;
    std::size_t n_;
    std::vector<double> sqrt_eig_;  ///< sqrt(lambda_k / m) for the circulant of size m = 2n
    std::vector<double> chol_;      ///< row-major lower factor when the embedding fails
};

SamplePath sample_fbm(double H, std::size_t n, double dt, Engine& rng);

/// B^H + delta W on n steps from independent draws.
SamplePath sample_mixed(double H, double delta, std::size_t n, double dt, Engine& rng);

/// Brownian motion on n steps.
SamplePath sample_wiener(std::size_t n, double dt, Engine& rng);

struct HurstEstimate
{
    double h_hat = 0.0;
    double stderr = 0.0;
    std::string method;
    double r2 = 0.0;
    std::vector<double> scales;  ///< block sizes or lags (in steps)
    std::vector<double> values;  ///< statistic per scale

    nlohmann::json to_json() const;
};

/// Aggregated variance over dyadic block sizes 1 .. max_block (default n/64):
/// half the mean square difference of adjacent non-overlapping block means,
/// which scales as m^{2H-2}. Differencing removes the dependence on the
/// overall sample mean that biases the plain block-mean variance. The log-log
/// fit weights each block size by its number of differences.
HurstEstimate hurst_aggregated_variance(const SamplePath& path, std::size_t max_block = 0);

/// Variogram of second-order increments X(k+2a) - 2X(k+a) + X(k) over dyadic
/// lags a in [min_lag, max_lag] (steps); its log-log slope is 2H.
/// max_lag = 0 means max(16, n/256).
HurstEstimate hurst_variogram(const SamplePath& path, std::size_t min_lag = 1, std::size_t max_lag = 0);

/// Variogram Hurst estimates on the lower and upper dyadic octaves of the lag
/// range [1, n/16]: five octaves from each end.
struct OctaveSplit
{
    HurstEstimate fine;
    HurstEstimate coarse;
};
OctaveSplit hurst_octave_split(const SamplePath& path);

/// Sum of squared increments over spacing `block` steps.
double quadratic_variation(const SamplePath& path, std::size_t block);

void write_path_csv(const std::string& file, const SamplePath& path);

}  // namespace inertsim
