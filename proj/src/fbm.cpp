#include "inertsim/fbm.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include "inertsim/convolution.hpp"
#include "inertsim/stats.hpp"

namespace inertsim {

double fgn_autocovariance(double H, long long k)
{
    if (!(H > 0.0 && H < 1.0))
        throw std::invalid_argument("fgn_autocovariance: H must lie in (0, 1)");
    const double a = std::abs(static_cast<double>(k));
    const double e = 2.0 * H;
    return 0.5 * (std::pow(a + 1.0, e) - 2.0 * std::pow(a, e) + std::pow(std::abs(a - 1.0), e));
}

FbmGenerator::FbmGenerator(double H, std::size_t n) : H_(H), n_(n)
{
    if (!(H > 0.0 && H < 1.0))
        throw std::invalid_argument("FbmGenerator: H must lie in (0, 1)");
    if (n < 2)
        throw std::invalid_argument("FbmGenerator: need at least two steps");
    const std::size_t m = 2 * n;
    AlignedReal row(m);
    for (std::size_t k = 0; k <= n; ++k)
        row[k] = fgn_autocovariance(H, static_cast<long long>(k));
    for (std::size_t k = n + 1; k < m; ++k)
        row[k] = row[m - k];
    const RealFft& fft = RealFft::get(m);
    AlignedComplex eig(fft.spectrum_size());
    fft.forward(row.data(), eig.data());
    bool ok = true;
    sqrt_eig_.resize(eig.size());
    for (std::size_t k = 0; k < eig.size(); ++k) {
        const double lam = eig[k].real();
        if (lam < -1e-10) {
            ok = false;
            break;
        }
        sqrt_eig_[k] = std::sqrt(std::max(lam, 0.0) / static_cast<double>(m));
    }
    if (ok)
        return;
    sqrt_eig_.clear();
    if (n > 8192)
        throw std::runtime_error("FbmGenerator: circulant embedding failed and n is too large "
                                 "for the Cholesky fallback");
    Eigen::MatrixXd cov(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            cov(i, j) = fgn_autocovariance(H, static_cast<long long>(i) - static_cast<long long>(j));
    Eigen::LLT<Eigen::MatrixXd> llt(cov);
    if (llt.info() != Eigen::Success)
        throw std::runtime_error("FbmGenerator: both circulant embedding and Cholesky failed");
    const Eigen::MatrixXd L = llt.matrixL();
    chol_.resize(n * n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            chol_[i * n + j] = L(i, j);
}

std::vector<double> FbmGenerator::noise(Engine& rng) const
{
    std::vector<double> out(n_);
    if (!chol_.empty()) {
        std::vector<double> z(n_);
        for (auto& v : z)
            v = standard_normal(rng);
        for (std::size_t i = 0; i < n_; ++i) {
            double s = 0.0;
            for (std::size_t j = 0; j <= i; ++j)
                s += chol_[i * n_ + j] * z[j];
            out[i] = s;
        }
        return out;
    }
    const std::size_t m = 2 * n_;
    const RealFft& fft = RealFft::get(m);
    AlignedComplex a(fft.spectrum_size());
    const double r = std::sqrt(0.5);
    a[0] = {sqrt_eig_[0] * standard_normal(rng), 0.0};
    for (std::size_t k = 1; k < n_; ++k) {
        const double x = standard_normal(rng), y = standard_normal(rng);
        a[k] = {sqrt_eig_[k] * r * x, sqrt_eig_[k] * r * y};
    }
    a[n_] = {sqrt_eig_[n_] * standard_normal(rng), 0.0};
    AlignedReal x(m);
    fft.inverse(a.data(), x.data());
    std::copy_n(x.begin(), n_, out.begin());
    return out;
}

SamplePath FbmGenerator::path(double dt, Engine& rng) const
{
    const auto z = noise(rng);
    const double scale = std::pow(dt, H_);
    std::vector<double> v(n_ + 1, 0.0);
    for (std::size_t k = 0; k < n_; ++k)
        v[k + 1] = v[k] + scale * z[k];
    return SamplePath(Grid(dt, n_ + 1), std::move(v));
}

SamplePath sample_fbm(double H, std::size_t n, double dt, Engine& rng)
{
    return FbmGenerator(H, n).path(dt, rng);
}

SamplePath sample_wiener(std::size_t n, double dt, Engine& rng)
{
    if (n < 2)
        throw std::invalid_argument("sample_wiener: need at least two steps");
    std::vector<double> v(n + 1, 0.0);
    const double s = std::sqrt(dt);
    for (std::size_t k = 0; k < n; ++k)
        v[k + 1] = v[k] + s * standard_normal(rng);
    return SamplePath(Grid(dt, n + 1), std::move(v));
}

SamplePath sample_mixed(double H, double delta, std::size_t n, double dt, Engine& rng)
{
    auto b = sample_fbm(H, n, dt, rng);
    if (delta == 0.0)
        return b;
    return b + delta * sample_wiener(n, dt, rng);
}

nlohmann::json HurstEstimate::to_json() const
{
    return {{"method", method}, {"h_hat", h_hat}, {"stderr", stderr}, {"r2", r2},
            {"scales", scales}, {"values", values}};
}

namespace {

void require_length(const SamplePath& path, const char* who)
{
    if (path.size() < 1025)
        throw std::invalid_argument(std::string(who) + ": need at least 2^10 increments");
}

void require_nonconstant(const std::vector<double>& v, const char* who)
{
    for (double x : v)
        if (!(x > 0.0))
            throw std::invalid_argument(std::string(who) + ": degenerate (constant) path");
}

}  // namespace

HurstEstimate hurst_aggregated_variance(const SamplePath& path, std::size_t max_block)
{
    require_length(path, "hurst_aggregated_variance");
    const std::size_t n = path.size() - 1;
    if (max_block == 0)
        max_block = n / 64;
    if (max_block < 16 || max_block > n / 4)
        throw std::invalid_argument("hurst_aggregated_variance: block range must cover 1..16 and "
                                    "leave at least four blocks");
    HurstEstimate est;
    est.method = "aggregated-variance";
    std::vector<double> weights;
    for (std::size_t m = 1; m <= max_block; m *= 2) {
        // Half the mean square difference of adjacent non-overlapping block means.
        const std::size_t blocks = n / m;
        double s = 0.0;
        for (std::size_t j = 0; j + 2 <= blocks; ++j) {
            const double a = path.values[(j + 1) * m] - path.values[j * m];
            const double b = path.values[(j + 2) * m] - path.values[(j + 1) * m];
            const double d = (b - a) / static_cast<double>(m);
            s += d * d;
        }
        est.scales.push_back(static_cast<double>(m));
        est.values.push_back(0.5 * s / static_cast<double>(blocks - 1));
        weights.push_back(static_cast<double>(blocks - 1));
    }
    require_nonconstant(est.values, "hurst_aggregated_variance");
    // The log of a mean over k differences has variance of order 1/k.
    const auto fit = fit_slope(est.scales, est.values, weights);
    est.h_hat = fit.slope / 2.0 + 1.0;
    est.stderr = fit.stderr_slope / 2.0;
    est.r2 = fit.r2;
    return est;
}

HurstEstimate hurst_variogram(const SamplePath& path, std::size_t min_lag, std::size_t max_lag)
{
    require_length(path, "hurst_variogram");
    const std::size_t n = path.size() - 1;
    if (max_lag == 0)
        max_lag = std::max<std::size_t>(16, n / 256);
    if (min_lag < 1 || max_lag < min_lag || 2 * max_lag >= n)
        throw std::invalid_argument("hurst_variogram: bad lag range");
    HurstEstimate est;
    est.method = "variogram";
    for (std::size_t lag = 1; lag <= max_lag; lag *= 2) {
        if (lag < min_lag)
            continue;
        double s = 0.0;
        for (std::size_t k = 0; k + 2 * lag <= n; ++k) {
            const double d = path.values[k + 2 * lag] - 2.0 * path.values[k + lag] + path.values[k];
            s += d * d;
        }
        est.scales.push_back(static_cast<double>(lag));
        est.values.push_back(s / static_cast<double>(n - 2 * lag + 1));
    }
    if (est.scales.size() < 3)
        throw std::invalid_argument("hurst_variogram: fewer than three dyadic lags");
    require_nonconstant(est.values, "hurst_variogram");
    const auto fit = fit_slope(est.scales, est.values);
    est.h_hat = fit.slope / 2.0;
    est.stderr = fit.stderr_slope / 2.0;
    est.r2 = fit.r2;
    return est;
}

OctaveSplit hurst_octave_split(const SamplePath& path)
{
    const std::size_t n = path.size() - 1;
    std::size_t top = 1;
    while (top * 2 <= n / 16)
        top *= 2;
    if (top < 512)
        throw std::invalid_argument("hurst_octave_split: need at least 2^13 increments");
    OctaveSplit s;
    s.fine = hurst_variogram(path, 1, 16);
    s.fine.method = "variogram-fine";
    s.coarse = hurst_variogram(path, top / 16, top);
    s.coarse.method = "variogram-coarse";
    return s;
}

double quadratic_variation(const SamplePath& path, std::size_t block)
{
    const std::size_t n = path.size() - 1;
    if (block == 0 || n % block != 0)
        throw std::invalid_argument("quadratic_variation: block must divide the number of steps");
    double s = 0.0;
    for (std::size_t k = 0; k + block <= n; k += block) {
        const double d = path.values[k + block] - path.values[k];
        s += d * d;
    }
    return s;
}

void write_path_csv(const std::string& file, const SamplePath& path)
{
    std::ofstream out(file);
    if (!out)
        throw std::runtime_error("cannot write " + file);
    out.precision(12);
    out << "t,value\n";
    for (std::size_t k = 0; k < path.size(); ++k)
        out << path.grid.time(k) << ',' << path.values[k] << '\n';
}

}  // namespace inertsim
