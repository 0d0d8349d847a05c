#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace inertsim {

struct LinearFit
{
    double slope = 0.0;
    double intercept = 0.0;
    double stderr_slope = 0.0;
    double r2 = 0.0;
    std::size_t points = 0;
};

/// Least squares of y on x, weighted when `weights` is nonempty.
LinearFit fit_line(std::span<const double> xs, std::span<const double> ys, std::span<const double> weights = {});

/// Least squares of log y on log x. Throws on non-positive values or fewer
/// than three points.
LinearFit fit_slope(std::span<const double> xs, std::span<const double> ys, std::span<const double> weights = {});

struct TestResult
{
    double statistic = 0.0;
    double p_value = 0.0;
    double dof = 0.0;
};

/// P{K > x} for the Kolmogorov distribution.
double kolmogorov_sf(double x);

/// One-sample Kolmogorov-Smirnov test against a continuous CDF.
TestResult ks_one_sample(std::vector<double> sample, const std::function<double(double)>& cdf);

/// Two-sample Kolmogorov-Smirnov test (asymptotic p-value).
TestResult ks_two_sample(std::vector<double> a, std::vector<double> b);

/// Pearson chi-square goodness of fit of counts against probabilities.
TestResult chi_square_gof(std::span<const double> counts, std::span<const double> probs);

double mean(std::span<const double> x);
/// Unbiased sample variance.
double variance(std::span<const double> x);
double median(std::vector<double> x);

}  // namespace inertsim
