#include "inertsim/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include <boost/math/distributions/chi_squared.hpp>

namespace inertsim {

LinearFit fit_line(std::span<const double> xs, std::span<const double> ys, std::span<const double> weights)
{
    if (xs.size() != ys.size() || (!weights.empty() && weights.size() != xs.size()))
        throw std::invalid_argument("fit_line: size mismatch");
    const std::size_t n = xs.size();
    if (n < 3)
        throw std::invalid_argument("fit_line: need at least three points");
    const auto w = [&](std::size_t k) { return weights.empty() ? 1.0 : weights[k]; };
    double sw = 0.0, mx = 0.0, my = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        if (!(w(k) > 0.0))
            throw std::invalid_argument("fit_line: weights must be positive");
        sw += w(k);
        mx += w(k) * xs[k];
        my += w(k) * ys[k];
    }
    mx /= sw;
    my /= sw;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const double dx = xs[k] - mx, dy = ys[k] - my;
        sxx += w(k) * dx * dx;
        sxy += w(k) * dx * dy;
        syy += w(k) * dy * dy;
    }
    if (!(sxx > 0.0))
        throw std::invalid_argument("fit_line: abscissae must be distinct");
    LinearFit f;
    f.points = n;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    double sse = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const double r = ys[k] - f.intercept - f.slope * xs[k];
        sse += w(k) * r * r;
    }
    f.stderr_slope = std::sqrt(sse / static_cast<double>(n - 2) / sxx);
    f.r2 = syy > 0.0 ? 1.0 - sse / syy : 1.0;
    return f;
}

LinearFit fit_slope(std::span<const double> xs, std::span<const double> ys, std::span<const double> weights)
{
    if (xs.size() != ys.size())
        throw std::invalid_argument("fit_slope: size mismatch");
    std::vector<double> lx(xs.size()), ly(ys.size());
    for (std::size_t k = 0; k < xs.size(); ++k) {
        if (!(xs[k] > 0.0) || !(ys[k] > 0.0))
            throw std::invalid_argument("fit_slope: non-positive value at index "
                                        + std::to_string(k));
        lx[k] = std::log(xs[k]);
        ly[k] = std::log(ys[k]);
    }
    return fit_line(lx, ly, weights);
}

double kolmogorov_sf(double x)
{
    if (x <= 0.0)
        return 1.0;
    if (x < 1.0) {
        // Small-x form converges faster: P{K <= x} = sqrt(2 pi)/x sum exp(-(2k-1)^2 pi^2/(8x^2)).
        const double pi = 3.14159265358979323846;
        double s = 0.0;
        for (int k = 1; k <= 50; ++k) {
            const double term = std::exp(-(2.0 * k - 1) * (2.0 * k - 1) * pi * pi / (8.0 * x * x));
            s += term;
            if (term < 1e-17)
                break;
        }
        return std::clamp(1.0 - std::sqrt(2.0 * pi) / x * s, 0.0, 1.0);
    }
    double s = 0.0;
    for (int k = 1; k <= 100; ++k) {
        const double term = std::exp(-2.0 * k * k * x * x);
        s += (k % 2 == 1 ? 2.0 : -2.0) * term;
        if (term < 1e-17)
            break;
    }
    return std::clamp(s, 0.0, 1.0);
}

TestResult ks_one_sample(std::vector<double> sample, const std::function<double(double)>& cdf)
{
    if (sample.empty())
        throw std::invalid_argument("ks_one_sample: empty sample");
    std::sort(sample.begin(), sample.end());
    const double n = static_cast<double>(sample.size());
    double d = 0.0;
    for (std::size_t k = 0; k < sample.size(); ++k) {
        const double f = cdf(sample[k]);
        d = std::max({d, (k + 1) / n - f, f - k / n});
    }
    const double sn = std::sqrt(n);
    return {d, kolmogorov_sf((sn + 0.12 + 0.11 / sn) * d), 0.0};
}

TestResult ks_two_sample(std::vector<double> a, std::vector<double> b)
{
    if (a.empty() || b.empty())
        throw std::invalid_argument("ks_two_sample: empty sample");
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
    std::size_t i = 0, j = 0;
    double d = 0.0;
    while (i < a.size() && j < b.size()) {
        const double x = std::min(a[i], b[j]);
        while (i < a.size() && a[i] <= x)
            ++i;
        while (j < b.size() && b[j] <= x)
            ++j;
        d = std::max(d, std::abs(i / na - j / nb));
    }
    const double ne = std::sqrt(na * nb / (na + nb));
    return {d, kolmogorov_sf((ne + 0.12 + 0.11 / ne) * d), 0.0};
}

TestResult chi_square_gof(std::span<const double> counts, std::span<const double> probs)
{
    if (counts.size() != probs.size() || counts.size() < 2)
        throw std::invalid_argument("chi_square_gof: need matching counts and probabilities");
    double total = 0.0;
    for (double c : counts)
        total += c;
    double stat = 0.0;
    for (std::size_t k = 0; k < counts.size(); ++k) {
        const double e = total * probs[k];
        if (!(e > 0.0))
            throw std::invalid_argument("chi_square_gof: zero expected count");
        stat += (counts[k] - e) * (counts[k] - e) / e;
    }
    const double dof = static_cast<double>(counts.size() - 1);
    boost::math::chi_squared dist(dof);
    return {stat, boost::math::cdf(boost::math::complement(dist, stat)), dof};
}

double mean(std::span<const double> x)
{
    double s = 0.0;
    for (double v : x)
        s += v;
    return s / static_cast<double>(x.size());
}

double variance(std::span<const double> x)
{
    const double m = mean(x);
    double s = 0.0;
    for (double v : x)
        s += (v - m) * (v - m);
    return s / static_cast<double>(x.size() - 1);
}

double median(std::vector<double> x)
{
    if (x.empty())
        throw std::invalid_argument("median: empty input");
    const std::size_t mid = x.size() / 2;
    std::nth_element(x.begin(), x.begin() + static_cast<std::ptrdiff_t>(mid), x.end());
    const double hi = x[mid];
    if (x.size() % 2 == 1)
        return hi;
    return 0.5 * (hi + *std::max_element(x.begin(), x.begin() + static_cast<std::ptrdiff_t>(mid)));
}

}  // namespace inertsim
