#include <doctest.h>

#include <cmath>
#include <vector>

#include "inertsim/fbm.hpp"
#include "inertsim/stats.hpp"

using namespace inertsim;

namespace {

double fbm_cov(double H, double s, double t)
{
    return 0.5 * (std::pow(s, 2 * H) + std::pow(t, 2 * H) - std::pow(std::abs(t - s), 2 * H));
}

}  // namespace

TEST_CASE("fGn autocovariance")
{
    CHECK(fgn_autocovariance(0.75, 0) == doctest::Approx(1.0));
    CHECK(fgn_autocovariance(0.5, 3) == doctest::Approx(0.0).epsilon(1e-14));
    // Second difference of |k|^{2H}/2 computed by hand.
    const double H = 0.7, k = 4;
    const double want = 0.5 * (std::pow(k + 1, 2 * H) - 2 * std::pow(k, 2 * H) + std::pow(k - 1, 2 * H));
    CHECK(fgn_autocovariance(H, 4) == doctest::Approx(want).epsilon(1e-13));
}

TEST_CASE("fBm covariance matches the closed form")
{
    for (double H : {0.6, 0.85}) {
        const std::size_t n = 64;
        const double dt = 1.0 / n;
        FbmGenerator gen(H, n);
        CHECK_FALSE(gen.uses_cholesky());
        Engine rng = make_stream(11, static_cast<std::uint64_t>(H * 100), 0);
        const std::size_t i = 16, j = 64, reps = 20000;
        double sii = 0, sjj = 0, sij = 0;
        std::vector<double> prod(reps);
        for (std::size_t r = 0; r < reps; ++r) {
            const auto p = gen.path(dt, rng);
            CHECK(p.front() == 0.0);
            sii += p.values[i] * p.values[i];
            sjj += p.values[j] * p.values[j];
            prod[r] = p.values[i] * p.values[j];
            sij += prod[r];
        }
        const double se = std::sqrt(variance(prod) / reps);
        CHECK(std::abs(sij / reps - fbm_cov(H, 0.25, 1.0)) < 4 * se);
        CHECK(sjj / reps == doctest::Approx(1.0).epsilon(0.05));
        CHECK(sii / reps == doctest::Approx(std::pow(0.25, 2 * H)).epsilon(0.05));
    }
}

TEST_CASE("generator is deterministic per stream")
{
    Engine a = make_stream(5, 1, 2), b = make_stream(5, 1, 2);
    CHECK(sample_fbm(0.75, 256, 0.1, a).values == sample_fbm(0.75, 256, 0.1, b).values);
}

TEST_CASE("Hurst estimators on synthetic fBm")
{
    for (double H : {0.5, 0.7, 0.9}) {
        Engine rng = make_stream(3, static_cast<std::uint64_t>(H * 10), 0);
        const auto p = sample_fbm(H, 1 << 14, 1.0, rng);
        const auto av = hurst_aggregated_variance(p);
        const auto vg = hurst_variogram(p);
        CHECK(std::abs(av.h_hat - H) < 0.06);
        CHECK(std::abs(vg.h_hat - H) < 0.06);
        CHECK(av.scales.size() >= 5);
        CHECK(vg.r2 > 0.95);
    }
}

TEST_CASE("estimators are invariant to scale and blind to linear drift")
{
    Engine rng = make_stream(4, 0, 0);
    auto p = sample_fbm(0.75, 1 << 12, 1.0, rng);
    const double h0 = hurst_variogram(p).h_hat, a0 = hurst_aggregated_variance(p).h_hat;
    CHECK(hurst_variogram(7.0 * p).h_hat == doctest::Approx(h0).epsilon(1e-12));
    for (std::size_t k = 0; k < p.size(); ++k)
        p.values[k] += 3.0 * static_cast<double>(k);
    CHECK(hurst_variogram(p).h_hat == doctest::Approx(h0).epsilon(1e-9));
    CHECK(hurst_aggregated_variance(p).h_hat == doctest::Approx(a0).epsilon(1e-9));
}

TEST_CASE("estimator preconditions")
{
    Engine rng = make_stream(4, 1, 0);
    const auto shortp = sample_fbm(0.75, 256, 1.0, rng);
    CHECK_THROWS(hurst_variogram(shortp));
    const SamplePath flat(Grid(1.0, 2049), std::vector<double>(2049, 1.0));
    CHECK_THROWS(hurst_variogram(flat));
    CHECK_THROWS(hurst_aggregated_variance(flat));
}

TEST_CASE("octave split separates a mixed path")
{
    Engine rng = make_stream(6, 0, 0);
    // Small-scale Wiener part dominates the fine lags, fBm the coarse ones.
    const auto p = sample_mixed(0.9, 3.0, 1 << 16, 1.0, rng);
    const auto s = hurst_octave_split(p);
    CHECK(s.fine.h_hat < 0.6);
    CHECK(s.coarse.h_hat > s.fine.h_hat + 0.1);
}

TEST_CASE("quadratic variation under refinement")
{
    Engine rng = make_stream(7, 0, 0);
    const std::size_t n = 1 << 14;
    const auto w = sample_wiener(n, 1.0 / n, rng);
    const auto b = sample_fbm(0.75, n, 1.0 / n, rng);
    CHECK(quadratic_variation(w, 1) == doctest::Approx(1.0).epsilon(0.05));
    CHECK(quadratic_variation(w, 16) == doctest::Approx(1.0).epsilon(0.4));
    // n (1/n)^{1.5} falls by 2^{-1/2} per halving of the mesh.
    CHECK(quadratic_variation(b, 1) < 0.8 * quadratic_variation(b, 4));
    CHECK(quadratic_variation(b, 1) == doctest::Approx(std::pow(n, -0.5)).epsilon(0.1));
    CHECK_THROWS(quadratic_variation(b, 3));
}
