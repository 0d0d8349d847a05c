#include <doctest.h>

#include <cmath>
#include <vector>

#include "inertsim/convolution.hpp"
#include "inertsim/model_config.hpp"
#include "inertsim/renewal.hpp"
#include "inertsim/stats.hpp"

using namespace inertsim;

namespace {

std::vector<double> naive_conv(const std::vector<double>& a, const std::vector<double>& b)
{
    std::vector<double> c(a.size() + b.size() - 1, 0.0);
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < b.size(); ++j)
            c[i + j] += a[i] * b[j];
    return c;
}

// Two-state alternating process with exponential sojourns.
SemiMarkovModel alternating(double a, double b)
{
    Eigen::MatrixXd p(2, 2);
    p << 0, 1, 1, 0;
    return SemiMarkovModel(StateSpace({0, 1}), TransitionMatrix(p),
                           SojournFamily::by_state({SojournLaw::exponential(a),
                                                    SojournLaw::exponential(b)}),
                           1.5);
}

}  // namespace

TEST_CASE("FFT convolution matches the direct sum")
{
    Engine rng = make_stream(1, 0, 0);
    for (std::size_t n : {5u, 47u, 300u, 1025u}) {
        std::vector<double> a(n), b(n / 2 + 3);
        for (auto& x : a)
            x = uniform_open(rng) - 0.5;
        for (auto& x : b)
            x = uniform_open(rng) - 0.5;
        const auto want = naive_conv(a, b);
        const auto got = convolve(a, b);
        REQUIRE(got.size() == want.size());
        for (std::size_t k = 0; k < want.size(); ++k)
            CHECK(got[k] == doctest::Approx(want[k]).epsilon(1e-10).scale(1.0));
        CHECK(convolve(a, b, 7).size() == 7);
    }
    CHECK(fft_size(1) == 1);
    CHECK(fft_size(1025) == 2048);
}

TEST_CASE("divide-and-conquer Volterra solver matches forward substitution")
{
    Engine rng = make_stream(2, 0, 0);
    const std::size_t N = 777, d = 3;
    MatrixKernel A(d, std::vector<std::vector<double>>(d));
    std::vector<std::vector<double>> b(d, std::vector<double>(N));
    for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t k = 0; k < d; ++k) {
            if (i == k && i == 1)
                continue;  // leave one block empty
            A[i][k].resize(N);
            for (std::size_t m = 0; m < N; ++m)
                A[i][k][m] = 0.3 * std::exp(-0.01 * m) * uniform_open(rng) / N;
        }
        for (auto& x : b[i])
            x = uniform_open(rng);
    }
    const auto fast = solve_volterra(A, b);
    const auto slow = solve_volterra_direct(A, b);
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t n = 0; n < N; ++n)
            CHECK(fast[i][n] == doctest::Approx(slow[i][n]).epsilon(1e-11));
}

TEST_CASE("lattice renewal function of an exponential law is linear")
{
    // Rounded-up exponential sojourns are geometric on the lattice, so the
    // expected number of renewals in (0, k dt] is k (1 - e^{-a dt}).
    const double a = 2.0, dt = 0.01;
    const auto model = alternating(a, a);
    const Grid grid(dt, 2001);
    const auto kernel = kernel_on_grid(model, grid);
    const auto f = first_passage(kernel, 0);
    // From 1 the first passage into 0 is the sojourn in 1 itself.
    const double q = 1.0 - std::exp(-a * dt);
    CHECK(f[1][1] == doctest::Approx(q).epsilon(1e-12));
    CHECK(f[1][10] == doctest::Approx(1.0 - std::pow(1.0 - q, 10)).epsilon(1e-12));
    const SemiMarkovModel single(
        StateSpace({0, 1}), TransitionMatrix((Eigen::MatrixXd(2, 2) << 0.5, 0.5, 0.5, 0.5).finished()),
        SojournFamily::by_state({SojournLaw::exponential(a), SojournLaw::exponential(a)}), 1.5);
    const auto fk = first_passage(kernel_on_grid(single, grid), 0);
    // Entrances to 0 are renewals; with p = 1/2 the inter-entrance count is
    // geometric in sojourns, and R counts the one at time 0.
    const auto r = renewal_function(fk[0]);
    for (std::size_t k : {0u, 1u, 50u, 2000u})
        CHECK(r[k] == doctest::Approx(1.0 + 0.5 * q * k).epsilon(1e-9));
}

TEST_CASE("stationary transition probabilities of an alternating Markov process")
{
    const double a = 1.0, b = 3.0, dt = 0.002;
    const auto model = alternating(a, b);
    const Grid grid(dt, 2501);
    const auto table = stationary_transition(model, grid);
    // P_t(1,1) = a/(a+b) + b/(a+b) e^{-(a+b)t} for the continuous chain.
    for (double t : {0.0, 0.5, 1.0, 5.0}) {
        const double want = a / (a + b) + b / (a + b) * std::exp(-(a + b) * t);
        CHECK(std::abs(table(1, 1).at(t) - want) < 10 * dt);
        CHECK(std::abs(table(1, 0).at(t) + table(1, 1).at(t) - 1.0) < 10 * dt);
    }
    CHECK(table.nu(1) == doctest::Approx(0.25).epsilon(1e-2));
    CHECK_THROWS(stationary_transition(model, Grid(0.05, 100)));
}

TEST_CASE("covariance of the symmetric model decays like 2 nu_1 e^{-t}")
{
    const auto model = presets::symmetric();
    const double dt = 0.005;
    const auto gamma = covariance_gamma(model, Grid(dt, 2001));
    const auto law = stationary_law(model);
    for (std::size_t k = 0; k < gamma.size(); k += 50)
        CHECK(std::abs(gamma[k] - 2 * law.nu(2) * std::exp(-gamma.grid.time(k))) < 10 * dt);
}

TEST_CASE("variance of the integral of a constant covariance is t^2")
{
    const Grid g(0.1, 101);
    const GridFunction gamma(g, std::vector<double>(101, 1.0));
    const auto var = variance_of_integral(gamma);
    CHECK(var[0] == 0.0);
    CHECK(var[100] == doctest::Approx(100.0).epsilon(1e-12));
    CHECK(var.at(5.0) == doctest::Approx(25.0).epsilon(1e-12));
}

TEST_CASE("tail constants")
{
    // Symmetric model: from 1 every visit to 0 is followed by 1 with
    // probability 1/2, so E N^{1,1}_0 = 2; and m_1 / eta_1^2 = nu_1^2 / m_1.
    const auto model = presets::symmetric();
    const auto law = stationary_law(model);
    const std::size_t i1 = model.space().index_of(1);
    const double want = law.nu(i1) * law.nu(i1) / law.m(i1) * 2.0;
    CHECK(tail_constant_Cj(model, 1) == doctest::Approx(want).epsilon(1e-12));
    CHECK_THROWS(tail_constant_Cj(model, 0));
}

TEST_CASE("key renewal asymptote")
{
    const auto f = SojournLaw::pareto(1.0, 1.5);
    const auto res = key_renewal_asymptote(f, [](double t) { return std::exp(-t); },
                                           Grid(0.05, 20001), {100.0, 300.0, 1000.0});
    REQUIRE(res.applicable);
    CHECK(res.kappa == doctest::Approx(3.0));
    CHECK(res.lambda == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(res.predicted(100.0) == doctest::Approx(-2.0 / 9.0 / 10.0).epsilon(1e-12));
    for (double r : res.ratios)
        CHECK(std::abs(r - 1.0) < 0.15);
    const auto light = key_renewal_asymptote(SojournLaw::exponential(1.0),
                                             [](double t) { return std::exp(-t); }, Grid(0.05, 101));
    CHECK_FALSE(light.applicable);
}
