#include <doctest.h>

#include <cmath>
#include <vector>

#include "inertsim/model_config.hpp"
#include "inertsim/stats.hpp"

using namespace inertsim;

namespace {

SemiMarkovModel two_state_markov()
{
    Eigen::MatrixXd p(2, 2);
    p << 0, 1, 1, 0;
    return SemiMarkovModel(StateSpace({0, 1}), TransitionMatrix(p),
                           SojournFamily::by_state({SojournLaw::exponential(1.0),
                                                    SojournLaw::exponential(1.0)}),
                           1.5);
}

// Expected zero-visits before hitting `target` by simulating the embedded chain.
double mc_visits(const SemiMarkovModel& m, int from, int target, int reps, Engine& rng)
{
    const auto& P = m.chain().matrix();
    const std::size_t tj = m.space().index_of(target), z = m.space().index_of_zero();
    long total = 0;
    for (int r = 0; r < reps; ++r) {
        std::size_t s = m.space().index_of(from);
        while (true) {
            double u = uniform_open(rng), acc = 0.0;
            std::size_t nxt = 0;
            for (std::size_t k = 0; k < m.size(); ++k) {
                acc += P(s, k);
                if (u < acc) {
                    nxt = k;
                    break;
                }
            }
            s = nxt;
            if (s == tj)
                break;
            total += s == z;
        }
    }
    return static_cast<double>(total) / reps;
}

}  // namespace

TEST_CASE("state space and matrix validation")
{
    CHECK_THROWS(StateSpace({1, 2}));
    CHECK_THROWS(StateSpace({0, 0, 1}));
    CHECK_THROWS(StateSpace({0}));
    CHECK(StateSpace({-1, 0, 1}).index_of_zero() == 1);
    Eigen::MatrixXd bad(2, 2);
    bad << 0.5, 0.5, -0.1, 1.1;
    CHECK_THROWS(TransitionMatrix(bad));
}

TEST_CASE("validate_model")
{
    CHECK(validate_model(presets::symmetric()).empty());
    CHECK(validate_model(presets::asymmetric()).empty());
    CHECK(validate_model(presets::markov_baseline()).empty());
    // The symmetric chain has p(1,-1) = 0, which only the strict level rejects.
    CHECK(validate_model(presets::symmetric(), Strictness::strict_positivity).size() == 2);

    Eigen::MatrixXd p(3, 3);
    p << 0, 1, 0, 0.5, 0, 0.4, 0, 1, 0;
    const SemiMarkovModel short_row(StateSpace({-1, 0, 1}), TransitionMatrix(p),
                                    SojournFamily::by_state({SojournLaw::exponential(1.0),
                                                             SojournLaw::pareto(1.0, 1.5),
                                                             SojournLaw::exponential(1.0)}),
                                    1.5);
    const auto v = validate_model(short_row);
    REQUIRE(v.size() == 1);
    CHECK(v[0].find("state 0") != std::string::npos);
    CHECK(v[0].find("0.9") != std::string::npos);

    p << 0, 1, 0, 0.5, 0, 0.5, 0, 1, 0;
    const SemiMarkovModel heavy_active(StateSpace({-1, 0, 1}), TransitionMatrix(p),
                                       SojournFamily::by_state({SojournLaw::pareto(1.0, 1.5),
                                                                SojournLaw::pareto(1.0, 1.5),
                                                                SojournLaw::exponential(1.0)}),
                                       1.5);
    const auto w = validate_model(heavy_active);
    REQUIRE(w.size() == 1);
    CHECK(w[0].find("-1 -> 0") != std::string::npos);
    CHECK(w[0].find("only exits from state 0") != std::string::npos);

    p << 1, 0, 0, 0.5, 0, 0.5, 0, 1, 0;
    const SemiMarkovModel reducible(StateSpace({-1, 0, 1}), TransitionMatrix(p),
                                    SojournFamily::by_state({SojournLaw::exponential(1.0),
                                                             SojournLaw::pareto(1.0, 1.5),
                                                             SojournLaw::exponential(1.0)}),
                                    1.5);
    CHECK(validate_model(reducible).size() == 1);

    const SemiMarkovModel wrong_alpha(StateSpace({-1, 0, 1}),
                                      TransitionMatrix(presets::symmetric().chain().matrix()),
                                      SojournFamily::by_state({SojournLaw::exponential(1.0),
                                                               SojournLaw::pareto(1.0, 1.5),
                                                               SojournLaw::exponential(1.0)}),
                                      1.4);
    CHECK(validate_model(wrong_alpha).size() == 2);  // one per exit from 0
}

TEST_CASE("stationary law of the symmetric model")
{
    const auto m = presets::symmetric();
    const auto law = stationary_law(m);
    CHECK(law.pi(0) == doctest::Approx(0.25).epsilon(1e-14));
    CHECK(law.pi(1) == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(law.pi(2) == doctest::Approx(0.25).epsilon(1e-14));
    CHECK(law.nu(0) == doctest::Approx(0.125));
    CHECK(law.nu(1) == doctest::Approx(0.75));
    CHECK(law.nu(2) == doctest::Approx(0.125));
    CHECK(law.eta(2) == doctest::Approx(8.0));
    CHECK(std::abs(law.mu) < 1e-15);
    const Eigen::VectorXd residual = law.pi.transpose() * m.chain().matrix() - law.pi.transpose();
    CHECK(residual.norm() < 1e-10);
    CHECK(law.pi.sum() == doctest::Approx(1.0).epsilon(1e-15));
    for (int k = 0; k < 3; ++k)
        CHECK(law.nu(k) == doctest::Approx(law.m(k) / law.eta(k)));
}

TEST_CASE("stationary law of the asymmetric model")
{
    // By hand: pi = (0.15, 0.5, 0.35), m = (1, 3, 1), sum pi m = 2.
    const auto law = stationary_law(presets::asymmetric());
    CHECK(law.pi(0) == doctest::Approx(0.15));
    CHECK(law.pi(2) == doctest::Approx(0.35));
    CHECK(law.nu(0) == doctest::Approx(0.075));
    CHECK(law.nu(1) == doctest::Approx(0.75));
    CHECK(law.nu(2) == doctest::Approx(0.175));
    CHECK(law.mu == doctest::Approx(0.1));
    CHECK(law.eta(0) == doctest::Approx(1.0 / 0.075));
}

TEST_CASE("m_i is the p-weighted mean of m_ij for edge-dependent laws")
{
    Eigen::MatrixXd p(3, 3);
    p << 0, 1, 0, 0.3, 0, 0.7, 0, 1, 0;
    std::vector<SojournLaw> laws(9, SojournLaw::exponential(1.0));
    laws[3] = SojournLaw::pareto(1.0, 1.5);  // 0 -> -1
    laws[5] = SojournLaw::pareto(2.0, 1.5);  // 0 -> 1
    const SemiMarkovModel m(StateSpace({-1, 0, 1}), TransitionMatrix(p),
                            SojournFamily::by_edge(3, laws), 1.5);
    CHECK(validate_model(m).empty());
    const auto law = stationary_law(m);
    CHECK(law.m(1) == doctest::Approx(0.3 * 3.0 + 0.7 * 6.0));
    CHECK(std::isnan(law.m_cond(1, 1)));
    CHECK(m.slowly_varying(100.0) == doctest::Approx(0.3 + 0.7 * std::pow(2.0, 1.5)));
}

TEST_CASE("expected visits to 0 before hitting a state")
{
    const auto m = presets::symmetric();
    CHECK(expected_visits_before_hit(m, 1, 1) == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(expected_visits_before_hit(m, -1, 1) == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(expected_visits_before_hit(m, 0, 1) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(expected_visits_before_hit(two_state_markov(), 0, 1) == 0.0);

    Engine rng = make_stream(11, 0, 0);
    const auto a = presets::asymmetric();
    for (int from : {-1, 0, 1})
        for (int target : {-1, 1}) {
            const double exact = expected_visits_before_hit(a, from, target);
            const double mc = mc_visits(a, from, target, 200000, rng);
            CHECK(std::abs(mc - exact) < 0.03 * exact + 0.01);
        }
    // Returns to 1 from 1 need a geometric number of zero-visits, mean 1/0.7.
    CHECK(expected_visits_before_hit(a, 1, 1) == doctest::Approx(1.0 / 0.7));
    CHECK(expected_visits_before_hit(a, -1, -1) == doctest::Approx(1.0 / 0.3));
}

TEST_CASE("theorem condition and the limit constant")
{
    const auto sym = theorem_condition(presets::symmetric());
    CHECK_FALSE(sym.holds);
    CHECK_THROWS_AS(limit_constant_c2(presets::symmetric()), TheoremConditionError);

    const auto asym = theorem_condition(presets::asymmetric());
    CHECK(asym.holds);
    // Hand evaluation: C_1 = 0.04375, C_-1 = 0.01875, mu = 0.1, H = 0.75.
    const double c2_hand = 0.1 * (0.04375 - 0.01875) / (2 * 0.75 * 0.25 * 0.5);
    CHECK(limit_constant_c2(presets::asymmetric()) == doctest::Approx(c2_hand).epsilon(1e-12));

    // Mirroring the labels flips both factors and leaves the product unchanged.
    const auto a = presets::asymmetric();
    const SemiMarkovModel mirrored(StateSpace({1, 0, -1}), a.chain(), a.sojourns(), a.alpha());
    const auto mc = theorem_condition(mirrored);
    CHECK(mc.mu == doctest::Approx(-asym.mu));
    CHECK(mc.product == doctest::Approx(asym.product));
}

TEST_CASE("hurst_from_alpha")
{
    CHECK(hurst_from_alpha(1.5) == 0.75);
    CHECK(hurst_from_alpha(1.2) == doctest::Approx(0.9));
    CHECK_THROWS(hurst_from_alpha(2.0));
    CHECK_THROWS(hurst_from_alpha(1.0));
    CHECK(hurst_from_alpha(1.3) > hurst_from_alpha(1.31));
}

TEST_CASE("sample_path basics")
{
    const auto m = presets::symmetric();
    Engine rng = make_stream(1, 0, 0);
    const auto tiny = sample_path(m, 0, 1e-6, rng);  // Pareto sojourn is at least 1
    CHECK(tiny.segments() == 1);
    CHECK(tiny.states[0] == 0);

    Engine a = make_stream(5, 1, 2), b = make_stream(5, 1, 2);
    const auto ta = sample_path(m, 1, 100.0, a), tb = sample_path(m, 1, 100.0, b);
    CHECK(ta.jump_times == tb.jump_times);
    CHECK(ta.states == tb.states);
    CHECK(ta.states[0] == 1);
    for (std::size_t k = 1; k < ta.segments(); ++k)
        CHECK(ta.jump_times[k] > ta.jump_times[k - 1]);
    CHECK_THROWS(sample_path(m, 0, 0.0, rng));
}

TEST_CASE("occupation and visit frequencies of a long path")
{
    const auto m = presets::asymmetric();
    Engine rng = make_stream(2, 0, 0);
    const auto traj = sample_path(m, 0, 2e6, rng);
    const auto law = stationary_law(m);
    std::vector<double> occ(3, 0.0), visits(3, 0.0);
    for (std::size_t k = 0; k < traj.segments(); ++k) {
        const double end = k + 1 < traj.segments() ? traj.jump_times[k + 1] : traj.horizon;
        const auto i = m.space().index_of(traj.states[k]);
        occ[i] += end - traj.jump_times[k];
        visits[i] += 1.0;
    }
    for (int i = 0; i < 3; ++i) {
        CHECK(occ[i] / traj.horizon == doctest::Approx(law.nu(i)).epsilon(0.03));
        CHECK(visits[i] / traj.segments() == doctest::Approx(law.pi(i)).epsilon(0.01));
    }
}

TEST_CASE("stationary start: marginals at fixed times and the first sojourn")
{
    const auto m = presets::asymmetric();
    const auto law = stationary_law(m);
    std::vector<double> at0(3, 0.0), at5(3, 0.0);
    std::vector<double> first_in_zero;
    const int reps = 40000;
    for (int r = 0; r < reps; ++r) {
        Engine rng = make_stream(3, 0, static_cast<std::uint64_t>(r));
        const auto traj = sample_stationary_path(m, 5.0, rng);
        at0[m.space().index_of(traj.state_at(0.0))] += 1;
        at5[m.space().index_of(traj.state_at(5.0))] += 1;
    }
    const std::vector<double> nu(law.nu.data(), law.nu.data() + 3);
    CHECK(chi_square_gof(at0, nu).p_value > 0.001);
    CHECK(chi_square_gof(at5, nu).p_value > 0.001);

    // T_1 given xi_0 = 0 has CDF 1 - int_t^inf h(0,s) ds / m_0, by quadrature here.
    const double m0 = law.m(1);
    const auto residual_cdf = [&](double t) {
        // h(0, s) = min(1, s^{-1.5}); integrate with the substitution s = t + u^2/(1-u).
        double integral = 0.0;
        const int n = 200000;
        for (int k = 0; k < n; ++k) {
            const double u = (k + 0.5) / n;
            const double s = t + u * u / (1.0 - u);
            const double ds = (2.0 * u * (1.0 - u) + u * u) / ((1.0 - u) * (1.0 - u));
            integral += m.survival(1, s) * ds / n;
        }
        return 1.0 - integral / m0;
    };
    for (int r = 0; first_in_zero.size() < 3000; ++r) {
        auto stream = TrajectoryStream::stationary(m, law, make_stream(3, 1, static_cast<std::uint64_t>(r)));
        const auto seg = stream.next();
        if (seg.state == m.space().index_of_zero())
            first_in_zero.push_back(seg.end);
    }
    CHECK(ks_one_sample(first_in_zero, residual_cdf).p_value > 0.01);
}

TEST_CASE("Markov case: the residual first sojourn is the sojourn law itself")
{
    const auto m = presets::markov_baseline();
    CHECK(m.markov());
    CHECK_FALSE(presets::asymmetric().markov());
    const auto law = stationary_law(m);
    std::vector<double> t1;
    for (int r = 0; r < 20000; ++r) {
        Engine rng = make_stream(4, 0, static_cast<std::uint64_t>(r));
        auto s = TrajectoryStream::stationary(m, law, rng);
        const auto seg = s.next();
        if (seg.state == 1)
            t1.push_back(seg.end);
    }
    const auto e = SojournLaw::exponential(1.0 / 3.0);
    CHECK(ks_one_sample(t1, [&](double t) { return e.cdf(t); }).p_value > 0.01);
}

TEST_CASE("integrate_trajectory")
{
    Trajectory one{{0.0}, {1}, 4.0};
    const auto p = integrate_trajectory(one, Grid(0.5, 9));
    for (std::size_t k = 0; k < p.size(); ++k)
        CHECK(p.values[k] == doctest::Approx(0.5 * k));

    Trajectory two{{0.0, 1.0}, {1, -1}, 2.0};
    const auto q = integrate_trajectory(two, Grid(0.25, 9));
    CHECK(q.back() == doctest::Approx(0.0).scale(1.0));
    CHECK(q.values[4] == doctest::Approx(1.0));
    CHECK(q.values[6] == doctest::Approx(0.5));

    const SamplePath w(Grid(0.1, 21), std::vector<double>(21, 2.0));
    const auto r = integrate_trajectory(two, Grid(0.25, 9), &w);
    for (std::size_t k = 0; k < r.size(); ++k)
        CHECK(r.values[k] == doctest::Approx(2.0 * q.values[k]));

    CHECK_THROWS(integrate_trajectory(two, Grid(0.5, 6)));
    const SamplePath short_w(Grid(0.1, 11), std::vector<double>(11, 1.0));
    CHECK_THROWS(integrate_trajectory(two, Grid(0.25, 9), &short_w));
}

TEST_CASE("model config round trip and diagnostics")
{
    const auto j = model_to_json(presets::asymmetric());
    const auto back = model_from_json(j);
    CHECK(stationary_law(back).mu == doctest::Approx(0.1));
    CHECK(limit_constant_c2(back) == doctest::Approx(limit_constant_c2(presets::asymmetric())));

    auto broken = j;
    broken["transition"][1] = {0.3, 0.0};
    CHECK_THROWS_WITH_AS(model_from_json(broken), doctest::Contains("model.transition[1]"),
                         std::invalid_argument);
    broken = j;
    broken["sojourns"]["by_state"][2] = {{"family", "exponential"}};
    CHECK_THROWS_WITH_AS(model_from_json(broken), doctest::Contains("by_state[2].rate"),
                         std::invalid_argument);
    broken = j;
    broken.erase("alpha");
    CHECK_THROWS_WITH_AS(model_from_json(broken), doctest::Contains("alpha"), std::invalid_argument);
}
