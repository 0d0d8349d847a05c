#include "inertsim/semi_markov.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

namespace inertsim {
namespace {

std::string fmt(double x)
{
    std::ostringstream os;
    os.precision(12);
    os << x;
    return os.str();
}

// Index of the first cumulative entry exceeding u, restricted to [begin, begin+n).
std::size_t pick(const double* cumulative, std::size_t n, double u)
{
    for (std::size_t k = 0; k < n; ++k)
        if (u < cumulative[k])
            return k;
    // Rounding left u above the last entry: take the last reachable index.
    for (std::size_t k = n; k-- > 0;)
        if (k == 0 || cumulative[k] > cumulative[k - 1])
            return k;
    return n - 1;
}

}  // namespace

StateSpace::StateSpace(std::vector<int> states) : states_(std::move(states))
{
    if (states_.size() < 2)
        throw std::invalid_argument("StateSpace: need at least two states");
    std::vector<int> sorted = states_;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
        throw std::invalid_argument("StateSpace: state labels must be distinct");
    const auto it = std::find(states_.begin(), states_.end(), 0);
    if (it == states_.end())
        throw std::invalid_argument("StateSpace: the inactive state 0 is missing");
    zero_ = static_cast<std::size_t>(it - states_.begin());
}

std::size_t StateSpace::index_of(int label) const
{
    const auto it = std::find(states_.begin(), states_.end(), label);
    if (it == states_.end())
        throw std::invalid_argument("StateSpace: unknown state " + std::to_string(label));
    return static_cast<std::size_t>(it - states_.begin());
}

TransitionMatrix::TransitionMatrix(Eigen::MatrixXd p) : p_(std::move(p))
{
    if (p_.rows() != p_.cols() || p_.rows() < 2)
        throw std::invalid_argument("TransitionMatrix: must be square of size >= 2");
    for (Eigen::Index i = 0; i < p_.rows(); ++i)
        for (Eigen::Index j = 0; j < p_.cols(); ++j)
            if (!std::isfinite(p_(i, j)) || p_(i, j) < 0.0)
                throw std::invalid_argument("TransitionMatrix: entry (" + std::to_string(i) + ","
                                            + std::to_string(j) + ") is not a probability");
}

SojournFamily SojournFamily::by_state(std::vector<SojournLaw> laws)
{
    SojournFamily f;
    f.n_ = laws.size();
    f.laws_.reserve(f.n_ * f.n_);
    for (std::size_t i = 0; i < f.n_; ++i)
        for (std::size_t j = 0; j < f.n_; ++j)
            f.laws_.push_back(laws[i]);
    return f;
}

SojournFamily SojournFamily::by_edge(std::size_t n, std::vector<SojournLaw> laws)
{
    if (laws.size() != n * n)
        throw std::invalid_argument("SojournFamily::by_edge: expected " + std::to_string(n * n)
                                    + " laws, got " + std::to_string(laws.size()));
    SojournFamily f;
    f.n_ = n;
    f.laws_ = std::move(laws);
    f.edge_dependent_ = true;
    return f;
}

SemiMarkovModel::SemiMarkovModel(StateSpace space, TransitionMatrix chain, SojournFamily sojourns,
                                 double alpha, SlowlyVarying l)
    : space_(std::move(space)), chain_(std::move(chain)), sojourns_(std::move(sojourns)),
      alpha_(alpha), l_(l)
{
    if (chain_.size() != space_.size() || sojourns_.size() != space_.size())
        throw std::invalid_argument("SemiMarkovModel: state space has " + std::to_string(space_.size())
                                    + " states but the transition matrix has "
                                    + std::to_string(chain_.size()) + " and the sojourn family "
                                    + std::to_string(sojourns_.size()));
}

bool SemiMarkovModel::heavy() const
{
    const std::size_t z = space_.index_of_zero();
    for (std::size_t j = 0; j < size(); ++j)
        if (chain_(z, j) > 0.0 && sojourns_.law(z, j).heavy())
            return true;
    return false;
}

double SemiMarkovModel::hurst() const { return heavy() ? hurst_from_alpha(alpha_) : 0.5; }

double SemiMarkovModel::survival(std::size_t i, double t) const
{
    double h = 0.0;
    for (std::size_t j = 0; j < size(); ++j)
        if (chain_(i, j) > 0.0)
            h += chain_(i, j) * sojourns_.law(i, j).tail(t);
    return h;
}

double SemiMarkovModel::kernel(std::size_t i, std::size_t j, double t) const
{
    return chain_(i, j) * sojourns_.law(i, j).cdf(t);
}

double SemiMarkovModel::mean_sojourn(std::size_t i) const
{
    double m = 0.0;
    for (std::size_t j = 0; j < size(); ++j)
        if (chain_(i, j) > 0.0)
            m += chain_(i, j) * sojourns_.law(i, j).mean();
    return m;
}

double SemiMarkovModel::conditional_mean(std::size_t i, std::size_t j) const
{
    if (chain_(i, j) <= 0.0)
        return std::numeric_limits<double>::quiet_NaN();
    return sojourns_.law(i, j).mean();
}

double SemiMarkovModel::slowly_varying(double t) const
{
    if (!heavy())
        return 1.0;
    const std::size_t z = space_.index_of_zero();
    double l = 0.0;
    for (std::size_t j = 0; j < size(); ++j)
        if (chain_(z, j) > 0.0 && sojourns_.law(z, j).heavy())
            l += chain_(z, j) * sojourns_.law(z, j).slowly_varying(t);
    return l;
}

bool SemiMarkovModel::markov() const
{
    for (std::size_t i = 0; i < size(); ++i) {
        double rate = -1.0;
        for (std::size_t j = 0; j < size(); ++j) {
            if (chain_(i, j) <= 0.0)
                continue;
            const auto* e = std::get_if<Exponential>(&sojourns_.law(i, j).family());
            if (!e)
                return false;
            if (rate >= 0.0 && e->rate != rate)
                return false;
            rate = e->rate;
        }
    }
    return true;
}

std::vector<std::string> validate_model(const SemiMarkovModel& model, Strictness strictness)
{
    std::vector<std::string> out;
    const std::size_t n = model.size();
    const auto& P = model.chain();
    const auto& E = model.space();

    for (std::size_t i = 0; i < n; ++i) {
        double sum = 0.0;
        for (std::size_t j = 0; j < n; ++j)
            sum += P(i, j);
        if (std::abs(sum - 1.0) > 1e-12)
            out.push_back("row of state " + std::to_string(E.label(i)) + " sums to " + fmt(sum)
                          + ", not 1");
    }

    if (strictness == Strictness::strict_positivity) {
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                if (i != j && !(P(i, j) > 0.0))
                    out.push_back("transition " + std::to_string(E.label(i)) + " -> "
                                  + std::to_string(E.label(j)) + " has probability 0");
    }

    // Irreducibility: every state reaches every other along positive entries.
    for (std::size_t s = 0; s < n; ++s) {
        std::vector<char> seen(n, 0);
        std::vector<std::size_t> stack{s};
        seen[s] = 1;
        while (!stack.empty()) {
            const std::size_t a = stack.back();
            stack.pop_back();
            for (std::size_t b = 0; b < n; ++b)
                if (P(a, b) > 0.0 && !seen[b]) {
                    seen[b] = 1;
                    stack.push_back(b);
                }
        }
        const auto missing = std::find(seen.begin(), seen.end(), 0);
        if (missing != seen.end()) {
            out.push_back("embedded chain is not irreducible: state "
                          + std::to_string(E.label(static_cast<std::size_t>(missing - seen.begin())))
                          + " is not reachable from state " + std::to_string(E.label(s)));
            break;
        }
    }

    const std::size_t z = E.index_of_zero();
    const bool heavy = model.heavy();
    if (heavy && !(model.alpha() > 1.0 && model.alpha() < 2.0))
        out.push_back("tail index alpha = " + fmt(model.alpha()) + " is outside (1, 2)");
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            if (!(P(i, j) > 0.0))
                continue;
            const SojournLaw& law = model.sojourns().law(i, j);
            const std::string edge
                = std::to_string(E.label(i)) + " -> " + std::to_string(E.label(j));
            if (!std::isfinite(law.mean()))
                out.push_back("sojourn law on " + edge + " has infinite mean");
            if (i != z && law.heavy())
                out.push_back("sojourn law on " + edge
                              + " is heavy-tailed; only exits from state 0 may be heavy-tailed");
            if (i == z && heavy && !law.heavy())
                out.push_back("sojourn law on " + edge
                              + " is light-tailed while other exits from state 0 are heavy-tailed");
            if (i == z && law.heavy() && law.tail_index() != model.alpha())
                out.push_back("sojourn law on " + edge + " has tail index " + fmt(law.tail_index())
                              + " but the model declares alpha = " + fmt(model.alpha()));
        }
    return out;
}

StationaryLaw stationary_law(const SemiMarkovModel& model)
{
    const auto n = static_cast<Eigen::Index>(model.size());
    const Eigen::MatrixXd& P = model.chain().matrix();

    Eigen::MatrixXd A = P.transpose() - Eigen::MatrixXd::Identity(n, n);
    A.row(n - 1).setOnes();
    Eigen::VectorXd b = Eigen::VectorXd::Zero(n);
    b(n - 1) = 1.0;
    Eigen::FullPivLU<Eigen::MatrixXd> lu(A);
    if (!lu.isInvertible())
        throw std::runtime_error("stationary_law: singular system; the embedded chain is not "
                                 "irreducible");

    StationaryLaw law;
    law.pi = lu.solve(b);
    law.m.resize(n);
    law.m_cond.resize(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        law.m(i) = model.mean_sojourn(static_cast<std::size_t>(i));
        for (Eigen::Index j = 0; j < n; ++j)
            law.m_cond(i, j)
                = model.conditional_mean(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
    }
    const double norm = law.pi.dot(law.m);
    law.nu = law.pi.cwiseProduct(law.m) / norm;
    law.eta = law.m.cwiseQuotient(law.nu);
    law.mu = 0.0;
    for (Eigen::Index k = 0; k < n; ++k)
        law.mu += model.space().label(static_cast<std::size_t>(k)) * law.nu(k);
    return law;
}

double expected_visits_before_hit(const SemiMarkovModel& model, int from, int target)
{
    const auto& E = model.space();
    const std::size_t i = E.index_of(from);
    const std::size_t j = E.index_of(target);
    const std::size_t z = E.index_of_zero();
    if (j == z)
        return 0.0;

    // Transient set: every state but the target.
    std::vector<std::size_t> keep;
    for (std::size_t k = 0; k < model.size(); ++k)
        if (k != j)
            keep.push_back(k);
    const auto m = static_cast<Eigen::Index>(keep.size());
    Eigen::MatrixXd A = Eigen::MatrixXd::Identity(m, m);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(m);
    for (Eigen::Index a = 0; a < m; ++a) {
        for (Eigen::Index c = 0; c < m; ++c)
            A(a, c) -= model.chain()(keep[a], keep[c]);
        if (keep[a] == z)
            rhs(a) = 1.0;
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(A);
    if (!lu.isInvertible())
        throw std::runtime_error("expected_visits_before_hit: singular fundamental matrix; state "
                                 + std::to_string(target) + " is not reachable");
    // visits(a) = expected visits to 0 at times n >= 0 before absorption, from a.
    const Eigen::VectorXd visits = lu.solve(rhs);
    double total = 0.0;
    for (Eigen::Index a = 0; a < m; ++a)
        total += model.chain()(i, keep[a]) * visits(a);
    return total;
}

TheoremCondition theorem_condition(const SemiMarkovModel& model)
{
    const StationaryLaw law = stationary_law(model);
    TheoremCondition c;
    c.mu = law.mu;
    double scale_mu = 0.0, scale_sum = 0.0;
    for (std::size_t k = 0; k < model.size(); ++k) {
        const double label = model.space().label(k);
        const auto kk = static_cast<Eigen::Index>(k);
        const double term = law.m(kk) / (law.eta(kk) * law.eta(kk));
        c.weighted_sum += label * term;
        scale_sum += std::abs(label) * term;
        scale_mu += std::abs(label) * law.nu(kk);
    }
    c.product = c.mu * c.weighted_sum;
    // Treat rounding-level values as zero so symmetric models report exactly.
    c.holds = c.product > 1e-12 * scale_mu * scale_sum;
    c.report = "mu = " + fmt(c.mu) + "; sum_k k m_k/eta_k^2 = " + fmt(c.weighted_sum)
               + "; product = " + fmt(c.product) + (c.holds ? " > 0" : " is not positive");
    return c;
}

double hurst_from_alpha(double alpha)
{
    if (!(alpha > 1.0 && alpha < 2.0))
        throw std::invalid_argument("hurst_from_alpha: alpha = " + fmt(alpha)
                                    + " is outside (1, 2)");
    return (3.0 - alpha) / 2.0;
}

double limit_constant_c2(const SemiMarkovModel& model)
{
    const double H = hurst_from_alpha(model.alpha());
    const TheoremCondition cond = theorem_condition(model);
    if (!cond.holds)
        throw TheoremConditionError("limit theorem hypothesis mu * sum_k k m_k/eta_k^2 > 0 fails: "
                                    + cond.report);
    const StationaryLaw law = stationary_law(model);
    double sum = 0.0;
    for (std::size_t j = 0; j < model.size(); ++j) {
        const int label = model.space().label(j);
        if (label == 0)
            continue;
        const auto jj = static_cast<Eigen::Index>(j);
        sum += label * law.m(jj) / (law.eta(jj) * law.eta(jj))
               * expected_visits_before_hit(model, label, label);
    }
    const double c2 = law.mu * sum / (2.0 * H * (1.0 - H) * (2.0 * H - 1.0));
    if (!(c2 > 0.0))
        throw TheoremConditionError("limit constant c^2 = " + fmt(c2) + " is not positive ("
                                    + cond.report + ")");
    return c2;
}

int Trajectory::state_at(double t) const
{
    const auto it = std::upper_bound(jump_times.begin(), jump_times.end(), t);
    const auto k = it == jump_times.begin() ? 0 : static_cast<std::size_t>(it - jump_times.begin()) - 1;
    return states.at(k);
}

TrajectoryStream::TrajectoryStream(const SemiMarkovModel& model, Engine rng)
    : model_(&model), rng_(std::move(rng))
{
    const std::size_t n = model.size();
    cumulative_.resize(n * n);
    for (std::size_t i = 0; i < n; ++i) {
        double acc = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            acc += model.chain()(i, j);
            cumulative_[i * n + j] = acc;
        }
    }
}

std::size_t TrajectoryStream::draw_next_state(std::size_t from)
{
    const std::size_t n = model_->size();
    const double* row = cumulative_.data() + from * n;
    return pick(row, n, uniform_open(rng_) * row[n - 1]);
}

void TrajectoryStream::advance_to(std::size_t state, bool equilibrium)
{
    current_ = state;
    if (!equilibrium) {
        upcoming_ = draw_next_state(state);
        length_ = model_->sojourns().law(state, upcoming_).sample(rng_);
        return;
    }
    // Next state weighted by p_kj m_kj; residual sojourn from the equilibrium law.
    const std::size_t n = model_->size();
    std::vector<double> w(n);
    double acc = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        const double p = model_->chain()(state, j);
        if (p > 0.0)
            acc += p * model_->sojourns().law(state, j).mean();
        w[j] = acc;
    }
    upcoming_ = pick(w.data(), n, uniform_open(rng_) * acc);
    length_ = model_->sojourns().law(state, upcoming_).equilibrium_sample(rng_);
}

TrajectoryStream TrajectoryStream::from_state(const SemiMarkovModel& model, std::size_t initial_state,
                                              Engine rng)
{
    if (initial_state >= model.size())
        throw std::invalid_argument("TrajectoryStream: initial state index out of range");
    TrajectoryStream s(model, std::move(rng));
    s.advance_to(initial_state, false);
    return s;
}

TrajectoryStream TrajectoryStream::stationary(const SemiMarkovModel& model, const StationaryLaw& law,
                                              Engine rng)
{
    TrajectoryStream s(model, std::move(rng));
    const std::size_t n = model.size();
    std::vector<double> cum(n);
    std::partial_sum(law.nu.data(), law.nu.data() + n, cum.begin());
    const std::size_t k = pick(cum.data(), n, uniform_open(s.rng_) * cum[n - 1]);
    s.advance_to(k, true);
    return s;
}

TrajectoryStream TrajectoryStream::stationary_given(const SemiMarkovModel& model, std::size_t state,
                                                    Engine rng)
{
    if (state >= model.size())
        throw std::invalid_argument("TrajectoryStream: initial state index out of range");
    TrajectoryStream s(model, std::move(rng));
    s.advance_to(state, true);
    return s;
}

TrajectoryStream::Segment TrajectoryStream::next()
{
    const Segment seg{clock_, clock_ + length_, current_};
    clock_ = seg.end;
    advance_to(upcoming_, false);
    return seg;
}

namespace {

Trajectory collect(TrajectoryStream& stream, const SemiMarkovModel& model, double horizon)
{
    Trajectory traj;
    traj.horizon = horizon;
    while (true) {
        const auto seg = stream.next();
        traj.jump_times.push_back(seg.start);
        traj.states.push_back(model.space().label(seg.state));
        if (seg.end >= horizon)
            break;
    }
    return traj;
}

void require_horizon(double horizon)
{
    if (!(horizon > 0.0) || !std::isfinite(horizon))
        throw std::invalid_argument("sample_path: horizon must be positive and finite");
}

}  // namespace

Trajectory sample_path(const SemiMarkovModel& model, int initial_state, double horizon, Engine& rng)
{
    require_horizon(horizon);
    auto stream = TrajectoryStream::from_state(model, model.space().index_of(initial_state), rng);
    Trajectory traj = collect(stream, model, horizon);
    rng = stream.engine();
    return traj;
}

Trajectory sample_stationary_path(const SemiMarkovModel& model, double horizon, Engine& rng)
{
    require_horizon(horizon);
    const StationaryLaw law = stationary_law(model);
    auto stream = TrajectoryStream::stationary(model, law, rng);
    Trajectory traj = collect(stream, model, horizon);
    rng = stream.engine();
    return traj;
}

SamplePath integrate_trajectory(const Trajectory& traj, const Grid& grid, const SamplePath* weight)
{
    const double tol = 1e-9 * std::max(1.0, traj.horizon);
    if (traj.states.empty() || traj.jump_times.size() != traj.states.size())
        throw std::invalid_argument("integrate_trajectory: malformed trajectory");
    if (grid.horizon() > traj.horizon + tol)
        throw std::invalid_argument("integrate_trajectory: grid horizon " + fmt(grid.horizon())
                                    + " exceeds trajectory horizon " + fmt(traj.horizon));
    if (weight && weight->grid.horizon() < grid.horizon() - tol)
        throw std::invalid_argument("integrate_trajectory: weight grid horizon "
                                    + fmt(weight->grid.horizon()) + " does not cover "
                                    + fmt(grid.horizon()));

    // W(t) = int_0^t w, exact for the left-endpoint piecewise-constant weight.
    std::vector<double> cum;
    if (weight) {
        cum.resize(weight->size());
        cum[0] = 0.0;
        for (std::size_t k = 1; k < cum.size(); ++k)
            cum[k] = cum[k - 1] + weight->values[k - 1] * weight->grid.step;
    }
    const auto W = [&](double t) {
        if (!weight)
            return t;
        const std::size_t k = weight->grid.index_at_or_before(t);
        return cum[k] + weight->values[k] * (t - weight->grid.time(k));
    };

    const std::size_t segs = traj.states.size();
    const auto seg_end = [&](std::size_t s) {
        return s + 1 < segs ? traj.jump_times[s + 1] : traj.horizon;
    };

    std::vector<double> out(grid.n_points, 0.0);
    double acc = 0.0;
    std::size_t s = 0;
    for (std::size_t k = 1; k < grid.n_points; ++k) {
        const double t = grid.time(k);
        while (s < segs && seg_end(s) <= t) {
            acc += traj.states[s] * (W(seg_end(s)) - W(traj.jump_times[s]));
            ++s;
        }
        double partial = 0.0;
        if (s < segs && traj.jump_times[s] < t)
            partial = traj.states[s] * (W(t) - W(traj.jump_times[s]));
        out[k] = acc + partial;
    }
    return SamplePath(grid, std::move(out));
}

}  // namespace inertsim
