#include "sldp/ldp.hpp"

#include "sldp/errors.hpp"
#include "sldp/parallel.hpp"
#include "sldp/rng.hpp"

#include <cmath>
#include <sstream>

namespace sldp {

EventSpec EventSpec::terminal_half_space(const Vec& normal, double level, int offset) {
    EventSpec e;
    e.kind_ = Kind::terminal_half_space;
    e.vector_ = normal;
    e.level_ = level;
    e.offset_ = offset;
    return e;
}

EventSpec EventSpec::terminal_ball(const Vec& center, double radius, int offset) {
    EventSpec e;
    e.kind_ = Kind::terminal_ball;
    e.vector_ = center;
    e.level_ = radius;
    e.offset_ = offset;
    return e;
}

EventSpec EventSpec::path_sup_exceeds(int coordinate, double level) {
    EventSpec e;
    e.kind_ = Kind::path_sup_exceeds;
    e.offset_ = coordinate;
    e.level_ = level;
    return e;
}

EventSpec EventSpec::predicate(Predicate p, std::string description) {
    EventSpec e;
    e.kind_ = Kind::predicate;
    e.predicate_ = std::move(p);
    e.description_ = std::move(description);
    return e;
}

EventSpec EventSpec::whole() {
    EventSpec e;
    e.kind_ = Kind::whole;
    return e;
}

EventSpec EventSpec::empty() {
    EventSpec e;
    e.kind_ = Kind::empty;
    return e;
}

bool EventSpec::hit(const PathSample& path) const {
    switch (kind_) {
        case Kind::terminal_half_space:
            return vector_.dot(path.terminal().segment(offset_, vector_.size())) >= level_;
        case Kind::terminal_ball:
            return (path.terminal().segment(offset_, vector_.size()) - vector_).norm() <= level_;
        case Kind::path_sup_exceeds:
            for (const Vec& z : path.states) {
                if (z[offset_] >= level_) return true;
            }
            return false;
        case Kind::predicate:
            return predicate_(path);
        case Kind::whole:
            return true;
        case Kind::empty:
            return false;
    }
    return false;
}

std::string EventSpec::describe() const {
    std::ostringstream os;
    os.precision(6);
    auto vec = [&](const Vec& v) {
        os << '(';
        for (int i = 0; i < v.size(); ++i) os << (i ? ", " : "") << v[i];
        os << ')';
    };
    switch (kind_) {
        case Kind::terminal_half_space:
            vec(vector_);
            os << " . z_T[" << offset_ + 1 << ".." << offset_ + vector_.size() << "] >= " << level_;
            break;
        case Kind::terminal_ball:
            os << "|z_T[" << offset_ + 1 << ".." << offset_ + vector_.size() << "] - ";
            vec(vector_);
            os << "| <= " << level_;
            break;
        case Kind::path_sup_exceeds:
            os << "sup_t z_t[" << offset_ + 1 << "] >= " << level_;
            break;
        case Kind::predicate:
            os << description_;
            break;
        case Kind::whole:
            os << "whole space";
            break;
        case Kind::empty:
            os << "empty set";
            break;
    }
    os << (closed_ ? " (closed)" : " (open)");
    return os.str();
}

std::optional<Target> EventSpec::as_target() const {
    switch (kind_) {
        case Kind::terminal_half_space:
            return Target::half_space(vector_, level_, offset_);
        case Kind::terminal_ball:
            return Target::ball(vector_, level_, offset_);
        default:
            return std::nullopt;
    }
}

WilsonInterval wilson_interval(long hits, long n, double z) {
    if (n <= 0) return {0.0, 1.0};
    const double nn = static_cast<double>(n);
    const double p = static_cast<double>(hits) / nn;
    const double z2 = z * z;
    const double denom = 1.0 + z2 / nn;
    const double centre = (p + z2 / (2.0 * nn)) / denom;
    const double half = z / denom * std::sqrt(p * (1.0 - p) / nn + z2 / (4.0 * nn * nn));
    WilsonInterval w{std::max(0.0, centre - half), std::min(1.0, centre + half)};
    if (hits == 0) w.lo = 0.0;
    if (hits == n) w.hi = 1.0;
    w.lo = std::min(w.lo, p);
    w.hi = std::max(w.hi, p);
    return w;
}

LadderPoint estimate_probability(const Dynamics& dynamics, const EventSpec& event, double eps, long n_paths,
                                 int n_steps, std::uint64_t seed, int workers) {
    if (n_paths < 100) throw InputError("estimate_probability needs at least 100 paths");
    // 0 = miss, 1 = hit, 2 = escaped
    std::vector<unsigned char> outcome(static_cast<std::size_t>(n_paths), 0);
    parallel_for(outcome.size(), workers, [&](std::size_t i) {
        SimulationOptions so;
        so.path_index = i;
        try {
            const PathSample path = simulate(dynamics, eps, n_steps, seed, so);
            outcome[i] = event.hit(path) ? 1 : 0;
        } catch (const EscapeError&) {
            outcome[i] = 2;
        }
    });
    LadderPoint pt;
    pt.eps = eps;
    pt.n_paths = n_paths;
    for (unsigned char o : outcome) {
        if (o == 1) ++pt.hits;
        if (o == 2) ++pt.escapes;
    }
    const long valid = n_paths - pt.escapes;
    if (valid == 0) throw DomainError("all " + std::to_string(n_paths) + " paths escaped at eps=" + std::to_string(eps));
    pt.p_hat = static_cast<double>(pt.hits) / static_cast<double>(valid);
    const WilsonInterval w = wilson_interval(pt.hits, valid);
    pt.ci_lo = w.lo;
    pt.ci_hi = w.hi;
    return pt;
}

namespace {

struct WlsResult {
    Eigen::VectorXd beta;
    Eigen::MatrixXd cov_unscaled;
    double rss = 0.0;
};

WlsResult weighted_least_squares(const Eigen::MatrixXd& A, const Eigen::VectorXd& y, const Eigen::VectorXd& w) {
    const Eigen::MatrixXd AtW = A.transpose() * w.asDiagonal();
    const Eigen::MatrixXd normal = AtW * A;
    const auto ldlt = normal.ldlt();
    WlsResult r;
    r.beta = ldlt.solve(AtW * y);
    r.cov_unscaled = ldlt.solve(Eigen::MatrixXd::Identity(A.cols(), A.cols()));
    const Eigen::VectorXd res = y - A * r.beta;
    r.rss = (res.array().square() * w.array()).sum();
    return r;
}

}  // namespace

SlopeFit fit_slope(std::span<const LadderPoint> ladder, SlopeModel model) {
    SlopeFit fit;
    fit.model = model;
    std::vector<const LadderPoint*> used;
    for (const auto& p : ladder) {
        if (p.p_hat > 0.0 && p.p_hat < 1.0) {
            used.push_back(&p);
        } else {
            ++fit.dropped_points;
        }
    }
    fit.used_points = static_cast<int>(used.size());
    if (used.size() < 3) {
        throw InputError("slope fit needs at least 3 ladder points with 0 < p_hat < 1 (have " +
                         std::to_string(used.size()) + ")");
    }

    const auto k = static_cast<Eigen::Index>(used.size());
    Eigen::MatrixXd A3(k, 3);
    Eigen::VectorXd y(k), w(k);
    bool sampled = false;
    for (Eigen::Index i = 0; i < k; ++i) {
        const LadderPoint& p = *used[static_cast<std::size_t>(i)];
        A3(i, 0) = 1.0 / p.eps;
        A3(i, 1) = 1.0;
        A3(i, 2) = std::log(p.eps);
        y[i] = std::log(p.p_hat);
        const long n = p.n_paths - p.escapes;
        if (p.n_paths > 0) sampled = true;
        w[i] = p.n_paths > 0 ? static_cast<double>(n) * p.p_hat / (1.0 - p.p_hat) : 1.0;
        fit.points.push_back({A3(i, 0), y[i]});
    }
    const double floor = sampled ? 1.0 : 0.0;
    auto solve = [&](int cols, double& slope, double& std_error, Eigen::VectorXd* beta) {
        const WlsResult r = weighted_least_squares(A3.leftCols(cols), y, w);
        const Eigen::Index dof = k - cols;
        double s2 = floor;
        if (dof > 0) s2 = std::max(r.rss / static_cast<double>(dof), floor);
        slope = r.beta[0];
        std_error = std::sqrt(std::max(0.0, s2 * r.cov_unscaled(0, 0)));
        if (beta) *beta = r.beta;
    };

    solve(2, fit.affine_slope, fit.affine_stderr, nullptr);
    Eigen::VectorXd beta;
    if (model == SlopeModel::affine) {
        solve(2, fit.slope, fit.std_error, &beta);
    } else {
        solve(3, fit.slope, fit.std_error, &beta);
        fit.prefactor_exponent = beta[2];
    }
    fit.intercept = beta[1];
    if (fit.slope > 0.0) {
        std::ostringstream os;
        os << "fitted slope " << fit.slope << " is positive: the probabilities do not decay along the ladder";
        throw ConvergenceError(os.str());
    }
    return fit;
}

double LdpEstimate::max_escape_fraction() const {
    double worst = 0.0;
    for (const auto& p : ladder) {
        if (p.n_paths > 0) worst = std::max(worst, static_cast<double>(p.escapes) / static_cast<double>(p.n_paths));
    }
    return worst;
}

LdpEstimate ldp_experiment(const SdeProblem& problem, const EventSpec& event, std::span<const double> eps_ladder,
                           long n_paths, int n_steps, std::uint64_t seed, bool with_singular, int workers,
                           SlopeModel model) {
    const OriginalDynamics dynamics(problem, with_singular);
    LdpEstimate est;
    est.with_singular = with_singular;
    est.event = event.describe();
    for (std::size_t i = 0; i < eps_ladder.size(); ++i) {
        est.ladder.push_back(estimate_probability(dynamics, event, eps_ladder[i], n_paths, n_steps,
                                                  mix_seed(seed, i), workers));
    }
    est.fit = fit_slope(est.ladder, model);
    return est;
}

BoundCheck bound_check(const SlopeFit& fit, double rate_value, BoundSide side) {
    BoundCheck c;
    c.side = side;
    c.slope = fit.slope;
    c.std_error = fit.std_error;
    c.rate_value = rate_value;
    c.margin = 2.0 * fit.std_error + 0.1 * std::abs(rate_value);
    if (side == BoundSide::upper_for_closed) {
        c.passed = fit.slope <= -rate_value + c.margin;
    } else {
        c.passed = fit.slope >= -rate_value - c.margin;
    }
    return c;
}

BoundCheck bound_check(const LdpEstimate& estimate, const RateResult& rate, BoundSide side) {
    if (!rate.converged) throw InputError("bound_check needs a converged rate");
    return bound_check(estimate.fit, rate.value, side);
}

std::string BoundCheck::describe() const {
    std::ostringstream os;
    os.precision(6);
    if (side == BoundSide::upper_for_closed) {
        os << "upper (closed): slope " << slope << " <= -" << rate_value << " + " << margin;
    } else {
        os << "lower (open): slope " << slope << " >= -" << rate_value << " - " << margin;
    }
    os << (passed ? " pass" : " FAIL");
    return os.str();
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

}  // namespace sldp
