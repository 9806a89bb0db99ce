#pragma once

#include "sldp/action.hpp"
#include "sldp/dynamics.hpp"
#include "sldp/simulate.hpp"

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace sldp {

/// A path event. The open/closed flag is a declared label selecting which
/// large-deviation bound a comparison exercises.
class EventSpec {
public:
    enum class Kind { terminal_half_space, terminal_ball, path_sup_exceeds, predicate, whole, empty };
    using Predicate = std::function<bool(const PathSample&)>;

    /// normal . z_T[offset..] >= level.
    static EventSpec terminal_half_space(const Vec& normal, double level, int offset = 0);
    /// |z_T[offset..] - center| <= radius.
    static EventSpec terminal_ball(const Vec& center, double radius, int offset = 0);
    /// max_k z_k[coordinate] >= level.
    static EventSpec path_sup_exceeds(int coordinate, double level);
    static EventSpec predicate(Predicate p, std::string description);
    static EventSpec whole();
    static EventSpec empty();

    EventSpec& set_closed(bool closed) {
        closed_ = closed;
        return *this;
    }
    bool closed() const noexcept { return closed_; }
    Kind kind() const noexcept { return kind_; }

    bool hit(const PathSample& path) const;
    std::string describe() const;
    /// Terminal events as rate targets; nullopt for the others.
    std::optional<Target> as_target() const;

private:
    Kind kind_ = Kind::whole;
    bool closed_ = true;
    int offset_ = 0;
    Vec vector_;
    double level_ = 0.0;
    Predicate predicate_;
    std::string description_;
};

struct WilsonInterval {
    double lo = 0.0;
    double hi = 1.0;
};

inline constexpr double kWilsonZ95 = 1.959963984540054;

WilsonInterval wilson_interval(long hits, long n, double z = kWilsonZ95);

struct LadderPoint {
    double eps = 0.0;
    long n_paths = 0;
    long hits = 0;
    long escapes = 0;
    /// hits / (n_paths - escapes).
    double p_hat = 0.0;
    double ci_lo = 0.0;
    double ci_hi = 1.0;
};

/// Naive Monte Carlo over paths 0..n_paths-1 of the seed. Escaped paths are
/// counted separately and excluded from the frequency.
LadderPoint estimate_probability(const Dynamics& dynamics, const EventSpec& event, double eps, long n_paths,
                                 int n_steps, std::uint64_t seed, int workers = 1);

enum class SlopeModel {
    /// log p = s / eps + c + kappa log eps.
    power_prefactor,
    /// log p = s / eps + c.
    affine,
};

struct SlopeFit {
    SlopeModel model = SlopeModel::power_prefactor;
    double slope = 0.0;
    double std_error = 0.0;
    double intercept = 0.0;
    double prefactor_exponent = 0.0;
    /// The affine fit on the same points, reported alongside.
    double affine_slope = 0.0;
    double affine_stderr = 0.0;
    int used_points = 0;
    int dropped_points = 0;
    /// (1/eps, log p_hat) of the used points.
    std::vector<std::array<double, 2>> points;
};

/// Weighted least squares of log p_hat on 1/eps. Weights are the inverse
/// delta-method variances n p / (1 - p); points with n_paths == 0 are
/// treated as exact (unit weights, no variance floor). Zero-hit and p = 1
/// points are dropped. Needs at least 3 usable points (and one more than
/// the model's parameter count for a residual-based error).
SlopeFit fit_slope(std::span<const LadderPoint> ladder, SlopeModel model = SlopeModel::power_prefactor);

struct LdpEstimate {
    std::vector<LadderPoint> ladder;
    SlopeFit fit;
    bool with_singular = true;
    std::string event;

    double max_escape_fraction() const;
};

/// Runs estimate_probability over the ladder (ladder point k uses the seed
/// mix_seed(seed, k), shared between runs with and without the singular
/// drift) and fits the slope.
LdpEstimate ldp_experiment(const SdeProblem& problem, const EventSpec& event, std::span<const double> eps_ladder,
                           long n_paths, int n_steps, std::uint64_t seed, bool with_singular, int workers = 1,
                           SlopeModel model = SlopeModel::power_prefactor);

enum class BoundSide { upper_for_closed, lower_for_open };

struct BoundCheck {
    BoundSide side = BoundSide::upper_for_closed;
    double slope = 0.0;
    double std_error = 0.0;
    double rate_value = 0.0;
    double margin = 0.0;
    bool passed = false;

    std::string describe() const;
};

/// upper: slope <= -value + margin; lower: slope >= -value - margin, with
/// margin = 2 stderr + 0.1 |value|. Throws InputError if the rate did not converge.
BoundCheck bound_check(const LdpEstimate& estimate, const RateResult& rate, BoundSide side);
BoundCheck bound_check(const SlopeFit& fit, double rate_value, BoundSide side);

/// Standard normal distribution function.
double normal_cdf(double x);

}  // namespace sldp
