#pragma once

#include "sldp/dynamics.hpp"
#include "sldp/zvonkin.hpp"

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <vector>

namespace sldp {

/// Piecewise-constant control hdot on n_intervals equal intervals of [0, T].
struct ControlPath {
    int n_intervals = 0;
    int dim = 0;
    double horizon = 1.0;
    /// Interval-major, n_intervals x dim.
    std::vector<double> hdot;

    static ControlPath zero(int n_intervals, int dim, double horizon);
    static ControlPath constant(int n_intervals, const Vec& value, double horizon);

    double interval_length() const { return horizon / n_intervals; }
    Vec rate(int interval) const;
    void set_rate(int interval, const Vec& value);
};

/// 1/2 sum |hdot_i|^2 dt.
double action(const ControlPath& h);

struct SkeletonPath {
    std::vector<double> times;
    std::vector<Vec> states;
    ControlPath control;

    const Vec& terminal() const { return states.back(); }
};

/// Classical RK4 on dz = b^0(z) dt + E sigma(z) hdot dt with n_steps a
/// multiple of the control's interval count. Throws EscapeError when the
/// trajectory leaves the dynamics' domain.
SkeletonPath skeleton(const Dynamics& dynamics, const ControlPath& h, int n_steps);

/// Terminal constraint on the coordinates [offset, offset + count) of z_T.
class Target {
public:
    enum class Kind { point, ball, half_space, predicate };
    using Distance = std::function<double(const Vec&)>;

    /// z_T[coords] == center.
    static Target point(const Vec& center, int offset = 0);
    /// |z_T[coords] - center| <= radius.
    static Target ball(const Vec& center, double radius, int offset = 0);
    /// normal . z_T[coords] >= level.
    static Target half_space(const Vec& normal, double level, int offset = 0);
    /// distance(z_T) <= 0 on the full state.
    static Target predicate(Distance distance, std::string description);

    Kind kind() const noexcept { return kind_; }
    int offset() const noexcept { return offset_; }
    int count() const noexcept { return static_cast<int>(center_.size()); }
    const Vec& center() const noexcept { return center_; }
    double radius() const noexcept { return radius_; }
    double level() const noexcept { return level_; }

    /// Signed distance of a terminal state (negative inside); for point
    /// targets the Euclidean distance to the point.
    double signed_distance(const Vec& z) const;
    /// Equality residual z[coords] - center (point targets only).
    Vec residual(const Vec& z) const;
    /// Closest point of the target to z in the target coordinates, when defined.
    std::optional<Vec> nearest(const Vec& z) const;
    std::string describe() const;

private:
    Kind kind_ = Kind::point;
    int offset_ = 0;
    Vec center_;
    double radius_ = 0.0;
    double level_ = 0.0;
    Distance distance_;
    std::string description_;
};

enum class GradientMode { finite_difference, adjoint };

struct RateOptions {
    int n_intervals = 20;
    /// RK4 steps per control interval.
    int steps_per_interval = 5;
    int restarts = 8;
    std::uint64_t seed = 1;
    GradientMode gradient = GradientMode::finite_difference;
    double fd_step = 1e-5;
    double feasibility_tol = 1e-6;
    double penalty_start = 10.0;
    double penalty_growth = 10.0;
    int penalty_stages = 4;
    /// Extra multiplier updates at the final penalty if still infeasible.
    int extra_multiplier_updates = 20;
    int max_iterations = 500;
    int workers = 1;
};

struct RateResult {
    double value = 0.0;
    ControlPath minimizer;
    Vec endpoint;
    double feasibility_residual = 0.0;
    double multistart_spread = 0.0;
    bool converged = false;
    /// Action of each restart (NaN where the restart stayed infeasible).
    std::vector<double> restart_values;
    int n_intervals = 0;
    int restarts = 0;
};

/// Gradient of the penalized objective with respect to hdot, exposed for testing.
struct ObjectiveProbe {
    double value = 0.0;
    std::vector<double> gradient;
};
ObjectiveProbe penalized_objective(const Dynamics& dynamics, const Target& target, const ControlPath& h,
                                   int steps_per_interval, double penalty, const Vec& multiplier,
                                   GradientMode mode, double fd_step = 1e-5);

/// inf of the action over controls whose skeleton endpoint meets the target,
/// by L-BFGS on an augmented Lagrangian with penalty continuation and
/// multistart. Throws ConvergenceError when no restart becomes feasible.
RateResult minimize_rate(const Dynamics& dynamics, const Target& target, const RateOptions& options = {});

/// The same infimum computed on the transformed system, with the target
/// carried through theta (points map to points, other targets compose their
/// distance with theta^-1).
RateResult rate_via_transform(const TransformedSde& tsde, const Target& target, const RateOptions& options = {});
Target transform_target(const TransformedSde& tsde, const Target& target);

struct LevelSetProbe {
    std::vector<SkeletonPath> paths;
    /// max over paths and times of |g_t - g_s| / |t - s|^(1/2).
    double modulus = 0.0;
};

/// Skeletons of controls drawn uniformly from the action ball {action <= c}.
LevelSetProbe level_set_probe(const Dynamics& dynamics, double c, int n_samples, std::uint64_t seed,
                              int n_intervals = 20, int steps_per_interval = 5);

}  // namespace sldp

namespace sldp {

/// sup_t |theta(g^X(h)_t) - g^Y(h)_t| for one control, with the tolerance
/// it should respect: the RK4 error of both skeletons (step doubling) plus
/// the mismatch between grid derivatives of u and the slopes of its
/// interpolant, integrated along the path.
struct SkeletonConjugacy {
    double error = 0.0;
    double ode_tolerance = 0.0;
    double interpolation_tolerance = 0.0;

    double tolerance() const noexcept { return ode_tolerance + interpolation_tolerance; }
};

SkeletonConjugacy skeleton_conjugacy(const TransformedSde& tsde, const ControlPath& h, int n_steps);

/// max over grid cells of |grad u(node) - cell slope of u| at the cell's nodes.
double interpolation_defect(const ZvonkinMap& map);

}  // namespace sldp
