#include "sldp/action.hpp"

#include "sldp/errors.hpp"
#include "sldp/parallel.hpp"
#include "sldp/rng.hpp"

#include <ceres/gradient_problem.h>
#include <ceres/gradient_problem_solver.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace sldp {

ControlPath ControlPath::zero(int n_intervals, int dim, double horizon) {
    if (n_intervals < 1 || dim < 1) throw InputError("control needs at least one interval and one dimension");
    if (!(horizon > 0.0)) throw InputError("control horizon must be positive");
    ControlPath h;
    h.n_intervals = n_intervals;
    h.dim = dim;
    h.horizon = horizon;
    h.hdot.assign(static_cast<std::size_t>(n_intervals) * dim, 0.0);
    return h;
}

ControlPath ControlPath::constant(int n_intervals, const Vec& value, double horizon) {
    ControlPath h = zero(n_intervals, static_cast<int>(value.size()), horizon);
    for (int i = 0; i < n_intervals; ++i) h.set_rate(i, value);
    return h;
}

Vec ControlPath::rate(int interval) const {
    return Eigen::Map<const Eigen::VectorXd>(hdot.data() + static_cast<std::size_t>(interval) * dim, dim);
}

void ControlPath::set_rate(int interval, const Vec& value) {
    for (int j = 0; j < dim; ++j) hdot[static_cast<std::size_t>(interval) * dim + j] = value[j];
}

double action(const ControlPath& h) {
    double s = 0.0;
    for (double v : h.hdot) s += v * v;
    return 0.5 * s * h.interval_length();
}

namespace {

/// f(z) = b^0(z) + E sigma(z) w.
struct ControlledField {
    const Dynamics& dyn;
    int n;
    int off;
    int m;

    explicit ControlledField(const Dynamics& d)
        : dyn(d), n(d.state_dim()), off(d.noise_offset()), m(d.noise_dim()) {}

    void operator()(const Vec& z, const Vec& w, Vec& out, Mat* sigma_out = nullptr) const {
        Mat sigma;
        dyn.evaluate(0.0, z, out, &sigma);
        out.segment(off, m) += sigma * w;
        if (sigma_out) *sigma_out = sigma;
    }
};

void check_grid(const ControlPath& h, int n_steps) {
    if (h.n_intervals < 1 || n_steps < h.n_intervals || n_steps % h.n_intervals != 0) {
        throw InputError("skeleton steps must be a positive multiple of the control intervals");
    }
}

}  // namespace

SkeletonPath skeleton(const Dynamics& dynamics, const ControlPath& h, int n_steps) {
    check_grid(h, n_steps);
    if (h.dim != dynamics.noise_dim()) throw InputError("control dimension does not match the noise dimension");
    if (std::abs(h.horizon - dynamics.horizon()) > 1e-12 * dynamics.horizon()) {
        throw InputError("control horizon does not match the problem horizon");
    }
    const ControlledField f(dynamics);
    const int per = n_steps / h.n_intervals;
    const double dt = h.horizon / n_steps;

    SkeletonPath path;
    path.control = h;
    path.times.resize(static_cast<std::size_t>(n_steps) + 1);
    for (int k = 0; k <= n_steps; ++k) path.times[k] = k == n_steps ? h.horizon : k * dt;
    path.states.reserve(static_cast<std::size_t>(n_steps) + 1);
    Vec z = dynamics.start();
    path.states.push_back(z);
    Vec k1(f.n), k2(f.n), k3(f.n), k4(f.n);
    for (int k = 0; k < n_steps; ++k) {
        const Vec w = h.rate(k / per);
        try {
            f(z, w, k1);
            f(z + 0.5 * dt * k1, w, k2);
            f(z + 0.5 * dt * k2, w, k3);
            f(z + dt * k3, w, k4);
        } catch (const EscapeError&) {
            throw;
        } catch (const DomainError& e) {
            throw EscapeError(std::string("skeleton: ") + e.what(), k);
        }
        z += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        if (!z.allFinite()) throw EvaluationError("skeleton: non-finite state at step " + std::to_string(k + 1));
        if (!dynamics.domain().contains(z)) {
            throw EscapeError("skeleton left the domain " + dynamics.domain().describe(), k + 1);
        }
        path.states.push_back(z);
    }
    return path;
}

// --- targets ---------------------------------------------------------------

Target Target::point(const Vec& center, int offset) {
    Target t;
    t.kind_ = Kind::point;
    t.center_ = center;
    t.offset_ = offset;
    return t;
}

Target Target::ball(const Vec& center, double radius, int offset) {
    if (!(radius >= 0.0)) throw InputError("ball radius must be nonnegative");
    Target t;
    t.kind_ = Kind::ball;
    t.center_ = center;
    t.radius_ = radius;
    t.offset_ = offset;
    return t;
}

Target Target::half_space(const Vec& normal, double level, int offset) {
    if (!(normal.norm() > 0.0)) throw InputError("half-space normal must be nonzero");
    Target t;
    t.kind_ = Kind::half_space;
    t.center_ = normal;
    t.level_ = level;
    t.offset_ = offset;
    return t;
}

Target Target::predicate(Distance distance, std::string description) {
    Target t;
    t.kind_ = Kind::predicate;
    t.distance_ = std::move(distance);
    t.description_ = std::move(description);
    return t;
}

Vec Target::residual(const Vec& z) const { return z.segment(offset_, count()) - center_; }

double Target::signed_distance(const Vec& z) const {
    switch (kind_) {
        case Kind::point:
            return residual(z).norm();
        case Kind::ball:
            return residual(z).norm() - radius_;
        case Kind::half_space:
            return (level_ - center_.dot(z.segment(offset_, count()))) / center_.norm();
        case Kind::predicate:
            return distance_(z);
    }
    return 0.0;
}

std::optional<Vec> Target::nearest(const Vec& z) const {
    const Vec y = kind_ == Kind::predicate ? Vec() : Vec(z.segment(offset_, count()));
    switch (kind_) {
        case Kind::point:
            return center_;
        case Kind::ball: {
            const Vec d = y - center_;
            const double r = d.norm();
            if (r <= radius_) return y;
            return Vec(center_ + d * (radius_ / r));
        }
        case Kind::half_space: {
            const double s = center_.dot(y);
            if (s >= level_) return y;
            return Vec(y + center_ * ((level_ - s) / center_.squaredNorm()));
        }
        case Kind::predicate:
            return std::nullopt;
    }
    return std::nullopt;
}

std::string Target::describe() const {
    std::ostringstream os;
    os.precision(6);
    auto vec = [&](const Vec& v) {
        os << '(';
        for (int i = 0; i < v.size(); ++i) os << (i ? ", " : "") << v[i];
        os << ')';
    };
    switch (kind_) {
        case Kind::point:
            os << "endpoint z[" << offset_ + 1 << ".." << offset_ + count() << "] = ";
            vec(center_);
            break;
        case Kind::ball:
            os << "ball |z[" << offset_ + 1 << ".." << offset_ + count() << "] - ";
            vec(center_);
            os << "| <= " << radius_;
            break;
        case Kind::half_space:
            os << "half-space ";
            vec(center_);
            os << " . z[" << offset_ + 1 << ".." << offset_ + count() << "] >= " << level_;
            break;
        case Kind::predicate:
            os << "predicate " << description_;
            break;
    }
    return os.str();
}

// --- penalized objective -----------------------------------------------------

namespace {

/// Augmented-Lagrangian terminal term and its gradient in the full state.
struct TerminalPenalty {
    const Target& target;
    double rho;
    Vec mu;

    double value(const Vec& z, Vec* grad) const {
        if (target.kind() == Target::Kind::point) {
            const Vec r = target.residual(z);
            if (grad) {
                *grad = Vec::Zero(z.size());
                grad->segment(target.offset(), target.count()) = mu + rho * r;
            }
            return mu.dot(r) + 0.5 * rho * r.squaredNorm();
        }
        const double g = target.signed_distance(z);
        const double shifted = std::max(0.0, mu[0] + rho * g);
        if (grad) {
            *grad = Vec::Zero(z.size());
            if (shifted > 0.0) *grad = shifted * distance_gradient(z);
        }
        return (shifted * shifted - mu[0] * mu[0]) / (2.0 * rho);
    }

    Vec distance_gradient(const Vec& z) const {
        Vec g = Vec::Zero(z.size());
        const int off = target.offset();
        switch (target.kind()) {
            case Target::Kind::ball: {
                const Vec d = target.residual(z);
                const double r = d.norm();
                if (r > 0.0) g.segment(off, target.count()) = d / r;
                return g;
            }
            case Target::Kind::half_space:
                g.segment(off, target.count()) = -target.center() / target.center().norm();
                return g;
            default:
                break;
        }
        for (int i = 0; i < z.size(); ++i) {
            const double step = 1e-7 * std::max(1.0, std::abs(z[i]));
            Vec zp = z, zm = z;
            zp[i] += step;
            zm[i] -= step;
            g[i] = (target.signed_distance(zp) - target.signed_distance(zm)) / (2.0 * step);
        }
        return g;
    }

    double feasibility(const Vec& z) const {
        if (target.kind() == Target::Kind::point) return target.residual(z).norm();
        return std::max(0.0, target.signed_distance(z));
    }

    void update_multiplier(const Vec& z) {
        if (target.kind() == Target::Kind::point) {
            mu += rho * target.residual(z);
        } else {
            mu[0] = std::max(0.0, mu[0] + rho * target.signed_distance(z));
        }
    }
};

struct Evaluator {
    const Dynamics& dyn;
    const TerminalPenalty& penalty;
    const ControlPath& shape;
    int steps_per_interval;
    GradientMode mode;
    double fd_step;

    ControlPath control(const double* x) const {
        ControlPath h = shape;
        std::copy(x, x + h.hdot.size(), h.hdot.begin());
        return h;
    }

    /// Throws DomainError/EvaluationError when the skeleton is undefined.
    double value(const double* x) const {
        const ControlPath h = control(x);
        const SkeletonPath g = skeleton(dyn, h, h.n_intervals * steps_per_interval);
        return action(h) + penalty.value(g.terminal(), nullptr);
    }

    double value_and_gradient(const double* x, double* grad) const {
        const std::size_t p = shape.hdot.size();
        if (mode == GradientMode::finite_difference) {
            const double v = value(x);
            std::vector<double> xs(x, x + p);
            for (std::size_t i = 0; i < p; ++i) {
                const double step = fd_step * std::max(1.0, std::abs(x[i]));
                const double keep = xs[i];
                xs[i] = keep + step;
                const double up = value(xs.data());
                xs[i] = keep - step;
                const double down = value(xs.data());
                xs[i] = keep;
                grad[i] = (up - down) / (2.0 * step);
            }
            return v;
        }
        return adjoint(x, grad);
    }

    /// Discrete adjoint of RK4; state Jacobians by central differences.
    double adjoint(const double* x, double* grad) const {
        const ControlPath h = control(x);
        const ControlledField f(dyn);
        const int n = f.n;
        const int off = f.off;
        const int m = f.m;
        const int n_steps = h.n_intervals * steps_per_interval;
        const double dt = h.horizon / n_steps;

        struct Stage {
            Vec s;
            Mat sigma;
        };
        std::vector<std::array<Stage, 4>> stages(static_cast<std::size_t>(n_steps));
        Vec z = dyn.start();
        Vec k1(n), k2(n), k3(n), k4(n);
        for (int k = 0; k < n_steps; ++k) {
            const Vec w = h.rate(k / steps_per_interval);
            auto& st = stages[static_cast<std::size_t>(k)];
            st[0].s = z;
            f(st[0].s, w, k1, &st[0].sigma);
            st[1].s = z + 0.5 * dt * k1;
            f(st[1].s, w, k2, &st[1].sigma);
            st[2].s = z + 0.5 * dt * k2;
            f(st[2].s, w, k3, &st[2].sigma);
            st[3].s = z + dt * k3;
            f(st[3].s, w, k4, &st[3].sigma);
            z += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            if (!z.allFinite()) throw EvaluationError("skeleton: non-finite state");
            if (!dyn.domain().contains(z)) throw EscapeError("skeleton left the domain", k + 1);
        }
        Vec lambda;
        const double value = action(h) + penalty.value(z, &lambda);

        const double hstep = h.interval_length();
        for (std::size_t i = 0; i < h.hdot.size(); ++i) grad[i] = h.hdot[i] * hstep;

        auto jacobian_t = [&](const Vec& s, const Vec& w, const Vec& adj) {
            // returns (df/dz)^T adj
            Vec out(n);
            Vec fp(n), fm(n);
            for (int i = 0; i < n; ++i) {
                const double step = 1e-6 * std::max(1.0, std::abs(s[i]));
                Vec sp = s, sm = s;
                sp[i] += step;
                sm[i] -= step;
                f(sp, w, fp);
                f(sm, w, fm);
                out[i] = adj.dot(fp - fm) / (2.0 * step);
            }
            return out;
        };

        for (int k = n_steps - 1; k >= 0; --k) {
            const int interval = k / steps_per_interval;
            const Vec w = h.rate(interval);
            const auto& st = stages[static_cast<std::size_t>(k)];
            Vec gk[4];
            gk[0] = dt / 6.0 * lambda;
            gk[1] = dt / 3.0 * lambda;
            gk[2] = dt / 3.0 * lambda;
            gk[3] = dt / 6.0 * lambda;
            Vec zbar = lambda;
            Vec wbar = Vec::Zero(m);
            for (int j = 3; j >= 0; --j) {
                wbar += st[j].sigma.transpose() * gk[j].segment(off, m);
                const Vec sbar = jacobian_t(st[j].s, w, gk[j]);
                zbar += sbar;
                if (j == 3) gk[2] += dt * sbar;
                if (j == 2) gk[1] += 0.5 * dt * sbar;
                if (j == 1) gk[0] += 0.5 * dt * sbar;
            }
            for (int i = 0; i < m; ++i) grad[static_cast<std::size_t>(interval) * m + i] += wbar[i];
            lambda = zbar;
        }
        return value;
    }
};

class CeresObjective final : public ceres::FirstOrderFunction {
public:
    explicit CeresObjective(const Evaluator& e) : e_(e) {}

    bool Evaluate(const double* parameters, double* cost, double* gradient) const override {
        try {
            *cost = gradient ? e_.value_and_gradient(parameters, gradient) : e_.value(parameters);
        } catch (const DomainError&) {
            return false;
        } catch (const EvaluationError&) {
            return false;
        }
        if (!std::isfinite(*cost)) return false;
        if (gradient) {
            for (int i = 0; i < NumParameters(); ++i) {
                if (!std::isfinite(gradient[i])) return false;
            }
        }
        return true;
    }

    int NumParameters() const override { return static_cast<int>(e_.shape.hdot.size()); }

private:
    const Evaluator& e_;
};

struct RestartOutcome {
    ControlPath h;
    Vec endpoint;
    double residual = std::numeric_limits<double>::infinity();
    bool solver_ok = false;
    bool valid = false;
};

RestartOutcome run_restart(const Dynamics& dyn, const Target& target, ControlPath init, const RateOptions& opt) {
    TerminalPenalty penalty{target, opt.penalty_start,
                            target.kind() == Target::Kind::point ? Vec(Vec::Zero(target.count())) : Vec(Vec::Zero(1))};
    std::vector<double> x = init.hdot;
    RestartOutcome out;
    out.h = init;

    ceres::GradientProblemSolver::Options so;
    so.line_search_direction_type = ceres::LBFGS;
    so.max_num_iterations = opt.max_iterations;
    so.function_tolerance = 1e-14;
    so.gradient_tolerance = 1e-11;
    so.parameter_tolerance = 1e-14;
    so.logging_type = ceres::SILENT;
    so.minimizer_progress_to_stdout = false;

    const int total = opt.penalty_stages + opt.extra_multiplier_updates;
    for (int stage = 0; stage < total; ++stage) {
        const Evaluator ev{dyn, penalty, init, opt.steps_per_interval, opt.gradient, opt.fd_step};
        ceres::GradientProblem problem(new CeresObjective(ev));
        ceres::GradientProblemSolver::Summary summary;
        ceres::Solve(so, problem, x.data(), &summary);
        out.solver_ok = summary.termination_type != ceres::FAILURE;

        ControlPath h = init;
        h.hdot = x;
        SkeletonPath g;
        try {
            g = skeleton(dyn, h, h.n_intervals * opt.steps_per_interval);
        } catch (const DomainError&) {
            return out;
        } catch (const EvaluationError&) {
            return out;
        }
        out.h = h;
        out.endpoint = g.terminal();
        out.residual = penalty.feasibility(g.terminal());
        out.valid = true;
        const bool last_growth_stage = stage >= opt.penalty_stages - 1;
        if (last_growth_stage && out.residual <= opt.feasibility_tol) break;
        penalty.update_multiplier(g.terminal());
        if (stage < opt.penalty_stages - 1) penalty.rho *= opt.penalty_growth;
    }
    return out;
}

ControlPath initial_control(const Dynamics& dyn, const Target& target, const RateOptions& opt, int restart) {
    const int m = dyn.noise_dim();
    const int off = dyn.noise_offset();
    const double T = dyn.horizon();
    ControlPath h = ControlPath::zero(opt.n_intervals, m, T);
    if (restart == 0) return h;

    Vec teleport = Vec::Zero(m);
    try {
        const SkeletonPath free = skeleton(dyn, h, opt.n_intervals * opt.steps_per_interval);
        const Vec zT = free.terminal();
        if (auto p = target.nearest(zT)) {
            Vec delta = Vec::Zero(zT.size());
            delta.segment(target.offset(), target.count()) = *p - zT.segment(target.offset(), target.count());
            Vec d0;
            Mat sigma;
            dyn.evaluate(0.0, dyn.start(), d0, &sigma);
            teleport = sigma.fullPivLu().solve(Eigen::VectorXd(delta.segment(off, m))) / T;
        }
    } catch (const Error&) {
    }
    for (int i = 0; i < opt.n_intervals; ++i) h.set_rate(i, teleport);
    if (restart == 1) return h;

    const CounterRng rng(opt.seed);
    const double scale = 0.5 * (1.0 + teleport.norm());
    std::vector<double> noise(static_cast<std::size_t>(m));
    for (int i = 0; i < opt.n_intervals; ++i) {
        rng.normals(static_cast<std::uint64_t>(restart), static_cast<std::uint32_t>(i), noise);
        for (int j = 0; j < m; ++j) h.hdot[static_cast<std::size_t>(i) * m + j] += scale * noise[j];
    }
    return h;
}

}  // namespace

ObjectiveProbe penalized_objective(const Dynamics& dynamics, const Target& target, const ControlPath& h,
                                   int steps_per_interval, double penalty, const Vec& multiplier,
                                   GradientMode mode, double fd_step) {
    const TerminalPenalty p{target, penalty, multiplier};
    const Evaluator ev{dynamics, p, h, steps_per_interval, mode, fd_step};
    ObjectiveProbe out;
    out.gradient.resize(h.hdot.size());
    out.value = ev.value_and_gradient(h.hdot.data(), out.gradient.data());
    return out;
}

RateResult minimize_rate(const Dynamics& dynamics, const Target& target, const RateOptions& options) {
    if (options.restarts < 1) throw InputError("restarts must be at least 1");
    if (options.n_intervals < 1 || options.steps_per_interval < 1) throw InputError("control grid is empty");
    if (target.kind() != Target::Kind::predicate &&
        target.offset() + target.count() > dynamics.state_dim()) {
        throw InputError("target coordinates exceed the state dimension");
    }

    std::vector<RestartOutcome> outcomes(static_cast<std::size_t>(options.restarts));
    parallel_for(outcomes.size(), options.workers, [&](std::size_t r) {
        outcomes[r] = run_restart(dynamics, target, initial_control(dynamics, target, options, static_cast<int>(r)),
                                  options);
    });

    RateResult result;
    result.n_intervals = options.n_intervals;
    result.restarts = options.restarts;
    int best = -1;
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    double best_infeasible = std::numeric_limits<double>::infinity();
    for (std::size_t r = 0; r < outcomes.size(); ++r) {
        const auto& o = outcomes[r];
        const bool feasible = o.valid && o.residual <= options.feasibility_tol;
        const double v = feasible ? action(o.h) : std::numeric_limits<double>::quiet_NaN();
        result.restart_values.push_back(v);
        if (!feasible) {
            best_infeasible = std::min(best_infeasible, o.residual);
            continue;
        }
        lo = std::min(lo, v);
        hi = std::max(hi, v);
        if (best < 0 || v < action(outcomes[static_cast<std::size_t>(best)].h)) best = static_cast<int>(r);
    }
    if (best < 0) {
        std::ostringstream os;
        os << "no feasible control for target " << target.describe() << "; best infeasible distance "
           << best_infeasible;
        throw ConvergenceError(os.str());
    }
    const auto& o = outcomes[static_cast<std::size_t>(best)];
    result.minimizer = o.h;
    result.value = action(o.h);
    result.endpoint = o.endpoint;
    result.feasibility_residual = o.residual;
    result.multistart_spread = hi - lo;
    result.converged = o.solver_ok;
    return result;
}

Target transform_target(const TransformedSde& tsde, const Target& target) {
    const int off = tsde.noise_offset();
    const int m = tsde.noise_dim();
    if (target.kind() != Target::Kind::predicate) {
        const int a = target.offset();
        const int b = target.offset() + target.count();
        if (b <= off) return target;  // x-block only: untouched by theta
        if (target.kind() == Target::Kind::point && a == off && b == off + m) {
            return Target::point(tsde.map().theta(target.center()), off);
        }
    }
    const Target original = target;
    const TransformedSde* t = &tsde;
    return Target::predicate([original, t](const Vec& y) { return original.signed_distance(t->to_original(y)); },
                             "theta(" + target.describe() + ")");
}

RateResult rate_via_transform(const TransformedSde& tsde, const Target& target, const RateOptions& options) {
    return minimize_rate(tsde, transform_target(tsde, target), options);
}

LevelSetProbe level_set_probe(const Dynamics& dynamics, double c, int n_samples, std::uint64_t seed,
                              int n_intervals, int steps_per_interval) {
    if (!(c >= 0.0)) throw InputError("level c must be nonnegative");
    const int m = dynamics.noise_dim();
    const double T = dynamics.horizon();
    const int n_steps = n_intervals * steps_per_interval;
    LevelSetProbe probe;
    const std::size_t D = static_cast<std::size_t>(n_intervals) * m;
    const CounterRng rng(seed);
    const double radius = std::sqrt(2.0 * c / (T / n_intervals));
    const int count = c == 0.0 ? 1 : n_samples;
    for (int s = 0; s < count; ++s) {
        ControlPath h = ControlPath::zero(n_intervals, m, T);
        if (c > 0.0) {
            std::vector<double> xi(D + 1);
            rng.normals(static_cast<std::uint64_t>(s), 0, std::span<double>(xi.data(), D));
            rng.uniforms(static_cast<std::uint64_t>(s), 1, std::span<double>(xi.data() + D, 1));
            double norm = 0.0;
            for (std::size_t i = 0; i < D; ++i) norm += xi[i] * xi[i];
            norm = std::sqrt(norm);
            const double r = radius * std::pow(xi[D], 1.0 / static_cast<double>(D));
            for (std::size_t i = 0; i < D; ++i) h.hdot[i] = r * xi[i] / norm;
        }
        SkeletonPath g = skeleton(dynamics, h, n_steps);
        for (std::size_t a = 0; a < g.states.size(); ++a) {
            for (std::size_t b = a + 1; b < g.states.size(); ++b) {
                const double ratio = (g.states[b] - g.states[a]).norm() / std::sqrt(g.times[b] - g.times[a]);
                probe.modulus = std::max(probe.modulus, ratio);
            }
        }
        probe.paths.push_back(std::move(g));
    }
    return probe;
}

}  // namespace sldp

namespace sldp {

double interpolation_defect(const ZvonkinMap& map) {
    const GridFunction& u = map.u();
    const GridFunction& g = map.gradient();
    const int m = u.dim();
    const int n = u.resolution();
    double worst = 0.0;
    for (std::size_t p = 0; p < u.node_count(); ++p) {
        const auto idx = u.multi_index(p);
        for (int a = 0; a < m; ++a) {
            if (idx[a] == n - 1) continue;
            const std::size_t q = p + u.stride(a);
            for (int c = 0; c < u.components(); ++c) {
                const double slope = (u.at(q, c) - u.at(p, c)) / u.spacing(a);
                worst = std::max(worst, std::abs(g.at(p, c * m + a) - slope));
                worst = std::max(worst, std::abs(g.at(q, c * m + a) - slope));
            }
        }
    }
    return worst;
}

SkeletonConjugacy skeleton_conjugacy(const TransformedSde& tsde, const ControlPath& h, int n_steps) {
    const OriginalDynamics original(tsde.problem(), false);
    const SkeletonPath gx = skeleton(original, h, n_steps);
    const SkeletonPath gy = skeleton(tsde, h, n_steps);
    const SkeletonPath gx2 = skeleton(original, h, 2 * n_steps);
    const SkeletonPath gy2 = skeleton(tsde, h, 2 * n_steps);

    SkeletonConjugacy out;
    double length = 0.0;
    double ode = 0.0;
    for (std::size_t k = 0; k < gx.states.size(); ++k) {
        out.error = std::max(out.error, (tsde.to_transformed(gx.states[k]) - gy.states[k]).norm());
        ode = std::max(ode, (gx.states[k] - gx2.states[2 * k]).norm() + (gy.states[k] - gy2.states[2 * k]).norm());
        if (k > 0) length += (gx.states[k] - gx.states[k - 1]).norm();
    }
    out.ode_tolerance = ode;
    out.interpolation_tolerance = interpolation_defect(tsde.map()) * length;
    return out;
}

}  // namespace sldp
