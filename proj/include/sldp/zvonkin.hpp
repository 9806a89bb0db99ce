#pragma once

#include "sldp/dynamics.hpp"
#include "sldp/errors.hpp"
#include "sldp/grid.hpp"
#include "sldp/problem.hpp"

#include <filesystem>
#include <memory>
#include <string>
#include <vector>

namespace sldp {

struct ZvonkinNorms {
    /// max |u| (Euclidean) over the nodes.
    double u = 0.0;
    /// max spectral norm of the Jacobian of u over the nodes.
    double grad = 0.0;
    /// max Frobenius norm of the second-derivative tensor over the nodes.
    double hess = 0.0;

    double sum() const noexcept { return u + grad + hess; }
};

/// Contraction record of one theta_inv call.
struct InverseTrace {
    /// |x_{k+1} - x_k| per iteration.
    std::vector<double> steps;
    /// steps[k] / steps[k - 1] for k >= 1 (only where steps[k - 1] > 0).
    std::vector<double> ratios;
};

/// Grid solution u_lambda of the resolvent equation and the homeomorphism
/// theta = id + u it induces. Immutable after construction.
class ZvonkinMap {
public:
    ZvonkinMap(double lambda, GridFunction u, double margin);

    double lambda() const noexcept { return lambda_; }
    const GridFunction& u() const noexcept { return u_; }
    const GridFunction& gradient() const noexcept { return grad_; }
    const GridFunction& hessian() const noexcept { return hess_; }
    const ZvonkinNorms& norms() const noexcept { return norms_; }
    /// Norm sum <= 1/2, with a rounding allowance so exact boundary cases (|c|/lambda = 1/2) certify.
    bool certified() const noexcept { return norms_.sum() <= 0.5 + 1e-12; }
    const Box& box() const noexcept { return u_.box(); }
    /// The box shrunk by `margin` per side; paths must stay inside it.
    const Box& interior() const noexcept { return interior_; }
    double margin() const noexcept { return margin_; }
    int dim() const noexcept { return u_.dim(); }

    double residual() const noexcept { return residual_; }
    int iterations() const noexcept { return iterations_; }
    double last_update() const noexcept { return last_update_; }
    void set_solve_record(double residual, int iterations, double last_update) {
        residual_ = residual;
        iterations_ = iterations;
        last_update_ = last_update;
    }

    Vec u_at(const Vec& x) const { return u_(x); }
    /// I + grad u(x), from grid differences of u interpolated multilinearly.
    Mat jacobian(const Vec& x) const;

    /// theta(x) = x + u(x). Throws DomainError outside the box.
    Vec theta(const Vec& x) const;
    /// Banach iteration x <- y - u(x) from x = y until |dx| < tol.
    /// Throws DomainError if the map is not certified or an iterate leaves the box.
    Vec theta_inv(const Vec& y, double tol = 1e-12, InverseTrace* trace = nullptr) const;

    /// "lambda=<v> norms=(a,b,c) sum=<s> certified=<bool>"
    std::string certificate() const;

private:
    double lambda_;
    double margin_;
    GridFunction u_;
    GridFunction grad_;
    GridFunction hess_;
    Box interior_;
    ZvonkinNorms norms_;
    double residual_ = 0.0;
    int iterations_ = 0;
    double last_update_ = 0.0;
};

struct ResolventOptions {
    Box box;
    int resolution = 1201;
    double tol = 1e-10;
    int max_iters = 200;
    double margin = 0.2;
};

/// Solves L u + b + grad_b u = lambda u on the box (Neumann boundary) by
/// Picard iteration on the noisy block of the problem: b is the singular
/// drift, L = 1/2 sum_ij (sigma sigma^T)_ij d_i d_j.
/// Throws ConvergenceError when the update does not fall below tol.
ZvonkinMap solve_resolvent(const SdeProblem& problem, double lambda, const ResolventOptions& options);

/// sup over interior nodes of |L_h u + b + grad_b u - lambda u|.
double resolvent_residual(const SdeProblem& problem, const ZvonkinMap& map);

struct LadderRung {
    double lambda = 0.0;
    bool converged = false;
    int iterations = 0;
    ZvonkinNorms norms;
    bool certified = false;
    std::string note;
};

struct LambdaSearch {
    double lambda0 = 0.0;
    std::shared_ptr<const ZvonkinMap> map;
    std::vector<LadderRung> ladder;
};

/// No certified lambda below the cap; carries the norm trajectory.
class CertificationError : public ConvergenceError {
public:
    CertificationError(const std::string& message, std::vector<LadderRung> ladder)
        : ConvergenceError(message), ladder_(std::move(ladder)) {}
    const std::vector<LadderRung>& ladder() const noexcept { return ladder_; }

private:
    std::vector<LadderRung> ladder_;
};

std::string describe_ladder(const std::vector<LadderRung>& ladder);

/// Tries lambda = lambda_start * growth^k until the map is certified.
/// Rungs where Picard fails to converge are recorded and skipped.
LambdaSearch find_lambda0(const SdeProblem& problem, const ResolventOptions& options, double lambda_start = 1.0,
                          double growth = 2.0, double cap_factor = 1048576.0);

/// The transformed system Y = theta(X) on the noisy block:
///   drift  eps lambda u(x) + (I + grad u(x)) b1^eps(x),  x = theta^-1(y),
///   diffusion (I + grad u(x)) sigma(x).
/// In the degenerate layout the x-block keeps its drift bbar^eps(x, theta^-1 y)
/// and carries no noise and no eps lambda u term.
class TransformedSde final : public Dynamics {
public:
    TransformedSde(SdeProblem problem, std::shared_ptr<const ZvonkinMap> map, double inverse_tol = 1e-12);

    int state_dim() const override { return problem_.state_dim; }
    int noise_offset() const override { return problem_.noise_offset(); }
    Vec start() const override { return to_transformed(problem_.start); }
    double horizon() const override { return problem_.horizon; }
    const Box& domain() const override { return domain_; }
    void evaluate(double eps, const Vec& z, Vec& drift, Mat* diffusion) const override;

    /// Applies theta to the noisy block of a state.
    Vec to_transformed(const Vec& state) const;
    /// Applies theta^-1 to the noisy block of a state.
    Vec to_original(const Vec& state) const;

    const SdeProblem& problem() const noexcept { return problem_; }
    const ZvonkinMap& map() const noexcept { return *map_; }
    std::shared_ptr<const ZvonkinMap> shared_map() const noexcept { return map_; }
    /// Ellipticity constant valid for the transformed diffusion:
    /// K max((1 + |grad u|)^2, (1 - |grad u|)^-2).
    double transformed_ellipticity() const;

private:
    SdeProblem problem_;
    std::shared_ptr<const ZvonkinMap> map_;
    double inverse_tol_;
    Box domain_;
};

/// Writes a JSON header and a CSV of node values (x1..xm,u1..um).
void write_map(const ZvonkinMap& map, const std::filesystem::path& json_path, const std::filesystem::path& csv_path);
/// Reads a map written by write_map; derivative grids and norms are recomputed.
ZvonkinMap read_map(const std::filesystem::path& json_path);

}  // namespace sldp
