#pragma once

#include "sldp/dynamics.hpp"
#include "sldp/problem.hpp"
#include "sldp/zvonkin.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace sldp {

struct PathSample {
    std::vector<double> times;
    std::vector<Vec> states;
    std::uint64_t seed = 0;
    std::uint64_t path_index = 0;
    double dt = 0.0;
    double epsilon = 0.0;
    /// Brownian increments, step-major (n_steps x noise_dim), when retained.
    std::vector<double> increments;

    const Vec& terminal() const { return states.back(); }
};

struct SimulationOptions {
    std::uint64_t path_index = 0;
    bool retain_increments = false;
    /// Drive the path with these increments (n_steps x noise_dim) instead of
    /// drawing from (seed, path_index).
    std::span<const double> increments;
};

/// Brownian increments dW_k ~ N(0, dt I), a pure function of
/// (seed, path_index, k). Step-major, n_steps x noise_dim.
std::vector<double> brownian_increments(std::uint64_t seed, std::uint64_t path_index, int n_steps, int noise_dim,
                                        double dt);

/// Sums consecutive blocks of `factor` steps: increments for a grid
/// `factor` times coarser driven by the same Brownian path.
std::vector<double> coarsen_increments(std::span<const double> fine, int noise_dim, int factor);

/// Explicit Euler-Maruyama on a uniform grid of n_steps over [0, T]:
///   z_{k+1} = z_k + drift_eps(z_k) dt + sqrt(eps) E sigma(z_k) dW_k.
/// Throws EscapeError when the state leaves the dynamics' domain and
/// EvaluationError on non-finite states.
PathSample simulate(const Dynamics& dynamics, double eps, int n_steps, std::uint64_t seed,
                    const SimulationOptions& options = {});

PathSample simulate_original(const SdeProblem& problem, double eps, int n_steps, std::uint64_t seed,
                             const SimulationOptions& options = {});
PathSample simulate_transformed(const TransformedSde& tsde, double eps, int n_steps, std::uint64_t seed,
                                const SimulationOptions& options = {});
/// Degenerate layout only; the x-block takes drift steps only.
PathSample simulate_degenerate(const SdeProblem& problem, double eps, int n_steps, std::uint64_t seed,
                               const SimulationOptions& options = {});

struct ConjugacyOptions {
    /// Paths averaged; the result is the root mean square of per-path sups.
    int n_paths = 1;
    /// When larger than n_steps, increments are drawn on this finer grid and
    /// block-summed, so runs at different n_steps share Brownian paths.
    int fine_steps = 0;
    std::uint64_t first_path = 0;
};

/// Simulates X (original, singular drift on) and Y (transformed) with the
/// same increments and returns sup_k |theta(X_k) - Y_k| (RMS over paths).
/// X must stay in the map's interior box.
double conjugacy_check(const SdeProblem& problem, std::shared_ptr<const ZvonkinMap> map, double eps, int n_steps,
                       std::uint64_t seed, const ConjugacyOptions& options = {});

/// Per-batch bookkeeping for the simulate verb.
struct BatchSummary {
    long n_paths = 0;
    double epsilon = 0.0;
    double dt = 0.0;
    long escapes = 0;
    double wall_time = 0.0;
};

}  // namespace sldp
