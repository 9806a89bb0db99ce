#include "sldp/simulate.hpp"

#include "sldp/errors.hpp"
#include "sldp/rng.hpp"

#include <cmath>

namespace sldp {

std::vector<double> brownian_increments(std::uint64_t seed, std::uint64_t path_index, int n_steps, int noise_dim,
                                        double dt) {
    const CounterRng rng(seed);
    std::vector<double> dw(static_cast<std::size_t>(n_steps) * noise_dim);
    const double scale = std::sqrt(dt);
    for (int k = 0; k < n_steps; ++k) {
        std::span<double> row(dw.data() + static_cast<std::size_t>(k) * noise_dim, noise_dim);
        rng.normals(path_index, static_cast<std::uint32_t>(k), row);
        for (double& v : row) v *= scale;
    }
    return dw;
}

std::vector<double> coarsen_increments(std::span<const double> fine, int noise_dim, int factor) {
    if (factor < 1 || fine.size() % (static_cast<std::size_t>(noise_dim) * factor) != 0) {
        throw InputError("fine increments do not split into blocks of " + std::to_string(factor));
    }
    const std::size_t coarse_steps = fine.size() / noise_dim / factor;
    std::vector<double> out(coarse_steps * noise_dim, 0.0);
    for (std::size_t k = 0; k < coarse_steps; ++k) {
        for (int j = 0; j < factor; ++j) {
            for (int i = 0; i < noise_dim; ++i) {
                out[k * noise_dim + i] += fine[(k * factor + j) * noise_dim + i];
            }
        }
    }
    return out;
}

PathSample simulate(const Dynamics& dynamics, double eps, int n_steps, std::uint64_t seed,
                    const SimulationOptions& options) {
    if (n_steps < 1) throw InputError("n_steps must be at least 1");
    if (!(eps >= 0.0)) throw InputError("eps must be nonnegative");
    const int n = dynamics.state_dim();
    const int off = dynamics.noise_offset();
    const int m = dynamics.noise_dim();
    const double T = dynamics.horizon();
    const double dt = T / n_steps;
    const bool noisy = eps > 0.0;

    if (!options.increments.empty() && options.increments.size() != static_cast<std::size_t>(n_steps) * m) {
        throw InputError("supplied increments have the wrong length");
    }

    PathSample path;
    path.seed = seed;
    path.path_index = options.path_index;
    path.dt = dt;
    path.epsilon = eps;
    path.times.resize(static_cast<std::size_t>(n_steps) + 1);
    path.states.reserve(static_cast<std::size_t>(n_steps) + 1);
    for (int k = 0; k <= n_steps; ++k) path.times[k] = k == n_steps ? T : k * dt;

    const CounterRng rng(seed);
    const double noise_scale = std::sqrt(eps);
    const double sqrt_dt = std::sqrt(dt);
    Vec z = dynamics.start();
    if (!dynamics.domain().contains(z)) throw EscapeError("start point outside the domain", 0);
    path.states.push_back(z);
    if (options.retain_increments) path.increments.resize(static_cast<std::size_t>(n_steps) * m);

    Vec drift(n);
    Mat sigma;
    double dw[kMaxDim];
    for (int k = 0; k < n_steps; ++k) {
        try {
            dynamics.evaluate(eps, z, drift, noisy ? &sigma : nullptr);
        } catch (const EscapeError&) {
            throw;
        } catch (const DomainError& e) {
            throw EscapeError(e.what(), k);
        }
        if (!options.increments.empty()) {
            for (int i = 0; i < m; ++i) dw[i] = options.increments[static_cast<std::size_t>(k) * m + i];
        } else {
            rng.normals(options.path_index, static_cast<std::uint32_t>(k), std::span<double>(dw, m));
            for (int i = 0; i < m; ++i) dw[i] *= sqrt_dt;
        }
        if (options.retain_increments) {
            for (int i = 0; i < m; ++i) path.increments[static_cast<std::size_t>(k) * m + i] = dw[i];
        }

        Vec next = z + drift * dt;
        if (noisy) {
            const Eigen::Map<const Eigen::VectorXd> w(dw, m);
            next.segment(off, m) += noise_scale * (sigma * w);
        }
        if (!next.allFinite()) {
            throw EvaluationError("non-finite state at step " + std::to_string(k + 1) + " of path " +
                                  std::to_string(options.path_index));
        }
        if (!dynamics.domain().contains(next)) {
            throw EscapeError("path " + std::to_string(options.path_index) + " left the domain " +
                                  dynamics.domain().describe(),
                              k + 1);
        }
        z = next;
        path.states.push_back(z);
    }
    return path;
}

PathSample simulate_original(const SdeProblem& problem, double eps, int n_steps, std::uint64_t seed,
                             const SimulationOptions& options) {
    return simulate(OriginalDynamics(problem), eps, n_steps, seed, options);
}

PathSample simulate_transformed(const TransformedSde& tsde, double eps, int n_steps, std::uint64_t seed,
                                const SimulationOptions& options) {
    return simulate(tsde, eps, n_steps, seed, options);
}

PathSample simulate_degenerate(const SdeProblem& problem, double eps, int n_steps, std::uint64_t seed,
                               const SimulationOptions& options) {
    if (problem.layout != Layout::degenerate) throw InputError("simulate_degenerate needs the degenerate layout");
    return simulate(OriginalDynamics(problem), eps, n_steps, seed, options);
}

double conjugacy_check(const SdeProblem& problem, std::shared_ptr<const ZvonkinMap> map, double eps, int n_steps,
                       std::uint64_t seed, const ConjugacyOptions& options) {
    const TransformedSde tsde(problem, map);
    const int off = problem.noise_offset();
    const int m = problem.noise_dim();
    Box inner = problem.box;
    for (int i = 0; i < m; ++i) {
        inner.lo[off + i] = std::max(inner.lo[off + i], map->interior().lo[i]);
        inner.hi[off + i] = std::min(inner.hi[off + i], map->interior().hi[i]);
    }
    const OriginalDynamics original(problem, true, inner);

    const int fine = std::max(options.fine_steps, n_steps);
    if (fine % n_steps != 0) throw InputError("fine_steps must be a multiple of n_steps");
    const double fine_dt = problem.horizon / fine;

    double sum_sq = 0.0;
    for (int p = 0; p < options.n_paths; ++p) {
        const std::uint64_t index = options.first_path + static_cast<std::uint64_t>(p);
        const auto fine_dw = brownian_increments(seed, index, fine, m, fine_dt);
        const auto dw = coarsen_increments(fine_dw, m, fine / n_steps);
        SimulationOptions so;
        so.path_index = index;
        so.increments = dw;
        const PathSample x = simulate(original, eps, n_steps, seed, so);
        const PathSample y = simulate(tsde, eps, n_steps, seed, so);
        double sup = 0.0;
        for (std::size_t k = 0; k < x.states.size(); ++k) {
            sup = std::max(sup, (tsde.to_transformed(x.states[k]) - y.states[k]).norm());
        }
        sum_sq += sup * sup;
    }
    return std::sqrt(sum_sq / options.n_paths);
}

}  // namespace sldp
