#pragma once

#include "sldp/field.hpp"
#include "sldp/modulus.hpp"
#include "sldp/problem.hpp"
#include "sldp/types.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace sldp {

struct PointPair {
    Vec x;
    Vec y;
};

/// Uniform points in `box`; point k depends only on (seed, k).
std::vector<Vec> sample_points(const Box& box, std::size_t n, std::uint64_t seed);

/// Pairs for difference-quotient probes. Even-indexed pairs are independent
/// uniform points; odd-indexed pairs are local, y = x + delta * direction
/// with delta log-uniform between 1e-6 and the box diameter.
std::vector<PointPair> sample_pairs(const Box& box, std::size_t n, std::uint64_t seed);

/// max |f(x) - f(y)| / |x - y| over the pairs (pairs closer than 1e-12 skipped).
/// Matrix fields use the Frobenius norm. A lower bound on the Lipschitz constant.
double probe_lipschitz(const VectorField& f, std::span<const PointPair> pairs);
double probe_lipschitz(const VectorField& f, const Box& box, std::size_t n_pairs, std::uint64_t seed);

/// Sampled sup-norm of a field over the box.
double probe_sup_norm(const VectorField& f, const Box& box, std::size_t n_points, std::uint64_t seed);

struct EllipticityProbe {
    bool pass = true;
    Vec witness;
    double offending_eigenvalue = 0.0;
    double min_eigenvalue = 0.0;
    double max_eigenvalue = 0.0;
};

/// Checks K^-1 I <= sigma sigma^T <= K I at sampled points (tolerance 1e-9).
EllipticityProbe probe_ellipticity(const VectorField& sigma, double K, const Box& box,
                                   std::size_t n_points, std::uint64_t seed);

struct ModulusProbe {
    bool pass = true;
    PointPair witness;
    /// max of |f(x) - f(y)| / phi(|x - y|) over the pairs.
    double worst_ratio = 0.0;
};

/// Checks |f(x) - f(y)| <= phi(|x - y|) (1 + 1e-6) on sampled pairs.
ModulusProbe probe_modulus(const VectorField& f, const Modulus& m, const Box& box,
                           std::size_t n_pairs, std::uint64_t seed);

/// Sampled sup over the box of |b^eps - b^0| for the whole drift.
double drift_family_limit_gap(const SdeProblem& problem, double eps, const Box& box,
                              std::size_t n_points, std::uint64_t seed);

struct AssumptionCheck {
    std::string assumption;
    /// "pass", "fail" or "advisory".
    std::string verdict;
    std::string witness;
    double value = 0.0;
};

struct ValidationReport {
    std::string problem;
    Box box;
    std::vector<AssumptionCheck> checks;

    bool passed() const;
    /// Aligned text table, one row per check.
    std::string table() const;
};

struct ValidationOptions {
    std::size_t n_pairs = 4000;
    std::size_t n_points = 2000;
    std::uint64_t seed = 1;
    std::vector<double> eps_ladder{0.5, 0.25, 0.125, 0.0625};
};

/// Runs the regularity probes for (A1), (A1'), (A2) in the nondegenerate
/// layout or (H1)-(H3) in the degenerate layout on the problem's box.
ValidationReport validate_problem(const SdeProblem& problem, const ValidationOptions& options = {});

}  // namespace sldp
