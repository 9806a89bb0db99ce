#pragma once

#include "sldp/field.hpp"
#include "sldp/types.hpp"

#include <optional>
#include <string>
#include <vector>

namespace sldp {

enum class Layout { nondegenerate, degenerate };

/// b^eps = b^0 + eps^rate * P. The explicit perturbation makes the
/// sup-norm gap to the limit directly computable.
struct DriftFamily {
    VectorField limit;
    std::optional<VectorField> perturbation;
    double rate = 1.0;

    void evaluate(double eps, const Vec& z, Vec& out) const;
    Vec operator()(double eps, const Vec& z) const;
};

/// Small-noise SDE with a singular drift on the noisy block.
///
/// Nondegenerate layout: the whole state is noisy,
///   dX = (b1^eps(X) + eps b2(X)) dt + sqrt(eps) sigma(X) dW.
/// Degenerate layout: state (x, y) with x in R^d1, y in R^d2,
///   dx = bbar^eps(x, y) dt,
///   dy = (Bbar^eps(x, y) + eps b(y)) dt + sqrt(eps) sigma(y) dW.
/// `drift` is always the full-state drift; `singular` and `diffusion` act on
/// the noisy block only.
struct SdeProblem {
    std::string name;
    Layout layout = Layout::nondegenerate;
    int state_dim = 1;
    int d1 = 0;
    double horizon = 1.0;
    Vec start;
    Box box;
    DriftFamily drift;
    VectorField singular;
    VectorField diffusion;
    double ellipticity_K = 2.0;
    std::optional<double> lipschitz_L;

    int noise_offset() const noexcept { return layout == Layout::degenerate ? d1 : 0; }
    int noise_dim() const noexcept { return state_dim - noise_offset(); }

    /// Throws InputError when shapes or structural invariants are violated.
    void check_structure() const;

    /// Same problem with the singular drift replaced by zero.
    SdeProblem without_singular() const;
};

}  // namespace sldp
