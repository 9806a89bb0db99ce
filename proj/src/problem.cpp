#include "sldp/problem.hpp"

#include "sldp/errors.hpp"

#include <cmath>

namespace sldp {

void DriftFamily::evaluate(double eps, const Vec& z, Vec& out) const {
    out = limit(z);
    if (perturbation && eps != 0.0) out += std::pow(eps, rate) * (*perturbation)(z);
}

Vec DriftFamily::operator()(double eps, const Vec& z) const {
    Vec out;
    evaluate(eps, z, out);
    return out;
}

void SdeProblem::check_structure() const {
    auto fail = [&](const std::string& what) { throw InputError("problem '" + name + "': " + what); };
    if (state_dim < 1 || state_dim > kMaxDim) fail("state dimension out of range");
    if (layout == Layout::degenerate && (d1 < 1 || d1 >= state_dim)) fail("degenerate layout needs 1 <= d1 < dim");
    if (layout == Layout::nondegenerate && d1 != 0) fail("nondegenerate layout has no d1 block");
    if (!(horizon > 0.0)) fail("horizon must be positive");
    if (start.size() != state_dim) fail("start point has wrong dimension");
    if (box.dim() != state_dim) fail("working box has wrong dimension");
    if (!box.contains(start)) fail("start point lies outside the working box");
    const int m = noise_dim();
    if (drift.limit.in_dim() != state_dim || drift.limit.rows() != state_dim || drift.limit.cols() != 1) {
        fail("drift limit must map R^" + std::to_string(state_dim) + " to itself");
    }
    if (drift.perturbation &&
        (drift.perturbation->in_dim() != state_dim || drift.perturbation->rows() != state_dim)) {
        fail("drift perturbation must have the drift's shape");
    }
    if (!(drift.rate > 0.0)) fail("perturbation rate must be positive");
    if (singular.in_dim() != m || singular.rows() != m || singular.cols() != 1) {
        fail("singular drift must map the noisy block R^" + std::to_string(m) + " to itself");
    }
    if (diffusion.in_dim() != m || diffusion.rows() != m || diffusion.cols() != m) {
        fail("diffusion must be a square " + std::to_string(m) + "x" + std::to_string(m) +
             " matrix field of the noisy block");
    }
    if (!(ellipticity_K > 1.0)) fail("ellipticity constant K must exceed 1");
    if (!singular.declared_modulus()) fail("singular drift needs a declared modulus");
}

SdeProblem SdeProblem::without_singular() const {
    SdeProblem copy = *this;
    const Modulus modulus = *singular.declared_modulus();
    copy.singular = VectorField::zero(noise_dim(), noise_dim());
    copy.singular.set_modulus(modulus);
    return copy;
}

}  // namespace sldp
