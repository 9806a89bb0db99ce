#include "sldp/dynamics.hpp"

namespace sldp {

OriginalDynamics::OriginalDynamics(SdeProblem problem, bool with_singular, std::optional<Box> domain)
    : problem_(std::move(problem)), with_singular_(with_singular) {
    problem_.check_structure();
    domain_ = domain ? *domain : problem_.box;
}

void OriginalDynamics::evaluate(double eps, const Vec& z, Vec& drift, Mat* diffusion) const {
    problem_.drift.evaluate(eps, z, drift);
    const int off = problem_.noise_offset();
    const int m = problem_.noise_dim();
    if (with_singular_ && eps != 0.0) {
        const Vec y = z.segment(off, m);
        drift.segment(off, m) += eps * problem_.singular(y);
    }
    if (diffusion) {
        if (off == 0) {
            problem_.diffusion.evaluate(z, *diffusion);
        } else {
            const Vec y = z.segment(off, m);
            problem_.diffusion.evaluate(y, *diffusion);
        }
    }
}

}  // namespace sldp
