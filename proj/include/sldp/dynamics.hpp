#pragma once

#include "sldp/problem.hpp"
#include "sldp/types.hpp"

#include <optional>

namespace sldp {

/// Coefficients of a small-noise SDE dZ = drift_eps(Z) dt + sqrt(eps) E sigma(Z) dW,
/// where E embeds the noisy block (coordinates noise_offset() onward).
///
/// The same interface drives Euler-Maruyama (any eps) and the skeleton
/// equation (eps = 0 drift with the control in place of the noise).
class Dynamics {
public:
    virtual ~Dynamics() = default;

    virtual int state_dim() const = 0;
    virtual int noise_offset() const = 0;
    int noise_dim() const { return state_dim() - noise_offset(); }
    virtual Vec start() const = 0;
    virtual double horizon() const = 0;
    /// States outside this box are escapes.
    virtual const Box& domain() const = 0;

    /// Full-state drift at noise level eps (including the eps-scaled terms)
    /// and, when requested, the noisy-block diffusion matrix.
    virtual void evaluate(double eps, const Vec& z, Vec& drift, Mat* diffusion) const = 0;
};

/// Eq. (1.1)-type dynamics straight from the problem: b1^eps + eps b2, sigma.
class OriginalDynamics final : public Dynamics {
public:
    explicit OriginalDynamics(SdeProblem problem, bool with_singular = true, std::optional<Box> domain = {});

    int state_dim() const override { return problem_.state_dim; }
    int noise_offset() const override { return problem_.noise_offset(); }
    Vec start() const override { return problem_.start; }
    double horizon() const override { return problem_.horizon; }
    const Box& domain() const override { return domain_; }
    void evaluate(double eps, const Vec& z, Vec& drift, Mat* diffusion) const override;

    const SdeProblem& problem() const noexcept { return problem_; }
    bool with_singular() const noexcept { return with_singular_; }

private:
    SdeProblem problem_;
    bool with_singular_;
    Box domain_;
};

}  // namespace sldp
