#pragma once

#include "sldp/expression.hpp"

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace sldp {

/// Modulus of continuity phi: [0, inf) -> [0, inf).
///
/// Built-in families carry a multiplicative `scale`:
///   dini_log(beta):  scale * (log(1 + 1/t))^(-beta), phi(0) = 0
///   holder(alpha):   scale * t^alpha
///   lipschitz(L):    L * t
/// An expression modulus is any formula in the variable `t`.
class Modulus {
public:
    enum class Kind { dini_log, holder, lipschitz, expression };

    static Modulus dini_log(double beta, double scale = 1.0);
    static Modulus holder(double alpha, double scale = 1.0);
    static Modulus lipschitz(double constant);
    static Modulus expression(const std::string& text);

    double operator()(double t) const;

    Kind kind() const noexcept { return kind_; }
    double parameter() const noexcept { return parameter_; }
    double scale() const noexcept { return scale_; }
    const std::string& text() const noexcept { return text_; }
    std::string describe() const;

private:
    Modulus() = default;

    Kind kind_ = Kind::lipschitz;
    double parameter_ = 0.0;
    double scale_ = 1.0;
    std::string text_;
    std::shared_ptr<const Expression> expr_;
};

/// Checks that phi is finite, nonnegative and nondecreasing on a uniform
/// probe grid of [0, 1]. Throws EvaluationError with the offending point.
void check_modulus_shape(const Modulus& m, int probe_points = 1001);

struct DiniVerdict {
    bool finite = false;
    /// Tail-corrected estimate of the full integral; meaningful when finite.
    double value = 0.0;
    /// Raw partial integrals over [cutoff, 1], one per cutoff.
    std::vector<double> partial_integrals;
    /// Partial integrals plus the power-law tail estimate below each cutoff.
    std::vector<double> extrapolated;
};

/// Log-spaced cutoffs 1e-2, 1e-3, ..., 1e-12.
std::vector<double> default_dini_cutoffs();

/// Decides whether int_0^1 phi(s)/s ds is finite.
///
/// For each cutoff c the integral over [c, 1] is computed by adaptive
/// Simpson quadrature in v = log(1/s). Below the cutoff the integrand
/// g(v) = phi(e^-v) is extrapolated as a power law C v^-p with p read off
/// the local log-log slope; p <= 1 means the tail diverges. The verdict is
/// finite when the tail-corrected values over the last three cutoffs agree
/// to a relative 1e-3.
DiniVerdict dini_classify(const Modulus& m, std::span<const double> cutoffs);
DiniVerdict dini_classify(const Modulus& m);

/// Finite probe of slow variation at zero: phi(delta t)/phi(t) for
/// delta in {0.5, 2} along t = 10^-k. Advisory only.
struct SlowVariationProbe {
    std::vector<double> t;
    std::vector<double> ratio_half;
    std::vector<double> ratio_double;
    /// max |ratio - 1| at the smallest probed t.
    double final_deviation = 0.0;
    bool plausible = false;
};

SlowVariationProbe probe_slow_variation(const Modulus& m, int decades = 12);

/// Adaptive Simpson quadrature on [a, b] to absolute tolerance `tol`.
template <class F>
double adaptive_simpson(F&& f, double a, double b, double tol, int max_depth = 50);

}  // namespace sldp

#include "sldp/detail/quadrature.hpp"
