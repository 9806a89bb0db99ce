#include "sldp/modulus.hpp"

#include "sldp/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace sldp {

Modulus Modulus::dini_log(double beta, double scale) {
    if (!(beta > 0.0)) throw InputError("dini_log modulus needs beta > 0");
    if (!(scale > 0.0)) throw InputError("modulus scale must be positive");
    Modulus m;
    m.kind_ = Kind::dini_log;
    m.parameter_ = beta;
    m.scale_ = scale;
    return m;
}

Modulus Modulus::holder(double alpha, double scale) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw InputError("holder modulus needs alpha in (0, 1)");
    if (!(scale > 0.0)) throw InputError("modulus scale must be positive");
    Modulus m;
    m.kind_ = Kind::holder;
    m.parameter_ = alpha;
    m.scale_ = scale;
    return m;
}

Modulus Modulus::lipschitz(double constant) {
    if (!(constant >= 0.0)) throw InputError("lipschitz modulus needs L >= 0");
    Modulus m;
    m.kind_ = Kind::lipschitz;
    m.parameter_ = constant;
    return m;
}

Modulus Modulus::expression(const std::string& text) {
    Modulus m;
    m.kind_ = Kind::expression;
    m.text_ = text;
    m.expr_ = std::make_shared<const Expression>(Expression::parse(text, {"t"}));
    return m;
}

double Modulus::operator()(double t) const {
    if (t < 0.0) throw EvaluationError("modulus evaluated at negative argument");
    switch (kind_) {
    case Kind::dini_log:
        if (t == 0.0) return 0.0;
        return scale_ * std::pow(std::log1p(1.0 / t), -parameter_);
    case Kind::holder: return scale_ * std::pow(t, parameter_);
    case Kind::lipschitz: return parameter_ * t;
    case Kind::expression: {
        const double args[1] = {t};
        return expr_->evaluate(args);
    }
    }
    return 0.0;
}

std::string Modulus::describe() const {
    std::ostringstream os;
    os.precision(12);
    switch (kind_) {
    case Kind::dini_log: os << "dini_log(beta=" << parameter_ << ", scale=" << scale_ << ")"; break;
    case Kind::holder: os << "holder(alpha=" << parameter_ << ", scale=" << scale_ << ")"; break;
    case Kind::lipschitz: os << "lipschitz(L=" << parameter_ << ")"; break;
    case Kind::expression: os << "expression(" << text_ << ")"; break;
    }
    return os.str();
}

void check_modulus_shape(const Modulus& m, int probe_points) {
    double previous = -std::numeric_limits<double>::infinity();
    // Expression moduli may be undefined at 0 (e.g. log(1/t)); start just above it.
    const int first = m.kind() == Modulus::Kind::expression ? 1 : 0;
    for (int i = first; i < probe_points; ++i) {
        const double t = static_cast<double>(i) / (probe_points - 1);
        const double value = m(t);
        if (!std::isfinite(value) || value < 0.0) {
            throw EvaluationError("modulus " + m.describe() + " is negative or non-finite at t=" +
                                  std::to_string(t));
        }
        if (value < previous * (1.0 - 1e-12) - 1e-300) {
            throw EvaluationError("modulus " + m.describe() + " decreases at t=" + std::to_string(t));
        }
        previous = value;
    }
}

std::vector<double> default_dini_cutoffs() {
    std::vector<double> cutoffs;
    for (int k = 2; k <= 12; ++k) cutoffs.push_back(std::pow(10.0, -k));
    return cutoffs;
}

namespace {

// Integrand after s = exp(-v): phi(s)/s ds = -phi(e^-v) dv.
double log_integrand(const Modulus& m, double v) {
    const double value = m(std::exp(-v));
    if (!std::isfinite(value) || value < 0.0) {
        throw EvaluationError("modulus " + m.describe() + " is negative or non-finite at s=" +
                              std::to_string(std::exp(-v)));
    }
    return value;
}

// Power-law tail estimate int_V^inf g(v) dv, infinity when the decay is too slow.
double tail_estimate(const Modulus& m, double v) {
    const double g = log_integrand(m, v);
    if (g == 0.0) return 0.0;
    const double r = 0.95;
    const double g_inner = log_integrand(m, r * v);
    if (g_inner <= 0.0) return std::numeric_limits<double>::infinity();
    const double exponent = -(std::log(g) - std::log(g_inner)) / (-std::log(r));
    if (exponent <= 1.0 + 1e-6) return std::numeric_limits<double>::infinity();
    return g * v / (exponent - 1.0);
}

}  // namespace

DiniVerdict dini_classify(const Modulus& m, std::span<const double> cutoffs) {
    if (cutoffs.size() < 3) throw InputError("dini_classify needs at least three cutoffs");
    for (std::size_t i = 0; i < cutoffs.size(); ++i) {
        if (!(cutoffs[i] > 0.0 && cutoffs[i] < 1.0)) throw InputError("cutoffs must lie in (0, 1)");
        if (i > 0 && !(cutoffs[i] < cutoffs[i - 1])) throw InputError("cutoffs must decrease");
    }

    DiniVerdict verdict;
    double accumulated = 0.0;
    double v_previous = 0.0;
    auto g = [&](double v) { return log_integrand(m, v); };
    for (double c : cutoffs) {
        const double v = -std::log(c);
        // Unit-length panels keep the Simpson error control local.
        const int panels = std::max(1, static_cast<int>(std::ceil(v - v_previous)));
        const double width = (v - v_previous) / panels;
        for (int p = 0; p < panels; ++p) {
            const double a = v_previous + p * width;
            accumulated += adaptive_simpson(g, a, a + width, 1e-13);
        }
        v_previous = v;
        verdict.partial_integrals.push_back(accumulated);
        verdict.extrapolated.push_back(accumulated + tail_estimate(m, v));
    }

    const auto& e = verdict.extrapolated;
    const std::size_t n = e.size();
    bool cauchy = true;
    for (std::size_t k = n - 2; k < n; ++k) {
        if (!std::isfinite(e[k]) || !std::isfinite(e[k - 1])) {
            cauchy = false;
            break;
        }
        const double scale = std::max(std::abs(e[k]), 1e-300);
        if (std::abs(e[k] - e[k - 1]) / scale >= 1e-3) cauchy = false;
    }
    verdict.finite = cauchy;
    verdict.value = cauchy ? e.back() : std::numeric_limits<double>::infinity();
    return verdict;
}

DiniVerdict dini_classify(const Modulus& m) {
    const auto cutoffs = default_dini_cutoffs();
    return dini_classify(m, cutoffs);
}

SlowVariationProbe probe_slow_variation(const Modulus& m, int decades) {
    SlowVariationProbe probe;
    for (int k = 1; k <= decades; ++k) {
        const double t = std::pow(10.0, -k);
        const double base = m(t);
        if (!(base > 0.0)) throw EvaluationError("modulus vanishes at t=" + std::to_string(t));
        probe.t.push_back(t);
        probe.ratio_half.push_back(m(0.5 * t) / base);
        probe.ratio_double.push_back(m(2.0 * t) / base);
    }
    auto deviation = [&](std::size_t i) {
        return std::max(std::abs(probe.ratio_half[i] - 1.0), std::abs(probe.ratio_double[i] - 1.0));
    };
    probe.final_deviation = deviation(probe.t.size() - 1);
    probe.plausible = probe.final_deviation < 0.1 && probe.final_deviation <= deviation(0);
    return probe;
}

}  // namespace sldp
