#include "sldp/probes.hpp"

#include "sldp/errors.hpp"
#include "sldp/rng.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>

namespace sldp {

namespace {

Vec uniform_point(const CounterRng& rng, const Box& box, std::uint64_t stream, std::uint32_t index) {
    const int d = box.dim();
    double u[kMaxDim];
    rng.uniforms(stream, index, std::span<double>(u, static_cast<std::size_t>(d)));
    Vec x(d);
    for (int i = 0; i < d; ++i) x[i] = box.lo[i] + u[i] * (box.hi[i] - box.lo[i]);
    return x;
}

double entry_norm(const Mat& m) { return m.norm(); }

std::string format_vec(const Vec& v) {
    std::ostringstream os;
    os.precision(6);
    os << '(';
    for (int i = 0; i < v.size(); ++i) os << (i ? ", " : "") << v[i];
    os << ')';
    return os.str();
}

std::string format_number(double x) {
    std::ostringstream os;
    os.precision(6);
    os << x;
    return os.str();
}

// Rows [offset, offset + count) of the drift family at a fixed eps.
VectorField drift_block(const SdeProblem& p, double eps, int offset, int count) {
    return VectorField::native("drift-block", p.state_dim, count, 1,
                               [&p, eps, offset, count](const Vec& z, Mat& out) {
                                   out = p.drift(eps, z).segment(offset, count);
                               });
}

}  // namespace

std::vector<Vec> sample_points(const Box& box, std::size_t n, std::uint64_t seed) {
    const CounterRng rng(seed);
    std::vector<Vec> points;
    points.reserve(n);
    for (std::size_t k = 0; k < n; ++k) points.push_back(uniform_point(rng, box, k, 0));
    return points;
}

std::vector<PointPair> sample_pairs(const Box& box, std::size_t n, std::uint64_t seed) {
    const CounterRng rng(seed);
    const int d = box.dim();
    const double diameter = box.width().norm();
    std::vector<PointPair> pairs;
    pairs.reserve(n);
    for (std::size_t k = 0; k < n; ++k) {
        Vec x = uniform_point(rng, box, k, 0);
        if (k % 2 == 0) {
            pairs.push_back({x, uniform_point(rng, box, k, 1)});
            continue;
        }
        double z[kMaxDim + 2];
        rng.normals(k, 1, std::span<double>(z, static_cast<std::size_t>(d) + 1));
        Vec dir(d);
        for (int i = 0; i < d; ++i) dir[i] = z[i];
        if (dir.norm() == 0.0) dir.setOnes();
        dir.normalize();
        const double u = rng.uniform2(k, 2, 0)[0];
        const double delta = std::exp(std::log(1e-6) + u * (std::log(diameter) - std::log(1e-6)));
        Vec y = x + delta * dir;
        if (!box.contains(y)) y = x - delta * dir;
        if (!box.contains(y)) {
            // Clamp into the box; the pair is still valid, just not at distance delta.
            for (int i = 0; i < d; ++i) y[i] = std::clamp(y[i], box.lo[i], box.hi[i]);
        }
        pairs.push_back({std::move(x), std::move(y)});
    }
    return pairs;
}

double probe_lipschitz(const VectorField& f, std::span<const PointPair> pairs) {
    double best = 0.0;
    Mat fx;
    Mat fy;
    for (const auto& [x, y] : pairs) {
        const double dist = (x - y).norm();
        if (dist < 1e-12) continue;
        f.evaluate(x, fx);
        f.evaluate(y, fy);
        best = std::max(best, entry_norm(fx - fy) / dist);
    }
    return best;
}

double probe_lipschitz(const VectorField& f, const Box& box, std::size_t n_pairs, std::uint64_t seed) {
    if (n_pairs < 1) throw InputError("probe_lipschitz needs at least one pair");
    const auto pairs = sample_pairs(box, n_pairs, seed);
    return probe_lipschitz(f, pairs);
}

double probe_sup_norm(const VectorField& f, const Box& box, std::size_t n_points, std::uint64_t seed) {
    double best = 0.0;
    Mat fx;
    for (const auto& x : sample_points(box, n_points, seed)) {
        f.evaluate(x, fx);
        best = std::max(best, entry_norm(fx));
    }
    return best;
}

EllipticityProbe probe_ellipticity(const VectorField& sigma, double K, const Box& box,
                                   std::size_t n_points, std::uint64_t seed) {
    if (sigma.rows() != sigma.cols()) throw InputError("ellipticity probe needs a square diffusion");
    if (!(K > 1.0)) throw InputError("ellipticity constant must exceed 1");
    constexpr double tol = 1e-9;
    EllipticityProbe probe;
    probe.min_eigenvalue = std::numeric_limits<double>::infinity();
    probe.max_eigenvalue = -std::numeric_limits<double>::infinity();
    Mat s;
    for (const auto& x : sample_points(box, n_points, seed)) {
        sigma.evaluate(x, s);
        const Eigen::MatrixXd a = s * s.transpose();
        const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(a, Eigen::EigenvaluesOnly);
        const double lo = solver.eigenvalues().minCoeff();
        const double hi = solver.eigenvalues().maxCoeff();
        probe.min_eigenvalue = std::min(probe.min_eigenvalue, lo);
        probe.max_eigenvalue = std::max(probe.max_eigenvalue, hi);
        if (probe.pass && (lo < 1.0 / K - tol || hi > K + tol)) {
            probe.pass = false;
            probe.witness = x;
            probe.offending_eigenvalue = hi > K + tol ? hi : lo;
        }
    }
    return probe;
}

ModulusProbe probe_modulus(const VectorField& f, const Modulus& m, const Box& box,
                           std::size_t n_pairs, std::uint64_t seed) {
    ModulusProbe probe;
    Mat fx;
    Mat fy;
    for (const auto& pair : sample_pairs(box, n_pairs, seed)) {
        const double dist = (pair.x - pair.y).norm();
        if (dist < 1e-12) continue;
        f.evaluate(pair.x, fx);
        f.evaluate(pair.y, fy);
        const double diff = entry_norm(fx - fy);
        const double bound = m(dist);
        const double ratio = bound > 0.0 ? diff / bound : (diff > 0.0 ? std::numeric_limits<double>::infinity() : 0.0);
        if (ratio > probe.worst_ratio) {
            probe.worst_ratio = ratio;
            if (diff > bound * (1.0 + 1e-6)) {
                probe.pass = false;
                probe.witness = pair;
            }
        }
    }
    return probe;
}

double drift_family_limit_gap(const SdeProblem& problem, double eps, const Box& box,
                              std::size_t n_points, std::uint64_t seed) {
    if (!problem.drift.perturbation) return 0.0;
    double best = 0.0;
    for (const auto& z : sample_points(box, n_points, seed)) {
        best = std::max(best, (problem.drift(eps, z) - problem.drift.limit(z)).norm());
    }
    return best;
}

bool ValidationReport::passed() const {
    return std::none_of(checks.begin(), checks.end(), [](const auto& c) { return c.verdict == "fail"; });
}

std::string ValidationReport::table() const {
    std::size_t w_name = 10;
    std::size_t w_verdict = 7;
    for (const auto& c : checks) {
        w_name = std::max(w_name, c.assumption.size());
        w_verdict = std::max(w_verdict, c.verdict.size());
    }
    std::ostringstream os;
    os << "problem: " << problem << "\nbox: " << box.describe() << "\n";
    os << std::left << std::setw(static_cast<int>(w_name)) << "assumption" << "  "
       << std::setw(static_cast<int>(w_verdict)) << "verdict" << "  " << std::setw(14) << "value"
       << "  witness\n";
    for (const auto& c : checks) {
        os << std::left << std::setw(static_cast<int>(w_name)) << c.assumption << "  "
           << std::setw(static_cast<int>(w_verdict)) << c.verdict << "  " << std::setw(14)
           << format_number(c.value) << "  " << c.witness << "\n";
    }
    return os.str();
}

ValidationReport validate_problem(const SdeProblem& p, const ValidationOptions& opt) {
    p.check_structure();
    ValidationReport report;
    report.problem = p.name;
    report.box = p.box;
    const bool degenerate = p.layout == Layout::degenerate;
    const int off = p.noise_offset();
    const int m = p.noise_dim();
    const Box noise_box = p.box.block(off, m);
    const double K = p.ellipticity_K;
    auto verdict = [](bool ok) { return std::string(ok ? "pass" : "fail"); };
    auto add = [&](std::string name, std::string v, std::string witness, double value) {
        report.checks.push_back({std::move(name), std::move(v), std::move(witness), value});
    };

    std::vector<double> eps_all{0.0};
    eps_all.insert(eps_all.end(), opt.eps_ladder.begin(), opt.eps_ladder.end());

    // Lipschitz regularity of the regular coefficients.
    {
        double drift_lip = 0.0;
        double worst_eps = 0.0;
        for (double eps : eps_all) {
            const double l = probe_lipschitz(drift_block(p, eps, 0, p.state_dim), p.box, opt.n_pairs, opt.seed);
            if (l > drift_lip) {
                drift_lip = l;
                worst_eps = eps;
            }
        }
        const double sigma_lip = probe_lipschitz(p.diffusion, noise_box, opt.n_pairs, opt.seed + 1);
        if (degenerate) {
            const bool ok = drift_lip <= K * (1 + 1e-9) && sigma_lip <= K * (1 + 1e-9);
            add("H1 Lipschitz", verdict(ok),
                "drift " + format_number(drift_lip) + " (eps=" + format_number(worst_eps) + "), sigma " +
                    format_number(sigma_lip) + ", K=" + format_number(K),
                std::max(drift_lip, sigma_lip));
        } else {
            const double value = drift_lip + sigma_lip;
            const bool ok = !p.lipschitz_L || value <= *p.lipschitz_L * (1 + 1e-9);
            add("A1 Lipschitz", verdict(ok),
                "drift " + format_number(drift_lip) + " + sigma " + format_number(sigma_lip) +
                    (p.lipschitz_L ? ", L=" + format_number(*p.lipschitz_L) : std::string(", L undeclared")),
                value);
        }
    }

    // Sup-norm convergence of the perturbed drift family.
    {
        std::vector<double> gaps;
        for (double eps : opt.eps_ladder) {
            gaps.push_back(drift_family_limit_gap(p, eps, p.box, opt.n_points, opt.seed + 2));
        }
        bool ok = true;
        for (std::size_t i = 1; i < gaps.size(); ++i) {
            if (gaps[i] > gaps[i - 1] * (1 + 1e-9) + 1e-14) ok = false;
        }
        if (gaps.size() >= 2 && gaps.front() > 0.0 && !(gaps.back() < gaps.front())) ok = false;
        std::string witness = "gaps";
        for (std::size_t i = 0; i < gaps.size(); ++i) {
            witness += " eps=" + format_number(opt.eps_ladder[i]) + ":" + format_number(gaps[i]);
        }
        add(degenerate ? "H2 limit" : "A1 limit", verdict(ok), witness, gaps.empty() ? 0.0 : gaps.back());
    }

    // Boundedness of the drifts.
    {
        double regular = 0.0;
        for (double eps : opt.eps_ladder) {
            const VectorField block = drift_block(p, eps, off, m);
            regular = std::max(regular, probe_sup_norm(block, p.box, opt.n_points, opt.seed + 3));
        }
        const double singular = probe_sup_norm(p.singular, noise_box, opt.n_points, opt.seed + 4);
        const double value = regular + singular;
        add(degenerate ? "H1 bound" : "A1' bound", verdict(value <= K),
            (degenerate ? "sup|Bbar^eps| " : "sup|b1^eps| ") + format_number(regular) + " + sup|b2| " +
                format_number(singular) + ", K=" + format_number(K),
            value);
    }

    // Uniform ellipticity.
    {
        const auto probe = probe_ellipticity(p.diffusion, K, noise_box, opt.n_points, opt.seed + 5);
        add(degenerate ? "H1 ellipticity" : "A1' ellipticity", verdict(probe.pass),
            probe.pass ? "eigenvalues in [" + format_number(probe.min_eigenvalue) + ", " +
                             format_number(probe.max_eigenvalue) + "]"
                       : "eigenvalue " + format_number(probe.offending_eigenvalue) + " at " +
                             format_vec(probe.witness) + " outside [1/K, K]",
            probe.pass ? probe.max_eigenvalue : probe.offending_eigenvalue);
    }

    // Dini regularity of the singular drift.
    const Modulus& modulus = *p.singular.declared_modulus();
    {
        std::string witness = modulus.describe();
        bool ok = false;
        double value = 0.0;
        try {
            check_modulus_shape(modulus);
            const auto d = dini_classify(modulus);
            ok = d.finite;
            value = d.finite ? d.value : d.partial_integrals.back();
            witness += ok ? ", integral finite" : ", integral divergent";
        } catch (const EvaluationError& e) {
            witness += std::string(", ") + e.what();
        }
        add(degenerate ? "H3 Dini" : "A2 Dini", verdict(ok), witness, value);
    }
    {
        const auto probe = probe_modulus(p.singular, modulus, noise_box, opt.n_pairs, opt.seed + 6);
        add(degenerate ? "H3 modulus" : "A2 modulus", verdict(probe.pass),
            probe.pass ? "max ratio " + format_number(probe.worst_ratio)
                       : "pair " + format_vec(probe.witness.x) + ", " + format_vec(probe.witness.y),
            probe.worst_ratio);
    }
    {
        std::string witness;
        double value = 0.0;
        try {
            const auto probe = probe_slow_variation(modulus);
            value = probe.final_deviation;
            witness = probe.plausible ? "phi(dt)/phi(t) -> 1 plausible" : "phi(dt)/phi(t) not near 1";
        } catch (const EvaluationError& e) {
            witness = e.what();
        }
        add(degenerate ? "H3 slow variation" : "A2 slow variation", "advisory", witness, value);
    }

    // Declared sup-norm bounds on individual fields.
    auto check_bound = [&](const VectorField& f, const Box& box, const std::string& label) {
        if (!f.declared_bound()) return;
        const double sup = probe_sup_norm(f, box, opt.n_points, opt.seed + 7);
        add(label + " declared bound", verdict(sup <= *f.declared_bound() * (1 + 1e-12)),
            "sup " + format_number(sup) + " vs " + format_number(*f.declared_bound()), sup);
    };
    check_bound(p.singular, noise_box, "singular");
    check_bound(p.drift.limit, p.box, "drift");
    return report;
}

}  // namespace sldp
