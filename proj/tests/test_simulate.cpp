#include "sldp/dynamics.hpp"
#include "sldp/errors.hpp"
#include "sldp/registry.hpp"
#include "sldp/simulate.hpp"
#include "sldp/zvonkin.hpp"

#include <gtest/gtest.h>

#include "support.hpp"

#include <cmath>

using namespace sldp;

namespace {

SdeProblem hamiltonian(double x0 = 0.0, double y0 = 0.0) {
    SdeProblem p;
    p.name = "linear-hamiltonian";
    p.layout = Layout::degenerate;
    p.state_dim = 2;
    p.d1 = 1;
    p.start = make_vec({x0, y0});
    p.box = Box::cube(2, -50.0, 50.0);
    p.drift.limit = VectorField::from_expression("x2; 0", 2, 2);
    p.singular = VectorField::zero(1, 1);
    p.singular.set_modulus(Modulus::lipschitz(0.0));
    p.diffusion = VectorField::constant_matrix(Mat::Identity(1, 1), 1);
    return p;
}

ResolventOptions options_1d() {
    ResolventOptions o;
    o.box = Box::cube(1, -6.0, 6.0);
    o.resolution = 401;
    return o;
}

}  // namespace

TEST(Simulate, BrownianMoments) {
    const SdeProblem p = test::make_problem(1);
    SdeProblem wide = p;
    wide.box = Box::cube(1, -50.0, 50.0);
    const int n = 100000;
    double s1 = 0, s2 = 0;
    for (int i = 0; i < n; ++i) {
        SimulationOptions o;
        o.path_index = static_cast<std::uint64_t>(i);
        const double x = simulate_original(wide, 1.0, 20, 42, o).terminal()[0];
        s1 += x;
        s2 += x * x;
    }
    const double mean = s1 / n;
    const double var = s2 / n - mean * mean;
    EXPECT_LT(std::abs(mean), 4.0 * std::sqrt(1.0 / n));
    EXPECT_NEAR(var, 1.0, 0.05);
}

TEST(Simulate, NoiselessMatchesOdeFlow) {
    SdeProblem p = test::make_problem(1, VectorField::linear(Mat::Constant(1, 1, -1.0)), VectorField::zero(1, 1));
    p.start = make_vec({1.0});
    const int n = 200;
    const PathSample path = simulate_original(p, 0.0, n, 1);
    double worst = 0.0;
    for (std::size_t k = 0; k < path.states.size(); ++k) {
        worst = std::max(worst, std::abs(path.states[k][0] - std::exp(-path.times[k])));
    }
    EXPECT_LT(worst, 5.0 * 1.0 * 1.0 / n);
}

TEST(Simulate, StrongSelfConvergence) {
    const SdeProblem p =
        test::make_problem(1, VectorField::from_expression("-x1 + 0.5*sin(3*x1)", 1, 1), VectorField::zero(1, 1));
    const int fine = 1024;
    std::vector<double> err(4, 0.0);
    const int paths = 64;
    for (int i = 0; i < paths; ++i) {
        const auto inc = brownian_increments(9, static_cast<std::uint64_t>(i), fine, 1, 1.0 / fine);
        std::vector<PathSample> runs;
        for (int f : {16, 8, 4, 2, 1}) {
            const auto coarse = coarsen_increments(inc, 1, f);
            SimulationOptions o;
            o.increments = coarse;
            runs.push_back(simulate_original(p, 1.0, fine / f, 9, o));
        }
        for (int r = 0; r < 4; ++r) {
            double s = 0.0;
            for (std::size_t k = 0; k < runs[r].states.size(); ++k) {
                s = std::max(s, std::abs(runs[r].states[k][0] - runs[r + 1].states[2 * k][0]));
            }
            err[r] += s * s / paths;
        }
    }
    for (int r = 0; r + 1 < 4; ++r) {
        const double ratio = std::sqrt(err[r] / err[r + 1]);
        EXPECT_GE(ratio, 1.2) << r;
        EXPECT_LE(ratio, 2.8) << r;
    }
}

TEST(Simulate, Reproducible) {
    const SdeProblem p = registry_problem("dini-tanhlog-1d").problem;
    SimulationOptions o;
    o.path_index = 17;
    const PathSample a = simulate_original(p, 0.5, 100, 3, o);
    const PathSample b = simulate_original(p, 0.5, 100, 3, o);
    ASSERT_EQ(a.states.size(), b.states.size());
    for (std::size_t k = 0; k < a.states.size(); ++k) EXPECT_EQ(a.states[k][0], b.states[k][0]);
}

TEST(Simulate, EscapeReported) {
    SdeProblem p = test::make_problem(1, VectorField::from_expression("10", 1, 1), VectorField::zero(1, 1));
    try {
        simulate_original(p, 0.0, 100, 1);
        FAIL();
    } catch (const EscapeError& e) {
        EXPECT_GT(e.step(), 40);
        EXPECT_LT(e.step(), 60);
    }
}

TEST(SimulateTransformed, IdentityMapIsBitwiseIdentical) {
    const SdeProblem p =
        test::make_problem(1, VectorField::from_expression("0.2*sin(x1)", 1, 1), VectorField::zero(1, 1));
    auto map = std::make_shared<const ZvonkinMap>(solve_resolvent(p, 2.0, options_1d()));
    const TransformedSde t(p, map);
    for (std::uint64_t i = 0; i < 5; ++i) {
        SimulationOptions o;
        o.path_index = i;
        const PathSample x = simulate_original(p, 0.5, 100, 4, o);
        const PathSample y = simulate_transformed(t, 0.5, 100, 4, o);
        for (std::size_t k = 0; k < x.states.size(); ++k) ASSERT_EQ(x.states[k][0], y.states[k][0]);
    }
}

TEST(SimulateTransformed, ConstantSingularShiftsPath) {
    const double c = 0.6, lambda = 4.0;
    const SdeProblem p = test::make_problem(1, VectorField::from_expression("0.3", 1, 1),
                                            VectorField::constant(make_vec({c}), 1));
    auto map = std::make_shared<const ZvonkinMap>(solve_resolvent(p, lambda, options_1d()));
    const TransformedSde t(p, map);
    const PathSample x = simulate_original(p, 0.5, 100, 4);
    const PathSample y = simulate_transformed(t, 0.5, 100, 4);
    for (std::size_t k = 0; k < x.states.size(); ++k) EXPECT_NEAR(y.states[k][0], x.states[k][0] + c / lambda, 1e-12);
}

TEST(SimulateDegenerate, NoiselessAffine) {
    const SdeProblem p = hamiltonian(0.5, 1.5);
    const PathSample s = simulate_degenerate(p, 0.0, 64, 1);
    for (std::size_t k = 0; k < s.states.size(); ++k) {
        EXPECT_NEAR(s.states[k][0], 0.5 + 1.5 * s.times[k], 1e-13);
        EXPECT_EQ(s.states[k][1], 1.5);
    }
}

TEST(SimulateDegenerate, IntegratedBrownianVariance) {
    const SdeProblem p = hamiltonian();
    const int n = 100000;
    double s1 = 0, s2 = 0;
    double worst_step_excess = 0.0;
    for (int i = 0; i < n; ++i) {
        SimulationOptions o;
        o.path_index = static_cast<std::uint64_t>(i);
        const PathSample s = simulate_degenerate(p, 1.0, 100, 8, o);
        const double x = s.terminal()[0];
        s1 += x;
        s2 += x * x;
        if (i < 1000) {
            double ysup = 0.0;
            for (const Vec& z : s.states) ysup = std::max(ysup, std::abs(z[1]));
            for (std::size_t k = 1; k < s.states.size(); ++k) {
                const double dx = std::abs(s.states[k][0] - s.states[k - 1][0]);
                worst_step_excess = std::max(worst_step_excess, dx - ysup * s.dt);
            }
        }
    }
    const double mean = s1 / n;
    EXPECT_NEAR(s2 / n - mean * mean, 1.0 / 3.0, 0.05 / 3.0);
    EXPECT_LE(worst_step_excess, 1e-15);
}

TEST(Conjugacy, IdentityMapGivesZero) {
    const SdeProblem p =
        test::make_problem(1, VectorField::from_expression("0.2*sin(x1)", 1, 1), VectorField::zero(1, 1));
    auto map = std::make_shared<const ZvonkinMap>(solve_resolvent(p, 2.0, options_1d()));
    ConjugacyOptions o;
    o.n_paths = 5;
    EXPECT_EQ(conjugacy_check(p, map, 0.5, 64, 3, o), 0.0);
}

TEST(Conjugacy, NoiselessDiscrepancyIsIntegratorMismatch) {
    const SdeProblem p = test::make_problem(1, VectorField::linear(Mat::Constant(1, 1, -1.0)),
                                            VectorField::from_expression("0.5*tanh(x1)", 1, 1));
    auto map = find_lambda0(p, options_1d()).map;
    const int n = 100;
    const double dt = 1.0 / n;
    // coefficients bounded by |b1| <= 5 and |b2| <= 0.5 on the box
    EXPECT_LT(conjugacy_check(p, map, 0.0, n, 3), 1e-2 * dt * n * 5.5);
}

TEST(Conjugacy, DecreasesWithStep) {
    const ProblemBundle b = registry_problem("dini-tanhlog-1d");
    ResolventOptions o;
    o.box = b.experiment.zvonkin_box;
    o.resolution = b.experiment.resolution;
    auto map = find_lambda0(b.problem, o).map;
    ConjugacyOptions c;
    c.n_paths = 40;
    c.fine_steps = 8 * 400;
    std::vector<double> d;
    for (int n : {50, 100, 200, 400}) d.push_back(conjugacy_check(b.problem, map, 0.5, n, 5, c));
    for (std::size_t i = 0; i + 1 < d.size(); ++i) EXPECT_GE(d[i] / d[i + 1], 1.15) << i;
}

TEST(Conjugacy, NoiseVanishesAsEpsDecreases) {
    const SdeProblem p = registry_problem("dini-tanhlog-1d").problem;
    const PathSample zero = simulate_original(p, 0.0, 200, 1);
    double prev = 1e300;
    for (double eps : {0.1, 0.01, 0.001}) {
        const PathSample s = simulate_original(p, eps, 200, 1);
        double sup = 0.0;
        for (std::size_t k = 0; k < s.states.size(); ++k) sup = std::max(sup, std::abs(s.states[k][0] - zero.states[k][0]));
        EXPECT_LT(sup, prev);
        prev = sup;
    }
}
