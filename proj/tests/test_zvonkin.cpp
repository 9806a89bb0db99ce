#include "sldp/dynamics.hpp"
#include "sldp/errors.hpp"
#include "sldp/probes.hpp"
#include "sldp/registry.hpp"
#include "sldp/zvonkin.hpp"

#include <gtest/gtest.h>

#include "support.hpp"

#include <cmath>
#include <filesystem>

using namespace sldp;

namespace {

ResolventOptions options_1d(int resolution = 401) {
    ResolventOptions o;
    o.box = Box::cube(1, -6.0, 6.0);
    o.resolution = resolution;
    return o;
}

SdeProblem constant_problem(const Vec& c) {
    const int d = static_cast<int>(c.size());
    return test::make_problem(d, VectorField::zero(d, d), VectorField::constant(c, d));
}

SdeProblem tanh_problem() {
    return test::make_problem(1, VectorField::zero(1, 1), VectorField::from_expression("tanh(x1)", 1, 1));
}

double sup_diff(const GridFunction& a, const GridFunction& b) {
    double worst = 0.0;
    for (std::size_t i = 0; i < a.node_count(); ++i) {
        for (int c = 0; c < a.components(); ++c) worst = std::max(worst, std::abs(a.at(i, c) - b.at(i, c)));
    }
    return worst;
}

}  // namespace

TEST(Resolvent, ZeroDriftGivesZeroMap) {
    const ZvonkinMap m = solve_resolvent(test::make_problem(1), 3.0, options_1d());
    for (double v : m.u().values()) EXPECT_EQ(v, 0.0);
    EXPECT_EQ(m.norms().sum(), 0.0);
    EXPECT_TRUE(m.certified());
    EXPECT_EQ(resolvent_residual(test::make_problem(1), m), 0.0);
}

TEST(Resolvent, ConstantDriftIsExact) {
    const Vec c = make_vec({0.7, -0.4});
    ResolventOptions o;
    o.box = Box::cube(2, -3.0, 3.0);
    o.resolution = 33;
    const double lambda = 5.0;
    const ZvonkinMap m = solve_resolvent(constant_problem(c), lambda, o);
    for (std::size_t i = 0; i < m.u().node_count(); ++i) {
        EXPECT_NEAR(m.u().at(i, 0), c[0] / lambda, 1e-12);
        EXPECT_NEAR(m.u().at(i, 1), c[1] / lambda, 1e-12);
    }
    EXPECT_NEAR(m.norms().u, c.norm() / lambda, 1e-12);
    EXPECT_NEAR(m.norms().grad, 0.0, 1e-10);
}

TEST(Resolvent, TanhGridRefinement) {
    const ZvonkinMap coarse = solve_resolvent(tanh_problem(), 20.0, options_1d(1201));
    const ZvonkinMap fine = solve_resolvent(tanh_problem(), 20.0, options_1d(4801));
    double worst = 0.0;
    for (std::size_t i = 0; i < coarse.u().node_count(); ++i) {
        worst = std::max(worst, std::abs(coarse.u().at(i, 0) - fine.u().at(4 * i, 0)));
    }
    EXPECT_LT(worst, 1e-3);
}

TEST(Resolvent, SecondOrderInGridSpacing) {
    // Differences between successive refinements shrink by about 4.
    std::vector<ZvonkinMap> maps;
    for (int n : {151, 301, 601}) maps.push_back(solve_resolvent(tanh_problem(), 10.0, options_1d(n)));
    auto gap = [&](const ZvonkinMap& a, const ZvonkinMap& b) {
        double worst = 0.0;
        for (std::size_t i = 0; i < a.u().node_count(); ++i) {
            worst = std::max(worst, std::abs(a.u().at(i, 0) - b.u().at(2 * i, 0)));
        }
        return worst;
    };
    const double ratio = gap(maps[0], maps[1]) / gap(maps[1], maps[2]);
    EXPECT_GE(ratio, 3.0);
    EXPECT_LE(ratio, 5.0);
}

TEST(Resolvent, PicardFixedPointHoldsOnGrid) {
    const SdeProblem p = tanh_problem();
    const ZvonkinMap m = solve_resolvent(p, 8.0, options_1d());
    EXPECT_LT(resolvent_residual(p, m), 1e-8);
}

TEST(FindLambda, ZeroDriftCertifiesAtStart) {
    const LambdaSearch s = find_lambda0(test::make_problem(1), options_1d(), 1.5, 2.0);
    EXPECT_EQ(s.lambda0, 1.5);
    EXPECT_EQ(s.map->norms().sum(), 0.0);
}

TEST(FindLambda, ConstantDriftFirstCertifiedRung) {
    const LambdaSearch s = find_lambda0(constant_problem(make_vec({1.0})), options_1d(), 1.0, 2.0);
    EXPECT_EQ(s.lambda0, 2.0);
    EXPECT_NEAR(s.map->norms().u, 0.5, 1e-12);
    EXPECT_NEAR(s.map->norms().grad, 0.0, 1e-10);
    ASSERT_EQ(s.ladder.size(), 2u);
    EXPECT_FALSE(s.ladder[0].certified);
}

TEST(FindLambda, TanhNormsDecreaseAlongLadder) {
    const LambdaSearch s = find_lambda0(tanh_problem(), options_1d(), 0.5, 2.0);
    ASSERT_GE(s.ladder.size(), 3u);
    for (std::size_t i = 1; i < s.ladder.size(); ++i) {
        EXPECT_LT(s.ladder[i].norms.sum(), s.ladder[i - 1].norms.sum());
    }
}

TEST(FindLambda, CapRaisesWithLadder) {
    try {
        find_lambda0(constant_problem(make_vec({1.0})), options_1d(), 0.1, 2.0, 4.0);
        FAIL();
    } catch (const CertificationError& e) {
        EXPECT_EQ(e.ladder().size(), 3u);
    }
}

class RegistryMap : public ::testing::Test {
protected:
    static void SetUpTestSuite() {
        const ProblemBundle b = registry_problem("dini-tanhlog-1d");
        ResolventOptions o;
        o.box = b.experiment.zvonkin_box;
        o.resolution = b.experiment.resolution;
        search_ = new LambdaSearch(find_lambda0(b.problem, o));
        problem_ = new SdeProblem(b.problem);
    }
    static void TearDownTestSuite() {
        delete search_;
        delete problem_;
    }
    static LambdaSearch* search_;
    static SdeProblem* problem_;
};
LambdaSearch* RegistryMap::search_ = nullptr;
SdeProblem* RegistryMap::problem_ = nullptr;

TEST_F(RegistryMap, Certified) {
    EXPECT_TRUE(search_->map->certified());
    EXPECT_LE(search_->map->norms().sum(), 0.5);
}

TEST_F(RegistryMap, RoundTrip) {
    const ZvonkinMap& m = *search_->map;
    for (const Vec& x : sample_points(m.interior().shrunk(0.05), 1000, 11)) {
        InverseTrace trace;
        const Vec back = m.theta_inv(m.theta(x), 1e-12, &trace);
        EXPECT_LT((back - x).norm(), 1e-10);
        for (double r : trace.ratios) EXPECT_LE(r, 0.5 + 1e-6);
    }
}

TEST_F(RegistryMap, LowerLipschitzBound) {
    const ZvonkinMap& m = *search_->map;
    for (const auto& pair : sample_pairs(m.interior(), 2000, 12)) {
        EXPECT_GE((m.theta(pair.x) - m.theta(pair.y)).norm(), 0.5 * (pair.x - pair.y).norm() - 1e-12);
    }
}

TEST_F(RegistryMap, FileRoundTrip) {
    const auto dir = std::filesystem::temp_directory_path() / "sldp_map_test";
    std::filesystem::create_directories(dir);
    write_map(*search_->map, dir / "map.json", dir / "map.csv");
    const ZvonkinMap back = read_map(dir / "map.json");
    EXPECT_EQ(back.lambda(), search_->map->lambda());
    EXPECT_EQ(back.u().values(), search_->map->u().values());
    EXPECT_EQ(back.certified(), search_->map->certified());
    std::filesystem::remove_all(dir);
}

TEST_F(RegistryMap, TransformedEllipticityBound) {
    const TransformedSde t(*problem_, search_->map);
    EXPECT_LE(t.transformed_ellipticity(), 4.0 * problem_->ellipticity_K);
}

TEST(Theta, ZeroAndConstantMaps) {
    const ZvonkinMap zero = solve_resolvent(test::make_problem(1), 2.0, options_1d());
    const Vec x = make_vec({1.3});
    EXPECT_EQ(zero.theta(x)[0], 1.3);
    InverseTrace trace;
    EXPECT_EQ(zero.theta_inv(x, 1e-12, &trace)[0], 1.3);
    EXPECT_LE(trace.steps.size(), 1u);

    const ZvonkinMap shift = solve_resolvent(constant_problem(make_vec({1.0})), 4.0, options_1d());
    EXPECT_NEAR(shift.theta(x)[0], 1.55, 1e-12);
    EXPECT_NEAR(shift.theta_inv(x)[0], 1.05, 1e-12);
}

TEST(TransformedSde, IdentityWhenSingularVanishes) {
    SdeProblem p = test::make_problem(1, VectorField::from_expression("0.3*sin(x1)", 1, 1), VectorField::zero(1, 1));
    auto map = std::make_shared<const ZvonkinMap>(solve_resolvent(p, 2.0, options_1d()));
    const TransformedSde t(p, map);
    const OriginalDynamics o(p);
    for (double y : {-2.0, 0.0, 0.4, 3.1}) {
        Vec dt, dor;
        Mat st, so;
        t.evaluate(0.3, make_vec({y}), dt, &st);
        o.evaluate(0.3, make_vec({y}), dor, &so);
        EXPECT_EQ(dt[0], dor[0]);
        EXPECT_EQ(st(0, 0), so(0, 0));
    }
}

TEST(TransformedSde, ConstantSingularShiftsDrift) {
    const double c = 0.8, lambda = 4.0, eps = 0.3;
    SdeProblem p = test::make_problem(1, VectorField::from_expression("0.3*sin(x1)", 1, 1),
                                      VectorField::constant(make_vec({c}), 1));
    auto map = std::make_shared<const ZvonkinMap>(solve_resolvent(p, lambda, options_1d()));
    const TransformedSde t(p, map);
    for (double y : {-2.0, 0.0, 0.4, 3.1}) {
        Vec d;
        Mat s;
        t.evaluate(eps, make_vec({y}), d, &s);
        EXPECT_NEAR(d[0], eps * c + 0.3 * std::sin(y - c / lambda), 1e-12);
        EXPECT_NEAR(s(0, 0), 1.0, 1e-12);
    }
}

TEST(TransformedSde, LipschitzOfTransformedLimitDrift) {
    const ProblemBundle b = registry_problem("dini-tanhlog-1d");
    ResolventOptions o;
    o.box = b.experiment.zvonkin_box;
    o.resolution = b.experiment.resolution;
    const LambdaSearch s = find_lambda0(b.problem, o);
    const TransformedSde t(b.problem, s.map);
    const VectorField limit = VectorField::native("transformed-limit", 1, 1, 1, [&](const Vec& y, Mat& out) {
        Vec d;
        t.evaluate(0.0, y, d, nullptr);
        out = d;
    });
    const Box image = t.domain().shrunk(0.1);
    const double probed = probe_lipschitz(limit, image, 4000, 3);
    const double lip_b1 = probe_lipschitz(b.problem.drift.limit, b.problem.box, 4000, 3);
    const double sup_b1 = probe_sup_norm(b.problem.drift.limit, b.problem.box, 4000, 3);
    // chain rule: |d/dy (I + Du) b(theta^-1 y)| <= (|D^2u| sup|b| + (1 + |Du|) L) * |D theta^-1|
    const auto& n = s.map->norms();
    EXPECT_LE(probed, (n.hess * sup_b1 + (1 + n.grad) * lip_b1) / (1 - n.grad) + 1e-9);
}
