#include "sldp/errors.hpp"
#include "sldp/probes.hpp"
#include "sldp/problem_file.hpp"
#include "sldp/registry.hpp"

#include <gtest/gtest.h>

#include <string>

using namespace sldp;

namespace {

std::string error_of(const std::string& text) {
    try {
        problem_from_document(parse_key_value(text, "case.ini"), "case.ini");
    } catch (const InputError& e) {
        return e.what();
    }
    return "";
}

const char* kMinimal = "[problem]\ndim = 1\n[drift]\nlimit = 0\n[diffusion]\nfield = 1\n";

}  // namespace

TEST(ProblemFile, Minimal) {
    const ProblemBundle b = problem_from_document(parse_key_value(kMinimal, "m"), "m");
    EXPECT_EQ(b.problem.state_dim, 1);
    EXPECT_EQ(b.problem.horizon, 1.0);
    EXPECT_EQ(b.problem.start[0], 0.0);
}

TEST(ProblemFile, SyntaxErrorsNameTheLine) {
    EXPECT_NE(error_of("[problem]\ndim = 1\nnonsense\n").find("case.ini:3"), std::string::npos);
    EXPECT_NE(error_of("[problem\n").find("case.ini:1"), std::string::npos);
    EXPECT_NE(error_of("dim = 1\n").find("outside"), std::string::npos);
    EXPECT_NE(error_of("[problem]\ndim = 1\ndim = 2\n").find("duplicate"), std::string::npos);
    EXPECT_NE(error_of("[a]\nk = \"open\n").find("unterminated"), std::string::npos);
}

TEST(ProblemFile, SemanticErrors) {
    EXPECT_NE(error_of(std::string(kMinimal) + "color = blue\n").find("unknown key"), std::string::npos);
    EXPECT_NE(error_of("[problem]\ndim = 1\n[drift]\nlimit = 0\n").find("[diffusion]"), std::string::npos);
    EXPECT_NE(error_of("[problem]\ndim = 2\n[drift]\nlimit = 0\n[diffusion]\nfield = 1\n").find("entries"),
              std::string::npos);
    EXPECT_NE(error_of("[problem]\ndim = x\n[drift]\nlimit = 0\n[diffusion]\nfield = 1\n").find("dim"),
              std::string::npos);
    EXPECT_THROW(problem_from_document(parse_key_value("[problem]\ndim = 1\n[drift]\nlimit = x1 +\n[diffusion]\nfield = 1\n", "e"), "e"),
                 ParseError);
}

TEST(ProblemFile, CommentsAndQuotes) {
    const ProblemBundle b = problem_from_document(
        parse_key_value("[problem]  # header\ndim = 1 # one\nname = \"a # b\"\n[drift]\nlimit = -x1\n[diffusion]\nfield = 1\n",
                        "c"),
        "c");
    EXPECT_EQ(b.problem.name, "a # b");
}

TEST(ProblemFile, BundledFilesMatchRegistry) {
    for (const std::string& name : registry_names()) {
        const ProblemBundle file = load_problem_file(std::string(SLDP_PROBLEMS_DIR) + "/" + name + ".ini");
        const ProblemBundle reg = registry_problem(name);
        EXPECT_EQ(file.problem.name, name);
        EXPECT_EQ(file.problem.state_dim, reg.problem.state_dim);
        EXPECT_EQ(file.problem.layout, reg.problem.layout);
        EXPECT_EQ(file.problem.ellipticity_K, reg.problem.ellipticity_K) << name;
        EXPECT_EQ(file.experiment.eps_ladder, reg.experiment.eps_ladder) << name;
        EXPECT_EQ(file.experiment.n_paths, reg.experiment.n_paths) << name;
        EXPECT_EQ(file.experiment.event_coordinate, reg.experiment.event_coordinate) << name;
        EXPECT_EQ(file.experiment.rate_target, reg.experiment.rate_target) << name;
        for (const Vec& z : sample_points(reg.problem.box, 50, 1)) {
            EXPECT_NEAR((file.problem.drift(0.3, z) - reg.problem.drift(0.3, z)).norm(), 0.0, 1e-14) << name;
            const Vec y = z.tail(reg.problem.noise_dim());
            EXPECT_NEAR((file.problem.singular(y) - reg.problem.singular(y)).norm(), 0.0, 1e-14) << name;
            EXPECT_NEAR((file.problem.diffusion.matrix(y) - reg.problem.diffusion.matrix(y)).norm(), 0.0, 1e-14);
        }
        const auto& fm = file.problem.singular.declared_modulus();
        const auto& rm = reg.problem.singular.declared_modulus();
        ASSERT_TRUE(fm && rm);
        for (double t : {1e-6, 0.01, 0.5}) EXPECT_NEAR((*fm)(t), (*rm)(t), 1e-14) << name;
    }
}

TEST(ProblemFile, ResolveByNameOrPath) {
    EXPECT_EQ(resolve_problem("ou-1d").problem.name, "ou-1d");
    EXPECT_EQ(resolve_problem(std::string(SLDP_PROBLEMS_DIR) + "/ou-1d.ini").problem.name, "ou-1d");
    EXPECT_THROW(resolve_problem("no-such-problem"), InputError);
}
