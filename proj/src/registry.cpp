#include "sldp/registry.hpp"

#include "sldp/errors.hpp"

#include <cmath>

namespace sldp {

VectorField dini_tanhlog_field(int dim, double beta) {
    VectorField f = VectorField::native(
        "dini_tanhlog(beta=" + std::to_string(beta) + ")", dim, dim, 1, [dim, beta](const Vec& y, Mat& out) {
            out.resize(dim, 1);
            for (int i = 0; i < dim; ++i) {
                const double a = std::abs(y[i]);
                if (a == 0.0) {
                    out(i, 0) = 0.0;
                    continue;
                }
                const double phi = std::pow(std::log1p(1.0 / a), -beta);
                out(i, 0) = std::copysign(std::tanh(phi), y[i]);
            }
        });
    f.set_modulus(Modulus::dini_log(beta, 2.0 * std::sqrt(static_cast<double>(dim))));
    f.set_bound(std::sqrt(static_cast<double>(dim)));
    return f;
}

VectorField holder_sign_field(int dim, double alpha) {
    VectorField f = VectorField::native(
        "holder_sign(alpha=" + std::to_string(alpha) + ")", dim, dim, 1, [dim, alpha](const Vec& y, Mat& out) {
            out.resize(dim, 1);
            for (int i = 0; i < dim; ++i) {
                out(i, 0) = std::copysign(std::min(std::pow(std::abs(y[i]), alpha), 1.0), y[i]);
            }
        });
    f.set_modulus(Modulus::holder(alpha, std::sqrt(2.0 * dim)));
    f.set_bound(std::sqrt(static_cast<double>(dim)));
    return f;
}

namespace {

VectorField zero_singular(int dim) {
    VectorField f = VectorField::zero(dim, dim);
    f.set_modulus(Modulus::lipschitz(0.0));
    return f;
}

VectorField unit_diffusion(int dim) {
    return VectorField::constant_matrix(Mat::Identity(dim, dim), dim);
}

ProblemBundle nondegenerate_base(std::string name, int dim) {
    ProblemBundle b;
    SdeProblem& p = b.problem;
    p.name = std::move(name);
    p.layout = Layout::nondegenerate;
    p.state_dim = dim;
    p.horizon = 1.0;
    p.start = Vec::Zero(dim);
    p.box = Box::cube(dim, -5.0, 5.0);
    p.drift.limit = VectorField::zero(dim, dim);
    p.singular = zero_singular(dim);
    p.diffusion = unit_diffusion(dim);
    p.ellipticity_K = 2.0;
    b.experiment.rate_target = Vec::Zero(dim);
    b.experiment.rate_target[0] = 1.0;
    b.experiment.zvonkin_box = Box::cube(dim, -6.0, 6.0);
    b.experiment.resolution = dim == 1 ? 1201 : 65;
    return b;
}

ProblemBundle brownian_1d() {
    ProblemBundle b = nondegenerate_base("brownian-1d", 1);
    b.problem.lipschitz_L = 1.0;
    return b;
}

ProblemBundle ou_1d() {
    ProblemBundle b = nondegenerate_base("ou-1d", 1);
    b.problem.drift.limit = VectorField::linear(Mat::Constant(1, 1, -1.0));
    b.problem.lipschitz_L = 1.0;
    b.problem.ellipticity_K = 6.0;  // |x| <= 5 on the box
    return b;
}

ProblemBundle free_endpoint() {
    ProblemBundle b = nondegenerate_base("free-endpoint", 2);
    b.problem.lipschitz_L = 1.0;
    return b;
}

ProblemBundle dini_tanhlog_1d() {
    ProblemBundle b = nondegenerate_base("dini-tanhlog-1d", 1);
    SdeProblem& p = b.problem;
    p.drift.limit = VectorField::native("0.2*sin", 1, 1, 1, [](const Vec& x, Mat& out) {
        out.resize(1, 1);
        out(0, 0) = 0.2 * std::sin(x[0]);
    });
    p.drift.perturbation = VectorField::native("0.5*tanh", 1, 1, 1, [](const Vec& x, Mat& out) {
        out.resize(1, 1);
        out(0, 0) = 0.5 * std::tanh(x[0]);
    });
    p.singular = dini_tanhlog_field(1, 2.0);
    p.lipschitz_L = 1.0;
    return b;
}

ProblemBundle holder_1d() {
    ProblemBundle b = nondegenerate_base("holder-1d", 1);
    b.problem.singular = holder_sign_field(1, 0.5);
    b.problem.lipschitz_L = 1.0;
    return b;
}

ProblemBundle hamiltonian_2d() {
    ProblemBundle b;
    SdeProblem& p = b.problem;
    p.name = "hamiltonian-2d";
    p.layout = Layout::degenerate;
    p.state_dim = 2;
    p.d1 = 1;
    p.horizon = 1.0;
    p.start = Vec::Zero(2);
    p.box = Box::cube(2, -5.0, 5.0);
    // dx = y dt, dy = (-0.5 tanh(x) + eps b(y)) dt + sqrt(eps) dW
    p.drift.limit = VectorField::native("hamiltonian-2d-limit", 2, 2, 1, [](const Vec& z, Mat& out) {
        out.resize(2, 1);
        out(0, 0) = z[1];
        out(1, 0) = -0.5 * std::tanh(z[0]);
    });
    p.drift.perturbation = VectorField::native("hamiltonian-2d-perturbation", 2, 2, 1, [](const Vec& z, Mat& out) {
        out.resize(2, 1);
        out(0, 0) = 0.1 * std::sin(z[0]);
        out(1, 0) = 0.25 * std::tanh(z[1]);
    });
    p.singular = dini_tanhlog_field(1, 2.0);
    p.diffusion = unit_diffusion(1);
    p.ellipticity_K = 2.0;

    ExperimentDefaults& e = b.experiment;
    e.event_coordinate = 1;
    e.event_threshold = 1.0;
    e.eps_ladder = {0.5, 0.35, 0.25, 0.175, 0.125};
    e.n_paths = 200000;
    e.n_steps = 100;
    e.rate_target = Vec::Constant(1, 1.0);
    e.zvonkin_box = Box::cube(1, -6.0, 6.0);
    e.resolution = 1201;
    return b;
}

struct Entry {
    const char* name;
    ProblemBundle (*make)();
};

constexpr Entry kEntries[] = {
    {"brownian-1d", brownian_1d},         {"ou-1d", ou_1d},         {"free-endpoint", free_endpoint},
    {"dini-tanhlog-1d", dini_tanhlog_1d}, {"holder-1d", holder_1d}, {"hamiltonian-2d", hamiltonian_2d},
};

}  // namespace

std::vector<std::string> registry_names() {
    std::vector<std::string> names;
    for (const auto& e : kEntries) names.emplace_back(e.name);
    return names;
}

bool is_registry_name(std::string_view name) {
    for (const auto& e : kEntries) {
        if (name == e.name) return true;
    }
    return false;
}

ProblemBundle registry_problem(std::string_view name) {
    for (const auto& e : kEntries) {
        if (name == e.name) {
            ProblemBundle b = e.make();
            b.problem.check_structure();
            return b;
        }
    }
    throw InputError("unknown registry problem '" + std::string(name) + "'");
}

}  // namespace sldp
