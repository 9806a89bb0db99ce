#pragma once

#include "sldp/problem.hpp"

namespace sldp::test {

// Nondegenerate problem on [-5, 5]^dim with sigma = I, b1 = limit, b2 = singular.
inline SdeProblem make_problem(int dim, VectorField limit, VectorField singular) {
    SdeProblem p;
    p.name = "test";
    p.state_dim = dim;
    p.horizon = 1.0;
    p.start = Vec::Zero(dim);
    p.box = Box::cube(dim, -5.0, 5.0);
    p.drift.limit = std::move(limit);
    p.singular = std::move(singular);
    p.singular.set_modulus(Modulus::lipschitz(1.0));
    p.diffusion = VectorField::constant_matrix(Mat::Identity(dim, dim), dim);
    p.ellipticity_K = 2.0;
    p.lipschitz_L = 1.0;
    return p;
}

inline SdeProblem make_problem(int dim) { return make_problem(dim, VectorField::zero(dim, dim), VectorField::zero(dim, dim)); }

inline VectorField scalar_field(double (*f)(double)) {
    return VectorField::native("test", 1, 1, 1, [f](const Vec& x, Mat& out) {
        out.resize(1, 1);
        out(0, 0) = f(x[0]);
    });
}

}  // namespace sldp::test
