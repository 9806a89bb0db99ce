#pragma once

#include "sldp/field.hpp"
#include "sldp/problem.hpp"

#include <string>
#include <string_view>
#include <vector>

namespace sldp {

/// Run parameters that travel with a problem: the rare event used for LDP
/// experiments, the rate target, and the Zvonkin grid.
struct ExperimentDefaults {
    /// Event {z_T[event_coordinate] >= event_threshold}, 0-based coordinate.
    int event_coordinate = 0;
    double event_threshold = 1.0;
    std::vector<double> eps_ladder{0.5, 0.25, 0.125, 0.0625};
    long n_paths = 100000;
    int n_steps = 100;
    /// Endpoint target for rate computations on the noisy block.
    Vec rate_target;

    Box zvonkin_box;
    int resolution = 1201;
    double margin = 0.2;
    double lambda_start = 1.0;
    double lambda_growth = 2.0;
    double conjugacy_eps = 0.5;
    int conjugacy_steps = 50;
};

struct ProblemBundle {
    SdeProblem problem;
    ExperimentDefaults experiment;
};

/// Names of the bundled problems.
std::vector<std::string> registry_names();
bool is_registry_name(std::string_view name);
/// Throws InputError for unknown names.
ProblemBundle registry_problem(std::string_view name);

/// b(y) = tanh(sign(y) (log(1 + 1/|y|))^-beta) componentwise, |b| <= 1.
/// Continuity modulus 2 sqrt(m) (log(1 + 1/t))^-beta.
VectorField dini_tanhlog_field(int dim, double beta);

/// b(y) = sign(y) min(|y|^alpha, 1) componentwise, modulus sqrt(2m) t^alpha.
VectorField holder_sign_field(int dim, double alpha);

}  // namespace sldp
