#pragma once

#include "sldp/registry.hpp"

#include <json.hpp>

#include <cstdint>
#include <set>
#include <string>
#include <vector>

namespace sldp {

struct GateResult {
    std::string name;
    std::string claim;
    bool passed = false;
    bool skipped = false;
    std::string note;
    nlohmann::ordered_json details;
};

struct VerifyOptions {
    std::uint64_t seed = 20261017;
    int workers = 1;
    /// Overrides the bundle's path count when positive.
    long n_paths = 0;
    int restarts = 8;
    /// Gate names to skip; each skip is echoed in the report.
    std::set<std::string> skip;
};

/// Gate names in execution order.
std::vector<std::string> verify_gate_names();

/// Runs the gate pipeline on one problem: validate, zvonkin certificate,
/// homeomorphism, Ito conjugacy, transform rate identity, LDP slope vs
/// rate, singular-drift insensitivity, closed-event bound and (degenerate
/// layout) the noise-free x-block. Gates that do not apply to the problem
/// pass with a note; gates the caller skips are marked skipped.
std::vector<GateResult> run_verify(const ProblemBundle& bundle, const VerifyOptions& options);

}  // namespace sldp
