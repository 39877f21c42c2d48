#pragma once

#include <span>
#include <string>
#include <vector>

#include "pyrad/tensor.hpp"

namespace pyrad {

struct GradCheckResult {
    std::string name;
    double max_rel_err = 0.0;
    bool pass = false;
};

// max|a-n| / max(max|a|, max|n|, 1e-6): per-tensor relative error used by
// every tape-vs-finite-difference comparison.
double grad_rel_error(std::span<const float> analytic, std::span<const float> numeric);

// One check per differentiable operator plus the full model+objective
// composite; each builds a small random graph, runs backward and compares
// against central finite differences.
std::vector<GradCheckResult> run_gradchecks(uint64_t seed, double tol = 1e-3);

} // namespace pyrad
