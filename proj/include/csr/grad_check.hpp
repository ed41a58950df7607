#pragma once

#include <functional>
#include <vector>

#include "csr/nn.hpp"

namespace csr {

// Compares analytic gradients against central differences
// (f(t+e) - f(t-e)) / 2e and returns the max over all coordinates of
// |a - n| / max(|a|, |n|, 1e-8). `loss` rebuilds the graph from the current
// parameter values on every call; parameters must be F64.
double grad_check(const std::function<Var()>& loss, const std::vector<Parameter*>& params,
                  double eps = 1e-5);

}  // namespace csr
