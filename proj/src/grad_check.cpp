#include "csr/grad_check.hpp"

#include <cmath>

#include "csr/error.hpp"

namespace csr {

double grad_check(const std::function<Var()>& loss, const std::vector<Parameter*>& params,
                  double eps) {
    if (eps <= 0.0) throw NumericError("grad_check: eps must be positive");
    for (Parameter* p : params) {
        if (p->value().dtype() != Dtype::F64)
            throw NumericError("grad_check: parameter " + p->name + " is not F64");
        p->zero_grad();
    }
    Var l = loss();
    if (!l.value().all_finite()) throw NumericError("grad_check: non-finite loss");
    backward(l);
    std::vector<Tensor> analytic;
    analytic.reserve(params.size());
    for (Parameter* p : params) analytic.push_back(p->grad());

    double max_rel = 0.0;
    for (std::size_t pi = 0; pi < params.size(); ++pi) {
        Tensor& val = params[pi]->value();
        for (std::size_t i = 0; i < val.size(); ++i) {
            double orig = val[i];
            val[i] = orig + eps;
            double up = loss().value()[0];
            val[i] = orig - eps;
            double dn = loss().value()[0];
            val[i] = orig;
            if (!std::isfinite(up) || !std::isfinite(dn))
                throw NumericError("grad_check: non-finite perturbed loss");
            double numeric = (up - dn) / (2.0 * eps);
            double a = analytic[pi][i];
            double rel = std::abs(a - numeric) / std::max({std::abs(a), std::abs(numeric), 1e-8});
            if (rel > max_rel) max_rel = rel;
        }
    }
    return max_rel;
}

}  // namespace csr
