#include "csr/optim.hpp"

#include <cmath>

namespace csr {

void Adam::step(const std::vector<Parameter*>& params) {
    ++t_;
    double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
    double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
    for (Parameter* p : params) {
        auto [it, fresh] = slots_.try_emplace(p);
        Slot& s = it->second;
        if (fresh) {
            s.m = Tensor::zeros(p->value().shape());
            s.v = Tensor::zeros(p->value().shape());
        }
        Tensor& val = p->value();
        const Tensor& g = p->grad();
        for (std::size_t i = 0; i < val.size(); ++i) {
            s.m[i] = beta1_ * s.m[i] + (1.0 - beta1_) * g[i];
            s.v[i] = beta2_ * s.v[i] + (1.0 - beta2_) * g[i] * g[i];
            double mhat = s.m[i] / bc1;
            double vhat = s.v[i] / bc2;
            val[i] -= lr_ * mhat / (std::sqrt(vhat) + eps_);
        }
        val.quantize();
        val.check_finite("adam");
    }
}

void Adam::zero_grad(const std::vector<Parameter*>& params) {
    for (Parameter* p : params) p->zero_grad();
}

}  // namespace csr
