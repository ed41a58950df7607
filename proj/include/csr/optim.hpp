#pragma once

#include <unordered_map>
#include <vector>

#include "csr/nn.hpp"

namespace csr {

// Adam with bias correction; defaults lr 1e-3, betas (0.9, 0.999).
class Adam {
public:
    explicit Adam(double lr = 1e-3, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8)
        : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {}

    void step(const std::vector<Parameter*>& params);
    void zero_grad(const std::vector<Parameter*>& params);

    double lr() const { return lr_; }
    void set_lr(double lr) { lr_ = lr; }

private:
    struct Slot {
        Tensor m, v;
    };
    double lr_, beta1_, beta2_, eps_;
    long t_ = 0;
    std::unordered_map<const Parameter*, Slot> slots_;
};

}  // namespace csr
