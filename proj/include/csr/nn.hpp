#pragma once

#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "csr/autodiff.hpp"
#include "csr/rng.hpp"
#include "csr/tensor.hpp"

namespace csr {

// Named trainable tensor; value/grad live on the autodiff leaf node.
struct Parameter {
    std::string name;
    Var var;

    Tensor& value() { return var.value(); }
    const Tensor& value() const { return var.value(); }
    Tensor& grad() { return var.grad(); }
    void zero_grad() {
        Tensor& g = var.grad();
        std::fill(g.data().begin(), g.data().end(), 0.0);
    }
};

// Owns a model's parameters; registration order is the checkpoint order.
class ParamStore {
public:
    Parameter& add(const std::string& name, Tensor init);
    // uniform(-1/sqrt(fan_in), +1/sqrt(fan_in))
    Parameter& add_uniform(const std::string& name, std::vector<std::size_t> shape,
                           std::size_t fan_in, Rng& rng, Dtype dt = Dtype::F64);
    Parameter& add_zeros(const std::string& name, std::vector<std::size_t> shape,
                         Dtype dt = Dtype::F64);

    std::vector<Parameter*> all();
    std::vector<const Parameter*> all() const;
    Parameter* find(const std::string& name);

private:
    std::vector<std::unique_ptr<Parameter>> params_;
};

struct LstmState {
    Tensor hidden;  // (H) or (B,H)
    Tensor cell;    // same shape
};

struct LstmParams {
    Tensor w_ih;  // (I, 4H) gate order i,f,g,o
    Tensor w_hh;  // (H, 4H)
    Tensor bias;  // (4H)
};

// Standard LSTM gate equations, no autodiff. x is (I) or (B,I); state dims
// must match. |hidden| <= 1 elementwise by the tanh/sigmoid construction.
LstmState lstm_step(const Tensor& x, const LstmState& prev, const LstmParams& params);

// Autodiff LSTM cell over batched rows.
class LstmCell {
public:
    LstmCell() = default;
    LstmCell(ParamStore& store, const std::string& prefix, std::size_t input_dim,
             std::size_t hidden_dim, Rng& rng);

    std::size_t input_dim() const { return input_dim_; }
    std::size_t hidden_dim() const { return hidden_dim_; }

    // x: (B,I), h/c: (B,H) -> {h', c'}
    std::pair<Var, Var> step(const Var& x, const Var& h, const Var& c) const;

    Parameter* w_ih = nullptr;
    Parameter* w_hh = nullptr;
    Parameter* bias = nullptr;

private:
    std::size_t input_dim_ = 0;
    std::size_t hidden_dim_ = 0;
};

class Linear {
public:
    Linear() = default;
    Linear(ParamStore& store, const std::string& prefix, std::size_t in_dim, std::size_t out_dim,
           Rng& rng);

    Var apply(const Var& x) const;  // x (B,I) -> (B,O)

    Parameter* weight = nullptr;  // (I, O)
    Parameter* bias = nullptr;    // (O)
};

class Embedding {
public:
    Embedding() = default;
    Embedding(ParamStore& store, const std::string& name, std::size_t vocab, std::size_t dim,
              Rng& rng);

    Var lookup(const std::vector<int>& ids) const;  // (len(ids), D)
    std::size_t dim() const { return dim_; }

    Parameter* table = nullptr;  // (V, D)

private:
    std::size_t dim_ = 0;
};

// Global-norm gradient clipping; returns the pre-clip norm.
double clip_grad_norm(const std::vector<Parameter*>& params, double max_norm);

}  // namespace csr
