#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "csr/tensor.hpp"

namespace csr {

// Reverse-mode accumulation over Tensors. Every op builds a Node whose
// backfn routes the incoming gradient into its parents; backward() runs the
// tape in reverse topological order. Graphs are rebuilt per evaluation.
class Node {
public:
    Tensor value;
    Tensor grad;  // allocated on first touch during backward
    std::vector<std::shared_ptr<Node>> parents;
    std::function<void(Node&)> backfn;
    bool requires_grad = false;

    Tensor& grad_buf();  // zero-initialized to value's shape
};

using NodeRef = std::shared_ptr<Node>;

class Var {
public:
    Var() = default;
    explicit Var(NodeRef n) : node_(std::move(n)) {}

    static Var constant(Tensor t);
    static Var leaf(Tensor t);  // trainable: participates in backward

    bool defined() const { return node_ != nullptr; }
    const Tensor& value() const { return node_->value; }
    Tensor& value() { return node_->value; }
    Tensor& grad() const { return node_->grad_buf(); }
    bool requires_grad() const { return node_->requires_grad; }
    NodeRef node() const { return node_; }

private:
    NodeRef node_;
};

// Root must be a single-element tensor; seeds its grad with 1.
void backward(const Var& root);

// ---- ops ----
Var matmul(const Var& a, const Var& b);
Var add(const Var& a, const Var& b);              // same shape
Var add_rowvec(const Var& a, const Var& b);       // b (1-D, len C) broadcast over rows of a
Var sub(const Var& a, const Var& b);
Var mul(const Var& a, const Var& b);              // elementwise
Var neg(const Var& a);
Var scale(const Var& a, double c);
Var tanh_v(const Var& a);
Var sigmoid_v(const Var& a);
Var relu_v(const Var& a);
Var exp_v(const Var& a);
Var log_v(const Var& a);
Var softmax_rows(const Var& a);
Var log_softmax_rows(const Var& a);
Var sum(const Var& a);   // scalar
Var mean(const Var& a);  // scalar
Var concat_cols(const Var& a, const Var& b);
Var concat_rows(const std::vector<Var>& rows);
Var slice_cols(const Var& a, std::size_t c0, std::size_t c1);  // [c0, c1)
Var slice_rows(const Var& a, std::size_t r0, std::size_t r1);
Var select_row(const Var& a, std::size_t r);  // 1×C view
Var transpose_v(const Var& a);
// Embedding lookup: out row i = table row ids[i]; grad scatter-adds.
Var rows_gather(const Var& table, const std::vector<int>& ids);

// Weighted token cross-entropy over logits rows (softmax inside, stable).
// loss = sum_i w_i * (-log softmax(logits_i)[t_i]); divides by sum_i w_i when
// mean=true. Zero total weight with mean=true yields loss 0.
Var cross_entropy_rows(const Var& logits, const std::vector<int>& targets,
                       const std::vector<double>& weights, bool mean);

// Per-row layer norm with learnable gain/bias (1-D, len C).
Var layer_norm_rows(const Var& x, const Var& gain, const Var& bias, double eps = 1e-5);

}  // namespace csr
