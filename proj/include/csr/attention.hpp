#pragma once

#include <cstddef>
#include <optional>

#include "csr/autodiff.hpp"
#include "csr/nn.hpp"
#include "csr/tensor.hpp"

namespace csr {

// One decoder step's attention: weights alpha_j over T encoder states, the
// context vector (their weighted sum), and the raw scores.
struct AttentionOutput {
    Tensor weights;  // (T), nonnegative, sums to 1
    Tensor context;  // (D), same dim as the encoder states
    Tensor scores;   // (T)
};

struct PositionalEncoding {
    Tensor table;  // (max_len, d_model), entries in [-1, 1]
};

// score_i = s . h_i over the rows of H. s (D), H (T, D).
Tensor dot_score(const Tensor& s, const Tensor& H);

// score_i = s^T W_a h_i. W_a (dim s, dim h). With W_a = I this reproduces
// dot_score bit-for-bit (explicit accumulation order shared with dot_score).
Tensor matrix_score(const Tensor& s, const Tensor& H, const Tensor& w_a);

// weights = softmax(scores); context = sum_j alpha_j h_j.
AttentionOutput attend(const Tensor& scores, const Tensor& H);

// softmax(Q K^T / sqrt(d_k)) V. Q (n, d_k), K (m, d_k), V (m, d_v).
Tensor scaled_dot_attention(const Tensor& q, const Tensor& k, const Tensor& v);

struct MhaWeights {
    Tensor wq, wk, wv, wo;  // each (d_model, d_model)
};

// Per-head projected scaled-dot attention, concatenated and output-projected.
// d_model must be divisible by n_heads.
Tensor multi_head(const Tensor& q, const Tensor& k, const Tensor& v, std::size_t n_heads,
                  const MhaWeights& w);

// PE(pos, 2i) = sin(pos / 10000^(2i/d)), PE(pos, 2i+1) = cos(...).
PositionalEncoding positional_encoding(std::size_t max_len, std::size_t d_model);

// ---- autodiff counterparts used inside the trainable models ----

// scores (1, T), H (T, D) -> context (1, D); weights = softmax(scores).
Var attend_v(const Var& scores, const Var& h);

// Q (n, dk), K (m, dk), V (m, dv); optional additive score mask (n, m),
// e.g. a causal or padding mask of 0 / -1e9 entries.
Var scaled_dot_attention_v(const Var& q, const Var& k, const Var& v,
                           const Tensor* score_mask = nullptr);

class MultiHeadAttention {
public:
    MultiHeadAttention() = default;
    MultiHeadAttention(ParamStore& store, const std::string& prefix, std::size_t d_model,
                       std::size_t n_heads, Rng& rng);

    Var apply(const Var& q, const Var& k, const Var& v,
              const Tensor* score_mask = nullptr) const;

    std::size_t n_heads() const { return n_heads_; }
    std::size_t d_model() const { return d_model_; }

private:
    std::size_t d_model_ = 0, n_heads_ = 0;
    Parameter* wq_ = nullptr;
    Parameter* wk_ = nullptr;
    Parameter* wv_ = nullptr;
    Parameter* wo_ = nullptr;
};

// Post-norm transformer encoder layer: MHA + residual + LN, FFN + residual
// + LN. FFN is d_model -> 4*d_model (ReLU) -> d_model.
class TransformerEncoderLayer {
public:
    TransformerEncoderLayer() = default;
    TransformerEncoderLayer(ParamStore& store, const std::string& prefix, std::size_t d_model,
                            std::size_t n_heads, Rng& rng);

    Var apply(const Var& x, const Tensor* score_mask = nullptr) const;

private:
    MultiHeadAttention mha_;
    Linear ff1_, ff2_;
    Parameter* ln1_g_ = nullptr;
    Parameter* ln1_b_ = nullptr;
    Parameter* ln2_g_ = nullptr;
    Parameter* ln2_b_ = nullptr;
};

// Decoder layer with causal self-attention and cross-attention over encoder
// states (cross window restriction is applied by passing a mask).
class TransformerDecoderLayer {
public:
    TransformerDecoderLayer() = default;
    TransformerDecoderLayer(ParamStore& store, const std::string& prefix, std::size_t d_model,
                            std::size_t n_heads, Rng& rng);

    Var apply(const Var& x, const Var& memory, const Tensor* self_mask,
              const Tensor* cross_mask) const;

private:
    MultiHeadAttention self_mha_, cross_mha_;
    Linear ff1_, ff2_;
    Parameter* ln1_g_ = nullptr;
    Parameter* ln1_b_ = nullptr;
    Parameter* ln2_g_ = nullptr;
    Parameter* ln2_b_ = nullptr;
    Parameter* ln3_g_ = nullptr;
    Parameter* ln3_b_ = nullptr;
};

// 0 above/on the diagonal, -1e9 strictly above: rows may only attend to
// earlier or equal positions.
Tensor causal_mask(std::size_t n);

}  // namespace csr
