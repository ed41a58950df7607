#include "csr/attention.hpp"

#include <cmath>

#include "csr/error.hpp"

namespace csr {

Tensor dot_score(const Tensor& s, const Tensor& h) {
    if (h.rank() != 2 || s.size() != h.cols())
        throw ShapeError("dot_score: state dim does not match encoder states");
    Tensor out({h.rows()}, promote(s.dtype(), h.dtype()));
    for (std::size_t i = 0; i < h.rows(); ++i) {
        double acc = 0.0;
        for (std::size_t j = 0; j < h.cols(); ++j) acc += s[j] * h.at(i, j);
        out[i] = acc;
    }
    out.quantize();
    out.check_finite("dot_score");
    return out;
}

Tensor matrix_score(const Tensor& s, const Tensor& h, const Tensor& w_a) {
    if (h.rank() != 2 || w_a.rank() != 2) throw ShapeError("matrix_score: need 2-D H and W_a");
    if (w_a.rows() != s.size() || w_a.cols() != h.cols())
        throw ShapeError("matrix_score: W_a must be (dim s, dim h)");
    // tmp = s^T W_a, then the same inner loop as dot_score so that W_a = I
    // reproduces it bit-for-bit.
    Tensor tmp({w_a.cols()}, promote(s.dtype(), w_a.dtype()));
    for (std::size_t j = 0; j < w_a.cols(); ++j) {
        double acc = 0.0;
        for (std::size_t k = 0; k < w_a.rows(); ++k) acc += s[k] * w_a.at(k, j);
        tmp[j] = acc;
    }
    return dot_score(tmp, h);
}

AttentionOutput attend(const Tensor& scores, const Tensor& h) {
    if (h.rank() != 2 || h.rows() == 0) throw ShapeError("attend: empty encoder states");
    if (scores.size() != h.rows()) throw ShapeError("attend: score count != state count");
    AttentionOutput out;
    out.scores = scores;
    out.weights = softmax(scores);
    out.context = Tensor({h.cols()}, promote(scores.dtype(), h.dtype()));
    for (std::size_t j = 0; j < h.rows(); ++j)
        for (std::size_t c = 0; c < h.cols(); ++c) out.context[c] += out.weights[j] * h.at(j, c);
    out.context.quantize();
    out.context.check_finite("attend");
    return out;
}

Tensor scaled_dot_attention(const Tensor& q, const Tensor& k, const Tensor& v) {
    if (q.rank() != 2 || k.rank() != 2 || v.rank() != 2)
        throw ShapeError("scaled_dot_attention: 2-D inputs required");
    if (q.cols() != k.cols()) throw ShapeError("scaled_dot_attention: Q/K dim mismatch");
    if (k.rows() != v.rows()) throw ShapeError("scaled_dot_attention: K/V row mismatch");
    double inv = 1.0 / std::sqrt(static_cast<double>(q.cols()));
    Tensor scores = scale(matmul(q, transpose(k)), inv);
    Tensor weights = softmax(scores);
    return matmul(weights, v);
}

Tensor multi_head(const Tensor& q, const Tensor& k, const Tensor& v, std::size_t n_heads,
                  const MhaWeights& w) {
    std::size_t d_model = q.cols();
    if (n_heads == 0 || d_model % n_heads != 0)
        throw ShapeError("multi_head: d_model not divisible by n_heads");
    Tensor qp = matmul(q, w.wq);
    Tensor kp = matmul(k, w.wk);
    Tensor vp = matmul(v, w.wv);
    std::size_t dk = d_model / n_heads;
    Tensor concat({q.rows(), d_model}, qp.dtype());
    for (std::size_t head = 0; head < n_heads; ++head) {
        std::size_t c0 = head * dk;
        auto slice = [&](const Tensor& m) {
            Tensor s({m.rows(), dk}, m.dtype());
            for (std::size_t i = 0; i < m.rows(); ++i)
                for (std::size_t j = 0; j < dk; ++j) s.at(i, j) = m.at(i, c0 + j);
            return s;
        };
        Tensor head_out = scaled_dot_attention(slice(qp), slice(kp), slice(vp));
        for (std::size_t i = 0; i < q.rows(); ++i)
            for (std::size_t j = 0; j < dk; ++j) concat.at(i, c0 + j) = head_out.at(i, j);
    }
    return matmul(concat, w.wo);
}

PositionalEncoding positional_encoding(std::size_t max_len, std::size_t d_model) {
    if (max_len == 0 || d_model == 0) throw ShapeError("positional_encoding: zero dims");
    if (d_model % 2 != 0) throw ShapeError("positional_encoding: d_model must be even");
    PositionalEncoding pe;
    pe.table = Tensor({max_len, d_model});
    for (std::size_t pos = 0; pos < max_len; ++pos) {
        for (std::size_t i = 0; i < d_model / 2; ++i) {
            double denom = std::pow(10000.0, (2.0 * static_cast<double>(i)) /
                                                 static_cast<double>(d_model));
            double angle = static_cast<double>(pos) / denom;
            pe.table.at(pos, 2 * i) = std::sin(angle);
            pe.table.at(pos, 2 * i + 1) = std::cos(angle);
        }
    }
    return pe;
}

Var attend_v(const Var& scores, const Var& h) {
    return matmul(softmax_rows(scores), h);
}

Var scaled_dot_attention_v(const Var& q, const Var& k, const Var& v, const Tensor* score_mask) {
    double inv = 1.0 / std::sqrt(static_cast<double>(q.value().cols()));
    Var scores = scale(matmul(q, transpose_v(k)), inv);
    if (score_mask) scores = add(scores, Var::constant(*score_mask));
    return matmul(softmax_rows(scores), v);
}

MultiHeadAttention::MultiHeadAttention(ParamStore& store, const std::string& prefix,
                                       std::size_t d_model, std::size_t n_heads, Rng& rng)
    : d_model_(d_model), n_heads_(n_heads) {
    if (n_heads == 0 || d_model % n_heads != 0)
        throw ShapeError("multi_head: d_model not divisible by n_heads");
    wq_ = &store.add_uniform(prefix + ".wq", {d_model, d_model}, d_model, rng);
    wk_ = &store.add_uniform(prefix + ".wk", {d_model, d_model}, d_model, rng);
    wv_ = &store.add_uniform(prefix + ".wv", {d_model, d_model}, d_model, rng);
    wo_ = &store.add_uniform(prefix + ".wo", {d_model, d_model}, d_model, rng);
}

Var MultiHeadAttention::apply(const Var& q, const Var& k, const Var& v,
                              const Tensor* score_mask) const {
    Var qp = matmul(q, wq_->var);
    Var kp = matmul(k, wk_->var);
    Var vp = matmul(v, wv_->var);
    std::size_t dk = d_model_ / n_heads_;
    std::vector<Var> heads;
    heads.reserve(n_heads_);
    for (std::size_t head = 0; head < n_heads_; ++head) {
        std::size_t c0 = head * dk;
        heads.push_back(scaled_dot_attention_v(slice_cols(qp, c0, c0 + dk),
                                               slice_cols(kp, c0, c0 + dk),
                                               slice_cols(vp, c0, c0 + dk), score_mask));
    }
    Var concat = heads[0];
    for (std::size_t i = 1; i < heads.size(); ++i) concat = concat_cols(concat, heads[i]);
    return matmul(concat, wo_->var);
}

TransformerEncoderLayer::TransformerEncoderLayer(ParamStore& store, const std::string& prefix,
                                                 std::size_t d_model, std::size_t n_heads,
                                                 Rng& rng)
    : mha_(store, prefix + ".mha", d_model, n_heads, rng),
      ff1_(store, prefix + ".ff1", d_model, 4 * d_model, rng),
      ff2_(store, prefix + ".ff2", 4 * d_model, d_model, rng) {
    ln1_g_ = &store.add(prefix + ".ln1.gain", Tensor::full({d_model}, 1.0));
    ln1_b_ = &store.add_zeros(prefix + ".ln1.bias", {d_model});
    ln2_g_ = &store.add(prefix + ".ln2.gain", Tensor::full({d_model}, 1.0));
    ln2_b_ = &store.add_zeros(prefix + ".ln2.bias", {d_model});
}

Var TransformerEncoderLayer::apply(const Var& x, const Tensor* score_mask) const {
    Var attn = mha_.apply(x, x, x, score_mask);
    Var h = layer_norm_rows(add(x, attn), ln1_g_->var, ln1_b_->var);
    Var ff = ff2_.apply(relu_v(ff1_.apply(h)));
    return layer_norm_rows(add(h, ff), ln2_g_->var, ln2_b_->var);
}

TransformerDecoderLayer::TransformerDecoderLayer(ParamStore& store, const std::string& prefix,
                                                 std::size_t d_model, std::size_t n_heads,
                                                 Rng& rng)
    : self_mha_(store, prefix + ".self", d_model, n_heads, rng),
      cross_mha_(store, prefix + ".cross", d_model, n_heads, rng),
      ff1_(store, prefix + ".ff1", d_model, 4 * d_model, rng),
      ff2_(store, prefix + ".ff2", 4 * d_model, d_model, rng) {
    ln1_g_ = &store.add(prefix + ".ln1.gain", Tensor::full({d_model}, 1.0));
    ln1_b_ = &store.add_zeros(prefix + ".ln1.bias", {d_model});
    ln2_g_ = &store.add(prefix + ".ln2.gain", Tensor::full({d_model}, 1.0));
    ln2_b_ = &store.add_zeros(prefix + ".ln2.bias", {d_model});
    ln3_g_ = &store.add(prefix + ".ln3.gain", Tensor::full({d_model}, 1.0));
    ln3_b_ = &store.add_zeros(prefix + ".ln3.bias", {d_model});
}

Var TransformerDecoderLayer::apply(const Var& x, const Var& memory, const Tensor* self_mask,
                                   const Tensor* cross_mask) const {
    Var self_attn = self_mha_.apply(x, x, x, self_mask);
    Var h = layer_norm_rows(add(x, self_attn), ln1_g_->var, ln1_b_->var);
    Var cross = cross_mha_.apply(h, memory, memory, cross_mask);
    Var h2 = layer_norm_rows(add(h, cross), ln2_g_->var, ln2_b_->var);
    Var ff = ff2_.apply(relu_v(ff1_.apply(h2)));
    return layer_norm_rows(add(h2, ff), ln3_g_->var, ln3_b_->var);
}

Tensor causal_mask(std::size_t n) {
    Tensor m({n, n});
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) m.at(i, j) = -1e9;
    return m;
}

}  // namespace csr
