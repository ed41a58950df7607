#include "csr/nn.hpp"

#include <cmath>

namespace csr {

Parameter& ParamStore::add(const std::string& name, Tensor init) {
    auto p = std::make_unique<Parameter>();
    p->name = name;
    p->var = Var::leaf(std::move(init));
    params_.push_back(std::move(p));
    return *params_.back();
}

Parameter& ParamStore::add_uniform(const std::string& name, std::vector<std::size_t> shape,
                                   std::size_t fan_in, Rng& rng, Dtype dt) {
    double bound = 1.0 / std::sqrt(static_cast<double>(fan_in > 0 ? fan_in : 1));
    return add(name, Tensor::uniform(std::move(shape), -bound, bound, rng, dt));
}

Parameter& ParamStore::add_zeros(const std::string& name, std::vector<std::size_t> shape,
                                 Dtype dt) {
    return add(name, Tensor::zeros(std::move(shape), dt));
}

std::vector<Parameter*> ParamStore::all() {
    std::vector<Parameter*> out;
    out.reserve(params_.size());
    for (auto& p : params_) out.push_back(p.get());
    return out;
}

std::vector<const Parameter*> ParamStore::all() const {
    std::vector<const Parameter*> out;
    out.reserve(params_.size());
    for (auto& p : params_) out.push_back(p.get());
    return out;
}

Parameter* ParamStore::find(const std::string& name) {
    for (auto& p : params_)
        if (p->name == name) return p.get();
    return nullptr;
}

namespace {

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace

LstmState lstm_step(const Tensor& x, const LstmState& prev, const LstmParams& params) {
    Tensor xin = x.rank() == 1 ? x.reshaped({1, x.size()}) : x;
    Tensor h = prev.hidden.rank() == 1 ? prev.hidden.reshaped({1, prev.hidden.size()})
                                       : prev.hidden;
    Tensor c = prev.cell.rank() == 1 ? prev.cell.reshaped({1, prev.cell.size()}) : prev.cell;
    if (prev.hidden.shape() != prev.cell.shape())
        throw ShapeError("lstm_step: hidden/cell shape mismatch");
    if (xin.cols() != params.w_ih.rows())
        throw ShapeError("lstm_step: input width does not match gate matrix");
    std::size_t hidden = params.w_hh.rows();
    if (params.w_ih.cols() != 4 * hidden || params.bias.size() != 4 * hidden)
        throw ShapeError("lstm_step: gate widths disagree");

    Tensor gates = matmul(xin, params.w_ih);
    Tensor gh = matmul(h, params.w_hh);
    std::size_t batch = gates.rows();
    LstmState out{Tensor({batch, hidden}, x.dtype()), Tensor({batch, hidden}, x.dtype())};
    for (std::size_t b = 0; b < batch; ++b) {
        for (std::size_t j = 0; j < hidden; ++j) {
            double gi = gates.at(b, j) + gh.at(b, j) + params.bias[j];
            double gf = gates.at(b, hidden + j) + gh.at(b, hidden + j) + params.bias[hidden + j];
            double gg = gates.at(b, 2 * hidden + j) + gh.at(b, 2 * hidden + j) +
                        params.bias[2 * hidden + j];
            double go = gates.at(b, 3 * hidden + j) + gh.at(b, 3 * hidden + j) +
                        params.bias[3 * hidden + j];
            double cn = sigmoid(gf) * c.at(b, j) + sigmoid(gi) * std::tanh(gg);
            out.cell.at(b, j) = cn;
            out.hidden.at(b, j) = sigmoid(go) * std::tanh(cn);
        }
    }
    if (prev.hidden.rank() == 1) {
        out.hidden = out.hidden.reshaped({hidden});
        out.cell = out.cell.reshaped({hidden});
    }
    out.hidden.quantize();
    out.cell.quantize();
    out.hidden.check_finite("lstm_step");
    out.cell.check_finite("lstm_step");
    return out;
}

LstmCell::LstmCell(ParamStore& store, const std::string& prefix, std::size_t input_dim,
                   std::size_t hidden_dim, Rng& rng)
    : input_dim_(input_dim), hidden_dim_(hidden_dim) {
    w_ih = &store.add_uniform(prefix + ".w_ih", {input_dim, 4 * hidden_dim}, input_dim, rng);
    w_hh = &store.add_uniform(prefix + ".w_hh", {hidden_dim, 4 * hidden_dim}, hidden_dim, rng);
    bias = &store.add_zeros(prefix + ".bias", {4 * hidden_dim});
}

std::pair<Var, Var> LstmCell::step(const Var& x, const Var& h, const Var& c) const {
    Var gates = add(add_rowvec(matmul(x, w_ih->var), bias->var), matmul(h, w_hh->var));
    std::size_t hd = hidden_dim_;
    Var gi = sigmoid_v(slice_cols(gates, 0, hd));
    Var gf = sigmoid_v(slice_cols(gates, hd, 2 * hd));
    Var gg = tanh_v(slice_cols(gates, 2 * hd, 3 * hd));
    Var go = sigmoid_v(slice_cols(gates, 3 * hd, 4 * hd));
    Var cn = add(mul(gf, c), mul(gi, gg));
    Var hn = mul(go, tanh_v(cn));
    return {hn, cn};
}

Linear::Linear(ParamStore& store, const std::string& prefix, std::size_t in_dim,
               std::size_t out_dim, Rng& rng) {
    weight = &store.add_uniform(prefix + ".weight", {in_dim, out_dim}, in_dim, rng);
    bias = &store.add_zeros(prefix + ".bias", {out_dim});
}

Var Linear::apply(const Var& x) const { return add_rowvec(matmul(x, weight->var), bias->var); }

Embedding::Embedding(ParamStore& store, const std::string& name, std::size_t vocab,
                     std::size_t dim, Rng& rng)
    : dim_(dim) {
    table = &store.add_uniform(name, {vocab, dim}, dim, rng);
}

Var Embedding::lookup(const std::vector<int>& ids) const { return rows_gather(table->var, ids); }

double clip_grad_norm(const std::vector<Parameter*>& params, double max_norm) {
    double sq = 0.0;
    for (Parameter* p : params)
        for (double g : p->grad().data()) sq += g * g;
    double norm = std::sqrt(sq);
    if (norm > max_norm && norm > 0.0) {
        double s = max_norm / norm;
        for (Parameter* p : params)
            for (double& g : p->grad().data()) g *= s;
    }
    return norm;
}

}  // namespace csr
