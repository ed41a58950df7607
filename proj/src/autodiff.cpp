#include "csr/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

namespace csr {

Tensor& Node::grad_buf() {
    if (grad.size() != value.size()) grad = Tensor::zeros(value.shape(), value.dtype());
    return grad;
}

Var Var::constant(Tensor t) {
    auto n = std::make_shared<Node>();
    n->value = std::move(t);
    n->requires_grad = false;
    return Var(n);
}

Var Var::leaf(Tensor t) {
    auto n = std::make_shared<Node>();
    n->value = std::move(t);
    n->requires_grad = true;
    return Var(n);
}

namespace {

Var make_op(Tensor value, std::vector<NodeRef> parents, std::function<void(Node&)> backfn) {
    auto n = std::make_shared<Node>();
    n->value = std::move(value);
    n->parents = std::move(parents);
    for (const auto& p : n->parents)
        if (p->requires_grad) n->requires_grad = true;
    if (n->requires_grad) n->backfn = std::move(backfn);
    return Var(n);
}

void topo_order(const NodeRef& root, std::vector<Node*>& order) {
    // Iterative post-order DFS; graphs can be deep (RNN over long sequences).
    std::unordered_set<Node*> seen;
    std::vector<std::pair<Node*, std::size_t>> stack;
    stack.emplace_back(root.get(), 0);
    seen.insert(root.get());
    while (!stack.empty()) {
        auto& [n, idx] = stack.back();
        if (idx < n->parents.size()) {
            Node* p = n->parents[idx++].get();
            if (p->requires_grad && seen.insert(p).second) stack.emplace_back(p, 0);
        } else {
            order.push_back(n);
            stack.pop_back();
        }
    }
}

}  // namespace

void backward(const Var& root) {
    if (!root.defined()) throw NumericError("backward: undefined root");
    if (root.value().size() != 1) throw ShapeError("backward: root must be scalar");
    if (!root.node()->requires_grad) return;
    std::vector<Node*> order;
    topo_order(root.node(), order);
    root.node()->grad_buf()[0] = 1.0;
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        Node* n = *it;
        if (n->backfn) n->backfn(*n);
    }
}

Var matmul(const Var& a, const Var& b) {
    Tensor v = matmul(a.value(), b.value());
    auto pa = a.node(), pb = b.node();
    return make_op(std::move(v), {pa, pb}, [pa, pb](Node& n) {
        if (pa->requires_grad) {
            Tensor da = matmul(n.grad, transpose(pb->value));
            Tensor& g = pa->grad_buf();
            for (std::size_t i = 0; i < g.size(); ++i) g[i] += da[i];
        }
        if (pb->requires_grad) {
            Tensor db = matmul(transpose(pa->value), n.grad);
            Tensor& g = pb->grad_buf();
            for (std::size_t i = 0; i < g.size(); ++i) g[i] += db[i];
        }
    });
}

Var add(const Var& a, const Var& b) {
    Tensor v = add(a.value(), b.value());
    auto pa = a.node(), pb = b.node();
    return make_op(std::move(v), {pa, pb}, [pa, pb](Node& n) {
        for (const auto& p : {pa, pb}) {
            if (!p->requires_grad) continue;
            Tensor& g = p->grad_buf();
            for (std::size_t i = 0; i < g.size(); ++i) g[i] += n.grad[i];
        }
    });
}

Var add_rowvec(const Var& a, const Var& b) {
    const Tensor& av = a.value();
    const Tensor& bv = b.value();
    if (av.rank() != 2 || bv.size() != av.cols())
        throw ShapeError("add_rowvec: need 2-D a and 1-D b of width cols(a)");
    Tensor v(av.shape(), promote(av.dtype(), bv.dtype()));
    for (std::size_t i = 0; i < av.rows(); ++i)
        for (std::size_t j = 0; j < av.cols(); ++j) v.at(i, j) = av.at(i, j) + bv[j];
    v.quantize();
    auto pa = a.node(), pb = b.node();
    return make_op(std::move(v), {pa, pb}, [pa, pb](Node& n) {
        std::size_t rows = n.value.rows(), cols = n.value.cols();
        if (pa->requires_grad) {
            Tensor& g = pa->grad_buf();
            for (std::size_t i = 0; i < g.size(); ++i) g[i] += n.grad[i];
        }
        if (pb->requires_grad) {
            Tensor& g = pb->grad_buf();
            for (std::size_t i = 0; i < rows; ++i)
                for (std::size_t j = 0; j < cols; ++j) g[j] += n.grad.at(i, j);
        }
    });
}

Var sub(const Var& a, const Var& b) {
    Tensor v = sub(a.value(), b.value());
    auto pa = a.node(), pb = b.node();
    return make_op(std::move(v), {pa, pb}, [pa, pb](Node& n) {
        if (pa->requires_grad) {
            Tensor& g = pa->grad_buf();
            for (std::size_t i = 0; i < g.size(); ++i) g[i] += n.grad[i];
        }
        if (pb->requires_grad) {
            Tensor& g = pb->grad_buf();
            for (std::size_t i = 0; i < g.size(); ++i) g[i] -= n.grad[i];
        }
    });
}

Var mul(const Var& a, const Var& b) {
    Tensor v = mul(a.value(), b.value());
    auto pa = a.node(), pb = b.node();
    return make_op(std::move(v), {pa, pb}, [pa, pb](Node& n) {
        if (pa->requires_grad) {
            Tensor& g = pa->grad_buf();
            for (std::size_t i = 0; i < g.size(); ++i) g[i] += n.grad[i] * pb->value[i];
        }
        if (pb->requires_grad) {
            Tensor& g = pb->grad_buf();
            for (std::size_t i = 0; i < g.size(); ++i) g[i] += n.grad[i] * pa->value[i];
        }
    });
}

Var neg(const Var& a) { return scale(a, -1.0); }

Var scale(const Var& a, double c) {
    Tensor v = scale(a.value(), c);
    auto pa = a.node();
    return make_op(std::move(v), {pa}, [pa, c](Node& n) {
        Tensor& g = pa->grad_buf();
        for (std::size_t i = 0; i < g.size(); ++i) g[i] += c * n.grad[i];
    });
}

namespace {

// Elementwise op with derivative computed from the *output* value.
Var unary_from_out(const Var& a, double (*f)(double), double (*df_from_out)(double),
                   const char* what) {
    Tensor v(a.value().shape(), a.value().dtype());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = f(a.value()[i]);
    v.quantize();
    v.check_finite(what);
    auto pa = a.node();
    return make_op(std::move(v), {pa}, [pa, df_from_out](Node& n) {
        Tensor& g = pa->grad_buf();
        for (std::size_t i = 0; i < g.size(); ++i) g[i] += n.grad[i] * df_from_out(n.value[i]);
    });
}

}  // namespace

Var tanh_v(const Var& a) {
    return unary_from_out(
        a, [](double x) { return std::tanh(x); }, [](double y) { return 1.0 - y * y; }, "tanh");
}

Var sigmoid_v(const Var& a) {
    return unary_from_out(
        a, [](double x) { return 1.0 / (1.0 + std::exp(-x)); },
        [](double y) { return y * (1.0 - y); }, "sigmoid");
}

Var relu_v(const Var& a) {
    return unary_from_out(
        a, [](double x) { return x > 0.0 ? x : 0.0; }, [](double y) { return y > 0.0 ? 1.0 : 0.0; },
        "relu");
}

Var exp_v(const Var& a) {
    return unary_from_out(
        a, [](double x) { return std::exp(x); }, [](double y) { return y; }, "exp");
}

Var log_v(const Var& a) {
    Tensor v(a.value().shape(), a.value().dtype());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = std::log(a.value()[i]);
    v.quantize();
    v.check_finite("log");
    auto pa = a.node();
    return make_op(std::move(v), {pa}, [pa](Node& n) {
        Tensor& g = pa->grad_buf();
        for (std::size_t i = 0; i < g.size(); ++i) g[i] += n.grad[i] / pa->value[i];
    });
}

Var softmax_rows(const Var& a) {
    Tensor v = softmax(a.value(), -1);
    auto pa = a.node();
    return make_op(std::move(v), {pa}, [pa](Node& n) {
        std::size_t width = n.value.shape().back();
        std::size_t nrows = n.value.size() / width;
        Tensor& g = pa->grad_buf();
        for (std::size_t r = 0; r < nrows; ++r) {
            const double* y = n.value.data().data() + r * width;
            const double* gy = n.grad.data().data() + r * width;
            double dot = 0.0;
            for (std::size_t j = 0; j < width; ++j) dot += gy[j] * y[j];
            double* gx = g.data().data() + r * width;
            for (std::size_t j = 0; j < width; ++j) gx[j] += y[j] * (gy[j] - dot);
        }
    });
}

Var log_softmax_rows(const Var& a) {
    const Tensor& x = a.value();
    if (x.rank() == 0 || x.empty()) throw ShapeError("log_softmax: empty input");
    std::size_t width = x.shape().back();
    std::size_t nrows = x.size() / width;
    Tensor v(x.shape(), x.dtype());
    for (std::size_t r = 0; r < nrows; ++r) {
        const double* in = x.data().data() + r * width;
        double* o = v.data().data() + r * width;
        double mx = *std::max_element(in, in + width);
        double sum = 0.0;
        for (std::size_t j = 0; j < width; ++j) sum += std::exp(in[j] - mx);
        double lse = mx + std::log(sum);
        for (std::size_t j = 0; j < width; ++j) o[j] = in[j] - lse;
    }
    v.quantize();
    v.check_finite("log_softmax");
    auto pa = a.node();
    return make_op(std::move(v), {pa}, [pa](Node& n) {
        std::size_t width = n.value.shape().back();
        std::size_t nrows = n.value.size() / width;
        Tensor& g = pa->grad_buf();
        for (std::size_t r = 0; r < nrows; ++r) {
            const double* y = n.value.data().data() + r * width;  // log-probs
            const double* gy = n.grad.data().data() + r * width;
            double gsum = 0.0;
            for (std::size_t j = 0; j < width; ++j) gsum += gy[j];
            double* gx = g.data().data() + r * width;
            for (std::size_t j = 0; j < width; ++j) gx[j] += gy[j] - std::exp(y[j]) * gsum;
        }
    });
}

Var sum(const Var& a) {
    double s = 0.0;
    for (double v : a.value().data()) s += v;
    auto pa = a.node();
    return make_op(Tensor::scalar(s, a.value().dtype()), {pa}, [pa](Node& n) {
        Tensor& g = pa->grad_buf();
        for (std::size_t i = 0; i < g.size(); ++i) g[i] += n.grad[0];
    });
}

Var mean(const Var& a) {
    if (a.value().empty()) throw ShapeError("mean: empty input");
    return scale(sum(a), 1.0 / static_cast<double>(a.value().size()));
}

Var concat_cols(const Var& a, const Var& b) {
    const Tensor& av = a.value();
    const Tensor& bv = b.value();
    if (av.rank() != 2 || bv.rank() != 2 || av.rows() != bv.rows())
        throw ShapeError("concat_cols: need 2-D operands with equal rows");
    std::size_t rows = av.rows(), ca = av.cols(), cb = bv.cols();
    Tensor v({rows, ca + cb}, promote(av.dtype(), bv.dtype()));
    for (std::size_t i = 0; i < rows; ++i) {
        for (std::size_t j = 0; j < ca; ++j) v.at(i, j) = av.at(i, j);
        for (std::size_t j = 0; j < cb; ++j) v.at(i, ca + j) = bv.at(i, j);
    }
    v.quantize();
    auto pa = a.node(), pb = b.node();
    return make_op(std::move(v), {pa, pb}, [pa, pb, rows, ca, cb](Node& n) {
        if (pa->requires_grad) {
            Tensor& g = pa->grad_buf();
            for (std::size_t i = 0; i < rows; ++i)
                for (std::size_t j = 0; j < ca; ++j) g.at(i, j) += n.grad.at(i, j);
        }
        if (pb->requires_grad) {
            Tensor& g = pb->grad_buf();
            for (std::size_t i = 0; i < rows; ++i)
                for (std::size_t j = 0; j < cb; ++j) g.at(i, j) += n.grad.at(i, ca + j);
        }
    });
}

Var concat_rows(const std::vector<Var>& rows) {
    if (rows.empty()) throw ShapeError("concat_rows: no rows");
    std::size_t cols = rows[0].value().rank() == 2 ? rows[0].value().cols()
                                                   : rows[0].value().size();
    std::size_t total = 0;
    for (const auto& r : rows) {
        const Tensor& t = r.value();
        std::size_t c = t.rank() == 2 ? t.cols() : t.size();
        if (c != cols) throw ShapeError("concat_rows: width mismatch");
        total += t.rank() == 2 ? t.rows() : 1;
    }
    Tensor v({total, cols}, rows[0].value().dtype());
    std::vector<NodeRef> parents;
    std::vector<std::size_t> offsets;
    std::size_t off = 0;
    for (const auto& r : rows) {
        const Tensor& t = r.value();
        std::size_t nr = t.rank() == 2 ? t.rows() : 1;
        for (std::size_t i = 0; i < nr * cols; ++i) v[off * cols + i] = t[i];
        parents.push_back(r.node());
        offsets.push_back(off);
        off += nr;
    }
    v.quantize();
    return make_op(std::move(v), std::move(parents), [offsets, cols](Node& n) {
        for (std::size_t k = 0; k < n.parents.size(); ++k) {
            NodeRef& p = n.parents[k];
            if (!p->requires_grad) continue;
            Tensor& g = p->grad_buf();
            std::size_t base = offsets[k] * cols;
            for (std::size_t i = 0; i < g.size(); ++i) g[i] += n.grad[base + i];
        }
    });
}

Var slice_cols(const Var& a, std::size_t c0, std::size_t c1) {
    const Tensor& av = a.value();
    if (av.rank() != 2 || c1 > av.cols() || c0 >= c1) throw ShapeError("slice_cols: bad range");
    std::size_t rows = av.rows(), w = c1 - c0;
    Tensor v({rows, w}, av.dtype());
    for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t j = 0; j < w; ++j) v.at(i, j) = av.at(i, c0 + j);
    auto pa = a.node();
    return make_op(std::move(v), {pa}, [pa, c0, w, rows](Node& n) {
        Tensor& g = pa->grad_buf();
        for (std::size_t i = 0; i < rows; ++i)
            for (std::size_t j = 0; j < w; ++j) g.at(i, c0 + j) += n.grad.at(i, j);
    });
}

Var slice_rows(const Var& a, std::size_t r0, std::size_t r1) {
    const Tensor& av = a.value();
    if (av.rank() != 2 || r1 > av.rows() || r0 >= r1) throw ShapeError("slice_rows: bad range");
    std::size_t cols = av.cols(), h = r1 - r0;
    Tensor v({h, cols}, av.dtype());
    for (std::size_t i = 0; i < h * cols; ++i) v[i] = av[r0 * cols + i];
    auto pa = a.node();
    return make_op(std::move(v), {pa}, [pa, r0, cols](Node& n) {
        Tensor& g = pa->grad_buf();
        std::size_t base = r0 * cols;
        for (std::size_t i = 0; i < n.grad.size(); ++i) g[base + i] += n.grad[i];
    });
}

Var select_row(const Var& a, std::size_t r) { return slice_rows(a, r, r + 1); }

Var transpose_v(const Var& a) {
    Tensor v = transpose(a.value());
    auto pa = a.node();
    return make_op(std::move(v), {pa}, [pa](Node& n) {
        Tensor gt = transpose(n.grad);
        Tensor& g = pa->grad_buf();
        for (std::size_t i = 0; i < g.size(); ++i) g[i] += gt[i];
    });
}

Var rows_gather(const Var& table, const std::vector<int>& ids) {
    const Tensor& tv = table.value();
    if (tv.rank() != 2) throw ShapeError("rows_gather: table must be 2-D");
    std::size_t cols = tv.cols();
    Tensor v({ids.size(), cols}, tv.dtype());
    for (std::size_t i = 0; i < ids.size(); ++i) {
        auto r = static_cast<std::size_t>(ids[i]);
        if (r >= tv.rows()) throw ShapeError("rows_gather: id out of range");
        for (std::size_t j = 0; j < cols; ++j) v.at(i, j) = tv.at(r, j);
    }
    auto pt = table.node();
    return make_op(std::move(v), {pt}, [pt, ids, cols](Node& n) {
        Tensor& g = pt->grad_buf();
        for (std::size_t i = 0; i < ids.size(); ++i) {
            auto r = static_cast<std::size_t>(ids[i]);
            for (std::size_t j = 0; j < cols; ++j) g.at(r, j) += n.grad.at(i, j);
        }
    });
}

Var cross_entropy_rows(const Var& logits, const std::vector<int>& targets,
                       const std::vector<double>& weights, bool mean_over_weight) {
    const Tensor& lv = logits.value();
    if (lv.rank() != 2) throw ShapeError("cross_entropy: logits must be 2-D");
    std::size_t rows = lv.rows(), width = lv.cols();
    if (targets.size() != rows || weights.size() != rows)
        throw ShapeError("cross_entropy: targets/weights length mismatch");
    // Stable log-softmax per row, probabilities cached for the backward pass.
    Tensor probs({rows, width}, Dtype::F64);
    double loss = 0.0, wsum = 0.0;
    for (std::size_t r = 0; r < rows; ++r) {
        const double* in = lv.data().data() + r * width;
        double mx = *std::max_element(in, in + width);
        double sum = 0.0;
        for (std::size_t j = 0; j < width; ++j) sum += std::exp(in[j] - mx);
        double lse = mx + std::log(sum);
        for (std::size_t j = 0; j < width; ++j) probs.at(r, j) = std::exp(in[j] - lse);
        auto t = static_cast<std::size_t>(targets[r]);
        if (t >= width) throw ShapeError("cross_entropy: target id out of range");
        loss += weights[r] * (lse - in[t]);
        wsum += weights[r];
    }
    double denom = mean_over_weight ? (wsum > 0.0 ? wsum : 1.0) : 1.0;
    loss /= denom;
    if (!std::isfinite(loss)) throw NumericError("cross_entropy: non-finite loss");
    auto pl = logits.node();
    return make_op(Tensor::scalar(loss, lv.dtype()), {pl},
                   [pl, targets, weights, probs, denom](Node& n) {
                       double gscale = n.grad[0] / denom;
                       Tensor& g = pl->grad_buf();
                       std::size_t width = probs.cols();
                       for (std::size_t r = 0; r < probs.rows(); ++r) {
                           double w = weights[r] * gscale;
                           if (w == 0.0) continue;
                           auto t = static_cast<std::size_t>(targets[r]);
                           for (std::size_t j = 0; j < width; ++j)
                               g.at(r, j) += w * (probs.at(r, j) - (j == t ? 1.0 : 0.0));
                       }
                   });
}

Var layer_norm_rows(const Var& x, const Var& gain, const Var& bias, double eps) {
    const Tensor& xv = x.value();
    if (xv.rank() != 2) throw ShapeError("layer_norm: input must be 2-D");
    std::size_t rows = xv.rows(), width = xv.cols();
    if (gain.value().size() != width || bias.value().size() != width)
        throw ShapeError("layer_norm: gain/bias width mismatch");
    Tensor v({rows, width}, xv.dtype());
    Tensor xhat({rows, width}, Dtype::F64);
    std::vector<double> inv_std(rows);
    for (std::size_t r = 0; r < rows; ++r) {
        const double* in = xv.data().data() + r * width;
        double mu = 0.0;
        for (std::size_t j = 0; j < width; ++j) mu += in[j];
        mu /= static_cast<double>(width);
        double var = 0.0;
        for (std::size_t j = 0; j < width; ++j) var += (in[j] - mu) * (in[j] - mu);
        var /= static_cast<double>(width);
        double is = 1.0 / std::sqrt(var + eps);
        inv_std[r] = is;
        for (std::size_t j = 0; j < width; ++j) {
            double h = (in[j] - mu) * is;
            xhat.at(r, j) = h;
            v.at(r, j) = h * gain.value()[j] + bias.value()[j];
        }
    }
    v.quantize();
    v.check_finite("layer_norm");
    auto px = x.node(), pg = gain.node(), pb = bias.node();
    return make_op(std::move(v), {px, pg, pb}, [px, pg, pb, xhat, inv_std](Node& n) {
        std::size_t rows = xhat.rows(), width = xhat.cols();
        for (std::size_t r = 0; r < rows; ++r) {
            const double* gy = n.grad.data().data() + r * width;
            const double* h = xhat.data().data() + r * width;
            if (pg->requires_grad) {
                Tensor& gg = pg->grad_buf();
                for (std::size_t j = 0; j < width; ++j) gg[j] += gy[j] * h[j];
            }
            if (pb->requires_grad) {
                Tensor& gb = pb->grad_buf();
                for (std::size_t j = 0; j < width; ++j) gb[j] += gy[j];
            }
            if (px->requires_grad) {
                // d/dx of (x-mu)/sqrt(var+eps): project out mean and xhat parts.
                double sum_g = 0.0, sum_gh = 0.0;
                std::vector<double> gh(width);
                for (std::size_t j = 0; j < width; ++j) {
                    gh[j] = gy[j] * pg->value[j];
                    sum_g += gh[j];
                    sum_gh += gh[j] * h[j];
                }
                Tensor& gx = px->grad_buf();
                double w = static_cast<double>(width);
                for (std::size_t j = 0; j < width; ++j)
                    gx.at(r, j) += inv_std[r] * (gh[j] - sum_g / w - h[j] * sum_gh / w);
            }
        }
    });
}

}  // namespace csr
