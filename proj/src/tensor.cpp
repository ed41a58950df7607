#include "csr/tensor.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace csr {

namespace {

std::size_t shape_product(const std::vector<std::size_t>& shape) {
    std::size_t n = 1;
    for (std::size_t d : shape) n *= d;
    return n;
}

std::string shape_str(const std::vector<std::size_t>& shape) {
    std::ostringstream os;
    os << "(";
    for (std::size_t i = 0; i < shape.size(); ++i) os << (i ? "," : "") << shape[i];
    os << ")";
    return os.str();
}

using EigenMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

}  // namespace

Tensor::Tensor(std::vector<std::size_t> shape, Dtype dt)
    : shape_(std::move(shape)), data_(shape_product(shape_), 0.0), dtype_(dt) {}

Tensor::Tensor(std::vector<std::size_t> shape, std::vector<double> data, Dtype dt)
    : shape_(std::move(shape)), data_(std::move(data)), dtype_(dt) {
    if (shape_product(shape_) != data_.size())
        throw ShapeError("tensor: shape " + shape_str(shape_) + " does not match buffer of " +
                         std::to_string(data_.size()));
    quantize();
}

Tensor Tensor::zeros(std::vector<std::size_t> shape, Dtype dt) {
    return Tensor(std::move(shape), dt);
}

Tensor Tensor::full(std::vector<std::size_t> shape, double v, Dtype dt) {
    Tensor t(std::move(shape), dt);
    std::fill(t.data_.begin(), t.data_.end(), v);
    t.quantize();
    return t;
}

Tensor Tensor::scalar(double v, Dtype dt) { return Tensor({1}, {v}, dt); }

Tensor Tensor::row(std::initializer_list<double> v, Dtype dt) {
    return Tensor({v.size()}, std::vector<double>(v), dt);
}

Tensor Tensor::matrix(std::initializer_list<std::initializer_list<double>> rows, Dtype dt) {
    std::size_t r = rows.size();
    std::size_t c = r ? rows.begin()->size() : 0;
    std::vector<double> buf;
    buf.reserve(r * c);
    for (const auto& row : rows) {
        if (row.size() != c) throw ShapeError("tensor: ragged matrix literal");
        buf.insert(buf.end(), row.begin(), row.end());
    }
    return Tensor({r, c}, std::move(buf), dt);
}

Tensor Tensor::identity(std::size_t n, Dtype dt) {
    Tensor t({n, n}, dt);
    for (std::size_t i = 0; i < n; ++i) t.at(i, i) = 1.0;
    return t;
}

Tensor Tensor::uniform(std::vector<std::size_t> shape, double lo, double hi, Rng& rng, Dtype dt) {
    Tensor t(std::move(shape), dt);
    for (double& v : t.data_) v = rng.uniform(lo, hi);
    t.quantize();
    return t;
}

std::size_t Tensor::rows() const {
    if (rank() != 2) throw ShapeError("tensor: rows() on rank-" + std::to_string(rank()));
    return shape_[0];
}

std::size_t Tensor::cols() const {
    if (rank() != 2) throw ShapeError("tensor: cols() on rank-" + std::to_string(rank()));
    return shape_[1];
}

double& Tensor::at(std::size_t i, std::size_t j) { return data_[i * cols() + j]; }

double Tensor::at(std::size_t i, std::size_t j) const { return data_[i * cols() + j]; }

Tensor Tensor::astype(Dtype dt) const {
    Tensor t = *this;
    t.dtype_ = dt;
    t.quantize();
    return t;
}

Tensor Tensor::reshaped(std::vector<std::size_t> shape) const {
    if (shape_product(shape) != size())
        throw ShapeError("tensor: cannot reshape " + shape_str(shape_) + " to " + shape_str(shape));
    Tensor t = *this;
    t.shape_ = std::move(shape);
    return t;
}

bool Tensor::all_finite() const {
    for (double v : data_)
        if (!std::isfinite(v)) return false;
    return true;
}

void Tensor::check_finite(const char* what) const {
    if (!all_finite()) throw NumericError(std::string(what) + ": non-finite value");
}

void Tensor::quantize() {
    if (dtype_ != Dtype::F32) return;
    for (double& v : data_) v = static_cast<double>(static_cast<float>(v));
}

Dtype promote(Dtype a, Dtype b) {
    return (a == Dtype::F64 || b == Dtype::F64) ? Dtype::F64 : Dtype::F32;
}

Tensor matmul(const Tensor& a, const Tensor& b) {
    if (a.rank() != 2 || b.rank() != 2)
        throw ShapeError("matmul: both operands must be 2-D");
    if (a.cols() != b.rows())
        throw ShapeError("matmul: inner dims disagree (" + std::to_string(a.cols()) + " vs " +
                         std::to_string(b.rows()) + ")");
    Tensor out({a.rows(), b.cols()}, promote(a.dtype(), b.dtype()));
    Eigen::Map<const EigenMat> ma(a.data().data(), static_cast<Eigen::Index>(a.rows()),
                                  static_cast<Eigen::Index>(a.cols()));
    Eigen::Map<const EigenMat> mb(b.data().data(), static_cast<Eigen::Index>(b.rows()),
                                  static_cast<Eigen::Index>(b.cols()));
    Eigen::Map<EigenMat> mo(out.data().data(), static_cast<Eigen::Index>(out.rows()),
                            static_cast<Eigen::Index>(out.cols()));
    mo.noalias() = ma * mb;
    out.quantize();
    out.check_finite("matmul");
    return out;
}

Tensor softmax(const Tensor& x, int axis) {
    if (x.rank() == 0 || x.empty()) throw ShapeError("softmax: empty input");
    int last = static_cast<int>(x.rank()) - 1;
    if (axis < 0) axis += static_cast<int>(x.rank());
    if (axis != last) throw ShapeError("softmax: only the trailing axis is supported");
    std::size_t width = x.shape().back();
    if (width == 0) throw ShapeError("softmax: empty axis");
    std::size_t nrows = x.size() / width;
    Tensor out(x.shape(), x.dtype());
    for (std::size_t r = 0; r < nrows; ++r) {
        const double* in = x.data().data() + r * width;
        double* o = out.data().data() + r * width;
        double mx = *std::max_element(in, in + width);
        double sum = 0.0;
        for (std::size_t j = 0; j < width; ++j) {
            o[j] = std::exp(in[j] - mx);
            sum += o[j];
        }
        for (std::size_t j = 0; j < width; ++j) o[j] /= sum;
    }
    out.quantize();
    out.check_finite("softmax");
    return out;
}

Tensor transpose(const Tensor& a) {
    if (a.rank() != 2) throw ShapeError("transpose: needs 2-D");
    Tensor out({a.cols(), a.rows()}, a.dtype());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) out.at(j, i) = a.at(i, j);
    return out;
}

namespace {

Tensor zip_elementwise(const Tensor& a, const Tensor& b, double (*f)(double, double),
                       const char* what) {
    if (a.shape() != b.shape()) throw ShapeError(std::string(what) + ": shape mismatch");
    Tensor out(a.shape(), promote(a.dtype(), b.dtype()));
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = f(a[i], b[i]);
    out.quantize();
    out.check_finite(what);
    return out;
}

}  // namespace

Tensor add(const Tensor& a, const Tensor& b) {
    return zip_elementwise(a, b, [](double x, double y) { return x + y; }, "add");
}

Tensor sub(const Tensor& a, const Tensor& b) {
    return zip_elementwise(a, b, [](double x, double y) { return x - y; }, "sub");
}

Tensor mul(const Tensor& a, const Tensor& b) {
    return zip_elementwise(a, b, [](double x, double y) { return x * y; }, "mul");
}

Tensor scale(const Tensor& a, double c) {
    Tensor out(a.shape(), a.dtype());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] * c;
    out.quantize();
    out.check_finite("scale");
    return out;
}

}  // namespace csr
