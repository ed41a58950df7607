#pragma once

#include <cstddef>
#include <initializer_list>
#include <vector>

#include "csr/error.hpp"
#include "csr/rng.hpp"

namespace csr {

enum class Dtype { F32, F64 };

// Dense row-major tensor. Storage is always double; F32 tensors round every
// stored value through float, so they carry single precision while arithmetic
// accumulates in double. Batch dimension comes first by convention.
class Tensor {
public:
    Tensor() = default;
    explicit Tensor(std::vector<std::size_t> shape, Dtype dt = Dtype::F64);
    Tensor(std::vector<std::size_t> shape, std::vector<double> data, Dtype dt = Dtype::F64);

    static Tensor zeros(std::vector<std::size_t> shape, Dtype dt = Dtype::F64);
    static Tensor full(std::vector<std::size_t> shape, double v, Dtype dt = Dtype::F64);
    static Tensor scalar(double v, Dtype dt = Dtype::F64);
    // 1-D / 2-D literals for tests and small fixtures.
    static Tensor row(std::initializer_list<double> v, Dtype dt = Dtype::F64);
    static Tensor matrix(std::initializer_list<std::initializer_list<double>> rows,
                         Dtype dt = Dtype::F64);
    static Tensor identity(std::size_t n, Dtype dt = Dtype::F64);
    // Elementwise uniform(lo, hi) draw.
    static Tensor uniform(std::vector<std::size_t> shape, double lo, double hi, Rng& rng,
                          Dtype dt = Dtype::F64);

    const std::vector<std::size_t>& shape() const { return shape_; }
    std::size_t rank() const { return shape_.size(); }
    std::size_t dim(std::size_t i) const { return shape_.at(i); }
    std::size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    // 2-D views; throw unless rank()==2.
    std::size_t rows() const;
    std::size_t cols() const;

    double& operator[](std::size_t i) { return data_[i]; }
    double operator[](std::size_t i) const { return data_[i]; }
    double& at(std::size_t i, std::size_t j);
    double at(std::size_t i, std::size_t j) const;

    std::vector<double>& data() { return data_; }
    const std::vector<double>& data() const { return data_; }

    Dtype dtype() const { return dtype_; }
    Tensor astype(Dtype dt) const;

    Tensor reshaped(std::vector<std::size_t> shape) const;

    bool all_finite() const;
    // Throws NumericError when a non-finite value is present.
    void check_finite(const char* what) const;

    // Rounds stored values through float when dtype is F32.
    void quantize();

private:
    std::vector<std::size_t> shape_;
    std::vector<double> data_;
    Dtype dtype_ = Dtype::F64;
};

// Result dtype promotion: F64 wins.
Dtype promote(Dtype a, Dtype b);

// Standard matrix product for 2-D tensors; inner dims must agree.
Tensor matmul(const Tensor& a, const Tensor& b);

// Softmax along `axis` (only the trailing axis of 1-D/2-D tensors is
// supported, which covers every use in this codebase). Shift-invariant via
// max subtraction; rows sum to 1.
Tensor softmax(const Tensor& x, int axis = -1);

Tensor transpose(const Tensor& a);

// Elementwise helpers.
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, double c);

}  // namespace csr
