#ifndef GCDTC_NN_TENSOR_HPP
#define GCDTC_NN_TENSOR_HPP

#include <cmath>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace gcdtc::nn {

// Dense row-major f64 tensor, up to 5 axes.
class Tensor {
  public:
    Tensor() = default;

    explicit Tensor(std::vector<int> shape) : shape_(std::move(shape)) {
        if (shape_.empty() || shape_.size() > 5)
            throw std::invalid_argument("tensor rank must be 1..5");
        size_t n = 1;
        for (int d : shape_) {
            if (d <= 0) throw std::invalid_argument("tensor dims must be positive");
            n *= static_cast<size_t>(d);
        }
        v_.assign(n, 0.0);
    }

    static Tensor scalar(double v) {
        Tensor t({1});
        t.v_[0] = v;
        return t;
    }

    const std::vector<int>& shape() const { return shape_; }
    int rank() const { return static_cast<int>(shape_.size()); }
    int dim(int axis) const { return shape_[axis]; }
    size_t size() const { return v_.size(); }

    double* data() { return v_.data(); }
    const double* data() const { return v_.data(); }
    double& operator[](size_t i) { return v_[i]; }
    double operator[](size_t i) const { return v_[i]; }

    std::vector<double>& values() { return v_; }
    const std::vector<double>& values() const { return v_; }

    void fill(double v) { std::fill(v_.begin(), v_.end(), v); }

    bool same_shape(const Tensor& o) const { return shape_ == o.shape_; }

    bool all_finite() const {
        for (double x : v_)
            if (!std::isfinite(x)) return false;
        return true;
    }

    std::string shape_str() const {
        std::string s = "(";
        for (size_t i = 0; i < shape_.size(); ++i) {
            if (i) s += ",";
            s += std::to_string(shape_[i]);
        }
        return s + ")";
    }

  private:
    std::vector<int> shape_;
    std::vector<double> v_;
};

// A named, trainable tensor with its gradient accumulator.
struct ParamTensor {
    std::string name;
    Tensor value;
    Tensor grad;
    bool trainable = true;

    ParamTensor() = default;
    ParamTensor(std::string n, std::vector<int> shape)
        : name(std::move(n)), value(shape), grad(std::move(shape)) {}

    void zero_grad() { grad.fill(0.0); }
};

}  // namespace gcdtc::nn

#endif
