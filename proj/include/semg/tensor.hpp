#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace semg {

// Thrown on malformed input data (CSV schema violations, label range, ...).
struct DataError : std::runtime_error {
    explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

// Thrown when a computation produces NaN/Inf.
struct NumericError : std::runtime_error {
    explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

// Dense n-dimensional array of doubles, flat row-major storage.
// Training math is 64-bit throughout; checkpoints narrow to 32-bit on disk.
class Tensor {
public:
    Tensor() = default;

    explicit Tensor(std::vector<int> shape_) : shape(std::move(shape_)) {
        data.assign(count(shape), 0.0);
    }

    Tensor(std::vector<int> shape_, std::vector<double> values)
        : shape(std::move(shape_)), data(std::move(values)) {
        if (data.size() != count(shape))
            throw std::invalid_argument("Tensor: shape/value count mismatch");
    }

    static std::size_t count(const std::vector<int>& shape) {
        std::size_t n = 1;
        for (int e : shape) {
            if (e <= 0) throw std::invalid_argument("Tensor: non-positive extent");
            n *= static_cast<std::size_t>(e);
        }
        return n;
    }

    static Tensor full(std::vector<int> shape, double v) {
        Tensor t(std::move(shape));
        for (double& x : t.data) x = v;
        return t;
    }

    std::size_t size() const { return data.size(); }
    bool empty() const { return data.empty(); }
    int ndim() const { return static_cast<int>(shape.size()); }

    int dim(int i) const { return shape.at(static_cast<std::size_t>(i)); }

    // 2-D accessors (time-major [T x C] layout used by the signal path).
    double& at(int t, int c) { return data[static_cast<std::size_t>(t) * shape[1] + c]; }
    double at(int t, int c) const { return data[static_cast<std::size_t>(t) * shape[1] + c]; }

    double& operator[](std::size_t i) { return data[i]; }
    double operator[](std::size_t i) const { return data[i]; }

    bool all_finite() const {
        for (double v : data)
            if (!std::isfinite(v)) return false;
        return true;
    }

    void fill(double v) {
        for (double& x : data) x = v;
    }

    bool same_shape(const Tensor& o) const { return shape == o.shape; }

    std::string shape_str() const {
        std::string s = "[";
        for (std::size_t i = 0; i < shape.size(); ++i) {
            if (i) s += "x";
            s += std::to_string(shape[i]);
        }
        return s + "]";
    }

    std::vector<int> shape;
    std::vector<double> data;
};

inline void require_finite(const Tensor& t, const char* where) {
    if (!t.all_finite())
        throw NumericError(std::string("non-finite values after ") + where);
}

inline void require_finite(double v, const char* where) {
    if (!std::isfinite(v))
        throw NumericError(std::string("non-finite value in ") + where);
}

} // namespace semg
