#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace causalbound {

struct ShapeMismatch : std::runtime_error {
    explicit ShapeMismatch(const std::string& what) : std::runtime_error(what) {}
};

/// Dense row-major matrix of doubles. The only storage type in the library;
/// vectors are n x 1 (or 1 x n) matrices.
class Matrix {
  public:
    Matrix() = default;
    Matrix(int rows, int cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(static_cast<size_t>(rows) * cols, fill) {}

    static Matrix from_vector(const std::vector<double>& v, bool column = true) {
        Matrix m(column ? static_cast<int>(v.size()) : 1,
                 column ? 1 : static_cast<int>(v.size()));
        m.data_ = v;
        return m;
    }

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    size_t size() const { return data_.size(); }

    double& operator()(int r, int c) { return data_[static_cast<size_t>(r) * cols_ + c]; }
    double operator()(int r, int c) const { return data_[static_cast<size_t>(r) * cols_ + c]; }
    double& operator[](size_t i) { return data_[i]; }
    double operator[](size_t i) const { return data_[i]; }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }
    double* row(int r) { return data_.data() + static_cast<size_t>(r) * cols_; }
    const double* row(int r) const { return data_.data() + static_cast<size_t>(r) * cols_; }

    bool same_shape(const Matrix& o) const { return rows_ == o.rows_ && cols_ == o.cols_; }

    void fill(double v) { std::fill(data_.begin(), data_.end(), v); }

    Matrix col(int c) const {
        Matrix out(rows_, 1);
        for (int r = 0; r < rows_; ++r) out(r, 0) = (*this)(r, c);
        return out;
    }

    void set_col(int c, const Matrix& v) {
        if (v.rows() != rows_ || v.cols() != 1) throw ShapeMismatch("set_col: bad column shape");
        for (int r = 0; r < rows_; ++r) (*this)(r, c) = v(r, 0);
    }

    Matrix transposed() const {
        Matrix out(cols_, rows_);
        for (int r = 0; r < rows_; ++r)
            for (int c = 0; c < cols_; ++c) out(c, r) = (*this)(r, c);
        return out;
    }

  private:
    int rows_ = 0;
    int cols_ = 0;
    std::vector<double> data_;
};

inline void check_same_shape(const Matrix& a, const Matrix& b, const char* op) {
    if (!a.same_shape(b))
        throw ShapeMismatch(std::string(op) + ": " + std::to_string(a.rows()) + "x" +
                            std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) + "x" +
                            std::to_string(b.cols()));
}

}  // namespace causalbound
