#pragma once

#include <cassert>
#include <cstddef>
#include <vector>

namespace lcew {

// Dense row-major matrix of doubles. Used for adjacency matrices (N x N),
// layer weights and small linear algebra; N stays small (vehicles in one ROI).
class Mat {
 public:
  Mat() = default;
  Mat(int rows, int cols, double fill = 0.0)
      : rows_(rows), cols_(cols), v_(static_cast<size_t>(rows) * cols, fill) {}

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  double& at(int r, int c) { return v_[static_cast<size_t>(r) * cols_ + c]; }
  const double& at(int r, int c) const { return v_[static_cast<size_t>(r) * cols_ + c]; }
  double* data() { return v_.data(); }
  const double* data() const { return v_.data(); }
  size_t size() const { return v_.size(); }

  static Mat identity(int n) {
    Mat m(n, n);
    for (int i = 0; i < n; ++i) m.at(i, i) = 1.0;
    return m;
  }

  bool same_shape(const Mat& o) const { return rows_ == o.rows_ && cols_ == o.cols_; }

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<double> v_;
};

// Dense row-major 3D array of doubles.
class Tensor3 {
 public:
  Tensor3() = default;
  Tensor3(int d0, int d1, int d2, double fill = 0.0)
      : d0_(d0), d1_(d1), d2_(d2),
        v_(static_cast<size_t>(d0) * d1 * d2, fill) {}

  int d0() const { return d0_; }
  int d1() const { return d1_; }
  int d2() const { return d2_; }
  double& at(int i, int j, int k) {
    return v_[(static_cast<size_t>(i) * d1_ + j) * d2_ + k];
  }
  const double& at(int i, int j, int k) const {
    return v_[(static_cast<size_t>(i) * d1_ + j) * d2_ + k];
  }
  double* data() { return v_.data(); }
  const double* data() const { return v_.data(); }
  size_t size() const { return v_.size(); }
  void fill(double x) { v_.assign(v_.size(), x); }

  bool same_shape(const Tensor3& o) const {
    return d0_ == o.d0_ && d1_ == o.d1_ && d2_ == o.d2_;
  }

 private:
  int d0_ = 0;
  int d1_ = 0;
  int d2_ = 0;
  std::vector<double> v_;
};

}  // namespace lcew
