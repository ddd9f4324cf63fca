// Copyright 2026 The sqp Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cassert>
#include <vector>

namespace sqp {

/// Dense rank-m tensor over a d-dimensional index set, stored row-major in a
/// flat Eigen vector. Moment tensors and symbol derivative tables are
/// instances of this type; rank 0 holds a single scalar.
template <typename Scalar>
class Tensor {
 public:
  using Storage = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  Tensor() = default;
  Tensor(int dim, int rank) : dim_(dim), rank_(rank), data_(Storage::Zero(flat_size(dim, rank))) {}

  static Tensor zero(int dim, int rank) { return Tensor(dim, rank); }

  static Eigen::Index flat_size(int dim, int rank) {
    Eigen::Index n = 1;
    for (int i = 0; i < rank; ++i) n *= dim;
    return n;
  }

  int dim() const { return dim_; }
  int rank() const { return rank_; }
  Eigen::Index size() const { return data_.size(); }

  Storage& data() { return data_; }
  const Storage& data() const { return data_; }

  Scalar& operator[](Eigen::Index flat) { return data_[flat]; }
  const Scalar& operator[](Eigen::Index flat) const { return data_[flat]; }

  template <typename... I>
  Scalar& operator()(I... idx) {
    static_assert(sizeof...(I) > 0);
    return data_[offset({static_cast<int>(idx)...})];
  }
  template <typename... I>
  const Scalar& operator()(I... idx) const {
    static_assert(sizeof...(I) > 0);
    return data_[offset({static_cast<int>(idx)...})];
  }

  Scalar& at(const std::vector<int>& idx) { return data_[offset(idx)]; }
  const Scalar& at(const std::vector<int>& idx) const { return data_[offset(idx)]; }

  Eigen::Index offset(std::initializer_list<int> idx) const {
    assert(static_cast<int>(idx.size()) == rank_);
    Eigen::Index o = 0;
    for (int i : idx) o = o * dim_ + i;
    return o;
  }
  Eigen::Index offset(const std::vector<int>& idx) const {
    assert(static_cast<int>(idx.size()) == rank_);
    Eigen::Index o = 0;
    for (int i : idx) o = o * dim_ + i;
    return o;
  }

  /// Index tuple of a flat offset.
  std::vector<int> unravel(Eigen::Index flat) const {
    std::vector<int> idx(rank_);
    for (int i = rank_ - 1; i >= 0; --i) {
      idx[i] = static_cast<int>(flat % dim_);
      flat /= dim_;
    }
    return idx;
  }

  Tensor& operator+=(const Tensor& o) {
    data_ += o.data_;
    return *this;
  }
  Tensor& operator-=(const Tensor& o) {
    data_ -= o.data_;
    return *this;
  }
  Tensor& operator*=(Scalar s) {
    data_ *= s;
    return *this;
  }
  friend Tensor operator+(Tensor a, const Tensor& b) { return a += b; }
  friend Tensor operator-(Tensor a, const Tensor& b) { return a -= b; }
  friend Tensor operator*(Scalar s, Tensor a) { return a *= s; }

  Scalar max_abs() const { return data_.size() ? data_.cwiseAbs().maxCoeff() : Scalar(0); }

 private:
  int dim_ = 0;
  int rank_ = 0;
  Storage data_ = Storage::Zero(1);
};

/// All nondecreasing index tuples of length `rank` over `dim` indices, in
/// lexicographic order. This is the packed layout of a symmetric tensor.
inline std::vector<std::vector<int>> sorted_index_tuples(int dim, int rank) {
  std::vector<std::vector<int>> out;
  std::vector<int> cur(rank, 0);
  if (rank == 0) {
    out.push_back({});
    return out;
  }
  while (true) {
    out.push_back(cur);
    int pos = rank - 1;
    while (pos >= 0 && cur[pos] == dim - 1) --pos;
    if (pos < 0) break;
    ++cur[pos];
    for (int i = pos + 1; i < rank; ++i) cur[i] = cur[pos];
  }
  return out;
}

/// Average over all index permutations. Idempotent.
template <typename Scalar>
Tensor<Scalar> symmetrize(const Tensor<Scalar>& t) {
  const int m = t.rank();
  if (m <= 1) return t;
  Tensor<Scalar> out(t.dim(), m);
  std::vector<int> perm(m);
  for (Eigen::Index f = 0; f < t.size(); ++f) {
    const auto idx = t.unravel(f);
    for (int i = 0; i < m; ++i) perm[i] = i;
    Scalar acc(0);
    int count = 0;
    std::vector<int> p(m);
    do {
      for (int i = 0; i < m; ++i) p[i] = idx[perm[i]];
      acc += t.at(p);
      ++count;
    } while (std::next_permutation(perm.begin(), perm.end()));
    out[f] = acc / Scalar(count);
  }
  return out;
}

/// Packs a symmetric tensor into its nondecreasing-index entries.
template <typename Scalar>
std::vector<Scalar> pack_symmetric(const Tensor<Scalar>& t) {
  std::vector<Scalar> out;
  for (const auto& idx : sorted_index_tuples(t.dim(), t.rank())) out.push_back(t.at(idx));
  return out;
}

/// Inverse of pack_symmetric: fills every permutation of each packed entry.
template <typename Scalar>
Tensor<Scalar> unpack_symmetric(const std::vector<Scalar>& packed, int dim, int rank) {
  Tensor<Scalar> t(dim, rank);
  const auto tuples = sorted_index_tuples(dim, rank);
  assert(tuples.size() == packed.size());
  for (std::size_t e = 0; e < tuples.size(); ++e) {
    auto idx = tuples[e];
    do {
      t.at(idx) = packed[e];
    } while (std::next_permutation(idx.begin(), idx.end()));
  }
  return t;
}

/// Contracts the trailing b.rank() indices of `a` with all indices of `b`.
template <typename Scalar>
Tensor<Scalar> contract_trailing(const Tensor<Scalar>& a, const Tensor<Scalar>& b) {
  assert(a.dim() == b.dim() && a.rank() >= b.rank());
  Tensor<Scalar> out(a.dim(), a.rank() - b.rank());
  const Eigen::Index inner = b.size();
  for (Eigen::Index o = 0; o < out.size(); ++o) {
    Scalar acc(0);
    for (Eigen::Index i = 0; i < inner; ++i) acc += a[o * inner + i] * b[i];
    out[o] = acc;
  }
  return out;
}

/// Contracts the last q indices of `a` with the first q indices of `b`. The
/// result carries the free indices of a followed by those of b.
template <typename Scalar>
Tensor<Scalar> contract(const Tensor<Scalar>& a, const Tensor<Scalar>& b, int q) {
  assert(a.dim() == b.dim() && q <= a.rank() && q <= b.rank());
  using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  const int ra = a.rank() - q;
  const int rb = b.rank() - q;
  const auto inner = Tensor<Scalar>::flat_size(a.dim(), q);
  const auto na = Tensor<Scalar>::flat_size(a.dim(), ra);
  const auto nb = Tensor<Scalar>::flat_size(a.dim(), rb);
  Tensor<Scalar> out(a.dim(), ra + rb);
  Eigen::Map<const Mat> am(a.data().data(), na, inner);
  Eigen::Map<const Mat> bm(b.data().data(), inner, nb);
  Eigen::Map<Mat>(out.data().data(), na, nb).noalias() = am * bm;
  return out;
}

/// Outer product a ⊗ b (indices of a first).
template <typename Scalar>
Tensor<Scalar> outer(const Tensor<Scalar>& a, const Tensor<Scalar>& b) {
  Tensor<Scalar> out(a.dim(), a.rank() + b.rank());
  for (Eigen::Index i = 0; i < a.size(); ++i)
    for (Eigen::Index j = 0; j < b.size(); ++j) out[i * b.size() + j] = a[i] * b[j];
  return out;
}

/// Standard symplectic matrix for z = (p, x): J = [[0, -I], [I, 0]].
inline Eigen::MatrixXd symplectic_j(int n) {
  Eigen::MatrixXd j = Eigen::MatrixXd::Zero(2 * n, 2 * n);
  j.topRightCorner(n, n) = -Eigen::MatrixXd::Identity(n, n);
  j.bottomLeftCorner(n, n) = Eigen::MatrixXd::Identity(n, n);
  return j;
}

/// Applies J to the first index of `t`: (J t)_{i...} = J_{ia} t_{a...}.
template <typename Scalar>
Tensor<Scalar> apply_j_first(const Tensor<Scalar>& t) {
  const int d = t.dim();
  const int n = d / 2;
  Tensor<Scalar> out(d, t.rank());
  const Eigen::Index inner = t.size() / d;
  for (int i = 0; i < n; ++i)
    for (Eigen::Index r = 0; r < inner; ++r) {
      out[i * inner + r] = -t[(i + n) * inner + r];
      out[(i + n) * inner + r] = t[i * inner + r];
    }
  return out;
}

}  // namespace sqp
