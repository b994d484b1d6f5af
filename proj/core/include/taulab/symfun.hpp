#pragma once

#include "taulab/polynomial.hpp"

#include <compare>
#include <span>
#include <string>
#include <vector>

namespace taulab {

/// Young diagram: weakly decreasing positive parts, trailing zeros trimmed.
class Partition {
 public:
  Partition() = default;
  /// Throws std::invalid_argument on negative or increasing parts.
  explicit Partition(std::vector<int> parts);

  std::span<const int> parts() const { return parts_; }
  int rows() const { return static_cast<int>(parts_.size()); }
  int weight() const { return weight_; }
  bool empty() const { return parts_.empty(); }
  /// lambda_i (0-based), zero beyond the last row.
  int operator[](int i) const { return i < rows() ? parts_[i] : 0; }

  std::string to_string() const;
  static Partition parse(const std::string& text);

  friend bool operator==(const Partition&, const Partition&) = default;
  friend auto operator<=>(const Partition& a, const Partition& b) {
    if (auto c = a.weight_ <=> b.weight_; c != 0) return c;
    return b.parts_ <=> a.parts_;
  }

 private:
  std::vector<int> parts_;
  int weight_ = 0;
};

/// All partitions of n with at most max_rows rows, in reverse lexicographic order.
std::vector<Partition> partitions_of(int n, int max_rows = -1);
/// All partitions with weight <= max_weight, ordered by weight.
std::vector<Partition> partitions_up_to(int max_weight, int max_rows = -1);

/// Time variables t_0, t_1, ..., t_kmax. t_0 is the distinguished slot; the
/// higher times are stored densely and every index above kmax reads as zero.
class TimesVector {
 public:
  TimesVector() = default;
  explicit TimesVector(int kmax) : higher_(kmax) {}
  TimesVector(cplx t0, std::vector<cplx> higher) : t0_(t0), higher_(std::move(higher)) {}

  cplx t0() const { return t0_; }
  void set_t0(cplx v) { t0_ = v; }

  /// t_k for k >= 1.
  cplx operator[](int k) const { return k >= 1 && k <= kmax() ? higher_[k - 1] : cplx{}; }
  /// Sets t_k (k >= 1), growing kmax when needed.
  void set(int k, cplx v);
  int kmax() const { return static_cast<int>(higher_.size()); }
  /// Largest k with t_k != 0 (0 when all higher times vanish).
  int highest_nonzero() const;
  std::span<const cplx> higher() const { return higher_; }
  /// Pads with zeros up to kmax (never shrinks).
  TimesVector widened(int kmax) const;

  friend bool operator==(const TimesVector&, const TimesVector&) = default;

 private:
  cplx t0_{};
  std::vector<cplx> higher_;
};

struct MiwaPoint {
  cplx z;
  cplx weight;  ///< u_z
};

/// Coefficients h_0..h_n of exp(sum_{k>=1} t_k z^k); h_0 = 1.
std::vector<cplx> h_from_times(const TimesVector& t, int n);

/// Jacobi-Trudi determinant det(h_{lambda_i - i + j}) from precomputed h_k
/// (h must cover indices up to lambda_1 + rows - 1).
cplx schur_from_h(const Partition& lambda, std::span<const cplx> h);

/// Schur function s_lambda(t).
cplx schur(const Partition& lambda, const TimesVector& t);

/// t_k = (1/k) sum_z u_z z^k for 1 <= k <= kmax; t_0 = u at z = 0 if present.
TimesVector miwa_times(std::span<const MiwaPoint> points, int kmax);

/// t + [z]: t_0 -> t_0 + step, t_k -> t_k + z^k / k for 1 <= k <= t.kmax().
TimesVector shift_times(const TimesVector& t, cplx z, cplx step);

}  // namespace taulab
