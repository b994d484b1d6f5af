#include "taulab/symfun.hpp"

#include <Eigen/Dense>

#include <sstream>
#include <stdexcept>

namespace taulab {

Partition::Partition(std::vector<int> parts) : parts_(std::move(parts)) {
  while (!parts_.empty() && parts_.back() == 0) parts_.pop_back();
  for (std::size_t i = 0; i < parts_.size(); ++i) {
    if (parts_[i] < 0) throw std::invalid_argument("partition parts must be non-negative");
    if (i > 0 && parts_[i] > parts_[i - 1])
      throw std::invalid_argument("partition parts must be weakly decreasing");
    weight_ += parts_[i];
  }
}

std::string Partition::to_string() const {
  std::ostringstream os;
  os << "(";
  for (std::size_t i = 0; i < parts_.size(); ++i) os << (i ? "," : "") << parts_[i];
  os << ")";
  return os.str();
}

Partition Partition::parse(const std::string& text) {
  std::vector<int> parts;
  std::string digits;
  for (const char c : text) {
    if (c >= '0' && c <= '9') {
      digits += c;
    } else if (c == ',' || c == ')' || c == ' ') {
      if (!digits.empty()) parts.push_back(std::stoi(digits));
      digits.clear();
    } else if (c != '(') {
      throw std::invalid_argument("malformed partition: " + text);
    }
  }
  if (!digits.empty()) parts.push_back(std::stoi(digits));
  return Partition(std::move(parts));
}

namespace {

void partitions_rec(int remaining, int max_part, int rows_left, std::vector<int>& cur,
                    std::vector<Partition>& out) {
  if (remaining == 0) {
    out.emplace_back(cur);
    return;
  }
  if (rows_left == 0) return;
  for (int p = std::min(remaining, max_part); p >= 1; --p) {
    cur.push_back(p);
    partitions_rec(remaining - p, p, rows_left - 1, cur, out);
    cur.pop_back();
  }
}

}  // namespace

std::vector<Partition> partitions_of(int n, int max_rows) {
  std::vector<Partition> out;
  if (n < 0) return out;
  std::vector<int> cur;
  partitions_rec(n, n, max_rows < 0 ? n : max_rows, cur, out);
  return out;
}

std::vector<Partition> partitions_up_to(int max_weight, int max_rows) {
  std::vector<Partition> out;
  for (int n = 0; n <= max_weight; ++n) {
    auto layer = partitions_of(n, max_rows);
    out.insert(out.end(), layer.begin(), layer.end());
  }
  return out;
}

void TimesVector::set(int k, cplx v) {
  if (k < 1) throw std::out_of_range("TimesVector::set: k must be >= 1");
  if (k > kmax()) higher_.resize(k);
  higher_[k - 1] = v;
}

int TimesVector::highest_nonzero() const {
  for (int k = kmax(); k >= 1; --k)
    if (higher_[k - 1] != cplx{}) return k;
  return 0;
}

TimesVector TimesVector::widened(int kmax) const {
  TimesVector out = *this;
  if (kmax > out.kmax()) out.higher_.resize(kmax);
  return out;
}

std::vector<cplx> h_from_times(const TimesVector& t, int n) {
  // k h_k = sum_{m=1}^k m t_m h_{k-m}
  std::vector<cplx> h(n + 1);
  h[0] = 1.0;
  for (int k = 1; k <= n; ++k) {
    cplx acc{};
    for (int m = 1; m <= std::min(k, t.kmax()); ++m) acc += static_cast<double>(m) * t[m] * h[k - m];
    h[k] = acc / static_cast<double>(k);
  }
  return h;
}

cplx schur_from_h(const Partition& lambda, std::span<const cplx> h) {
  const int l = lambda.rows();
  auto H = [&](int k) -> cplx {
    if (k < 0) return 0.0;
    if (k >= static_cast<int>(h.size())) throw std::out_of_range("schur_from_h: h too short");
    return h[k];
  };
  switch (l) {
    case 0:
      return 1.0;
    case 1:
      return H(lambda[0]);
    case 2:
      return H(lambda[0]) * H(lambda[1]) - H(lambda[0] + 1) * H(lambda[1] - 1);
    default: {
      Eigen::MatrixXcd m(l, l);
      for (int i = 0; i < l; ++i)
        for (int j = 0; j < l; ++j) m(i, j) = H(lambda[i] - i + j);
      return m.determinant();
    }
  }
}

cplx schur(const Partition& lambda, const TimesVector& t) {
  if (lambda.empty()) return 1.0;
  const auto h = h_from_times(t, lambda[0] + lambda.rows());
  return schur_from_h(lambda, h);
}

TimesVector miwa_times(std::span<const MiwaPoint> points, int kmax) {
  if (kmax < 1) throw std::invalid_argument("miwa_times: kmax must be >= 1");
  TimesVector t(kmax);
  for (const auto& p : points) {
    if (p.z == cplx{}) t.set_t0(t.t0() + p.weight);
    cplx zk = 1.0;
    for (int k = 1; k <= kmax; ++k) {
      zk *= p.z;
      t.set(k, t[k] + p.weight * zk / static_cast<double>(k));
    }
  }
  return t;
}

TimesVector shift_times(const TimesVector& t, cplx z, cplx step) {
  TimesVector out = t;
  out.set_t0(t.t0() + step);
  cplx zk = 1.0;
  for (int k = 1; k <= t.kmax(); ++k) {
    zk *= z;
    out.set(k, t[k] + zk / static_cast<double>(k));
  }
  return out;
}

}  // namespace taulab
