#include "taulab/master.hpp"

#include "taulab/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <sstream>

namespace taulab {

MasterT::MasterT(std::shared_ptr<const TTable> table, MasterOptions opts)
    : table_(std::move(table)), opts_(opts) {
  if (!table_) throw std::invalid_argument("MasterT: null table");
  if (opts_.K < 0) throw std::invalid_argument("MasterT: K must be >= 0");
}

std::size_t MasterT::cache_size() const {
  std::lock_guard lock(mu_);
  return cache_.size();
}

// Fills mag[n] (stratum magnitudes) through `term` and returns the cutoff.
template <class Term>
int MasterT::choose_cutoff(const TimesVector& t, Term&& term, std::vector<double>& mag) const {
  const int kcap = table_->cutoff();
  const auto h = h_from_times(t, kcap + 2);
  mag.assign(kcap + 1, 0.0);
  const auto parts = table_->partitions();
  const auto polys = table_->polys();
  const int klimit = opts_.adaptive ? kcap : std::min(opts_.K, kcap);
  for (std::size_t k = 0; k < parts.size(); ++k) {
    const int n = parts[k].weight();
    if (n > klimit) break;
    const cplx s = schur_from_h(parts[k], h);
    mag[n] += term(n, s, polys[k]);
  }
  const int w = std::max(1, t.highest_nonzero());
  auto tail_at = [&](int K) {
    double top = 0.0, all = 0.0;
    for (int n = 0; n <= K; ++n) {
      all += mag[n];
      if (n > K - w) top += mag[n];
    }
    return all > 0.0 ? top / all : 0.0;
  };
  int K = std::min(opts_.K, kcap);
  double tail = tail_at(K);
  if (opts_.adaptive) {
    while (tail > opts_.tail_tol && K < kcap) tail = tail_at(++K);
  }
  if (tail > opts_.tail_tol) {
    std::ostringstream os;
    os << "master T truncation tail " << tail << " above " << opts_.tail_tol << " at K = " << K;
    throw TruncationInsufficient(os.str());
  }
  mag.resize(K + 1);
  mag.push_back(tail);
  return K;
}

MasterValue MasterT::eval_uncached(cplx u, const TimesVector& t) const {
  std::vector<double> mag;
  std::vector<cplx> strata(table_->cutoff() + 1, 0.0);
  const int K = choose_cutoff(
      t,
      [&](int n, cplx s, const Polynomial& p) {
        const cplx v = s * p(u);
        strata[n] += v;
        return std::abs(v);
      },
      mag);
  MasterValue out;
  out.K = K;
  out.tail = mag.back();
  out.value = 0.0;
  for (int n = 0; n <= K; ++n) out.value += strata[n];
  return out;
}

MasterValue MasterT::eval(cplx u, const TimesVector& t) const {
  if (!opts_.cache) return eval_uncached(u, t);
  std::vector<double> key{u.real(), u.imag(), t.t0().real(), t.t0().imag()};
  for (const cplx c : t.higher()) {
    key.push_back(c.real());
    key.push_back(c.imag());
  }
  {
    std::lock_guard lock(mu_);
    const auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;
  }
  const MasterValue v = eval_uncached(u, t);
  std::lock_guard lock(mu_);
  cache_.emplace(std::move(key), v);
  return v;
}

MasterPolynomial MasterT::polynomial(const TimesVector& t) const {
  const int L = table_->spec().L;
  std::vector<std::vector<cplx>> strata(table_->cutoff() + 1, std::vector<cplx>(L + 1, 0.0));
  std::vector<double> mag;
  const int K = choose_cutoff(
      t,
      [&](int n, cplx s, const Polynomial& p) {
        for (int k = 0; k <= std::min(p.degree(), L); ++k) strata[n][k] += s * p[k];
        return std::abs(s) * p.scale();
      },
      mag);
  std::vector<cplx> c(L + 1, 0.0);
  for (int n = 0; n <= K; ++n)
    for (int k = 0; k <= L; ++k) c[k] += strata[n][k];
  MasterPolynomial out;
  out.poly = Polynomial(c);
  out.C = c[L];
  out.tail = mag.back();
  out.K = K;
  return out;
}

std::vector<cplx> MasterT::zeros(const TimesVector& t, std::span<const cplx> warm) const {
  const auto& spec = table_->spec();
  const MasterPolynomial mp = polynomial(t);
  const double scale = mp.poly.scale();
  if (!(std::abs(mp.C) > 1e-10 * scale)) {
    throw DegenerateLeading("master T leading coefficient " + std::to_string(std::abs(mp.C)) +
                            " vanishes relative to scale " + std::to_string(scale));
  }
  std::vector<cplx> start(warm.begin(), warm.end());
  if (static_cast<int>(start.size()) != spec.L) start = spec.theta;
  const RootResult rr = aberth_roots(mp.poly, start);
  if (!rr.converged || rr.backward_error > 1e-9) {
    std::ostringstream os;
    os.precision(17);
    os << "master T zeros did not converge (backward error " << rr.backward_error << "); polynomial "
       << mp.poly.to_string();
    throw RootFailure(os.str());
  }
  return rr.roots;
}

TauFn as_tau(const MasterT& m, int kmax) {
  return {[&m](const TimesVector& t) { return m.eval(t.t0(), t).value; }, kmax, "master"};
}

SweepReport hirota_check(const MasterT& m, const SamplerConfig& cfg, int kmax) {
  SamplerConfig c = cfg;
  c.step = m.t0_step();
  return sweep_check(as_tau(m, kmax), c);
}

CalibrationReport calibrate_conventions(const ChainSpec& spec, const std::vector<std::vector<cplx>>& state_roots,
                                        const CalibrationOptions& opts) {
  spec.validate();
  CalibrationReport rep;
  double best = std::numeric_limits<double>::infinity();
  const Partition r111({1, 1, 1}), r211({2, 1, 1}), r1111({1, 1, 1, 1});

  for (const cplx jt : opts.jt_shifts) {
    for (const cplx row : opts.row_shifts) {
      ConventionRecord conv;
      conv.jt_shift = jt;
      conv.row_shift = row;
      std::vector<std::shared_ptr<const TTable>> tables;
      double three = 0.0, defect = 0.0;
      bool built = true;
      for (std::size_t s = 0; s < state_roots.size(); ++s) {
        try {
          const auto one = one_row_polynomials(6, state_roots[s], spec, conv);
          double entry = 0.0;
          for (const auto& p : one) entry = std::max(entry, p.scale());
          for (const auto& lam : {r111, r211, r1111})
            three = std::max(three, jacobi_trudi(lam, one, spec, conv).poly.scale() / entry);
          auto tab = std::make_shared<const TTable>(
              build_ttable(spec, state_roots[s], static_cast<int>(s), conv, {opts.cutoff, false}));
          defect = std::max(defect, tab->build_defect());
          tables.push_back(std::move(tab));
        } catch (const ConventionError&) {
          built = false;
        }
      }
      for (const cplx step : opts.t0_steps) {
        CalibrationEntry e;
        e.conv = conv;
        e.conv.t0_step = step;
        e.three_row = built ? three : std::numeric_limits<double>::infinity();
        e.jt_defect = built ? defect : std::numeric_limits<double>::infinity();
        e.admissible = built && e.three_row <= 1e-8 && e.jt_defect <= 1e-9;
        e.hirota = std::numeric_limits<double>::infinity();
        if (built) {
          double worst = 0.0;
          try {
            for (const auto& tab : tables) {
              const MasterT m(std::make_shared<const TTable>(
                  tab->spec(), e.conv, tab->cutoff(),
                  std::vector<Partition>(tab->partitions().begin(), tab->partitions().end()),
                  std::vector<Polynomial>(tab->polys().begin(), tab->polys().end()), tab->state_id()));
              worst = std::max(worst, hirota_check(m, opts.sampler).normalized);
            }
            e.hirota = worst;
          } catch (const TruncationInsufficient&) {
          }
        }
        if (e.admissible && e.hirota < best) {
          best = e.hirota;
          rep.best = e.conv;
        }
        rep.entries.push_back(e);
      }
    }
  }
  rep.ok = best <= 1e-6;
  return rep;
}

nlohmann::json to_json(const CalibrationReport& r) {
  nlohmann::json entries = nlohmann::json::array();
  auto num = [](double x) { return std::isfinite(x) ? nlohmann::json(x) : nlohmann::json("inf"); };
  for (const auto& e : r.entries) {
    entries.push_back({{"jt_shift", to_json(e.conv.jt_shift)},
                       {"row_shift", to_json(e.conv.row_shift)},
                       {"t0_step", to_json(e.conv.t0_step)},
                       {"three_row", num(e.three_row)},
                       {"jt_defect", num(e.jt_defect)},
                       {"hirota", num(e.hirota)},
                       {"admissible", e.admissible}});
  }
  return {{"best", to_json(r.best)}, {"ok", r.ok}, {"entries", entries}};
}

}  // namespace taulab
