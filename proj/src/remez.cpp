#include "splinelab/remez.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <vector>

#include "splinelab/error.hpp"
#include "splinelab/rng.hpp"

namespace splinelab {

namespace {

constexpr std::uint64_t kRemezSeed = 20240611;
constexpr std::size_t kRemezTrials = 10'000;

// ||Q|| / s*(Q); constants and zero give 1.
double remez_ratio(const Poly1D& q, double rho) {
  if (q.degree() <= 0) return 1.0;
  const double top = sup_norm(q);
  const double s = adversarial_level(q, rho);
  return s > 0.0 ? top / s : 1.0;
}

// c(u) * (u^2 + p u + q)
std::vector<double> multiply(const std::vector<double>& c, std::vector<double> factor) {
  std::vector<double> out(c.size() + factor.size() - 1, 0.0);
  for (std::size_t i = 0; i < c.size(); ++i)
    for (std::size_t j = 0; j < factor.size(); ++j) out[i + j] += c[i] * factor[j];
  return out;
}

Poly1D random_poly(Rng& rng, int k) {
  std::vector<double> c;
  if (rng.below(2) == 0) {
    // monic product of real roots and conjugate pairs near [0, 1]
    int left = static_cast<int>(rng.below(static_cast<std::uint64_t>(k)));
    c = {1.0};
    while (left > 0) {
      const double re = rng.uniform(-0.5, 1.5);
      if (left >= 2 && rng.below(3) == 0) {
        const double im = rng.uniform(0.0, 0.5);
        c = multiply(c, {re * re + im * im, -2.0 * re, 1.0});
        left -= 2;
      } else {
        c = multiply(c, {-re, 1.0});
        --left;
      }
    }
  } else {
    c.resize(static_cast<std::size_t>(k));
    for (double& v : c) v = rng.normal();
  }
  return Poly1D{c, 0.0, 1.0};
}

}  // namespace

double adversarial_level(const Poly1D& q, double rho) {
  if (!(rho > 0.0 && rho < 1.0)) throw Error(ErrorCode::PreconditionViolated, "rho must be in (0,1)");
  const double target = (1.0 - rho) * q.length();
  double lo = 0.0, hi = sup_norm(q);
  if (q.degree() <= 0) return hi;
  // smallest s with measure(s) <= target
  for (int it = 0; it < 100 && hi - lo > 1e-14 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (level_set_measure(q, mid) <= target) hi = mid;
    else lo = mid;
  }
  return hi;
}

HalfMeasureResult check_half_measure(const Poly1D& q, double t, double c_k) {
  if (!(c_k > 1.0)) throw Error(ErrorCode::PreconditionViolated, "c_k must exceed 1");
  if (sup_norm(q) < t * (1.0 - 1e-12))
    throw Error(ErrorCode::PreconditionViolated, "sup norm below t");
  HalfMeasureResult r;
  r.measure = level_set_measure(q, t / c_k);
  r.holds = r.measure >= 0.5 * q.length();
  return r;
}

RemezEstimate estimate_remez(int k, double rho, std::size_t trials, std::uint64_t seed) {
  if (k < 1) throw Error(ErrorCode::PreconditionViolated, "k must be >= 1");
  if (trials < 1) throw Error(ErrorCode::PreconditionViolated, "trials must be >= 1");
  if (!(rho > 0.0 && rho < 1.0)) throw Error(ErrorCode::PreconditionViolated, "rho must be in (0,1)");
  RemezEstimate est;
  est.k = k;
  est.rho = rho;
  est.trials = trials;
  est.witness = Poly1D{{1.0}, 0.0, 1.0};
  Rng rng(derive_seed(seed, static_cast<std::uint64_t>(k)));
  // best few draws, kept as (ratio, poly) in descending order
  constexpr std::size_t kStarts = 8;
  std::vector<std::pair<double, Poly1D>> starts;
  for (std::size_t t = 0; t < trials; ++t) {
    Poly1D q = random_poly(rng, k);
    const double r = remez_ratio(q, rho);
    if (starts.size() < kStarts || r > starts.back().first) {
      starts.emplace_back(r, std::move(q));
      std::stable_sort(starts.begin(), starts.end(),
                       [](const auto& x, const auto& y) { return x.first > y.first; });
      if (starts.size() > kStarts) starts.pop_back();
    }
  }
  for (const auto& [r, q] : starts) {
    if (r > est.c_hat) {
      est.c_hat = r;
      est.witness = q;
    }
  }
  if (k == 1) return est;

  // Local refinement from each start: Gaussian steps on the coefficients,
  // shrinking after a run of rejections.
  const std::size_t budget = std::max<std::size_t>(trials / kStarts, 1);
  for (std::size_t s = 0; s < starts.size(); ++s) {
    Rng walk(derive_seed(seed, 1000 * static_cast<std::uint64_t>(k) + s));
    std::vector<double> best = starts[s].second.coeffs;
    best.resize(static_cast<std::size_t>(k), 0.0);
    double best_r = starts[s].first;
    double scale = 0.0;
    for (double v : best) scale = std::max(scale, std::abs(v));
    double step = 0.1 * scale;
    int misses = 0;
    for (std::size_t t = 0; t < budget && step > 1e-10 * scale; ++t) {
      std::vector<double> cand = best;
      for (double& v : cand) v += step * walk.normal();
      const double r = remez_ratio(Poly1D{cand, 0.0, 1.0}, rho);
      if (r > best_r) {
        best_r = r;
        best = std::move(cand);
        misses = 0;
      } else if (++misses >= 30) {
        step *= 0.5;
        misses = 0;
      }
    }
    if (best_r > est.c_hat) {
      est.c_hat = best_r;
      est.witness = Poly1D{best, 0.0, 1.0};
    }
  }
  // report the witness at unit sup norm
  const double top = sup_norm(est.witness);
  if (top > 0.0)
    for (double& v : est.witness.coeffs) v /= top;
  return est;
}

double remez_constant(int k) {
  static std::mutex mu;
  static std::map<int, double> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(k);
  if (it != cache.end()) return it->second;
  const double c = estimate_remez(k, 0.5, kRemezTrials, kRemezSeed).c_hat * 1.01;
  cache.emplace(k, c);
  return c;
}

}  // namespace splinelab
