#include "permurank/stats.hpp"

#include <cmath>
#include <stdexcept>

namespace permurank {

MeanSe mean_se(const std::vector<double>& xs) {
  MeanSe r;
  r.n = static_cast<std::int64_t>(xs.size());
  if (r.n == 0) return r;
  double s = 0.0;
  for (double x : xs) s += x;
  r.mean = s / static_cast<double>(r.n);
  if (r.n < 2) return r;
  double ss = 0.0;
  for (double x : xs) {
    double d = x - r.mean;
    ss += d * d;
  }
  double var = ss / static_cast<double>(r.n - 1);
  r.se = std::sqrt(var / static_cast<double>(r.n));
  return r;
}

MeanSe Welford::result() const {
  MeanSe r;
  r.n = n_;
  r.mean = mean_;
  if (n_ >= 2) {
    double var = m2_ / static_cast<double>(n_ - 1);
    r.se = std::sqrt(var / static_cast<double>(n_));
  }
  return r;
}

namespace {

// Lanczos log-gamma.
double lgamma_local(double x) { return std::lgamma(x); }

// Series expansion of P(a, x), valid for x < a + 1.
double gamma_p_series(double a, double x) {
  double ap = a;
  double sum = 1.0 / a;
  double del = sum;
  for (int i = 0; i < 500; ++i) {
    ap += 1.0;
    del *= x / ap;
    sum += del;
    if (std::abs(del) < std::abs(sum) * 1e-15) break;
  }
  return sum * std::exp(-x + a * std::log(x) - lgamma_local(a));
}

// Continued fraction for Q(a, x) (modified Lentz), valid for x >= a + 1.
double gamma_q_cf(double a, double x) {
  const double tiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i <= 500; ++i) {
    double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < 1e-15) break;
  }
  return std::exp(-x + a * std::log(x) - lgamma_local(a)) * h;
}

}  // namespace

double gamma_p(double a, double x) {
  if (x < 0.0 || a <= 0.0) throw std::domain_error("gamma_p: invalid arguments");
  if (x == 0.0) return 0.0;
  if (x < a + 1.0) return gamma_p_series(a, x);
  return 1.0 - gamma_q_cf(a, x);
}

double chi2_sf(double x, int dof) {
  if (dof <= 0) throw std::domain_error("chi2_sf: dof must be positive");
  if (x <= 0.0) return 1.0;
  return 1.0 - gamma_p(0.5 * dof, 0.5 * x);
}

double chi2_test_pvalue(const std::vector<std::int64_t>& observed,
                        const std::vector<double>& expected) {
  if (observed.size() != expected.size() || observed.empty()) {
    throw std::invalid_argument("chi2_test: size mismatch");
  }
  double stat = 0.0;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    if (expected[i] <= 0.0) throw std::invalid_argument("chi2_test: non-positive expectation");
    double d = static_cast<double>(observed[i]) - expected[i];
    stat += d * d / expected[i];
  }
  return chi2_sf(stat, static_cast<int>(observed.size()) - 1);
}

double kendall_tau(const std::vector<int>& pos_a, const std::vector<int>& pos_b) {
  if (pos_a.size() != pos_b.size() || pos_a.size() < 2) {
    throw std::invalid_argument("kendall_tau: need two equal-length rankings");
  }
  int n = static_cast<int>(pos_a.size());
  long concordant = 0, discordant = 0;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      int da = pos_a[i] - pos_a[j];
      int db = pos_b[i] - pos_b[j];
      long s = static_cast<long>(da) * db;
      if (s > 0) ++concordant;
      else if (s < 0) ++discordant;
    }
  }
  long total = static_cast<long>(n) * (n - 1) / 2;
  return static_cast<double>(concordant - discordant) / static_cast<double>(total);
}

}  // namespace permurank
