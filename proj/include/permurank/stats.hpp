#pragma once

#include <cstdint>
#include <vector>

namespace permurank {

struct MeanSe {
  double mean = 0.0;
  double se = 0.0;  // sample stddev / sqrt(n); 0 when n < 2
  std::int64_t n = 0;
};

/// Two-pass mean and standard error.
MeanSe mean_se(const std::vector<double>& xs);

/// Streaming (Welford) accumulator; used to cross-check the two-pass path.
class Welford {
 public:
  void add(double x) {
    ++n_;
    double d = x - mean_;
    mean_ += d / static_cast<double>(n_);
    m2_ += d * (x - mean_);
  }
  MeanSe result() const;

 private:
  std::int64_t n_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

/// Regularized lower incomplete gamma P(a, x).
double gamma_p(double a, double x);

/// Survival function of the chi-square distribution with k dof.
double chi2_sf(double x, int dof);

/// Pearson chi-square p-value of observed counts against expected counts.
double chi2_test_pvalue(const std::vector<std::int64_t>& observed,
                        const std::vector<double>& expected);

/// Kendall rank correlation between two orderings given as rank positions.
double kendall_tau(const std::vector<int>& pos_a, const std::vector<int>& pos_b);

}  // namespace permurank
