#pragma once

#include <functional>
#include <vector>

namespace stablesde {

double normal_cdf(double x);
double normal_pdf(double x);

/// sup_x |F_n(x) - F(x)| of the empirical distribution of `sample`.
double ks_statistic(std::vector<double> sample, const std::function<double(double)>& cdf);

/// P(K > lambda) for the Kolmogorov distribution.
double kolmogorov_survival(double lambda);

/// Asymptotic p-value of a one-sample KS distance d at sample size n.
double ks_pvalue(double d, std::size_t n);

/// Distance whose asymptotic p-value equals alpha at sample size n.
double ks_critical(std::size_t n, double alpha);

/// Lag-k sample autocorrelations for k = 0..max_lag.
std::vector<double> autocorrelation(const std::vector<double>& x, std::size_t max_lag);

struct MeanSe {
  double mean = 0.0;
  double se = 0.0;
};

MeanSe mean_and_se(const std::vector<double>& x);

}  // namespace stablesde
