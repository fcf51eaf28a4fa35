#pragma once

#include <functional>
#include <utility>
#include <vector>

#include "bandlab/rng.hpp"

namespace bandlab {

double mean(const std::vector<double>& xs);

// Unbiased sample variance (n-1 denominator).
double sample_variance(const std::vector<double>& xs);

// Standard error of the sample mean.
double standard_error(const std::vector<double>& xs);

// Large-sample standard error of the sample variance,
// sqrt((m4 - var^2) / n) with m4 the fourth central moment.
double variance_standard_error(const std::vector<double>& xs);

// Empirical quantile with linear interpolation; q in [0, 1].
double quantile(std::vector<double> xs, double q);

// Kolmogorov-Smirnov sup distance between the empirical distribution of the
// samples and a reference CDF.
double ks_distance(std::vector<double> samples,
                   const std::function<double(double)>& cdf);

// One-sided KS critical value at significance level alpha (asymptotic).
double ks_critical_value(int n, double alpha);

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_stderr = 0.0;
  double r_squared = 0.0;
};

// Ordinary least squares of y against x.  Throws DegenerateFit for fewer
// than two distinct abscissae.
LinearFit linear_fit(const std::vector<std::pair<double, double>>& points);

// OLS on (log x, log y); the slope is the power-law exponent.
// Throws DegenerateFit when any coordinate is nonpositive.
LinearFit fit_exponent(const std::vector<std::pair<double, double>>& points);

// Percentile bootstrap confidence interval for a statistic of grouped data:
// the statistic maps per-group vectors to a scalar (e.g. a fitted slope over
// per-M replicate means); groups are resampled with replacement.
struct BootstrapCI {
  double lo = 0.0;
  double hi = 0.0;
  double width() const { return hi - lo; }
};

BootstrapCI bootstrap_ci(
    const std::vector<std::vector<double>>& groups,
    const std::function<double(const std::vector<std::vector<double>>&)>& stat,
    int resamples, RngStream& rng, double coverage = 0.95);

}  // namespace bandlab
