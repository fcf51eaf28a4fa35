#include "bandlab/stats.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "bandlab/errors.hpp"

namespace bandlab {

double mean(const std::vector<double>& xs) {
  if (xs.empty()) throw DomainError("mean: empty sample");
  double s = 0.0;
  for (double x : xs) s += x;
  return s / static_cast<double>(xs.size());
}

double sample_variance(const std::vector<double>& xs) {
  const auto n = xs.size();
  if (n < 2) throw DomainError("sample_variance: needs at least 2 samples");
  const double m = mean(xs);
  double s = 0.0;
  for (double x : xs) s += (x - m) * (x - m);
  return s / static_cast<double>(n - 1);
}

double standard_error(const std::vector<double>& xs) {
  return std::sqrt(sample_variance(xs) / static_cast<double>(xs.size()));
}

double variance_standard_error(const std::vector<double>& xs) {
  const auto n = xs.size();
  if (n < 4) throw DomainError("variance_standard_error: needs >= 4 samples");
  const double m = mean(xs);
  double m2 = 0.0, m4 = 0.0;
  for (double x : xs) {
    const double d2 = (x - m) * (x - m);
    m2 += d2;
    m4 += d2 * d2;
  }
  m2 /= static_cast<double>(n);
  m4 /= static_cast<double>(n);
  const double v = std::max(0.0, m4 - m2 * m2);
  return std::sqrt(v / static_cast<double>(n));
}

double quantile(std::vector<double> xs, double q) {
  if (xs.empty()) throw DomainError("quantile: empty sample");
  if (!(q >= 0.0 && q <= 1.0)) throw DomainError("quantile: q outside [0,1]");
  std::sort(xs.begin(), xs.end());
  const double pos = q * static_cast<double>(xs.size() - 1);
  const auto i = static_cast<std::size_t>(pos);
  if (i + 1 >= xs.size()) return xs.back();
  const double frac = pos - static_cast<double>(i);
  return xs[i] * (1.0 - frac) + xs[i + 1] * frac;
}

double ks_distance(std::vector<double> samples,
                   const std::function<double(double)>& cdf) {
  if (samples.empty()) throw DomainError("ks_distance: empty sample");
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  double d = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double f = cdf(samples[i]);
    const double lo = static_cast<double>(i) / n;
    const double hi = static_cast<double>(i + 1) / n;
    d = std::max(d, std::max(std::abs(f - lo), std::abs(hi - f)));
  }
  return d;
}

double ks_critical_value(int n, double alpha) {
  return std::sqrt(-0.5 * std::log(alpha / 2.0)) / std::sqrt(static_cast<double>(n));
}

LinearFit linear_fit(const std::vector<std::pair<double, double>>& points) {
  std::set<double> distinct;
  for (const auto& p : points) distinct.insert(p.first);
  if (distinct.size() < 2) {
    throw DegenerateFit("linear_fit: fewer than 2 distinct abscissae");
  }
  const double n = static_cast<double>(points.size());
  double sx = 0.0, sy = 0.0;
  for (const auto& [x, y] : points) {
    sx += x;
    sy += y;
  }
  const double mx = sx / n, my = sy / n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (const auto& [x, y] : points) {
    sxx += (x - mx) * (x - mx);
    sxy += (x - mx) * (y - my);
    syy += (y - my) * (y - my);
  }
  LinearFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  const double rss = std::max(0.0, syy - fit.slope * sxy);
  fit.r_squared = syy > 0.0 ? 1.0 - rss / syy : 1.0;
  fit.slope_stderr =
      points.size() > 2
          ? std::sqrt(rss / (n - 2.0) / sxx)
          : 0.0;
  return fit;
}

LinearFit fit_exponent(const std::vector<std::pair<double, double>>& points) {
  std::vector<std::pair<double, double>> logged;
  logged.reserve(points.size());
  for (const auto& [x, y] : points) {
    if (!(x > 0.0) || !(y > 0.0)) {
      throw DegenerateFit("fit_exponent: log-log fit needs positive points");
    }
    logged.emplace_back(std::log(x), std::log(y));
  }
  return linear_fit(logged);
}

BootstrapCI bootstrap_ci(
    const std::vector<std::vector<double>>& groups,
    const std::function<double(const std::vector<std::vector<double>>&)>& stat,
    int resamples, RngStream& rng, double coverage) {
  std::vector<double> stats;
  stats.reserve(resamples);
  std::vector<std::vector<double>> resampled(groups.size());
  for (int r = 0; r < resamples; ++r) {
    for (std::size_t g = 0; g < groups.size(); ++g) {
      const auto& src = groups[g];
      auto& dst = resampled[g];
      dst.resize(src.size());
      for (std::size_t i = 0; i < src.size(); ++i) {
        const auto j = static_cast<std::size_t>(rng.uniform() * src.size());
        dst[i] = src[std::min(j, src.size() - 1)];
      }
    }
    stats.push_back(stat(resampled));
  }
  const double tail = 0.5 * (1.0 - coverage);
  BootstrapCI ci;
  ci.lo = quantile(stats, tail);
  ci.hi = quantile(stats, 1.0 - tail);
  return ci;
}

}  // namespace bandlab
