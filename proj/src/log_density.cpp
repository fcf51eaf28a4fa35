#include "bandlab/log_density.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "bandlab/errors.hpp"

namespace bandlab {

namespace {

// Golden-section minimization on a bracketing triple a < b < c with
// psi(b) < min(psi(a), psi(c)).
double golden_min(const std::function<double(double)>& psi, double a, double b,
                  double c) {
  constexpr double kInvPhi = 0.6180339887498949;
  double x0 = a, x3 = c;
  double x1, x2;
  if (c - b > b - a) {
    x1 = b;
    x2 = b + (1.0 - kInvPhi) * (c - b);
  } else {
    x2 = b;
    x1 = b - (1.0 - kInvPhi) * (b - a);
  }
  double f1 = psi(x1), f2 = psi(x2);
  for (int it = 0; it < 200 && std::abs(x3 - x0) > 1e-13 * (1.0 + std::abs(x1) + std::abs(x2)); ++it) {
    if (f1 < f2) {
      x3 = x2;
      x2 = x1;
      f2 = f1;
      x1 = kInvPhi * x2 + (1.0 - kInvPhi) * x0;
      f1 = psi(x1);
    } else {
      x0 = x1;
      x1 = x2;
      f1 = f2;
      x2 = kInvPhi * x1 + (1.0 - kInvPhi) * x3;
      f2 = psi(x2);
    }
  }
  return f1 < f2 ? x1 : x2;
}

// Walks downhill from t0 with doubling steps until the value increases,
// returning a bracketing triple.
bool bracket_min(const std::function<double(double)>& psi, double t0, double& a,
                 double& b, double& c) {
  double h = 0.25;
  double f0 = psi(t0);
  double fp = psi(t0 + h);
  double fm = psi(t0 - h);
  if (f0 <= fp && f0 <= fm) {
    a = t0 - h;
    b = t0;
    c = t0 + h;
    return true;
  }
  double dir = fp < fm ? 1.0 : -1.0;
  double prev_t = t0, prev_f = f0;
  double cur_t = t0 + dir * h, cur_f = std::min(fp, fm);
  for (int it = 0; it < 400; ++it) {
    h *= 2.0;
    const double next_t = cur_t + dir * h;
    const double next_f = psi(next_t);
    if (next_f > cur_f) {
      a = std::min(prev_t, next_t);
      c = std::max(prev_t, next_t);
      b = cur_t;
      return true;
    }
    prev_t = cur_t;
    prev_f = cur_f;
    cur_t = next_t;
    cur_f = next_f;
  }
  (void)prev_f;
  return false;
}

double expand_side(const std::function<double(double)>& psi, double t_mode,
                   double psi_min, double drop, double sigma, double dir) {
  double step = sigma;
  double t = t_mode;
  for (int it = 0; it < 400; ++it) {
    t += dir * step;
    if (psi(t) - psi_min >= drop) return t;
    step *= 1.25;
  }
  throw IntegrabilityError("locate_window: weight does not decay");
}

}  // namespace

DensityWindow locate_window(const std::function<double(double)>& psi,
                            double t_guess, double drop) {
  double t0 = t_guess;
  for (int attempt = 0; attempt < 4; ++attempt) {
    double a, b, c;
    if (!bracket_min(psi, t0, a, b, c)) {
      throw IntegrabilityError("locate_window: no interior minimum found");
    }
    DensityWindow w;
    w.t_mode = golden_min(psi, a, b, c);
    w.psi_min = psi(w.t_mode);

    // Curvature-based width scale for the expansion step.
    const double h = 1e-3 * (1.0 + std::abs(w.t_mode));
    const double curv =
        (psi(w.t_mode + h) - 2.0 * w.psi_min + psi(w.t_mode - h)) / (h * h);
    const double sigma = curv > 0.0 ? 1.0 / std::sqrt(curv) : 1.0;

    w.t_lo = expand_side(psi, w.t_mode, w.psi_min, drop, sigma, -1.0);
    w.t_hi = expand_side(psi, w.t_mode, w.psi_min, drop, sigma, +1.0);

    // Validation scan: if a deeper minimum hides inside (or just outside)
    // the window, re-center on it and try again.
    const double margin = 0.5 * (w.t_hi - w.t_lo);
    const double lo = w.t_lo - margin, hi = w.t_hi + margin;
    double best_t = w.t_mode, best_f = w.psi_min;
    constexpr int kScan = 2048;
    for (int i = 0; i <= kScan; ++i) {
      const double t = lo + (hi - lo) * i / kScan;
      const double f = psi(t);
      if (f < best_f) {
        best_f = f;
        best_t = t;
      }
    }
    if (best_f < w.psi_min - 1e-9) {
      t0 = best_t;
      continue;
    }
    return w;
  }
  throw IntegrabilityError("locate_window: mode search did not settle");
}

namespace {

struct RawMoments {
  double mass = 0.0;
  double m1 = 0.0;  // first moment of (t - t_mode)
  double m2 = 0.0;  // second moment of (t - t_mode)
};

// Composite Simpson over [t_lo, t_hi] with `panels` even panels.
RawMoments simpson_moments(const std::function<double(double)>& psi,
                           const DensityWindow& w, int panels) {
  const double h = (w.t_hi - w.t_lo) / panels;
  RawMoments r;
  for (int i = 0; i <= panels; ++i) {
    const double t = w.t_lo + h * i;
    const double weight = (i == 0 || i == panels) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
    const double f = std::exp(-(psi(t) - w.psi_min));
    const double x = t - w.t_mode;
    r.mass += weight * f;
    r.m1 += weight * f * x;
    r.m2 += weight * f * x * x;
  }
  const double scale = h / 3.0;
  r.mass *= scale;
  r.m1 *= scale;
  r.m2 *= scale;
  return r;
}

}  // namespace

DensityMoments integrate_moments(const std::function<double(double)>& psi,
                                 const DensityWindow& w, double rel_tol) {
  DensityMoments out;
  double prev_mean = 0.0, prev_var = -1.0;
  bool have_prev = false;
  double delta_mean = 0.0, delta_var = 0.0;
  for (int panels = 128; panels <= (1 << 22); panels *= 2) {
    const RawMoments r = simpson_moments(psi, w, panels);
    const double mean_off = r.m1 / r.mass;
    const double var = r.m2 / r.mass - mean_off * mean_off;
    const double mean = w.t_mode + mean_off;
    out.mass = r.mass;
    out.mean = mean;
    out.var = var;
    out.nodes = panels + 1;
    if (have_prev) {
      delta_mean = std::abs(mean - prev_mean);
      delta_var = std::abs(var - prev_var);
      if (delta_mean <= rel_tol * std::max(1.0, std::abs(mean)) &&
          delta_var <= rel_tol * std::max(1.0, var)) {
        break;
      }
    }
    prev_mean = mean;
    prev_var = var;
    have_prev = true;
  }
  // Window truncation contributes at most ~e^{-drop} of the mass, with
  // (t - mean)^2 bounded by the squared window width.
  const double width = w.t_hi - w.t_lo;
  const double tail = std::exp(-(psi(w.t_lo) - w.psi_min)) * width *
                      (1.0 + width * width);
  out.err = delta_var + tail / std::max(out.mass, 1e-300);
  return out;
}

double integrate_mass(const std::function<double(double)>& psi,
                      const DensityWindow& w, int panels) {
  return simpson_moments(psi, w, panels).mass;
}

}  // namespace bandlab
