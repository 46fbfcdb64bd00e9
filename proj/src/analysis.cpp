#include "cpo/analysis.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>

#include "cpo/error.hpp"

namespace cpo::analysis {
namespace {

void check_same_size(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size())
    throw ValidationError("size_mismatch", "x and y must have the same length");
}

// Solves a small dense real system in place by Gaussian elimination with
// partial pivoting. Returns false for a numerically singular matrix.
template <std::size_t P>
bool solve_small(std::array<std::array<double, P>, P> a, std::array<double, P>& b) {
  for (std::size_t k = 0; k < P; ++k) {
    std::size_t piv = k;
    for (std::size_t r = k + 1; r < P; ++r)
      if (std::abs(a[r][k]) > std::abs(a[piv][k])) piv = r;
    if (!(std::abs(a[piv][k]) > 0.0)) return false;
    std::swap(a[k], a[piv]);
    std::swap(b[k], b[piv]);
    for (std::size_t r = k + 1; r < P; ++r) {
      const double f = a[r][k] / a[k][k];
      for (std::size_t c = k; c < P; ++c) a[r][c] -= f * a[k][c];
      b[r] -= f * b[k];
    }
  }
  for (std::size_t k = P; k-- > 0;) {
    double s = b[k];
    for (std::size_t c = k + 1; c < P; ++c) s -= a[k][c] * b[c];
    b[k] = s / a[k][k];
  }
  return true;
}

template <std::size_t P>
struct LmOutcome {
  std::array<double, P> p{};
  double cost = 0.0;
  int iterations = 0;
  bool converged = false;
};

// Levenberg-Marquardt with Marquardt's diagonal scaling. eval(p, r, jac)
// fills residuals (m) and the row-major Jacobian (m x P).
template <std::size_t P, class Eval>
LmOutcome<P> levenberg_marquardt(std::array<double, P> p, std::size_t m, Eval&& eval,
                                 const FitOptions& opt) {
  std::vector<double> r(m), jac(m * P), r_try(m), jac_try(m * P);
  auto cost_of = [](const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return 0.5 * s;
  };
  eval(p, r, jac);
  double cost = cost_of(r);
  LmOutcome<P> out;
  double lambda = 1e-3;

  for (int it = 0; it < opt.max_iterations; ++it) {
    out.iterations = it + 1;
    std::array<std::array<double, P>, P> a{};
    std::array<double, P> g{};
    for (std::size_t k = 0; k < m; ++k) {
      const double* row = &jac[k * P];
      for (std::size_t i = 0; i < P; ++i) {
        g[i] += row[i] * r[k];
        for (std::size_t j = 0; j < P; ++j) a[i][j] += row[i] * row[j];
      }
    }
    double gmax = 0.0;
    for (std::size_t i = 0; i < P; ++i) gmax = std::max(gmax, std::abs(g[i]));
    if (gmax <= 1e-15 * std::max(1.0, std::sqrt(2.0 * cost))) {
      out.converged = true;
      break;
    }

    bool accepted = false;
    while (!accepted) {
      auto damped = a;
      for (std::size_t i = 0; i < P; ++i) damped[i][i] += lambda * std::max(a[i][i], 1e-30);
      std::array<double, P> step{};
      for (std::size_t i = 0; i < P; ++i) step[i] = -g[i];
      const bool solved = solve_small(damped, step);
      double rel = 0.0;
      std::array<double, P> trial = p;
      if (solved) {
        for (std::size_t i = 0; i < P; ++i) {
          trial[i] += step[i];
          rel = std::max(rel, std::abs(step[i]) / (std::abs(p[i]) + opt.step_tolerance));
        }
        eval(trial, r_try, jac_try);
      }
      const double trial_cost = solved ? cost_of(r_try) : std::numeric_limits<double>::infinity();
      if (solved && std::isfinite(trial_cost) && trial_cost <= cost) {
        p = trial;
        std::swap(r, r_try);
        std::swap(jac, jac_try);
        const double previous = cost;
        cost = trial_cost;
        lambda = std::max(lambda * 0.1, 1e-12);
        accepted = true;
        if (rel <= opt.step_tolerance || previous - cost <= 1e-30 * previous) {
          out.converged = true;
        }
      } else {
        // No decrease even for a vanishing step: stationary to rounding.
        if (solved && rel <= 1e-12) {
          out.converged = true;
          break;
        }
        lambda *= 10.0;
        if (lambda > 1e16) {
          out.converged = true;
          break;
        }
      }
    }
    if (out.converged) break;
  }
  out.p = p;
  out.cost = cost;
  return out;
}

struct Scale {
  double shift = 0.0;
  double span = 1.0;
};

Scale scale_of(std::span<const double> v) {
  const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  Scale s;
  s.shift = 0.5 * (*lo + *hi);
  s.span = 0.5 * (*hi - *lo);
  if (!(s.span > 0.0)) s.span = 1.0;
  return s;
}

double residual_norm(std::span<const double> r) {
  double s = 0.0;
  for (double v : r) s += v * v;
  return std::sqrt(s);
}

}  // namespace

double lorentzian(double x, double center, double fwhm, double amplitude, double offset) {
  const double q = 2.0 * (x - center) / fwhm;
  return offset + amplitude / (1.0 + q * q);
}

std::vector<Peak> find_peaks(std::span<const double> x, std::span<const double> y,
                             double min_prominence) {
  check_same_size(x, y);
  const std::size_t n = y.size();
  if (n < 16) throw ValidationError("too_few_samples", "peak search needs at least 16 samples");
  std::vector<Peak> peaks;
  std::size_t i = 1;
  while (i + 1 < n) {
    if (y[i] > y[i - 1]) {
      std::size_t j = i;
      while (j + 1 < n && y[j + 1] == y[i]) ++j;
      if (j + 1 < n && y[j + 1] < y[i]) {
        const std::size_t mid = (i + j) / 2;
        const double h = y[mid];
        double left_min = h;
        for (std::size_t k = i; k-- > 0;) {
          if (y[k] > h) break;
          left_min = std::min(left_min, y[k]);
        }
        double right_min = h;
        for (std::size_t k = j + 1; k < n; ++k) {
          if (y[k] > h) break;
          right_min = std::min(right_min, y[k]);
        }
        const double prom = h - std::max(left_min, right_min);
        if (prom >= min_prominence && prom > 0.0) peaks.push_back({mid, x[mid], h, prom});
      }
      i = j + 1;
    } else {
      ++i;
    }
  }
  std::stable_sort(peaks.begin(), peaks.end(), [](const Peak& a, const Peak& b) {
    if (std::abs(a.position) != std::abs(b.position))
      return std::abs(a.position) < std::abs(b.position);
    return a.position < b.position;
  });
  return peaks;
}

std::vector<Peak> find_peaks(const SpectrumTrace& trace, double min_prominence) {
  return find_peaks(trace.deltas, trace.transmission, min_prominence);
}

LorentzianFit initial_lorentzian(std::span<const double> x, std::span<const double> y) {
  check_same_size(x, y);
  const std::size_t n = y.size();
  if (n < 3) throw ValidationError("too_few_samples", "Lorentzian needs at least 3 samples");
  LorentzianFit f;
  f.offset = 0.5 * (y.front() + y.back());
  const auto [lo, hi] = std::minmax_element(y.begin(), y.end());
  const bool dip = f.offset - *lo > *hi - f.offset;
  const std::size_t k = static_cast<std::size_t>((dip ? lo : hi) - y.begin());
  f.center = x[k];
  f.amplitude = y[k] - f.offset;
  const double half = f.offset + 0.5 * f.amplitude;
  auto above = [&](std::size_t i) { return dip ? y[i] < half : y[i] > half; };
  auto crossing = [&](std::size_t a, std::size_t b) {
    const double t = (half - y[a]) / (y[b] - y[a]);
    return x[a] + t * (x[b] - x[a]);
  };
  double left = std::numeric_limits<double>::quiet_NaN();
  double right = left;
  for (std::size_t i = k; i > 0; --i)
    if (!above(i - 1)) {
      left = crossing(i - 1, i);
      break;
    }
  for (std::size_t i = k; i + 1 < n; ++i)
    if (!above(i + 1)) {
      right = crossing(i, i + 1);
      break;
    }
  if (std::isnan(left) && std::isnan(right))
    f.fwhm = x.back() - x.front();
  else if (std::isnan(left))
    f.fwhm = 2.0 * (right - f.center);
  else if (std::isnan(right))
    f.fwhm = 2.0 * (f.center - left);
  else
    f.fwhm = right - left;
  return f;
}

LorentzianFit fit_lorentzian(std::span<const double> x, std::span<const double> y,
                             const FitOptions& options) {
  check_same_size(x, y);
  if (x.size() < 9) throw ValidationError("too_few_samples", "Lorentzian fit needs at least 9 points");
  const LorentzianFit init = initial_lorentzian(x, y);
  const Scale sx = scale_of(x);
  double sy = 0.0;
  for (double v : y) sy = std::max(sy, std::abs(v));
  if (!(sy > 0.0)) sy = 1.0;
  const std::size_t m = x.size();
  std::vector<double> u(m), v(m);
  for (std::size_t k = 0; k < m; ++k) {
    u[k] = (x[k] - sx.shift) / sx.span;
    v[k] = y[k] / sy;
  }
  std::array<double, 4> p0{(init.center - sx.shift) / sx.span, init.fwhm / sx.span,
                           init.amplitude / sy, init.offset / sy};
  auto eval = [&](const std::array<double, 4>& p, std::vector<double>& r,
                  std::vector<double>& jac) {
    const double c = p[0], w = p[1], a = p[2], o = p[3];
    for (std::size_t k = 0; k < m; ++k) {
      const double q = 2.0 * (u[k] - c) / w;
      const double d = 1.0 / (1.0 + q * q);
      r[k] = o + a * d - v[k];
      double* row = &jac[4 * k];
      row[0] = 4.0 * a * q * d * d / w;
      row[1] = 2.0 * a * q * q * d * d / w;
      row[2] = d;
      row[3] = 1.0;
    }
  };
  const auto res = levenberg_marquardt<4>(p0, m, eval, options);
  LorentzianFit f;
  f.center = sx.shift + res.p[0] * sx.span;
  f.fwhm = std::abs(res.p[1]) * sx.span;
  f.amplitude = res.p[2] * sy;
  f.offset = res.p[3] * sy;
  f.iterations = res.iterations;
  std::vector<double> r(m);
  for (std::size_t k = 0; k < m; ++k) r[k] = lorentzian(x[k], f.center, f.fwhm, f.amplitude, f.offset) - y[k];
  f.residual_norm = residual_norm(r);
  f.converged = res.converged && std::isfinite(f.residual_norm) && f.fwhm > 0.0;
  return f;
}

ExpDecayFit fit_exponential(std::span<const double> t, std::span<const double> y,
                            bool with_offset, const FitOptions& options) {
  check_same_size(t, y);
  const std::size_t m = t.size();
  if (m < 4) throw ValidationError("too_few_samples", "exponential fit needs at least 4 points");
  for (double v : y)
    if (!(v >= 0.0) || !std::isfinite(v))
      throw ValidationError("negative_amplitude", "decay amplitudes must be nonnegative");

  double tscale = 0.0, yscale = 0.0;
  for (std::size_t k = 0; k < m; ++k) {
    tscale = std::max(tscale, std::abs(t[k]));
    yscale = std::max(yscale, y[k]);
  }
  if (!(tscale > 0.0)) tscale = 1.0;
  if (!(yscale > 0.0)) throw ValidationError("negative_amplitude", "decay amplitudes are all zero");
  std::vector<double> u(m), v(m);
  for (std::size_t k = 0; k < m; ++k) {
    u[k] = t[k] / tscale;
    v[k] = y[k] / yscale;
  }

  // Log-linear start on the positive samples.
  std::vector<double> lu, lv;
  for (std::size_t k = 0; k < m; ++k)
    if (v[k] > 0.0) {
      lu.push_back(u[k]);
      lv.push_back(std::log(v[k]));
    }
  double rate = 1.0, amp = 1.0;
  if (lu.size() >= 2 && lu.front() != lu.back()) {
    const LinearFit lf = linear_fit(lu, lv);
    if (lf.slope < 0.0) rate = -lf.slope;
    amp = std::exp(lf.intercept);
  }

  ExpDecayFit f;
  std::vector<double> r(m);
  if (with_offset) {
    auto eval = [&](const std::array<double, 3>& p, std::vector<double>& res,
                    std::vector<double>& jac) {
      for (std::size_t k = 0; k < m; ++k) {
        const double e = std::exp(-p[1] * u[k]);
        res[k] = p[0] * e + p[2] - v[k];
        jac[3 * k] = e;
        jac[3 * k + 1] = -p[0] * u[k] * e;
        jac[3 * k + 2] = 1.0;
      }
    };
    const auto res = levenberg_marquardt<3>({amp, rate, 0.0}, m, eval, options);
    f.amplitude = res.p[0] * yscale;
    f.tau = tscale / res.p[1];
    f.offset = res.p[2] * yscale;
    f.iterations = res.iterations;
    f.converged = res.converged;
  } else {
    auto eval = [&](const std::array<double, 2>& p, std::vector<double>& res,
                    std::vector<double>& jac) {
      for (std::size_t k = 0; k < m; ++k) {
        const double e = std::exp(-p[1] * u[k]);
        res[k] = p[0] * e - v[k];
        jac[2 * k] = e;
        jac[2 * k + 1] = -p[0] * u[k] * e;
      }
    };
    const auto res = levenberg_marquardt<2>({amp, rate}, m, eval, options);
    f.amplitude = res.p[0] * yscale;
    f.tau = tscale / res.p[1];
    f.iterations = res.iterations;
    f.converged = res.converged;
  }
  for (std::size_t k = 0; k < m; ++k)
    r[k] = f.amplitude * std::exp(-t[k] / f.tau) + f.offset - y[k];
  f.residual_norm = residual_norm(r);
  f.converged = f.converged && f.tau > 0.0 && std::isfinite(f.tau) && std::isfinite(f.residual_norm);
  return f;
}

ExpDecayFit fit_exponential(const DecayCurve& curve, bool with_offset) {
  return fit_exponential(curve.storage_times, curve.amplitudes, with_offset);
}

LinearFit linear_fit(std::span<const double> x, std::span<const double> y) {
  check_same_size(x, y);
  const std::size_t n = x.size();
  if (n < 3) throw ValidationError("too_few_samples", "linear fit needs at least 3 points");
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(n);
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(n);
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double dx = x[k] - mx, dy = y[k] - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  if (!(sxx > 0.0)) throw ValidationError("degenerate_x", "linear fit needs distinct x values");
  LinearFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double sse = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double e = y[k] - (f.intercept + f.slope * x[k]);
    sse += e * e;
  }
  f.r2 = syy > 0.0 ? 1.0 - sse / syy : 1.0;
  return f;
}

}  // namespace cpo::analysis
