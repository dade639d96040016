#include "sbtherm/lorentz_fit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "sbtherm/constants.hpp"
#include "sbtherm/errors.hpp"

namespace sbtherm {

double lorentzian_psd(double f_hz, double area, double width_hz, double center_hz,
                      double background) {
  const double u = 2.0 * (f_hz - center_hz) / width_hz;
  return background + (2.0 * area / (k_pi * width_hz)) / (1.0 + u * u);
}

bool solve_small(double* a, double* b, std::size_t n) {
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    for (std::size_t r = col + 1; r < n; ++r) {
      if (std::abs(a[r * n + col]) > std::abs(a[pivot * n + col])) pivot = r;
    }
    if (a[pivot * n + col] == 0.0) return false;
    if (pivot != col) {
      for (std::size_t c = 0; c < n; ++c) std::swap(a[col * n + c], a[pivot * n + c]);
      std::swap(b[col], b[pivot]);
    }
    const double inv = 1.0 / a[col * n + col];
    for (std::size_t r = col + 1; r < n; ++r) {
      const double factor = a[r * n + col] * inv;
      if (factor == 0.0) continue;
      for (std::size_t c = col; c < n; ++c) a[r * n + c] -= factor * a[col * n + c];
      b[r] -= factor * b[col];
    }
  }
  for (std::size_t col = n; col-- > 0;) {
    double acc = b[col];
    for (std::size_t c = col + 1; c < n; ++c) acc -= a[col * n + c] * b[c];
    b[col] = acc / a[col * n + col];
  }
  return true;
}

namespace {

struct Params {
  double area, width, center, background;
};

void model_and_jacobian(const Params& p, std::span<const double> f, double* model,
                        double* jac /* n x 4, row-major */) {
  const double hw_inv = 2.0 / p.width;
  const double amp = 2.0 * p.area / (k_pi * p.width);
  for (std::size_t i = 0; i < f.size(); ++i) {
    const double u = (f[i] - p.center) * hw_inv;
    const double s = 1.0 / (1.0 + u * u);
    model[i] = p.background + amp * s;
    jac[i * 4 + 0] = (2.0 / (k_pi * p.width)) * s;
    jac[i * 4 + 1] = (2.0 * p.area / (k_pi * p.width * p.width)) * s * (2.0 * u * u * s - 1.0);
    jac[i * 4 + 2] = amp * 2.0 * u * s * s * hw_inv;
    jac[i * 4 + 3] = 1.0;
  }
}

double chi2_of(const Params& p, std::span<const double> f, std::span<const double> y,
               const std::vector<double>& inv_sigma) {
  const double hw_inv = 2.0 / p.width;
  const double amp = 2.0 * p.area / (k_pi * p.width);
  double acc = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    const double u = (f[i] - p.center) * hw_inv;
    const double m = p.background + amp / (1.0 + u * u);
    const double r = (y[i] - m) * inv_sigma[i];
    acc += r * r;
  }
  return acc;
}

Params initial_guess(std::span<const double> f, std::span<const double> y) {
  const std::size_t n = f.size();
  const double step = n > 1 ? f[1] - f[0] : 1.0;

  // Background from the median of the grid edges (outer 10% on each side).
  std::size_t edge = std::max<std::size_t>(2, n / 10);
  std::vector<double> edges;
  edges.reserve(2 * edge);
  for (std::size_t i = 0; i < edge; ++i) edges.push_back(y[i]);
  for (std::size_t i = n - edge; i < n; ++i) edges.push_back(y[i]);
  std::nth_element(edges.begin(), edges.begin() + edges.size() / 2, edges.end());
  const double bg = edges[edges.size() / 2];

  // Peak bin; ties resolved toward the lowest frequency.
  std::size_t peak = 0;
  for (std::size_t i = 1; i < n; ++i) {
    if (y[i] > y[peak]) peak = i;
  }
  const double height = std::max(y[peak] - bg, 0.0);

  // Half-maximum crossings around the peak.
  const double half = bg + 0.5 * height;
  std::size_t left = peak;
  while (left > 0 && y[left] > half) --left;
  std::size_t right = peak;
  while (right + 1 < n && y[right] > half) ++right;
  double width = f[right] - f[left];
  if (!(width > 0.0)) width = 4.0 * step;

  // Grid sum for the starting area; fall back to the height-width product for
  // degenerate (pure background) frames.
  double area = 0.0;
  for (std::size_t i = 0; i < n; ++i) area += (y[i] - bg) * step;
  if (!(area > 0.0)) area = height * width * k_pi / 2.0;
  if (!(area > 0.0)) area = step;  // keep the model non-degenerate

  return Params{area, width, f[peak], bg};
}

}  // namespace

FitResult fit_lorentzian(std::span<const double> freq_hz, std::span<const double> psd,
                         double n_averages) {
  const std::size_t n = freq_hz.size();
  if (n < 8 || psd.size() != n) throw DomainError("fit_lorentzian: need >= 8 bins");
  if (!(n_averages >= 1.0)) throw DomainError("fit_lorentzian: n_averages must be >= 1");

  const double step = freq_hz[1] - freq_hz[0];
  const double span = freq_hz[n - 1] - freq_hz[0];
  const double width_min = 0.1 * step;
  const double width_max = 4.0 * span;

  double mean_y = 0.0;
  for (double v : psd) mean_y += v;
  mean_y /= static_cast<double>(n);
  const double sigma_floor = std::max(1e-3 * mean_y, std::numeric_limits<double>::min());

  Params p = initial_guess(freq_hz, psd);
  p.width = std::clamp(p.width, width_min, width_max);

  std::vector<double> inv_sigma(n);
  std::vector<double> model(n);
  std::vector<double> jac(n * 4);

  // First pass weighted by the data, second by the fitted means.
  const double sqrt_nav = std::sqrt(n_averages);
  for (std::size_t i = 0; i < n; ++i) {
    inv_sigma[i] = sqrt_nav / std::max(psd[i], sigma_floor);
  }

  FitResult out;
  double lambda = 1e-3;
  bool converged = false;
  int total_iters = 0;
  const int max_iters = 200;

  for (int pass = 0; pass < 2; ++pass) {
    converged = false;
    lambda = 1e-3;
    double chi2 = chi2_of(p, freq_hz, psd, inv_sigma);
    while (total_iters < max_iters) {
      ++total_iters;
      model_and_jacobian(p, freq_hz, model.data(), jac.data());

      double jtj[16] = {0};
      double jtr[4] = {0};
      for (std::size_t i = 0; i < n; ++i) {
        const double w2 = inv_sigma[i] * inv_sigma[i];
        const double r = psd[i] - model[i];
        const double* ji = &jac[i * 4];
        for (int a = 0; a < 4; ++a) {
          jtr[a] += w2 * ji[a] * r;
          for (int b = a; b < 4; ++b) jtj[a * 4 + b] += w2 * ji[a] * ji[b];
        }
      }
      for (int a = 0; a < 4; ++a)
        for (int b = 0; b < a; ++b) jtj[a * 4 + b] = jtj[b * 4 + a];

      bool stepped = false;
      for (int tries = 0; tries < 30; ++tries) {
        double a_damped[16];
        double delta[4] = {jtr[0], jtr[1], jtr[2], jtr[3]};
        std::copy(jtj, jtj + 16, a_damped);
        for (int d = 0; d < 4; ++d) {
          a_damped[d * 4 + d] = jtj[d * 4 + d] * (1.0 + lambda) +
                                1e-300;  // keeps flat directions solvable
        }
        if (!solve_small(a_damped, delta, 4)) {
          lambda *= 8.0;
          continue;
        }
        Params trial{p.area + delta[0], std::clamp(p.width + delta[1], width_min, width_max),
                     p.center + delta[2], p.background + delta[3]};
        const double trial_chi2 = chi2_of(trial, freq_hz, psd, inv_sigma);
        if (trial_chi2 <= chi2 && std::isfinite(trial_chi2)) {
          // Relative step on every parameter, scaled to natural magnitudes.
          const double scale_a = std::abs(p.area) + step * mean_y + 1e-300;
          const double rel = std::max(
              std::max(std::abs(delta[0]) / scale_a, std::abs(delta[1]) / p.width),
              std::max(std::abs(delta[2]) / p.width,
                       std::abs(delta[3]) / (std::abs(p.background) + sigma_floor)));
          p = trial;
          chi2 = trial_chi2;
          lambda = std::max(lambda / 3.0, 1e-12);
          stepped = true;
          if (rel < 1e-8) converged = true;
          break;
        }
        lambda *= 8.0;
      }
      if (!stepped || converged) break;
    }
    // Reweight once from the fitted model.
    if (pass == 0) {
      model_and_jacobian(p, freq_hz, model.data(), jac.data());
      for (std::size_t i = 0; i < n; ++i) {
        inv_sigma[i] = sqrt_nav / std::max(model[i], sigma_floor);
      }
    }
  }

  const bool width_pinned = p.width <= width_min * (1.0 + 1e-9) ||
                            p.width >= width_max * (1.0 - 1e-9);

  // Covariance from the undamped normal matrix at the solution.
  model_and_jacobian(p, freq_hz, model.data(), jac.data());
  double jtj[16] = {0};
  for (std::size_t i = 0; i < n; ++i) {
    const double w2 = inv_sigma[i] * inv_sigma[i];
    const double* ji = &jac[i * 4];
    for (int a = 0; a < 4; ++a)
      for (int b = a; b < 4; ++b) jtj[a * 4 + b] += w2 * ji[a] * ji[b];
  }
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < a; ++b) jtj[a * 4 + b] = jtj[b * 4 + a];

  double cov[16];
  double err[4] = {0, 0, 0, 0};
  double aw_cov = 0.0;
  {
    // invert by solving against unit vectors
    bool ok = true;
    for (int col = 0; col < 4 && ok; ++col) {
      double a_copy[16];
      double e[4] = {0, 0, 0, 0};
      e[col] = 1.0;
      std::copy(jtj, jtj + 16, a_copy);
      ok = solve_small(a_copy, e, 4);
      for (int r = 0; r < 4; ++r) cov[r * 4 + col] = e[r];
    }
    if (ok) {
      for (int d = 0; d < 4; ++d) err[d] = cov[d * 4 + d] > 0.0 ? std::sqrt(cov[d * 4 + d]) : 0.0;
      aw_cov = cov[0 * 4 + 1];
    }
  }

  double rss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = psd[i] - model[i];
    rss += r * r;
  }

  out.area = p.area;
  out.width_hz = p.width;
  out.center_hz = p.center;
  out.background = p.background;
  out.area_err = err[0];
  out.width_err = err[1];
  out.center_err = err[2];
  out.background_err = err[3];
  out.area_width_cov = aw_cov;
  out.converged = converged && !width_pinned && std::isfinite(p.area);
  out.residual_rms = std::sqrt(rss / static_cast<double>(n));
  out.iterations = total_iters;
  return out;
}

}  // namespace sbtherm
