// SPDX-License-Identifier: Apache-2.0
#include "gmvae/selector.hpp"

#include <cmath>
#include <stdexcept>

#include "gmvae/errors.hpp"
#include "gmvae/kernels.hpp"

#include <json.hpp>

namespace gmvae {

const char* reject_reason_name(RejectReason r) {
  switch (r) {
    case RejectReason::none: return "none";
    case RejectReason::latent_outlier: return "latent_outlier";
    case RejectReason::reconstruction_outlier: return "reconstruction_outlier";
    case RejectReason::both: return "both";
  }
  return "?";
}

std::size_t classify(const GmvaeModel& m, const Tensor& x) {
  Tensor z = encode(m, x);
  std::size_t best = 0;
  double best_sq = kernels::squared_l2(z.data(), m.prior.means[0].data());
  for (std::size_t c = 1; c < m.prior.num_classes; ++c) {
    double sq = kernels::squared_l2(z.data(), m.prior.means[c].data());
    if (sq < best_sq) {
      best_sq = sq;
      best = c;
    }
  }
  return best;
}

double mahalanobis_sq(const Tensor& z, const Tensor& mu, double variance) {
  if (!(variance > 0.0)) throw std::invalid_argument("mahalanobis_sq: variance must be positive");
  require_same_shape(z, mu, "mahalanobis_sq");
  return kernels::squared_l2(z.data(), mu.data()) / variance;
}

// Regularized lower incomplete gamma, series for x < a+1 and continued
// fraction otherwise (Lanczos-free; std::lgamma supplies the normalizer).
double regularized_gamma_p(double a, double x) {
  if (x < 0.0 || a <= 0.0) throw std::invalid_argument("regularized_gamma_p: domain error");
  if (x == 0.0) return 0.0;
  double lg = std::lgamma(a);
  if (x < a + 1.0) {
    // series: P(a,x) = x^a e^-x / Gamma(a) * sum_n x^n / (a(a+1)...(a+n))
    double term = 1.0 / a;
    double sum = term;
    for (int n = 1; n < 500; ++n) {
      term *= x / (a + n);
      sum += term;
      if (std::abs(term) < std::abs(sum) * 1e-16) break;
    }
    return sum * std::exp(-x + a * std::log(x) - lg);
  }
  // Lentz continued fraction for Q(a,x); P = 1 - Q.
  double tiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double dd = 1.0 / b;
  double h = dd;
  for (int i = 1; i < 500; ++i) {
    double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
    b += 2.0;
    dd = an * dd + b;
    if (std::abs(dd) < tiny) dd = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    dd = 1.0 / dd;
    double delta = dd * c;
    h *= delta;
    if (std::abs(delta - 1.0) < 1e-16) break;
  }
  double q = std::exp(-x + a * std::log(x) - lg) * h;
  return 1.0 - q;
}

namespace {
double chi_square_cdf(double x, std::size_t dof) {
  return regularized_gamma_p(0.5 * static_cast<double>(dof), 0.5 * x);
}
}  // namespace

double chi_square_critical(std::size_t dof, double p) {
  if (dof == 0) throw std::invalid_argument("chi_square_critical: dof must be >= 1");
  if (!(p > 0.0 && p < 1.0)) {
    throw std::invalid_argument("chi_square_critical: p must lie strictly in (0,1)");
  }
  double lo = 0.0;
  double hi = static_cast<double>(dof);
  while (chi_square_cdf(hi, dof) < p) hi *= 2.0;
  // bisection well below the 1e-6 requirement
  for (int it = 0; it < 200 && hi - lo > 1e-9 * (1.0 + hi); ++it) {
    double mid = 0.5 * (lo + hi);
    if (chi_square_cdf(mid, dof) < p) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

Thresholds calibrate(const TrainStats& stats, std::size_t d, double p) {
  if (stats.recon_errors.empty()) {
    throw std::invalid_argument("calibrate: no reconstruction statistics");
  }
  double mean = 0.0;
  for (double v : stats.recon_errors) mean += v;
  mean /= static_cast<double>(stats.recon_errors.size());
  double var = 0.0;
  for (double v : stats.recon_errors) var += (v - mean) * (v - mean);
  var /= static_cast<double>(stats.recon_errors.size());
  Thresholds t;
  t.tau_enc = chi_square_critical(d, p);
  t.tau_dec = mean + 3.0 * std::sqrt(var);
  t.confidence_p = p;
  return t;
}

Decision selective_classify(const GmvaeModel& m, const Thresholds& t, const Tensor& x) {
  Decision d;
  d.z_mean = encode(m, x);
  d.label = 0;
  double best_sq = kernels::squared_l2(d.z_mean.data(), m.prior.means[0].data());
  for (std::size_t c = 1; c < m.prior.num_classes; ++c) {
    double sq = kernels::squared_l2(d.z_mean.data(), m.prior.means[c].data());
    if (sq < best_sq) {
      best_sq = sq;
      d.label = c;
    }
  }
  d.mahalanobis_sq = best_sq / m.prior.variance;
  Tensor recon = decode(m, d.z_mean);
  d.recon_error = kernels::squared_l2(x.data(), recon.data());

  bool latent_ok = d.mahalanobis_sq <= t.tau_enc;
  bool recon_ok = d.recon_error <= t.tau_dec;
  d.accepted = latent_ok && recon_ok;
  if (d.accepted) {
    d.reason = RejectReason::none;
  } else if (!latent_ok && !recon_ok) {
    d.reason = RejectReason::both;
  } else if (!latent_ok) {
    d.reason = RejectReason::latent_outlier;
  } else {
    d.reason = RejectReason::reconstruction_outlier;
  }
  return d;
}

std::string decision_to_json(const Decision& d) {
  nlohmann::json j;
  j["verdict"] = d.accepted ? "accept" : "reject";
  if (d.accepted) {
    j["label"] = d.label;
    j["reason"] = nullptr;
  } else {
    j["label"] = nullptr;
    j["reason"] = reject_reason_name(d.reason);
  }
  j["mahalanobis_sq"] = d.mahalanobis_sq;
  j["recon_error"] = d.recon_error;
  return j.dump();
}

}  // namespace gmvae
