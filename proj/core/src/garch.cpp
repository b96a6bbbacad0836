#include "tailvar/garch.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "tailvar/errors.hpp"
#include "tailvar/nelder_mead.hpp"
#include "tailvar/special_functions.hpp"

namespace tailvar {

namespace {

constexpr double kHalfLog2Pi = 0.91893853320467274178;
constexpr double kLogPi = 1.14472988584940017414;

double sigmoid(double x) {
  const double s = 1.0 / (1.0 + std::exp(-x));
  // Keep the constrained parameters strictly inside their open intervals
  // even when the optimizer wanders to huge |x|.
  return std::clamp(s, 1e-10, 1.0 - 1e-10);
}

double logit(double p) { return std::log(p / (1.0 - p)); }

}  // namespace

GarchParams::GarchParams(double mu_, double omega_, double alpha_,
                         double beta_, Innovation kind_, double nu_) {
  const bool finite = std::isfinite(mu_) && std::isfinite(omega_) &&
                      std::isfinite(alpha_) && std::isfinite(beta_);
  if (!finite || !(omega_ > 0.0) || alpha_ < 0.0 || beta_ < 0.0 ||
      !(alpha_ + beta_ < 1.0)) {
    throw std::invalid_argument(
        "GarchParams: need omega > 0, alpha, beta >= 0, alpha + beta < 1");
  }
  if (kind_ == Innovation::student_t && !(nu_ > 2.0)) {
    throw std::invalid_argument("GarchParams: t innovations need nu > 2");
  }
  mu = mu_;
  omega = omega_;
  alpha = alpha_;
  beta = beta_;
  nu = nu_;
  kind = kind_;
}

Vec filter_volatility(const GarchParams& params,
                      std::span<const double> returns) {
  if (returns.empty()) {
    throw std::invalid_argument("filter_volatility: empty series");
  }
  const auto n = static_cast<double>(returns.size());
  double s2 = 0.0;
  for (double r : returns) {
    const double eps = r - params.mu;
    s2 += eps * eps;
  }
  s2 /= n;
  if (!(s2 > 0.0)) {
    throw NumericError(
        "filter_volatility: residuals have zero variance, sigma_1 is "
        "degenerate");
  }

  Vec sigma(returns.size());
  double var = s2;
  sigma[0] = std::sqrt(var);
  for (std::size_t t = 1; t < returns.size(); ++t) {
    const double eps = returns[t - 1] - params.mu;
    var = params.omega + params.alpha * eps * eps + params.beta * var;
    sigma[t] = std::sqrt(var);
  }
  return sigma;
}

double innovation_logpdf(double eps, double sigma2, Innovation kind,
                         double nu) {
  if (!(sigma2 > 0.0)) {
    throw std::invalid_argument("innovation_logpdf: sigma2 must be positive");
  }
  if (kind == Innovation::normal) {
    return -kHalfLog2Pi - 0.5 * std::log(sigma2) - 0.5 * eps * eps / sigma2;
  }
  if (!(nu > 2.0)) {
    throw std::invalid_argument("innovation_logpdf: t innovations need nu > 2");
  }
  // eps = sigma * T / s with T ~ t(nu) and s^2 = nu/(nu-2), so that
  // Var(eps) = sigma2.  Density: (s/sigma) f_t(s eps / sigma).
  const double sigma = std::sqrt(sigma2);
  const double s = std::sqrt(nu / (nu - 2.0));
  const double zs = eps * s / sigma;
  const double ln_ft = std::lgamma(0.5 * (nu + 1.0)) - std::lgamma(0.5 * nu) -
                       0.5 * (std::log(nu) + kLogPi) -
                       0.5 * (nu + 1.0) * std::log1p(zs * zs / nu);
  return ln_ft + std::log(s) - std::log(sigma);
}

double log_likelihood(const GarchParams& params,
                      std::span<const double> returns) {
  const Vec sigma = filter_volatility(params, returns);
  double ll = 0.0;
  for (std::size_t t = 0; t < returns.size(); ++t) {
    const double eps = returns[t] - params.mu;
    ll += innovation_logpdf(eps, sigma[t] * sigma[t], params.kind, params.nu);
  }
  if (!std::isfinite(ll)) {
    throw NumericError("log_likelihood: non-finite density sum");
  }
  return ll;
}

namespace {

GarchParams params_from_theta(std::span<const double> theta, Innovation kind) {
  const double omega = std::exp(std::clamp(theta[1], -700.0, 700.0));
  const double persistence = sigmoid(theta[2]);
  const double share = sigmoid(theta[3]);
  const double nu =
      kind == Innovation::student_t
          ? 2.0 + std::exp(std::clamp(theta[4], -30.0, 30.0))
          : 0.0;
  return GarchParams(theta[0], omega, persistence * share,
                     persistence * (1.0 - share), kind, nu);
}

}  // namespace

GarchFitReport fit_mle(std::span<const double> returns, Innovation kind) {
  if (returns.size() < 100) {
    throw DataError("fit_mle: need at least 100 observations, got " +
                    std::to_string(returns.size()));
  }
  const auto n = static_cast<double>(returns.size());
  double mean = 0.0;
  for (double r : returns) mean += r;
  mean /= n;
  double var = 0.0;
  for (double r : returns) var += (r - mean) * (r - mean);
  var /= n;
  // Constant series leave rounding noise, not an exact zero; both are
  // equally degenerate for the likelihood.
  if (!(var > 0.0) || std::sqrt(var) <= 1e-12 * std::abs(mean)) {
    throw NumericError("fit_mle: constant series, likelihood is degenerate");
  }

  const auto objective = [&](std::span<const double> theta) {
    try {
      return -log_likelihood(params_from_theta(theta, kind), returns);
    } catch (const std::exception&) {
      return 1e100;
    }
  };

  struct Start {
    double persistence, share, omega_frac, nu;
  };
  static constexpr Start kStarts[3] = {
      {0.90, 1.0 / 9.0, 0.10, 8.0},
      {0.50, 0.20, 0.50, 5.0},
      {0.97, 0.05, 0.03, 12.0},
  };

  const std::size_t dim = kind == Innovation::student_t ? 5 : 4;
  NelderMeadResult winner;
  winner.f = 1e300;
  for (const Start& s : kStarts) {
    Vec theta0 = {mean, std::log(s.omega_frac * var), logit(s.persistence),
                  logit(s.share)};
    Vec step = {0.1 * std::sqrt(var), 0.5, 0.5, 0.5};
    if (dim == 5) {
      theta0.push_back(std::log(s.nu - 2.0));
      step.push_back(0.5);
    }
    const NelderMeadResult r = nelder_mead(objective, theta0, step);
    if (r.f < winner.f) winner = r;
  }
  if (winner.f >= 1e100) {
    throw NumericError("fit_mle: likelihood evaluation failed at every start");
  }

  GarchFitReport report{params_from_theta(winner.x, kind), -winner.f,
                        winner.converged, winner.iterations};
  return report;
}

Matrix forecast_quantiles(const GarchParams& params,
                          std::span<const double> returns,
                          const TauGrid& taus) {
  const Vec sigma = filter_volatility(params, returns);
  Vec qinn;
  qinn.reserve(taus.size());
  for (double tau : taus.levels()) {
    if (params.kind == Innovation::normal) {
      qinn.push_back(std_normal_quantile(tau));
    } else {
      const double scale = std::sqrt(params.nu / (params.nu - 2.0));
      qinn.push_back(student_t_quantile(tau, params.nu) / scale);
    }
  }
  Matrix out(returns.size(), taus.size());
  for (std::size_t t = 0; t < returns.size(); ++t) {
    for (std::size_t k = 0; k < taus.size(); ++k) {
      out(t, k) = params.mu + sigma[t] * qinn[k];
    }
  }
  return out;
}

void write_garch_params(const std::string& path, const GarchParams& params) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write '" + path + "'");
  out << "kind "
      << (params.kind == Innovation::normal ? "normal" : "student_t") << '\n';
  char buffer[48];
  const auto emit = [&](const char* key, double value) {
    std::snprintf(buffer, sizeof buffer, "%.17g", value);
    out << key << ' ' << buffer << '\n';
  };
  emit("mu", params.mu);
  emit("omega", params.omega);
  emit("alpha", params.alpha);
  emit("beta", params.beta);
  emit("nu", params.nu);
}

GarchParams read_garch_params(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path + "'");
  std::string key, value;
  Innovation kind = Innovation::normal;
  double mu = 0.0, omega = 0.0, alpha = 0.0, beta = 0.0, nu = 0.0;
  bool saw_kind = false;
  while (in >> key >> value) {
    if (key == "kind") {
      saw_kind = true;
      if (value == "normal") {
        kind = Innovation::normal;
      } else if (value == "student_t") {
        kind = Innovation::student_t;
      } else {
        throw DataError("'" + path + "': unknown innovation kind '" + value +
                        "'");
      }
    } else if (key == "mu") {
      mu = std::strtod(value.c_str(), nullptr);
    } else if (key == "omega") {
      omega = std::strtod(value.c_str(), nullptr);
    } else if (key == "alpha") {
      alpha = std::strtod(value.c_str(), nullptr);
    } else if (key == "beta") {
      beta = std::strtod(value.c_str(), nullptr);
    } else if (key == "nu") {
      nu = std::strtod(value.c_str(), nullptr);
    } else {
      throw DataError("'" + path + "': unknown field '" + key + "'");
    }
  }
  if (!saw_kind) throw DataError("'" + path + "': missing 'kind'");
  try {
    return GarchParams(mu, omega, alpha, beta, kind, nu);
  } catch (const std::invalid_argument& e) {
    throw DataError("'" + path + "': " + e.what());
  }
}

}  // namespace tailvar
