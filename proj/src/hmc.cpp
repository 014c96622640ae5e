#include "hcls/hmc.hpp"

#include <algorithm>
#include <numeric>
#include <cmath>
#include <numbers>
#include <string>

#include "hcls/errors.hpp"
#include "pair_kernel.hpp"
#include "spectral.hpp"

namespace hcls {
namespace {

constexpr double kAlphaPriorSd = 0.1;
constexpr double kTemperatureShape = 0.1;
constexpr double kTemperatureRate = 1.0;
constexpr double kMaxTemperature = 0.5;
constexpr double kInitialTemperature = 0.1;
constexpr double kDivergenceThreshold = 1000.0;

std::string coordinate_name(const StateLayout& layout, Eigen::Index k) {
  if (k == layout.log_R()) return "log_R";
  if (k == layout.alpha()) return "alpha";
  if (layout.learn_temperature && k == layout.logit_T()) return "logit_T";
  if (k < layout.angle(0)) return "radial[" + std::to_string(k - layout.radial(0)) + "]";
  return "theta[" + std::to_string(k - layout.angle(0)) + "]";
}

double logit(double p) { return std::log(p) - std::log1p(-p); }

}  // namespace

double leapfrog(const LogDensityFn& log_density, Eigen::VectorXd& q, Eigen::VectorXd& p, Eigen::VectorXd& grad,
                double step_size, int steps) {
  double logp = 0.0;
  p.noalias() += 0.5 * step_size * grad;
  for (int l = 0; l < steps; ++l) {
    q.noalias() += step_size * p;
    logp = log_density(q, grad);
    if (l + 1 < steps) p.noalias() += step_size * grad;
  }
  p.noalias() += 0.5 * step_size * grad;
  return logp;
}

ChainResult run_hmc(const LogDensityFn& log_density, Eigen::VectorXd init, const HmcConfig& config) {
  if (config.warmup < 0 || config.draws < 0 || config.n_leapfrog < 1 || !(config.step_size > 0.0)) {
    throw ConfigError("run_hmc: invalid configuration");
  }
  Rng rng(config.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  ChainResult out;
  Eigen::VectorXd q = std::move(init);
  Eigen::VectorXd grad(q.size());
  double logp = log_density(q, grad);
  if (!std::isfinite(logp)) throw NumericalError("run_hmc: initial state has non-finite log density");

  // Dual averaging (Hoffman & Gelman) on log step size.
  double step = config.step_size;
  const double mu = std::log(10.0 * step);
  constexpr double gamma = 0.05, t0 = 10.0, kappa = 0.75;
  double h_bar = 0.0;
  double log_step_bar = 0.0;

  Eigen::VectorXd q1(q.size()), p(q.size()), p1(q.size()), grad1(q.size());
  double accept_sum = 0.0;
  const int total = config.warmup + config.draws;
  for (int it = 0; it < total; ++it) {
    const bool warming = it < config.warmup;
    for (Eigen::Index k = 0; k < p.size(); ++k) p(k) = normal(rng);
    const double h0 = -logp + 0.5 * p.squaredNorm();
    q1 = q;
    p1 = p;
    grad1 = grad;
    double logp1 = -std::numeric_limits<double>::infinity();
    try {
      logp1 = leapfrog(log_density, q1, p1, grad1, step, config.n_leapfrog);
    } catch (const NumericalError&) {
      logp1 = -std::numeric_limits<double>::infinity();
    }
    const double h1 = -logp1 + 0.5 * p1.squaredNorm();
    const bool divergent = !std::isfinite(h1) || h1 - h0 > kDivergenceThreshold;
    const double accept_prob = std::isfinite(h1) ? std::min(1.0, std::exp(h0 - h1)) : 0.0;
    if (unit(rng) < accept_prob) {
      q.swap(q1);
      grad.swap(grad1);
      logp = logp1;
    }

    if (warming) {
      if (divergent) ++out.warmup_divergences;
      if (config.adapt_step_size) {
        const double m = it + 1.0;
        h_bar = (1.0 - 1.0 / (m + t0)) * h_bar + (config.target_accept - accept_prob) / (m + t0);
        const double log_step = mu - std::sqrt(m) / gamma * h_bar;
        const double w = std::pow(m, -kappa);
        log_step_bar = w * log_step + (1.0 - w) * log_step_bar;
        step = std::exp(log_step);
        if (it + 1 == config.warmup) step = std::exp(log_step_bar);
      }
    } else {
      if (divergent) ++out.divergences;
      accept_sum += accept_prob;
      const int kept = it - config.warmup;
      if (kept % std::max(1, config.thin) == 0) {
        out.samples.push_back(q);
        out.log_density.push_back(logp);
      }
    }
  }
  out.step_size = step;
  out.acceptance_rate = config.draws > 0 ? accept_sum / config.draws : 0.0;
  out.diagnostic_failure = config.warmup > 0 && out.warmup_divergences > config.warmup / 4;
  return out;
}

HclsPosterior::HclsPosterior(const Graph& g, std::optional<double> fixed_T)
    : n_(g.num_nodes()),
      fixed_T_(fixed_T),
      layout_{g.num_nodes(), !fixed_T.has_value()},
      adjacency_(static_cast<std::size_t>(g.num_nodes()) * static_cast<std::size_t>(g.num_nodes()), 0),
      graph_(g),
      observed_density_(g.density()) {
  if (n_ < 2) throw DomainError("HclsPosterior: graph needs at least 2 nodes");
  if (fixed_T_ && !(*fixed_T_ > 0.0 && *fixed_T_ <= kMaxTemperature)) {
    throw DomainError("HclsPosterior: fixed temperature must lie in (0, 0.5]");
  }
  for (const Edge& e : g.edges()) {
    adjacency_[static_cast<std::size_t>(e.u) * static_cast<std::size_t>(n_) + static_cast<std::size_t>(e.v)] = 1;
    adjacency_[static_cast<std::size_t>(e.v) * static_cast<std::size_t>(n_) + static_cast<std::size_t>(e.u)] = 1;
  }
}

double HclsPosterior::log_posterior(const Eigen::VectorXd& state, Eigen::VectorXd& grad) const {
  if (state.size() != dim()) throw ConfigError("log_posterior: state has wrong dimension");
  grad.setZero(dim());
  const double log_R = state(layout_.log_R());
  const double R = std::exp(log_R);
  const double alpha = state(layout_.alpha());
  double T = 0.0, dT_dt = 0.0, t = 0.0;
  if (layout_.learn_temperature) {
    t = state(layout_.logit_T());
    T = kMaxTemperature * logistic(t);
    dT_dt = T * logistic(-t);
  } else {
    T = *fixed_T_;
  }

  Eigen::ArrayXd r(n_), dr_ds(n_), dr_dR(n_), theta(n_);
  for (int i = 0; i < n_; ++i) {
    const auto m = detail::radial_map(state(layout_.radial(i)), R);
    r(i) = m.r;
    dr_ds(i) = m.dr_ds;
    dr_dR(i) = m.dr_dR;
    theta(i) = state(layout_.angle(i));
  }
  detail::NodeCache cache;
  cache.assign(r, theta);

  const double inv2T = 0.5 / T;
  double loglik = 0.0, dL_dalpha = 0.0, dL_dT = 0.0;
  Eigen::ArrayXd dL_dr = Eigen::ArrayXd::Zero(n_);
  Eigen::ArrayXd dL_dth = Eigen::ArrayXd::Zero(n_);
  for (int i = 0; i < n_; ++i) {
    const std::uint8_t* row = adjacency_.data() + static_cast<std::size_t>(i) * static_cast<std::size_t>(n_);
    for (int j = i + 1; j < n_; ++j) {
      const auto pg = detail::hyperbolic_pair(cache, i, j);
      const double eta = (alpha - pg.d) * inv2T;
      const double e = std::exp(-std::abs(eta));
      const double y = row[j];
      const double p = eta >= 0.0 ? 1.0 / (1.0 + e) : e / (1.0 + e);
      loglik += y * eta - (std::max(eta, 0.0) + std::log1p(e));
      const double resid = y - p;
      const double dL_dd = -resid * inv2T;
      dL_dr(i) += dL_dd * pg.d_ri;
      dL_dr(j) += dL_dd * pg.d_rj;
      dL_dth(i) += dL_dd * pg.d_thi;
      dL_dth(j) -= dL_dd * pg.d_thi;
      dL_dalpha += resid * inv2T;
      dL_dT -= resid * eta / T;
    }
  }

  double value = loglik;
  double dV_dR = (dL_dr * dr_dR).sum();

  // R ~ Exponential(1), with log-Jacobian log R.
  value += -R + log_R;
  dV_dR += -1.0;
  grad(layout_.log_R()) += 1.0;

  // alpha | R ~ Normal(R, 0.1)
  const double z = (alpha - R) / kAlphaPriorSd;
  value += -0.5 * z * z - std::log(kAlphaPriorSd) - 0.5 * std::log(2.0 * std::numbers::pi);
  grad(layout_.alpha()) += dL_dalpha - z / kAlphaPriorSd;
  dV_dR += z / kAlphaPriorSd;
  grad(layout_.log_R()) += dV_dR * R;

  if (layout_.learn_temperature) {
    // Gamma(0.1, 1) density on T; the truncation constant is parameter-free.
    value += (kTemperatureShape - 1.0) * std::log(T) - kTemperatureRate * T - std::lgamma(kTemperatureShape);
    // log dT/dt = log T + log logistic(-t)
    value += std::log(T) - softplus(t);
    const double dV_dT = dL_dT + (kTemperatureShape - 1.0) / T - kTemperatureRate;
    grad(layout_.logit_T()) = dV_dT * dT_dt + 1.0 - 2.0 * logistic(t);
  }

  // u_i ~ U(0,1) with log-Jacobian log u + log(1 - u); angles uniform.
  value -= n_ * std::log(kTwoPi);
  for (int i = 0; i < n_; ++i) {
    const double s = state(layout_.radial(i));
    value -= softplus(-s) + softplus(s);
    grad(layout_.radial(i)) = dL_dr(i) * dr_ds(i) + 1.0 - 2.0 * logistic(s);
    grad(layout_.angle(i)) = dL_dth(i);
  }

  if (!std::isfinite(value)) throw NumericalError("log_posterior: non-finite value");
  for (Eigen::Index k = 0; k < grad.size(); ++k) {
    if (!std::isfinite(grad(k))) {
      throw NumericalError("log_posterior: non-finite gradient at " + coordinate_name(layout_, k));
    }
  }
  return value;
}

double HclsPosterior::log_posterior(const Eigen::VectorXd& state) const {
  Eigen::VectorXd grad;
  return log_posterior(state, grad);
}

ModelParams HclsPosterior::params(const Eigen::VectorXd& state) const {
  ModelParams p;
  p.R = std::exp(state(layout_.log_R()));
  p.alpha = state(layout_.alpha());
  p.T = layout_.learn_temperature ? kMaxTemperature * logistic(state(layout_.logit_T())) : *fixed_T_;
  return p;
}

std::vector<PolarPoint> HclsPosterior::positions(const Eigen::VectorXd& state) const {
  const double R = std::exp(state(layout_.log_R()));
  std::vector<PolarPoint> out;
  out.reserve(static_cast<std::size_t>(n_));
  for (int i = 0; i < n_; ++i) {
    out.emplace_back(detail::radial_map(state(layout_.radial(i)), R).r, state(layout_.angle(i)));
  }
  return out;
}

Eigen::VectorXd HclsPosterior::encode(const ModelParams& params, std::span<const PolarPoint> positions) const {
  if (static_cast<int>(positions.size()) != n_) throw ConfigError("encode: wrong number of positions");
  Eigen::VectorXd q(dim());
  q(layout_.log_R()) = std::log(params.R);
  q(layout_.alpha()) = params.alpha;
  if (layout_.learn_temperature) q(layout_.logit_T()) = logit(params.T / kMaxTemperature);
  const double shR = std::sinh(0.5 * params.R);
  for (int i = 0; i < n_; ++i) {
    const auto& pt = positions[static_cast<std::size_t>(i)];
    const double sh = std::sinh(0.5 * std::min(pt.r, params.R));
    const double u = std::clamp((sh * sh) / (shR * shR), 1e-12, 1.0 - 1e-12);
    q(layout_.radial(i)) = logit(u);
    q(layout_.angle(i)) = pt.theta;
  }
  return q;
}

Eigen::VectorXd HclsPosterior::prior_state(Rng& rng) const {
  const double T0 = fixed_T_.value_or(kInitialTemperature);
  const double R = density_matched_radius(observed_density_, T0, rng);
  std::vector<PolarPoint> pts;
  pts.reserve(static_cast<std::size_t>(n_));
  for (int i = 0; i < n_; ++i) pts.push_back(sample_uniform_disk(R, rng));
  return encode(ModelParams{R, R, T0}, pts);
}

Eigen::VectorXd HclsPosterior::initial_state(Rng& rng, int optim_steps) const {
  const double T0 = fixed_T_.value_or(kInitialTemperature);
  const double R = density_matched_radius(observed_density_, T0, rng);

  const detail::SpectralLayout layout = detail::spectral_layout(graph_);
  std::uniform_real_distribution<double> jitter(-1e-3, 1e-3);
  std::vector<PolarPoint> pts;
  pts.reserve(static_cast<std::size_t>(n_));
  for (int i = 0; i < n_; ++i) {
    pts.emplace_back(disk_radius_from_quantile(layout.quantile(i), R), layout.angle(i) + jitter(rng));
  }
  return optimize(encode(ModelParams{R, R, T0}, pts), optim_steps);
}

Eigen::VectorXd HclsPosterior::optimize(Eigen::VectorXd state, int steps, double learning_rate) const {
  constexpr double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
  Eigen::VectorXd m = Eigen::VectorXd::Zero(state.size());
  Eigen::VectorXd v = Eigen::VectorXd::Zero(state.size());
  Eigen::VectorXd grad(state.size());
  Eigen::VectorXd best = state;
  double best_value = log_posterior(state, grad);
  for (int t = 1; t <= steps; ++t) {
    double value;
    try {
      value = log_posterior(state, grad);
    } catch (const NumericalError&) {
      break;
    }
    if (value > best_value) {
      best_value = value;
      best = state;
    }
    m = beta1 * m + (1.0 - beta1) * grad;
    v = beta2 * v + (1.0 - beta2) * grad.cwiseAbs2();
    const double c1 = 1.0 - std::pow(beta1, t);
    const double c2 = 1.0 - std::pow(beta2, t);
    state.array() += learning_rate * (m.array() / c1) / ((v.array() / c2).sqrt() + eps);
  }
  return best;
}

LogDensityFn HclsPosterior::as_function() const {
  return [this](const Eigen::VectorXd& q, Eigen::VectorXd& grad) { return log_posterior(q, grad); };
}

namespace {

PosteriorDraws sample_posterior(const Graph& g, std::optional<double> fixed_T, const HmcConfig& config) {
  const HclsPosterior posterior(g, fixed_T);
  Rng init_rng(derive_seed(config.seed, 0x1d17));
  const Eigen::VectorXd init = posterior.initial_state(init_rng, config.init_optim_steps);
  const ChainResult chain = run_hmc(posterior.as_function(), init, config);

  PosteriorDraws out;
  out.fixed_T = fixed_T;
  out.acceptance_rate = chain.acceptance_rate;
  out.divergence_count = chain.divergences;
  out.warmup_divergences = chain.warmup_divergences;
  out.step_size = chain.step_size;
  out.diagnostic_failure = chain.diagnostic_failure;
  out.draws.reserve(chain.samples.size());
  for (const auto& q : chain.samples) {
    PosteriorDraw d{posterior.params(q), posterior.positions(q)};
    out.traces["R"].push_back(d.params.R);
    out.traces["alpha"].push_back(d.params.alpha);
    out.traces["T"].push_back(d.params.T);
    out.draws.push_back(std::move(d));
  }
  return out;
}

}  // namespace

PosteriorDraws hmc_sample(const Graph& g, const HmcConfig& config) { return sample_posterior(g, std::nullopt, config); }

PosteriorDraws fixed_temperature_mode(const Graph& g, double T_fixed, const HmcConfig& config) {
  return sample_posterior(g, T_fixed, config);
}

Eigen::MatrixXd posterior_distance_summary(const PosteriorDraws& draws) {
  if (draws.draws.empty()) throw DomainError("posterior_distance_summary: no draws");
  const auto n = static_cast<int>(draws.draws.front().positions.size());
  Eigen::MatrixXd mean = Eigen::MatrixXd::Zero(n, n);
  for (const auto& d : draws.draws) {
    for (int i = 0; i < n; ++i) {
      for (int j = i + 1; j < n; ++j) {
        mean(i, j) += hyperbolic_distance_stable(d.positions[static_cast<std::size_t>(i)], d.positions[static_cast<std::size_t>(j)]);
      }
    }
  }
  mean /= static_cast<double>(draws.draws.size());
  mean.triangularView<Eigen::StrictlyLower>() = mean.transpose().triangularView<Eigen::StrictlyLower>();
  return mean;
}

Eigen::MatrixXd posterior_edge_probabilities(const PosteriorDraws& draws) {
  if (draws.draws.empty()) throw DomainError("posterior_edge_probabilities: no draws");
  const auto n = static_cast<int>(draws.draws.front().positions.size());
  Eigen::MatrixXd mean = Eigen::MatrixXd::Zero(n, n);
  for (const auto& d : draws.draws) {
    for (int i = 0; i < n; ++i) {
      for (int j = i + 1; j < n; ++j) {
        const double dist =
            hyperbolic_distance_stable(d.positions[static_cast<std::size_t>(i)], d.positions[static_cast<std::size_t>(j)]);
        mean(i, j) += link_probability(dist, d.params);
      }
    }
  }
  mean /= static_cast<double>(draws.draws.size());
  mean.triangularView<Eigen::StrictlyLower>() = mean.transpose().triangularView<Eigen::StrictlyLower>();
  return mean;
}

double effective_sample_size(std::span<const double> chain) {
  const auto n = static_cast<Eigen::Index>(chain.size());
  if (n < 4) return static_cast<double>(n);
  const Eigen::Map<const Eigen::VectorXd> x(chain.data(), n);
  const Eigen::VectorXd c = x.array() - x.mean();
  const double var = c.squaredNorm() / static_cast<double>(n);
  if (var == 0.0) return static_cast<double>(n);
  auto rho = [&](Eigen::Index lag) { return c.head(n - lag).dot(c.tail(n - lag)) / (static_cast<double>(n) * var); };
  double tau = -1.0;
  for (Eigen::Index k = 0; 2 * k + 1 < n; ++k) {
    const double pair = rho(2 * k) + rho(2 * k + 1);
    if (pair <= 0.0) break;
    tau += 2.0 * pair;
  }
  return static_cast<double>(n) / std::max(tau, 1e-12);
}

double split_rhat(std::span<const double> chain) {
  const std::size_t half = chain.size() / 2;
  if (half < 2) return std::numeric_limits<double>::quiet_NaN();
  auto stats = [](std::span<const double> x) {
    double mean = 0.0;
    for (double v : x) mean += v;
    mean /= static_cast<double>(x.size());
    double ss = 0.0;
    for (double v : x) ss += (v - mean) * (v - mean);
    return std::pair{mean, ss / static_cast<double>(x.size() - 1)};
  };
  const auto [m1, v1] = stats(chain.subspan(0, half));
  const auto [m2, v2] = stats(chain.subspan(chain.size() - half, half));
  const double n = static_cast<double>(half);
  const double w = 0.5 * (v1 + v2);
  const double grand = 0.5 * (m1 + m2);
  const double b = n * ((m1 - grand) * (m1 - grand) + (m2 - grand) * (m2 - grand));
  if (w == 0.0) return 1.0;
  return std::sqrt(((n - 1.0) / n * w + b / n) / w);
}

}  // namespace hcls
