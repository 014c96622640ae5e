#include "hcls/vi.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <string>

#include "hcls/errors.hpp"
#include "pair_kernel.hpp"
#include "spectral.hpp"

namespace hcls {
namespace {

constexpr double kMaxTemperature = 0.5;
constexpr double kInitialTemperature = 0.1;
constexpr double kAlphaPriorSd = 0.1;    // hyperbolic: alpha | R ~ Normal(R, 0.1)
constexpr double kEclsAlphaSd = 10.0;    // Euclidean: alpha ~ Normal(0, 10)
constexpr double kTemperatureShape = 0.1;
constexpr double kTemperatureRate = 1.0;
constexpr double kWarmStartSigma = 0.1;
const double kLogSigmaMin = std::log(kSigmaMin);
const double kLogSigmaMax = std::log(kSigmaMax);

double logit(double p) { return std::log(p) - std::log1p(-p); }

struct Forward {
  Eigen::MatrixXd pre1;  // A_hat W1
  Eigen::MatrixXd h1;    // relu(pre1)
  Eigen::MatrixXd out;   // A_hat h1 W2
};

Forward forward(const Eigen::SparseMatrix<double>& a_hat, const EncoderWeights& w) {
  if (w.w1.rows() != a_hat.rows() || w.w2.rows() != w.w1.cols() || w.w2.cols() != 4) {
    throw ConfigError("gcn_encode: weight shapes do not match the graph");
  }
  Forward f;
  f.pre1 = a_hat * w.w1;
  f.h1 = f.pre1.cwiseMax(0.0);
  const Eigen::MatrixXd hw = f.h1 * w.w2;
  f.out = a_hat * hw;
  return f;
}

// Gradients of a scalar w.r.t. W1 and W2 given its gradient w.r.t. the
// encoder output. out = A h1 W2 with A symmetric.
void backprop(const Eigen::SparseMatrix<double>& a_hat, const Forward& fwd, const EncoderWeights& w,
              const Eigen::MatrixXd& d_out, Eigen::MatrixXd& d_w1, Eigen::MatrixXd& d_w2) {
  const Eigen::MatrixXd s = a_hat * d_out;
  d_w2.noalias() = fwd.h1.transpose() * s;
  Eigen::MatrixXd d_pre1 = s * w.w2.transpose();
  d_pre1 = (fwd.pre1.array() > 0.0).select(d_pre1, 0.0);
  d_w1 = a_hat * d_pre1;
}

// Least-squares fit of the raw encoder output to target by Adam.
void fit_encoder_output(const Eigen::SparseMatrix<double>& a_hat, EncoderWeights& w, const Eigen::MatrixXd& target,
                        int steps, double learning_rate) {
  constexpr double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
  Eigen::MatrixXd m1 = Eigen::MatrixXd::Zero(w.w1.rows(), w.w1.cols()), v1 = m1;
  Eigen::MatrixXd m2 = Eigen::MatrixXd::Zero(w.w2.rows(), w.w2.cols()), v2 = m2;
  Eigen::MatrixXd g1, g2;
  for (int t = 1; t <= steps; ++t) {
    const Forward fwd = forward(a_hat, w);
    backprop(a_hat, fwd, w, fwd.out - target, g1, g2);
    const double c1 = 1.0 - std::pow(beta1, t), c2 = 1.0 - std::pow(beta2, t);
    m1 = beta1 * m1 + (1.0 - beta1) * g1;
    v1 = beta2 * v1 + (1.0 - beta2) * g1.cwiseAbs2();
    m2 = beta1 * m2 + (1.0 - beta1) * g2;
    v2 = beta2 * v2 + (1.0 - beta2) * g2.cwiseAbs2();
    w.w1.array() -= learning_rate * (m1.array() / c1) / ((v1.array() / c2).sqrt() + eps);
    w.w2.array() -= learning_rate * (m2.array() / c1) / ((v2.array() / c2).sqrt() + eps);
  }
}

EncoderOutput heads(const Eigen::MatrixXd& out) {
  EncoderOutput e;
  e.mu_r = out.col(0);
  e.sigma_r = out.col(1).array().min(kLogSigmaMax).max(kLogSigmaMin).exp();
  e.mu_theta = out.col(2);
  e.sigma_theta = out.col(3).array().min(kLogSigmaMax).max(kLogSigmaMin).exp();
  return e;
}

// d sigma / d log sigma, zero where the clamp is active.
Eigen::ArrayXd sigma_slope(const Eigen::VectorXd& log_sigma, const Eigen::VectorXd& sigma) {
  return (log_sigma.array() > kLogSigmaMin && log_sigma.array() < kLogSigmaMax).select(sigma.array(), 0.0);
}

void check_finite(double v, const char* term) {
  if (!std::isfinite(v)) throw NumericalError(std::string("elbo: non-finite ") + term + " term");
}

}  // namespace

EncoderWeights EncoderWeights::zeros(int n, int hidden) {
  return {Eigen::MatrixXd::Zero(n, hidden), Eigen::MatrixXd::Zero(hidden, 4)};
}

EncoderWeights EncoderWeights::glorot(int n, int hidden, Rng& rng) {
  if (n < 1 || hidden < 1) throw ConfigError("EncoderWeights: dimensions must be positive");
  const auto fill = [&rng](Eigen::Index rows, Eigen::Index cols) {
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    const double limit = std::sqrt(6.0 / static_cast<double>(rows + cols));
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index j = 0; j < cols; ++j) {
      for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = limit * unit(rng);
    }
    return m;
  };
  EncoderWeights w;
  w.w1 = fill(n, hidden);
  w.w2 = fill(hidden, 4);
  return w;
}

Eigen::SparseMatrix<double> normalized_adjacency(const Graph& g) {
  const int n = g.num_nodes();
  Eigen::VectorXd inv_sqrt(n);
  for (int i = 0; i < n; ++i) inv_sqrt(i) = 1.0 / std::sqrt(g.degree(i) + 1.0);
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(static_cast<std::size_t>(2 * g.num_edges() + n));
  for (int i = 0; i < n; ++i) triplets.emplace_back(i, i, inv_sqrt(i) * inv_sqrt(i));
  for (const Edge& e : g.edges()) {
    const double v = inv_sqrt(e.u) * inv_sqrt(e.v);
    triplets.emplace_back(e.u, e.v, v);
    triplets.emplace_back(e.v, e.u, v);
  }
  Eigen::SparseMatrix<double> a(n, n);
  a.setFromTriplets(triplets.begin(), triplets.end());
  return a;
}

EncoderOutput gcn_encode(const Eigen::SparseMatrix<double>& a_hat, const EncoderWeights& w) {
  return heads(forward(a_hat, w).out);
}

EncoderOutput gcn_encode(const Graph& g, const EncoderWeights& w) {
  return gcn_encode(normalized_adjacency(g), w);
}

PolarPoint decode_to_disk(double z_r, double z_theta, double R) {
  if (!(R > 0.0)) throw DomainError("decode_to_disk: R must be positive");
  const double r = std::min(detail::radial_map(z_r, R).r, R);
  return PolarPoint(r, z_theta);
}

double VariationalState::temperature() const {
  return fixed_T ? *fixed_T : kMaxTemperature * logistic(globals(2));
}

double VariationalState::tau() const { return model == LatentModel::Euclidean ? std::exp(globals(0)) : 0.0; }

ModelParams VariationalState::params() const {
  const double scale = std::exp(globals(0));
  return ModelParams{model == LatentModel::Euclidean ? scale * kSpreadRatio : scale, globals(1), temperature()};
}

int VariationalState::num_parameters() const {
  return static_cast<int>(encoder.w1.size() + encoder.w2.size()) + 3;
}

Eigen::VectorXd ElboGradient::flatten() const {
  Eigen::VectorXd v(w1.size() + w2.size() + 3);
  v << w1.reshaped(), w2.reshaped(), globals;
  return v;
}

double gaussian_kl(const Eigen::VectorXd& mu, const Eigen::VectorXd& sigma) {
  const Eigen::ArrayXd s2 = sigma.array().square();
  return 0.5 * (s2 + mu.array().square() - 1.0 - s2.log()).sum();
}

ElboEvaluator::ElboEvaluator(const Graph& g)
    : n_(g.num_nodes()),
      a_hat_(hcls::normalized_adjacency(g)),
      adjacency_(static_cast<std::size_t>(g.num_nodes()) * static_cast<std::size_t>(g.num_nodes()), 0) {
  if (n_ < 2) throw DomainError("ElboEvaluator: graph needs at least 2 nodes");
  for (const Edge& e : g.edges()) {
    adjacency_[static_cast<std::size_t>(e.u) * static_cast<std::size_t>(n_) + static_cast<std::size_t>(e.v)] = 1;
    adjacency_[static_cast<std::size_t>(e.v) * static_cast<std::size_t>(n_) + static_cast<std::size_t>(e.u)] = 1;
  }
}

ElboTerms ElboEvaluator::evaluate(const VariationalState& state, std::span<const Eigen::MatrixXd> noise,
                                  ElboGradient* grad) const {
  if (noise.empty()) throw ConfigError("elbo: need at least one Monte Carlo sample");
  const Forward fwd = forward(a_hat_, state.encoder);
  const EncoderOutput q = heads(fwd.out);
  const bool hyperbolic = state.model == LatentModel::Hyperbolic;
  const bool learn_T = !state.fixed_T.has_value();

  const double scale = std::exp(state.globals(0));  // R or tau
  const double alpha = state.globals(1);
  const double t = state.globals(2);
  const double T = state.temperature();
  const double dT_dt = learn_T ? T * logistic(-t) : 0.0;
  const double inv2T = 0.5 / T;

  ElboTerms terms;
  Eigen::ArrayXd dz_r = Eigen::ArrayXd::Zero(n_), dz_t = Eigen::ArrayXd::Zero(n_);
  Eigen::ArrayXd dsig_r = Eigen::ArrayXd::Zero(n_), dsig_t = Eigen::ArrayXd::Zero(n_);
  double d_scale = 0.0, d_alpha = 0.0, d_T = 0.0;  // d scale is w.r.t. R or tau itself

  Eigen::ArrayXd a(n_), b(n_), dr_ds(n_), dr_dR(n_);
  Eigen::ArrayXd gl_a(n_), gl_b(n_);
  detail::NodeCache cache;
  const double inv_mc = 1.0 / static_cast<double>(noise.size());
  for (const Eigen::MatrixXd& eps : noise) {
    if (eps.rows() != n_ || eps.cols() != 2) throw ConfigError("elbo: noise must be n x 2");
    const Eigen::ArrayXd z_r = q.mu_r.array() + q.sigma_r.array() * eps.col(0).array();
    const Eigen::ArrayXd z_t = q.mu_theta.array() + q.sigma_theta.array() * eps.col(1).array();
    if (hyperbolic) {
      for (int i = 0; i < n_; ++i) {
        const auto m = detail::radial_map(z_r(i), scale);
        a(i) = m.r;
        dr_ds(i) = m.dr_ds;
        dr_dR(i) = m.dr_dR;
      }
      b = z_t;
      cache.assign(a, b);
    } else {
      a = z_r;
      b = z_t;
    }
    gl_a.setZero();
    gl_b.setZero();
    double loglik = 0.0, g_scale = 0.0;
    for (int i = 0; i < n_; ++i) {
      const std::uint8_t* row = adjacency_.data() + static_cast<std::size_t>(i) * static_cast<std::size_t>(n_);
      for (int j = i + 1; j < n_; ++j) {
        double d, dd_ai, dd_aj, dd_bi, dd_bj, dd_scale = 0.0;
        if (hyperbolic) {
          const auto pg = detail::hyperbolic_pair(cache, i, j);
          d = pg.d;
          dd_ai = pg.d_ri;
          dd_aj = pg.d_rj;
          dd_bi = pg.d_thi;
          dd_bj = -pg.d_thi;
        } else {
          const double dx = a(i) - a(j), dy = b(i) - b(j);
          const double rho = std::hypot(dx, dy);
          const double k = scale / std::max(rho, kGradientFloor);
          d = scale * rho;
          dd_ai = k * dx;
          dd_aj = -dd_ai;
          dd_bi = k * dy;
          dd_bj = -dd_bi;
          dd_scale = rho;
        }
        const double eta = (alpha - d) * inv2T;
        const double e = std::exp(-std::abs(eta));
        const double p = eta >= 0.0 ? 1.0 / (1.0 + e) : e / (1.0 + e);
        const double y = row[j];
        loglik += y * eta - (std::max(eta, 0.0) + std::log1p(e));
        const double resid = y - p;
        const double dL_dd = -resid * inv2T;
        gl_a(i) += dL_dd * dd_ai;
        gl_a(j) += dL_dd * dd_aj;
        gl_b(i) += dL_dd * dd_bi;
        gl_b(j) += dL_dd * dd_bj;
        g_scale += dL_dd * dd_scale;
        d_alpha += resid * inv2T * inv_mc;
        d_T -= resid * eta / T * inv_mc;
      }
    }
    terms.log_likelihood += loglik * inv_mc;
    if (hyperbolic) {
      g_scale = (gl_a * dr_dR).sum();
      gl_a *= dr_ds;
    }
    d_scale += g_scale * inv_mc;
    dz_r += gl_a * inv_mc;
    dz_t += gl_b * inv_mc;
    dsig_r += gl_a * eps.col(0).array() * inv_mc;
    dsig_t += gl_b * eps.col(1).array() * inv_mc;
  }
  check_finite(terms.log_likelihood, "likelihood");

  terms.kl = gaussian_kl(q.mu_r, q.sigma_r) + gaussian_kl(q.mu_theta, q.sigma_theta);
  check_finite(terms.kl, "KL");

  // Priors on the globals, with the log-Jacobians of the unconstrained maps.
  double lp = 0.0, dlp_scale = 0.0, dlp_alpha = 0.0, dlp_T = 0.0;
  if (hyperbolic) {
    // R ~ Exponential(1), alpha | R ~ Normal(R, 0.1)
    const double z = (alpha - scale) / kAlphaPriorSd;
    lp += -scale - 0.5 * z * z;
    dlp_scale += -1.0 + z / kAlphaPriorSd;
    dlp_alpha += -z / kAlphaPriorSd;
  } else {
    // tau ~ Gamma(1, 1), alpha ~ Normal(0, 10)
    const double z = alpha / kEclsAlphaSd;
    lp += -scale - 0.5 * z * z;
    dlp_scale += -1.0;
    dlp_alpha += -z / kEclsAlphaSd;
  }
  lp += state.globals(0);  // log-Jacobian of exp
  if (learn_T) {
    lp += (kTemperatureShape - 1.0) * std::log(T) - kTemperatureRate * T + std::log(T) - softplus(t);
    dlp_T += (kTemperatureShape - 1.0) / T - kTemperatureRate;
  }
  terms.log_prior = lp;
  check_finite(terms.log_prior, "prior");
  terms.value = terms.log_likelihood - terms.kl + terms.log_prior;

  if (grad) {
    // Per-node gradients w.r.t. the four heads.
    Eigen::MatrixXd d_out(n_, 4);
    d_out.col(0) = (dz_r - q.mu_r.array()).matrix();
    d_out.col(1) = ((dsig_r - q.sigma_r.array() + q.sigma_r.array().inverse()) *
                    sigma_slope(fwd.out.col(1), q.sigma_r))
                       .matrix();
    d_out.col(2) = (dz_t - q.mu_theta.array()).matrix();
    d_out.col(3) = ((dsig_t - q.sigma_theta.array() + q.sigma_theta.array().inverse()) *
                    sigma_slope(fwd.out.col(3), q.sigma_theta))
                       .matrix();
    backprop(a_hat_, fwd, state.encoder, d_out, grad->w1, grad->w2);

    grad->globals(0) = (d_scale + dlp_scale) * scale + 1.0;
    grad->globals(1) = d_alpha + dlp_alpha;
    grad->globals(2) = learn_T ? (d_T + dlp_T) * dT_dt + 1.0 - 2.0 * logistic(t) : 0.0;
    if (!grad->w1.allFinite() || !grad->w2.allFinite() || !grad->globals.allFinite()) {
      throw NumericalError("elbo: non-finite gradient");
    }
  }
  return terms;
}

ElboTerms elbo(const Graph& g, const VariationalState& state, int n_mc, Rng& rng, ElboGradient* grad) {
  if (n_mc < 1) throw ConfigError("elbo: n_mc must be at least 1");
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<Eigen::MatrixXd> noise(static_cast<std::size_t>(n_mc), Eigen::MatrixXd(g.num_nodes(), 2));
  for (auto& eps : noise) {
    for (Eigen::Index k = 0; k < eps.size(); ++k) eps.data()[k] = normal(rng);
  }
  return ElboEvaluator(g).evaluate(state, noise, grad);
}

VariationalState initial_variational_state(const Graph& g, LatentModel model, const VariationalConfig& config) {
  if (config.hidden_dim < 1 || config.n_mc < 1 || config.epochs < 0 || !(config.learning_rate > 0.0)) {
    throw ConfigError("fit_vi: invalid configuration");
  }
  if (config.fixed_T && !(*config.fixed_T > 0.0 && *config.fixed_T <= kMaxTemperature)) {
    throw DomainError("fit_vi: fixed temperature must lie in (0, 0.5]");
  }
  if (g.num_nodes() < 2) throw DomainError("fit_vi: graph needs at least 2 nodes");
  Rng rng(derive_seed(config.seed, 0x5eed));
  VariationalState s;
  s.model = model;
  s.config = config;
  s.fixed_T = config.fixed_T;
  s.encoder = EncoderWeights::glorot(g.num_nodes(), config.hidden_dim, rng);
  const double T0 = config.fixed_T.value_or(kInitialTemperature);
  const double density = std::clamp(g.density(), 1e-4, 0.999);
  if (model == LatentModel::Hyperbolic) {
    const double R = density_matched_radius(density, T0, rng);
    s.globals << std::log(R), R, logit(T0 / kMaxTemperature);
  } else {
    // With z ~ N(0, I_2) and tau = 1, pair distances are Rayleigh with scale
    // sqrt(2), so P(d < alpha) = 1 - exp(-alpha^2 / 4).
    s.globals << 0.0, 2.0 * std::sqrt(-std::log1p(-density)), logit(T0 / kMaxTemperature);
  }
  if (config.warm_start_epochs > 0) {
    // Pull the variational means toward the spectral layout: angle from the
    // eigenmap, radial coordinate from degree rank.
    const detail::SpectralLayout layout = detail::spectral_layout(g);
    Eigen::MatrixXd target(g.num_nodes(), 4);
    target.col(1).setConstant(std::log(kWarmStartSigma));
    target.col(3).setConstant(std::log(kWarmStartSigma));
    for (int i = 0; i < g.num_nodes(); ++i) {
      const double u = layout.quantile(i);
      if (model == LatentModel::Hyperbolic) {
        target(i, 0) = logit(u);
        target(i, 2) = layout.angle(i);
      } else {
        const double rho = std::sqrt(-2.0 * std::log1p(-u));  // N(0, I_2) radial quantile
        target(i, 0) = rho * std::cos(layout.angle(i));
        target(i, 2) = rho * std::sin(layout.angle(i));
      }
    }
    fit_encoder_output(normalized_adjacency(g), s.encoder, target, config.warm_start_epochs, config.learning_rate);
  }
  s.adam_m = Eigen::VectorXd::Zero(s.num_parameters());
  s.adam_v = Eigen::VectorXd::Zero(s.num_parameters());
  return s;
}

void train(const Graph& g, VariationalState& state, int epochs) {
  const VariationalConfig& config = state.config;
  const ElboEvaluator evaluator(g);
  if (state.encoder.num_nodes() != g.num_nodes()) throw ConfigError("train: state does not match the graph");
  Rng rng(derive_seed(config.seed, static_cast<std::uint64_t>(state.step) + 1));
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<Eigen::MatrixXd> noise(static_cast<std::size_t>(config.n_mc), Eigen::MatrixXd(g.num_nodes(), 2));
  ElboGradient grad;
  constexpr double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;

  for (int epoch = 0; epoch < epochs; ++epoch) {
    for (auto& e : noise) {
      for (Eigen::Index k = 0; k < e.size(); ++k) e.data()[k] = normal(rng);
    }
    ElboTerms terms;
    bool failed = false;
    try {
      terms = evaluator.evaluate(state, noise, &grad);
    } catch (const NumericalError&) {
      failed = true;
    }
    if (failed || std::isnan(terms.value)) {
      std::ostringstream msg;
      msg << "fit_vi: ELBO became NaN at epoch " << state.step << "; last values:";
      const std::size_t k = state.elbo_trace.size();
      for (std::size_t i = k > 10 ? k - 10 : 0; i < k; ++i) msg << ' ' << state.elbo_trace[i];
      throw NumericalError(msg.str());
    }
    state.elbo_trace.push_back(terms.value);

    Eigen::VectorXd flat = grad.flatten();
    const double norm = flat.norm();
    if (norm > config.clip_norm) flat *= config.clip_norm / norm;

    ++state.step;
    state.adam_m = beta1 * state.adam_m + (1.0 - beta1) * flat;
    state.adam_v = beta2 * state.adam_v + (1.0 - beta2) * flat.cwiseAbs2();
    const double c1 = 1.0 - std::pow(beta1, state.step);
    const double c2 = 1.0 - std::pow(beta2, state.step);
    const Eigen::VectorXd update =
        config.learning_rate * (state.adam_m.array() / c1) / ((state.adam_v.array() / c2).sqrt() + eps);

    const Eigen::Index n1 = state.encoder.w1.size(), n2 = state.encoder.w2.size();
    state.encoder.w1.reshaped() += update.segment(0, n1);
    state.encoder.w2.reshaped() += update.segment(n1, n2);
    state.globals += update.segment(n1 + n2, 3);
  }
}

VariationalState fit_vi(const Graph& g, LatentModel model, const VariationalConfig& config) {
  VariationalState state = initial_variational_state(g, model, config);
  train(g, state, config.epochs);
  return state;
}

VariationalState fit_vi(const Graph& g, const VariationalConfig& config) {
  return fit_vi(g, LatentModel::Hyperbolic, config);
}

VariationalState fit_vi_euclidean(const Graph& g, const VariationalConfig& config) {
  return fit_vi(g, LatentModel::Euclidean, config);
}

LatentConfiguration decoded_configuration(const Graph& g, const VariationalState& state) {
  const EncoderOutput q = gcn_encode(g, state.encoder);
  LatentConfiguration c;
  c.params = state.params();
  if (state.model == LatentModel::Hyperbolic) {
    std::vector<PolarPoint> pts;
    pts.reserve(static_cast<std::size_t>(g.num_nodes()));
    for (int i = 0; i < g.num_nodes(); ++i) pts.push_back(decode_to_disk(q.mu_r(i), q.mu_theta(i), c.params.R));
    c.positions = std::move(pts);
  } else {
    const double tau = state.tau();
    std::vector<EuclideanPoint> pts;
    pts.reserve(static_cast<std::size_t>(g.num_nodes()));
    for (int i = 0; i < g.num_nodes(); ++i) pts.push_back({tau * q.mu_r(i), tau * q.mu_theta(i)});
    c.positions = std::move(pts);
    c.tau = tau;
  }
  return c;
}

Eigen::MatrixXd reconstruct_probabilities(const Graph& g, const VariationalState& state) {
  const LatentConfiguration c = decoded_configuration(g, state);
  const Eigen::MatrixXd d = c.distance_matrix();
  Eigen::MatrixXd p(d.rows(), d.cols());
  for (Eigen::Index j = 0; j < d.cols(); ++j) {
    for (Eigen::Index i = 0; i < d.rows(); ++i) p(i, j) = i == j ? 0.0 : link_probability(d(i, j), c.params);
  }
  return p;
}

}  // namespace hcls
