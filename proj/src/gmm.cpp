#include "aggwind/gmm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "json.hpp"

#include "aggwind/errors.hpp"
#include "aggwind/text.hpp"

namespace aggwind {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kStarvedFraction = 1e-8;
constexpr double kAbsoluteFloor = 1e-12;

bool is_spd(const Eigen::MatrixXd& m) {
  if (m.rows() != m.cols()) return false;
  if (!m.allFinite()) return false;
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-9 * std::max(1.0, m.cwiseAbs().maxCoeff())) return false;
  Eigen::LLT<Eigen::MatrixXd> llt(m);
  return llt.info() == Eigen::Success;
}

double log_sum_exp(const double* values, int count) {
  double hi = kNegInf;
  for (int k = 0; k < count; ++k) hi = std::max(hi, values[k]);
  if (hi == kNegInf) return kNegInf;
  double acc = 0.0;
  for (int k = 0; k < count; ++k) acc += std::exp(values[k] - hi);
  return hi + std::log(acc);
}

}  // namespace

// ---------------------------------------------------------------------------
// GmmParams

void GmmParams::validate() const {
  const int m = order();
  if (m < 1) throw InvalidArgument("mixture order must be at least 1");
  if (static_cast<int>(means.size()) != m || static_cast<int>(covariances.size()) != m) {
    throw InvalidArgument("mixture arrays disagree on the order");
  }
  const int d = dim();
  if (d < 1) throw InvalidArgument("mixture dimension must be at least 1");
  double total = 0.0;
  for (int j = 0; j < m; ++j) {
    if (!(weights[j] >= 0.0) || !std::isfinite(weights[j])) throw InvalidArgument("negative or non-finite weight");
    total += weights[j];
    if (means[j].size() != d || !means[j].allFinite()) throw InvalidArgument("bad mean for component " + std::to_string(j));
    if (covariances[j].rows() != d || !is_spd(covariances[j])) {
      throw InvalidArgument("covariance of component " + std::to_string(j) + " is not symmetric positive definite");
    }
  }
  if (std::abs(total - 1.0) > 1e-9) throw InvalidArgument("weights must sum to 1");
}

double max_param_difference(const GmmParams& a, const GmmParams& b) {
  if (a.order() != b.order() || a.dim() != b.dim()) throw InvalidArgument("mixtures differ in shape");
  std::vector<bool> used(static_cast<std::size_t>(b.order()), false);
  double worst = 0.0;
  for (int i = 0; i < a.order(); ++i) {
    int best = -1;
    double best_dist = std::numeric_limits<double>::infinity();
    for (int j = 0; j < b.order(); ++j) {
      if (used[static_cast<std::size_t>(j)]) continue;
      const double dist = (a.means[i] - b.means[j]).squaredNorm();
      if (dist < best_dist) {
        best_dist = dist;
        best = j;
      }
    }
    used[static_cast<std::size_t>(best)] = true;
    worst = std::max(worst, std::abs(a.weights[i] - b.weights[best]));
    worst = std::max(worst, (a.means[i] - b.means[best]).cwiseAbs().maxCoeff());
    worst = std::max(worst, (a.covariances[i] - b.covariances[best]).cwiseAbs().maxCoeff());
  }
  return worst;
}

// ---------------------------------------------------------------------------
// MixtureEvaluator

MixtureEvaluator::MixtureEvaluator(const GmmParams& params) : order_(params.order()), dim_(params.dim()) {
  if (dim_ < 1 || dim_ > kMaxDim) throw InvalidArgument("unsupported mixture dimension");
  const auto d = static_cast<std::size_t>(dim_);
  log_coef_.resize(static_cast<std::size_t>(order_));
  means_.resize(static_cast<std::size_t>(order_) * d);
  inv_chol_.assign(static_cast<std::size_t>(order_) * d * d, 0.0);
  const double log_two_pi = std::log(2.0 * std::numbers::pi);
  for (int j = 0; j < order_; ++j) {
    const auto ju = static_cast<std::size_t>(j);
    Eigen::LLT<Eigen::MatrixXd> llt(params.covariances[ju]);
    if (llt.info() != Eigen::Success) {
      throw NumericError("covariance of component " + std::to_string(j) + " is not positive definite");
    }
    const Eigen::MatrixXd lower = llt.matrixL();
    const Eigen::MatrixXd inv = lower.triangularView<Eigen::Lower>().solve(
        Eigen::MatrixXd::Identity(dim_, dim_));
    double log_det_half = 0.0;
    for (int r = 0; r < dim_; ++r) log_det_half += std::log(lower(r, r));
    const double w = params.weights[ju];
    log_coef_[ju] = (w > 0.0 ? std::log(w) : kNegInf) - 0.5 * dim_ * log_two_pi - log_det_half;
    for (int r = 0; r < dim_; ++r) {
      means_[ju * d + static_cast<std::size_t>(r)] = params.means[ju](r);
      for (int c = 0; c <= r; ++c) {
        inv_chol_[(ju * d + static_cast<std::size_t>(r)) * d + static_cast<std::size_t>(c)] = inv(r, c);
      }
    }
  }
}

double MixtureEvaluator::log_joint(int component, const double* x) const {
  const auto ju = static_cast<std::size_t>(component);
  if (log_coef_[ju] == kNegInf) return kNegInf;
  const auto d = static_cast<std::size_t>(dim_);
  double diff[kMaxDim];
  for (std::size_t r = 0; r < d; ++r) diff[r] = x[r] - means_[ju * d + r];
  double quad = 0.0;
  const double* lrow = &inv_chol_[ju * d * d];
  for (std::size_t r = 0; r < d; ++r) {
    double z = 0.0;
    for (std::size_t c = 0; c <= r; ++c) z += lrow[r * d + c] * diff[c];
    quad += z * z;
  }
  return log_coef_[ju] - 0.5 * quad;
}

double MixtureEvaluator::log_pdf(const double* x) const {
  std::vector<double> terms(static_cast<std::size_t>(order_));
  for (int j = 0; j < order_; ++j) terms[static_cast<std::size_t>(j)] = log_joint(j, x);
  return log_sum_exp(terms.data(), order_);
}

double MixtureEvaluator::responsibilities(const double* x, double* resp) const {
  for (int j = 0; j < order_; ++j) resp[j] = log_joint(j, x);
  const double total = log_sum_exp(resp, order_);
  if (!std::isfinite(total)) {
    for (int j = 0; j < order_; ++j) resp[j] = 0.0;
    return total;
  }
  for (int j = 0; j < order_; ++j) resp[j] = std::exp(resp[j] - total);
  return total;
}

double gmm_log_pdf(const GmmParams& params, const Eigen::VectorXd& point) {
  if (point.size() != params.dim()) throw InvalidArgument("point dimension mismatch");
  return MixtureEvaluator(params).log_pdf(point.data());
}

double gmm_pdf(const GmmParams& params, const Eigen::VectorXd& point) {
  return std::exp(gmm_log_pdf(params, point));
}

// ---------------------------------------------------------------------------
// SufficientStats

SufficientStats SufficientStats::zero(int order, int dim) {
  SufficientStats s;
  s.mass.assign(static_cast<std::size_t>(order), 0.0);
  s.sum.assign(static_cast<std::size_t>(order), Eigen::VectorXd::Zero(dim));
  s.scatter.assign(static_cast<std::size_t>(order), Eigen::MatrixXd::Zero(dim, dim));
  return s;
}

Eigen::Index SufficientStats::flat_size(int order, int dim) {
  return 1 + static_cast<Eigen::Index>(order) * (1 + dim + dim * dim);
}

Eigen::VectorXd SufficientStats::flatten() const {
  const int m = order();
  const int d = dim();
  Eigen::VectorXd flat(flat_size(m, d));
  Eigen::Index k = 0;
  flat(k++) = count;
  for (int j = 0; j < m; ++j) {
    const auto ju = static_cast<std::size_t>(j);
    flat(k++) = mass[ju];
    for (int r = 0; r < d; ++r) flat(k++) = sum[ju](r);
    for (int r = 0; r < d; ++r) {
      for (int c = 0; c < d; ++c) flat(k++) = scatter[ju](r, c);
    }
  }
  return flat;
}

SufficientStats SufficientStats::unflatten(const Eigen::VectorXd& flat, int order, int dim) {
  if (flat.size() != flat_size(order, dim)) throw InvalidArgument("flattened statistics have the wrong length");
  SufficientStats s = zero(order, dim);
  Eigen::Index k = 0;
  s.count = flat(k++);
  for (int j = 0; j < order; ++j) {
    const auto ju = static_cast<std::size_t>(j);
    s.mass[ju] = flat(k++);
    for (int r = 0; r < dim; ++r) s.sum[ju](r) = flat(k++);
    for (int r = 0; r < dim; ++r) {
      for (int c = 0; c < dim; ++c) s.scatter[ju](r, c) = flat(k++);
    }
  }
  return s;
}

SufficientStats& SufficientStats::operator+=(const SufficientStats& other) {
  if (other.order() != order() || other.dim() != dim()) throw InvalidArgument("statistics shapes differ");
  count += other.count;
  for (std::size_t j = 0; j < mass.size(); ++j) {
    mass[j] += other.mass[j];
    sum[j] += other.sum[j];
    scatter[j] += other.scatter[j];
  }
  return *this;
}

SufficientStats SufficientStats::scaled(double factor) const {
  SufficientStats s = *this;
  s.count *= factor;
  for (std::size_t j = 0; j < s.mass.size(); ++j) {
    s.mass[j] *= factor;
    s.sum[j] *= factor;
    s.scatter[j] *= factor;
  }
  return s;
}

EStepResult expectation_step(const GmmParams& params, const Samples& data) {
  const int m = params.order();
  const int d = params.dim();
  if (data.rows() != d) throw InvalidArgument("data dimension does not match the mixture");
  const MixtureEvaluator eval(params);
  EStepResult out;
  out.stats = SufficientStats::zero(m, d);
  out.stats.count = static_cast<double>(data.cols());
  std::vector<double> resp(static_cast<std::size_t>(m));
  for (Eigen::Index i = 0; i < data.cols(); ++i) {
    const double* x = data.col(i).data();
    out.log_likelihood += eval.responsibilities(x, resp.data());
    for (int j = 0; j < m; ++j) {
      const double r = resp[static_cast<std::size_t>(j)];
      if (r == 0.0) continue;
      const auto ju = static_cast<std::size_t>(j);
      out.stats.mass[ju] += r;
      for (int a = 0; a < d; ++a) {
        out.stats.sum[ju](a) += r * x[a];
        for (int b = 0; b < d; ++b) out.stats.scatter[ju](a, b) += r * x[a] * x[b];
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Prior

MapPrior MapPrior::defaults_for(const Samples& data) {
  if (data.cols() == 0) throw InvalidArgument("prior needs data");
  MapPrior p;
  const auto d = static_cast<double>(data.rows());
  p.alpha = 1.01;
  p.kappa0 = 0.01;
  p.m0 = sample_mean(data);
  p.nu0 = d + 2.0;
  p.psi0 = 0.1 * sample_covariance(data);
  if (!is_spd(p.psi0)) p.psi0 = floor_covariance(p.psi0, kAbsoluteFloor);
  return p;
}

MapPrior MapPrior::weak(int dim) {
  MapPrior p;
  p.alpha = 1.0 + 1e-6;
  p.kappa0 = 1e-6;
  p.m0 = Eigen::VectorXd::Zero(dim);
  p.nu0 = dim + 2.0;
  p.psi0 = 1e-6 * Eigen::MatrixXd::Identity(dim, dim);
  return p;
}

void MapPrior::validate(int dim) const {
  if (!(alpha > 1.0)) throw InvalidArgument("Dirichlet alpha must exceed 1");
  if (!(kappa0 > 0.0)) throw InvalidArgument("kappa0 must be positive");
  if (m0.size() != dim || !m0.allFinite()) throw InvalidArgument("prior mean has the wrong dimension");
  if (!(nu0 > dim - 1)) throw InvalidArgument("nu0 must exceed dim - 1");
  if (psi0.rows() != dim || !is_spd(psi0)) throw InvalidArgument("psi0 must be symmetric positive definite");
}

double MapPrior::log_density(const GmmParams& params) const {
  const int d = params.dim();
  double total = 0.0;
  for (int j = 0; j < params.order(); ++j) {
    const auto ju = static_cast<std::size_t>(j);
    total += (alpha - 1.0) * std::log(params.weights[ju]);
    Eigen::LLT<Eigen::MatrixXd> llt(params.covariances[ju]);
    const Eigen::MatrixXd lower = llt.matrixL();
    double log_det = 0.0;
    for (int r = 0; r < d; ++r) log_det += 2.0 * std::log(lower(r, r));
    const Eigen::MatrixXd inv = llt.solve(Eigen::MatrixXd::Identity(d, d));
    const Eigen::VectorXd diff = params.means[ju] - m0;
    total += -0.5 * (nu0 + d + 2.0) * log_det - 0.5 * (psi0 * inv).trace() -
             0.5 * kappa0 * diff.dot(inv * diff);
  }
  return total;
}

// ---------------------------------------------------------------------------
// Moments and updates

Eigen::VectorXd sample_mean(const Samples& data) {
  if (data.cols() == 0) throw InvalidArgument("mean of empty sample");
  return data.rowwise().mean();
}

Eigen::MatrixXd sample_covariance(const Samples& data) {
  const Eigen::VectorXd mu = sample_mean(data);
  const Eigen::MatrixXd centered = data.colwise() - mu;
  return centered * centered.transpose() / static_cast<double>(data.cols());
}

double default_cov_floor(const Samples& data) {
  const double tr = sample_covariance(data).trace();
  const double floor = 1e-6 * tr / static_cast<double>(data.rows());
  return floor > 0.0 ? floor : 1e-6;
}

Eigen::MatrixXd floor_covariance(const Eigen::MatrixXd& cov, double floor) {
  const Eigen::MatrixXd sym = 0.5 * (cov + cov.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sym);
  const Eigen::VectorXd values = eig.eigenvalues();
  if (values.minCoeff() >= floor) return sym;
  const Eigen::VectorXd clamped = values.cwiseMax(floor);
  return eig.eigenvectors() * clamped.asDiagonal() * eig.eigenvectors().transpose();
}

GmmParams initialize_params(const Samples& sample, int order, std::uint64_t seed) {
  const Eigen::Index n = sample.cols();
  if (order < 1) throw InvalidArgument("mixture order must be at least 1");
  if (n < order) throw InvalidArgument("need at least as many points as mixture components");
  std::mt19937_64 rng(seed);
  std::vector<Eigen::Index> centers;
  std::uniform_int_distribution<Eigen::Index> pick(0, n - 1);
  centers.push_back(pick(rng));
  std::vector<double> d2(static_cast<std::size_t>(n), std::numeric_limits<double>::infinity());
  while (static_cast<int>(centers.size()) < order) {
    const Eigen::Index last = centers.back();
    double total = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const auto iu = static_cast<std::size_t>(i);
      d2[iu] = std::min(d2[iu], (sample.col(i) - sample.col(last)).squaredNorm());
      total += d2[iu];
    }
    Eigen::Index chosen = 0;
    if (total > 0.0) {
      std::uniform_real_distribution<double> u(0.0, total);
      const double target = u(rng);
      double acc = 0.0;
      chosen = n - 1;
      for (Eigen::Index i = 0; i < n; ++i) {
        acc += d2[static_cast<std::size_t>(i)];
        if (acc > target && d2[static_cast<std::size_t>(i)] > 0.0) {
          chosen = i;
          break;
        }
      }
    } else {
      chosen = pick(rng);
    }
    centers.push_back(chosen);
  }
  const double floor = default_cov_floor(sample);
  const Eigen::MatrixXd cov = floor_covariance(sample_covariance(sample), floor);
  GmmParams p;
  for (const Eigen::Index c : centers) {
    p.weights.push_back(1.0 / order);
    p.means.emplace_back(sample.col(c));
    p.covariances.push_back(cov);
  }
  return p;
}

GmmParams ml_update(const SufficientStats& stats, double cov_floor) {
  const int m = stats.order();
  const int d = stats.dim();
  double total_mass = 0.0;
  for (const double n : stats.mass) total_mass += n;
  GmmParams p;
  for (int j = 0; j < m; ++j) {
    const auto ju = static_cast<std::size_t>(j);
    const double n = stats.mass[ju];
    p.weights.push_back(total_mass > 0.0 ? n / total_mass : 1.0 / m);
    if (n > 0.0) {
      const Eigen::VectorXd mean = stats.sum[ju] / n;
      const Eigen::MatrixXd cov = (stats.scatter[ju] - stats.sum[ju] * stats.sum[ju].transpose() / n) / n;
      p.means.push_back(mean);
      p.covariances.push_back(floor_covariance(cov, cov_floor));
    } else {
      p.means.push_back(Eigen::VectorXd::Zero(d));
      p.covariances.push_back(cov_floor * Eigen::MatrixXd::Identity(d, d));
    }
  }
  return p;
}

GmmParams map_update(const SufficientStats& stats, const MapPrior& prior, double cov_floor) {
  const int m = stats.order();
  const int d = stats.dim();
  double total_mass = 0.0;
  for (const double n : stats.mass) total_mass += n;
  const double weight_denominator = total_mass + m * (prior.alpha - 1.0);
  GmmParams p;
  for (int j = 0; j < m; ++j) {
    const auto ju = static_cast<std::size_t>(j);
    const double n = stats.mass[ju];
    p.weights.push_back((n + prior.alpha - 1.0) / weight_denominator);
    p.means.push_back((prior.kappa0 * prior.m0 + stats.sum[ju]) / (prior.kappa0 + n));
    Eigen::MatrixXd spread = prior.psi0;
    if (n > 0.0) {
      const Eigen::VectorXd xbar = stats.sum[ju] / n;
      const Eigen::VectorXd shift = xbar - prior.m0;
      spread += stats.scatter[ju] - n * xbar * xbar.transpose() +
                (prior.kappa0 * n / (prior.kappa0 + n)) * shift * shift.transpose();
    }
    p.covariances.push_back(floor_covariance(spread / (prior.nu0 + n + d + 2.0), cov_floor));
  }
  return p;
}

std::vector<int> starved_components(const SufficientStats& stats) {
  double total = 0.0;
  for (const double n : stats.mass) total += n;
  std::vector<int> out;
  if (!(total > 0.0)) return out;
  for (int j = 0; j < stats.order(); ++j) {
    if (stats.mass[static_cast<std::size_t>(j)] < kStarvedFraction * total) out.push_back(j);
  }
  return out;
}

void reseed_components(GmmParams& params, const std::vector<int>& starved, const Samples& pool,
                       const GmmParams& model, double cov_floor) {
  if (starved.empty()) return;
  if (pool.cols() == 0) throw InvalidArgument("empty reseed pool");
  const MixtureEvaluator eval(model);
  Eigen::Index lowest = 0;
  double lowest_value = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < pool.cols(); ++i) {
    const double v = eval.log_pdf(pool.col(i).data());
    if (v < lowest_value) {
      lowest_value = v;
      lowest = i;
    }
  }
  const Eigen::MatrixXd cov = floor_covariance(sample_covariance(pool), cov_floor);
  const int m = params.order();
  for (const int j : starved) {
    const auto ju = static_cast<std::size_t>(j);
    params.means[ju] = pool.col(lowest);
    params.covariances[ju] = cov;
    params.weights[ju] = 1.0 / m;
  }
  double total = 0.0;
  for (const double w : params.weights) total += w;
  for (double& w : params.weights) w /= total;
}

namespace {

FitResult run_em(const Samples& data, GmmParams params, const MapPrior* prior, const FitConfig& config) {
  if (data.cols() < params.order()) throw InvalidArgument("need at least as many points as mixture components");
  if (data.rows() != params.dim()) throw InvalidArgument("data dimension does not match the mixture");
  if (config.max_iters < 0) throw InvalidArgument("max_iters must be nonnegative");
  if (prior) prior->validate(params.dim());
  FitResult result;
  result.degenerate = !(sample_covariance(data).trace() > 0.0);
  const double floor = config.cov_floor > 0.0 ? config.cov_floor : default_cov_floor(data);
  const Samples& pool = config.reseed_pool ? *config.reseed_pool : data;
  for (auto& cov : params.covariances) cov = floor_covariance(cov, floor);

  for (int it = 0;; ++it) {
    EStepResult e = expectation_step(params, data);
    if (!std::isfinite(e.log_likelihood)) throw NumericError("log-likelihood is not finite");
    const double objective = e.log_likelihood + (prior ? prior->log_density(params) : 0.0);
    result.trace.push_back(objective);
    result.iterations = it;
    if (it == config.max_iters) break;
    if (it > 0 && std::abs(result.trace[static_cast<std::size_t>(it)] -
                           result.trace[static_cast<std::size_t>(it - 1)]) < config.tol) {
      break;
    }
    GmmParams next = prior ? map_update(e.stats, *prior, floor) : ml_update(e.stats, floor);
    reseed_components(next, starved_components(e.stats), pool, params, floor);
    params = std::move(next);
  }
  result.params = std::move(params);
  return result;
}

}  // namespace

FitResult em_fit(const Samples& data, int order, std::uint64_t seed, const FitConfig& config) {
  return run_em(data, initialize_params(data, order, seed), nullptr, config);
}

FitResult em_fit(const Samples& data, const GmmParams& init, const FitConfig& config) {
  return run_em(data, init, nullptr, config);
}

FitResult map_fit(const Samples& data, int order, const MapPrior& prior, std::uint64_t seed,
                  const FitConfig& config) {
  return run_em(data, initialize_params(data, order, seed), &prior, config);
}

FitResult map_fit(const Samples& data, const GmmParams& init, const MapPrior& prior, const FitConfig& config) {
  return run_em(data, init, &prior, config);
}

int num_free_params(int order, int dim) {
  if (order < 1 || dim < 1) throw InvalidArgument("order and dim must be positive");
  return (order - 1) + order * dim + order * dim * (dim + 1) / 2;
}

double log_likelihood(const GmmParams& params, const Samples& data) {
  if (data.rows() != params.dim()) throw InvalidArgument("data dimension does not match the mixture");
  const MixtureEvaluator eval(params);
  double total = 0.0;
  for (Eigen::Index i = 0; i < data.cols(); ++i) total += eval.log_pdf(data.col(i).data());
  return total;
}

double aic(const GmmParams& params, const Samples& data) {
  if (data.cols() == 0) throw InvalidArgument("AIC needs data");
  if (data.rows() != params.dim()) throw InvalidArgument("data dimension does not match the mixture");
  const MixtureEvaluator eval(params);
  double total = 0.0;
  for (Eigen::Index i = 0; i < data.cols(); ++i) {
    const double lp = eval.log_pdf(data.col(i).data());
    if (!std::isfinite(lp)) {
      std::string coords;
      for (Eigen::Index r = 0; r < data.rows(); ++r) {
        coords += (r ? "," : "") + text::format_double(data(r, i), 6);
      }
      throw NumericError("zero density (log underflow) at point " + std::to_string(i) + " (" + coords + ")");
    }
    total += lp;
  }
  return 2.0 * num_free_params(params.order(), params.dim()) - 2.0 * total;
}

// ---------------------------------------------------------------------------
// Grids

namespace {

void check_edges(const std::vector<double>& edges) {
  if (edges.size() < 2) throw InvalidArgument("a grid axis needs at least two edges");
  for (std::size_t k = 0; k + 1 < edges.size(); ++k) {
    if (!(edges[k + 1] > edges[k]) || !std::isfinite(edges[k])) {
      throw InvalidArgument("grid edges must be finite and strictly increasing");
    }
  }
}

// Bin index of v in [edges.front(), edges.back()], last bin closed; -1 outside.
long bin_of(const std::vector<double>& edges, double v) {
  if (!(v >= edges.front()) || !(v <= edges.back())) return -1;
  const auto it = std::upper_bound(edges.begin(), edges.end(), v);
  long k = static_cast<long>(it - edges.begin()) - 1;
  return std::min(k, static_cast<long>(edges.size()) - 2);
}

double center(const std::vector<double>& edges, std::size_t k) { return 0.5 * (edges[k] + edges[k + 1]); }

}  // namespace

double DensityGrid::cell_area(Eigen::Index i, Eigen::Index j) const {
  const auto iu = static_cast<std::size_t>(i);
  const auto ju = static_cast<std::size_t>(j);
  return (x_edges[iu + 1] - x_edges[iu]) * (y_edges[ju + 1] - y_edges[ju]);
}

double DensityGrid::mass() const {
  double total = 0.0;
  for (Eigen::Index i = 0; i < values.rows(); ++i) {
    for (Eigen::Index j = 0; j < values.cols(); ++j) total += values(i, j) * cell_area(i, j);
  }
  return total;
}

std::vector<double> uniform_edges(double lo, double hi, int cells) {
  if (cells < 1 || !(hi > lo)) throw InvalidArgument("bad axis range");
  std::vector<double> edges(static_cast<std::size_t>(cells) + 1);
  for (int k = 0; k <= cells; ++k) edges[static_cast<std::size_t>(k)] = lo + (hi - lo) * k / cells;
  return edges;
}

GridSpec GridSpec::covering(const Samples& data, int cells, double margin) {
  if (data.rows() != 2 || data.cols() == 0) throw InvalidArgument("grid needs 2-D data");
  GridSpec g;
  for (int axis = 0; axis < 2; ++axis) {
    double lo = data.row(axis).minCoeff();
    double hi = data.row(axis).maxCoeff();
    double range = hi - lo;
    if (!(range > 0.0)) range = 1.0;
    auto edges = uniform_edges(lo - margin * range, hi + margin * range, cells);
    (axis == 0 ? g.x_edges : g.y_edges) = std::move(edges);
  }
  return g;
}

DensityGrid density_grid(const GmmParams& params, const std::vector<double>& x_edges,
                         const std::vector<double>& y_edges) {
  check_edges(x_edges);
  check_edges(y_edges);
  if (params.dim() != 2) throw InvalidArgument("density grids need a 2-D mixture");
  const MixtureEvaluator eval(params);
  DensityGrid g{x_edges, y_edges, Eigen::MatrixXd(x_edges.size() - 1, y_edges.size() - 1)};
  for (std::size_t i = 0; i + 1 < x_edges.size(); ++i) {
    for (std::size_t j = 0; j + 1 < y_edges.size(); ++j) {
      const double x[2] = {center(x_edges, i), center(y_edges, j)};
      g.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = std::exp(eval.log_pdf(x));
    }
  }
  return g;
}

DensityGrid empirical_density(const Samples& data, const std::vector<double>& x_edges,
                              const std::vector<double>& y_edges) {
  check_edges(x_edges);
  check_edges(y_edges);
  if (data.rows() != 2) throw InvalidArgument("empirical density needs 2-D data");
  DensityGrid g{x_edges, y_edges, Eigen::MatrixXd::Zero(x_edges.size() - 1, y_edges.size() - 1)};
  long inside = 0;
  for (Eigen::Index k = 0; k < data.cols(); ++k) {
    const long i = bin_of(x_edges, data(0, k));
    const long j = bin_of(y_edges, data(1, k));
    if (i < 0 || j < 0) continue;
    g.values(i, j) += 1.0;
    ++inside;
  }
  if (inside == 0) throw EmptyHistogram("no samples fall inside the grid");
  const auto total = static_cast<double>(data.cols());
  for (Eigen::Index i = 0; i < g.values.rows(); ++i) {
    for (Eigen::Index j = 0; j < g.values.cols(); ++j) g.values(i, j) /= total * g.cell_area(i, j);
  }
  return g;
}

double rmse_between_grids(const DensityGrid& a, const DensityGrid& b) {
  if (a.x_edges != b.x_edges || a.y_edges != b.y_edges || a.values.rows() != b.values.rows() ||
      a.values.cols() != b.values.cols()) {
    throw InvalidArgument("density grids have different geometry");
  }
  if (a.values.size() == 0) throw InvalidArgument("empty density grid");
  return std::sqrt((a.values - b.values).array().square().mean());
}

std::string grid_to_csv(const DensityGrid& grid) {
  std::string out = "x,y,value\n";
  for (std::size_t i = 0; i + 1 < grid.x_edges.size(); ++i) {
    for (std::size_t j = 0; j + 1 < grid.y_edges.size(); ++j) {
      out += text::format_double(center(grid.x_edges, i)) + "," + text::format_double(center(grid.y_edges, j)) +
             "," + text::format_double(grid.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j))) +
             "\n";
    }
  }
  return out;
}

double DensityCurve::mass() const {
  double total = 0.0;
  for (std::size_t k = 0; k < values.size(); ++k) total += values[k] * (edges[k + 1] - edges[k]);
  return total;
}

GmmParams marginal(const GmmParams& params, int axis) {
  if (axis < 0 || axis >= params.dim()) throw InvalidArgument("axis out of range");
  GmmParams out;
  out.weights = params.weights;
  for (int j = 0; j < params.order(); ++j) {
    const auto ju = static_cast<std::size_t>(j);
    out.means.push_back(Eigen::VectorXd::Constant(1, params.means[ju](axis)));
    out.covariances.push_back(Eigen::MatrixXd::Constant(1, 1, params.covariances[ju](axis, axis)));
  }
  return out;
}

DensityCurve density_curve(const GmmParams& params1d, const std::vector<double>& edges) {
  check_edges(edges);
  if (params1d.dim() != 1) throw InvalidArgument("density curves need a 1-D mixture");
  const MixtureEvaluator eval(params1d);
  DensityCurve c{edges, std::vector<double>(edges.size() - 1)};
  for (std::size_t k = 0; k + 1 < edges.size(); ++k) {
    const double x = center(edges, k);
    c.values[k] = std::exp(eval.log_pdf(&x));
  }
  return c;
}

DensityCurve empirical_curve(const Samples& data, int axis, const std::vector<double>& edges) {
  check_edges(edges);
  if (axis < 0 || axis >= data.rows()) throw InvalidArgument("axis out of range");
  DensityCurve c{edges, std::vector<double>(edges.size() - 1, 0.0)};
  long inside = 0;
  for (Eigen::Index k = 0; k < data.cols(); ++k) {
    const long b = bin_of(edges, data(axis, k));
    if (b < 0) continue;
    c.values[static_cast<std::size_t>(b)] += 1.0;
    ++inside;
  }
  if (inside == 0) throw EmptyHistogram("no samples fall inside the axis range");
  const auto total = static_cast<double>(data.cols());
  for (std::size_t k = 0; k < c.values.size(); ++k) c.values[k] /= total * (edges[k + 1] - edges[k]);
  return c;
}

double rmse_between_curves(const DensityCurve& a, const DensityCurve& b) {
  if (a.edges != b.edges || a.values.size() != b.values.size()) {
    throw InvalidArgument("density curves have different geometry");
  }
  if (a.values.empty()) throw InvalidArgument("empty density curve");
  double acc = 0.0;
  for (std::size_t k = 0; k < a.values.size(); ++k) acc += (a.values[k] - b.values[k]) * (a.values[k] - b.values[k]);
  return std::sqrt(acc / static_cast<double>(a.values.size()));
}

// ---------------------------------------------------------------------------
// JSON

std::string params_to_json(const GmmParams& params) {
  nlohmann::ordered_json j;
  const int d = params.dim();
  j["order"] = params.order();
  j["dim"] = d;
  j["weights"] = params.weights;
  auto means = nlohmann::json::array();
  auto covs = nlohmann::json::array();
  for (int c = 0; c < params.order(); ++c) {
    const auto cu = static_cast<std::size_t>(c);
    std::vector<double> mean(params.means[cu].data(), params.means[cu].data() + d);
    means.push_back(mean);
    std::vector<double> cov;
    for (int r = 0; r < d; ++r) {
      for (int k = 0; k < d; ++k) cov.push_back(params.covariances[cu](r, k));
    }
    covs.push_back(cov);
  }
  j["means"] = means;
  j["covariances"] = covs;
  return j.dump(2) + "\n";
}

GmmParams params_from_json(const std::string& json_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument(std::string("bad mixture JSON: ") + e.what());
  }
  try {
    const int order = j.at("order").get<int>();
    const int d = j.at("dim").get<int>();
    GmmParams p;
    p.weights = j.at("weights").get<std::vector<double>>();
    const auto means = j.at("means").get<std::vector<std::vector<double>>>();
    const auto covs = j.at("covariances").get<std::vector<std::vector<double>>>();
    if (static_cast<int>(p.weights.size()) != order || static_cast<int>(means.size()) != order ||
        static_cast<int>(covs.size()) != order) {
      throw InvalidArgument("mixture JSON arrays disagree with order");
    }
    for (int c = 0; c < order; ++c) {
      const auto cu = static_cast<std::size_t>(c);
      if (static_cast<int>(means[cu].size()) != d || static_cast<int>(covs[cu].size()) != d * d) {
        throw InvalidArgument("mixture JSON arrays disagree with dim");
      }
      p.means.push_back(Eigen::Map<const Eigen::VectorXd>(means[cu].data(), d));
      Eigen::MatrixXd cov(d, d);
      for (int r = 0; r < d; ++r) {
        for (int k = 0; k < d; ++k) cov(r, k) = covs[cu][static_cast<std::size_t>(r * d + k)];
      }
      p.covariances.push_back(cov);
    }
    p.validate();
    return p;
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument(std::string("bad mixture JSON: ") + e.what());
  }
}

}  // namespace aggwind
