#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace aggwind {

/// Point cloud, one sample per column (dim x count).
using Samples = Eigen::MatrixXd;

/// Gaussian mixture. Component j has weights[j], means[j], covariances[j].
struct GmmParams {
  std::vector<double> weights;
  std::vector<Eigen::VectorXd> means;
  std::vector<Eigen::MatrixXd> covariances;

  int order() const { return static_cast<int>(weights.size()); }
  int dim() const { return means.empty() ? 0 : static_cast<int>(means.front().size()); }

  /// Throws InvalidArgument unless weights sum to 1, shapes agree and every
  /// covariance is symmetric positive definite.
  void validate() const;
};

/// Largest absolute difference between two mixtures of equal shape, after
/// matching components greedily by nearest mean.
double max_param_difference(const GmmParams& a, const GmmParams& b);

/// Precomputed Cholesky factors for repeated density evaluation.
class MixtureEvaluator {
 public:
  static constexpr int kMaxDim = 8;

  explicit MixtureEvaluator(const GmmParams& params);

  int order() const { return order_; }
  int dim() const { return dim_; }
  /// log(weight_j) + log N(x; mean_j, cov_j); -inf for zero-weight components.
  double log_joint(int component, const double* x) const;
  /// log of the mixture density via log-sum-exp.
  double log_pdf(const double* x) const;
  /// Fills `resp` (size order) with posterior responsibilities; returns log_pdf.
  double responsibilities(const double* x, double* resp) const;

 private:
  int order_;
  int dim_;
  std::vector<double> log_coef_;
  std::vector<double> means_;     // order x dim
  std::vector<double> inv_chol_;  // order x dim x dim, lower triangular, row-major
};

double gmm_log_pdf(const GmmParams& params, const Eigen::VectorXd& point);
double gmm_pdf(const GmmParams& params, const Eigen::VectorXd& point);

/// Responsibility-weighted moments per component. `scatter` is the raw
/// second moment sum r * x x^T (not centered).
struct SufficientStats {
  std::vector<double> mass;
  std::vector<Eigen::VectorXd> sum;
  std::vector<Eigen::MatrixXd> scatter;
  double count = 0.0;

  static SufficientStats zero(int order, int dim);
  int order() const { return static_cast<int>(mass.size()); }
  int dim() const { return sum.empty() ? 0 : static_cast<int>(sum.front().size()); }

  /// [count, then per component: mass, sum (dim), scatter (dim*dim, row-major)].
  Eigen::VectorXd flatten() const;
  static SufficientStats unflatten(const Eigen::VectorXd& flat, int order, int dim);
  static Eigen::Index flat_size(int order, int dim);

  SufficientStats& operator+=(const SufficientStats& other);
  SufficientStats scaled(double factor) const;
};

struct EStepResult {
  SufficientStats stats;
  double log_likelihood = 0.0;
};

EStepResult expectation_step(const GmmParams& params, const Samples& data);

/// Conjugate Dirichlet + Normal-Inverse-Wishart prior for MAP fitting.
struct MapPrior {
  double alpha = 1.01;
  double kappa0 = 0.01;
  Eigen::VectorXd m0;
  double nu0 = 4.0;
  Eigen::MatrixXd psi0;

  /// alpha 1.01, kappa0 0.01, m0 = data mean, nu0 = d + 2, psi0 = 0.1 * sample covariance.
  static MapPrior defaults_for(const Samples& data);
  /// Near-flat prior whose MAP fit approaches the maximum-likelihood fit.
  static MapPrior weak(int dim);

  void validate(int dim) const;
  /// Log prior density of `params`, up to an additive constant.
  double log_density(const GmmParams& params) const;
};

struct FitConfig {
  int max_iters = 300;
  /// Stop when |objective change| < tol. Zero runs exactly max_iters updates.
  double tol = 1e-6;
  /// Eigenvalue floor; non-positive means 1e-6 * trace(sample covariance) / d.
  double cov_floor = 0.0;
  /// Candidate points for reseeding starved components; defaults to the data.
  std::optional<Samples> reseed_pool;
};

struct FitResult {
  GmmParams params;
  /// Objective (log-likelihood, or log-posterior for MAP) at each visited
  /// parameter set; back() belongs to `params`.
  std::vector<double> trace;
  int iterations = 0;
  /// Input had zero spread; covariances are the absolute floor.
  bool degenerate = false;
};

Eigen::VectorXd sample_mean(const Samples& data);
/// Biased (1/N) sample covariance.
Eigen::MatrixXd sample_covariance(const Samples& data);
double default_cov_floor(const Samples& data);

/// Clamp eigenvalues of the symmetrized matrix at `floor`.
Eigen::MatrixXd floor_covariance(const Eigen::MatrixXd& cov, double floor);

/// k-means++ seeding of the means, global sample covariance, uniform weights.
GmmParams initialize_params(const Samples& sample, int order, std::uint64_t seed);

/// Maximum-likelihood M-step.
GmmParams ml_update(const SufficientStats& stats, double cov_floor);
/// Posterior-mode M-step under `prior`.
GmmParams map_update(const SufficientStats& stats, const MapPrior& prior, double cov_floor);

/// Components whose responsibility mass fell below 1e-8 of the total.
std::vector<int> starved_components(const SufficientStats& stats);
/// Moves each starved component onto the pool point with the lowest density
/// under `model`, with the pool covariance and weight 1/M (weights renormalized).
void reseed_components(GmmParams& params, const std::vector<int>& starved, const Samples& pool,
                       const GmmParams& model, double cov_floor);

FitResult em_fit(const Samples& data, int order, std::uint64_t seed, const FitConfig& config);
FitResult em_fit(const Samples& data, const GmmParams& init, const FitConfig& config);
FitResult map_fit(const Samples& data, int order, const MapPrior& prior, std::uint64_t seed,
                  const FitConfig& config);
FitResult map_fit(const Samples& data, const GmmParams& init, const MapPrior& prior, const FitConfig& config);

int num_free_params(int order, int dim);
double log_likelihood(const GmmParams& params, const Samples& data);
/// 2 * free params - 2 * log-likelihood. NumericError if a point has zero density.
double aic(const GmmParams& params, const Samples& data);

// ---------------------------------------------------------------------------
// Density grids

/// Values at cell centers; values(i, j) is the cell [x_i, x_{i+1}) x [y_j, y_{j+1}).
struct DensityGrid {
  std::vector<double> x_edges;
  std::vector<double> y_edges;
  Eigen::MatrixXd values;

  double cell_area(Eigen::Index i, Eigen::Index j) const;
  /// Sum of value * cell area.
  double mass() const;
};

struct GridSpec {
  std::vector<double> x_edges;
  std::vector<double> y_edges;

  /// `cells` x `cells` uniform grid spanning [min - margin*range, max + margin*range] per axis.
  static GridSpec covering(const Samples& data, int cells = 100, double margin = 0.05);
};

std::vector<double> uniform_edges(double lo, double hi, int cells);

DensityGrid density_grid(const GmmParams& params, const std::vector<double>& x_edges,
                         const std::vector<double>& y_edges);
/// 2-D histogram normalized by the total sample count (out-of-grid points included).
DensityGrid empirical_density(const Samples& data, const std::vector<double>& x_edges,
                              const std::vector<double>& y_edges);
double rmse_between_grids(const DensityGrid& a, const DensityGrid& b);
std::string grid_to_csv(const DensityGrid& grid);

/// 1-D density sampled at bin centers.
struct DensityCurve {
  std::vector<double> edges;
  std::vector<double> values;

  double mass() const;
};

/// Mixture of the `axis` coordinate alone.
GmmParams marginal(const GmmParams& params, int axis);
DensityCurve density_curve(const GmmParams& params1d, const std::vector<double>& edges);
DensityCurve empirical_curve(const Samples& data, int axis, const std::vector<double>& edges);
double rmse_between_curves(const DensityCurve& a, const DensityCurve& b);

// ---------------------------------------------------------------------------
// Serialization

std::string params_to_json(const GmmParams& params);
GmmParams params_from_json(const std::string& json_text);

}  // namespace aggwind
