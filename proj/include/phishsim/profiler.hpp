#pragma once

// Susceptibility profiling: feature matrix construction and a ridge
// logistic regression fitted by iteratively reweighted least squares.

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "phishsim/target_sampler.hpp"
#include "phishsim/victim_model.hpp"

namespace phishsim {

/// Column-major design matrix with a 0/1 label per row.
class FeatureMatrix {
 public:
  FeatureMatrix() = default;
  explicit FeatureMatrix(std::vector<std::string> column_names);

  void add_row(std::span<const double> values, int label);
  void reserve(std::size_t rows);

  std::size_t rows() const { return labels_.size(); }
  std::size_t cols() const { return names_.size(); }
  const std::vector<std::string>& column_names() const { return names_; }
  /// Column c, contiguous; valid until the next add_row.
  std::span<const double> column(std::size_t c) const;
  double at(std::size_t row, std::size_t col) const { return column(col)[row]; }
  const std::vector<double>& labels() const { return labels_; }

  bool operator==(const FeatureMatrix&) const = default;

 private:
  std::vector<std::string> names_;
  std::vector<std::vector<double>> columns_;
  std::vector<double> labels_;
};

struct LabeledTarget {
  TargetRecord target;
  bool visited = false;
};

/// Columns in kFeatureNames order.
FeatureMatrix build_features(std::span<const LabeledTarget> rows);

/// Header: column names then "visited".
void write_features_csv(std::ostream& out, const FeatureMatrix& m);
FeatureMatrix read_features_csv(std::istream& in);

struct FitOptions {
  double ridge = 1e-6;
  double tolerance = 1e-8;
  int max_iterations = 100;
};

struct RegressionFit {
  std::vector<std::string> column_names;
  std::vector<double> coefficients;
  std::vector<double> standard_errors;
  std::vector<double> z_scores;
  bool converged = false;
  int iterations = 0;
  double log_likelihood = 0.0;
  /// Penalised objective at beta = 0, then after each accepted step (the
  /// start value plus the accumulated row-wise gains).
  std::vector<double> objective_history;
  double max_abs_gradient = 0.0;
  std::string diagnostic;
};

/// Bernoulli log-likelihood sum_i y_i*eta_i - log(1 + e^eta_i).
double log_likelihood(const FeatureMatrix& m, std::span<const double> beta);
/// Gradient of log_likelihood (no ridge term).
std::vector<double> log_likelihood_gradient(const FeatureMatrix& m, std::span<const double> beta);

/// Maximises log_likelihood - ridge/2 * |beta|^2. Throws InvalidArgument
/// "degenerate labels" when every label is equal and when there are not
/// more rows than columns.
RegressionFit fit_logistic(const FeatureMatrix& m, const FitOptions& options = {});

nlohmann::json to_json(const RegressionFit& fit);

}  // namespace phishsim
