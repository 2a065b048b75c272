#include "phishsim/profiler.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>

#include "phishsim/io.hpp"
#include "phishsim/kernels.hpp"

namespace phishsim {

FeatureMatrix::FeatureMatrix(std::vector<std::string> column_names)
    : names_(std::move(column_names)), columns_(names_.size()) {
  if (names_.empty()) throw InvalidArgument("feature matrix needs at least one column");
}

void FeatureMatrix::add_row(std::span<const double> values, int label) {
  if (values.size() != cols()) throw InvalidArgument("feature row has the wrong width");
  if (label != 0 && label != 1) throw InvalidArgument("label must be 0 or 1");
  for (double v : values)
    if (!std::isfinite(v)) throw InvalidArgument("feature values must be finite");
  for (std::size_t c = 0; c < cols(); ++c) columns_[c].push_back(values[c]);
  labels_.push_back(static_cast<double>(label));
}

void FeatureMatrix::reserve(std::size_t rows) {
  for (auto& col : columns_) col.reserve(rows);
  labels_.reserve(rows);
}

std::span<const double> FeatureMatrix::column(std::size_t c) const {
  if (c >= cols()) throw InvalidArgument("feature column out of range");
  return columns_[c];
}

FeatureMatrix build_features(std::span<const LabeledTarget> rows) {
  FeatureMatrix m(std::vector<std::string>(kFeatureNames.begin(), kFeatureNames.end()));
  m.reserve(rows.size());
  for (const LabeledTarget& row : rows) {
    const FeatureRow x = features(row.target);
    m.add_row(x, row.visited ? 1 : 0);
  }
  return m;
}

void write_features_csv(std::ostream& out, const FeatureMatrix& m) {
  for (const auto& name : m.column_names()) out << io::csv_field(name) << ',';
  out << "visited\n";
  for (std::size_t r = 0; r < m.rows(); ++r) {
    for (std::size_t c = 0; c < m.cols(); ++c) out << io::format_double(m.at(r, c)) << ',';
    out << static_cast<int>(m.labels()[r]) << '\n';
  }
}

FeatureMatrix read_features_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw InvalidArgument("features csv: missing header");
  auto header = io::csv_split(line);
  if (header.size() < 2 || header.back() != "visited")
    throw InvalidArgument("features csv: last column must be 'visited'");
  header.pop_back();
  FeatureMatrix m(header);
  std::vector<double> values(m.cols());
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty() || line == "\r") continue;
    auto f = io::csv_split(line);
    const std::string where = "features csv row " + std::to_string(row);
    if (f.size() != m.cols() + 1) throw InvalidArgument(where + ": wrong field count");
    for (std::size_t c = 0; c < m.cols(); ++c) values[c] = io::parse_double(f[c], where);
    m.add_row(values, static_cast<int>(io::parse_int(f.back(), where)));
  }
  return m;
}

namespace {

double softplus(double x) { return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x))); }

void linear_predictor(const FeatureMatrix& m, std::span<const double> beta,
                      std::vector<double>& eta) {
  eta.assign(m.rows(), 0.0);
  for (std::size_t c = 0; c < m.cols(); ++c) kernels::axpy(beta[c], m.column(c), eta);
}

// Neumaier-compensated running sum.
struct CompensatedSum {
  double sum = 0.0;
  double c = 0.0;
  void add(double v) {
    const double t = sum + v;
    c += std::abs(sum) >= std::abs(v) ? (sum - t) + v : (v - t) + sum;
    sum = t;
  }
  double value() const { return sum + c; }
};

double ll_from_eta(const FeatureMatrix& m, const std::vector<double>& eta) {
  const auto& y = m.labels();
  CompensatedSum ll;
  for (std::size_t i = 0; i < eta.size(); ++i) ll.add(y[i] * eta[i] - softplus(eta[i]));
  return ll.value();
}

// Change in the penalised objective when the linear predictor moves by
// scale * d. Per row, softplus(eta + delta) - softplus(eta) equals
// log1p(p * expm1(delta)), which keeps its relative accuracy however small
// delta is, so gains near the optimum are not lost to rounding.
double objective_gain(const FeatureMatrix& m, std::span<const double> p, std::span<const double> d,
                      double scale, std::span<const double> beta, std::span<const double> trial,
                      double ridge) {
  const auto& y = m.labels();
  CompensatedSum gain;
  for (std::size_t i = 0; i < d.size(); ++i) {
    const double delta = scale * d[i];
    gain.add(y[i] * delta - std::log1p(p[i] * std::expm1(delta)));
  }
  double pen = 0.0;
  for (std::size_t c = 0; c < beta.size(); ++c) pen += (trial[c] - beta[c]) * (trial[c] + beta[c]);
  return gain.value() - 0.5 * ridge * pen;
}

double penalty(std::span<const double> beta, double ridge) {
  double s = 0.0;
  for (double b : beta) s += b * b;
  return 0.5 * ridge * s;
}

void check_beta(const FeatureMatrix& m, std::span<const double> beta) {
  if (beta.size() != m.cols()) throw InvalidArgument("coefficient vector has the wrong length");
}

Eigen::MatrixXd information(const FeatureMatrix& m, const std::vector<double>& w, double ridge) {
  const std::size_t k = m.cols();
  Eigen::MatrixXd h(k, k);
  for (std::size_t a = 0; a < k; ++a) {
    for (std::size_t b = 0; b <= a; ++b) {
      const double v = kernels::weighted_dot(w, m.column(a), m.column(b));
      h(a, b) = v;
      h(b, a) = v;
    }
    h(a, a) += ridge;
  }
  return h;
}

}  // namespace

double log_likelihood(const FeatureMatrix& m, std::span<const double> beta) {
  check_beta(m, beta);
  std::vector<double> eta;
  linear_predictor(m, beta, eta);
  return ll_from_eta(m, eta);
}

std::vector<double> log_likelihood_gradient(const FeatureMatrix& m, std::span<const double> beta) {
  check_beta(m, beta);
  std::vector<double> eta;
  linear_predictor(m, beta, eta);
  std::vector<double> resid(m.rows());
  for (std::size_t i = 0; i < resid.size(); ++i) resid[i] = m.labels()[i] - logistic(eta[i]);
  std::vector<double> g(m.cols());
  for (std::size_t c = 0; c < m.cols(); ++c) g[c] = kernels::dot(m.column(c), resid);
  return g;
}

RegressionFit fit_logistic(const FeatureMatrix& m, const FitOptions& opt) {
  if (!(opt.ridge >= 0.0) || !std::isfinite(opt.ridge)) throw InvalidArgument("ridge must be >= 0");
  if (!(opt.tolerance > 0.0)) throw InvalidArgument("tolerance must be positive");
  if (opt.max_iterations < 1) throw InvalidArgument("max_iterations must be positive");
  const std::size_t n = m.rows();
  const std::size_t k = m.cols();
  if (k == 0) throw InvalidArgument("feature matrix has no columns");
  if (n < k + 1) throw InvalidArgument("need more rows than columns");
  const auto& y = m.labels();
  if (std::all_of(y.begin(), y.end(), [&](double v) { return v == y.front(); }))
    throw InvalidArgument("degenerate labels");

  RegressionFit fit;
  fit.column_names = m.column_names();
  std::vector<double> beta(k, 0.0), trial(k), eta, d, p(n), w(n), resid(n), grad(k);

  linear_predictor(m, beta, eta);
  double objective = ll_from_eta(m, eta) - penalty(beta, opt.ridge);
  fit.objective_history.push_back(objective);

  auto refresh = [&] {
    for (std::size_t i = 0; i < n; ++i) {
      p[i] = logistic(eta[i]);
      w[i] = p[i] * (1.0 - p[i]);
      resid[i] = y[i] - p[i];
    }
    double gmax = 0.0;
    for (std::size_t c = 0; c < k; ++c) {
      grad[c] = kernels::dot(m.column(c), resid) - opt.ridge * beta[c];
      gmax = std::max(gmax, std::abs(grad[c]));
    }
    return gmax;
  };

  double gmax = refresh();
  while (true) {
    if (gmax <= opt.tolerance) {
      fit.converged = true;
      break;
    }
    if (fit.iterations >= opt.max_iterations) {
      fit.diagnostic = "iteration limit reached";
      break;
    }
    Eigen::LLT<Eigen::MatrixXd> llt(information(m, w, opt.ridge));
    if (llt.info() != Eigen::Success) {
      fit.diagnostic = "information matrix not positive definite";
      break;
    }
    const Eigen::VectorXd step = llt.solve(Eigen::Map<const Eigen::VectorXd>(grad.data(), k));
    linear_predictor(m, std::span<const double>(step.data(), k), d);
    double scale = 1.0;
    bool accepted = false;
    for (int halvings = 0; halvings < 60; ++halvings, scale *= 0.5) {
      for (std::size_t c = 0; c < k; ++c) trial[c] = beta[c] + scale * step(c);
      const double gain = objective_gain(m, p, d, scale, beta, trial, opt.ridge);
      if (gain >= 0.0) {
        beta.swap(trial);
        linear_predictor(m, beta, eta);
        objective += gain;
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      fit.diagnostic = "no ascent direction within floating-point precision";
      break;
    }
    ++fit.iterations;
    fit.objective_history.push_back(objective);
    gmax = refresh();
  }

  fit.coefficients = beta;
  fit.log_likelihood = ll_from_eta(m, eta);
  fit.max_abs_gradient = gmax;

  const Eigen::MatrixXd h = information(m, w, opt.ridge);
  Eigen::LLT<Eigen::MatrixXd> llt(h);
  fit.standard_errors.assign(k, std::numeric_limits<double>::quiet_NaN());
  fit.z_scores.assign(k, std::numeric_limits<double>::quiet_NaN());
  if (llt.info() == Eigen::Success) {
    const Eigen::MatrixXd cov = llt.solve(Eigen::MatrixXd::Identity(k, k));
    for (std::size_t c = 0; c < k; ++c) {
      fit.standard_errors[c] = std::sqrt(cov(c, c));
      fit.z_scores[c] = beta[c] / fit.standard_errors[c];
    }
  }

  bool separated = true;
  for (std::size_t i = 0; i < n && separated; ++i)
    separated = y[i] == 1.0 ? eta[i] > 0.0 : eta[i] < 0.0;
  if (separated) {
    fit.converged = false;
    fit.diagnostic = "perfect separation: every row is classified correctly; "
                     "coefficients are held finite only by the ridge penalty";
  }
  return fit;
}

nlohmann::json to_json(const RegressionFit& fit) {
  auto num = [](double v) -> nlohmann::json {
    return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr);
  };
  nlohmann::json coefs = nlohmann::json::array();
  for (std::size_t c = 0; c < fit.coefficients.size(); ++c) {
    coefs.push_back({{"name", fit.column_names.at(c)},
                     {"estimate", num(fit.coefficients[c])},
                     {"std_error", num(fit.standard_errors[c])},
                     {"z", num(fit.z_scores[c])}});
  }
  nlohmann::json j = {{"coefficients", coefs},
                      {"converged", fit.converged},
                      {"iterations", fit.iterations},
                      {"log_likelihood", num(fit.log_likelihood)},
                      {"max_abs_gradient", num(fit.max_abs_gradient)}};
  if (!fit.diagnostic.empty()) j["diagnostic"] = fit.diagnostic;
  return j;
}

}  // namespace phishsim
