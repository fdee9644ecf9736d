#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <optional>

namespace mimstd {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

}  // namespace mimstd

namespace mimstd::glm {

enum class LinkKind { identity, log, logit };

/// Link function g mapping a natural-scale mean onto the linear predictor scale.
class Link {
 public:
  constexpr Link() = default;
  constexpr explicit Link(LinkKind kind) : kind_(kind) {}

  constexpr LinkKind kind() const noexcept { return kind_; }

  /// True when mu lies inside the open domain of g.
  bool valid_mean(double mu) const noexcept;

  /// g(mu). Throws DomainError outside the link's domain.
  double apply(double mu) const;

  /// g^-1(eta)
  double inverse(double eta) const noexcept;

  /// d mu / d eta evaluated at eta
  double mean_derivative(double eta) const noexcept;

  friend constexpr bool operator==(Link, Link) = default;

 private:
  LinkKind kind_ = LinkKind::logit;
};

double apply_link(double mu, Link link);
double apply_inverse_link(double eta, Link link);

/// Column layout of the outcome-model design:
/// [intercept, x_1..x_K, t, t*x_1..t*x_K] with interactions,
/// [intercept, x_1..x_K, t] without.
struct DesignSpec {
  std::size_t n_covariates = 0;
  bool include_interactions = true;

  std::size_t width() const noexcept {
    return include_interactions ? 2 * n_covariates + 2 : n_covariates + 2;
  }
  std::size_t treatment_column() const noexcept { return n_covariates + 1; }

  friend bool operator==(const DesignSpec&, const DesignSpec&) = default;
};

/// Builds the N x P design. Treatment entries must be 0 or 1.
Matrix build_design(const Matrix& covariates, const Vector& treatment, const DesignSpec& spec);

/// Design with every row assigned the same treatment value.
Matrix build_design(const Matrix& covariates, int treatment, const DesignSpec& spec);

struct FitOptions {
  std::optional<Vector> start;
  int max_iterations = 25;
  /// Relative deviance change that stops IRLS.
  double tolerance = 1e-8;
};

struct FittedGlm {
  Vector coefficients;
  /// Inverse Fisher information at the optimum (the observed information for
  /// the canonical logit link).
  Matrix covariance;
  bool converged = false;
  int iterations = 0;
  double log_likelihood = 0.0;
  Link link;
  /// Set when the fit was built from covariates and treatment.
  std::optional<DesignSpec> spec;
};

/// Bernoulli maximum likelihood by iteratively reweighted least squares.
///
/// Throws SeparationError when a coefficient exceeds 1e3 in magnitude or a
/// fitted probability comes within 1e-10 of 0 or 1, SingularError when the
/// weighted least-squares system is rank deficient at tolerance 1e-12, and
/// ShapeError/DomainError on malformed inputs.
FittedGlm fit_mle(const Matrix& design, const Vector& outcomes, Link link = Link{},
                  const FitOptions& options = {});

/// Builds the design from `spec` and records it in the result.
FittedGlm fit_mle(const Matrix& covariates, const Vector& treatment, const Vector& outcomes,
                  const DesignSpec& spec, Link link = Link{}, const FitOptions& options = {});

Vector predict_mean(const FittedGlm& model, const Matrix& design);

/// Coefficients and design widths must agree.
Vector linear_predictor(const Vector& coefficients, const Matrix& design);

}  // namespace mimstd::glm
