#pragma once

#include <cstddef>

#include "mimstd/glm.hpp"

namespace mimstd {

/// Subject-level data of the comparative index study.
struct IndexStudyData {
  Matrix covariates;  // N x K
  Vector treatment;   // 0/1
  Vector outcome;     // 0/1

  std::size_t size() const noexcept { return static_cast<std::size_t>(covariates.rows()); }
  std::size_t n_covariates() const noexcept { return static_cast<std::size_t>(covariates.cols()); }

  /// Throws ShapeError or DomainError when the columns disagree or are not binary.
  void validate() const;
};

/// Covariate-only sample from the target population; outcomes are unavailable.
struct TargetCovariates {
  Matrix covariates;  // N_tar x K

  std::size_t size() const noexcept { return static_cast<std::size_t>(covariates.rows()); }
  std::size_t n_covariates() const noexcept { return static_cast<std::size_t>(covariates.cols()); }
};

/// Index covariates reused as the target (standardizing within the index study).
inline TargetCovariates within_study_target(const IndexStudyData& index) {
  return TargetCovariates{index.covariates};
}

}  // namespace mimstd
