#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "mimstd/glm.hpp"

namespace mimstd::diagnostics {

using ChainSet = std::vector<std::span<const double>>;

/// Potential scale reduction over split halves of each chain.
double split_rhat(const ChainSet& chains);

/// Multi-chain effective sample size on split chains, using Geyer's initial
/// monotone positive-pair truncation of the combined autocorrelation.
double effective_sample_size(const ChainSet& chains);

struct ParameterDiagnostics {
  std::vector<double> rhat;
  std::vector<double> ess;

  double max_rhat() const;
  double min_ess() const;
};

/// `draws` holds n_chains consecutive blocks of equal length, one row per draw.
ParameterDiagnostics summarize(const Matrix& draws, std::size_t n_chains);

}  // namespace mimstd::diagnostics
