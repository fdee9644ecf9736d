#include "mimstd/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>

#include "mimstd/errors.hpp"

namespace mimstd::diagnostics {

namespace {

ChainSet split_halves(const ChainSet& chains) {
  ChainSet halves;
  for (const auto& c : chains) {
    const std::size_t half = c.size() / 2;
    halves.push_back(c.subspan(0, half));
    // an odd middle draw is dropped
    halves.push_back(c.subspan(c.size() - half, half));
  }
  return halves;
}

void check_chains(const ChainSet& chains) {
  if (chains.empty()) throw EmptyInput("no chains");
  const std::size_t n = chains.front().size();
  if (n < 4) throw EmptyInput("chains need at least four draws");
  for (const auto& c : chains) {
    if (c.size() != n) throw ShapeError("chains differ in length");
  }
}

double chain_mean(std::span<const double> c) {
  double s = 0.0;
  for (double v : c) s += v;
  return s / static_cast<double>(c.size());
}

struct Moments {
  std::vector<double> means;
  double within = 0.0;    // mean within-chain variance (n - 1 denominator)
  double var_plus = 0.0;  // pooled posterior variance estimate
};

Moments moments(const ChainSet& chains) {
  Moments m;
  const auto n = static_cast<double>(chains.front().size());
  double between_ss = 0.0;
  for (const auto& c : chains) {
    const double mu = chain_mean(c);
    m.means.push_back(mu);
    double ss = 0.0;
    for (double v : c) ss += (v - mu) * (v - mu);
    m.within += ss / (n - 1.0);
  }
  m.within /= static_cast<double>(chains.size());
  double grand = 0.0;
  for (double mu : m.means) grand += mu;
  grand /= static_cast<double>(m.means.size());
  for (double mu : m.means) between_ss += (mu - grand) * (mu - grand);
  const double between_over_n =
      chains.size() > 1 ? between_ss / static_cast<double>(chains.size() - 1) : 0.0;
  m.var_plus = (n - 1.0) / n * m.within + between_over_n;
  return m;
}

// Autocovariance at `lag` with the 1/n normalization.
double autocov(std::span<const double> c, double mu, std::size_t lag) {
  double s = 0.0;
  for (std::size_t i = 0; i + lag < c.size(); ++i) s += (c[i] - mu) * (c[i + lag] - mu);
  return s / static_cast<double>(c.size());
}

}  // namespace

double split_rhat(const ChainSet& chains) {
  check_chains(chains);
  const Moments m = moments(split_halves(chains));
  if (m.within <= 0.0) return m.var_plus > 0.0 ? std::numeric_limits<double>::infinity() : 1.0;
  return std::sqrt(m.var_plus / m.within);
}

double effective_sample_size(const ChainSet& chains) {
  check_chains(chains);
  const ChainSet split = split_halves(chains);
  const Moments m = moments(split);
  const std::size_t n = split.front().size();
  const double total = static_cast<double>(n * split.size());
  if (m.var_plus <= 0.0) return total;

  auto rho = [&](std::size_t lag) {
    double acov = 0.0;
    for (std::size_t c = 0; c < split.size(); ++c) acov += autocov(split[c], m.means[c], lag);
    acov /= static_cast<double>(split.size());
    // m.within equals mean(acov(0)) * n / (n - 1)
    return 1.0 - (m.within - acov) / m.var_plus;
  };

  // signed: a split chain of two or three draws leaves max_s at -1
  const auto len = static_cast<std::ptrdiff_t>(n);
  std::vector<double> r(n + 1, 0.0);
  r[0] = 1.0;
  double even = 1.0;
  double odd = rho(1);
  r[1] = odd;
  std::ptrdiff_t s = 1;
  while (s + 3 < len && even + odd > 0.0) {
    even = rho(static_cast<std::size_t>(s + 1));
    odd = rho(static_cast<std::size_t>(s + 2));
    if (even + odd >= 0.0) {
      r[static_cast<std::size_t>(s + 1)] = even;
      r[static_cast<std::size_t>(s + 2)] = odd;
    }
    s += 2;
  }
  const std::ptrdiff_t max_s = s - 2;
  if (even > 0.0) r[static_cast<std::size_t>(max_s + 1)] = even;

  // monotone sequence of pair sums
  for (std::ptrdiff_t t = 1; t + 2 <= max_s; t += 2) {
    const auto u = static_cast<std::size_t>(t);
    if (r[u + 1] + r[u + 2] > r[u - 1] + r[u]) {
      r[u + 1] = (r[u - 1] + r[u]) / 2.0;
      r[u + 2] = r[u + 1];
    }
  }

  double tau = -1.0;
  for (std::ptrdiff_t t = 0; t <= max_s; ++t) tau += 2.0 * r[static_cast<std::size_t>(t)];
  tau += r[static_cast<std::size_t>(max_s + 1)];
  tau = std::max(tau, 1.0 / std::log10(total));
  return total / tau;
}

double ParameterDiagnostics::max_rhat() const {
  return rhat.empty() ? 1.0 : *std::max_element(rhat.begin(), rhat.end());
}

double ParameterDiagnostics::min_ess() const {
  return ess.empty() ? 0.0 : *std::min_element(ess.begin(), ess.end());
}

ParameterDiagnostics summarize(const Matrix& draws, std::size_t n_chains) {
  if (n_chains == 0 || draws.rows() % static_cast<Eigen::Index>(n_chains) != 0) {
    throw ShapeError("draw count is not a multiple of the chain count");
  }
  const auto len = static_cast<std::size_t>(draws.rows()) / n_chains;
  ParameterDiagnostics d;
  for (Eigen::Index j = 0; j < draws.cols(); ++j) {
    ChainSet chains;
    const double* col = draws.col(j).data();
    for (std::size_t c = 0; c < n_chains; ++c) chains.emplace_back(col + c * len, len);
    d.rhat.push_back(split_rhat(chains));
    d.ess.push_back(effective_sample_size(chains));
  }
  return d;
}

}  // namespace mimstd::diagnostics
