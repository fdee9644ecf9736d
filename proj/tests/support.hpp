#pragma once

#include <cstddef>

#include "mimstd/data.hpp"

namespace testing {

// Intercept/treatment-only data: e1 events among n1 treated, e0 among n0 controls.
inline mimstd::IndexStudyData two_arm_table(int n1, int e1, int n0, int e0) {
  mimstd::IndexStudyData d;
  d.covariates.resize(n1 + n0, 0);
  d.treatment.resize(n1 + n0);
  d.outcome.resize(n1 + n0);
  for (int i = 0; i < n1 + n0; ++i) {
    const bool treated = i < n1;
    d.treatment[i] = treated ? 1.0 : 0.0;
    d.outcome[i] = treated ? (i < e1 ? 1.0 : 0.0) : (i - n1 < e0 ? 1.0 : 0.0);
  }
  return d;
}

inline double max_abs_diff(const mimstd::Vector& a, const mimstd::Vector& b) {
  return (a - b).cwiseAbs().maxCoeff();
}

}  // namespace testing
