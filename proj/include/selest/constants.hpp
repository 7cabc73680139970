#pragma once

#include "selest/special_fns.hpp"

namespace selest {

/// Coefficients of the linear estimators Z - cS, all functions of n:
///   k0 = 1/(2n(2n-1))   infimum of the worst-target risk minimizer
///   k1 = 1/(2n(n-1))    unbiased-estimator analogue
///   k2 = 1/(n(2n-1))    best affine equivariant / generalized Bayes analogue
///   k3 = 3/(2n(2n-1))   supremum of the best-target risk minimizer
struct EstimatorConstants {
  int n;
  double k0;
  double k1;
  double k2;
  double k3;
};

inline EstimatorConstants constants(int n) {
  if (n < 2) throw DomainError("constants: n must be >= 2");
  const double nd = n;
  return {n, 1.0 / (2.0 * nd * (2.0 * nd - 1.0)), 1.0 / (2.0 * nd * (nd - 1.0)), 1.0 / (nd * (2.0 * nd - 1.0)),
          3.0 / (2.0 * nd * (2.0 * nd - 1.0))};
}

}  // namespace selest
