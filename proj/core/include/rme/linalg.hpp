// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#pragma once

#include <Eigen/Dense>

namespace rme {

/// Lower Cholesky factor of a symmetric PSD matrix.
struct CholeskyFactor {
  Eigen::MatrixXd lower;
  double jitter = 0.0;  ///< diagonal load that made the factorization succeed
};

/// Cholesky with a jitter ladder: tries K, then K + j I for
/// j = 1e-10 * scale, 1e-9 * scale, ..., 1e-4 * scale.
/// \p scale is the variance level of K (e.g. sigma^2); a zero matrix gives
/// a zero factor. Throws NumericalError when every rung fails.
CholeskyFactor cholesky_with_jitter(const Eigen::MatrixXd& k, double scale);

/// Probabilists' Gauss-Hermite rule for E[f(Z)], Z ~ N(0, 1).
struct GaussHermiteRule {
  Eigen::VectorXd nodes;
  Eigen::VectorXd weights;  ///< sum to 1
};

/// n-point rule via the Golub-Welsch eigenvalue method.
GaussHermiteRule gauss_hermite(int n);

}  // namespace rme
