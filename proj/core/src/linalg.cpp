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
#include "rme/linalg.hpp"

#include <cmath>
#include <string>

#include "rme/error.hpp"

namespace rme {

CholeskyFactor cholesky_with_jitter(const Eigen::MatrixXd& k, double scale) {
  if (k.rows() != k.cols()) throw NumericalError("cholesky: matrix not square");
  const Eigen::Index n = k.rows();
  if (n == 0) return {Eigen::MatrixXd(0, 0), 0.0};
  if (k.cwiseAbs().maxCoeff() == 0.0) return {Eigen::MatrixXd::Zero(n, n), 0.0};
  if (!(scale > 0.0)) scale = k.diagonal().cwiseAbs().maxCoeff();

  Eigen::LLT<Eigen::MatrixXd> llt(k);
  if (llt.info() == Eigen::Success) return {llt.matrixL(), 0.0};

  for (double rel = 1e-10; rel <= 1e-4 * 1.0000001; rel *= 10.0) {
    const double jitter = rel * scale;
    Eigen::MatrixXd loaded = k;
    loaded.diagonal().array() += jitter;
    llt.compute(loaded);
    if (llt.info() == Eigen::Success) return {llt.matrixL(), jitter};
  }
  throw NumericalError("cholesky failed after jitter ladder up to 1e-4 * " +
                       std::to_string(scale));
}

GaussHermiteRule gauss_hermite(int n) {
  if (n < 1) throw ConfigError("Gauss-Hermite rule needs n >= 1");
  // Jacobi matrix of the monic probabilists' Hermite recurrence.
  Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(n, n);
  for (int i = 1; i < n; ++i) {
    const double b = std::sqrt(static_cast<double>(i));
    jacobi(i, i - 1) = b;
    jacobi(i - 1, i) = b;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(jacobi);
  if (eig.info() != Eigen::Success) throw NumericalError("Gauss-Hermite eigensolve failed");
  GaussHermiteRule rule;
  rule.nodes = eig.eigenvalues();
  rule.weights = eig.eigenvectors().row(0).transpose().array().square();
  rule.weights /= rule.weights.sum();
  return rule;
}

}  // namespace rme
