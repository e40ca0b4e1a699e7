#pragma once

// Two-spin Ising (J01 = 1) references by exhaustive search.

#include <algorithm>
#include <cmath>

#include "oracle/dense_oracle.hpp"

namespace oracle {

// Exhaustive search over u = 0 for tau0, u_mid, u = 1 for tau1 on the two-spin problem.
inline double bang_anneal_bang(double t_f, int resolution) {
  const Mat B = mixer(2), C = ising(2, {{0, 1, 1.0}});
  const Vec plus = plus_state(2);
  double best = 1e300;
  for (int a = 0; a < resolution; ++a) {
    const double um = static_cast<double>(a) / (resolution - 1);
    Eigen::SelfAdjointEigenSolver<Mat> eig(um * B + (1 - um) * C);
    const Mat& V = eig.eigenvectors();
    for (int i = 0; i < resolution; ++i) {
      const double tau0 = t_f * i / (resolution - 1);
      const Vec x0 = propagator(C, tau0) * plus;
      const Vec y0 = V.adjoint() * x0;
      for (int j = 0; i + j < resolution; ++j) {
        const double tau1 = t_f * j / (resolution - 1);
        const double mid = t_f - tau0 - tau1;
        Vec y = y0;
        for (Eigen::Index r = 0; r < 4; ++r) y(r) *= std::exp(cplx(0, -eig.eigenvalues()(r) * mid));
        const Vec x = propagator(B, tau1) * (V * y);
        best = std::min(best, (x.adjoint() * C * x)(0, 0).real());
      }
    }
  }
  return best;
}

inline double p1_line_search(double t_f, int points) {
  const Mat B = mixer(2), C = ising(2, {{0, 1, 1.0}});
  double best = 1e300;
  for (int i = 0; i < points; ++i) {
    const double gamma = t_f * i / (points - 1);
    const Vec x = propagator(B, t_f - gamma) * propagator(C, gamma) * plus_state(2);
    best = std::min(best, (x.adjoint() * C * x)(0, 0).real());
  }
  return best;
}

}  // namespace oracle
