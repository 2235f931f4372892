// Brown measure and Fuglede-Kadison determinant of T = U H with |T| carrying
// the half-half law on {1, 2}.

#include <cstdio>

#include "rdiag/brown.hpp"
#include "rdiag/builtins.hpp"

int main() {
  using namespace rdiag;
  const KFunction kf(builtin::two_atoms());
  const LambdaBounds& lb = kf.bounds();
  std::printf("annulus: %.6f < |lambda| < %.6f\n", lb.lambda1, lb.lambda2.value());

  std::printf("%10s %14s %14s %14s\n", "r", "cdf", "cdf (S route)", "log Delta");
  for (double r : {0.5, 1.3, 1.4, 1.5, 2.0}) {
    const double via_s = radial_cdf_via_s_transform(builtin::two_atoms(), r);
    std::printf("%10.4f %14.10f %14.10f %14.10f\n", r, radial_cdf(kf, r), via_s, fk_det(kf, r).log_delta.value());
  }

  // s(r, t) and the regularized determinant at t > 0
  const SubordinationResult sr = solve_s(kf, 1.4, 0.1);
  std::printf("s(1.4, 0.1) = %.12f, log Delta(|T - 1.4|^2 + 0.01) = %.12f\n", sr.s,
              fk_det_regularized(kf, 1.4, 0.1).log_delta.value());
}
