#pragma once

#include <complex>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "pshlab/boundary.hpp"
#include "pshlab/certify.hpp"
#include "pshlab/expr.hpp"

namespace pshlab {

struct GalleryError : ExprError {
  using ExprError::ExprError;
};

// Built-in domains:
//   omega_local  (k >= 3): u + |z|^{2k}/k^2 - 2|z|^{2k-2} v/(k-1)^2
//                          + |z|^{2k-4} v^2/(k-2)^2 + |z|^{4k-2}
//   omega_global (k >= 3): omega_local + |w|^2 (bounded, real-analytic)
//   tanlog:                u - (x-v)^2/2 - ln(cos x)   on |x| < pi/2
//   model (a):             u + a Re(z^2)|z|^2 + |z|^4
//   tube (f):              u + f
struct GalleryEntry {
  std::string id;
  ScalarField field;
  std::map<std::string, std::string> params;
  std::vector<std::string> properties;
  DegenerateLocus degenerate_locus = DegenerateLocus::None;
  Point4 base_point{};
};

GalleryEntry gallery_make(const std::string& id,
                          const std::map<std::string, std::string>& params = {});
std::vector<std::string> gallery_ids();

double mu_k(int k);  // 1/((k-1)(k-2))

// Denominator floor for ratio certificates on the omega domains: the Levi
// form shrinks like sigma^{4k-4} along the obstruction curve, so larger k
// needs a deeper (still fully accurate) floor.
double omega_lambda_min(int k);

// H_r(L,L) with L = r_w d/dz - r_z d/dw against the closed lower bound
// |z|^{2k-6}(a^2 + |z|^{2k+2})/8, a = |z|^2 - v, at boundary samples.
Certificate levi_lower_bound_check(int k, const std::vector<BoundarySample>& samples);

enum class CurveBranch { Lower, Upper };  // Lower: u near 0; Upper: u near -1

// gamma_sigma(t) = (sigma e^{it}, u(sigma) + i sigma^2) on the boundary.
Point4 boundary_curve(int k, double sigma, double t, CurveBranch branch = CurveBranch::Lower,
                      bool global = false);

// Loop integral of 2 Re(h_z dz) along gamma_sigma by periodic trapezoid
// quadrature; h_z is given either as a function of (zeta, curve point) or
// through a scalar multiplier field.
using HzFunction = std::function<std::complex<double>(std::complex<double>, const Point4&)>;
double loop_integral(const HzFunction& hz, int k, double sigma, int quadrature_n = 256,
                     CurveBranch branch = CurveBranch::Lower, bool global = false);
double loop_integral_field(const ScalarField& h, int k, double sigma, int quadrature_n = 256,
                           CurveBranch branch = CurveBranch::Lower, bool global = false);

// The obstruction one-form coefficient -2 i mu_k conj(zeta) |zeta|^{2k-4}.
std::complex<double> forced_obstruction_hz(int k, std::complex<double> zeta);

// loop_integral of the forced form over each sigma, divided by
// 8 pi mu_k sigma^{2k-2}.
std::vector<double> obstruction_scaling(int k, const std::vector<double>& sigmas,
                                        int quadrature_n = 256);

// Boundedness of the global domain: |z|^2 <= 4^{-1/(2k-1)}, |v| <= 1/2,
// u in [-1, 0], all up to 1e-9.
struct GlobalBounds {
  bool pass = false;
  double max_abs_z2 = 0, max_abs_v = 0, min_u = 0, max_u = 0;
  double bound_z2 = 0;
};
GlobalBounds global_bounds_check(int k, const std::vector<BoundarySample>& samples);

// Pseudoconvexity of the global domain: near-degenerate samples against the
// scaled lower bound, the far-region determinant minorant d(z,w) > 0, and
// the scalar check f_k < 0 on a grid of I_k = (1/10, 4^{-1/(2k-1)}].
struct GlobalPscResult {
  bool pass = false;
  double case1_eps = 0;
  int case1_count = 0, case2_count = 0;
  bool case1_pass = false, case2_pass = false, fk_pass = false;
  Witness worst;
};
GlobalPscResult global_psc_check(int k, const std::vector<BoundarySample>& samples,
                                 int fk_grid_n = 10000);

double fk_value(int k, double t);  // t^{k-1} - (k-2)^2 t + 1/((k-1)^2 (2k-1)^2)
bool fk_negative_on_grid(int k, int n);

// Existence of eps > 0 with A s^2 + B s t + C t^2 >= eps (s^2 + t^2).
bool sclc_check(double A, double B, double C);

// Fixed library of 20 polynomial multipliers of degree <= 4 used as
// counterexample candidates.
std::vector<std::pair<std::string, ScalarField>> candidate_multipliers();

// Refinement levels clustering toward the degenerate loci; each level is a
// valid boundary sample set. For the omega domains the exact boundary curves
// are injected alongside projected box samples.
SampleLevels omega_refined_levels(int k, bool global, int levels, int n_per_level,
                                  std::uint64_t seed);
SampleLevels tanlog_refined_levels(int levels, int n_per_level, std::uint64_t seed);
SampleLevels refined_levels(const ScalarField& r, const Box4& box, DegenerateLocus locus,
                            int levels, int n_per_level, std::uint64_t seed);

}  // namespace pshlab
