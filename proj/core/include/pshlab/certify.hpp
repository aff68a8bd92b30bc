#pragma once

#include <optional>
#include <string>
#include <vector>

#include "pshlab/boundary.hpp"
#include "pshlab/cframe.hpp"
#include "pshlab/expr.hpp"

namespace pshlab {

inline constexpr double kLambdaMin = 1e-12;
inline constexpr double kGrowthCap = 2.0;
inline constexpr double kPsdTol = 1e-8;

enum class ConditionId {
  PsdBoundary,   // Hessian matrix psd at boundary samples
  PshOpen,       // coordinate Hessian psd on an open sample set
  PshBoundary,   // |H(L,N)|^2 = O(lambda)
  NormalDeriv,   // |nu H(L,L)|^2 = O(lambda)
  BasicEstimate, // H(xi,xi) >= -C(r^2|xi|^2 + |<dr,xi>|^2)
  Sesqui,        // H^R(Y,T)^2 + H^R(X,T)^2 = O(lambda)
  RealCoords,    // (H^R(X,nu)+H^R(Y,T))^2 + (H^R(Y,nu)-H^R(X,T))^2 = O(lambda)
  HxHy,          // first-order multiplier equations, residual O(lambda)
  Type6Normal,   // nu H(L,L)(p0) = 0 at type >= 6
  DfBump,        // -(-r-Kr^2)^eta plurisubharmonic inside
  RatioO,        // generic empirical O(.) ratio certificate
};

const char* to_string(ConditionId id);

enum class Verdict { Pass, Fail, Inconclusive };
const char* to_string(Verdict v);

struct Witness {
  Point4 point;
  double value = 0;
  std::string what;
};

struct LevelStats {
  int n_samples = 0;
  double max_ratio = 0;          // C_l over samples with |g| > lambda_min
  Point4 argmax{};
  double argmax_num = 0, argmax_den = 0;
  double max_residual = 0;       // max |f| over samples with |g| <= lambda_min
  int count_below_lambda_min = 0;
  double min_abs_g = 0;
};

struct Certificate {
  ConditionId condition = ConditionId::RatioO;
  Verdict verdict = Verdict::Inconclusive;
  std::vector<LevelStats> levels;
  std::vector<Witness> witnesses;
  double tol = 0, lambda_min = 0, growth_cap = 0;
  double empirical_constant = 0;  // best observed C (or c for coercivity)
  std::string note;

  bool pass() const { return verdict == Verdict::Pass; }
};

using SampleLevels = std::vector<std::vector<BoundarySample>>;
using PointLevels = std::vector<std::vector<Point4>>;

// --- pointwise positivity ----------------------------------------------------

// Pass iff every (L,N)-frame Hessian of rho has min eigenvalue
// >= -tol (1 + ||matrix||) at the samples.
Certificate psd_on_samples(const ScalarField& rho, const std::vector<BoundarySample>& samples,
                           double tol = kPsdTol, const ScalarField* reference = nullptr);

// Pass iff the coordinate-basis complex Hessian of rho is psd up to tol at
// every point of an open sample set; reports the best empirical coercivity
// constant where defined.
Certificate psh_open_scan(const ScalarField& rho, const std::vector<Point4>& points,
                          double tol = kPsdTol);

// --- empirical Landau-class certificates --------------------------------------

// Core ratio check across refinement levels: per level,
// C_l = max_{|g|>lambda_min} |f|/|g|, residual_l = max_{|g|<=lambda_min} |f|.
// Pass iff C_{l+1} <= growth_cap C_l and residuals decay within factor 2.
Certificate ratio_O(ConditionId id, const ScalarField& numerator, const ScalarField& denominator,
                    const SampleLevels& levels, double lambda_min = kLambdaMin,
                    double growth_cap = kGrowthCap);

// |H_rho(L,N)|^2 = O(H_rho(L,L)) on the boundary.
Certificate cond_psh_boundary(const ScalarField& rho, const SampleLevels& levels,
                              double lambda_min = kLambdaMin, double growth_cap = kGrowthCap);

// Smallest grid C with det/trace of the bent Hessian admissible at all
// samples; throws when no C <= 2^20 works.
double required_C(const ScalarField& rho, const std::vector<BoundarySample>& samples,
                  double tol = kPsdTol);

// |nu H_rho(L,L)|^2 = O(H_rho(L,L)) on the boundary.
Certificate cond_normal(const ScalarField& rho, const SampleLevels& levels,
                        double lambda_min = kLambdaMin, double growth_cap = kGrowthCap);

// Empirical smallest C in the one-sided Hessian bound, over a fixed,
// versioned direction grid ("dirgrid/1": frame directions plus 64
// quasi-uniform directions).
struct BasicEstimate {
  double C = 0;
  bool diverging = false;
  bool inconclusive = false;
  double skipped_fraction = 0;
  std::vector<double> level_C;
};
BasicEstimate basic_estimate_C(const ScalarField& r, const PointLevels& mixed_levels);

// Mixed interior/exterior/boundary levels for basic_estimate_C: boundary
// samples pushed along -nu and +nu by signed distances drawn from shrinking
// decade windows base_delta * 10^{-level} * [0.1, 1].
PointLevels offset_levels(const std::vector<BoundarySample>& boundary, int levels,
                          double base_delta, std::uint64_t seed);

// (H^R(Y,T))^2 + (H^R(X,T))^2 = O(lambda).
Certificate cond_sesqui(const ScalarField& rho, const SampleLevels& levels,
                        double lambda_min = kLambdaMin, double growth_cap = kGrowthCap);

// (H^R(X,nu)+H^R(Y,T))^2 + (H^R(Y,nu)-H^R(X,T))^2 = O(lambda).
Certificate cond_real_coords(const ScalarField& rho, const SampleLevels& levels,
                             double lambda_min = kLambdaMin, double growth_cap = kGrowthCap);

// Residuals of the two first-order equations for a candidate multiplier h:
//  X h = -(H^R(X,nu)+H^R(Y,T))/|dr| + O(sqrt(lambda)),
//  Y h = (H^R(X,T)-H^R(Y,nu))/|dr| + O(sqrt(lambda)).
Certificate check_hx_hy(const ScalarField& r, const ScalarField& h, const SampleLevels& levels,
                        double lambda_min = kLambdaMin, double growth_cap = kGrowthCap);

// nu H_r(L,L)(p0) = 0 at points of type >= 6.
struct Type6Result {
  bool applicable = false;
  double value = 0;
  bool pass = false;
};
Type6Result type6_normal_vanish(const ScalarField& r, const Point4& p0, double tol = 1e-10,
                                int max_order = 12);

// psd scan of the bumped field on interior samples.
Certificate df_check(const ScalarField& r, double K, double eta, const std::vector<Point4>& interior,
                     double tol = kPsdTol);
Certificate df_check_ext(const ScalarField& r, double K, double mu,
                         const std::vector<Point4>& exterior, double tol = kPsdTol);

// Smallest K on {0, 1, 2, 4, ...} <= k_max with a passing df_check.
std::optional<double> df_select_K(const ScalarField& r, double eta,
                                  const std::vector<Point4>& interior, double k_max = 16.0,
                                  double tol = kPsdTol);

}  // namespace pshlab
