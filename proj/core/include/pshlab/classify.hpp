#pragma once

#include <complex>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "pshlab/boundary.hpp"
#include "pshlab/cframe.hpp"
#include "pshlab/expr.hpp"

namespace pshlab {

struct TypeOptions {
  int max_order = 12;
  double tol_zero = 1e-7;
  double tol_bdry = kTolBdry;
};

enum class Strict4Verdict { Strict, Weak, NotApplicable };
enum class PointConvexity { StrictlyPseudoconvex, WeaklyPseudoconvex, NotPseudoconvex };

const char* to_string(Strict4Verdict v);
const char* to_string(PointConvexity v);

// Classification verdicts at one boundary point. Words over {L, Lbar} are
// written outermost-first ("LLb" is L applied to Lbar applied to lambda);
// they act on the ambient Levi field and are restricted to the point. Word
// values use the polynomial-coefficient tangential field r_w d/dz - r_z d/dw
// and its Levi form, a smooth positive rescaling of the canonical pair that
// leaves vanishing orders and all strictness thresholds unchanged.
struct TypeReport {
  Point4 point;
  PointConvexity convexity = PointConvexity::WeaklyPseudoconvex;
  std::optional<int> c_p;  // empty: exceeds max_order
  std::vector<std::pair<std::string, std::complex<double>>> lambda_derivs;
  Strict4Verdict strict4 = Strict4Verdict::NotApplicable;
  std::optional<bool> kohn4;
  std::complex<double> llbar_lambda{}, ll_lambda{};
  double tol_zero = 0, tol_bdry = 0;
  int max_order = 0;
};

// Smallest k with a nonvanishing order-(k-2) word; 2 when lambda(p) != 0.
// Returns nullopt when every word up to max_order - 2 is below threshold.
std::optional<int> point_type(const ScalarField& r, const Point4& p, const TypeOptions& opts = {});

TypeReport classify_point(const ScalarField& r, const Point4& p, const TypeOptions& opts = {});

struct ScanWitness {
  Point4 point;
  double value;
};

struct ScanResult {
  bool pass = false;
  std::vector<ScanWitness> witnesses;  // most negative samples on failure
  double min_lambda = 0;
};

// Pass iff lambda >= -tol at every sample.
ScanResult pseudoconvex_scan(const std::vector<BoundarySample>& samples, double tol);

// (L Lbar lambda, L L lambda) at p, by symbolic application of the frame
// fields to the ambient Levi form. The first value is real at a weakly
// pseudoconvex point (imaginary part checked to 1e-8).
std::pair<std::complex<double>, std::complex<double>> type4_inequality(
    const ScalarField& r, const Point4& p, const TypeOptions& opts = {});

Strict4Verdict strict_type4(const ScalarField& r, const Point4& p, const TypeOptions& opts = {});

// Threshold 4/3 variant.
bool kohn_strict_type4(const ScalarField& r, const Point4& p, const TypeOptions& opts = {});

// For r normalized by normalize_at: positive definiteness of the (x, y)
// Hessian of the Levi field restricted to {w = 0} at the origin.
bool strict4_coordinate_test(const ScalarField& r_normalized, const TypeOptions& opts = {});

}  // namespace pshlab
