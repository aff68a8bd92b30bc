#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "pshlab/boundary.hpp"
#include "pshlab/cframe.hpp"
#include "pshlab/expr.hpp"

namespace pshlab {

enum class RecipeKind { Strict4, NormalDeriv, UserGiven };

// A multiplier h together with the named fields it was assembled from, so a
// recipe can be audited and re-emitted.
struct MultiplierRecipe {
  RecipeKind kind = RecipeKind::UserGiven;
  ScalarField h;
  std::map<std::string, ScalarField> ingredients;
};

struct StrictType4Violation : ExprError {
  StrictType4Violation(const Point4& witness, double B);
  Point4 witness;
  double B;
};

struct TypeExceeds4 : ExprError {
  TypeExceeds4(const Point4& witness, double B);
  Point4 witness;
  double B;
};

// Multiplier solving L h = F + O(sqrt(lambda)) near a strict type 4 locus:
// h = Re(F) A1/B + Im(F) A2/B with
//   A1 = 2 Re((LbarL lambda - LL lambda) Lbar lambda),
//   A2 = 2 Re(i (LbarL lambda + LL lambda) Lbar lambda),
//   B  = |LLbar lambda|^2 - |LL lambda|^2,
//   F  = -(2/|dr|) H_r(L, N) unless overridden.
// Requires B > tol at every region sample.
MultiplierRecipe multiplier_strict4(const ScalarField& r,
                                    const std::vector<BoundarySample>& region, double tol = 1e-8,
                                    const std::optional<ComplexField>& F_override = {});

// Multiplier solving L h = O(sqrt(lambda)), LLbar h = F + O(sqrt(lambda)):
// h = F A/B with A = |L Lambda|^2, B = Lambda^2 + |LLbar Lambda|^2 +
// |LL Lambda|^2 and F = -(1/|dr|) nu H_r(L, L). Requires B > tol on the
// region (type <= 4).
MultiplierRecipe multiplier_normal(const ScalarField& r, const std::vector<BoundarySample>& region,
                                   double tol = 1e-8);

// rho = r e^h; same zero set.
ScalarField graft(const ScalarField& r, const ScalarField& h);

// rho + (C/2) rho^2: adds C |N rho|^2 to the (N, N) Hessian entry on {rho=0}.
ScalarField bend(const ScalarField& rho, double C);

struct Globalized {
  ScalarField rho;
  double K1 = 0, K2 = 0;
};

// rho = r + r^2 (K1 + K2 |z|^2) with K2 = 3C + 1 and K1 = 3 K2 D^2 + 3C/4 + 1.
Globalized globalize_quadratic(const ScalarField& r, double C, double D);

// r e^{chi h} with chi a smooth radial plateau bump: identically 1 inside
// inner_radius around center, identically 0 outside outer_radius.
ScalarField cutoff_patch(const ScalarField& r, const ScalarField& h, double inner_radius,
                         double outer_radius, const Point4& center);

// -(-r - K r^2)^eta for eta in (0, 1); valid where -r - K r^2 > 0.
ScalarField df_bump(const ScalarField& r, double K, double eta);
// (r + K r^2)^mu for mu > 1; valid where r + K r^2 > 0.
ScalarField df_bump_ext(const ScalarField& r, double K, double mu);

}  // namespace pshlab
