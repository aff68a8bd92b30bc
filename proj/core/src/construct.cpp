#include "pshlab/construct.hpp"

#include <cmath>

namespace pshlab {

StrictType4Violation::StrictType4Violation(const Point4& witness_, double B_)
    : ExprError("strict type 4 violated: B = " + std::to_string(B_) +
                " is not bounded away from zero on the region"),
      witness(witness_),
      B(B_) {}

TypeExceeds4::TypeExceeds4(const Point4& witness_, double B_)
    : ExprError("type exceeds 4 on the region: B = " + std::to_string(B_) +
                " is not bounded away from zero"),
      witness(witness_),
      B(B_) {}

namespace {

struct BCheck {
  double min_value;
  Point4 argmin;
};

BCheck min_on_samples(const ScalarField& B, const std::vector<BoundarySample>& samples) {
  if (samples.empty()) throw PreconditionError("empty region sample set");
  Tape tape = Tape::compile(B);
  std::vector<double> scratch;
  BCheck out{std::numeric_limits<double>::infinity(), samples.front().point};
  for (const auto& s : samples) {
    double v;
    tape.eval(s.point, scratch, {&v, 1});
    if (v < out.min_value) {
      out.min_value = v;
      out.argmin = s.point;
    }
  }
  return out;
}

}  // namespace

MultiplierRecipe multiplier_strict4(const ScalarField& r, const std::vector<BoundarySample>& region,
                                    double tol, const std::optional<ComplexField>& F_override) {
  FrameFields ff = frame_fields(r);
  VectorFieldC L = {ff.L1, ff.L2};
  ScalarField lambda = levi_field(r);
  ComplexField lam = ComplexField::from_real(lambda);

  ComplexField Llam = apply_field(L, lam);
  ComplexField Lbarlam = apply_field_bar(L, lam);
  ComplexField LbarLlam = apply_field_bar(L, Llam);
  ComplexField LLlam = apply_field(L, Llam);
  ComplexField LLbarlam = apply_field(L, Lbarlam);

  ScalarField A1 = 2.0 * ((LbarLlam - LLlam) * Lbarlam).re();
  ScalarField A2 = 2.0 * (std::complex<double>(0, 1) * ((LbarLlam + LLlam) * Lbarlam)).re();
  ScalarField B = abs2(LLbarlam) - abs2(LLlam);

  BCheck bmin = min_on_samples(B, region);
  if (!(bmin.min_value > tol)) throw StrictType4Violation(bmin.argmin, bmin.min_value);

  ComplexField F;
  if (F_override) {
    F = *F_override;
  } else {
    LNHessianFields hln = hessian_LN_fields(r, ff);
    F = (constant(-2ll) / ff.norm_dr) * hln.h12;
  }

  MultiplierRecipe out;
  out.kind = F_override ? RecipeKind::UserGiven : RecipeKind::Strict4;
  out.h = F.re() * A1 / B + F.im() * A2 / B;
  out.ingredients["A1"] = A1;
  out.ingredients["A2"] = A2;
  out.ingredients["B"] = B;
  out.ingredients["F_re"] = F.re();
  out.ingredients["F_im"] = F.im();
  out.ingredients["Lambda"] = lambda;
  return out;
}

MultiplierRecipe multiplier_normal(const ScalarField& r, const std::vector<BoundarySample>& region,
                                   double tol) {
  FrameFields ff = frame_fields(r);
  VectorFieldC L = {ff.L1, ff.L2};
  ScalarField lambda = levi_field(r);
  ComplexField lam = ComplexField::from_real(lambda);

  ComplexField Llam = apply_field(L, lam);
  ComplexField LLlam = apply_field(L, Llam);
  ComplexField LLbarlam = apply_field(L, apply_field_bar(L, lam));

  ScalarField A = abs2(Llam);
  ScalarField B = lambda * lambda + abs2(LLbarlam) + abs2(LLlam);

  BCheck bmin = min_on_samples(B, region);
  if (!(bmin.min_value > tol)) throw TypeExceeds4(bmin.argmin, bmin.min_value);

  ScalarField nu_lambda = apply_real_field(ff.nu, lambda);
  ScalarField F = constant(-1ll) / ff.norm_dr * nu_lambda;

  MultiplierRecipe out;
  out.kind = RecipeKind::NormalDeriv;
  out.h = F * A / B;
  out.ingredients["A"] = A;
  out.ingredients["B"] = B;
  out.ingredients["F"] = F;
  out.ingredients["Lambda"] = lambda;
  return out;
}

ScalarField graft(const ScalarField& r, const ScalarField& h) { return r * exp(h); }

ScalarField bend(const ScalarField& rho, double C) {
  if (C == 0.0) return rho;
  return rho + (C / 2.0) * rho * rho;
}

Globalized globalize_quadratic(const ScalarField& r, double C, double D) {
  Globalized out;
  out.K2 = 3.0 * C + 1.0;
  out.K1 = 3.0 * out.K2 * D * D + 0.75 * C + 1.0;
  ScalarField absz2 = pow(coordinate(Var::x), 2) + pow(coordinate(Var::y), 2);
  ScalarField psi = constant(out.K1) + constant(out.K2) * absz2;
  out.rho = r + r * r * psi;
  return out;
}

namespace {
// max(s, floor) through |x| = sqrt(x^2); exact for arguments away from the
// kink, which is all the construction needs.
ScalarField smooth_max(const ScalarField& s, double floor_value) {
  ScalarField d = s - floor_value;
  ScalarField absd = sqrt(d * d);
  return 0.5 * (s + floor_value + absd);
}
}  // namespace

ScalarField cutoff_patch(const ScalarField& r, const ScalarField& h, double inner_radius,
                         double outer_radius, const Point4& center) {
  if (!(0.0 < inner_radius && inner_radius < outer_radius))
    throw PreconditionError("cutoff_patch: need 0 < inner_radius < outer_radius");
  ScalarField d2 = constant(0ll);
  const ScalarField coords[4] = {coordinate(Var::x), coordinate(Var::y), coordinate(Var::u),
                                 coordinate(Var::v)};
  const double c[4] = {center.x, center.y, center.u, center.v};
  for (int i = 0; i < 4; ++i) {
    ScalarField d = coords[i] - c[i];
    d2 = d2 + d * d;
  }
  ScalarField dist = sqrt(d2);
  ScalarField t = (dist - inner_radius) / (outer_radius - inner_radius);
  // Plateau mollifier G(1-t) / (G(1-t) + G(t)) with G(s) = exp(-1/s) clamped
  // at delta; exp(-1/delta) underflows to zero, which makes the plateaus
  // exact in double precision.
  const double delta = 1e-3;
  ScalarField g1 = exp(constant(-1ll) / smooth_max(1.0 - t, delta));
  ScalarField g0 = exp(constant(-1ll) / smooth_max(t, delta));
  ScalarField chi = g1 / (g1 + g0);
  return r * exp(chi * h);
}

ScalarField df_bump(const ScalarField& r, double K, double eta) {
  // eta = 1 degenerates to r + K r^2 and is accepted for that reduction.
  if (!(eta > 0.0 && eta <= 1.0)) throw PreconditionError("df_bump: eta must lie in (0, 1]");
  ScalarField base = -r - constant(K) * r * r;
  return -exp(constant(eta) * ln(base));
}

ScalarField df_bump_ext(const ScalarField& r, double K, double mu) {
  if (!(mu > 1.0)) throw PreconditionError("df_bump_ext: mu must exceed 1");
  ScalarField base = r + constant(K) * r * r;
  return exp(constant(mu) * ln(base));
}

}  // namespace pshlab
