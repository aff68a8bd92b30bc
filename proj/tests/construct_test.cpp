#include "pshlab/construct.hpp"

#include <cmath>

#include "doctest.h"
#include "oracles.hpp"
#include "pshlab/certify.hpp"
#include "pshlab/dsl.hpp"
#include "pshlab/gallery.hpp"

using namespace pshlab;
using testing::Rng;

namespace {

std::vector<BoundarySample> ball_samples(const ScalarField& r, double radius, int n,
                                         std::uint64_t seed, bool include_origin = false) {
  Box4 box{{-radius, -radius, -radius, -radius}, {radius, radius, radius, radius}};
  SampleOptions opts;
  opts.seed = seed;
  SampleSet set = sample_boundary(r, box, n, opts);
  if (include_origin) {
    BoundarySample origin;
    origin.point = {0, 0, 0, 0};
    origin.frame = frame_at(r, origin.point);
    origin.lambda = eval(levi_field(r), origin.point);
    set.samples.push_back(origin);
  }
  return set.samples;
}

}  // namespace

TEST_CASE("multiplier_strict4 on strict type 4 fields") {
  ScalarField quart = parse_field("u + absz2^2");
  auto region = ball_samples(quart, 0.2, 200, 3, true);
  MultiplierRecipe rec = multiplier_strict4(quart, region);
  CHECK(rec.kind == RecipeKind::Strict4);
  REQUIRE(rec.ingredients.count("B") == 1);
  CHECK(eval(rec.ingredients.at("B"), {0, 0, 0, 0}) > 1.0);
  CHECK(std::isfinite(eval(rec.h, {0.05, 0.02, 0, 0.01})));

  // L h = F + O(sqrt(lambda)): the squared residual is O(lambda).
  FrameFields ff = frame_fields(quart);
  ComplexField Lh = apply_field({ff.L1, ff.L2}, ComplexField::from_real(rec.h));
  ComplexField F{rec.ingredients.at("F_re"), rec.ingredients.at("F_im")};
  ScalarField resid2 = abs2(Lh - F);
  Box4 box{{-0.2, -0.2, -0.05, -0.2}, {0.2, 0.2, 0.02, 0.2}};
  SampleLevels levels = refined_levels(quart, box, DegenerateLocus::ZAxis, 3, 300, 17);
  Certificate cert = ratio_O(ConditionId::RatioO, resid2, levi_field(quart), levels);
  CHECK(cert.pass());

  // Same construction on the model family at a = 1.
  ScalarField model = gallery_make("model", {{"a", "1"}}).field;
  auto mregion = ball_samples(model, 0.2, 200, 5, true);
  MultiplierRecipe mrec = multiplier_strict4(model, mregion);
  SampleLevels mlevels = refined_levels(model, box, DegenerateLocus::ZAxis, 3, 300, 19);
  ComplexField mLh =
      apply_field({frame_fields(model).L1, frame_fields(model).L2}, ComplexField::from_real(mrec.h));
  ComplexField mF{mrec.ingredients.at("F_re"), mrec.ingredients.at("F_im")};
  Certificate mcert = ratio_O(ConditionId::RatioO, abs2(mLh - mF), levi_field(model), mlevels);
  CHECK(mcert.pass());
}

TEST_CASE("multiplier_strict4 rejects weak type 4 regions") {
  GalleryEntry tanlog = gallery_make("tanlog");
  Box4 box{{-0.3, -0.3, -0.3, -0.3}, {0.3, 0.3, 0.3, 0.3}};
  SampleOptions opts;
  opts.seed = 7;
  opts.locus = DegenerateLocus::XEqualsV;
  SampleSet set = sample_boundary(tanlog.field, box, 80, opts);
  BoundarySample origin;
  origin.point = {0, 0, 0, 0};
  origin.frame = frame_at(tanlog.field, origin.point);
  origin.lambda = 0;
  set.samples.push_back(origin);
  CHECK_THROWS_AS(multiplier_strict4(tanlog.field, set.samples), StrictType4Violation);
  try {
    multiplier_strict4(tanlog.field, set.samples);
  } catch (const StrictType4Violation& e) {
    CHECK(e.B < 1e-8);  // witness carries the minimal B
  }
}

TEST_CASE("multiplier_strict4 with a user-given right-hand side") {
  // F = 0 forces h = 0 regardless of the frame data.
  ScalarField quart = parse_field("u + absz2^2");
  auto region = ball_samples(quart, 0.2, 60, 9);
  ComplexField zero{constant(0ll), constant(0ll)};
  MultiplierRecipe rec = multiplier_strict4(quart, region, 1e-8, zero);
  CHECK(rec.kind == RecipeKind::UserGiven);
  Rng rng(3);
  for (int i = 0; i < 10; ++i) CHECK(eval(rec.h, rng.point(0.2)) == 0.0);
}

TEST_CASE("multiplier_normal on type <= 4 fields") {
  ScalarField quart = parse_field("u + absz2^2");
  auto region = ball_samples(quart, 0.2, 150, 11, true);
  MultiplierRecipe rec = multiplier_normal(quart, region);
  CHECK(rec.kind == RecipeKind::NormalDeriv);
  CHECK(eval(rec.ingredients.at("B"), {0, 0, 0, 0}) > 1.0);

  // Both equations of the construction certify against lambda.
  FrameFields ff = frame_fields(quart);
  VectorFieldC L{ff.L1, ff.L2};
  ComplexField Lh = apply_field(L, ComplexField::from_real(rec.h));
  ComplexField LLbar_h = apply_field(L, apply_field_bar(L, ComplexField::from_real(rec.h)));
  ScalarField F = rec.ingredients.at("F");
  Box4 box{{-0.2, -0.2, -0.05, -0.2}, {0.2, 0.2, 0.02, 0.2}};
  SampleLevels levels = refined_levels(quart, box, DegenerateLocus::ZAxis, 3, 300, 23);
  CHECK(ratio_O(ConditionId::RatioO, abs2(Lh), levi_field(quart), levels).pass());
  ScalarField eq2 = abs2(LLbar_h - ComplexField{F, constant(0ll)});
  CHECK(ratio_O(ConditionId::RatioO, eq2, levi_field(quart), levels).pass());

  // Strictly pseudoconvex case: defined, with a small multiplier.
  ScalarField ball = parse_field("u + absz2");
  auto bregion = ball_samples(ball, 0.3, 100, 13, true);
  MultiplierRecipe brec = multiplier_normal(ball, bregion);
  for (const auto& s : bregion) CHECK(std::abs(eval(brec.h, s.point)) < 1.0);

  // Type 6 at the origin: B degenerates.
  ScalarField sext = parse_field("u + absz2^3");
  auto sregion = ball_samples(sext, 0.15, 100, 15, true);
  CHECK_THROWS_AS(multiplier_normal(sext, sregion), TypeExceeds4);
}

TEST_CASE("graft") {
  ScalarField r = parse_field("u + absz2^2");
  ScalarField same = graft(r, constant(0ll));
  CHECK(same.root() == r.root());

  GalleryEntry tanlog = gallery_make("tanlog");
  ScalarField rho = graft(tanlog.field, parse_field("y+u"));
  SampleOptions opts;
  opts.seed = 21;
  opts.tol_bdry = 1e-12;
  Box4 box{{-1, -0.5, -1, -1}, {1, 0.5, 1, 1}};
  SampleSet set = sample_boundary(tanlog.field, box, 50, opts);
  for (const auto& s : set.samples) CHECK(std::abs(eval(rho, s.point)) <= 1e-10);
}

TEST_CASE("bend") {
  ScalarField rho = graft(parse_field("u + absz2^2"), parse_field("x"));
  CHECK(bend(rho, 0.0).root() == rho.root());

  double C = 3.5;
  ScalarField bent = bend(rho, C);
  SampleOptions opts;
  opts.seed = 23;
  Box4 box{{-0.3, -0.3, -0.1, -0.3}, {0.3, 0.3, 0.05, 0.3}};
  SampleSet set = sample_boundary(rho, box, 40, opts);
  REQUIRE(set.samples.size() >= 35);
  for (const auto& s : set.samples) {
    HermitianMatrix2 before = hessian_matrix_LN(rho, s.point, &rho);
    HermitianMatrix2 after = hessian_matrix_LN(bent, s.point, &rho);
    double nrho2 = s.frame.norm_dr * s.frame.norm_dr / 4.0;  // |N rho|^2 on the zero set
    CHECK(std::abs(after.h11 - before.h11) < 1e-8);
    CHECK(std::abs(after.h12 - before.h12) < 1e-8);
    CHECK(after.h22 - before.h22 == doctest::Approx(C * nrho2).epsilon(1e-8));
  }
}

TEST_CASE("globalize_quadratic") {
  Globalized g = globalize_quadratic(parse_field("u + absz2"), 1.0, 1.0);
  CHECK(g.K2 == doctest::Approx(4.0));
  CHECK(g.K1 == doctest::Approx(13.75));

  // C = 0 margin policy.
  Globalized g0 = globalize_quadratic(parse_field("u + absz2"), 0.0, 1.0);
  CHECK(g0.K2 == doctest::Approx(1.0));
  CHECK(g0.K1 == doctest::Approx(4.0));

  // The output is plurisubharmonic on the shrunken region 1 + 2 r psi in
  // [1/2, 3/2] near the boundary.
  ScalarField psi = constant(g.K1) + constant(g.K2) * parse_field("absz2");
  Rng rng(9);
  std::vector<Point4> pts;
  while (pts.size() < 500) {
    Point4 p = rng.point(0.45);
    double rv = eval(parse_field("u + absz2"), p);
    double gate = 1.0 + 2.0 * rv * eval(psi, p);
    if (gate >= 0.5 && gate <= 1.5) pts.push_back(p);
  }
  Certificate cert = psh_open_scan(g.rho, pts, 1e-8);
  CHECK(cert.pass());
  Certificate cert0 = psh_open_scan(g0.rho, pts, 1e-8);
  CHECK(cert0.pass());
}

TEST_CASE("cutoff_patch") {
  ScalarField r = parse_field("u + absz2^2");
  ScalarField h = parse_field("x + y^2");
  CHECK_THROWS_AS(cutoff_patch(r, h, 0.5, 0.2, Point4{}), PreconditionError);

  ScalarField trivial = cutoff_patch(r, constant(0ll), 0.1, 0.2, Point4{});
  Rng rng(19);
  for (int i = 0; i < 10; ++i) {
    Point4 p = rng.point(0.3);
    CHECK(eval(trivial, p) == eval(r, p));
  }

  ScalarField patched = cutoff_patch(r, h, 0.1, 0.3, Point4{});
  ScalarField grafted = graft(r, h);
  for (int i = 0; i < 200; ++i) {
    Point4 p = rng.point(0.45);
    double d = norm(p);
    double pv = eval(patched, p);
    if (d < 0.1) {
      CHECK(pv == eval(grafted, p));  // exact inside the plateau
    } else if (d > 0.3) {
      CHECK(pv == eval(r, p));  // exact outside the support
    } else {
      double lo = std::min(eval(grafted, p), eval(r, p));
      double hi = std::max(eval(grafted, p), eval(r, p));
      CHECK(pv >= lo - 1e-12);
      CHECK(pv <= hi + 1e-12);
    }
  }

  // Numerical smoothness across the clamp radii: second differences of the
  // patch along a radial line stay continuous.
  auto g = [&](double t) { return eval(patched, {t, 0.02, 0.01, 0.0}); };
  for (double radius : {0.1, 0.3}) {
    double step = 1e-4;
    double before = (g(radius - 2 * step) - 2 * g(radius - step) + g(radius)) / (step * step);
    double after = (g(radius) - 2 * g(radius + step) + g(radius + 2 * step)) / (step * step);
    CHECK(std::abs(after - before) < 1e-3 * (1.0 + std::abs(before)));
  }
}

TEST_CASE("df_bump fields") {
  ScalarField u = parse_field("u");
  ScalarField bump = df_bump(u, 0.0, 0.5);
  CHECK(eval(bump, {0, 0, -0.25, 0}) == doctest::Approx(-0.5).epsilon(1e-12));
  CHECK_THROWS_AS(eval(bump, Point4{0, 0, 0.1, 0}), DomainError);

  // Interior plurisubharmonicity for the flat model at several exponents.
  Rng rng(29);
  std::vector<Point4> interior;
  while (interior.size() < 200) {
    Point4 p = rng.point(0.4);
    if (p.u < -0.01) interior.push_back(p);
  }
  for (double eta : {0.3, 0.5, 0.9}) {
    Certificate c = df_check(u, 0.0, eta, interior);
    CHECK(c.pass());
  }

  // eta = 1 reduces to r + K r^2.
  ScalarField reduced = df_bump(u, 2.0, 1.0);
  ScalarField direct = u + 2.0 * u * u;
  for (int i = 0; i < 20; ++i) {
    Point4 p = rng.point(0.3);
    if (p.u >= -1e-3) continue;
    CHECK(eval(reduced, p) == doctest::Approx(eval(direct, p)).epsilon(1e-13));
  }

  // Exterior variant.
  std::vector<Point4> exterior;
  while (exterior.size() < 200) {
    Point4 p = rng.point(0.4);
    if (p.u > 0.01) exterior.push_back(p);
  }
  CHECK(df_check_ext(u, 0.0, 2.0, exterior).pass());
  CHECK_THROWS_AS(df_bump_ext(u, 0.0, 0.5), PreconditionError);
}

TEST_CASE("zero set preservation across the constructions") {
  GalleryEntry omega = gallery_make("omega_local", {{"k", "3"}});
  SampleOptions opts;
  opts.seed = 31;
  opts.tol_bdry = 1e-12;
  Box4 box{{-0.1, -0.1, -0.05, -0.1}, {0.1, 0.1, 0.02, 0.1}};
  SampleSet set = sample_boundary(omega.field, box, 60, opts);
  REQUIRE(set.samples.size() >= 55);

  ScalarField h = parse_field("x - 0.5*v");
  ScalarField grafted = graft(omega.field, h);
  ScalarField bent = bend(grafted, 1.5);
  ScalarField patched = cutoff_patch(omega.field, h, 0.05, 0.2, Point4{});
  for (const auto& s : set.samples) {
    CHECK(std::abs(eval(grafted, s.point)) <= 1e-10);
    CHECK(std::abs(eval(bent, s.point)) <= 1e-10);
    CHECK(std::abs(eval(patched, s.point)) <= 1e-10);
  }
}
