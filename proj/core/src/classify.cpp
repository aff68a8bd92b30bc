#include "pshlab/classify.hpp"

#include <algorithm>
#include <cmath>

namespace pshlab {

const char* to_string(Strict4Verdict v) {
  switch (v) {
    case Strict4Verdict::Strict: return "Strict";
    case Strict4Verdict::Weak: return "Weak";
    case Strict4Verdict::NotApplicable: return "NotApplicable";
  }
  return "?";
}

const char* to_string(PointConvexity v) {
  switch (v) {
    case PointConvexity::StrictlyPseudoconvex: return "strict";
    case PointConvexity::WeaklyPseudoconvex: return "weak";
    case PointConvexity::NotPseudoconvex: return "not-pseudoconvex";
  }
  return "?";
}

namespace {

void check_on_boundary(const ScalarField& r, const Point4& p, double tol_bdry) {
  double rv = eval(r, p);
  if (std::abs(rv) > tol_bdry)
    throw PreconditionError("point is off the boundary (|r(p)| = " + std::to_string(std::abs(rv)) +
                            ")");
}

// Word derivatives use the polynomial-coefficient tangential field
// L = r_w d/dz - r_z d/dw and its Levi form. Both are smooth nonvanishing
// rescalings of the canonical choices, so vanishing orders and the strict /
// Kohn type-4 thresholds are unchanged, while iterated derivatives of
// polynomial defining functions stay rational.
struct WordContext {
  VectorFieldC L;
  ScalarField lambda;
};

WordContext word_context(const ScalarField& r) {
  WordContext ctx;
  ctx.L = {dw(r), -dz(r)};
  ctx.lambda = levi_raw_field(r);
  return ctx;
}

// Conjugating every letter of a word conjugates its value on real fields, so
// only words whose innermost letter is L are built; mates are filled in by
// conjugation.
struct WordLevel {
  std::vector<std::string> words;  // outermost-first spelling
  std::vector<ComplexField> fields;
};

std::string flip_word(const std::string& w) {
  // Words are spelled with 'L' and 'b' (for Lbar).
  std::string out = w;
  for (char& c : out) c = (c == 'L') ? 'b' : 'L';
  return out;
}

std::string pretty_word(const std::string& w) {
  std::string out;
  for (char c : w) out += (c == 'L') ? "L" : "Lb";
  return out;
}

}  // namespace

std::optional<int> point_type(const ScalarField& r, const Point4& p, const TypeOptions& opts) {
  TypeReport rep = classify_point(r, p, opts);
  return rep.c_p;
}

TypeReport classify_point(const ScalarField& r, const Point4& p, const TypeOptions& opts) {
  check_on_boundary(r, p, opts.tol_bdry);
  FrameFields ff = frame_fields(r);
  if (!(eval(ff.grad2, p) > 1e-24)) throw DegenerateGradientError(p);

  TypeReport rep;
  rep.point = p;
  rep.tol_zero = opts.tol_zero;
  rep.tol_bdry = opts.tol_bdry;
  rep.max_order = opts.max_order;

  WordContext ctx = word_context(r);
  double lam0 = eval(ctx.lambda, p);
  double canonical_lambda = eval(levi_field(r), p);
  rep.lambda_derivs.emplace_back("", std::complex<double>(lam0, 0.0));

  if (canonical_lambda > opts.tol_zero)
    rep.convexity = PointConvexity::StrictlyPseudoconvex;
  else if (canonical_lambda < -opts.tol_zero)
    rep.convexity = PointConvexity::NotPseudoconvex;
  else
    rep.convexity = PointConvexity::WeaklyPseudoconvex;

  double scale_sofar = std::max(1.0, std::abs(lam0));
  std::optional<int> c_p;
  if (std::abs(lam0) > opts.tol_zero) {
    c_p = 2;
  } else {
    WordLevel level;
    level.words.push_back("L");
    level.fields.push_back(apply_field(ctx.L, ComplexField::from_real(ctx.lambda)));
    for (int order = 1; order <= opts.max_order - 2 && !c_p; ++order) {
      // Evaluate the whole level through one shared tape.
      std::vector<ScalarField> roots;
      roots.reserve(level.fields.size() * 2);
      for (const auto& f : level.fields) {
        roots.push_back(f.re());
        roots.push_back(f.im());
      }
      Tape tape = Tape::compile_fields(roots);
      std::vector<double> vals(roots.size());
      std::vector<double> scratch;
      tape.eval(p, scratch, vals);

      double level_max = 0;
      for (std::size_t i = 0; i < level.fields.size(); ++i) {
        std::complex<double> v{vals[2 * i], vals[2 * i + 1]};
        rep.lambda_derivs.emplace_back(pretty_word(level.words[i]), v);
        rep.lambda_derivs.emplace_back(pretty_word(flip_word(level.words[i])), std::conj(v));
        level_max = std::max(level_max, std::abs(v));
      }
      if (level_max > opts.tol_zero * scale_sofar) {
        c_p = order + 2;
        break;
      }
      scale_sofar = std::max(scale_sofar, level_max);

      if (order == opts.max_order - 2) break;
      WordLevel next;
      next.words.reserve(level.words.size() * 2);
      next.fields.reserve(level.fields.size() * 2);
      for (std::size_t i = 0; i < level.fields.size(); ++i) {
        next.words.push_back("L" + level.words[i]);
        next.fields.push_back(apply_field(ctx.L, level.fields[i]));
        next.words.push_back("b" + level.words[i]);
        next.fields.push_back(apply_field_bar(ctx.L, level.fields[i]));
      }
      level = std::move(next);
    }
  }
  rep.c_p = c_p;

  if (c_p && *c_p == 4) {
    auto [llbar, ll] = type4_inequality(r, p, opts);
    rep.llbar_lambda = llbar;
    rep.ll_lambda = ll;
    double scale = std::max({1.0, std::abs(llbar), std::abs(ll)});
    bool strict = llbar.real() - std::abs(ll) > opts.tol_zero * scale;
    rep.strict4 = strict ? Strict4Verdict::Strict : Strict4Verdict::Weak;
    rep.kohn4 = llbar.real() - (4.0 / 3.0) * std::abs(ll) > opts.tol_zero * scale;
  } else {
    rep.strict4 = Strict4Verdict::NotApplicable;
    rep.kohn4 = std::nullopt;
  }
  return rep;
}

ScanResult pseudoconvex_scan(const std::vector<BoundarySample>& samples, double tol) {
  if (samples.empty()) throw PreconditionError("pseudoconvex_scan: empty sample set");
  ScanResult out;
  out.min_lambda = samples.front().lambda;
  std::vector<ScanWitness> negatives;
  for (const auto& s : samples) {
    out.min_lambda = std::min(out.min_lambda, s.lambda);
    if (s.lambda < -tol) negatives.push_back({s.point, s.lambda});
  }
  std::sort(negatives.begin(), negatives.end(),
            [](const ScanWitness& a, const ScanWitness& b) { return a.value < b.value; });
  if (negatives.size() > 5) negatives.resize(5);
  out.witnesses = std::move(negatives);
  out.pass = out.witnesses.empty();
  return out;
}

std::pair<std::complex<double>, std::complex<double>> type4_inequality(const ScalarField& r,
                                                                       const Point4& p,
                                                                       const TypeOptions& opts) {
  check_on_boundary(r, p, opts.tol_bdry);
  WordContext ctx = word_context(r);
  double lam0 = eval(ctx.lambda, p);
  if (lam0 > opts.tol_zero * std::max(1.0, std::abs(lam0)) || lam0 < -opts.tol_zero)
    throw PreconditionError("type4_inequality: point is not weakly pseudoconvex (lambda = " +
                            std::to_string(lam0) + ")");
  ComplexField lam = ComplexField::from_real(ctx.lambda);
  ComplexField llbar = apply_field(ctx.L, apply_field_bar(ctx.L, lam));
  ComplexField ll = apply_field(ctx.L, apply_field(ctx.L, lam));
  std::complex<double> vllbar = eval(llbar, p);
  std::complex<double> vll = eval(ll, p);
  double scale = std::max({1.0, std::abs(vllbar), std::abs(vll)});
  if (std::abs(vllbar.imag()) > 1e-8 * scale)
    throw PreconditionError("type4_inequality: L Lbar lambda is not real at this point");
  return {vllbar, vll};
}

Strict4Verdict strict_type4(const ScalarField& r, const Point4& p, const TypeOptions& opts) {
  return classify_point(r, p, opts).strict4;
}

bool kohn_strict_type4(const ScalarField& r, const Point4& p, const TypeOptions& opts) {
  TypeReport rep = classify_point(r, p, opts);
  if (!rep.kohn4)
    throw PreconditionError("kohn_strict_type4: point is not of type 4");
  return *rep.kohn4;
}

bool strict4_coordinate_test(const ScalarField& r_normalized, const TypeOptions& opts) {
  Point4 origin{};
  double rv = eval(r_normalized, origin);
  std::complex<double> rz0 = eval(dz(r_normalized), origin);
  std::complex<double> rzz0 = eval(wirtinger(r_normalized, 2, 0, 0, 0), origin);
  if (std::abs(rv) > opts.tol_bdry || std::abs(rz0) > 1e-8 || std::abs(rzz0) > 1e-8)
    throw PreconditionError("strict4_coordinate_test: field is not normalized at the origin");
  ScalarField lam = levi_field(r_normalized);
  double axx = eval(diff(diff(lam, Var::x), Var::x), origin);
  double axy = eval(diff(diff(lam, Var::x), Var::y), origin);
  double ayy = eval(diff(diff(lam, Var::y), Var::y), origin);
  double scale = std::max({1.0, std::abs(axx), std::abs(ayy), std::abs(axy)});
  double det = axx * ayy - axy * axy;
  return axx > opts.tol_zero * scale && det > opts.tol_zero * scale * scale;
}

}  // namespace pshlab
