#include "pshlab/gallery.hpp"

#include <algorithm>
#include <cmath>

#include "pshlab/dsl.hpp"

namespace pshlab {

namespace {

constexpr double kPi = 3.14159265358979323846;

int parse_int_param(const std::map<std::string, std::string>& params, const std::string& name,
                    int fallback, bool required) {
  auto it = params.find(name);
  if (it == params.end()) {
    if (required) throw GalleryError("missing parameter '" + name + "'");
    return fallback;
  }
  return std::stoi(it->second);
}

// "4/3" stays exact; otherwise double.
ScalarField parse_coeff(const std::string& text) {
  auto slash = text.find('/');
  if (slash != std::string::npos) {
    long long num = std::stoll(text.substr(0, slash));
    long long den = std::stoll(text.substr(slash + 1));
    return constant(num, den);
  }
  // Integers and short decimals also go through the exact path.
  return parse_field(text);
}

ScalarField absz2_field() {
  return pow(coordinate(Var::x), 2) + pow(coordinate(Var::y), 2);
}

ScalarField omega_field(int k, bool global) {
  if (k < 3) throw GalleryError("omega domains need k >= 3");
  ScalarField s = absz2_field();
  ScalarField u = coordinate(Var::u);
  ScalarField v = coordinate(Var::v);
  ScalarField r = u + constant(1, 1ll * k * k) * pow(s, k) -
                  constant(2, 1ll * (k - 1) * (k - 1)) * pow(s, k - 1) * v +
                  constant(1, 1ll * (k - 2) * (k - 2)) * pow(s, k - 2) * v * v +
                  pow(s, 2 * k - 1);
  if (global) r = r + u * u + v * v;
  return r;
}

ScalarField tanlog_field() {
  ScalarField x = coordinate(Var::x);
  ScalarField u = coordinate(Var::u);
  ScalarField v = coordinate(Var::v);
  ScalarField r = u - constant(1, 2) * pow(x - v, 2) - ln(cos(x));
  Box4 region;
  region.lo = {-1.5707, -1e3, -1e3, -1e3};
  region.hi = {1.5707, 1e3, 1e3, 1e3};
  return r.with_region(region);
}

ScalarField model_field(const ScalarField& a) {
  ScalarField x = coordinate(Var::x);
  ScalarField y = coordinate(Var::y);
  ScalarField s = absz2_field();
  // Re(a z^3 zbar) = a Re(z^2) |z|^2 for real a.
  return coordinate(Var::u) + a * (x * x - y * y) * s + pow(s, 2);
}

}  // namespace

double mu_k(int k) { return 1.0 / (static_cast<double>(k - 1) * (k - 2)); }

double omega_lambda_min(int k) { return k == 3 ? 1e-14 : (k == 4 ? 1e-18 : 1e-21); }

std::vector<std::string> gallery_ids() {
  return {"omega_local", "omega_global", "tanlog", "model", "tube"};
}

GalleryEntry gallery_make(const std::string& id, const std::map<std::string, std::string>& params) {
  GalleryEntry e;
  e.id = id;
  e.params = params;
  if (id == "omega_local" || id == "omega_global") {
    int k = parse_int_param(params, "k", 3, false);
    bool global = id == "omega_global";
    e.field = omega_field(k, global);
    e.degenerate_locus = DegenerateLocus::ZAxis;
    e.properties = {
        "pseudoconvex near 0",
        "finite type 2k at the origin (k = " + std::to_string(k) + ")",
        global ? "bounded with real-analytic boundary"
               : "local model near the origin",
        "no C2 local defining function is plurisubharmonic on the boundary near 0 "
        "(loop-integral obstruction)",
    };
  } else if (id == "tanlog") {
    e.field = tanlog_field();
    e.degenerate_locus = DegenerateLocus::XEqualsV;
    e.properties = {
        "pseudoconvex; strictly pseudoconvex off the locus x = v",
        "weak type 4 at the origin",
        "admits defining functions plurisubharmonic on the boundary (multiplier depends on y)",
        "not sesquiconvex at 0",
    };
  } else if (id == "model") {
    auto it = params.find("a");
    ScalarField a = it == params.end() ? constant(1ll) : parse_coeff(it->second);
    e.field = model_field(a);
    e.degenerate_locus = DegenerateLocus::ZAxis;
    e.properties = {
        "pseudoconvex at 0 iff |a| <= 4/3",
        "strict type 4 at 0 iff |a| < 4/3",
        "strict type 4 in the Kohn sense iff |a| < 1",
    };
  } else if (id == "tube") {
    auto it = params.find("f");
    if (it == params.end()) throw GalleryError("tube requires parameter f (DSL expression)");
    e.field = coordinate(Var::u) + parse_field(it->second);
    e.properties = {
        "rigid tube: Hessian acts through f alone",
        "plurisubharmonic defining function whenever f is subharmonic",
    };
  } else {
    throw GalleryError("unknown gallery id '" + id + "'");
  }
  return e;
}

Certificate levi_lower_bound_check(int k, const std::vector<BoundarySample>& samples) {
  if (samples.empty()) throw PreconditionError("levi_lower_bound_check: empty sample set");
  ScalarField r = omega_field(k, false);
  ScalarField lhs = levi_raw_field(r);
  ScalarField s = absz2_field();
  ScalarField a = s - coordinate(Var::v);
  ScalarField rhs = constant(1, 8) * pow(s, k - 3) * (a * a + pow(s, k + 1));
  Tape tape = Tape::compile({lhs, rhs});
  std::vector<double> scratch;

  Certificate cert;
  cert.condition = ConditionId::RatioO;
  cert.note = "levi-lower-bound";
  cert.tol = 1e-12;
  LevelStats st;
  st.n_samples = static_cast<int>(samples.size());
  double worst = std::numeric_limits<double>::infinity();
  Point4 worst_p{};
  for (const auto& smp : samples) {
    double out[2];
    tape.eval(smp.point, scratch, out);
    double margin = out[0] - out[1];
    if (margin < worst) {
      worst = margin;
      worst_p = smp.point;
      st.argmax = smp.point;
      st.argmax_num = out[0];
      st.argmax_den = out[1];
    }
  }
  cert.levels.push_back(st);
  cert.empirical_constant = worst;
  if (worst >= -1e-12) {
    cert.verdict = Verdict::Pass;
  } else {
    cert.verdict = Verdict::Fail;
    cert.witnesses.push_back({worst_p, worst, "Levi form below the closed-form lower bound"});
  }
  return cert;
}

Point4 boundary_curve(int k, double sigma, double t, CurveBranch branch, bool global) {
  if (k < 3) throw GalleryError("boundary_curve: k >= 3");
  double s2 = sigma * sigma;
  double ck = 1.0 / (1.0 * k * k) - 2.0 / (1.0 * (k - 1) * (k - 1)) + 1.0 / (1.0 * (k - 2) * (k - 2));
  double u;
  if (!global) {
    if (branch == CurveBranch::Upper)
      throw GalleryError("boundary_curve: the local domain has a single u-branch (use Lower)");
    u = -ck * std::pow(sigma, 2 * k) - std::pow(sigma, 4 * k - 2);
  } else {
    double Q = ck * std::pow(sigma, 2 * k) + std::pow(sigma, 4 * k - 2) + s2 * s2;
    double disc = 1.0 - 4.0 * Q;
    if (disc < 0.0)
      throw GalleryError("boundary_curve: sigma too large, no real u-branch on the boundary");
    double root = std::sqrt(disc);
    u = branch == CurveBranch::Lower ? 0.5 * (-1.0 + root) : 0.5 * (-1.0 - root);
  }
  return {sigma * std::cos(t), sigma * std::sin(t), u, s2};
}

double loop_integral(const HzFunction& hz, int k, double sigma, int quadrature_n,
                     CurveBranch branch, bool global) {
  if (quadrature_n < 64) throw PreconditionError("loop_integral: quadrature_n >= 64 required");
  double acc = 0;
  for (int j = 0; j < quadrature_n; ++j) {
    double t = 2.0 * kPi * j / quadrature_n;
    Point4 gamma = boundary_curve(k, sigma, t, branch, global);
    std::complex<double> zeta{sigma * std::cos(t), sigma * std::sin(t)};
    std::complex<double> dgamma1{-sigma * std::sin(t), sigma * std::cos(t)};  // i sigma e^{it}
    acc += 2.0 * std::real(hz(zeta, gamma) * dgamma1);
  }
  return acc * 2.0 * kPi / quadrature_n;
}

double loop_integral_field(const ScalarField& h, int k, double sigma, int quadrature_n,
                           CurveBranch branch, bool global) {
  ComplexField hz = dz(h);
  Tape tape = Tape::compile({hz.re(), hz.im()});
  std::vector<double> scratch;
  return loop_integral(
      [&](std::complex<double>, const Point4& p) {
        double out[2];
        tape.eval(p, scratch, out);
        return std::complex<double>{out[0], out[1]};
      },
      k, sigma, quadrature_n, branch, global);
}

std::complex<double> forced_obstruction_hz(int k, std::complex<double> zeta) {
  double az = std::abs(zeta);
  return std::complex<double>(0, -2.0 * mu_k(k)) * std::conj(zeta) * std::pow(az, 2 * k - 4);
}

std::vector<double> obstruction_scaling(int k, const std::vector<double>& sigmas, int quadrature_n) {
  std::vector<double> out;
  out.reserve(sigmas.size());
  for (double sigma : sigmas) {
    double value = loop_integral(
        [k](std::complex<double> zeta, const Point4&) { return forced_obstruction_hz(k, zeta); }, k,
        sigma, quadrature_n);
    out.push_back(value / (8.0 * kPi * mu_k(k) * std::pow(sigma, 2 * k - 2)));
  }
  return out;
}

GlobalBounds global_bounds_check(int k, const std::vector<BoundarySample>& samples) {
  if (samples.empty()) throw PreconditionError("global_bounds_check: empty sample set");
  GlobalBounds out;
  out.bound_z2 = std::pow(4.0, -1.0 / (2.0 * k - 1.0));
  out.min_u = samples.front().point.u;
  out.max_u = samples.front().point.u;
  for (const auto& s : samples) {
    double z2 = s.point.x * s.point.x + s.point.y * s.point.y;
    out.max_abs_z2 = std::max(out.max_abs_z2, z2);
    out.max_abs_v = std::max(out.max_abs_v, std::abs(s.point.v));
    out.min_u = std::min(out.min_u, s.point.u);
    out.max_u = std::max(out.max_u, s.point.u);
  }
  const double slack = 1e-9;
  out.pass = out.max_abs_z2 <= out.bound_z2 + slack && out.max_abs_v <= 0.5 + slack &&
             out.min_u >= -1.0 - slack && out.max_u <= slack;
  return out;
}

double fk_value(int k, double t) {
  return std::pow(t, k - 1) - 1.0 * (k - 2) * (k - 2) * t +
         1.0 / (1.0 * (k - 1) * (k - 1) * (2 * k - 1) * (2 * k - 1));
}

bool fk_negative_on_grid(int k, int n) {
  double lo = 0.1, hi = std::pow(4.0, -1.0 / (2.0 * k - 1.0));
  for (int i = 0; i < n; ++i) {
    double t = lo + (hi - lo) * (i + 1.0) / n;  // half-open (1/10, hi]
    if (!(fk_value(k, t) < 0.0)) return false;
  }
  return true;
}

GlobalPscResult global_psc_check(int k, const std::vector<BoundarySample>& samples, int fk_grid_n) {
  if (samples.empty()) throw PreconditionError("global_psc_check: empty sample set");
  ScalarField r = omega_field(k, true);
  ScalarField lhs = levi_raw_field(r);
  Tape tape = Tape::compile(lhs);
  std::vector<double> scratch;

  GlobalPscResult out;
  out.case1_eps = std::numeric_limits<double>::infinity();
  out.case1_pass = true;
  out.case2_pass = true;
  double worst_margin = std::numeric_limits<double>::infinity();
  for (const auto& s : samples) {
    double z2 = s.point.x * s.point.x + s.point.y * s.point.y;
    double a = z2 - s.point.v;
    double az = std::sqrt(z2);
    if (az < 0.1 && std::abs(a) < 0.1) {
      ++out.case1_count;
      double den = std::pow(az, 2 * k - 6) * (a * a + std::pow(az, 2 * k + 2));
      if (den < 1e-300) continue;  // the origin itself carries no information
      double lv;
      tape.eval(s.point, scratch, {&lv, 1});
      double ratio = lv / den;
      if (ratio < out.case1_eps) {
        out.case1_eps = ratio;
        if (ratio <= 0) {
          out.case1_pass = false;
          out.worst = {s.point, lv, "near-degenerate Levi ratio not positive"};
        }
      }
    } else {
      ++out.case2_count;
      double d = (1.0 - std::pow(az, 2 * k - 4) / ((k - 2.0) * (k - 2.0))) * a * a -
                 2.0 * std::pow(az, 2 * k - 2) / ((k - 1.0) * (k - 2.0) * (k - 2.0)) * std::abs(a) +
                 ((2.0 * k - 1.0) * (2.0 * k - 1.0) * std::pow(az, 2 * k + 2) -
                  std::pow(az, 2 * k) / ((k - 1.0) * (k - 1.0) * (k - 2.0) * (k - 2.0)));
      if (d < worst_margin) {
        worst_margin = d;
        if (d <= 0) {
          out.case2_pass = false;
          out.worst = {s.point, d, "far-region determinant minorant not positive"};
        }
      }
    }
  }
  if (!std::isfinite(out.case1_eps)) out.case1_eps = 0;
  out.fk_pass = fk_negative_on_grid(k, fk_grid_n);
  out.pass = out.case1_pass && out.case2_pass && out.fk_pass;
  return out;
}

bool sclc_check(double A, double B, double C) {
  return 4.0 * A * C - B * B > 0.0 && A >= 0.0 && C >= 0.0 && A + C > 0.0;
}

std::vector<std::pair<std::string, ScalarField>> candidate_multipliers() {
  static const char* sources[20] = {
      "x",         "y",           "u",       "v",           "x^2",
      "y^2",       "x*y",         "x*v",     "y*u",         "x^2+y^2",
      "x^3",       "y^3",         "x^4",     "v^2",         "x^2*v",
      "y^2*u",     "x+y+u+v",     "x^2-y^2", "2*x*y",       "x^2+y^2+u^2+v^2",
  };
  std::vector<std::pair<std::string, ScalarField>> out;
  out.reserve(20);
  for (const char* s : sources) out.emplace_back(s, parse_field(s));
  return out;
}

SampleLevels refined_levels(const ScalarField& r, const Box4& box, DegenerateLocus locus,
                            int levels, int n_per_level, std::uint64_t seed) {
  SampleLevels out;
  Box4 b = box;
  for (int l = 0; l < levels; ++l) {
    SampleOptions opts;
    opts.seed = seed + static_cast<std::uint64_t>(l) * 7919;
    opts.locus = locus;
    opts.cluster_min = std::pow(10.0, -1.0 - l);
    opts.cluster_max = std::pow(10.0, static_cast<double>(-l));
    SampleSet set = sample_boundary(r, b, n_per_level, opts);
    out.push_back(std::move(set.samples));
  }
  return out;
}

SampleLevels omega_refined_levels(int k, bool global, int levels, int n_per_level,
                                  std::uint64_t seed) {
  ScalarField r = omega_field(k, global);
  FrameFields ff = frame_fields(r);
  ScalarField lam = levi_field(r);
  Tape lam_tape = Tape::compile(lam);
  std::vector<double> scratch;

  // The Levi form collapses like sigma^{4k-4} along the curve v = |z|^2, so
  // the usable sigma range is bounded below by where lambda reaches the
  // resolvable floor; the refinement windows interpolate geometrically.
  // The floor drops with k: on the curve every term of lambda is a benign
  // monomial product, so values stay relatively accurate far below 1e-13,
  // and the higher collapse rate needs the extra range.
  const double sigma_top = 0.1;
  const double lambda_floor = 10.0 * omega_lambda_min(k);
  double sigma_floor = sigma_top;
  while (sigma_floor > 1e-4) {
    double lv;
    lam_tape.eval(boundary_curve(k, sigma_floor * 0.9, 0.7, CurveBranch::Lower, global), scratch,
                  {&lv, 1});
    if (lv < lambda_floor) break;
    sigma_floor *= 0.9;
  }

  // A divergent ratio grows like sigma^{-2}, so the per-level growth is
  // (sigma_top/sigma_floor)^{2/levels}; cap the level count so that genuine
  // divergence clears the default growth cap with margin.
  double range = std::max(1.5, sigma_top / sigma_floor);
  int max_levels = std::max(2, static_cast<int>(2.0 * std::log(range) / std::log(2.3)));
  levels = std::min(levels, max_levels);

  SampleLevels out;
  for (int l = 0; l < levels; ++l) {
    double win_hi = sigma_top * std::pow(sigma_floor / sigma_top, static_cast<double>(l) / levels);
    double win_lo = sigma_top * std::pow(sigma_floor / sigma_top, (l + 1.0) / levels);
    Box4 b;
    b.lo = {-win_hi, -win_hi, -0.05, -2.0 * win_hi * win_hi};
    b.hi = {win_hi, win_hi, 0.02, 2.0 * win_hi * win_hi};
    SampleOptions opts;
    opts.seed = seed + static_cast<std::uint64_t>(l) * 7919;
    opts.locus = DegenerateLocus::ZAxis;
    opts.cluster_min = win_lo / win_hi;
    opts.cluster_max = 1.0;
    SampleSet set = sample_boundary(r, b, n_per_level, opts);

    // Exact curve points: the obstruction mechanism lives on v = |z|^2.
    int n_sigma = 12, n_angle = 8;
    for (int i = 0; i < n_sigma; ++i) {
      double frac = (i + 1.0) / n_sigma;
      double sigma = win_hi * std::pow(win_lo / win_hi, 1.0 - frac);
      for (int j = 0; j < n_angle; ++j) {
        double t = 2.0 * kPi * j / n_angle;
        Point4 p = boundary_curve(k, sigma, t, CurveBranch::Lower, global);
        BoundarySample s;
        s.point = p;
        s.frame = frame_at(ff, p);
        double lv;
        lam_tape.eval(p, scratch, {&lv, 1});
        s.lambda = lv;
        s.weight = 1.0;
        set.samples.push_back(s);
      }
    }
    out.push_back(std::move(set.samples));
  }
  return out;
}

SampleLevels tanlog_refined_levels(int levels, int n_per_level, std::uint64_t seed) {
  ScalarField r = tanlog_field();
  Box4 b;
  b.lo = {-1.4, -0.5, -2.0, -1.6};
  b.hi = {1.4, 0.5, 2.0, 1.6};
  return refined_levels(r, b, DegenerateLocus::XEqualsV, levels, n_per_level, seed);
}

}  // namespace pshlab
