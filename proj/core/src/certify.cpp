#include "pshlab/certify.hpp"

#include <algorithm>
#include <cmath>

#include "pshlab/construct.hpp"
#include "pshlab/classify.hpp"
#include "pshlab/parallel.hpp"

namespace pshlab {

const char* to_string(ConditionId id) {
  switch (id) {
    case ConditionId::PsdBoundary: return "psd-boundary";
    case ConditionId::PshOpen: return "psh-open";
    case ConditionId::PshBoundary: return "psh-boundary";
    case ConditionId::NormalDeriv: return "normal";
    case ConditionId::BasicEstimate: return "basic-estimate";
    case ConditionId::Sesqui: return "sesqui";
    case ConditionId::RealCoords: return "real-coords";
    case ConditionId::HxHy: return "hx-hy";
    case ConditionId::Type6Normal: return "type6-normal";
    case ConditionId::DfBump: return "df-bump";
    case ConditionId::RatioO: return "ratio-O";
  }
  return "?";
}

const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::Pass: return "pass";
    case Verdict::Fail: return "fail";
    case Verdict::Inconclusive: return "inconclusive";
  }
  return "?";
}

namespace {

// Evaluates a tape over many points with deterministic output order.
std::vector<std::vector<double>> eval_batch(const Tape& tape, const std::vector<Point4>& pts) {
  std::vector<std::vector<double>> out(pts.size());
  parallel_chunks(pts.size(), [&](std::size_t b, std::size_t e) {
    std::vector<double> scratch;
    for (std::size_t i = b; i < e; ++i) {
      out[i].resize(tape.num_roots());
      tape.eval(pts[i], scratch, out[i]);
    }
  });
  return out;
}

std::vector<Point4> sample_points(const std::vector<BoundarySample>& s) {
  std::vector<Point4> pts(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) pts[i] = s[i].point;
  return pts;
}

Certificate ratio_O_values(ConditionId id,
                           const std::vector<std::vector<std::array<double, 2>>>& fg,
                           const std::vector<std::vector<Point4>>& pts, double lambda_min,
                           double growth_cap) {
  if (fg.size() < 2)
    throw PreconditionError("ratio certificate needs at least two refinement levels");
  Certificate cert;
  cert.condition = id;
  cert.lambda_min = lambda_min;
  cert.growth_cap = growth_cap;

  bool any_usable = false;
  for (std::size_t l = 0; l < fg.size(); ++l) {
    LevelStats st;
    st.n_samples = static_cast<int>(fg[l].size());
    st.min_abs_g = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < fg[l].size(); ++i) {
      double f = std::abs(fg[l][i][0]);
      double g = std::abs(fg[l][i][1]);
      st.min_abs_g = std::min(st.min_abs_g, g);
      if (g > lambda_min) {
        any_usable = true;
        double ratio = f / g;
        if (ratio > st.max_ratio) {
          st.max_ratio = ratio;
          st.argmax = pts[l][i];
          st.argmax_num = f;
          st.argmax_den = g;
        }
      } else {
        ++st.count_below_lambda_min;
        st.max_residual = std::max(st.max_residual, f);
      }
    }
    if (!std::isfinite(st.min_abs_g)) st.min_abs_g = 0;
    cert.levels.push_back(st);
  }
  if (!any_usable) throw PreconditionError("ratio certificate: all |g| below lambda_min");

  cert.empirical_constant = 0;
  for (const auto& st : cert.levels) cert.empirical_constant = std::max(cert.empirical_constant, st.max_ratio);

  // Each level refines toward the degenerate locus, so the constant estimate
  // is cumulative: bounded ratios stabilize it, genuine divergence grows it
  // past the cap level after level.
  bool ok = true;
  double running = cert.levels.front().max_ratio;
  for (std::size_t l = 0; l + 1 < cert.levels.size(); ++l) {
    const auto& b = cert.levels[l + 1];
    double next = std::max(running, b.max_ratio);
    if (next > growth_cap * running + 1e-12) {
      ok = false;
      cert.witnesses.push_back({b.argmax,
                                b.max_ratio,
                                "ratio |f|/|g| = " + std::to_string(b.max_ratio) +
                                    " at level " + std::to_string(l + 1) + " exceeds cap"});
    }
    // Samples with |g| <= lambda_min must carry |f| consistent with the
    // bound, up to factor-2 fluctuation.
    double res_allow = std::max({2.0 * cert.levels[l].max_residual,
                                 growth_cap * next * lambda_min, 1e-14});
    if (b.max_residual > res_allow) {
      ok = false;
      cert.witnesses.push_back({b.argmax, b.max_residual, "small-lambda residual grows"});
    }
    running = next;
  }

  // A pass needs the finest level to probe the most degenerate zone the
  // levels have seen: if earlier levels carry several samples within two
  // decades of the smallest denominator but the finest does not, the
  // refinement stalled and the pass is not trusted.
  double g_floor = cert.levels.front().min_abs_g;
  for (const auto& st : cert.levels) g_floor = std::min(g_floor, st.min_abs_g);
  double small_thresh = std::max(100.0 * g_floor, 10.0 * lambda_min);
  auto count_small = [&](std::size_t level) {
    int n = 0;
    for (const auto& v : fg[level])
      if (std::abs(v[1]) <= small_thresh) ++n;
    return n;
  };
  int finest_small = count_small(fg.size() - 1);
  int best_other = 0;
  for (std::size_t l = 0; l + 1 < fg.size(); ++l) best_other = std::max(best_other, count_small(l));
  if (ok && finest_small < 4 && best_other >= 4) {
    cert.verdict = Verdict::Inconclusive;
    cert.note = "finest level does not probe the degenerate zone";
    return cert;
  }
  cert.verdict = ok ? Verdict::Pass : Verdict::Fail;
  return cert;
}

Certificate ratio_O_fields(ConditionId id, const ScalarField& num, const ScalarField& den,
                           const SampleLevels& levels, double lambda_min, double growth_cap) {
  Tape tape = Tape::compile({num, den});
  std::vector<std::vector<std::array<double, 2>>> fg(levels.size());
  std::vector<std::vector<Point4>> pts(levels.size());
  for (std::size_t l = 0; l < levels.size(); ++l) {
    pts[l] = sample_points(levels[l]);
    auto vals = eval_batch(tape, pts[l]);
    fg[l].resize(vals.size());
    for (std::size_t i = 0; i < vals.size(); ++i) fg[l][i] = {vals[i][0], vals[i][1]};
  }
  return ratio_O_values(id, fg, pts, lambda_min, growth_cap);
}

}  // namespace

Certificate psd_on_samples(const ScalarField& rho, const std::vector<BoundarySample>& samples,
                           double tol, const ScalarField* reference) {
  if (samples.empty()) throw PreconditionError("psd_on_samples: empty sample set");
  FrameFields frame = frame_fields(reference ? *reference : rho);
  LNHessianFields hf = hessian_LN_fields(rho, frame);
  Tape tape = Tape::compile({hf.h11, hf.h12.re(), hf.h12.im(), hf.h22});
  std::vector<Point4> pts = sample_points(samples);
  auto vals = eval_batch(tape, pts);

  Certificate cert;
  cert.condition = ConditionId::PsdBoundary;
  cert.tol = tol;
  double worst_margin = std::numeric_limits<double>::infinity();
  std::size_t worst_i = 0;
  double worst_eig = 0;
  for (std::size_t i = 0; i < vals.size(); ++i) {
    HermitianMatrix2 m;
    m.h11 = vals[i][0];
    m.h12 = {vals[i][1], vals[i][2]};
    m.h22 = vals[i][3];
    double eig = m.min_eigenvalue();
    double margin = eig + tol * (1.0 + m.max_abs());
    if (margin < worst_margin) {
      worst_margin = margin;
      worst_i = i;
      worst_eig = eig;
    }
  }
  LevelStats st;
  st.n_samples = static_cast<int>(vals.size());
  st.max_ratio = -worst_eig;
  st.argmax = pts[worst_i];
  cert.levels.push_back(st);
  cert.empirical_constant = worst_eig;
  if (worst_margin < 0) {
    cert.verdict = Verdict::Fail;
    cert.witnesses.push_back({pts[worst_i], worst_eig, "negative Hessian eigenvalue"});
  } else {
    cert.verdict = Verdict::Pass;
  }
  return cert;
}

Certificate psh_open_scan(const ScalarField& rho, const std::vector<Point4>& points, double tol) {
  if (points.empty()) throw PreconditionError("psh_open_scan: empty sample set");
  HermitianPack hp = hermitian_pack(rho);
  ComplexField rz = dz(rho), rw = dw(rho);
  Tape tape = Tape::compile({re_part(hp.fzzb), hp.fzwb.re(), hp.fzwb.im(), re_part(hp.fwwb), rho,
                             abs2(rz) + abs2(rw)});
  auto vals = eval_batch(tape, points);

  Certificate cert;
  cert.condition = ConditionId::PshOpen;
  cert.tol = tol;
  double worst_margin = std::numeric_limits<double>::infinity();
  std::size_t worst_i = 0;
  double worst_eig = 0;
  double best_c = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < vals.size(); ++i) {
    HermitianMatrix2 m;
    m.h11 = vals[i][0];
    m.h12 = {vals[i][1], vals[i][2]};
    m.h22 = vals[i][3];
    double eig = m.min_eigenvalue();
    double margin = eig + tol * (1.0 + m.max_abs());
    if (margin < worst_margin) {
      worst_margin = margin;
      worst_i = i;
      worst_eig = eig;
    }
    // Coercivity H >= c (rho^2 |xi|^2 + |<del rho, xi>|^2): generalized
    // eigenvalue bound against rho^2 I + (del rho)(del rho)^*, where the
    // comparison matrix is nonsingular.
    double r2 = vals[i][4] * vals[i][4];
    double g2 = vals[i][5];
    if (r2 > 1e-30) {
      double denom = r2 + g2;
      best_c = std::min(best_c, eig / denom);
    }
  }
  LevelStats st;
  st.n_samples = static_cast<int>(vals.size());
  st.max_ratio = -worst_eig;
  st.argmax = points[worst_i];
  cert.levels.push_back(st);
  cert.empirical_constant = std::isfinite(best_c) ? best_c : 0.0;
  if (worst_margin < 0) {
    cert.verdict = Verdict::Fail;
    cert.witnesses.push_back({points[worst_i], worst_eig, "negative complex Hessian eigenvalue"});
  } else {
    cert.verdict = Verdict::Pass;
  }
  return cert;
}

Certificate ratio_O(ConditionId id, const ScalarField& numerator, const ScalarField& denominator,
                    const SampleLevels& levels, double lambda_min, double growth_cap) {
  return ratio_O_fields(id, numerator, denominator, levels, lambda_min, growth_cap);
}

Certificate cond_psh_boundary(const ScalarField& rho, const SampleLevels& levels,
                              double lambda_min, double growth_cap) {
  FrameFields frame = frame_fields(rho);
  LNHessianFields hf = hessian_LN_fields(rho, frame);
  return ratio_O_fields(ConditionId::PshBoundary, abs2(hf.h12), hf.h11, levels, lambda_min,
                        growth_cap);
}

double required_C(const ScalarField& rho, const std::vector<BoundarySample>& samples, double tol) {
  if (samples.empty()) throw PreconditionError("required_C: empty sample set");
  FrameFields frame = frame_fields(rho);
  LNHessianFields hf = hessian_LN_fields(rho, frame);
  // |N rho|^2 = |d rho|^2 / 4 on the zero set.
  Tape tape = Tape::compile({hf.h11, hf.h12.re(), hf.h12.im(), hf.h22, frame.grad2});
  std::vector<Point4> pts = sample_points(samples);
  auto vals = eval_batch(tape, pts);

  auto admissible = [&](double C) {
    for (const auto& v : vals) {
      double h11 = v[0];
      double h12n = v[1] * v[1] + v[2] * v[2];
      double h22 = v[3] + C * v[4] / 4.0;
      double scale = 1.0 + std::max({std::abs(h11), std::abs(h22), std::sqrt(h12n)});
      double det = h11 * h22 - h12n;
      double trace = h11 + h22;
      if (det < -tol * scale * scale) return false;
      if (trace < -tol * scale) return false;
    }
    return true;
  };

  if (admissible(0.0)) return 0.0;
  for (double C = 1.0; C <= 1048576.0; C *= 2.0)
    if (admissible(C)) return C;
  throw PreconditionError(
      "required_C: no bending constant up to 2^20 makes the Hessian admissible");
}

Certificate cond_normal(const ScalarField& rho, const SampleLevels& levels, double lambda_min,
                        double growth_cap) {
  FrameFields frame = frame_fields(rho);
  ScalarField lambda = levi_field(rho);
  ScalarField nu_lambda = apply_real_field(frame.nu, lambda);
  return ratio_O_fields(ConditionId::NormalDeriv, nu_lambda * nu_lambda, lambda, levels, lambda_min,
                        growth_cap);
}

namespace {

// Versioned direction grid "dirgrid/1": 64 quasi-uniform points on the unit
// sphere of C^2 from a fixed splitmix64 stream.
const std::vector<C2>& direction_grid() {
  static const std::vector<C2> grid = [] {
    std::vector<C2> g;
    std::uint64_t state = 0x70736831ab1e5eedULL;
    auto next = [&state] {
      state += 0x9e3779b97f4a7c15ULL;
      std::uint64_t z = state;
      z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
      z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
      z = z ^ (z >> 31);
      return static_cast<double>(z >> 11) * 0x1.0p-53;
    };
    while (g.size() < 64) {
      double a[4];
      double n2 = 0;
      for (double& t : a) {
        t = 2.0 * next() - 1.0;
        n2 += t * t;
      }
      if (n2 < 1e-4 || n2 > 1.0) continue;
      double inv = 1.0 / std::sqrt(n2);
      g.push_back({std::complex<double>(a[0] * inv, a[1] * inv),
                   std::complex<double>(a[2] * inv, a[3] * inv)});
    }
    return g;
  }();
  return grid;
}

}  // namespace

BasicEstimate basic_estimate_C(const ScalarField& r, const PointLevels& mixed_levels) {
  HermitianPack hp = hermitian_pack(r);
  ComplexField rz = dz(r), rw = dw(r);
  Tape tape = Tape::compile({re_part(hp.fzzb), hp.fzwb.re(), hp.fzwb.im(), re_part(hp.fwwb), r,
                             rz.re(), rz.im(), rw.re(), rw.im()});

  BasicEstimate out;
  long long total_pairs = 0, skipped = 0;
  for (const auto& level : mixed_levels) {
    double level_C = 0;
    auto vals = eval_batch(tape, level);
    for (std::size_t i = 0; i < vals.size(); ++i) {
      const auto& v = vals[i];
      double a = v[0], d = v[3];
      std::complex<double> b{v[1], v[2]};
      double rv = v[4];
      std::complex<double> rzv{v[5], v[6]}, rwv{v[7], v[8]};

      std::vector<C2> dirs = direction_grid();
      // Frame directions at the point, plus dyadic tangential-normal mixes:
      // the one-sided bound can only degenerate along directions that are
      // nearly tangential, with a normal component comparable to r.
      double g2 = std::norm(rzv) + std::norm(rwv);
      if (g2 > 1e-24) {
        double inv = 1.0 / std::sqrt(g2);
        C2 lt{rwv * inv, -rzv * inv};
        C2 nn{std::conj(rzv) * inv, std::conj(rwv) * inv};
        dirs.push_back(lt);
        dirs.push_back(nn);
        static const std::complex<double> phases[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
        for (double eps = 1e-1; eps >= 1e-6 / 2; eps *= 0.1)
          for (const auto& ph : phases)
            dirs.push_back({lt[0] + eps * ph * nn[0], lt[1] + eps * ph * nn[1]});
      }
      for (const auto& xi : dirs) {
        ++total_pairs;
        double xi2 = std::norm(xi[0]) + std::norm(xi[1]);
        double pair = std::norm(rzv * xi[0] + rwv * xi[1]);
        double den = rv * rv * xi2 + pair;
        if (den < 1e-30) {
          ++skipped;
          continue;
        }
        double h = a * std::norm(xi[0]) + d * std::norm(xi[1]) +
                   2.0 * std::real(b * xi[0] * std::conj(xi[1]));
        double c = -h / den;
        if (c > level_C) level_C = c;
      }
    }
    out.level_C.push_back(level_C);
    out.C = std::max(out.C, level_C);
  }
  out.skipped_fraction = total_pairs ? static_cast<double>(skipped) / total_pairs : 1.0;
  out.inconclusive = out.skipped_fraction > 0.5;
  if (out.level_C.size() >= 2) {
    double first = out.level_C.front(), last = out.level_C.back();
    out.diverging = last > 4.0 * first + 1.0;
  }
  if (out.diverging) out.inconclusive = true;
  return out;
}

PointLevels offset_levels(const std::vector<BoundarySample>& boundary, int levels,
                          double base_delta, std::uint64_t seed) {
  PointLevels out;
  std::uint64_t state = seed;
  auto next = [&state] {
    state += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    z = z ^ (z >> 31);
    return static_cast<double>(z >> 11) * 0x1.0p-53;
  };
  for (int l = 0; l < levels; ++l) {
    double window = base_delta * std::pow(0.1, l);
    std::vector<Point4> pts;
    pts.reserve(boundary.size() * 2);
    for (const auto& s : boundary) {
      double delta = window * (0.1 + 0.9 * next());
      Point4 nu{s.frame.nu[0], s.frame.nu[1], s.frame.nu[2], s.frame.nu[3]};
      pts.push_back(s.point - delta * nu);
      pts.push_back(s.point + delta * nu);
    }
    out.push_back(std::move(pts));
  }
  return out;
}

Certificate cond_sesqui(const ScalarField& rho, const SampleLevels& levels, double lambda_min,
                        double growth_cap) {
  FrameFields frame = frame_fields(rho);
  auto sp = second_partials(rho);
  ScalarField hyt = real_hessian_field(sp, frame.Y, frame.T);
  ScalarField hxt = real_hessian_field(sp, frame.X, frame.T);
  ScalarField lambda = levi_field(rho);
  return ratio_O_fields(ConditionId::Sesqui, hyt * hyt + hxt * hxt, lambda, levels, lambda_min,
                        growth_cap);
}

Certificate cond_real_coords(const ScalarField& rho, const SampleLevels& levels, double lambda_min,
                             double growth_cap) {
  FrameFields frame = frame_fields(rho);
  auto sp = second_partials(rho);
  ScalarField hxnu = real_hessian_field(sp, frame.X, frame.nu);
  ScalarField hyt = real_hessian_field(sp, frame.Y, frame.T);
  ScalarField hynu = real_hessian_field(sp, frame.Y, frame.nu);
  ScalarField hxt = real_hessian_field(sp, frame.X, frame.T);
  ScalarField s1 = hxnu + hyt;
  ScalarField s2 = hynu - hxt;
  ScalarField lambda = levi_field(rho);
  return ratio_O_fields(ConditionId::RealCoords, s1 * s1 + s2 * s2, lambda, levels, lambda_min,
                        growth_cap);
}

Certificate check_hx_hy(const ScalarField& r, const ScalarField& h, const SampleLevels& levels,
                        double lambda_min, double growth_cap) {
  FrameFields frame = frame_fields(r);
  auto sp = second_partials(r);
  ScalarField hxnu = real_hessian_field(sp, frame.X, frame.nu);
  ScalarField hyt = real_hessian_field(sp, frame.Y, frame.T);
  ScalarField hynu = real_hessian_field(sp, frame.Y, frame.nu);
  ScalarField hxt = real_hessian_field(sp, frame.X, frame.T);
  ScalarField ex = apply_real_field(frame.X, h) + (hxnu + hyt) / frame.norm_dr;
  ScalarField ey = apply_real_field(frame.Y, h) - (hxt - hynu) / frame.norm_dr;
  ScalarField lambda = levi_field(r);
  return ratio_O_fields(ConditionId::HxHy, ex * ex + ey * ey, lambda, levels, lambda_min,
                        growth_cap);
}

Type6Result type6_normal_vanish(const ScalarField& r, const Point4& p0, double tol, int max_order) {
  Type6Result out;
  TypeOptions topts;
  topts.max_order = max_order;
  std::optional<int> c = point_type(r, p0, topts);
  out.applicable = !c || *c >= 6;
  FrameFields frame = frame_fields(r);
  ScalarField lambda = levi_field(r);
  ScalarField nu_lambda = apply_real_field(frame.nu, lambda);
  out.value = eval(nu_lambda, p0);
  out.pass = out.applicable && std::abs(out.value) <= tol;
  return out;
}

Certificate df_check(const ScalarField& r, double K, double eta, const std::vector<Point4>& interior,
                     double tol) {
  Certificate cert = psh_open_scan(df_bump(r, K, eta), interior, tol);
  cert.condition = ConditionId::DfBump;
  return cert;
}

Certificate df_check_ext(const ScalarField& r, double K, double mu,
                         const std::vector<Point4>& exterior, double tol) {
  Certificate cert = psh_open_scan(df_bump_ext(r, K, mu), exterior, tol);
  cert.condition = ConditionId::DfBump;
  return cert;
}

std::optional<double> df_select_K(const ScalarField& r, double eta,
                                  const std::vector<Point4>& interior, double k_max, double tol) {
  std::vector<double> grid = {0.0};
  for (double k = 1.0; k <= k_max; k *= 2.0) grid.push_back(k);
  for (double K : grid) {
    try {
      if (df_check(r, K, eta, interior, tol).pass()) return K;
    } catch (const DomainError&) {
      // bump undefined at some sample for this K
    }
  }
  return std::nullopt;
}

}  // namespace pshlab
