#include "pshlab/boundary.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

namespace pshlab {

ProjectionError::ProjectionError(const std::string& msg, const Point4& seed_, int iterations_,
                                 double residual_)
    : ExprError(msg + " (seed distance residual " + std::to_string(residual_) + " after " +
                std::to_string(iterations_) + " iterations)"),
      seed(seed_),
      iterations(iterations_),
      residual(residual_) {}

namespace {

// Solves A x = b for small n by Gaussian elimination with partial pivoting.
bool solve_linear(int n, double* A, double* b, double* x) {
  std::vector<int> piv(n);
  for (int i = 0; i < n; ++i) piv[i] = i;
  for (int c = 0; c < n; ++c) {
    int best = c;
    for (int r = c + 1; r < n; ++r)
      if (std::abs(A[r * n + c]) > std::abs(A[best * n + c])) best = r;
    if (std::abs(A[best * n + c]) < 1e-300) return false;
    if (best != c) {
      for (int k = 0; k < n; ++k) std::swap(A[c * n + k], A[best * n + k]);
      std::swap(b[c], b[best]);
    }
    for (int r = c + 1; r < n; ++r) {
      double f = A[r * n + c] / A[c * n + c];
      for (int k = c; k < n; ++k) A[r * n + k] -= f * A[c * n + k];
      b[r] -= f * b[c];
    }
  }
  for (int r = n - 1; r >= 0; --r) {
    double acc = b[r];
    for (int k = r + 1; k < n; ++k) acc -= A[r * n + k] * x[k];
    x[r] = acc / A[r * n + r];
  }
  return true;
}

struct Derivs {
  double r;
  double g[4];
  double h[4][4];
};

}  // namespace

Projector::Projector(const ScalarField& r) : r_(r) {
  std::vector<ScalarField> roots;
  roots.push_back(r);
  auto g = gradient(r);
  for (int i = 0; i < 4; ++i) roots.push_back(g[i]);
  auto sp = second_partials(r);
  for (int i = 0; i < 4; ++i)
    for (int j = i; j < 4; ++j) roots.push_back(sp[i][j]);
  tape_ = Tape::compile_fields(roots);
}

namespace {
Derivs eval_derivs(const Tape& tape, std::vector<double>& scratch, const Point4& p) {
  std::array<double, 15> out{};
  tape.eval(p, scratch, out);
  Derivs d;
  d.r = out[0];
  for (int i = 0; i < 4; ++i) d.g[i] = out[1 + i];
  int k = 5;
  for (int i = 0; i < 4; ++i)
    for (int j = i; j < 4; ++j) {
      d.h[i][j] = out[k];
      d.h[j][i] = out[k];
      ++k;
    }
  return d;
}
}  // namespace

Point4 Projector::project(const Point4& q, const ProjectionOptions& opts) const {
  std::vector<double> scratch;
  // Unknowns: p (4) and the normal-line parameter t, solving
  //   p + t grad r(p) - q = 0,  r(p) = 0.
  Point4 p = q;
  double t = 0.0;
  double last_merit = std::numeric_limits<double>::infinity();
  int iter = 0;
  for (; iter < opts.max_iter; ++iter) {
    Derivs d;
    try {
      d = eval_derivs(tape_, scratch, p);
    } catch (const DomainError&) {
      throw ProjectionError("projection left the field domain", q, iter, last_merit);
    }
    double g2 = d.g[0] * d.g[0] + d.g[1] * d.g[1] + d.g[2] * d.g[2] + d.g[3] * d.g[3];
    if (g2 < 1e-24) throw ProjectionError("projection hit a degenerate gradient", q, iter, d.r);

    double F[5];
    for (int i = 0; i < 4; ++i) F[i] = p[i] + t * d.g[i] - q[i];
    F[4] = d.r;
    double merit = 0;
    for (double f : F) merit += f * f;

    // Convergence: on-boundary plus normal-line alignment.
    double tang2 = 0;
    {
      Point4 diffp = q - p;
      double proj = dot(diffp, {d.g[0], d.g[1], d.g[2], d.g[3]}) / g2;
      Point4 tang = diffp - proj * Point4{d.g[0], d.g[1], d.g[2], d.g[3]};
      tang2 = dot(tang, tang);
      double d2 = dot(diffp, diffp);
      if (std::abs(d.r) <= opts.tol &&
          (d2 < 1e-28 || tang2 <= opts.angular_tol * opts.angular_tol * d2))
        return p;
    }

    double J[25];
    for (int i = 0; i < 4; ++i) {
      for (int j = 0; j < 4; ++j) J[i * 5 + j] = (i == j ? 1.0 : 0.0) + t * d.h[i][j];
      J[i * 5 + 4] = d.g[i];
    }
    for (int j = 0; j < 4; ++j) J[4 * 5 + j] = d.g[j];
    J[4 * 5 + 4] = 0.0;

    double rhs[5], step[5];
    for (int i = 0; i < 5; ++i) rhs[i] = -F[i];
    if (!solve_linear(5, J, rhs, step))
      throw ProjectionError("projection Newton system is singular", q, iter, merit);

    // Damping on non-decrease of the merit function.
    double alpha = 1.0;
    for (int halving = 0; halving < 25; ++halving) {
      Point4 pn = p;
      for (int i = 0; i < 4; ++i) pn[i] += alpha * step[i];
      double tn = t + alpha * step[4];
      bool ok = true;
      double mer_n = std::numeric_limits<double>::infinity();
      try {
        Derivs dn = eval_derivs(tape_, scratch, pn);
        double Fn[5];
        for (int i = 0; i < 4; ++i) Fn[i] = pn[i] + tn * dn.g[i] - q[i];
        Fn[4] = dn.r;
        mer_n = 0;
        for (double f : Fn) mer_n += f * f;
      } catch (const DomainError&) {
        ok = false;
      }
      if (ok && (mer_n < merit || merit < 1e-30)) {
        p = pn;
        t = tn;
        last_merit = mer_n;
        break;
      }
      alpha *= 0.5;
      if (halving == 24)
        throw ProjectionError("projection failed to decrease the residual", q, iter, merit);
    }
  }
  throw ProjectionError("projection did not converge", q, iter, last_merit);
}

double Projector::signed_distance(const Point4& q, const ProjectionOptions& opts) const {
  Point4 p = project(q, opts);
  double d = norm(q - p);
  double rq = eval(r_, q);
  return rq < 0 ? -d : d;
}

Point4 project_to_boundary(const ScalarField& r, const Point4& q, const ProjectionOptions& opts) {
  return Projector(r).project(q, opts);
}

double signed_distance(const ScalarField& r, const Point4& q, const ProjectionOptions& opts) {
  return Projector(r).signed_distance(q, opts);
}

namespace {

double halton(std::uint64_t index, int base) {
  double f = 1.0, out = 0.0;
  while (index > 0) {
    f /= base;
    out += f * static_cast<double>(index % base);
    index /= base;
  }
  return out;
}

double uniform01(std::uint64_t& state) {
  // splitmix64 step; avoids implementation-defined distributions.
  state += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  z = z ^ (z >> 31);
  return static_cast<double>(z >> 11) * 0x1.0p-53;
}

Point4 seed_point(const Box4& box, int i, int n, const SampleOptions& opts) {
  std::array<double, 4> t{};
  if (opts.strategy == SampleStrategy::Grid) {
    int per_axis = std::max(2, static_cast<int>(std::ceil(std::pow(double(n), 0.25))));
    int idx = i;
    for (int a = 0; a < 4; ++a) {
      t[a] = (idx % per_axis + 0.5) / per_axis;
      idx /= per_axis;
    }
  } else {
    static const int bases[4] = {2, 3, 5, 7};
    std::uint64_t off = opts.seed;
    for (int a = 0; a < 4; ++a) {
      double u = uniform01(off);
      t[a] = std::fmod(halton(static_cast<std::uint64_t>(i) + 1, bases[a]) + u, 1.0);
    }
  }
  Point4 p;
  for (int a = 0; a < 4; ++a) p[a] = box.lo[a] + t[a] * (box.hi[a] - box.lo[a]);

  if (opts.locus != DegenerateLocus::None) {
    // Radial-logarithmic clustering: the offset from the locus is drawn
    // log-uniformly from [cluster_min, cluster_max] x box halfwidth, so a
    // refinement level probes one well-defined window.
    std::uint64_t st = opts.seed ^ (0x51ed2701ULL + 2654435761ULL * static_cast<std::uint64_t>(i));
    double expo = uniform01(st);
    double scale = opts.cluster_max * std::pow(opts.cluster_min / opts.cluster_max, expo);
    if (opts.locus == DegenerateLocus::ZAxis) {
      Point4 c = box.center();
      double rad = 0.5 * (box.hi.x - box.lo.x) * scale;
      double theta = 2.0 * 3.14159265358979323846 * uniform01(st);
      p.x = c.x + rad * std::cos(theta);
      p.y = c.y + rad * std::sin(theta);
    } else if (opts.locus == DegenerateLocus::XEqualsV) {
      double span = 0.5 * (box.hi.v - box.lo.v);
      double sign = uniform01(st) < 0.5 ? -1.0 : 1.0;
      double v = p.x + sign * scale * span;
      if (v < box.lo.v || v > box.hi.v) v = p.x - sign * scale * span;
      p.v = v;
    }
  }
  return p;
}

}  // namespace

SampleSet sample_boundary(const ScalarField& r, const Box4& box, int n, const SampleOptions& opts) {
  Box4 effective = box;
  if (r.region()) effective = effective.intersect(*r.region());

  Projector projector(r);
  FrameFields ff = frame_fields(r);
  ScalarField lam = levi_field(r);
  Tape lam_tape = Tape::compile(lam);
  std::vector<double> scratch;

  ProjectionOptions popts;
  popts.tol = opts.tol_bdry;
  popts.max_iter = opts.max_iter;

  SampleSet out;
  out.samples.reserve(n);
  for (int i = 0; i < n; ++i) {
    Point4 seed = seed_point(effective, i, n, opts);
    try {
      Point4 p = projector.project(seed, popts);
      if (r.region() && !r.region()->contains(p, 1e-12)) {
        ++out.failures;
        continue;
      }
      BoundarySample s;
      s.point = p;
      s.frame = frame_at(ff, p);
      double lv;
      lam_tape.eval(p, scratch, {&lv, 1});
      s.lambda = lv;
      s.weight = 1.0;
      out.samples.push_back(s);
    } catch (const ExprError&) {
      ++out.failures;
    }
  }
  return out;
}

TaylorNormalData taylor_normal(const ScalarField& f, const ScalarField& r, const Point4& q,
                               const ProjectionOptions& opts) {
  Projector projector(r);
  Point4 p = projector.project(q, opts);
  double d = norm(q - p);
  double delta = eval(r, q) < 0 ? -d : d;
  FrameFields ff = frame_fields(r);
  ScalarField nu_f = apply_real_field(ff.nu, f);
  TaylorNormalData out;
  out.value_at_projection = eval(f, p);
  out.normal_term = delta * eval(nu_f, p);
  out.residual = eval(f, q) - out.value_at_projection - out.normal_term;
  return out;
}

void write_samples_csv(std::ostream& os, const std::vector<BoundarySample>& samples) {
  os << "x,y,u,v,lambda,|dr|\n";
  char buf[160];
  for (const auto& s : samples) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", s.point.x, s.point.y,
                  s.point.u, s.point.v, s.lambda, s.frame.norm_dr);
    os << buf;
  }
}

}  // namespace pshlab
