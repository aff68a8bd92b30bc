#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "pshlab/cframe.hpp"
#include "pshlab/expr.hpp"

namespace pshlab {

struct ProjectionError : ExprError {
  ProjectionError(const std::string& msg, const Point4& seed, int iterations, double residual);
  Point4 seed;
  int iterations;
  double residual;
};

struct ProjectionOptions {
  double tol = kTolBdry;
  int max_iter = 50;
  double angular_tol = 1e-6;
};

// Newton solve along the normal line: returns p with |r(p)| <= tol and
// q - p parallel to grad r(p) within the angular tolerance.
Point4 project_to_boundary(const ScalarField& r, const Point4& q,
                           const ProjectionOptions& opts = {});

// +-|q - pi(q)| with the sign of r(q).
double signed_distance(const ScalarField& r, const Point4& q, const ProjectionOptions& opts = {});

// Reusable projector; compiles the derivative tape once.
class Projector {
 public:
  explicit Projector(const ScalarField& r);
  Point4 project(const Point4& q, const ProjectionOptions& opts = {}) const;
  double signed_distance(const Point4& q, const ProjectionOptions& opts = {}) const;

 private:
  ScalarField r_;
  Tape tape_;  // r, gradient, upper second partials
};

struct BoundarySample {
  Point4 point;
  FrameAt frame;
  double lambda = 0;  // canonical Levi value
  double weight = 1;
};

enum class SampleStrategy { Grid, QuasiRandom };

// Marked degenerate loci for radial-logarithmic densification.
enum class DegenerateLocus { None, ZAxis, XEqualsV };

struct SampleOptions {
  SampleStrategy strategy = SampleStrategy::QuasiRandom;
  std::uint64_t seed = 1;
  double tol_bdry = kTolBdry;
  int max_iter = 50;
  DegenerateLocus locus = DegenerateLocus::None;
  // Offsets from the locus are scaled log-uniformly within
  // [cluster_min, cluster_max]; a refinement level is one such window.
  double cluster_min = 1e-4;
  double cluster_max = 1.0;
};

struct SampleSet {
  std::vector<BoundarySample> samples;
  int failures = 0;
};

// Projects seed points drawn from the box onto {r = 0}. Deterministic for a
// fixed seed; samples are ordered by seed index.
SampleSet sample_boundary(const ScalarField& r, const Box4& box, int n,
                          const SampleOptions& opts = {});

struct TaylorNormalData {
  double value_at_projection;  // f(pi(q))
  double normal_term;          // delta(q) (nu f)(pi(q))
  double residual;             // f(q) minus the first-order expansion
};

TaylorNormalData taylor_normal(const ScalarField& f, const ScalarField& r, const Point4& q,
                               const ProjectionOptions& opts = {});

// Columns x,y,u,v,lambda,|dr|.
void write_samples_csv(std::ostream& os, const std::vector<BoundarySample>& samples);

}  // namespace pshlab
