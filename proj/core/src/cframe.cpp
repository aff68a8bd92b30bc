#include "pshlab/cframe.hpp"

#include <cmath>

namespace pshlab {

namespace {
constexpr double kDegenerateGrad2 = 1e-24;

std::complex<double> cval(const ComplexField& f, const Point4& p) { return eval(f, p); }
}  // namespace

FrameFields frame_fields(const ScalarField& r) {
  FrameFields ff;
  ff.r = r;
  ff.rz = dz(r);
  ff.rw = dw(r);
  auto g = gradient(r);
  ff.grad2 = g[0] * g[0] + g[1] * g[1] + g[2] * g[2] + g[3] * g[3];
  ff.norm_dr = sqrt(ff.grad2);
  // |del r| = |dr|/sqrt(2) and the frame scale sqrt(2)/|del r| = 2/|dr|.
  ScalarField scale = constant(2ll) / ff.norm_dr;
  ff.L1 = scale * ff.rw;
  ff.L2 = -(scale * ff.rz);
  ff.N1 = scale * conj(ff.rz);
  ff.N2 = scale * conj(ff.rw);
  // L = (X + iY)/2, N = (nu + iT)/2 with Y = -JX, T = -Jnu.
  ff.X = {ff.L1.re(), ff.L1.im(), ff.L2.re(), ff.L2.im()};
  ff.Y = {ff.L1.im(), -ff.L1.re(), ff.L2.im(), -ff.L2.re()};
  ff.nu = {ff.N1.re(), ff.N1.im(), ff.N2.re(), ff.N2.im()};
  ff.T = {ff.N1.im(), -ff.N1.re(), ff.N2.im(), -ff.N2.re()};
  return ff;
}

FrameAt frame_at(const FrameFields& ff, const Point4& p) {
  double g2 = eval(ff.grad2, p);
  if (!(g2 > kDegenerateGrad2)) throw DegenerateGradientError(p);
  FrameAt out;
  out.norm_dr = std::sqrt(g2);
  out.norm_del_r = out.norm_dr / std::sqrt(2.0);
  out.L = {cval(ff.L1, p), cval(ff.L2, p)};
  out.N = {cval(ff.N1, p), cval(ff.N2, p)};
  for (int i = 0; i < 4; ++i) {
    out.X[i] = eval(ff.X[i], p);
    out.Y[i] = eval(ff.Y[i], p);
    out.T[i] = eval(ff.T[i], p);
    out.nu[i] = eval(ff.nu[i], p);
  }
  return out;
}

FrameAt frame_at(const ScalarField& r, const Point4& p) {
  return frame_at(frame_fields(r), p);
}

HermitianPack hermitian_pack(const ScalarField& f) {
  HermitianPack hp;
  hp.fzzb = dzbar(dz(f));
  hp.fzwb = dwbar(dz(f));
  hp.fwwb = dwbar(dw(f));
  return hp;
}

QuadraticPack quadratic_pack(const ScalarField& f) {
  QuadraticPack qp;
  qp.fzz = dz(dz(f));
  qp.fzw = dw(dz(f));
  qp.fww = dw(dw(f));
  return qp;
}

std::complex<double> complex_hessian(const ScalarField& f, const Point4& p, const C2& V,
                                     const C2& W) {
  HermitianPack hp = hermitian_pack(f);
  std::complex<double> fzzb = cval(hp.fzzb, p);
  std::complex<double> fzwb = cval(hp.fzwb, p);
  std::complex<double> fwwb = cval(hp.fwwb, p);
  std::complex<double> fwzb = std::conj(fzwb);  // real f
  return fzzb * V[0] * std::conj(W[0]) + fzwb * V[0] * std::conj(W[1]) +
         fwzb * V[1] * std::conj(W[0]) + fwwb * V[1] * std::conj(W[1]);
}

std::complex<double> complex_quadratic(const ScalarField& f, const Point4& p, const C2& V,
                                       const C2& W) {
  QuadraticPack qp = quadratic_pack(f);
  std::complex<double> fzz = cval(qp.fzz, p);
  std::complex<double> fzw = cval(qp.fzw, p);
  std::complex<double> fww = cval(qp.fww, p);
  return fzz * V[0] * W[0] + fzw * (V[0] * W[1] + V[1] * W[0]) + fww * V[1] * W[1];
}

double real_hessian(const ScalarField& f, const Point4& p, const R4& V, const R4& W) {
  auto sp = second_partials(f);
  double acc = 0;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) {
      if (V[i] == 0.0 || W[j] == 0.0) continue;
      acc += eval(sp[i][j], p) * V[i] * W[j];
    }
  return acc;
}

std::array<std::array<ScalarField, 4>, 4> second_partials(const ScalarField& f) {
  std::array<ScalarField, 4> g = gradient(f);
  std::array<std::array<ScalarField, 4>, 4> sp;
  for (int i = 0; i < 4; ++i)
    for (int j = i; j < 4; ++j) {
      sp[i][j] = diff(g[i], static_cast<Var>(j));
      sp[j][i] = sp[i][j];
    }
  return sp;
}

VectorFieldC nabla_V_W_fields(const VectorFieldC& V, const VectorFieldC& W) {
  return {V[0] * dz(W[0]) + V[1] * dw(W[0]), V[0] * dz(W[1]) + V[1] * dw(W[1])};
}

VectorFieldC nabla_Vbar_W_fields(const VectorFieldC& V, const VectorFieldC& W) {
  return {conj(V[0]) * dzbar(W[0]) + conj(V[1]) * dwbar(W[0]),
          conj(V[0]) * dzbar(W[1]) + conj(V[1]) * dwbar(W[1])};
}

C2 chern_nabla(const VectorFieldC& V, const VectorFieldC& W, const Point4& p) {
  VectorFieldC nw = nabla_V_W_fields(V, W);
  return {cval(nw[0], p), cval(nw[1], p)};
}

ComplexField apply_field(const VectorFieldC& V, const ComplexField& g) {
  return V[0] * dz(g) + V[1] * dw(g);
}

ComplexField apply_field_bar(const VectorFieldC& V, const ComplexField& g) {
  return conj(V[0]) * dzbar(g) + conj(V[1]) * dwbar(g);
}

ScalarField apply_real_field(const std::array<ScalarField, 4>& V, const ScalarField& g) {
  ScalarField acc = V[0] * diff(g, Var::x);
  acc = acc + V[1] * diff(g, Var::y);
  acc = acc + V[2] * diff(g, Var::u);
  acc = acc + V[3] * diff(g, Var::v);
  return acc;
}

namespace {
// Re H_f(V, V) for a (1,0) field V with coefficient fields; imaginary part
// vanishes identically for real f.
ScalarField hermitian_diagonal(const HermitianPack& hp, const ComplexField& V1,
                               const ComplexField& V2) {
  ScalarField t1 = re_part(hp.fzzb) * abs2(V1);
  ScalarField t3 = re_part(hp.fwwb) * abs2(V2);
  // 2 Re(f_{z wbar} V1 conj(V2))
  ComplexField cross = hp.fzwb * V1 * conj(V2);
  return t1 + t3 + constant(2ll) * cross.re();
}
}  // namespace

ScalarField levi_field(const ScalarField& r) {
  FrameFields ff = frame_fields(r);
  return hermitian_diagonal(hermitian_pack(r), ff.L1, ff.L2);
}

ScalarField levi_raw_field(const ScalarField& r) {
  ComplexField L1 = dw(r);
  ComplexField L2 = -dz(r);
  return hermitian_diagonal(hermitian_pack(r), L1, L2);
}

double levi(const ScalarField& r, const Point4& p, double tol_bdry) {
  double rv = eval(r, p);
  if (std::abs(rv) > tol_bdry)
    throw PreconditionError("levi: point is off the boundary (|r(p)| = " + std::to_string(rv) +
                            " > tolerance)");
  FrameFields ff = frame_fields(r);
  if (!(eval(ff.grad2, p) > kDegenerateGrad2)) throw DegenerateGradientError(p);
  return eval(levi_field(r), p);
}

double HermitianMatrix2::min_eigenvalue() const {
  double tr = h11 + h22;
  double disc = std::sqrt(std::max(0.0, (h11 - h22) * (h11 - h22) + 4.0 * std::norm(h12)));
  return 0.5 * (tr - disc);
}

double HermitianMatrix2::max_abs() const {
  return std::max({std::abs(h11), std::abs(h22), std::abs(h12)});
}

HermitianMatrix2 hessian_matrix_LN(const ScalarField& rho, const Point4& p,
                                   const ScalarField* reference) {
  const ScalarField& ref = reference ? *reference : rho;
  FrameAt fr = frame_at(ref, p);
  HermitianMatrix2 out;
  out.h11 = complex_hessian(rho, p, fr.L, fr.L).real();
  out.h12 = complex_hessian(rho, p, fr.L, fr.N);
  out.h22 = complex_hessian(rho, p, fr.N, fr.N).real();
  return out;
}

RealMatrix4 real_hessian_matrix(const ScalarField& rho, const Point4& p,
                                const ScalarField* reference) {
  const ScalarField& ref = reference ? *reference : rho;
  FrameAt fr = frame_at(ref, p);
  std::array<R4, 4> basis = {fr.X, fr.Y, fr.T, fr.nu};
  auto sp = second_partials(rho);
  std::array<std::array<double, 4>, 4> hess;
  for (int i = 0; i < 4; ++i)
    for (int j = i; j < 4; ++j) {
      hess[i][j] = eval(sp[i][j], p);
      hess[j][i] = hess[i][j];
    }
  RealMatrix4 out;
  for (int a = 0; a < 4; ++a)
    for (int b = a; b < 4; ++b) {
      double acc = 0;
      for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) acc += hess[i][j] * basis[a][i] * basis[b][j];
      out.m[a][b] = acc;
      out.m[b][a] = acc;
    }
  return out;
}

LNHessianFields hessian_LN_fields(const ScalarField& rho, const FrameFields& frame) {
  HermitianPack hp = hermitian_pack(rho);
  LNHessianFields out;
  out.h11 = hermitian_diagonal(hp, frame.L1, frame.L2);
  out.h22 = hermitian_diagonal(hp, frame.N1, frame.N2);
  ComplexField fwzb = conj(hp.fzwb);
  out.h12 = hp.fzzb * frame.L1 * conj(frame.N1) + hp.fzwb * frame.L1 * conj(frame.N2) +
            fwzb * frame.L2 * conj(frame.N1) + hp.fwwb * frame.L2 * conj(frame.N2);
  return out;
}

ScalarField real_hessian_field(const std::array<std::array<ScalarField, 4>, 4>& sp,
                               const std::array<ScalarField, 4>& A,
                               const std::array<ScalarField, 4>& B) {
  ScalarField acc = constant(0ll);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) acc = acc + sp[i][j] * A[i] * B[j];
  return acc;
}

Normalization normalize_at(const ScalarField& r, const Point4& p0) {
  std::complex<double> rz0 = eval(dz(r), p0);
  std::complex<double> rw0 = eval(dw(r), p0);
  double g2 = std::norm(rz0) + std::norm(rw0);
  if (!(g2 > kDegenerateGrad2)) throw DegenerateGradientError(p0);

  // Linear part: tangential direction tau = (r_w, -r_z) normalized to unit,
  // normal direction n = (conj r_z, conj r_w) scaled so that r'_w(0) = 1/2.
  std::complex<double> tau1 = rw0, tau2 = -rz0;
  double tnorm = std::sqrt(std::norm(tau1) + std::norm(tau2));
  tau1 /= tnorm;
  tau2 /= tnorm;
  std::complex<double> n1 = std::conj(rz0) / (2.0 * g2);
  std::complex<double> n2 = std::conj(rw0) / (2.0 * g2);

  HoloMap2 lin;
  lin.z_out.c0 = {p0.x, p0.y};
  lin.z_out.cz = tau1;
  lin.z_out.cw = n1;
  lin.w_out.c0 = {p0.u, p0.v};
  lin.w_out.cz = tau2;
  lin.w_out.cw = n2;

  ScalarField r1 = compose_holo(r, lin);
  std::complex<double> rzz0 = eval(wirtinger(r1, 2, 0, 0, 0), Point4{});
  // Quadratic shear w -> w + q z^2 kills r'_{zz}(0); r'_w(0) = 1/2 gives q = -r1_{zz}(0).
  std::complex<double> q = -rzz0;

  HoloMap2 full = lin;
  // Compose lin with (z, w + q z^2): substitute w by w + q z^2 in lin's inputs.
  full.z_out.czz = lin.z_out.cw * q;
  full.w_out.czz = lin.w_out.cw * q + lin.w_out.czz;

  ScalarField r2 = compose_holo(r, full);
  return {full, r2};
}

}  // namespace pshlab
