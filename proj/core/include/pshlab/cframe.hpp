#pragma once

#include <array>
#include <complex>

#include "pshlab/expr.hpp"

namespace pshlab {

inline constexpr double kTolBdry = 1e-10;

using C2 = std::array<std::complex<double>, 2>;
using R4 = std::array<double, 4>;
using VectorFieldC = std::array<ComplexField, 2>;  // coefficients w.r.t. (d/dz, d/dw)

struct PreconditionError : ExprError {
  using ExprError::ExprError;
};

// The canonical frame at a point: L tangential holomorphic, N complex normal,
// with real parts L = (X + iY)/2, N = (nu + iT)/2 and nu the outward unit
// normal. Norms use the Hermitian convention |d/dz| = 1/sqrt(2).
struct FrameAt {
  C2 L, N;
  R4 X, Y, T, nu;
  double norm_dr = 0;      // |dr|
  double norm_del_r = 0;   // |del r| = |dr|/sqrt(2)
};

// Symbolic coefficient fields of the frame, suitable for further
// differentiation.
struct FrameFields {
  ScalarField r;
  ComplexField rz, rw;
  ScalarField grad2;    // |dr|^2 = rx^2 + ry^2 + ru^2 + rv^2
  ScalarField norm_dr;  // sqrt(grad2)
  ComplexField L1, L2;  // L = L1 d/dz + L2 d/dw
  ComplexField N1, N2;
  std::array<ScalarField, 4> X, Y, T, nu;
};

FrameFields frame_fields(const ScalarField& r);
FrameAt frame_at(const FrameFields& ff, const Point4& p);
FrameAt frame_at(const ScalarField& r, const Point4& p);

// Second Wirtinger derivatives bundled for Hessian forms. For real f the
// mixed block is conjugate-symmetric, so only the upper entries are stored.
struct HermitianPack {
  ComplexField fzzb, fzwb, fwwb;  // f_{z zbar}, f_{z wbar}, f_{w wbar}
};
struct QuadraticPack {
  ComplexField fzz, fzw, fww;
};
HermitianPack hermitian_pack(const ScalarField& f);
QuadraticPack quadratic_pack(const ScalarField& f);

// H_f(V, W) = sum f_{z^j zbar^k} V^j conj(W^k); sesquilinear.
std::complex<double> complex_hessian(const ScalarField& f, const Point4& p, const C2& V,
                                     const C2& W);
// Q_f(V, W) = sum f_{z^j z^k} V^j W^k; bilinear.
std::complex<double> complex_quadratic(const ScalarField& f, const Point4& p, const C2& V,
                                       const C2& W);
// Real Hessian sum f_{t^i t^j} V^i W^j.
double real_hessian(const ScalarField& f, const Point4& p, const R4& V, const R4& W);

// All ten second partials in coordinates, as fields (sp[i][j], symmetric).
std::array<std::array<ScalarField, 4>, 4> second_partials(const ScalarField& f);

// Chern covariant derivative nabla_V W at p, for vector fields with
// differentiable coefficient fields.
C2 chern_nabla(const VectorFieldC& V, const VectorFieldC& W, const Point4& p);
VectorFieldC nabla_V_W_fields(const VectorFieldC& V, const VectorFieldC& W);
VectorFieldC nabla_Vbar_W_fields(const VectorFieldC& V, const VectorFieldC& W);

// Applies a (1,0) vector field (resp. its conjugate) to a function.
ComplexField apply_field(const VectorFieldC& V, const ComplexField& g);
ComplexField apply_field_bar(const VectorFieldC& V, const ComplexField& g);
ScalarField apply_real_field(const std::array<ScalarField, 4>& V, const ScalarField& g);

// Ambient Levi form Lambda = H_r(L_r, L_r) with the canonical unit frame.
ScalarField levi_field(const ScalarField& r);
// Levi form along the unnormalized tangential field r_w d/dz - r_z d/dw.
ScalarField levi_raw_field(const ScalarField& r);

// Levi value at an (approximate) boundary point; canonical frame.
double levi(const ScalarField& r, const Point4& p, double tol_bdry = kTolBdry);

struct HermitianMatrix2 {
  double h11 = 0, h22 = 0;
  std::complex<double> h12{};

  double trace() const { return h11 + h22; }
  double det() const { return h11 * h22 - std::norm(h12); }
  double min_eigenvalue() const;
  double max_abs() const;
};

struct RealMatrix4 {
  std::array<std::array<double, 4>, 4> m{};
};

// Hessian of rho in the (L, N) frame of `reference` (rho itself by default).
HermitianMatrix2 hessian_matrix_LN(const ScalarField& rho, const Point4& p,
                                   const ScalarField* reference = nullptr);
// Real Hessian of rho in the (X, Y, T, nu) frame of `reference`.
RealMatrix4 real_hessian_matrix(const ScalarField& rho, const Point4& p,
                                const ScalarField* reference = nullptr);

// Symbolic (L, N)-frame Hessian entries, for compiled scans.
struct LNHessianFields {
  ScalarField h11;     // Re H(L, L)
  ComplexField h12;    // H(L, N)
  ScalarField h22;     // Re H(N, N)
};
LNHessianFields hessian_LN_fields(const ScalarField& rho, const FrameFields& frame);

// H^R(A, B) as a field, A and B coefficient 4-vectors of fields.
ScalarField real_hessian_field(const std::array<std::array<ScalarField, 4>, 4>& sp,
                               const std::array<ScalarField, 4>& A,
                               const std::array<ScalarField, 4>& B);

// Holomorphic coordinate change centered at p0: r' = r o Phi with r'(0) = 0,
// r'_z(0) = 0, r'_w(0) = 1/2, r'_{zz}(0) = 0.
struct Normalization {
  HoloMap2 map;
  ScalarField r_prime;
};
Normalization normalize_at(const ScalarField& r, const Point4& p0);

}  // namespace pshlab
