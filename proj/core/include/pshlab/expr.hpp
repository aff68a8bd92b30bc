#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace pshlab {

// Coordinates on C^2 = R^4: (z, w) = (x + iy, u + iv).
enum class Var : int { x = 0, y = 1, u = 2, v = 3 };

struct Point4 {
  double x = 0.0, y = 0.0, u = 0.0, v = 0.0;

  double operator[](int i) const {
    switch (i) {
      case 0: return x;
      case 1: return y;
      case 2: return u;
      default: return v;
    }
  }
  double& operator[](int i) {
    switch (i) {
      case 0: return x;
      case 1: return y;
      case 2: return u;
      default: return v;
    }
  }
  std::complex<double> z() const { return {x, y}; }
  std::complex<double> w() const { return {u, v}; }
};

Point4 operator+(const Point4& a, const Point4& b);
Point4 operator-(const Point4& a, const Point4& b);
Point4 operator*(double s, const Point4& a);
double dot(const Point4& a, const Point4& b);
double norm(const Point4& a);

// Axis-aligned box in R^4, used as a field's domain of validity.
struct Box4 {
  Point4 lo, hi;

  bool contains(const Point4& p, double slack = 0.0) const;
  Box4 intersect(const Box4& o) const;
  Point4 center() const;
};

enum class Op : std::uint8_t {
  Const,
  Variable,
  Add,
  Sub,
  Mul,
  Div,
  Pow,  // integer exponent in aux
  Exp,
  Ln,
  Sin,
  Cos,
  Tan,
  Sqrt,
};

const char* op_name(Op op);

struct Rational {
  long long num = 0;
  long long den = 1;
};

// Immutable, hash-consed expression node. Nodes live in a process-wide pool
// and are never freed; pointer equality is structural equality.
struct Node {
  Op op;
  int aux = 0;  // Variable index, or Pow exponent
  const Node* a = nullptr;
  const Node* b = nullptr;
  double cval = 0.0;  // Const payload
  std::uint64_t id = 0;
};

struct ExprError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Raised when evaluation leaves the domain of a node (ln of a non-positive
// number, tan at a pole, division by zero, sqrt of a negative, overflow).
struct DomainError : ExprError {
  DomainError(std::string msg, Op op, double arg);
  Op op;
  double arg;
};

struct DegenerateGradientError : ExprError {
  explicit DegenerateGradientError(const Point4& p);
  Point4 point;
};

// A smooth real-valued function of (x, y, u, v) as an immutable expression
// graph, with an optional box of validity.
class ScalarField {
 public:
  ScalarField() = default;
  explicit ScalarField(const Node* root) : root_(root) {}
  ScalarField(const Node* root, std::optional<Box4> region)
      : root_(root), region_(std::move(region)) {}

  const Node* root() const { return root_; }
  bool empty() const { return root_ == nullptr; }
  const std::optional<Box4>& region() const { return region_; }
  ScalarField with_region(const Box4& box) const { return {root_, box}; }
  ScalarField without_region() const { return {root_, std::nullopt}; }

  std::size_t graph_size() const;

 private:
  const Node* root_ = nullptr;
  std::optional<Box4> region_;
};

// --- construction -----------------------------------------------------------

ScalarField constant(double v);
ScalarField constant(long long num, long long den = 1);
ScalarField constant(const Rational& r);
ScalarField coordinate(Var v);

ScalarField operator+(const ScalarField& a, const ScalarField& b);
ScalarField operator-(const ScalarField& a, const ScalarField& b);
ScalarField operator*(const ScalarField& a, const ScalarField& b);
ScalarField operator/(const ScalarField& a, const ScalarField& b);
ScalarField operator-(const ScalarField& a);

ScalarField operator+(const ScalarField& a, double b);
ScalarField operator+(double a, const ScalarField& b);
ScalarField operator-(const ScalarField& a, double b);
ScalarField operator-(double a, const ScalarField& b);
ScalarField operator*(const ScalarField& a, double b);
ScalarField operator*(double a, const ScalarField& b);
ScalarField operator/(const ScalarField& a, double b);
ScalarField operator/(double a, const ScalarField& b);

ScalarField pow(const ScalarField& a, int n);
ScalarField exp(const ScalarField& a);
ScalarField ln(const ScalarField& a);
ScalarField sin(const ScalarField& a);
ScalarField cos(const ScalarField& a);
ScalarField tan(const ScalarField& a);
ScalarField sqrt(const ScalarField& a);

// --- evaluation and differentiation ----------------------------------------

double eval(const ScalarField& f, const Point4& p);

// Exact symbolic partial derivative; closed over the node alphabet.
ScalarField diff(const ScalarField& f, Var var);

// Gradient as four fields (d/dx, d/dy, d/du, d/dv).
std::array<ScalarField, 4> gradient(const ScalarField& f);

// Replaces each coordinate by the given field. repl[i] substitutes Var(i).
ScalarField substitute(const ScalarField& f, const std::array<ScalarField, 4>& repl);

// --- complex-valued fields ---------------------------------------------------

class ComplexField {
 public:
  ComplexField() = default;
  ComplexField(ScalarField re, ScalarField im) : re_(std::move(re)), im_(std::move(im)) {}
  static ComplexField from_real(const ScalarField& re);

  const ScalarField& re() const { return re_; }
  const ScalarField& im() const { return im_; }

 private:
  ScalarField re_, im_;
};

ComplexField operator+(const ComplexField& a, const ComplexField& b);
ComplexField operator-(const ComplexField& a, const ComplexField& b);
ComplexField operator*(const ComplexField& a, const ComplexField& b);
ComplexField operator-(const ComplexField& a);
ComplexField operator*(const ScalarField& a, const ComplexField& b);
ComplexField operator*(const ComplexField& a, const ScalarField& b);
ComplexField operator/(const ComplexField& a, const ScalarField& b);
ComplexField operator*(std::complex<double> a, const ComplexField& b);
ComplexField conj(const ComplexField& a);
ScalarField abs2(const ComplexField& a);  // |a|^2
ScalarField re_part(const ComplexField& a);
ScalarField im_part(const ComplexField& a);

std::complex<double> eval(const ComplexField& f, const Point4& p);

// --- Wirtinger calculus ------------------------------------------------------
// d/dz = (d/dx - i d/dy)/2, d/dzbar = (d/dx + i d/dy)/2, likewise in w.

ComplexField dz(const ScalarField& f);
ComplexField dzbar(const ScalarField& f);
ComplexField dw(const ScalarField& f);
ComplexField dwbar(const ScalarField& f);

ComplexField dz(const ComplexField& f);
ComplexField dzbar(const ComplexField& f);
ComplexField dw(const ComplexField& f);
ComplexField dwbar(const ComplexField& f);

// Iterated Wirtinger derivative d_z^az d_zbar^bz d_w^aw d_wbar^bw f.
// Throws ExprError when the total order exceeds max_order.
ComplexField wirtinger(const ScalarField& f, int az, int bz, int aw, int bw,
                       int max_order = 12);

// --- holomorphic polynomial composition --------------------------------------

// Complex polynomial of degree <= 2 in (z, w).
struct HoloPoly2 {
  std::complex<double> c0{}, cz{}, cw{}, czz{}, czw{}, cww{};
};

// Holomorphic map (z, w) -> (z', w') with polynomial components.
struct HoloMap2 {
  HoloPoly2 z_out, w_out;

  static HoloMap2 identity();
  std::pair<std::complex<double>, std::complex<double>> apply(
      std::complex<double> z, std::complex<double> w) const;
};

// f(z', w') composed with the map, expanded over (x, y, u, v).
ScalarField compose_holo(const ScalarField& f, const HoloMap2& map);

// --- compiled evaluation -----------------------------------------------------

// Flattened multi-root program for fast repeated evaluation. Compilation
// shares common subexpressions across roots; eval is lock-free and safe to
// call concurrently with distinct scratch buffers.
class Tape {
 public:
  Tape() = default;
  static Tape compile(std::span<const Node* const> roots);
  static Tape compile(const ScalarField& f);
  static Tape compile(std::initializer_list<ScalarField> fields);
  static Tape compile_fields(std::span<const ScalarField> fields);

  std::size_t num_slots() const { return code_.size(); }
  std::size_t num_roots() const { return roots_.size(); }

  void eval(const Point4& p, std::vector<double>& scratch, std::span<double> out) const;
  std::vector<double> eval(const Point4& p) const;

 private:
  struct Instr {
    Op op;
    int aux = 0;
    std::uint32_t a = 0, b = 0;
    double cval = 0.0;
  };
  std::vector<Instr> code_;
  std::vector<std::uint32_t> roots_;
};

}  // namespace pshlab
