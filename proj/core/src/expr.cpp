#include "pshlab/expr.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <deque>
#include <mutex>
#include <numeric>
#include <unordered_map>

namespace pshlab {

namespace {

constexpr long long kRatLimit = 1LL << 62;

bool rat_normalize(Rational& r) {
  if (r.den == 0) return false;
  if (r.den < 0) {
    r.num = -r.num;
    r.den = -r.den;
  }
  long long g = std::gcd(r.num < 0 ? -r.num : r.num, r.den);
  if (g > 1) {
    r.num /= g;
    r.den /= g;
  }
  return std::llabs(r.num) < kRatLimit && r.den < kRatLimit;
}

bool rat_mul(const Rational& a, const Rational& b, Rational& out) {
  __int128 n = static_cast<__int128>(a.num) * b.num;
  __int128 d = static_cast<__int128>(a.den) * b.den;
  if (n > static_cast<__int128>(kRatLimit) || n < -static_cast<__int128>(kRatLimit)) {
    __int128 g1 = std::gcd(static_cast<long long>(a.num < 0 ? -a.num : a.num), b.den);
    __int128 g2 = std::gcd(static_cast<long long>(b.num < 0 ? -b.num : b.num), a.den);
    n = (static_cast<__int128>(a.num) / (g1 ? g1 : 1)) * (b.num / (g2 ? g2 : 1));
    d = (static_cast<__int128>(a.den) / (g2 ? g2 : 1)) * (b.den / (g1 ? g1 : 1));
  }
  if (n > static_cast<__int128>(kRatLimit) || n < -static_cast<__int128>(kRatLimit) ||
      d > static_cast<__int128>(kRatLimit))
    return false;
  out.num = static_cast<long long>(n);
  out.den = static_cast<long long>(d);
  return rat_normalize(out);
}

bool rat_add(const Rational& a, const Rational& b, Rational& out) {
  __int128 n = static_cast<__int128>(a.num) * b.den + static_cast<__int128>(b.num) * a.den;
  __int128 d = static_cast<__int128>(a.den) * b.den;
  if (n > static_cast<__int128>(kRatLimit) || n < -static_cast<__int128>(kRatLimit) ||
      d > static_cast<__int128>(kRatLimit))
    return false;
  out.num = static_cast<long long>(n);
  out.den = static_cast<long long>(d);
  return rat_normalize(out);
}

bool rat_pow(const Rational& a, int n, Rational& out) {
  Rational base = a;
  if (n < 0) {
    if (a.num == 0) return false;
    base = {a.den, a.num};
    if (!rat_normalize(base)) return false;
    n = -n;
  }
  out = {1, 1};
  Rational acc = base;
  while (n > 0) {
    if (n & 1) {
      if (!rat_mul(out, acc, out)) return false;
    }
    n >>= 1;
    if (n == 0) break;
    if (!rat_mul(acc, acc, acc)) return false;
  }
  return true;
}

double rat_value(const Rational& r) {
  return static_cast<double>(r.num) / static_cast<double>(r.den);
}

struct NodeKey {
  Op op;
  int aux;  // variable index / exponent; 1 marks exact constants
  const Node* a;
  const Node* b;
  std::uint64_t c0;  // Const payload: double bits, or the exact numerator
  std::uint64_t c1;  // exact denominator

  bool operator==(const NodeKey& o) const {
    return op == o.op && aux == o.aux && a == o.a && b == o.b && c0 == o.c0 && c1 == o.c1;
  }
};

struct NodeKeyHash {
  std::size_t operator()(const NodeKey& k) const {
    std::size_t h = static_cast<std::size_t>(k.op) * 0x9e3779b97f4a7c15ULL;
    auto mix = [&h](std::uint64_t v) {
      h ^= v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    };
    mix(static_cast<std::uint64_t>(k.aux));
    mix(reinterpret_cast<std::uintptr_t>(k.a));
    mix(reinterpret_cast<std::uintptr_t>(k.b));
    mix(k.c0);
    mix(k.c1);
    return h;
  }
};

struct DiffKey {
  const Node* n;
  int var;
  bool operator==(const DiffKey& o) const { return n == o.n && var == o.var; }
};
struct DiffKeyHash {
  std::size_t operator()(const DiffKey& k) const {
    return std::hash<const void*>()(k.n) * 31u + static_cast<std::size_t>(k.var);
  }
};

// Process-wide node pool. Construction (interning, differentiation) is
// serialized behind one recursive mutex; reads of published nodes are
// immutable and lock-free.
class Pool {
 public:
  static Pool& instance() {
    static Pool pool;
    return pool;
  }

  const Node* intern(Op op, int aux, const Node* a, const Node* b, double cval,
                     const Rational* rat) {
    std::lock_guard<std::recursive_mutex> lock(mu_);
    std::uint64_t c0 = 0, c1 = 0;
    if (op == Op::Const) {
      if (rat) {
        aux = 1;
        c0 = static_cast<std::uint64_t>(rat->num);
        c1 = static_cast<std::uint64_t>(rat->den);
      } else {
        std::memcpy(&c0, &cval, sizeof c0);
      }
    }
    NodeKey key{op, aux, a, b, c0, c1};
    auto it = intern_.find(key);
    if (it != intern_.end()) return it->second;
    arena_.push_back(Node{op, aux, a, b, cval, next_id_++});
    const Node* n = &arena_.back();
    intern_.emplace(key, n);
    if (op == Op::Const && rat) exact_.emplace(n, *rat);
    return n;
  }

  const Rational* exact_of(const Node* n) {
    std::lock_guard<std::recursive_mutex> lock(mu_);
    auto it = exact_.find(n);
    return it == exact_.end() ? nullptr : &it->second;
  }

  const Node* cached_diff(const Node* n, int var) {
    std::lock_guard<std::recursive_mutex> lock(mu_);
    auto it = diff_.find(DiffKey{n, var});
    return it == diff_.end() ? nullptr : it->second;
  }

  void store_diff(const Node* n, int var, const Node* d) {
    std::lock_guard<std::recursive_mutex> lock(mu_);
    diff_.emplace(DiffKey{n, var}, d);
  }

  std::recursive_mutex& mutex() { return mu_; }

 private:
  std::recursive_mutex mu_;
  std::deque<Node> arena_;
  std::unordered_map<NodeKey, const Node*, NodeKeyHash> intern_;
  std::unordered_map<const Node*, Rational> exact_;
  std::unordered_map<DiffKey, const Node*, DiffKeyHash> diff_;
  std::uint64_t next_id_ = 1;
};

const Node* make_const(double v) { return Pool::instance().intern(Op::Const, 0, nullptr, nullptr, v, nullptr); }

const Node* make_const(Rational r) {
  if (!rat_normalize(r)) throw ExprError("rational constant out of range");
  return Pool::instance().intern(Op::Const, 0, nullptr, nullptr, rat_value(r), &r);
}

bool is_const(const Node* n) { return n->op == Op::Const; }
bool is_const(const Node* n, double v) { return n->op == Op::Const && n->cval == v; }

// Folds two constants through a binary op, keeping exactness when possible.
const Node* fold_const(Op op, const Node* a, const Node* b) {
  const Rational* ra = Pool::instance().exact_of(a);
  const Rational* rb = Pool::instance().exact_of(b);
  if (ra && rb) {
    Rational out;
    bool ok = false;
    switch (op) {
      case Op::Add: ok = rat_add(*ra, *rb, out); break;
      case Op::Sub: ok = rat_add(*ra, Rational{-rb->num, rb->den}, out); break;
      case Op::Mul: ok = rat_mul(*ra, *rb, out); break;
      case Op::Div:
        if (rb->num != 0) ok = rat_mul(*ra, Rational{rb->den, rb->num}, out);
        break;
      default: break;
    }
    if (ok) return make_const(out);
  }
  double va = a->cval, vb = b->cval;
  double r;
  switch (op) {
    case Op::Add: r = va + vb; break;
    case Op::Sub: r = va - vb; break;
    case Op::Mul: r = va * vb; break;
    case Op::Div:
      if (vb == 0.0) throw DomainError("division by zero in constant fold", Op::Div, vb);
      r = va / vb;
      break;
    default: throw ExprError("bad fold");
  }
  return make_const(r);
}

const Node* make_node(Op op, const Node* a, const Node* b, int aux = 0) {
  return Pool::instance().intern(op, aux, a, b, 0.0, nullptr);
}

const Node* node_add(const Node* a, const Node* b);
const Node* node_sub(const Node* a, const Node* b);
const Node* node_mul(const Node* a, const Node* b);
const Node* node_div(const Node* a, const Node* b);
const Node* node_pow(const Node* a, int n);

const Node* pow_base(const Node* n) { return n->op == Op::Pow ? n->a : n; }
int pow_exponent(const Node* n) { return n->op == Op::Pow ? n->aux : 1; }

const Node* node_add(const Node* a, const Node* b) {
  if (is_const(a, 0.0)) return b;
  if (is_const(b, 0.0)) return a;
  if (is_const(a) && is_const(b)) return fold_const(Op::Add, a, b);
  if (is_const(b) || (!is_const(a) && a->id > b->id)) std::swap(a, b);
  return make_node(Op::Add, a, b);
}

const Node* node_sub(const Node* a, const Node* b) {
  if (is_const(b, 0.0)) return a;
  if (a == b) return make_const(Rational{0, 1});
  if (is_const(a) && is_const(b)) return fold_const(Op::Sub, a, b);
  if (is_const(a, 0.0)) return node_mul(make_const(Rational{-1, 1}), b);
  return make_node(Op::Sub, a, b);
}

const Node* node_mul(const Node* a, const Node* b) {
  if (is_const(a, 0.0) || is_const(b, 0.0)) return make_const(Rational{0, 1});
  if (is_const(a, 1.0)) return b;
  if (is_const(b, 1.0)) return a;
  if (is_const(a) && is_const(b)) return fold_const(Op::Mul, a, b);
  if (is_const(b)) std::swap(a, b);
  if (is_const(a) && b->op == Op::Mul && is_const(b->a))
    return node_mul(fold_const(Op::Mul, a, b->a), b->b);
  if (!is_const(a) && pow_base(a) == pow_base(b))
    return node_pow(pow_base(a), pow_exponent(a) + pow_exponent(b));
  if (!is_const(a) && a->id > b->id) std::swap(a, b);
  return make_node(Op::Mul, a, b);
}

const Node* node_div(const Node* a, const Node* b) {
  if (is_const(a, 0.0)) return make_const(Rational{0, 1});
  if (is_const(b, 1.0)) return a;
  if (is_const(a) && is_const(b)) return fold_const(Op::Div, a, b);
  if (is_const(b)) {
    const Rational* rb = Pool::instance().exact_of(b);
    if (rb && rb->num != 0) return node_mul(make_const(Rational{rb->den, rb->num}), a);
    if (b->cval != 0.0) return node_mul(make_const(1.0 / b->cval), a);
  }
  if (pow_base(a) == pow_base(b))
    return node_pow(pow_base(a), pow_exponent(a) - pow_exponent(b));
  return make_node(Op::Div, a, b);
}

const Node* node_pow(const Node* a, int n) {
  if (n == 0) return make_const(Rational{1, 1});
  if (n == 1) return a;
  if (std::abs(n) > 1000000) throw ExprError("power exponent out of range");
  if (is_const(a)) {
    const Rational* ra = Pool::instance().exact_of(a);
    Rational out;
    if (ra && rat_pow(*ra, n, out)) return make_const(out);
    return make_const(std::pow(a->cval, n));
  }
  if (a->op == Op::Pow) return node_pow(a->a, a->aux * n);
  return make_node(Op::Pow, a, nullptr, n);
}

const Node* node_unary(Op op, const Node* a) {
  if (is_const(a)) {
    const Rational* ra = Pool::instance().exact_of(a);
    if (ra) {
      // Keep exactness only where the result is again rational.
      if (ra->num == 0) {
        switch (op) {
          case Op::Exp: return make_const(Rational{1, 1});
          case Op::Sin:
          case Op::Tan: return make_const(Rational{0, 1});
          case Op::Cos: return make_const(Rational{1, 1});
          case Op::Sqrt: return make_const(Rational{0, 1});
          default: break;
        }
      }
      if (op == Op::Ln && ra->num == ra->den) return make_const(Rational{0, 1});
      if (op == Op::Sqrt && ra->num > 0) {
        long long sn = std::llround(std::sqrt(static_cast<double>(ra->num)));
        long long sd = std::llround(std::sqrt(static_cast<double>(ra->den)));
        if (sn * sn == ra->num && sd * sd == ra->den) return make_const(Rational{sn, sd});
      }
    }
    double v = a->cval;
    switch (op) {
      case Op::Exp: return make_const(std::exp(v));
      case Op::Ln:
        if (v > 0.0) return make_const(std::log(v));
        break;  // leave the node; error surfaces at evaluation
      case Op::Sin: return make_const(std::sin(v));
      case Op::Cos: return make_const(std::cos(v));
      case Op::Tan: return make_const(std::tan(v));
      case Op::Sqrt:
        if (v >= 0.0) return make_const(std::sqrt(v));
        break;
      default: break;
    }
  }
  return make_node(op, a, nullptr);
}

const Node* diff_node(const Node* n, int var);

const Node* diff_impl(const Node* n, int var) {
  switch (n->op) {
    case Op::Const: return make_const(Rational{0, 1});
    case Op::Variable:
      return make_const(n->aux == var ? Rational{1, 1} : Rational{0, 1});
    case Op::Add: return node_add(diff_node(n->a, var), diff_node(n->b, var));
    case Op::Sub: return node_sub(diff_node(n->a, var), diff_node(n->b, var));
    case Op::Mul:
      return node_add(node_mul(diff_node(n->a, var), n->b),
                      node_mul(n->a, diff_node(n->b, var)));
    case Op::Div:
      return node_sub(node_div(diff_node(n->a, var), n->b),
                      node_div(node_mul(n->a, diff_node(n->b, var)), node_pow(n->b, 2)));
    case Op::Pow:
      return node_mul(node_mul(make_const(Rational{n->aux, 1}), node_pow(n->a, n->aux - 1)),
                      diff_node(n->a, var));
    case Op::Exp: return node_mul(node_unary(Op::Exp, n->a), diff_node(n->a, var));
    case Op::Ln: return node_div(diff_node(n->a, var), n->a);
    case Op::Sin: return node_mul(node_unary(Op::Cos, n->a), diff_node(n->a, var));
    case Op::Cos:
      return node_mul(make_const(Rational{-1, 1}),
                      node_mul(node_unary(Op::Sin, n->a), diff_node(n->a, var)));
    case Op::Tan:
      return node_mul(node_add(make_const(Rational{1, 1}), node_pow(node_unary(Op::Tan, n->a), 2)),
                      diff_node(n->a, var));
    case Op::Sqrt:
      return node_div(diff_node(n->a, var),
                      node_mul(make_const(Rational{2, 1}), node_unary(Op::Sqrt, n->a)));
  }
  throw ExprError("unhandled op in diff");
}

const Node* diff_node(const Node* n, int var) {
  Pool& pool = Pool::instance();
  if (const Node* hit = pool.cached_diff(n, var)) return hit;
  const Node* d = diff_impl(n, var);
  pool.store_diff(n, var, d);
  return d;
}

double eval_unary(Op op, double a) {
  switch (op) {
    case Op::Exp: return std::exp(a);
    case Op::Ln:
      if (a <= 0.0) throw DomainError("ln of non-positive argument", Op::Ln, a);
      return std::log(a);
    case Op::Sin: return std::sin(a);
    case Op::Cos: return std::cos(a);
    case Op::Tan:
      if (std::abs(std::cos(a)) < 1e-15) throw DomainError("tan at pole", Op::Tan, a);
      return std::tan(a);
    case Op::Sqrt:
      if (a < 0.0) throw DomainError("sqrt of negative argument", Op::Sqrt, a);
      return std::sqrt(a);
    default: throw ExprError("bad unary");
  }
}

double eval_ipow(double base, int n) {
  if (n < 0) {
    if (base == 0.0) throw DomainError("division by zero in negative power", Op::Pow, base);
    return 1.0 / eval_ipow(base, -n);
  }
  double acc = 1.0, b = base;
  while (n > 0) {
    if (n & 1) acc *= b;
    b *= b;
    n >>= 1;
  }
  return acc;
}

}  // namespace

// --- small types --------------------------------------------------------------

Point4 operator+(const Point4& a, const Point4& b) { return {a.x + b.x, a.y + b.y, a.u + b.u, a.v + b.v}; }
Point4 operator-(const Point4& a, const Point4& b) { return {a.x - b.x, a.y - b.y, a.u - b.u, a.v - b.v}; }
Point4 operator*(double s, const Point4& a) { return {s * a.x, s * a.y, s * a.u, s * a.v}; }
double dot(const Point4& a, const Point4& b) { return a.x * b.x + a.y * b.y + a.u * b.u + a.v * b.v; }
double norm(const Point4& a) { return std::sqrt(dot(a, a)); }

bool Box4::contains(const Point4& p, double slack) const {
  for (int i = 0; i < 4; ++i)
    if (p[i] < lo[i] - slack || p[i] > hi[i] + slack) return false;
  return true;
}

Box4 Box4::intersect(const Box4& o) const {
  Box4 out;
  for (int i = 0; i < 4; ++i) {
    out.lo[i] = std::max(lo[i], o.lo[i]);
    out.hi[i] = std::min(hi[i], o.hi[i]);
  }
  return out;
}

Point4 Box4::center() const { return 0.5 * (lo + hi); }

const char* op_name(Op op) {
  switch (op) {
    case Op::Const: return "const";
    case Op::Variable: return "var";
    case Op::Add: return "+";
    case Op::Sub: return "-";
    case Op::Mul: return "*";
    case Op::Div: return "/";
    case Op::Pow: return "^";
    case Op::Exp: return "exp";
    case Op::Ln: return "ln";
    case Op::Sin: return "sin";
    case Op::Cos: return "cos";
    case Op::Tan: return "tan";
    case Op::Sqrt: return "sqrt";
  }
  return "?";
}

DomainError::DomainError(std::string msg, Op op_, double arg_)
    : ExprError(msg + " (node '" + op_name(op_) + "', argument " + std::to_string(arg_) + ")"),
      op(op_),
      arg(arg_) {}

DegenerateGradientError::DegenerateGradientError(const Point4& p)
    : ExprError("degenerate gradient: dr = 0 at evaluation point"), point(p) {}

// --- ScalarField construction --------------------------------------------------

ScalarField constant(double v) { return ScalarField(make_const(v)); }
ScalarField constant(long long num, long long den) { return ScalarField(make_const(Rational{num, den})); }
ScalarField constant(const Rational& r) { return ScalarField(make_const(r)); }
ScalarField coordinate(Var v) {
  return ScalarField(Pool::instance().intern(Op::Variable, static_cast<int>(v), nullptr, nullptr, 0.0, nullptr));
}

namespace {
std::optional<Box4> merge_regions(const std::optional<Box4>& a, const std::optional<Box4>& b) {
  if (a && b) return a->intersect(*b);
  return a ? a : b;
}
}  // namespace

ScalarField operator+(const ScalarField& a, const ScalarField& b) {
  return {node_add(a.root(), b.root()), merge_regions(a.region(), b.region())};
}
ScalarField operator-(const ScalarField& a, const ScalarField& b) {
  return {node_sub(a.root(), b.root()), merge_regions(a.region(), b.region())};
}
ScalarField operator*(const ScalarField& a, const ScalarField& b) {
  return {node_mul(a.root(), b.root()), merge_regions(a.region(), b.region())};
}
ScalarField operator/(const ScalarField& a, const ScalarField& b) {
  return {node_div(a.root(), b.root()), merge_regions(a.region(), b.region())};
}
ScalarField operator-(const ScalarField& a) {
  return {node_mul(make_const(Rational{-1, 1}), a.root()), a.region()};
}

ScalarField operator+(const ScalarField& a, double b) { return a + constant(b); }
ScalarField operator+(double a, const ScalarField& b) { return constant(a) + b; }
ScalarField operator-(const ScalarField& a, double b) { return a - constant(b); }
ScalarField operator-(double a, const ScalarField& b) { return constant(a) - b; }
ScalarField operator*(const ScalarField& a, double b) { return a * constant(b); }
ScalarField operator*(double a, const ScalarField& b) { return constant(a) * b; }
ScalarField operator/(const ScalarField& a, double b) { return a / constant(b); }
ScalarField operator/(double a, const ScalarField& b) { return constant(a) / b; }

ScalarField pow(const ScalarField& a, int n) { return {node_pow(a.root(), n), a.region()}; }
ScalarField exp(const ScalarField& a) { return {node_unary(Op::Exp, a.root()), a.region()}; }
ScalarField ln(const ScalarField& a) { return {node_unary(Op::Ln, a.root()), a.region()}; }
ScalarField sin(const ScalarField& a) { return {node_unary(Op::Sin, a.root()), a.region()}; }
ScalarField cos(const ScalarField& a) { return {node_unary(Op::Cos, a.root()), a.region()}; }
ScalarField tan(const ScalarField& a) { return {node_unary(Op::Tan, a.root()), a.region()}; }
ScalarField sqrt(const ScalarField& a) { return {node_unary(Op::Sqrt, a.root()), a.region()}; }

std::size_t ScalarField::graph_size() const {
  if (!root_) return 0;
  std::vector<const Node*> stack{root_};
  std::unordered_map<const Node*, bool> seen;
  std::size_t count = 0;
  while (!stack.empty()) {
    const Node* n = stack.back();
    stack.pop_back();
    if (seen.count(n)) continue;
    seen[n] = true;
    ++count;
    if (n->a) stack.push_back(n->a);
    if (n->b) stack.push_back(n->b);
  }
  return count;
}

// --- evaluation -----------------------------------------------------------------

double eval(const ScalarField& f, const Point4& p) {
  if (f.empty()) throw ExprError("eval of empty field");
  // Iterative post-order walk with memoization.
  std::unordered_map<const Node*, double> memo;
  std::vector<std::pair<const Node*, bool>> stack;
  stack.emplace_back(f.root(), false);
  while (!stack.empty()) {
    auto [n, expanded] = stack.back();
    stack.pop_back();
    if (memo.count(n)) continue;
    if (!expanded) {
      stack.emplace_back(n, true);
      if (n->a && !memo.count(n->a)) stack.emplace_back(n->a, false);
      if (n->b && !memo.count(n->b)) stack.emplace_back(n->b, false);
      continue;
    }
    double v;
    switch (n->op) {
      case Op::Const: v = n->cval; break;
      case Op::Variable: v = p[n->aux]; break;
      case Op::Add: v = memo[n->a] + memo[n->b]; break;
      case Op::Sub: v = memo[n->a] - memo[n->b]; break;
      case Op::Mul: v = memo[n->a] * memo[n->b]; break;
      case Op::Div: {
        double d = memo[n->b];
        if (d == 0.0) throw DomainError("division by zero", Op::Div, d);
        v = memo[n->a] / d;
        break;
      }
      case Op::Pow: v = eval_ipow(memo[n->a], n->aux); break;
      default: v = eval_unary(n->op, memo[n->a]); break;
    }
    if (!std::isfinite(v)) throw DomainError("non-finite value", n->op, n->a ? memo[n->a] : n->cval);
    memo[n] = v;
  }
  return memo[f.root()];
}

ScalarField diff(const ScalarField& f, Var var) {
  if (f.empty()) throw ExprError("diff of empty field");
  std::lock_guard<std::recursive_mutex> lock(Pool::instance().mutex());
  return {diff_node(f.root(), static_cast<int>(var)), f.region()};
}

std::array<ScalarField, 4> gradient(const ScalarField& f) {
  return {diff(f, Var::x), diff(f, Var::y), diff(f, Var::u), diff(f, Var::v)};
}

ScalarField substitute(const ScalarField& f, const std::array<ScalarField, 4>& repl) {
  std::lock_guard<std::recursive_mutex> lock(Pool::instance().mutex());
  std::unordered_map<const Node*, const Node*> memo;
  // Post-order rebuild.
  std::vector<std::pair<const Node*, bool>> stack;
  stack.emplace_back(f.root(), false);
  while (!stack.empty()) {
    auto [n, expanded] = stack.back();
    stack.pop_back();
    if (memo.count(n)) continue;
    if (!expanded) {
      stack.emplace_back(n, true);
      if (n->a && !memo.count(n->a)) stack.emplace_back(n->a, false);
      if (n->b && !memo.count(n->b)) stack.emplace_back(n->b, false);
      continue;
    }
    const Node* out;
    switch (n->op) {
      case Op::Const: out = n; break;
      case Op::Variable: out = repl[n->aux].root(); break;
      case Op::Add: out = node_add(memo[n->a], memo[n->b]); break;
      case Op::Sub: out = node_sub(memo[n->a], memo[n->b]); break;
      case Op::Mul: out = node_mul(memo[n->a], memo[n->b]); break;
      case Op::Div: out = node_div(memo[n->a], memo[n->b]); break;
      case Op::Pow: out = node_pow(memo[n->a], n->aux); break;
      default: out = node_unary(n->op, memo[n->a]); break;
    }
    memo[n] = out;
  }
  return ScalarField(memo[f.root()]);
}

// --- ComplexField ----------------------------------------------------------------

ComplexField ComplexField::from_real(const ScalarField& re) {
  return {re, constant(0ll)};
}

ComplexField operator+(const ComplexField& a, const ComplexField& b) {
  return {a.re() + b.re(), a.im() + b.im()};
}
ComplexField operator-(const ComplexField& a, const ComplexField& b) {
  return {a.re() - b.re(), a.im() - b.im()};
}
ComplexField operator*(const ComplexField& a, const ComplexField& b) {
  return {a.re() * b.re() - a.im() * b.im(), a.re() * b.im() + a.im() * b.re()};
}
ComplexField operator-(const ComplexField& a) { return {-a.re(), -a.im()}; }
ComplexField operator*(const ScalarField& a, const ComplexField& b) {
  return {a * b.re(), a * b.im()};
}
ComplexField operator*(const ComplexField& a, const ScalarField& b) { return b * a; }
ComplexField operator/(const ComplexField& a, const ScalarField& b) {
  return {a.re() / b, a.im() / b};
}
ComplexField operator*(std::complex<double> a, const ComplexField& b) {
  ScalarField ar = constant(a.real()), ai = constant(a.imag());
  return {ar * b.re() - ai * b.im(), ar * b.im() + ai * b.re()};
}
ComplexField conj(const ComplexField& a) { return {a.re(), -a.im()}; }
ScalarField abs2(const ComplexField& a) { return a.re() * a.re() + a.im() * a.im(); }
ScalarField re_part(const ComplexField& a) { return a.re(); }
ScalarField im_part(const ComplexField& a) { return a.im(); }

std::complex<double> eval(const ComplexField& f, const Point4& p) {
  return {eval(f.re(), p), eval(f.im(), p)};
}

// --- Wirtinger operators -----------------------------------------------------------

namespace {
const ScalarField& half() {
  static const ScalarField h = constant(1ll, 2ll);
  return h;
}
}  // namespace

ComplexField dz(const ScalarField& f) {
  return {half() * diff(f, Var::x), constant(-1ll, 2ll) * diff(f, Var::y)};
}
ComplexField dzbar(const ScalarField& f) {
  return {half() * diff(f, Var::x), half() * diff(f, Var::y)};
}
ComplexField dw(const ScalarField& f) {
  return {half() * diff(f, Var::u), constant(-1ll, 2ll) * diff(f, Var::v)};
}
ComplexField dwbar(const ScalarField& f) {
  return {half() * diff(f, Var::u), half() * diff(f, Var::v)};
}

ComplexField dz(const ComplexField& f) {
  ComplexField r = dz(f.re()), i = dz(f.im());
  return {r.re() - i.im(), r.im() + i.re()};
}
ComplexField dzbar(const ComplexField& f) {
  ComplexField r = dzbar(f.re()), i = dzbar(f.im());
  return {r.re() - i.im(), r.im() + i.re()};
}
ComplexField dw(const ComplexField& f) {
  ComplexField r = dw(f.re()), i = dw(f.im());
  return {r.re() - i.im(), r.im() + i.re()};
}
ComplexField dwbar(const ComplexField& f) {
  ComplexField r = dwbar(f.re()), i = dwbar(f.im());
  return {r.re() - i.im(), r.im() + i.re()};
}

ComplexField wirtinger(const ScalarField& f, int az, int bz, int aw, int bw, int max_order) {
  if (az < 0 || bz < 0 || aw < 0 || bw < 0) throw ExprError("negative derivative order");
  if (az + bz + aw + bw > max_order)
    throw ExprError("Wirtinger derivative order " + std::to_string(az + bz + aw + bw) +
                    " exceeds maximum " + std::to_string(max_order));
  ComplexField g = ComplexField::from_real(f);
  for (int i = 0; i < az; ++i) g = dz(g);
  for (int i = 0; i < bz; ++i) g = dzbar(g);
  for (int i = 0; i < aw; ++i) g = dw(g);
  for (int i = 0; i < bw; ++i) g = dwbar(g);
  return g;
}

// --- holomorphic composition ----------------------------------------------------

HoloMap2 HoloMap2::identity() {
  HoloMap2 m;
  m.z_out.cz = 1.0;
  m.w_out.cw = 1.0;
  return m;
}

std::pair<std::complex<double>, std::complex<double>> HoloMap2::apply(
    std::complex<double> z, std::complex<double> w) const {
  auto ev = [&](const HoloPoly2& p) {
    return p.c0 + p.cz * z + p.cw * w + p.czz * z * z + p.czw * z * w + p.cww * w * w;
  };
  return {ev(z_out), ev(w_out)};
}

namespace {
ComplexField complex_coeff(std::complex<double> c) {
  return {constant(c.real()), constant(c.imag())};
}

ComplexField holo_poly_field(const HoloPoly2& p) {
  ComplexField z{coordinate(Var::x), coordinate(Var::y)};
  ComplexField w{coordinate(Var::u), coordinate(Var::v)};
  ComplexField out = complex_coeff(p.c0);
  out = out + complex_coeff(p.cz) * z + complex_coeff(p.cw) * w;
  out = out + complex_coeff(p.czz) * (z * z) + complex_coeff(p.czw) * (z * w) +
        complex_coeff(p.cww) * (w * w);
  return out;
}
}  // namespace

ScalarField compose_holo(const ScalarField& f, const HoloMap2& map) {
  ComplexField zp = holo_poly_field(map.z_out);
  ComplexField wp = holo_poly_field(map.w_out);
  return substitute(f, {zp.re(), zp.im(), wp.re(), wp.im()});
}

// --- Tape -----------------------------------------------------------------------

Tape Tape::compile(std::span<const Node* const> roots) {
  Tape t;
  std::unordered_map<const Node*, std::uint32_t> slot;
  std::vector<std::pair<const Node*, bool>> stack;
  for (const Node* r : roots) stack.emplace_back(r, false);
  while (!stack.empty()) {
    auto [n, expanded] = stack.back();
    stack.pop_back();
    if (slot.count(n)) continue;
    if (!expanded) {
      stack.emplace_back(n, true);
      if (n->a && !slot.count(n->a)) stack.emplace_back(n->a, false);
      if (n->b && !slot.count(n->b)) stack.emplace_back(n->b, false);
      continue;
    }
    if (slot.count(n)) continue;
    Instr ins;
    ins.op = n->op;
    ins.aux = n->aux;
    ins.cval = n->cval;
    ins.a = n->a ? slot.at(n->a) : 0;
    ins.b = n->b ? slot.at(n->b) : 0;
    slot[n] = static_cast<std::uint32_t>(t.code_.size());
    t.code_.push_back(ins);
  }
  for (const Node* r : roots) t.roots_.push_back(slot.at(r));
  return t;
}

Tape Tape::compile(const ScalarField& f) {
  const Node* r = f.root();
  return compile(std::span<const Node* const>(&r, 1));
}

Tape Tape::compile(std::initializer_list<ScalarField> fields) {
  std::vector<const Node*> roots;
  for (const auto& f : fields) roots.push_back(f.root());
  return compile(roots);
}

Tape Tape::compile_fields(std::span<const ScalarField> fields) {
  std::vector<const Node*> roots;
  for (const auto& f : fields) roots.push_back(f.root());
  return compile(roots);
}

void Tape::eval(const Point4& p, std::vector<double>& scratch, std::span<double> out) const {
  scratch.resize(code_.size());
  double* s = scratch.data();
  for (std::size_t i = 0; i < code_.size(); ++i) {
    const Instr& ins = code_[i];
    double v;
    switch (ins.op) {
      case Op::Const: v = ins.cval; break;
      case Op::Variable: v = p[ins.aux]; break;
      case Op::Add: v = s[ins.a] + s[ins.b]; break;
      case Op::Sub: v = s[ins.a] - s[ins.b]; break;
      case Op::Mul: v = s[ins.a] * s[ins.b]; break;
      case Op::Div: {
        double d = s[ins.b];
        if (d == 0.0) throw DomainError("division by zero", Op::Div, d);
        v = s[ins.a] / d;
        break;
      }
      case Op::Pow: v = eval_ipow(s[ins.a], ins.aux); break;
      default: v = eval_unary(ins.op, s[ins.a]); break;
    }
    if (!std::isfinite(v))
      throw DomainError("non-finite value", ins.op, ins.op == Op::Const ? ins.cval : s[ins.a]);
    s[i] = v;
  }
  for (std::size_t i = 0; i < roots_.size() && i < out.size(); ++i) out[i] = s[roots_[i]];
}

std::vector<double> Tape::eval(const Point4& p) const {
  std::vector<double> scratch, out(roots_.size());
  eval(p, scratch, out);
  return out;
}

}  // namespace pshlab
