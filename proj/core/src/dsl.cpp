#include "pshlab/dsl.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>

namespace pshlab {

ParseError::ParseError(const std::string& msg, std::size_t pos)
    : ExprError(msg + " at position " + std::to_string(pos)), position(pos) {}

namespace {

class Parser {
 public:
  Parser(const std::string& src, const std::map<std::string, double>& params)
      : src_(normalize(src)), params_(params) {}

  ScalarField parse() {
    ScalarField f = expression();
    skip_ws();
    if (pos_ != src_.size()) throw ParseError("unexpected trailing input", pos_);
    return f;
  }

 private:
  // Maps the UTF-8 minus sign (U+2212) to '-' so pasted formulas parse.
  static std::string normalize(const std::string& s) {
    std::string out;
    out.reserve(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (i + 2 < s.size() && static_cast<unsigned char>(s[i]) == 0xE2 &&
          static_cast<unsigned char>(s[i + 1]) == 0x88 &&
          static_cast<unsigned char>(s[i + 2]) == 0x92) {
        out += '-';
        i += 2;
      } else {
        out += s[i];
      }
    }
    return out;
  }

  void skip_ws() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
  }

  char peek() {
    skip_ws();
    return pos_ < src_.size() ? src_[pos_] : '\0';
  }

  bool accept(char c) {
    if (peek() == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char c, const char* what) {
    if (!accept(c)) throw ParseError(std::string("expected '") + c + "' (" + what + ")", pos_);
  }

  ScalarField expression() {
    ScalarField acc = term();
    for (;;) {
      if (accept('+'))
        acc = acc + term();
      else if (accept('-'))
        acc = acc - term();
      else
        return acc;
    }
  }

  ScalarField term() {
    ScalarField acc = factor();
    for (;;) {
      if (accept('*'))
        acc = acc * factor();
      else if (accept('/'))
        acc = acc / factor();
      else
        return acc;
    }
  }

  ScalarField factor() {
    if (accept('-')) return -factor();
    ScalarField base = primary();
    if (accept('^')) {
      int n = integer_exponent();
      return pshlab::pow(base, n);
    }
    return base;
  }

  int integer_exponent() {
    skip_ws();
    bool paren = accept('(');
    skip_ws();
    bool neg = accept('-');
    skip_ws();
    std::size_t start = pos_;
    while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    if (pos_ == start) throw ParseError("integer exponent required after '^'", pos_);
    if (pos_ < src_.size() && (src_[pos_] == '.' || src_[pos_] == 'e' || src_[pos_] == 'E'))
      throw ParseError("integer exponent required after '^'", pos_);
    long long n = std::strtoll(src_.substr(start, pos_ - start).c_str(), nullptr, 10);
    if (n > 1000) throw ParseError("exponent too large", start);
    if (paren) expect(')', "closing exponent");
    return static_cast<int>(neg ? -n : n);
  }

  ScalarField primary() {
    char c = peek();
    if (c == '(') {
      ++pos_;
      ScalarField f = expression();
      expect(')', "closing parenthesis");
      return f;
    }
    if (c == '$') {
      ++pos_;
      std::size_t start = pos_;
      std::string name = identifier();
      if (name.empty()) throw ParseError("parameter name expected after '$'", start);
      auto it = params_.find(name);
      if (it == params_.end()) throw ParseError("unbound parameter '$" + name + "'", start - 1);
      return constant(it->second);
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c))) {
      std::size_t start = pos_;
      std::string name = identifier();
      if (name == "x") return coordinate(Var::x);
      if (name == "y") return coordinate(Var::y);
      if (name == "u") return coordinate(Var::u);
      if (name == "v") return coordinate(Var::v);
      if (name == "absz2") return pow(coordinate(Var::x), 2) + pow(coordinate(Var::y), 2);
      if (name == "absw2") return pow(coordinate(Var::u), 2) + pow(coordinate(Var::v), 2);
      if (name == "pi") return constant(3.14159265358979323846);
      if (name == "ln" || name == "cos" || name == "sin" || name == "tan" || name == "exp" ||
          name == "sqrt") {
        expect('(', "function argument");
        ScalarField arg = expression();
        expect(')', "closing function argument");
        if (name == "ln") return ln(arg);
        if (name == "cos") return pshlab::cos(arg);
        if (name == "sin") return pshlab::sin(arg);
        if (name == "tan") return pshlab::tan(arg);
        if (name == "exp") return pshlab::exp(arg);
        return pshlab::sqrt(arg);
      }
      throw ParseError("unknown identifier '" + name + "'", start);
    }
    throw ParseError(c == '\0' ? "unexpected end of input" : std::string("unexpected character '") + c + "'",
                     pos_);
  }

  std::string identifier() {
    std::string out;
    while (pos_ < src_.size() &&
           (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_')) {
      out += src_[pos_++];
    }
    return out;
  }

  // Integer and decimal literals become exact rationals when they fit;
  // anything else falls back to a double constant.
  ScalarField number() {
    skip_ws();
    std::size_t start = pos_;
    while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    std::size_t int_end = pos_;
    long long frac_digits = 0;
    if (pos_ < src_.size() && src_[pos_] == '.') {
      ++pos_;
      std::size_t frac_start = pos_;
      while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
      frac_digits = static_cast<long long>(pos_ - frac_start);
      if (frac_digits == 0 && int_end == start)
        throw ParseError("malformed number", start);
    }
    long long exp10 = 0;
    bool has_exp = false;
    if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
      std::size_t save = pos_;
      ++pos_;
      bool neg = false;
      if (pos_ < src_.size() && (src_[pos_] == '+' || src_[pos_] == '-')) neg = src_[pos_++] == '-';
      std::size_t d0 = pos_;
      while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
      if (pos_ == d0) {
        pos_ = save;  // not an exponent, e.g. "2e" would be malformed anyway
      } else {
        has_exp = true;
        exp10 = std::strtoll(src_.substr(d0, pos_ - d0).c_str(), nullptr, 10);
        if (neg) exp10 = -exp10;
      }
    }
    std::string text = src_.substr(start, pos_ - start);
    if (text.empty() || text == ".") throw ParseError("malformed number", start);

    // Exact path: mantissa digits fit in 64 bits and the scale is modest.
    std::string digits;
    for (char ch : text) {
      if (std::isdigit(static_cast<unsigned char>(ch))) digits += ch;
      if (ch == 'e' || ch == 'E') break;
    }
    long long scale = frac_digits - (has_exp ? exp10 : 0);
    if (digits.size() <= 17 && scale > -18 && scale < 18) {
      long long mant = digits.empty() ? 0 : std::strtoll(digits.c_str(), nullptr, 10);
      long long num = mant, den = 1;
      bool ok = true;
      for (long long i = 0; i < std::llabs(scale) && ok; ++i) {
        if (scale > 0) {
          if (den > (1LL << 60) / 10) ok = false;
          den *= 10;
        } else {
          if (std::llabs(num) > (1LL << 60) / 10) ok = false;
          num *= 10;
        }
      }
      if (ok) return constant(num, den);
    }
    return constant(std::strtod(text.c_str(), nullptr));
  }

  std::string src_;
  std::map<std::string, double> params_;
  std::size_t pos_ = 0;
};

}  // namespace

ScalarField parse_field(const std::string& src, const std::map<std::string, double>& params) {
  return Parser(src, params).parse();
}

namespace {

// Precedence levels: 0 add/sub, 1 mul/div, 2 unary/pow, 3 atom.
void emit(const Node* n, std::string& out, int parent_prec, std::size_t max_size) {
  if (max_size && out.size() > max_size)
    throw ExprError("to_dsl: output exceeds the size cap");
  auto paren = [&](int prec, auto&& body) {
    bool need = prec < parent_prec;
    if (need) out += '(';
    body();
    if (need) out += ')';
  };
  switch (n->op) {
    case Op::Const: {
      bool neg = n->cval < 0;
      if (neg) out += '(';
      char buf[48];
      std::snprintf(buf, sizeof buf, "%.17g", n->cval);
      out += buf;
      if (neg) out += ')';
      return;
    }
    case Op::Variable: {
      static const char* names[4] = {"x", "y", "u", "v"};
      out += names[n->aux];
      return;
    }
    case Op::Add:
      paren(0, [&] {
        emit(n->a, out, 0, max_size);
        out += " + ";
        emit(n->b, out, 0, max_size);
      });
      return;
    case Op::Sub:
      paren(0, [&] {
        emit(n->a, out, 0, max_size);
        out += " - ";
        emit(n->b, out, 1, max_size);
      });
      return;
    case Op::Mul:
      paren(1, [&] {
        emit(n->a, out, 1, max_size);
        out += "*";
        emit(n->b, out, 1, max_size);
      });
      return;
    case Op::Div:
      paren(1, [&] {
        emit(n->a, out, 1, max_size);
        out += "/";
        emit(n->b, out, 2, max_size);
      });
      return;
    case Op::Pow:
      paren(2, [&] {
        emit(n->a, out, 3, max_size);
        out += "^";
        if (n->aux < 0) {
          out += "(" + std::to_string(n->aux) + ")";
        } else {
          out += std::to_string(n->aux);
        }
      });
      return;
    default:
      out += op_name(n->op);
      out += '(';
      emit(n->a, out, 0, max_size);
      out += ')';
      return;
  }
}

}  // namespace

std::string to_dsl(const ScalarField& f, std::size_t max_size) {
  if (f.empty()) throw ExprError("to_dsl: empty field");
  std::string out;
  emit(f.root(), out, 0, max_size);
  return out;
}

}  // namespace pshlab
