#pragma once

// Expression language for functions of z on the closed unit disc: parsing,
// printing, evaluation and symbolic Wirtinger calculus.

#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <complex>
#include <cstddef>
#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace discalg {

using cplx = std::complex<double>;

enum class Kind {
  constant,
  var,
  conj,
  neg,
  add,
  sub,
  mul,
  div,
  pow,
  re,
  im,
  abs2,
  exp
};

class Expr;

namespace detail {

struct Node {
  Kind kind;
  cplx value{};       // constant payload
  unsigned power = 0; // exponent for Kind::pow
  std::vector<Expr> args;
};

} // namespace detail

/// Immutable expression tree. Copies share structure.
class Expr {
public:
  Expr() : Expr(cplx{0.0, 0.0}) {}
  Expr(cplx c) : node_(std::make_shared<const detail::Node>(detail::Node{Kind::constant, c, 0, {}})) {}
  Expr(double c) : Expr(cplx{c, 0.0}) {}

  static Expr z() { return Expr(detail::Node{Kind::var, {}, 0, {}}); }
  static Expr make(Kind k, std::vector<Expr> args, unsigned power = 0) {
    return Expr(detail::Node{k, {}, power, std::move(args)});
  }

  Kind kind() const { return node_->kind; }
  cplx value() const { return node_->value; }
  unsigned power() const { return node_->power; }
  const std::vector<Expr>& args() const { return node_->args; }
  const Expr& arg(std::size_t i = 0) const { return node_->args.at(i); }
  const void* id() const { return node_.get(); }

  bool is_constant() const { return kind() == Kind::constant; }
  bool is_constant(cplx c) const { return is_constant() && value() == c; }

private:
  explicit Expr(detail::Node n) : node_(std::make_shared<const detail::Node>(std::move(n))) {}
  std::shared_ptr<const detail::Node> node_;
};

inline bool structurally_equal(const Expr& a, const Expr& b) {
  if (a.id() == b.id()) return true;
  if (a.kind() != b.kind() || a.args().size() != b.args().size()) return false;
  if (a.kind() == Kind::constant && a.value() != b.value()) return false;
  if (a.kind() == Kind::pow && a.power() != b.power()) return false;
  for (std::size_t i = 0; i < a.args().size(); ++i)
    if (!structurally_equal(a.arg(i), b.arg(i))) return false;
  return true;
}

inline std::size_t node_count(const Expr& e) {
  std::size_t n = 1;
  for (const auto& a : e.args()) n += node_count(a);
  return n;
}

// ---------------------------------------------------------------------------
// Folding constructors. Constant subtrees collapse to a single constant and
// the additive/multiplicative identities (0 and 1) are dropped.

inline Expr conj(const Expr& u) {
  if (u.is_constant()) return Expr(std::conj(u.value()));
  return Expr::make(Kind::conj, {u});
}

inline Expr operator-(const Expr& u) {
  if (u.is_constant()) return Expr(-u.value());
  return Expr::make(Kind::neg, {u});
}

inline Expr operator+(const Expr& a, const Expr& b) {
  if (a.is_constant() && b.is_constant()) return Expr(a.value() + b.value());
  if (a.is_constant(0.0)) return b;
  if (b.is_constant(0.0)) return a;
  return Expr::make(Kind::add, {a, b});
}

inline Expr operator-(const Expr& a, const Expr& b) {
  if (a.is_constant() && b.is_constant()) return Expr(a.value() - b.value());
  if (b.is_constant(0.0)) return a;
  if (a.is_constant(0.0)) return -b;
  return Expr::make(Kind::sub, {a, b});
}

inline Expr operator*(const Expr& a, const Expr& b) {
  if (a.is_constant() && b.is_constant()) return Expr(a.value() * b.value());
  if (a.is_constant(0.0) || b.is_constant(0.0)) return Expr(0.0);
  if (a.is_constant(1.0)) return b;
  if (b.is_constant(1.0)) return a;
  return Expr::make(Kind::mul, {a, b});
}

inline Expr operator/(const Expr& a, const Expr& b) {
  if (a.is_constant() && b.is_constant() && b.value() != cplx{0.0, 0.0})
    return Expr(a.value() / b.value());
  if (a.is_constant(0.0) && !b.is_constant(0.0)) return Expr(0.0);
  if (b.is_constant(1.0)) return a;
  return Expr::make(Kind::div, {a, b});
}

inline Expr pow(const Expr& u, unsigned n) {
  if (n == 0) return Expr(1.0);
  if (n == 1) return u;
  if (u.is_constant()) {
    cplx acc{1.0, 0.0};
    for (unsigned k = 0; k < n; ++k) acc *= u.value();
    return Expr(acc);
  }
  return Expr::make(Kind::pow, {u}, n);
}

inline Expr exp(const Expr& u) {
  if (u.is_constant()) return Expr(std::exp(u.value()));
  return Expr::make(Kind::exp, {u});
}

inline Expr re(const Expr& u) {
  if (u.is_constant()) return Expr(u.value().real());
  return Expr::make(Kind::re, {u});
}

inline Expr im(const Expr& u) {
  if (u.is_constant()) return Expr(u.value().imag());
  return Expr::make(Kind::im, {u});
}

inline Expr abs2(const Expr& u) {
  if (u.is_constant()) return Expr(std::norm(u.value()));
  return Expr::make(Kind::abs2, {u});
}

// ---------------------------------------------------------------------------
// Printing

namespace detail {

inline std::string format_real(double x) {
  std::array<char, 64> buf{};
  auto res = std::to_chars(buf.data(), buf.data() + buf.size(), x);
  return std::string(buf.data(), res.ptr);
}

inline std::string format_constant(cplx c) {
  if (c.imag() == 0.0 && c.real() >= 0.0 && !std::signbit(c.real())) return format_real(c.real());
  if (c == cplx{0.0, 1.0}) return "i";
  if (c.imag() == 0.0) return "(-" + format_real(-c.real()) + ")";
  if (c.real() == 0.0 && c.imag() > 0.0) return "(" + format_real(c.imag()) + "*i)";
  std::string s = "(" + format_real(std::abs(c.real()));
  if (std::signbit(c.real())) s = "(-" + format_real(-c.real());
  s += c.imag() < 0.0 ? "-" : "+";
  s += format_real(std::abs(c.imag())) + "*i)";
  return s;
}

// Binding strength: add/sub 1, mul/div 2, neg 3, pow 4, atoms 5.
inline int precedence(const Expr& e) {
  switch (e.kind()) {
  case Kind::add:
  case Kind::sub: return 1;
  case Kind::mul:
  case Kind::div: return 2;
  case Kind::neg: return 3;
  case Kind::pow: return 4;
  default: return 5;
  }
}

inline void print_to(const Expr& e, std::string& out);

inline void print_wrapped(const Expr& e, bool wrap, std::string& out) {
  if (wrap) out += '(';
  print_to(e, out);
  if (wrap) out += ')';
}

inline void print_call(const char* name, const Expr& e, std::string& out) {
  out += name;
  out += '(';
  print_to(e.arg(), out);
  out += ')';
}

inline void print_to(const Expr& e, std::string& out) {
  switch (e.kind()) {
  case Kind::constant: out += format_constant(e.value()); return;
  case Kind::var: out += 'z'; return;
  case Kind::conj: print_call("conj", e, out); return;
  case Kind::re: print_call("re", e, out); return;
  case Kind::im: print_call("im", e, out); return;
  case Kind::abs2: print_call("abs2", e, out); return;
  case Kind::exp: print_call("exp", e, out); return;
  case Kind::neg:
    out += '-';
    print_wrapped(e.arg(), precedence(e.arg()) < 3, out);
    return;
  case Kind::pow:
    print_wrapped(e.arg(), precedence(e.arg()) < 4, out);
    out += '^';
    out += std::to_string(e.power());
    return;
  case Kind::add:
  case Kind::sub:
  case Kind::mul:
  case Kind::div: {
    const int p = precedence(e);
    const char op = e.kind() == Kind::add ? '+' : e.kind() == Kind::sub ? '-' : e.kind() == Kind::mul ? '*' : '/';
    print_wrapped(e.arg(0), precedence(e.arg(0)) < p, out);
    out += op;
    // Left associative: an equal-precedence right operand needs parentheses.
    print_wrapped(e.arg(1), precedence(e.arg(1)) <= p && precedence(e.arg(1)) != 3, out);
    return;
  }
  }
}

} // namespace detail

/// Prints in the parser's grammar with minimal parentheses.
inline std::string to_string(const Expr& e) {
  std::string out;
  detail::print_to(e, out);
  return out;
}

// ---------------------------------------------------------------------------
// Parsing

class ParseError : public std::runtime_error {
public:
  ParseError(std::size_t offset, std::string expected, std::string found)
      : std::runtime_error("parse error at offset " + std::to_string(offset) + ": expected " + expected +
                           ", found " + found),
        offset_(offset), expected_(std::move(expected)), found_(std::move(found)) {}

  std::size_t offset() const { return offset_; }
  const std::string& expected() const { return expected_; }
  const std::string& found() const { return found_; }

private:
  std::size_t offset_;
  std::string expected_;
  std::string found_;
};

namespace detail {

enum class Tok { number, ident, plus, minus, star, slash, caret, lparen, rparen, end };

struct Token {
  Tok type;
  std::size_t offset;
  std::string_view text;
  double number = 0.0;
};

inline std::string describe(const Token& t) {
  if (t.type == Tok::end) return "end of input";
  return "'" + std::string(t.text) + "'";
}

class Lexer {
public:
  explicit Lexer(std::string_view src) : src_(src) {}

  Token next() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    const std::size_t start = pos_;
    if (pos_ >= src_.size()) return {Tok::end, src_.size(), {}};
    const char c = src_[pos_];
    auto single = [&](Tok t) {
      ++pos_;
      return Token{t, start, src_.substr(start, 1)};
    };
    switch (c) {
    case '+': return single(Tok::plus);
    case '-': return single(Tok::minus);
    case '*': return single(Tok::star);
    case '/': return single(Tok::slash);
    case '^': return single(Tok::caret);
    case '(': return single(Tok::lparen);
    case ')': return single(Tok::rparen);
    default: break;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number(start);
    if (std::isalpha(static_cast<unsigned char>(c))) {
      while (pos_ < src_.size() && std::isalnum(static_cast<unsigned char>(src_[pos_]))) ++pos_;
      return {Tok::ident, start, src_.substr(start, pos_ - start)};
    }
    throw ParseError(start, "token", "'" + std::string(1, c) + "'");
  }

private:
  Token number(std::size_t start) {
    auto digits = [&] {
      std::size_t n = 0;
      while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_, ++n;
      return n;
    };
    std::size_t n = digits();
    if (pos_ < src_.size() && src_[pos_] == '.') {
      ++pos_;
      n += digits();
    }
    if (n == 0) throw ParseError(start, "digit", "'.'");
    if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
      std::size_t save = pos_++;
      if (pos_ < src_.size() && (src_[pos_] == '+' || src_[pos_] == '-')) ++pos_;
      if (digits() == 0) pos_ = save; // not an exponent; leave 'e' for the next token
    }
    Token t{Tok::number, start, src_.substr(start, pos_ - start)};
    auto res = std::from_chars(t.text.data(), t.text.data() + t.text.size(), t.number);
    if (res.ec != std::errc{}) throw ParseError(start, "number", describe(t));
    return t;
  }

  std::string_view src_;
  std::size_t pos_ = 0;
};

// Grammar:
//   sum     := product (('+' | '-') product)*
//   product := unary (('*' | '/') unary)*
//   unary   := '-' unary | power
//   power   := primary ('^' INTEGER)*
//   primary := NUMBER | 'z' | 'i' | FUNC '(' sum ')' | '(' sum ')'
class Parser {
public:
  explicit Parser(std::string_view src) : lex_(src) { advance(); }

  Expr parse_all() {
    Expr e = sum();
    if (cur_.type != Tok::end) throw ParseError(cur_.offset, "operator or end of input", describe(cur_));
    return e;
  }

private:
  void advance() { cur_ = lex_.next(); }

  void expect(Tok t, const char* what) {
    if (cur_.type != t) throw ParseError(cur_.offset, what, describe(cur_));
    advance();
  }

  Expr sum() {
    Expr lhs = product();
    while (cur_.type == Tok::plus || cur_.type == Tok::minus) {
      const Kind k = cur_.type == Tok::plus ? Kind::add : Kind::sub;
      advance();
      lhs = Expr::make(k, {lhs, product()});
    }
    return lhs;
  }

  Expr product() {
    Expr lhs = unary();
    while (cur_.type == Tok::star || cur_.type == Tok::slash) {
      const Kind k = cur_.type == Tok::star ? Kind::mul : Kind::div;
      advance();
      lhs = Expr::make(k, {lhs, unary()});
    }
    return lhs;
  }

  Expr unary() {
    if (cur_.type == Tok::minus) {
      advance();
      return Expr::make(Kind::neg, {unary()});
    }
    return power();
  }

  Expr power() {
    Expr base = primary();
    while (cur_.type == Tok::caret) {
      advance();
      const bool integral = cur_.type == Tok::number &&
                            cur_.text.find_first_not_of("0123456789") == std::string_view::npos;
      if (!integral) throw ParseError(cur_.offset, "nonnegative integer exponent", describe(cur_));
      unsigned n = 0;
      auto res = std::from_chars(cur_.text.data(), cur_.text.data() + cur_.text.size(), n);
      if (res.ec != std::errc{}) throw ParseError(cur_.offset, "exponent in range", describe(cur_));
      advance();
      base = Expr::make(Kind::pow, {base}, n);
    }
    return base;
  }

  Expr primary() {
    const Token t = cur_;
    switch (t.type) {
    case Tok::number: advance(); return Expr(t.number);
    case Tok::lparen: {
      advance();
      Expr e = sum();
      expect(Tok::rparen, "')'");
      return e;
    }
    case Tok::ident: {
      advance();
      if (t.text == "z") return Expr::z();
      if (t.text == "i") return Expr(cplx{0.0, 1.0});
      static const std::pair<std::string_view, Kind> funcs[] = {
          {"conj", Kind::conj}, {"re", Kind::re}, {"im", Kind::im}, {"abs2", Kind::abs2}, {"exp", Kind::exp}};
      for (const auto& [name, kind] : funcs) {
        if (t.text != name) continue;
        expect(Tok::lparen, "'('");
        Expr inner = sum();
        expect(Tok::rparen, "')'");
        return Expr::make(kind, {inner});
      }
      throw ParseError(t.offset, "operand", describe(t));
    }
    default: throw ParseError(t.offset, "operand", describe(t));
    }
  }

  Lexer lex_;
  Token cur_{Tok::end, 0, {}};
};

} // namespace detail

/// Parses the expression grammar. The AST mirrors the source exactly; no folding.
inline Expr parse(std::string_view source) { return detail::Parser(source).parse_all(); }

// ---------------------------------------------------------------------------
// Evaluation

class DomainError : public std::domain_error {
public:
  explicit DomainError(const Expr& culprit)
      : std::domain_error("division by zero in " + to_string(culprit)), culprit_(culprit) {}
  const Expr& culprit() const { return culprit_; }

private:
  Expr culprit_;
};

inline cplx eval(const Expr& e, cplx z) {
  switch (e.kind()) {
  case Kind::constant: return e.value();
  case Kind::var: return z;
  case Kind::conj: return std::conj(eval(e.arg(), z));
  case Kind::neg: return -eval(e.arg(), z);
  case Kind::add: return eval(e.arg(0), z) + eval(e.arg(1), z);
  case Kind::sub: return eval(e.arg(0), z) - eval(e.arg(1), z);
  case Kind::mul: return eval(e.arg(0), z) * eval(e.arg(1), z);
  case Kind::div: {
    const cplx num = eval(e.arg(0), z);
    const cplx den = eval(e.arg(1), z);
    if (den == cplx{0.0, 0.0}) throw DomainError(e);
    return num / den;
  }
  case Kind::pow: {
    const cplx u = eval(e.arg(), z);
    cplx acc{1.0, 0.0};
    for (unsigned k = 0; k < e.power(); ++k) acc *= u;
    return acc;
  }
  case Kind::re: return eval(e.arg(), z).real();
  case Kind::im: return eval(e.arg(), z).imag();
  case Kind::abs2: return std::norm(eval(e.arg(), z));
  case Kind::exp: return std::exp(eval(e.arg(), z));
  }
  return {};
}

/// Flattened form of an expression for repeated evaluation. Shared subtrees
/// (common in derivative trees) are evaluated once per call.
class Program {
public:
  explicit Program(const Expr& e) {
    std::unordered_map<const void*, std::size_t> seen;
    root_ = emit(e, seen);
  }

  cplx operator()(cplx z) const {
    thread_local std::vector<cplx> reg;
    reg.resize(ops_.size());
    for (std::size_t k = 0; k < ops_.size(); ++k) {
      const Op& op = ops_[k];
      const cplx a = op.a < k ? reg[op.a] : cplx{};
      const cplx b = op.b < k ? reg[op.b] : cplx{};
      cplx v;
      switch (op.kind) {
      case Kind::constant: v = op.value; break;
      case Kind::var: v = z; break;
      case Kind::conj: v = std::conj(a); break;
      case Kind::neg: v = -a; break;
      case Kind::add: v = a + b; break;
      case Kind::sub: v = a - b; break;
      case Kind::mul: v = a * b; break;
      case Kind::div:
        if (b == cplx{0.0, 0.0}) throw DomainError(sources_[k]);
        v = a / b;
        break;
      case Kind::pow:
        v = cplx{1.0, 0.0};
        for (unsigned p = 0; p < op.power; ++p) v *= a;
        break;
      case Kind::re: v = a.real(); break;
      case Kind::im: v = a.imag(); break;
      case Kind::abs2: v = std::norm(a); break;
      case Kind::exp: v = std::exp(a); break;
      }
      reg[k] = v;
    }
    return reg[root_];
  }

  std::size_t size() const { return ops_.size(); }

private:
  static constexpr std::size_t none = static_cast<std::size_t>(-1);

  struct Op {
    Kind kind;
    cplx value;
    unsigned power;
    std::size_t a, b;
  };

  std::size_t emit(const Expr& e, std::unordered_map<const void*, std::size_t>& seen) {
    if (auto it = seen.find(e.id()); it != seen.end()) return it->second;
    std::size_t a = none, b = none;
    if (!e.args().empty()) a = emit(e.arg(0), seen);
    if (e.args().size() > 1) b = emit(e.arg(1), seen);
    sources_.push_back(e);
    ops_.push_back(Op{e.kind(), e.value(), e.power(), a, b});
    return seen[e.id()] = ops_.size() - 1;
  }

  std::vector<Op> ops_;
  std::vector<Expr> sources_;
  std::size_t root_ = 0;
};

// ---------------------------------------------------------------------------
// Wirtinger calculus

namespace detail {

// re, im and abs2 rewritten in conj-arithmetic; everything else untouched.
inline Expr desugar(const Expr& e) {
  switch (e.kind()) {
  case Kind::re: {
    Expr u = e.arg();
    return (u + conj(u)) / Expr(2.0);
  }
  case Kind::im: {
    Expr u = e.arg();
    return (u - conj(u)) / Expr(cplx{0.0, 2.0});
  }
  case Kind::abs2: {
    Expr u = e.arg();
    return u * conj(u);
  }
  default: return e;
  }
}

enum class Slot { z, zbar };

class Differentiator {
public:
  Expr d(const Expr& e, Slot slot) {
    auto& memo = memo_[slot == Slot::z ? 0 : 1];
    if (auto it = memo.find(e.id()); it != memo.end()) return it->second;
    Expr r = compute(e, slot);
    keep_.push_back(e);
    memo.emplace(e.id(), r);
    return r;
  }

private:
  Expr compute(const Expr& e, Slot slot) {
    switch (e.kind()) {
    case Kind::constant: return Expr(0.0);
    case Kind::var: return Expr(slot == Slot::z ? 1.0 : 0.0);
    // d_z conj(u) = conj(d_zbar u) and vice versa
    case Kind::conj: return conj(d(e.arg(), slot == Slot::z ? Slot::zbar : Slot::z));
    case Kind::neg: return -d(e.arg(), slot);
    case Kind::add: return d(e.arg(0), slot) + d(e.arg(1), slot);
    case Kind::sub: return d(e.arg(0), slot) - d(e.arg(1), slot);
    case Kind::mul: return d(e.arg(0), slot) * e.arg(1) + e.arg(0) * d(e.arg(1), slot);
    case Kind::div: {
      const Expr& u = e.arg(0);
      const Expr& v = e.arg(1);
      return (d(u, slot) * v - u * d(v, slot)) / pow(v, 2);
    }
    case Kind::pow: {
      const unsigned n = e.power();
      if (n == 0) return Expr(0.0);
      return Expr(static_cast<double>(n)) * pow(e.arg(), n - 1) * d(e.arg(), slot);
    }
    case Kind::exp: return e * d(e.arg(), slot);
    case Kind::re:
    case Kind::im:
    case Kind::abs2: return d(desugar(e), slot);
    }
    return Expr(0.0);
  }

  std::unordered_map<const void*, Expr> memo_[2];
  std::vector<Expr> keep_; // pins memo keys so addresses are not reused
};

} // namespace detail

/// Symbolic d/dz = (d/dx - i d/dy)/2.
inline Expr wirtinger_dz(const Expr& e) { return detail::Differentiator().d(e, detail::Slot::z); }

/// Symbolic d/dzbar = (d/dx + i d/dy)/2.
inline Expr wirtinger_dzbar(const Expr& e) { return detail::Differentiator().d(e, detail::Slot::zbar); }

/// Laplacian with the convention 4 d^2/(dz dzbar).
inline Expr laplacian(const Expr& e) { return Expr(4.0) * wirtinger_dz(wirtinger_dzbar(e)); }

} // namespace discalg
