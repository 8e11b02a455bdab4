#pragma once

// Small expression language for per-arc coefficient and datum functions of the
// arc parameter s: constants, `s`, `pi`, + - * /, integer powers with ^, and
// the functions sin, cos, min, max.

#include <cctype>
#include <cmath>
#include <string>
#include <vector>

#include "hjnet/errors.hpp"

namespace hjnet {

class Expr {
 public:
  Expr() = default;

  static Expr parse(const std::string& text);

  double operator()(double s) const {
    double stack[64];
    int top = 0;
    for (const Op& op : ops_) {
      switch (op.kind) {
        case OpKind::push: stack[top++] = op.value; break;
        case OpKind::var_s: stack[top++] = s; break;
        case OpKind::add: --top; stack[top - 1] += stack[top]; break;
        case OpKind::sub: --top; stack[top - 1] -= stack[top]; break;
        case OpKind::mul: --top; stack[top - 1] *= stack[top]; break;
        case OpKind::div: --top; stack[top - 1] /= stack[top]; break;
        case OpKind::neg: stack[top - 1] = -stack[top - 1]; break;
        case OpKind::ipow: stack[top - 1] = ipow(stack[top - 1], op.exponent); break;
        case OpKind::fsin: stack[top - 1] = std::sin(stack[top - 1]); break;
        case OpKind::fcos: stack[top - 1] = std::cos(stack[top - 1]); break;
        case OpKind::fmin: --top; stack[top - 1] = std::min(stack[top - 1], stack[top]); break;
        case OpKind::fmax: --top; stack[top - 1] = std::max(stack[top - 1], stack[top]); break;
      }
    }
    return stack[0];
  }

  // True when the expression never reads `s`.
  bool is_constant() const {
    for (const Op& op : ops_)
      if (op.kind == OpKind::var_s) return false;
    return true;
  }

  bool empty() const { return ops_.empty(); }
  const std::string& source() const { return source_; }

 private:
  enum class OpKind { push, var_s, add, sub, mul, div, neg, ipow, fsin, fcos, fmin, fmax };
  struct Op {
    OpKind kind;
    double value = 0;
    int exponent = 0;
  };

  static double ipow(double base, int e) {
    bool inv = e < 0;
    unsigned long n = inv ? -static_cast<long>(e) : e;
    double r = 1, b = base;
    while (n) {
      if (n & 1) r *= b;
      b *= b;
      n >>= 1;
    }
    return inv ? 1.0 / r : r;
  }

  std::vector<Op> ops_;
  std::string source_;

  friend class ExprParser;
};

class ExprParser {
 public:
  explicit ExprParser(const std::string& text) : text_(text) {}

  Expr run() {
    Expr e;
    e.source_ = text_;
    out_ = &e.ops_;
    parse_sum();
    skip_ws();
    if (pos_ != text_.size()) err("trailing characters");
    if (depth_check_ != 1) err("malformed expression");
    return e;
  }

 private:
  using OpKind = Expr::OpKind;

  void parse_sum() {
    parse_term();
    for (;;) {
      skip_ws();
      if (accept('+')) {
        parse_term();
        emit(OpKind::add);
      } else if (accept('-')) {
        parse_term();
        emit(OpKind::sub);
      } else {
        return;
      }
    }
  }

  void parse_term() {
    parse_unary();
    for (;;) {
      skip_ws();
      if (accept('*')) {
        parse_unary();
        emit(OpKind::mul);
      } else if (accept('/')) {
        parse_unary();
        emit(OpKind::div);
      } else {
        return;
      }
    }
  }

  void parse_unary() {
    skip_ws();
    if (accept('-')) {
      parse_unary();
      emit0(OpKind::neg);
      return;
    }
    parse_power();
  }

  void parse_power() {
    parse_primary();
    skip_ws();
    if (accept('^')) {
      skip_ws();
      bool neg = accept('-');
      if (pos_ >= text_.size() || !std::isdigit(static_cast<unsigned char>(text_[pos_])))
        err("integer exponent expected after ^");
      int e = 0;
      while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_])))
        e = e * 10 + (text_[pos_++] - '0');
      Expr::Op op;
      op.kind = OpKind::ipow;
      op.exponent = neg ? -e : e;
      out_->push_back(op);
    }
  }

  void parse_primary() {
    skip_ws();
    if (pos_ >= text_.size()) err("unexpected end of expression");
    char c = text_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      size_t used = 0;
      double v = std::stod(text_.substr(pos_), &used);
      pos_ += used;
      push_const(v);
      return;
    }
    if (accept('(')) {
      parse_sum();
      expect(')');
      return;
    }
    if (std::isalpha(static_cast<unsigned char>(c))) {
      std::string name;
      while (pos_ < text_.size() &&
             (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
        name += text_[pos_++];
      if (name == "s") {
        emit_var();
        return;
      }
      if (name == "pi") {
        push_const(3.14159265358979323846);
        return;
      }
      skip_ws();
      expect('(');
      if (name == "sin" || name == "cos") {
        parse_sum();
        expect(')');
        emit0(name == "sin" ? OpKind::fsin : OpKind::fcos);
        return;
      }
      if (name == "min" || name == "max") {
        parse_sum();
        skip_ws();
        expect(',');
        parse_sum();
        expect(')');
        emit(name == "min" ? OpKind::fmin : OpKind::fmax);
        return;
      }
      err("unknown function '" + name + "'");
    }
    err(std::string("unexpected character '") + c + "'");
  }

  void push_const(double v) {
    Expr::Op op;
    op.kind = OpKind::push;
    op.value = v;
    out_->push_back(op);
    ++depth_check_;
  }
  void emit_var() {
    Expr::Op op;
    op.kind = OpKind::var_s;
    out_->push_back(op);
    ++depth_check_;
  }
  void emit(OpKind k) {  // binary
    Expr::Op op;
    op.kind = k;
    out_->push_back(op);
    --depth_check_;
  }
  void emit0(OpKind k) {  // unary
    Expr::Op op;
    op.kind = k;
    out_->push_back(op);
  }

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }
  bool accept(char c) {
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }
  void expect(char c) {
    skip_ws();
    if (!accept(c)) err(std::string("expected '") + c + "'");
  }
  [[noreturn]] void err(const std::string& msg) {
    fail(errc::parse_error, "in expression '" + text_ + "': " + msg);
  }

  const std::string& text_;
  std::vector<Expr::Op>* out_ = nullptr;
  size_t pos_ = 0;
  int depth_check_ = 0;
};

inline Expr Expr::parse(const std::string& text) { return ExprParser(text).run(); }

}  // namespace hjnet
