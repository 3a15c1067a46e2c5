#pragma once

// Arithmetic expressions for user-supplied charts.
//
//   expr    := term (('+' | '-') term)*
//   term    := unary (('*' | '/') unary)*
//   unary   := ('-' | '+') unary | power
//   power   := primary ('^' unary)?            (right associative)
//   primary := number | name | name '(' expr ')' | '(' expr ')'
//
// Names are parameters, user constants or `pi`. Functions: sin cos tan sinh
// cosh tanh exp log sqrt atan abs.

#include <cctype>
#include <cmath>
#include <map>
#include <memory>
#include <numbers>
#include <string>
#include <vector>

#include "qgv/errors.hpp"

namespace qgv {

class Expression {
 public:
  /// Parses `text`; `variables` are bound positionally at evaluation time and
  /// `constants` are folded in.
  static Expression parse(const std::string& text, const std::vector<std::string>& variables,
                          const std::map<std::string, double>& constants = {}) {
    Parser p{text, variables, constants, 0};
    Expression e;
    e.root_ = p.expr();
    p.skip();
    if (p.pos != text.size()) p.fail("unexpected '" + std::string(1, text[p.pos]) + "'");
    e.text_ = text;
    return e;
  }

  double operator()(const std::vector<double>& vars) const { return root_->eval(vars.data()); }
  double operator()(const double* vars) const { return root_->eval(vars); }
  const std::string& text() const { return text_; }

 private:
  struct Node {
    virtual ~Node() = default;
    virtual double eval(const double* vars) const = 0;
  };
  using Ptr = std::shared_ptr<const Node>;

  struct Num : Node {
    double v;
    explicit Num(double x) : v(x) {}
    double eval(const double*) const override { return v; }
  };
  struct Var : Node {
    std::size_t i;
    explicit Var(std::size_t k) : i(k) {}
    double eval(const double* vars) const override { return vars[i]; }
  };
  struct Neg : Node {
    Ptr a;
    explicit Neg(Ptr x) : a(std::move(x)) {}
    double eval(const double* vars) const override { return -a->eval(vars); }
  };
  struct Bin : Node {
    char op;
    Ptr a, b;
    Bin(char o, Ptr x, Ptr y) : op(o), a(std::move(x)), b(std::move(y)) {}
    double eval(const double* vars) const override {
      const double x = a->eval(vars), y = b->eval(vars);
      switch (op) {
        case '+': return x + y;
        case '-': return x - y;
        case '*': return x * y;
        case '/': return x / y;
        default: return std::pow(x, y);
      }
    }
  };
  struct Call : Node {
    double (*fn)(double);
    Ptr a;
    Call(double (*f)(double), Ptr x) : fn(f), a(std::move(x)) {}
    double eval(const double* vars) const override { return fn(a->eval(vars)); }
  };

  static double (*function(const std::string& name))(double) {
    static const std::map<std::string, double (*)(double)> table{
        {"sin", [](double x) { return std::sin(x); }},   {"cos", [](double x) { return std::cos(x); }},
        {"tan", [](double x) { return std::tan(x); }},   {"sinh", [](double x) { return std::sinh(x); }},
        {"cosh", [](double x) { return std::cosh(x); }}, {"tanh", [](double x) { return std::tanh(x); }},
        {"exp", [](double x) { return std::exp(x); }},   {"log", [](double x) { return std::log(x); }},
        {"sqrt", [](double x) { return std::sqrt(x); }}, {"atan", [](double x) { return std::atan(x); }},
        {"abs", [](double x) { return std::abs(x); }}};
    auto it = table.find(name);
    return it == table.end() ? nullptr : it->second;
  }

  struct Parser {
    const std::string& s;
    const std::vector<std::string>& vars;
    const std::map<std::string, double>& consts;
    std::size_t pos;

    [[noreturn]] void fail(const std::string& msg) const {
      throw ParseError("expression '" + s + "' at column " + std::to_string(pos + 1) + ": " + msg);
    }
    void skip() {
      while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
    }
    bool eat(char c) {
      skip();
      if (pos < s.size() && s[pos] == c) {
        ++pos;
        return true;
      }
      return false;
    }

    Ptr expr() {
      Ptr lhs = term();
      while (true) {
        if (eat('+')) lhs = std::make_shared<Bin>('+', lhs, term());
        else if (eat('-')) lhs = std::make_shared<Bin>('-', lhs, term());
        else return lhs;
      }
    }
    Ptr term() {
      Ptr lhs = unary();
      while (true) {
        if (eat('*')) lhs = std::make_shared<Bin>('*', lhs, unary());
        else if (eat('/')) lhs = std::make_shared<Bin>('/', lhs, unary());
        else return lhs;
      }
    }
    Ptr unary() {
      if (eat('-')) return std::make_shared<Neg>(unary());
      if (eat('+')) return unary();
      return power();
    }
    Ptr power() {
      Ptr base = primary();
      if (eat('^')) return std::make_shared<Bin>('^', base, unary());
      return base;
    }
    Ptr primary() {
      skip();
      if (pos >= s.size()) fail("unexpected end of input");
      const char c = s[pos];
      if (c == '(') {
        ++pos;
        Ptr inner = expr();
        if (!eat(')')) fail("expected ')'");
        return inner;
      }
      if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
        std::size_t used = 0;
        double v = 0.0;
        try {
          v = std::stod(s.substr(pos), &used);
        } catch (const std::exception&) {
          fail("malformed number");
        }
        pos += used;
        return std::make_shared<Num>(v);
      }
      if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
        const std::size_t start = pos;
        while (pos < s.size() && (std::isalnum(static_cast<unsigned char>(s[pos])) || s[pos] == '_')) ++pos;
        const std::string name = s.substr(start, pos - start);
        if (eat('(')) {
          auto fn = function(name);
          if (!fn) fail("unknown function '" + name + "'");
          Ptr arg = expr();
          if (!eat(')')) fail("expected ')' after argument of " + name);
          return std::make_shared<Call>(fn, arg);
        }
        for (std::size_t i = 0; i < vars.size(); ++i)
          if (vars[i] == name) return std::make_shared<Var>(i);
        if (auto it = consts.find(name); it != consts.end()) return std::make_shared<Num>(it->second);
        if (name == "pi") return std::make_shared<Num>(std::numbers::pi);
        fail("unknown name '" + name + "'");
      }
      fail("unexpected '" + std::string(1, c) + "'");
    }
  };

  Ptr root_;
  std::string text_;
};

}  // namespace qgv
