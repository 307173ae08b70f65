#include "sgbp/schedule.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <stdexcept>

namespace sgbp {

namespace {

using Fn = std::function<double(double, double, double)>;

class Parser {
 public:
  explicit Parser(std::string src) : s_(std::move(src)) {}

  Fn parse() {
    Fn f = expr();
    skip();
    if (pos_ != s_.size()) fail("unexpected '" + std::string(1, s_[pos_]) + "'");
    return f;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    throw std::invalid_argument("bad schedule expression '" + s_ + "': " + what);
  }

  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }

  bool eat(char c) {
    skip();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  Fn expr() {
    Fn lhs = term();
    while (true) {
      if (eat('+')) {
        lhs = [a = lhs, b = term()](double t, double n, double al) { return a(t, n, al) + b(t, n, al); };
      } else if (eat('-')) {
        lhs = [a = lhs, b = term()](double t, double n, double al) { return a(t, n, al) - b(t, n, al); };
      } else {
        return lhs;
      }
    }
  }

  Fn term() {
    Fn lhs = power();
    while (true) {
      if (eat('*')) {
        lhs = [a = lhs, b = power()](double t, double n, double al) { return a(t, n, al) * b(t, n, al); };
      } else if (eat('/')) {
        lhs = [a = lhs, b = power()](double t, double n, double al) { return a(t, n, al) / b(t, n, al); };
      } else {
        return lhs;
      }
    }
  }

  Fn power() {
    Fn base = unary();
    if (eat('^')) {
      Fn e = power();
      return [base, e](double t, double n, double al) { return std::pow(base(t, n, al), e(t, n, al)); };
    }
    return base;
  }

  Fn unary() {
    if (eat('-')) {
      Fn f = unary();
      return [f](double t, double n, double al) { return -f(t, n, al); };
    }
    return primary();
  }

  Fn primary() {
    skip();
    if (eat('(')) {
      Fn f = expr();
      if (!eat(')')) fail("missing ')'");
      return f;
    }
    if (pos_ < s_.size() && (std::isdigit(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '.')) {
      std::size_t used = 0;
      const double v = std::stod(s_.substr(pos_), &used);
      pos_ += used;
      return [v](double, double, double) { return v; };
    }
    std::string name;
    while (pos_ < s_.size() && std::isalpha(static_cast<unsigned char>(s_[pos_]))) name += s_[pos_++];
    if (name == "t") return [](double t, double, double) { return t; };
    if (name == "nu") return [](double, double n, double) { return n; };
    if (name == "alpha") return [](double, double, double al) { return al; };
    double (*fn)(double) = nullptr;
    if (name == "log") fn = [](double x) { return std::log(x); };
    if (name == "exp") fn = [](double x) { return std::exp(x); };
    if (name == "sqrt") fn = [](double x) { return std::sqrt(x); };
    if (!fn) fail(name.empty() ? "expected a value" : "unknown name '" + name + "'");
    if (!eat('(')) fail("expected '(' after " + name);
    Fn arg = expr();
    if (!eat(')')) fail("missing ')'");
    return [fn, arg](double t, double n, double al) { return fn(arg(t, n, al)); };
  }

  std::string s_;
  std::size_t pos_ = 0;
};

}  // namespace

std::function<double(double, double, double)> compile_expression(const std::string& source) {
  return Parser(source).parse();
}

double StepSchedule::operator()(long t) const {
  const double tt = static_cast<double>(t);
  double a = 0.0;
  switch (kind) {
    case Kind::harmonic: a = 2.0 / (1.0 + tt); break;
    case Kind::ms_bound: a = alpha / (nu * (tt + 2.0)); break;
    case Kind::high_probability: a = 1.0 / (nu * (tt + 1.0)); break;
    case Kind::custom: a = compiled_(tt, nu, alpha); break;
  }
  if (!std::isfinite(a) || a <= 0.0) throw std::domain_error("step size must be positive, got " + std::to_string(a));
  return std::min(a, 1.0);
}

StepSchedule StepSchedule::harmonic() { return {}; }

StepSchedule StepSchedule::ms_bound(double alpha, double nu) {
  if (!(alpha > 1.0 && alpha < 2.0)) throw std::invalid_argument("ms-bound schedule needs 1 < alpha < 2");
  if (!(nu > 0.0)) throw std::invalid_argument("nu must be positive");
  StepSchedule s;
  s.kind = Kind::ms_bound;
  s.alpha = alpha;
  s.nu = nu;
  return s;
}

StepSchedule StepSchedule::high_probability(double nu) {
  if (!(nu > 0.0)) throw std::invalid_argument("nu must be positive");
  StepSchedule s;
  s.kind = Kind::high_probability;
  s.nu = nu;
  return s;
}

StepSchedule StepSchedule::custom(const std::string& expression, double alpha, double nu) {
  StepSchedule s;
  s.kind = Kind::custom;
  s.alpha = alpha;
  s.nu = nu;
  s.expression = expression;
  s.compiled_ = compile_expression(expression);
  return s;
}

StepSchedule StepSchedule::parse(const std::string& name, double alpha, double nu) {
  if (name == "paper") return harmonic();
  if (name == "msbound") return ms_bound(alpha, nu);
  if (name == "hp") return high_probability(nu);
  if (name.rfind("custom:", 0) == 0) return custom(name.substr(7), alpha, nu);
  throw std::invalid_argument("unknown schedule '" + name + "'");
}

}  // namespace sgbp
