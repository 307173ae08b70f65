#pragma once

#include <functional>
#include <string>

namespace sgbp {

/// Robbins-Monro step sizes α^(t), t = 1, 2, ...
struct StepSchedule {
  enum class Kind {
    harmonic,          ///< 2 / (1 + t)
    ms_bound,          ///< α / (ν (t + 2)), 1 < α < 2
    high_probability,  ///< 1 / (ν (t + 1))
    custom,            ///< user expression in t (and nu, alpha)
  };

  Kind kind = Kind::harmonic;
  double alpha = 1.5;
  double nu = 1.0;
  std::string expression;  ///< source of a custom schedule

  /// Step for iteration t ≥ 1, clipped to 1. Throws std::domain_error when
  /// a custom expression yields a non-positive or non-finite value.
  double operator()(long t) const;

  static StepSchedule harmonic();
  static StepSchedule ms_bound(double alpha, double nu);
  static StepSchedule high_probability(double nu);
  static StepSchedule custom(const std::string& expression, double alpha = 1.5, double nu = 1.0);

  /// Parses "paper", "msbound", "hp" or "custom:<expr>".
  static StepSchedule parse(const std::string& name, double alpha, double nu);

 private:
  std::function<double(double, double, double)> compiled_;
};

/// Compiles an arithmetic expression over the variables t, nu and alpha.
/// Supports + - * / ^, parentheses, unary minus, and log, exp, sqrt.
std::function<double(double t, double nu, double alpha)> compile_expression(const std::string& source);

}  // namespace sgbp
