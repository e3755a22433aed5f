#pragma once

// Parser property suites shared by the unit tests and the acceptance binary.
// The reference values come from direct arithmetic, not from the library.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <random>
#include <string>
#include <vector>

#include "slm/expr.hpp"

namespace props {

using namespace slm;
using namespace slm::ast;

// Random polynomial sum c_k x1^a_k x2^b_k with a + b <= 4.
struct Poly {
  std::vector<double> c;
  std::vector<int> a, b;

  std::string text() const {
    std::string s;
    for (std::size_t k = 0; k < c.size(); ++k) {
      if (k) s += " + ";
      char buf[64];
      std::snprintf(buf, sizeof buf, "(%.17g)*x1^%d*x2^%d", c[k], a[k], b[k]);
      s += buf;
    }
    return s;
  }
  double d1(double x1, double x2) const {
    double s = 0;
    for (std::size_t k = 0; k < c.size(); ++k)
      if (a[k] > 0) s += c[k] * a[k] * std::pow(x1, a[k] - 1) * std::pow(x2, b[k]);
    return s;
  }
  double d2(double x1, double x2) const {
    double s = 0;
    for (std::size_t k = 0; k < c.size(); ++k)
      if (a[k] > 1) s += c[k] * a[k] * (a[k] - 1) * std::pow(x1, a[k] - 2) * std::pow(x2, b[k]);
    return s;
  }
  // Scale for the relative error: the sum of term magnitudes of the derivative.
  double d1_scale(double x1, double x2) const {
    double s = 0;
    for (std::size_t k = 0; k < c.size(); ++k)
      if (a[k] > 0) s += std::fabs(c[k] * a[k] * std::pow(x1, a[k] - 1) * std::pow(x2, b[k]));
    return s;
  }
  double f_scale(double x1, double x2) const {
    double s = 0;
    for (std::size_t k = 0; k < c.size(); ++k)
      s += std::fabs(c[k] * std::pow(x1, a[k]) * std::pow(x2, b[k]));
    return s;
  }
  double d2_scale(double x1, double x2) const {
    double s = 0;
    for (std::size_t k = 0; k < c.size(); ++k)
      if (a[k] > 1)
        s += std::fabs(c[k] * a[k] * (a[k] - 1) * std::pow(x1, a[k] - 2) * std::pow(x2, b[k]));
    return s;
  }
};

class RandomAst {
 public:
  RandomAst(std::uint64_t seed, std::size_t dim) : gen_(seed), dim_(dim) {}

  ast::NodePtr make(int depth) {
    std::uniform_int_distribution<int> leaf_kind(0, 4);
    if (depth <= 0 || coin(0.25)) {
      switch (leaf_kind(gen_)) {
        case 0: return number(literal());
        case 1: return number(-literal());
        case 2: return state_norm();
        case 3: return time();
        default: return variable(std::uniform_int_distribution<std::size_t>(0, dim_ - 1)(gen_));
      }
    }
    std::uniform_int_distribution<int> kind(0, 12);
    switch (kind(gen_)) {
      case 0: return negate(make(depth - 1));
      case 1: return binary(BinaryOp::Add, make(depth - 1), make(depth - 1));
      case 2: return binary(BinaryOp::Sub, make(depth - 1), make(depth - 1));
      case 3:
      case 4: return binary(BinaryOp::Mul, make(depth - 1), make(depth - 1));
      case 5: return binary(BinaryOp::Div, make(depth - 1), make(depth - 1));
      case 6: {
        // Integer, half-integer or general exponents, some of them negative.
        std::uniform_int_distribution<int> e(-3, 4);
        const double ex = coin(0.5) ? e(gen_) : e(gen_) + 0.5;
        ast::NodePtr exponent = coin(0.3) ? make(0) : number(ex);
        return binary(BinaryOp::Pow, make(depth - 1), exponent);
      }
      case 7: return call(Function::Exp, {binary(BinaryOp::Mul, number(0.1), make(depth - 1))});
      case 8: return call(Function::Log, {make(depth - 1)});
      case 9: return call(Function::Sqrt, {make(depth - 1)});
      case 10: return call(Function::Abs, {make(depth - 1)});
      case 11: return call(coin(0.5) ? Function::Min : Function::Max,
                           {make(depth - 1), make(depth - 1), make(depth - 1)});
      default: return call(Function::Norm, {make(depth - 1), make(depth - 1)});
    }
  }

  std::vector<double> point() {
    std::uniform_real_distribution<double> u(-4, 4);
    std::vector<double> x(dim_);
    for (auto& v : x) v = u(gen_);
    return x;
  }
  double time_point() { return std::uniform_real_distribution<double>(0, 2)(gen_); }

 private:
  bool coin(double p) { return std::bernoulli_distribution(p)(gen_); }
  double literal() {
    // Mix of short decimals and full-precision values to exercise printing.
    if (coin(0.5)) return std::uniform_int_distribution<int>(0, 40)(gen_) / 4.0;
    return std::uniform_real_distribution<double>(0, 10)(gen_);
  }

  std::mt19937_64 gen_;
  std::size_t dim_;
};

bool same(double a, double b) { return (std::isnan(a) && std::isnan(b)) || a == b; }

struct PrecedenceCase {
  const char* source;
  double value;
};

inline constexpr PrecedenceCase kPrecedenceCorpus[] = {
    {"2+3*4", 14},  {"2^3^2", 512},   {"-2^2", -4},   {"(2+3)*4", 20},  {"2*3^2", 18},
    {"2-3-4", -5},  {"24/4/2", 3},    {"2^-1", 0.5},  {"2*-3", -6},     {"(-2)^2", 4},
    {"1+2^2*3", 13}, {"8/2^2", 2},    {"-3+2", -1},   {"2^3*2", 16},
};
static_assert(std::size(kPrecedenceCorpus) == 14);

/// Cases whose value differs from the expected one (exact comparison).
inline std::vector<std::string> precedence_failures() {
  std::vector<std::string> bad;
  const std::vector<double> x{0.0};
  for (const auto& c : kPrecedenceCorpus)
    if (Expression::parse(c.source, 1).evaluate(x) != c.value) bad.emplace_back(c.source);
  return bad;
}

struct RoundTripStats {
  std::size_t asts = 0;
  std::size_t compared = 0;
  std::size_t mismatches = 0;      // value or domain-error disagreement
  std::size_t unstable_print = 0;  // to_string not a fixed point after one round
  std::string first_failure;
};

/// Random ASTs printed, reparsed and compared at `points` random states each.
inline RoundTripStats random_ast_round_trip(std::uint64_t seed, std::size_t n_asts,
                                            std::size_t points, std::size_t dim = 3) {
  RandomAst rng(seed, dim);
  RoundTripStats s;
  for (std::size_t k = 0; k < n_asts; ++k, ++s.asts) {
    const Expression original(rng.make(5), dim);
    const std::string text = original.to_string();
    const Expression reparsed = Expression::parse(text, dim);
    for (std::size_t i = 0; i < points; ++i) {
      const auto x = rng.point();
      const double t = rng.time_point();
      const EvalPoint p{x.data(), x.size(), euclidean_norm(x), t};
      bool e1 = false, e2 = false;
      const double v1 = original.evaluate_fast(p, e1);
      const double v2 = reparsed.evaluate_fast(p, e2);
      const bool same_value = (std::isnan(v1) && std::isnan(v2)) || v1 == v2;
      if (e1 != e2 || (!e1 && !same_value)) {
        if (s.mismatches++ == 0) s.first_failure = text;
      } else if (!e1) {
        ++s.compared;
      }
    }
    if (reparsed.to_string() != text && s.unstable_print++ == 0 && s.first_failure.empty())
      s.first_failure = text;
  }
  return s;
}

struct FiniteDifferenceStats {
  std::size_t cases = 0;
  double worst_first = 0.0;   // scaled error of d/dx1
  double worst_second = 0.0;  // scaled error of d2/dx1^2
  std::string worst_case;
};

/// Random polynomials of total degree <= 4 at points with |x| <= 10. Errors
/// are scaled by the term magnitudes of the derivative plus the rounding
/// floor of the difference quotient, |f| / h^k with h ~ max(1, |x1|).
inline FiniteDifferenceStats polynomial_derivatives(std::uint64_t seed, std::size_t n) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> coef(-3, 3), pt(-7, 7);
  std::uniform_int_distribution<int> deg(0, 4), terms(1, 5);
  FiniteDifferenceStats s;
  for (std::size_t trial = 0; trial < n; ++trial, ++s.cases) {
    Poly p;
    const int nt = terms(gen);
    for (int k = 0; k < nt; ++k) {
      const int a = deg(gen);
      std::uniform_int_distribution<int> rest(0, 4 - a);
      p.c.push_back(coef(gen));
      p.a.push_back(a);
      p.b.push_back(rest(gen));
    }
    const auto e = Expression::parse(p.text(), 2);
    double x1 = pt(gen), x2 = pt(gen);
    const double r = std::hypot(x1, x2);
    if (r > 10) x1 *= 10 / r, x2 *= 10 / r;
    const std::vector<double> x{x1, x2};
    const double h = std::max(1.0, std::fabs(x1));
    const double s1 = p.d1_scale(x1, x2) + p.f_scale(x1, x2) / h + 1e-12;
    const double s2 = p.d2_scale(x1, x2) + p.f_scale(x1, x2) / (h * h) + 1e-12;
    const double err1 = std::fabs(e.partial_derivative(x, 0, 0, 1) - p.d1(x1, x2)) / s1;
    const double err2 = std::fabs(e.partial_derivative(x, 0, 0, 2) - p.d2(x1, x2)) / s2;
    if (std::max(err1, err2) > std::max(s.worst_first, s.worst_second)) s.worst_case = p.text();
    s.worst_first = std::max(s.worst_first, err1);
    s.worst_second = std::max(s.worst_second, err2);
  }
  return s;
}

}  // namespace props
