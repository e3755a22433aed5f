#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "parser_properties.hpp"
#include "slm/expr.hpp"

using namespace slm;

namespace {

double eval(const std::string& src, std::vector<double> x, const ConstantMap& c = {}) {
  return Expression::parse(src, x.size(), c).evaluate(x);
}

}  // namespace

TEST(Expr, Examples) {
  EXPECT_EQ(eval("2*x1", {3, 1}), 6.0);
  EXPECT_NEAR(eval("(|x|/2)^(1+eps)", {1, 1}, {{"eps", 0.5}}),
              std::pow(std::sqrt(2.0) / 2.0, 1.5), 1e-15);
  EXPECT_NEAR(eval("(|x|/2)^(1+eps)", {1, 1}, {{"eps", 0.5}}), 0.5946, 1e-4);
  EXPECT_EQ(eval("x1^2", {3, 0}), 9.0);
  EXPECT_NEAR(eval("exp(-|x|)", {3, 4}), std::exp(-5.0), 1e-15);
}

TEST(Expr, SyntaxErrorPosition) {
  try {
    (void)Expression::parse("2*(x1", 2);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.position(), 5u);
  }
}

TEST(Expr, DomainErrorNamesSubexpression) {
  const auto e = Expression::parse("1/x2", 2);
  const std::vector<double> x{1, 0};
  EXPECT_THROW((void)e.evaluate(x), DomainError);
  try {
    (void)Expression::parse("3 + log(x1 - 2)", 1).evaluate(std::vector<double>{1.0});
    FAIL();
  } catch (const DomainError& err) {
    EXPECT_NE(err.subexpression().find("log"), std::string::npos);
  }
}

TEST(Expr, UnknownIdentifiersRejected) {
  EXPECT_THROW((void)Expression::parse("x3", 2), ParseError);
  EXPECT_THROW((void)Expression::parse("x0", 2), ParseError);
  EXPECT_THROW((void)Expression::parse("eps", 2), ParseError);
  EXPECT_THROW((void)Expression::parse("foo(1)", 2), ParseError);
  EXPECT_THROW((void)Expression::parse_univariate("u + |x|", "u"), ParseError);
}

TEST(Expr, PrecedenceCorpus) {
  const auto bad = props::precedence_failures();
  EXPECT_TRUE(bad.empty()) << bad.size() << " cases, first " << (bad.empty() ? "" : bad[0]);
}

TEST(Expr, Derivatives) {
  const auto sq = Expression::parse("x1^2", 2);
  const std::vector<double> x{3, 0};
  EXPECT_NEAR(sq.partial_derivative(x, 0, 0, 1), 6.0, 1e-6);
  for (double p : {-3.0, 0.5, 7.0})
    EXPECT_NEAR(sq.partial_derivative(std::vector<double>{p, 1}, 0, 0, 2), 2.0, 1e-4);
  const auto lin = Expression::parse("x1", 2);
  EXPECT_NEAR(lin.partial_derivative(std::vector<double>{1, 1}, 0, 1, 1), 0.0, 1e-9);
  const auto tt = Expression::parse("t^2 + x1", 1);
  EXPECT_NEAR(tt.partial_derivative(std::vector<double>{1}, 0.5, kTimeIndex, 1), 1.0, 1e-6);
  const auto mixed = Expression::parse("x1^2*x2^3", 2);
  EXPECT_NEAR(mixed.mixed_partial(std::vector<double>{2, 1.5}, 0, 0, 1),
              2 * 2.0 * 3 * 1.5 * 1.5, 1e-4);
}

TEST(Expr, FiniteDifferencesOnPolynomials) {
  const auto s = props::polynomial_derivatives(7, 200);
  EXPECT_EQ(s.cases, 200u);
  EXPECT_LE(s.worst_first, 1e-5) << s.worst_case;
  EXPECT_LE(s.worst_second, 1e-5) << s.worst_case;
}

TEST(Expr, RandomAstRoundTrip) {
  const auto s = props::random_ast_round_trip(2024, 500, 100);
  EXPECT_EQ(s.mismatches, 0u) << s.first_failure;
  EXPECT_EQ(s.unstable_print, 0u) << s.first_failure;
  // Guard against a generator that only produces domain errors.
  EXPECT_GT(s.compared, 10000u);
}

TEST(Expr, PermutedRenamesSlots) {
  const auto e = Expression::parse("x1 - 2*x2 + x3^2", 3);
  const std::size_t perm[] = {2, 0, 1};
  const auto p = e.permuted(perm);
  // New slot k reads old slot perm[k].
  const std::vector<double> old_x{1.0, 2.0, 3.0};
  const std::vector<double> new_x{3.0, 1.0, 2.0};
  EXPECT_EQ(p.evaluate(new_x), e.evaluate(old_x));
}

TEST(Expr, UnivariateAndFlags) {
  const auto a = Expression::parse_univariate("u^(1+eps)", "u", {{"eps", 0.5}});
  EXPECT_NEAR(a(4.0), 8.0, 1e-14);
  EXPECT_TRUE(Expression::parse("0*2", 1).is_zero());
  // 0*x1 is not folded: it is NaN at x1 = inf.
  EXPECT_FALSE(Expression::parse("0*x1", 1).is_zero());
  EXPECT_FALSE(Expression::parse("x1", 1).is_zero());
  EXPECT_TRUE(Expression::parse("t*x1", 1).depends_on_time());
  EXPECT_TRUE(Expression::parse("|x|", 2).uses_norm());
  EXPECT_FALSE(Expression::parse("x2", 2).uses_norm());
}
