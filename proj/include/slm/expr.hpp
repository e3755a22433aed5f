#pragma once

// Text expressions over a state vector: parser, compiled evaluator, and
// finite-difference derivatives.
//
// Grammar (whitespace ignored):
//
//   expr    := term (('+' | '-') term)*
//   term    := unary (('*' | '/') unary)*
//   unary   := '-' unary | power
//   power   := primary ('^' unary)?          // right-associative
//   primary := number | ident | '|x|' | func '(' args ')' | '(' expr ')'
//   args    := expr (',' expr)*
//
// Precedence is therefore  ^  >  unary minus  >  * /  >  + -, so "-2^2" is -4
// and "2^3^2" is 512. Identifiers are x1..xN (1-based state slots), t, |x|
// (Euclidean norm of the full state) and named constants bound at parse time.
// Functions: exp, log, sqrt, abs (one argument), min, max, norm (one or more).

#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace slm {

class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t position, const std::string& message);
  std::size_t position() const noexcept { return position_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  std::size_t position_;
  std::string detail_;
};

class DomainError : public std::runtime_error {
 public:
  DomainError(std::string subexpression, const std::string& message);
  const std::string& subexpression() const noexcept { return subexpression_; }

 private:
  std::string subexpression_;
};

using ConstantMap = std::map<std::string, double>;

namespace ast {

enum class BinaryOp { Add, Sub, Mul, Div, Pow };
enum class Function { Exp, Log, Sqrt, Abs, Min, Max, Norm };

struct Node;
using NodePtr = std::shared_ptr<const Node>;

struct Number {
  double value;
};
struct Variable {
  std::size_t index;  // 0-based state slot
};
struct StateNorm {};
struct Time {};
struct Constant {
  std::string name;
  double value;
};
struct Negate {
  NodePtr operand;
};
struct Binary {
  BinaryOp op;
  NodePtr lhs;
  NodePtr rhs;
};
struct Call {
  Function fn;
  std::vector<NodePtr> args;
};

struct Node {
  std::variant<Number, Variable, StateNorm, Time, Constant, Negate, Binary, Call> value;
};

NodePtr number(double v);
NodePtr variable(std::size_t index);
NodePtr state_norm();
NodePtr time();
NodePtr constant(std::string name, double value);
NodePtr negate(NodePtr operand);
NodePtr binary(BinaryOp op, NodePtr lhs, NodePtr rhs);
NodePtr call(Function fn, std::vector<NodePtr> args);

const char* function_name(Function fn);

}  // namespace ast

/// Point at which an expression is evaluated. `norm` must equal |x| of the
/// full state; callers that evaluate several expressions at one state compute
/// it once.
struct EvalPoint {
  const double* x;
  std::size_t size;
  double norm;
  double time;
};

double euclidean_norm(std::span<const double> x);

/// Index passed to partial_derivative to differentiate with respect to t.
inline constexpr std::size_t kTimeIndex = static_cast<std::size_t>(-1);

/// Immutable parsed expression. Cheap to copy (shared tree and program).
class Expression {
 public:
  Expression();  // the constant 0

  /// Builds an expression from an AST over `dimension` state slots. Variable
  /// names default to x1..xN.
  Expression(ast::NodePtr root, std::size_t dimension,
             std::vector<std::string> variable_names = {});

  static Expression parse(const std::string& source, std::size_t dimension,
                          const ConstantMap& constants = {});

  /// Single-variable expression such as A(u) or B(u). |x| and t are rejected.
  static Expression parse_univariate(const std::string& source,
                                     const std::string& variable,
                                     const ConstantMap& constants = {});

  std::size_t dimension() const noexcept { return dimension_; }
  const ast::NodePtr& root() const noexcept { return root_; }
  const std::vector<std::string>& variable_names() const noexcept { return names_; }

  /// Fully parenthesized source text that parses back to an equivalent tree.
  std::string to_string() const;

  /// True when the expression is the literal constant 0 after folding.
  bool is_zero() const noexcept;
  bool depends_on_time() const noexcept { return uses_time_; }
  /// True when evaluation reads EvalPoint::norm.
  bool uses_norm() const noexcept { return uses_norm_; }

  /// Checked evaluation; throws DomainError naming the offending
  /// subexpression (log/sqrt of a negative, division by zero, 0^negative,
  /// negative base with a fractional exponent).
  double evaluate(std::span<const double> state, double time = 0.0) const;

  /// Univariate convenience; requires dimension() == 1.
  double operator()(double u) const;

  /// Hot-path evaluation. Sets `domain_error` instead of throwing; the value
  /// is unspecified in that case.
  double evaluate_fast(const EvalPoint& p, bool& domain_error) const noexcept;

  /// Central finite difference of order 1 or 2 with respect to a state slot
  /// (0-based) or kTimeIndex.
  double partial_derivative(std::span<const double> state, double time,
                            std::size_t index, int order) const;

  /// Mixed second derivative d^2/dx_i dx_j (i != j) by a four-point stencil.
  double mixed_partial(std::span<const double> state, double time, std::size_t i,
                       std::size_t j) const;

  /// Renames state slots: slot k of the result reads slot perm[k] of this
  /// expression's old numbering, i.e. variable `perm[k]` becomes `k`.
  Expression permuted(std::span<const std::size_t> perm) const;

 /// Compiled stack program; defined in expr.cpp.
  struct Program;

 private:
  std::string describe_failure(const EvalPoint& p) const;

  ast::NodePtr root_;
  std::size_t dimension_ = 0;
  std::vector<std::string> names_;
  std::shared_ptr<const Program> program_;
  bool uses_time_ = false;
  bool uses_norm_ = false;
};

}  // namespace slm
