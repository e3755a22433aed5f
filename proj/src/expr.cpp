#include "slm/expr.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <optional>

namespace slm {

ParseError::ParseError(std::size_t position, const std::string& message)
    : std::runtime_error("syntax error at position " + std::to_string(position) + ": " +
                         message),
      position_(position),
      detail_(message) {}

DomainError::DomainError(std::string subexpression, const std::string& message)
    : std::runtime_error(message + " in '" + subexpression + "'"),
      subexpression_(std::move(subexpression)) {}

double euclidean_norm(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return std::sqrt(s);
}

namespace ast {

NodePtr number(double v) { return std::make_shared<const Node>(Node{Number{v}}); }
NodePtr variable(std::size_t index) {
  return std::make_shared<const Node>(Node{Variable{index}});
}
NodePtr state_norm() { return std::make_shared<const Node>(Node{StateNorm{}}); }
NodePtr time() { return std::make_shared<const Node>(Node{Time{}}); }
NodePtr constant(std::string name, double value) {
  return std::make_shared<const Node>(Node{Constant{std::move(name), value}});
}
NodePtr negate(NodePtr operand) {
  return std::make_shared<const Node>(Node{Negate{std::move(operand)}});
}
NodePtr binary(BinaryOp op, NodePtr lhs, NodePtr rhs) {
  return std::make_shared<const Node>(Node{Binary{op, std::move(lhs), std::move(rhs)}});
}
NodePtr call(Function fn, std::vector<NodePtr> args) {
  return std::make_shared<const Node>(Node{Call{fn, std::move(args)}});
}

const char* function_name(Function fn) {
  switch (fn) {
    case Function::Exp: return "exp";
    case Function::Log: return "log";
    case Function::Sqrt: return "sqrt";
    case Function::Abs: return "abs";
    case Function::Min: return "min";
    case Function::Max: return "max";
    case Function::Norm: return "norm";
  }
  return "?";
}

}  // namespace ast

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

std::optional<ast::Function> lookup_function(const std::string& name) {
  using ast::Function;
  static const std::array<std::pair<const char*, Function>, 7> table{{
      {"exp", Function::Exp},
      {"log", Function::Log},
      {"sqrt", Function::Sqrt},
      {"abs", Function::Abs},
      {"min", Function::Min},
      {"max", Function::Max},
      {"norm", Function::Norm},
  }};
  for (const auto& [n, f] : table)
    if (name == n) return f;
  return std::nullopt;
}

bool is_unary_function(ast::Function fn) {
  using ast::Function;
  return fn == Function::Exp || fn == Function::Log || fn == Function::Sqrt ||
         fn == Function::Abs;
}

std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", std::fabs(v));
  if (std::signbit(v)) return std::string("(-") + buf + ")";
  return buf;
}

// ---------------------------------------------------------------------------
// Lexer / parser

enum class Tok { Number, Ident, Norm, LParen, RParen, Comma, Plus, Minus, Star, Slash, Caret, End };

struct Token {
  Tok kind;
  std::size_t pos;
  std::string text;
  double value = 0.0;
};

std::vector<Token> tokenize(const std::string& s) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < s.size()) {
    const char c = s[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    const std::size_t start = i;
    if (std::isdigit(static_cast<unsigned char>(c)) ||
        (c == '.' && i + 1 < s.size() && std::isdigit(static_cast<unsigned char>(s[i + 1])))) {
      while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ++i;
      if (i < s.size() && s[i] == '.') {
        ++i;
        while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ++i;
      }
      if (i < s.size() && (s[i] == 'e' || s[i] == 'E')) {
        std::size_t j = i + 1;
        if (j < s.size() && (s[j] == '+' || s[j] == '-')) ++j;
        if (j < s.size() && std::isdigit(static_cast<unsigned char>(s[j]))) {
          i = j;
          while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ++i;
        }
      }
      const std::string text = s.substr(start, i - start);
      out.push_back({Tok::Number, start, text, std::strtod(text.c_str(), nullptr)});
      continue;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      while (i < s.size() &&
             (std::isalnum(static_cast<unsigned char>(s[i])) || s[i] == '_'))
        ++i;
      out.push_back({Tok::Ident, start, s.substr(start, i - start)});
      continue;
    }
    if (c == '|') {
      if (s.compare(i, 3, "|x|") == 0) {
        out.push_back({Tok::Norm, start, "|x|"});
        i += 3;
        continue;
      }
      throw ParseError(start, "expected '|x|'");
    }
    Tok kind;
    switch (c) {
      case '(': kind = Tok::LParen; break;
      case ')': kind = Tok::RParen; break;
      case ',': kind = Tok::Comma; break;
      case '+': kind = Tok::Plus; break;
      case '-': kind = Tok::Minus; break;
      case '*': kind = Tok::Star; break;
      case '/': kind = Tok::Slash; break;
      case '^': kind = Tok::Caret; break;
      default: throw ParseError(start, std::string("unexpected character '") + c + "'");
    }
    out.push_back({kind, start, std::string(1, c)});
    ++i;
  }
  out.push_back({Tok::End, s.size(), ""});
  return out;
}

struct Symbols {
  std::size_t dimension;
  std::vector<std::string> names;
  bool allow_state_norm;
  bool allow_time;
  const ConstantMap* constants;
};

class Parser {
 public:
  Parser(const std::string& source, const Symbols& symbols)
      : tokens_(tokenize(source)), sym_(symbols) {}

  ast::NodePtr parse() {
    auto e = expr();
    if (peek().kind != Tok::End) throw ParseError(peek().pos, "unexpected '" + peek().text + "'");
    return e;
  }

 private:
  const Token& peek() const { return tokens_[pos_]; }
  const Token& advance() { return tokens_[pos_++]; }
  bool accept(Tok k) {
    if (peek().kind != k) return false;
    ++pos_;
    return true;
  }
  void expect(Tok k, const char* what) {
    if (!accept(k)) throw ParseError(peek().pos, std::string("expected ") + what);
  }

  ast::NodePtr expr() {
    auto lhs = term();
    for (;;) {
      if (accept(Tok::Plus))
        lhs = ast::binary(ast::BinaryOp::Add, lhs, term());
      else if (accept(Tok::Minus))
        lhs = ast::binary(ast::BinaryOp::Sub, lhs, term());
      else
        return lhs;
    }
  }

  ast::NodePtr term() {
    auto lhs = unary();
    for (;;) {
      if (accept(Tok::Star))
        lhs = ast::binary(ast::BinaryOp::Mul, lhs, unary());
      else if (accept(Tok::Slash))
        lhs = ast::binary(ast::BinaryOp::Div, lhs, unary());
      else
        return lhs;
    }
  }

  ast::NodePtr unary() {
    if (accept(Tok::Minus)) return ast::negate(unary());
    return power();
  }

  ast::NodePtr power() {
    auto base = primary();
    if (accept(Tok::Caret)) return ast::binary(ast::BinaryOp::Pow, base, unary());
    return base;
  }

  ast::NodePtr primary() {
    const Token& tok = peek();
    switch (tok.kind) {
      case Tok::Number:
        advance();
        return ast::number(tok.value);
      case Tok::Norm:
        if (!sym_.allow_state_norm) throw ParseError(tok.pos, "'|x|' is not available here");
        advance();
        return ast::state_norm();
      case Tok::LParen: {
        advance();
        auto e = expr();
        expect(Tok::RParen, "')'");
        return e;
      }
      case Tok::Ident:
        return identifier();
      case Tok::End:
        throw ParseError(tok.pos, "unexpected end of input");
      default:
        throw ParseError(tok.pos, "unexpected '" + tok.text + "'");
    }
  }

  ast::NodePtr identifier() {
    const Token tok = advance();
    if (auto fn = lookup_function(tok.text)) {
      if (peek().kind != Tok::LParen)
        throw ParseError(peek().pos, "expected '(' after function '" + tok.text + "'");
      advance();
      std::vector<ast::NodePtr> args;
      args.push_back(expr());
      while (accept(Tok::Comma)) args.push_back(expr());
      expect(Tok::RParen, "')'");
      if (is_unary_function(*fn) && args.size() != 1)
        throw ParseError(tok.pos, "function '" + tok.text + "' takes one argument");
      return ast::call(*fn, std::move(args));
    }
    for (std::size_t i = 0; i < sym_.names.size(); ++i)
      if (tok.text == sym_.names[i]) return ast::variable(i);
    if (sym_.allow_time && tok.text == "t") return ast::time();
    if (sym_.allow_state_norm && tok.text.size() > 1 && tok.text[0] == 'x' &&
        std::all_of(tok.text.begin() + 1, tok.text.end(),
                    [](char c) { return std::isdigit(static_cast<unsigned char>(c)); })) {
      throw ParseError(tok.pos, "variable index out of range: '" + tok.text + "' (state has " +
                                    std::to_string(sym_.dimension) + " components)");
    }
    if (sym_.constants) {
      if (auto it = sym_.constants->find(tok.text); it != sym_.constants->end())
        return ast::constant(it->first, it->second);
    }
    throw ParseError(tok.pos, "unknown identifier '" + tok.text + "'");
  }

  std::vector<Token> tokens_;
  std::size_t pos_ = 0;
  const Symbols& sym_;
};

std::vector<std::string> default_names(std::size_t dimension) {
  std::vector<std::string> names;
  names.reserve(dimension);
  for (std::size_t i = 0; i < dimension; ++i) names.push_back("x" + std::to_string(i + 1));
  return names;
}

std::string print(const ast::NodePtr& node, const std::vector<std::string>& names) {
  return std::visit(
      overloaded{
          [](const ast::Number& n) { return format_number(n.value); },
          [&](const ast::Variable& v) {
            return v.index < names.size() ? names[v.index] : "x" + std::to_string(v.index + 1);
          },
          [](const ast::StateNorm&) { return std::string("|x|"); },
          [](const ast::Time&) { return std::string("t"); },
          [](const ast::Constant& c) { return c.name; },
          [&](const ast::Negate& n) { return "(-" + print(n.operand, names) + ")"; },
          [&](const ast::Binary& b) {
            static constexpr const char* ops[] = {" + ", " - ", " * ", " / ", " ^ "};
            return "(" + print(b.lhs, names) + ops[static_cast<int>(b.op)] +
                   print(b.rhs, names) + ")";
          },
          [&](const ast::Call& c) {
            std::string s = std::string(ast::function_name(c.fn)) + "(";
            for (std::size_t i = 0; i < c.args.size(); ++i) {
              if (i) s += ", ";
              s += print(c.args[i], names);
            }
            return s + ")";
          },
      },
      node->value);
}

// ---------------------------------------------------------------------------
// Compiled stack program

enum class Op : std::uint8_t {
  Const, Var, Norm, Time, Neg, Add, Sub, Mul, Div, Pow, PowInt, PowHalf,
  Exp, Log, Sqrt, Abs, Min, Max, NormN
};

struct Instr {
  Op op;
  std::uint32_t arg = 0;  // variable index, arity, or |integer exponent|
  double value = 0.0;     // literal, or sign of an integer exponent
  std::uint32_t text = 0; // index into Program::texts
};

inline double pow_uint(double b, std::uint32_t k) {
  double r = 1.0;
  while (k) {
    if (k & 1u) r *= b;
    b *= b;
    k >>= 1u;
  }
  return r;
}

bool is_constant_tree(const ast::NodePtr& node) {
  return std::visit(overloaded{
                        [](const ast::Number&) { return true; },
                        [](const ast::Constant&) { return true; },
                        [](const ast::Variable&) { return false; },
                        [](const ast::StateNorm&) { return false; },
                        [](const ast::Time&) { return false; },
                        [](const ast::Negate& n) { return is_constant_tree(n.operand); },
                        [](const ast::Binary& b) {
                          return is_constant_tree(b.lhs) && is_constant_tree(b.rhs);
                        },
                        [](const ast::Call& c) {
                          return std::all_of(c.args.begin(), c.args.end(), is_constant_tree);
                        },
                    },
                    node->value);
}

bool uses_time(const ast::NodePtr& node) {
  return std::visit(overloaded{
                        [](const ast::Time&) { return true; },
                        [](const ast::Negate& n) { return uses_time(n.operand); },
                        [](const ast::Binary& b) { return uses_time(b.lhs) || uses_time(b.rhs); },
                        [](const ast::Call& c) {
                          return std::any_of(c.args.begin(), c.args.end(), uses_time);
                        },
                        [](const auto&) { return false; },
                    },
                    node->value);
}

}  // namespace

struct Expression::Program {
  std::vector<Instr> code;
  std::vector<std::string> texts;
  std::size_t max_depth = 0;

  // Runs the program. On a domain violation records the failing instruction
  // in `failed` (first one only) and keeps going with a NaN.
  double run(const EvalPoint& p, std::size_t& failed) const noexcept {
    constexpr std::size_t kInline = 48;
    std::array<double, kInline> inline_stack;
    inline_stack[0] = 0.0;
    std::vector<double> heap_stack;
    double* st = inline_stack.data();
    if (max_depth > kInline) {
      heap_stack.resize(max_depth);
      st = heap_stack.data();
    }
    std::size_t sp = 0;
    const std::size_t none = static_cast<std::size_t>(-1);
    auto fail = [&](std::size_t i) {
      if (failed == none) failed = i;
    };
    for (std::size_t i = 0; i < code.size(); ++i) {
      const Instr& in = code[i];
      switch (in.op) {
        case Op::Const: st[sp++] = in.value; break;
        case Op::Var: st[sp++] = p.x[in.arg]; break;
        case Op::Norm: st[sp++] = p.norm; break;
        case Op::Time: st[sp++] = p.time; break;
        case Op::Neg: st[sp - 1] = -st[sp - 1]; break;
        case Op::Add: --sp; st[sp - 1] += st[sp]; break;
        case Op::Sub: --sp; st[sp - 1] -= st[sp]; break;
        case Op::Mul: --sp; st[sp - 1] *= st[sp]; break;
        case Op::Div:
          --sp;
          if (st[sp] == 0.0) fail(i);
          st[sp - 1] /= st[sp];
          break;
        case Op::Pow: {
          --sp;
          const double b = st[sp - 1], e = st[sp];
          if ((b == 0.0 && e < 0.0) || (b < 0.0 && e != std::nearbyint(e))) fail(i);
          st[sp - 1] = std::pow(b, e);
          break;
        }
        case Op::PowInt: {
          const double b = st[sp - 1];
          if (in.value < 0.0) {
            if (b == 0.0) fail(i);
            st[sp - 1] = 1.0 / pow_uint(b, in.arg);
          } else {
            st[sp - 1] = pow_uint(b, in.arg);
          }
          break;
        }
        case Op::PowHalf: {
          const double b = st[sp - 1];
          if (b < 0.0 || (b == 0.0 && in.value < 0.0)) fail(i);
          const double r = pow_uint(b, in.arg) * std::sqrt(b);
          st[sp - 1] = in.value < 0.0 ? 1.0 / r : r;
          break;
        }
        case Op::Exp: st[sp - 1] = std::exp(st[sp - 1]); break;
        case Op::Log:
          if (!(st[sp - 1] > 0.0)) fail(i);
          st[sp - 1] = std::log(st[sp - 1]);
          break;
        case Op::Sqrt:
          if (st[sp - 1] < 0.0) fail(i);
          st[sp - 1] = std::sqrt(st[sp - 1]);
          break;
        case Op::Abs: st[sp - 1] = std::fabs(st[sp - 1]); break;
        case Op::Min: {
          const std::size_t n = in.arg;
          double m = st[sp - n];
          for (std::size_t k = sp - n + 1; k < sp; ++k) m = std::min(m, st[k]);
          sp -= n - 1;
          st[sp - 1] = m;
          break;
        }
        case Op::Max: {
          const std::size_t n = in.arg;
          double m = st[sp - n];
          for (std::size_t k = sp - n + 1; k < sp; ++k) m = std::max(m, st[k]);
          sp -= n - 1;
          st[sp - 1] = m;
          break;
        }
        case Op::NormN: {
          const std::size_t n = in.arg;
          double s = 0.0;
          for (std::size_t k = sp - n; k < sp; ++k) s += st[k] * st[k];
          sp -= n - 1;
          st[sp - 1] = std::sqrt(s);
          break;
        }
      }
    }
    const double r = st[0];
    if (!std::isfinite(r) && failed == none) failed = code.size();
    return r;
  }
};

namespace {

class Compiler {
 public:
  explicit Compiler(const std::vector<std::string>& names) : names_(names) {}

  std::shared_ptr<Expression::Program> compile(const ast::NodePtr& root) {
    prog_ = std::make_shared<Expression::Program>();
    emit(root);
    prog_->max_depth = std::max<std::size_t>(max_depth_, 1);
    prog_->texts.push_back(print(root, names_));
    return prog_;
  }

 private:
  std::uint32_t text_of(const ast::NodePtr& node) {
    prog_->texts.push_back(print(node, names_));
    return static_cast<std::uint32_t>(prog_->texts.size() - 1);
  }

  void push(Instr in, int delta) {
    prog_->code.push_back(in);
    depth_ += delta;
    max_depth_ = std::max(max_depth_, depth_);
  }

  // Folds a variable-free subtree into a literal when it evaluates cleanly.
  std::optional<double> fold(const ast::NodePtr& node) {
    if (!is_constant_tree(node)) return std::nullopt;
    Compiler sub(names_);
    auto prog = sub.compile_unfolded(node);
    std::size_t failed = static_cast<std::size_t>(-1);
    const EvalPoint p{nullptr, 0, 0.0, 0.0};
    const double v = prog->run(p, failed);
    if (failed != static_cast<std::size_t>(-1) || !std::isfinite(v)) return std::nullopt;
    return v;
  }

  std::shared_ptr<Expression::Program> compile_unfolded(const ast::NodePtr& root) {
    prog_ = std::make_shared<Expression::Program>();
    folding_ = false;
    emit(root);
    prog_->max_depth = std::max<std::size_t>(max_depth_, 1);
    return prog_;
  }

  void emit(const ast::NodePtr& node) {
    if (folding_ && !std::holds_alternative<ast::Number>(node->value)) {
      if (auto v = fold(node)) {
        push({Op::Const, 0, *v, 0}, +1);
        return;
      }
    }
    std::visit(
        overloaded{
            [&](const ast::Number& n) { push({Op::Const, 0, n.value, 0}, +1); },
            [&](const ast::Constant& c) { push({Op::Const, 0, c.value, 0}, +1); },
            [&](const ast::Variable& v) {
              push({Op::Var, static_cast<std::uint32_t>(v.index), 0.0, 0}, +1);
            },
            [&](const ast::StateNorm&) { push({Op::Norm, 0, 0.0, 0}, +1); },
            [&](const ast::Time&) { push({Op::Time, 0, 0.0, 0}, +1); },
            [&](const ast::Negate& n) {
              emit(n.operand);
              push({Op::Neg, 0, 0.0, 0}, 0);
            },
            [&](const ast::Binary& b) { emit_binary(node, b); },
            [&](const ast::Call& c) {
              for (const auto& a : c.args) emit(a);
              const auto n = static_cast<std::uint32_t>(c.args.size());
              Op op = Op::Exp;
              switch (c.fn) {
                case ast::Function::Exp: op = Op::Exp; break;
                case ast::Function::Log: op = Op::Log; break;
                case ast::Function::Sqrt: op = Op::Sqrt; break;
                case ast::Function::Abs: op = Op::Abs; break;
                case ast::Function::Min: op = Op::Min; break;
                case ast::Function::Max: op = Op::Max; break;
                case ast::Function::Norm: op = Op::NormN; break;
              }
              push({op, n, 0.0, text_of(node)}, 1 - static_cast<int>(n));
            },
        },
        node->value);
  }

  void emit_binary(const ast::NodePtr& node, const ast::Binary& b) {
    emit(b.lhs);
    if (b.op == ast::BinaryOp::Pow && folding_) {
      if (auto e = fold(b.rhs)) {
        const double k = *e;
        const double twice = 2.0 * k;
        if (k == std::nearbyint(k) && std::fabs(k) <= 64.0) {
          push({Op::PowInt, static_cast<std::uint32_t>(std::fabs(k)), k < 0 ? -1.0 : 1.0,
                text_of(node)},
               0);
          return;
        }
        if (twice == std::nearbyint(twice) && std::fabs(k) <= 64.0) {
          push({Op::PowHalf, static_cast<std::uint32_t>(std::fabs(k) - 0.5),
                k < 0 ? -1.0 : 1.0, text_of(node)},
               0);
          return;
        }
      }
    }
    emit(b.rhs);
    Op op = Op::Add;
    switch (b.op) {
      case ast::BinaryOp::Add: op = Op::Add; break;
      case ast::BinaryOp::Sub: op = Op::Sub; break;
      case ast::BinaryOp::Mul: op = Op::Mul; break;
      case ast::BinaryOp::Div: op = Op::Div; break;
      case ast::BinaryOp::Pow: op = Op::Pow; break;
    }
    push({op, 0, 0.0, text_of(node)}, -1);
  }

  const std::vector<std::string>& names_;
  std::shared_ptr<Expression::Program> prog_;
  int depth_ = 0;
  int max_depth_ = 0;
  bool folding_ = true;
};

}  // namespace

Expression::Expression() : Expression(ast::number(0.0), 0) {}

Expression::Expression(ast::NodePtr root, std::size_t dimension,
                       std::vector<std::string> variable_names)
    : root_(std::move(root)),
      dimension_(dimension),
      names_(variable_names.empty() ? default_names(dimension) : std::move(variable_names)) {
  Compiler c(names_);
  program_ = c.compile(root_);
  uses_time_ = uses_time(root_);
  uses_norm_ = std::any_of(program_->code.begin(), program_->code.end(),
                           [](const Instr& in) { return in.op == Op::Norm; });
}

Expression Expression::parse(const std::string& source, std::size_t dimension,
                             const ConstantMap& constants) {
  if (dimension == 0) throw std::invalid_argument("expression dimension must be positive");
  Symbols sym{dimension, default_names(dimension), true, true, &constants};
  if (source.find_first_not_of(" \t\r\n") == std::string::npos)
    throw ParseError(0, "empty expression");
  Parser p(source, sym);
  return Expression(p.parse(), dimension, sym.names);
}

Expression Expression::parse_univariate(const std::string& source, const std::string& variable,
                                        const ConstantMap& constants) {
  Symbols sym{1, {variable}, false, false, &constants};
  if (source.find_first_not_of(" \t\r\n") == std::string::npos)
    throw ParseError(0, "empty expression");
  Parser p(source, sym);
  return Expression(p.parse(), 1, sym.names);
}

std::string Expression::to_string() const { return program_->texts.back(); }

bool Expression::is_zero() const noexcept {
  return program_->code.size() == 1 && program_->code[0].op == Op::Const &&
         program_->code[0].value == 0.0;
}

double Expression::evaluate_fast(const EvalPoint& p, bool& domain_error) const noexcept {
  std::size_t failed = static_cast<std::size_t>(-1);
  const double v = program_->run(p, failed);
  if (failed != static_cast<std::size_t>(-1)) domain_error = true;
  return v;
}

std::string Expression::describe_failure(const EvalPoint& p) const {
  std::size_t failed = static_cast<std::size_t>(-1);
  program_->run(p, failed);
  if (failed >= program_->code.size()) return program_->texts.back();
  return program_->texts[program_->code[failed].text];
}

double Expression::evaluate(std::span<const double> state, double time) const {
  if (state.size() != dimension_)
    throw std::invalid_argument("state has " + std::to_string(state.size()) +
                                " components, expression expects " +
                                std::to_string(dimension_));
  const EvalPoint p{state.data(), state.size(), euclidean_norm(state), time};
  bool err = false;
  const double v = evaluate_fast(p, err);
  if (err) {
    std::size_t failed = static_cast<std::size_t>(-1);
    program_->run(p, failed);
    const bool non_finite = failed >= program_->code.size();
    throw DomainError(describe_failure(p),
                      non_finite ? "non-finite result" : "domain error");
  }
  return v;
}

double Expression::operator()(double u) const {
  const double x[1] = {u};
  return evaluate(std::span<const double>(x, 1), 0.0);
}

double Expression::partial_derivative(std::span<const double> state, double time,
                                      std::size_t index, int order) const {
  if (order != 1 && order != 2) throw std::invalid_argument("derivative order must be 1 or 2");
  if (index != kTimeIndex && index >= state.size())
    throw std::invalid_argument("derivative index out of range");
  constexpr double eps = std::numeric_limits<double>::epsilon();
  std::vector<double> x(state.begin(), state.end());
  double t = time;
  double& slot = index == kTimeIndex ? t : x[index];
  const double center = slot;
  const double scale = std::max(1.0, std::fabs(center));
  double h = (order == 1 ? std::cbrt(eps) : std::pow(eps, 0.25)) * scale;
  volatile double up = center + h;
  h = up - center;

  auto f = [&](double value) {
    slot = value;
    const double r = evaluate(x, t);
    slot = center;
    return r;
  };
  if (order == 1) return (f(center + h) - f(center - h)) / (2.0 * h);
  return (f(center + h) - 2.0 * f(center) + f(center - h)) / (h * h);
}

double Expression::mixed_partial(std::span<const double> state, double time, std::size_t i,
                                 std::size_t j) const {
  if (i == j) return partial_derivative(state, time, i, 2);
  if (i >= state.size() || j >= state.size())
    throw std::invalid_argument("derivative index out of range");
  const double q = std::pow(std::numeric_limits<double>::epsilon(), 0.25);
  std::vector<double> x(state.begin(), state.end());
  const double xi = x[i], xj = x[j];
  double hi = q * std::max(1.0, std::fabs(xi));
  double hj = q * std::max(1.0, std::fabs(xj));
  volatile double ui = xi + hi, uj = xj + hj;
  hi = ui - xi;
  hj = uj - xj;
  auto f = [&](double si, double sj) {
    x[i] = xi + si * hi;
    x[j] = xj + sj * hj;
    return evaluate(x, time);
  };
  return (f(1, 1) - f(1, -1) - f(-1, 1) + f(-1, -1)) / (4.0 * hi * hj);
}

namespace {

ast::NodePtr remap(const ast::NodePtr& node, const std::vector<std::size_t>& inverse) {
  return std::visit(
      overloaded{
          [&](const ast::Variable& v) { return ast::variable(inverse.at(v.index)); },
          [&](const ast::Negate& n) { return ast::negate(remap(n.operand, inverse)); },
          [&](const ast::Binary& b) {
            return ast::binary(b.op, remap(b.lhs, inverse), remap(b.rhs, inverse));
          },
          [&](const ast::Call& c) {
            std::vector<ast::NodePtr> args;
            for (const auto& a : c.args) args.push_back(remap(a, inverse));
            return ast::call(c.fn, std::move(args));
          },
          [&](const auto&) { return node; },
      },
      node->value);
}

}  // namespace

Expression Expression::permuted(std::span<const std::size_t> perm) const {
  if (perm.size() != dimension_) throw std::invalid_argument("permutation size mismatch");
  std::vector<std::size_t> inverse(dimension_, dimension_);
  for (std::size_t k = 0; k < perm.size(); ++k) {
    if (perm[k] >= dimension_ || inverse[perm[k]] != dimension_)
      throw std::invalid_argument("not a permutation");
    inverse[perm[k]] = k;
  }
  return Expression(remap(root_, inverse), dimension_, names_);
}

}  // namespace slm
