#include "morseflow/symbolics.hpp"

#include "morseflow/error.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <vector>

namespace morseflow::symbolics {

NodePtr make_variable(int index) {
  auto n = std::make_shared<Node>();
  n->op = Op::Variable;
  n->variable = index;
  return n;
}

NodePtr make_constant(double value) {
  auto n = std::make_shared<Node>();
  n->op = Op::Constant;
  n->constant = value;
  return n;
}

NodePtr make_unary(Op op, NodePtr operand) {
  auto n = std::make_shared<Node>();
  n->op = op;
  n->lhs = std::move(operand);
  return n;
}

NodePtr make_binary(Op op, NodePtr lhs, NodePtr rhs) {
  auto n = std::make_shared<Node>();
  n->op = op;
  n->lhs = std::move(lhs);
  n->rhs = std::move(rhs);
  return n;
}

NodePtr make_power(NodePtr base, int exponent) {
  auto n = std::make_shared<Node>();
  n->op = Op::Pow;
  n->lhs = std::move(base);
  n->exponent = exponent;
  return n;
}

// ---------------------------------------------------------------------------
// Printing

namespace {

std::string format_constant(double c) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", c);
  std::string s(buf);
  if (c < 0) return "(" + s + ")";
  return s;
}

const char* function_name(Op op) {
  switch (op) {
    case Op::Sin: return "sin";
    case Op::Cos: return "cos";
    case Op::Exp: return "exp";
    case Op::Sqrt: return "sqrt";
    default: return "";
  }
}

const char* binary_symbol(Op op) {
  switch (op) {
    case Op::Add: return " + ";
    case Op::Sub: return " - ";
    case Op::Mul: return " * ";
    case Op::Div: return " / ";
    default: return "";
  }
}

}  // namespace

std::string to_string(const Node& node) {
  switch (node.op) {
    case Op::Variable: return "x" + std::to_string(node.variable);
    case Op::Constant: return format_constant(node.constant);
    case Op::Neg:
      if (node.lhs->op == Op::Constant) return "(-(" + to_string(*node.lhs) + "))";
      return "(-" + to_string(*node.lhs) + ")";
    case Op::Sin:
    case Op::Cos:
    case Op::Exp:
    case Op::Sqrt: return std::string(function_name(node.op)) + "(" + to_string(*node.lhs) + ")";
    case Op::Add:
    case Op::Sub:
    case Op::Mul:
    case Op::Div:
      return "(" + to_string(*node.lhs) + binary_symbol(node.op) + to_string(*node.rhs) + ")";
    case Op::Pow: {
      std::string e = node.exponent < 0 ? "(" + std::to_string(node.exponent) + ")"
                                        : std::to_string(node.exponent);
      return "(" + to_string(*node.lhs) + "^" + e + ")";
    }
  }
  return {};
}

bool same_tree(const Node& a, const Node& b) {
  if (a.op != b.op) return false;
  switch (a.op) {
    case Op::Variable: return a.variable == b.variable;
    case Op::Constant: return a.constant == b.constant;
    case Op::Pow: return a.exponent == b.exponent && same_tree(*a.lhs, *b.lhs);
    case Op::Neg:
    case Op::Sin:
    case Op::Cos:
    case Op::Exp:
    case Op::Sqrt: return same_tree(*a.lhs, *b.lhs);
    default: return same_tree(*a.lhs, *b.lhs) && same_tree(*a.rhs, *b.rhs);
  }
}

bool operator==(const Expression& a, const Expression& b) {
  if (a.ambient_dim() != b.ambient_dim()) return false;
  if (a.empty() || b.empty()) return a.empty() == b.empty();
  return same_tree(a.root(), b.root());
}

// ---------------------------------------------------------------------------
// Parsing

namespace {

class Parser {
 public:
  Parser(std::string_view text, int dim) : text_(text), dim_(dim) {}

  NodePtr parse_all() {
    NodePtr e = expr();
    skip_ws();
    if (pos_ != text_.size()) fail("unexpected character '" + std::string(1, text_[pos_]) + "'");
    return e;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const { fail_at(msg, pos_); }
  [[noreturn]] void fail_at(const std::string& msg, std::size_t at) const {
    throw ParseError("syntax error at position " + std::to_string(at) + ": " + msg, at);
  }

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }
  bool accept(char c) {
    skip_ws();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }
  void expect(char c) {
    if (!accept(c)) fail(std::string("expected '") + c + "'");
  }
  char peek() {
    skip_ws();
    return pos_ < text_.size() ? text_[pos_] : '\0';
  }

  NodePtr expr() {
    NodePtr lhs = term();
    for (;;) {
      if (accept('+')) {
        lhs = make_binary(Op::Add, lhs, term());
      } else if (accept('-')) {
        lhs = make_binary(Op::Sub, lhs, term());
      } else {
        return lhs;
      }
    }
  }

  NodePtr term() {
    NodePtr lhs = unary();
    for (;;) {
      if (accept('*')) {
        lhs = make_binary(Op::Mul, lhs, unary());
      } else if (accept('/')) {
        lhs = make_binary(Op::Div, lhs, unary());
      } else {
        return lhs;
      }
    }
  }

  NodePtr unary() {
    if (accept('-')) {
      // A bare literal after '-' is a negative constant, so printed negative
      // constants parse back to the same tree; "-2^2" stays -(2^2).
      const char c = peek();
      if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
        NodePtr operand = power();
        if (operand->op == Op::Constant) return make_constant(-operand->constant);
        return make_unary(Op::Neg, operand);
      }
      return make_unary(Op::Neg, unary());
    }
    return power();
  }

  NodePtr power() {
    NodePtr base = primary();
    while (accept('^')) base = make_power(base, exponent());
    return base;
  }

  int exponent() {
    const std::size_t start = (skip_ws(), pos_);
    bool paren = accept('(');
    int sign = 1;
    if (accept('-')) {
      sign = -1;
    } else {
      accept('+');
    }
    skip_ws();
    if (pos_ >= text_.size() || !(std::isdigit(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '.'))
      fail_at("exponent must be a constant integer", start);
    double v = literal();
    if (paren) {
      if (!accept(')')) fail_at("exponent must be a constant integer", start);
    }
    if (v != std::floor(v) || std::fabs(v) > 1024) fail_at("exponent must be a constant integer", start);
    return sign * static_cast<int>(v);
  }

  double literal() {
    skip_ws();
    const std::size_t start = pos_;
    auto digits = [&] {
      std::size_t s = pos_;
      while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
      return pos_ - s;
    };
    std::size_t n = digits();
    if (pos_ < text_.size() && text_[pos_] == '.') {
      ++pos_;
      n += digits();
    }
    if (n == 0) fail_at("malformed number", start);
    if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
      std::size_t save = pos_;
      ++pos_;
      if (pos_ < text_.size() && (text_[pos_] == '+' || text_[pos_] == '-')) ++pos_;
      if (digits() == 0) pos_ = save;
    }
    double v = 0;
    auto [ptr, ec] = std::from_chars(text_.data() + start, text_.data() + pos_, v);
    if (ec != std::errc() || ptr != text_.data() + pos_) fail_at("malformed number", start);
    return v;
  }

  NodePtr primary() {
    char c = peek();
    const std::size_t start = pos_;
    if (c == '(') {
      ++pos_;
      NodePtr e = expr();
      expect(')');
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return make_constant(literal());
    if (std::isalpha(static_cast<unsigned char>(c))) {
      std::size_t end = pos_;
      while (end < text_.size() && std::isalnum(static_cast<unsigned char>(text_[end]))) ++end;
      std::string_view word = text_.substr(pos_, end - pos_);
      if (word.size() > 1 && word[0] == 'x' &&
          word.find_first_not_of("0123456789", 1) == std::string_view::npos) {
        pos_ = end;
        long idx = 0;
        std::from_chars(word.data() + 1, word.data() + word.size(), idx);
        if (idx < 1 || idx > dim_)
          fail_at("variable index out of range: " + std::string(word) + " (ambient dimension " +
                      std::to_string(dim_) + ")",
                  start);
        return make_variable(static_cast<int>(idx));
      }
      Op op;
      if (word == "sin") {
        op = Op::Sin;
      } else if (word == "cos") {
        op = Op::Cos;
      } else if (word == "exp") {
        op = Op::Exp;
      } else if (word == "sqrt") {
        op = Op::Sqrt;
      } else {
        fail_at("unknown identifier '" + std::string(word) + "'", start);
      }
      pos_ = end;
      expect('(');
      NodePtr arg = expr();
      expect(')');
      return make_unary(op, arg);
    }
    if (c == '\0') fail("unexpected end of input");
    fail(std::string("unexpected character '") + c + "'");
  }

  std::string_view text_;
  int dim_;
  std::size_t pos_ = 0;
};

void check_indices(const Node& n, int dim) {
  if (n.op == Op::Variable && (n.variable < 1 || n.variable > dim))
    throw ParseError("variable index out of range: x" + std::to_string(n.variable), 0);
  if (n.lhs) check_indices(*n.lhs, dim);
  if (n.rhs) check_indices(*n.rhs, dim);
}

}  // namespace

Expression parse(std::string_view text, int ambient_dim) {
  if (ambient_dim < 1) throw PreconditionError("ambient dimension must be at least 1");
  return Expression(Parser(text, ambient_dim).parse_all(), ambient_dim);
}

// ---------------------------------------------------------------------------
// Tape evaluation

struct Instr {
  Op op;
  int a = -1;
  int b = -1;
  int variable = 0;
  int exponent = 0;
  double constant = 0;
  const Node* node = nullptr;
};

class Tape {
 public:
  explicit Tape(const Node& root) { emit(root); }

  std::vector<Instr> code;

 private:
  int emit(const Node& n) {
    Instr in;
    in.op = n.op;
    in.node = &n;
    in.variable = n.variable;
    in.exponent = n.exponent;
    in.constant = n.constant;
    if (n.lhs) in.a = emit(*n.lhs);
    if (n.rhs) in.b = emit(*n.rhs);
    code.push_back(in);
    return static_cast<int>(code.size()) - 1;
  }
};

namespace {

struct Workspace {
  std::vector<double> val;
  std::vector<double> grad;
  std::vector<double> hess;
};

[[noreturn]] void domain_fail(const std::string& what, const Instr& in) {
  throw DomainError(what, to_string(*in.node));
}

// Order 0: values only; 1: + gradients; 2: + Hessians (row-major n x n blocks).
template <int Order>
void run(const Tape& tape, const double* x, int n, Workspace& ws) {
  const std::size_t m = tape.code.size();
  const std::size_t nn = static_cast<std::size_t>(n) * n;
  ws.val.assign(m, 0.0);
  if constexpr (Order >= 1) ws.grad.assign(m * n, 0.0);
  if constexpr (Order >= 2) ws.hess.assign(m * nn, 0.0);

  auto G = [&](std::size_t i) { return ws.grad.data() + i * n; };
  auto H = [&](std::size_t i) { return ws.hess.data() + i * nn; };

  // o = phi(a) with phi', phi'' given.
  auto chain = [&](std::size_t o, std::size_t a, double d1, double d2) {
    if constexpr (Order >= 1) {
      double* go = G(o);
      const double* ga = G(a);
      for (int i = 0; i < n; ++i) go[i] = d1 * ga[i];
    }
    if constexpr (Order >= 2) {
      double* ho = H(o);
      const double* ha = H(a);
      const double* ga = G(a);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) ho[i * n + j] = d1 * ha[i * n + j] + d2 * ga[i] * ga[j];
    }
  };

  for (std::size_t k = 0; k < m; ++k) {
    const Instr& in = tape.code[k];
    double& v = ws.val[k];
    const std::size_t a = static_cast<std::size_t>(in.a);
    const std::size_t b = static_cast<std::size_t>(in.b);
    switch (in.op) {
      case Op::Variable:
        v = x[in.variable - 1];
        if constexpr (Order >= 1) G(k)[in.variable - 1] = 1.0;
        break;
      case Op::Constant: v = in.constant; break;
      case Op::Neg: v = -ws.val[a]; chain(k, a, -1.0, 0.0); break;
      case Op::Sin: {
        const double s = std::sin(ws.val[a]);
        v = s;
        chain(k, a, std::cos(ws.val[a]), -s);
        break;
      }
      case Op::Cos: {
        const double c = std::cos(ws.val[a]);
        v = c;
        chain(k, a, -std::sin(ws.val[a]), -c);
        break;
      }
      case Op::Exp: {
        const double e = std::exp(ws.val[a]);
        v = e;
        chain(k, a, e, e);
        break;
      }
      case Op::Sqrt: {
        const double u = ws.val[a];
        if (u < 0) domain_fail("sqrt of negative number", in);
        const double s = std::sqrt(u);
        if constexpr (Order >= 1) {
          if (s == 0) domain_fail("sqrt is not differentiable at 0", in);
          chain(k, a, 0.5 / s, -0.25 / (s * u));
        }
        v = s;
        break;
      }
      case Op::Add:
      case Op::Sub: {
        const double sign = in.op == Op::Add ? 1.0 : -1.0;
        v = ws.val[a] + sign * ws.val[b];
        if constexpr (Order >= 1) {
          for (int i = 0; i < n; ++i) G(k)[i] = G(a)[i] + sign * G(b)[i];
        }
        if constexpr (Order >= 2) {
          for (std::size_t i = 0; i < nn; ++i) H(k)[i] = H(a)[i] + sign * H(b)[i];
        }
        break;
      }
      case Op::Mul: {
        const double u = ws.val[a], w = ws.val[b];
        v = u * w;
        if constexpr (Order >= 1) {
          for (int i = 0; i < n; ++i) G(k)[i] = u * G(b)[i] + w * G(a)[i];
        }
        if constexpr (Order >= 2) {
          const double *ga = G(a), *gb = G(b), *ha = H(a), *hb = H(b);
          double* ho = H(k);
          for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
              ho[i * n + j] = u * hb[i * n + j] + w * ha[i * n + j] + ga[i] * gb[j] + gb[i] * ga[j];
        }
        break;
      }
      case Op::Div: {
        const double u = ws.val[a], w = ws.val[b];
        if (w == 0) domain_fail("division by zero", in);
        const double r = 1.0 / w;
        v = u * r;
        if constexpr (Order >= 1) {
          // q = u/w: dq = (du - q dw)/w
          for (int i = 0; i < n; ++i) G(k)[i] = (G(a)[i] - v * G(b)[i]) * r;
        }
        if constexpr (Order >= 2) {
          // d2q = (d2u - q d2w - dq dw^T - dw dq^T)/w
          const double *gq = G(k), *gb = G(b), *ha = H(a), *hb = H(b);
          double* ho = H(k);
          for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
              ho[i * n + j] = (ha[i * n + j] - v * hb[i * n + j] - gq[i] * gb[j] - gb[i] * gq[j]) * r;
        }
        break;
      }
      case Op::Pow: {
        const double u = ws.val[a];
        const int p = in.exponent;
        if (p < 0 && u == 0) domain_fail("division by zero", in);
        if (p == 0) {
          v = 1.0;
          break;
        }
        v = std::pow(u, p);
        double d1 = 0, d2 = 0;
        if constexpr (Order >= 1) {
          d1 = p * std::pow(u, p - 1);
          d2 = p == 1 ? 0.0 : static_cast<double>(p) * (p - 1) * std::pow(u, p - 2);
        }
        chain(k, a, d1, d2);
        break;
      }
    }
    if (!std::isfinite(v)) domain_fail("non-finite value", in);
  }
}

Workspace& workspace() {
  thread_local Workspace ws;
  return ws;
}

}  // namespace

Expression::Expression(NodePtr root, int ambient_dim) : root_(std::move(root)), ambient_dim_(ambient_dim) {
  if (!root_) throw PreconditionError("expression root is null");
  if (ambient_dim_ < 1) throw PreconditionError("ambient dimension must be at least 1");
  check_indices(*root_, ambient_dim_);
  tape_ = std::make_shared<const Tape>(*root_);
}

Expression Expression::constant(double value, int ambient_dim) {
  return Expression(make_constant(value), ambient_dim);
}

Expression Expression::variable(int index, int ambient_dim) {
  return Expression(make_variable(index), ambient_dim);
}

double Expression::value(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  if (x.size() != ambient_dim_) throw PreconditionError("point dimension does not match expression");
  Workspace& ws = workspace();
  run<0>(*tape_, x.data(), ambient_dim_, ws);
  return ws.val.back();
}

double Expression::gradient(const Eigen::Ref<const Eigen::VectorXd>& x, Eigen::VectorXd& gradient) const {
  if (x.size() != ambient_dim_) throw PreconditionError("point dimension does not match expression");
  Workspace& ws = workspace();
  run<1>(*tape_, x.data(), ambient_dim_, ws);
  const std::size_t last = tape_->code.size() - 1;
  gradient = Eigen::Map<const Eigen::VectorXd>(ws.grad.data() + last * ambient_dim_, ambient_dim_);
  return ws.val.back();
}

SecondOrderJet Expression::jet(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  if (x.size() != ambient_dim_) throw PreconditionError("point dimension does not match expression");
  Workspace& ws = workspace();
  run<2>(*tape_, x.data(), ambient_dim_, ws);
  const int n = ambient_dim_;
  const std::size_t last = tape_->code.size() - 1;
  SecondOrderJet j;
  j.value = ws.val.back();
  j.gradient = Eigen::Map<const Eigen::VectorXd>(ws.grad.data() + last * n, n);
  j.hessian = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
      ws.hess.data() + last * n * n, n, n);
  // exact symmetry as stored
  j.hessian = (0.5 * (j.hessian + j.hessian.transpose())).eval();
  return j;
}

std::string Expression::to_string() const { return root_ ? symbolics::to_string(*root_) : std::string(); }

}  // namespace morseflow::symbolics
