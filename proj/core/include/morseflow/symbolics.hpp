#pragma once

// Arithmetic expressions over ambient coordinates x1..xn with exact first and
// second derivatives by forward-mode jet propagation.
//
// Grammar (whitespace insignificant):
//   expr     := term { ('+' | '-') term }
//   term     := unary { ('*' | '/') unary }
//   unary    := '-' unary | power
//   power    := primary { '^' exponent }
//   exponent := ['-' | '+'] integer-literal | '(' ['-' | '+'] integer-literal ')'
//   primary  := literal | 'x' index | func '(' expr ')' | '(' expr ')'
//   func     := 'sin' | 'cos' | 'exp' | 'sqrt'
//   literal  := digits ['.' digits] [('e' | 'E') ['+' | '-'] digits]
// Binary operators are left-associative; '^' binds tighter than unary minus,
// so "-x1^2" is -(x1^2).

#include <Eigen/Core>

#include <memory>
#include <string>
#include <string_view>

namespace morseflow::symbolics {

enum class Op { Variable, Constant, Neg, Sin, Cos, Exp, Sqrt, Add, Sub, Mul, Div, Pow };

struct Node;
using NodePtr = std::shared_ptr<const Node>;

struct Node {
  Op op = Op::Constant;
  int variable = 0;      // 1-based, Op::Variable only
  double constant = 0;   // Op::Constant only
  int exponent = 0;      // Op::Pow only
  NodePtr lhs;           // operand of unary ops, left operand of binary ops
  NodePtr rhs;           // right operand of Add/Sub/Mul/Div
};

NodePtr make_variable(int index);
NodePtr make_constant(double value);
NodePtr make_unary(Op op, NodePtr operand);
NodePtr make_binary(Op op, NodePtr lhs, NodePtr rhs);
NodePtr make_power(NodePtr base, int exponent);

/// Value, ambient gradient and ambient Hessian of an expression at a point.
struct SecondOrderJet {
  double value = 0;
  Eigen::VectorXd gradient;
  Eigen::MatrixXd hessian;
};

class Tape;

/// Immutable expression tree bound to an ambient dimension. Copies share the
/// tree and the compiled evaluation tape; concurrent evaluation is safe.
class Expression {
 public:
  Expression() = default;
  /// Throws ParseError if a variable index falls outside 1..ambient_dim.
  Expression(NodePtr root, int ambient_dim);

  static Expression constant(double value, int ambient_dim);
  static Expression variable(int index, int ambient_dim);

  int ambient_dim() const noexcept { return ambient_dim_; }
  const Node& root() const noexcept { return *root_; }
  const NodePtr& root_ptr() const noexcept { return root_; }
  bool empty() const noexcept { return root_ == nullptr; }

  double value(const Eigen::Ref<const Eigen::VectorXd>& x) const;
  /// Writes the gradient into `gradient` (resized) and returns the value.
  double gradient(const Eigen::Ref<const Eigen::VectorXd>& x, Eigen::VectorXd& gradient) const;
  SecondOrderJet jet(const Eigen::Ref<const Eigen::VectorXd>& x) const;

  /// Fully parenthesized text that parses back to an identical tree.
  std::string to_string() const;

 private:
  NodePtr root_;
  int ambient_dim_ = 0;
  std::shared_ptr<const Tape> tape_;
};

/// Structural equality (constants compared exactly).
bool operator==(const Expression& a, const Expression& b);
bool same_tree(const Node& a, const Node& b);
std::string to_string(const Node& node);

Expression parse(std::string_view text, int ambient_dim);

inline SecondOrderJet evaluate_jet(const Expression& e, const Eigen::Ref<const Eigen::VectorXd>& x) {
  return e.jet(x);
}

}  // namespace morseflow::symbolics
