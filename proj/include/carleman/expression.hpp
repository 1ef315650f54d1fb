#pragma once

#include "carleman/types.hpp"

#include <memory>
#include <string>

namespace carleman {

// Small expression grammar for user-defined scalar fields:
//   expr   := term (('+'|'-') term)*
//   term   := factor (('*'|'/') factor)*
//   factor := ('+'|'-')* power
//   power  := atom ('^' factor)?          (right associative)
//   atom   := number | x<k> | sin(expr) | cos(expr) | exp(expr) | '(' expr ')'
// Coordinates are x1..xn (1-based). '^' requires a constant exponent so that
// derivatives stay inside the grammar.
class Expression {
 public:
  static Expression parse(const std::string& text, int dim);

  double eval(const Point& x) const;
  Expression derivative(int coord) const;  // d/dx_{coord}, 0-based

  Vec gradient(const Point& x) const;
  Mat hessian(const Point& x) const;

  int dim() const { return dim_; }
  std::string str() const;

  Expression() = default;

  struct Node;  // exposed for the parser/derivative implementation

 private:
  explicit Expression(std::shared_ptr<const Node> root, int dim);
  std::shared_ptr<const Node> root_;
  int dim_ = 0;
};

}  // namespace carleman
