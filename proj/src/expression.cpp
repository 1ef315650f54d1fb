#include "carleman/expression.hpp"

#include <cctype>
#include <cmath>
#include <sstream>

namespace carleman {

enum class Op { Const, Coord, Add, Sub, Mul, Div, Pow, Neg, Sin, Cos, Exp };

struct Expression::Node {
  Op op;
  double value = 0.0;  // Const: value; Pow: exponent
  int coord = -1;
  std::shared_ptr<const Node> a, b;
};

namespace {

using NodeP = std::shared_ptr<const Expression::Node>;

NodeP make_const(double v) {
  auto n = std::make_shared<Expression::Node>();
  n->op = Op::Const;
  n->value = v;
  return n;
}

NodeP make_coord(int k) {
  auto n = std::make_shared<Expression::Node>();
  n->op = Op::Coord;
  n->coord = k;
  return n;
}

bool is_const(const NodeP& n, double v) { return n->op == Op::Const && n->value == v; }

NodeP make_node(Op op, NodeP a, NodeP b = nullptr, double value = 0.0) {
  // Light constant folding keeps derivative trees small.
  switch (op) {
    case Op::Add:
      if (is_const(a, 0)) return b;
      if (is_const(b, 0)) return a;
      if (a->op == Op::Const && b->op == Op::Const) return make_const(a->value + b->value);
      break;
    case Op::Sub:
      if (is_const(b, 0)) return a;
      if (a->op == Op::Const && b->op == Op::Const) return make_const(a->value - b->value);
      break;
    case Op::Mul:
      if (is_const(a, 0) || is_const(b, 0)) return make_const(0);
      if (is_const(a, 1)) return b;
      if (is_const(b, 1)) return a;
      if (a->op == Op::Const && b->op == Op::Const) return make_const(a->value * b->value);
      break;
    case Op::Div:
      if (is_const(a, 0)) return make_const(0);
      if (is_const(b, 1)) return a;
      break;
    case Op::Neg:
      if (a->op == Op::Const) return make_const(-a->value);
      break;
    case Op::Pow:
      if (value == 0.0) return make_const(1);
      if (value == 1.0) return a;
      break;
    default:
      break;
  }
  auto n = std::make_shared<Expression::Node>();
  n->op = op;
  n->a = std::move(a);
  n->b = std::move(b);
  n->value = value;
  return n;
}

double eval_node(const Expression::Node& n, const Point& x) {
  switch (n.op) {
    case Op::Const: return n.value;
    case Op::Coord: return x[n.coord];
    case Op::Add: return eval_node(*n.a, x) + eval_node(*n.b, x);
    case Op::Sub: return eval_node(*n.a, x) - eval_node(*n.b, x);
    case Op::Mul: return eval_node(*n.a, x) * eval_node(*n.b, x);
    case Op::Div: return eval_node(*n.a, x) / eval_node(*n.b, x);
    case Op::Pow: return std::pow(eval_node(*n.a, x), n.value);
    case Op::Neg: return -eval_node(*n.a, x);
    case Op::Sin: return std::sin(eval_node(*n.a, x));
    case Op::Cos: return std::cos(eval_node(*n.a, x));
    case Op::Exp: return std::exp(eval_node(*n.a, x));
  }
  return 0.0;
}

NodeP diff_node(const NodeP& n, int k) {
  switch (n->op) {
    case Op::Const: return make_const(0);
    case Op::Coord: return make_const(n->coord == k ? 1 : 0);
    case Op::Add: return make_node(Op::Add, diff_node(n->a, k), diff_node(n->b, k));
    case Op::Sub: return make_node(Op::Sub, diff_node(n->a, k), diff_node(n->b, k));
    case Op::Mul:
      return make_node(Op::Add, make_node(Op::Mul, diff_node(n->a, k), n->b),
                       make_node(Op::Mul, n->a, diff_node(n->b, k)));
    case Op::Div:
      // (a/b)' = a'/b - a b'/b^2
      return make_node(
          Op::Sub, make_node(Op::Div, diff_node(n->a, k), n->b),
          make_node(Op::Div, make_node(Op::Mul, n->a, diff_node(n->b, k)),
                    make_node(Op::Pow, n->b, nullptr, 2.0)));
    case Op::Pow:
      // constant exponent: (a^c)' = c a^{c-1} a'
      return make_node(Op::Mul, make_const(n->value),
                       make_node(Op::Mul, make_node(Op::Pow, n->a, nullptr, n->value - 1.0),
                                 diff_node(n->a, k)));
    case Op::Neg: return make_node(Op::Neg, diff_node(n->a, k));
    case Op::Sin: return make_node(Op::Mul, make_node(Op::Cos, n->a), diff_node(n->a, k));
    case Op::Cos:
      return make_node(Op::Neg, make_node(Op::Mul, make_node(Op::Sin, n->a), diff_node(n->a, k)));
    case Op::Exp: return make_node(Op::Mul, make_node(Op::Exp, n->a), diff_node(n->a, k));
  }
  return make_const(0);
}

void print_node(const Expression::Node& n, std::ostringstream& os) {
  switch (n.op) {
    case Op::Const: os << n.value; return;
    case Op::Coord: os << "x" << (n.coord + 1); return;
    case Op::Add: os << "("; print_node(*n.a, os); os << " + "; print_node(*n.b, os); os << ")"; return;
    case Op::Sub: os << "("; print_node(*n.a, os); os << " - "; print_node(*n.b, os); os << ")"; return;
    case Op::Mul: os << "("; print_node(*n.a, os); os << "*"; print_node(*n.b, os); os << ")"; return;
    case Op::Div: os << "("; print_node(*n.a, os); os << "/"; print_node(*n.b, os); os << ")"; return;
    case Op::Pow: os << "("; print_node(*n.a, os); os << ")^" << n.value; return;
    case Op::Neg: os << "(-"; print_node(*n.a, os); os << ")"; return;
    case Op::Sin: os << "sin("; print_node(*n.a, os); os << ")"; return;
    case Op::Cos: os << "cos("; print_node(*n.a, os); os << ")"; return;
    case Op::Exp: os << "exp("; print_node(*n.a, os); os << ")"; return;
  }
}

class Parser {
 public:
  Parser(const std::string& text, int dim) : s_(text), dim_(dim) {}

  NodeP run() {
    NodeP e = expr();
    skip_ws();
    if (pos_ != s_.size()) fail("trailing input");
    return e;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const {
    throw InvalidInput("expression parse error at offset " + std::to_string(pos_) + ": " + msg +
                       " in \"" + s_ + "\"");
  }

  void skip_ws() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_ws();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  char peek() {
    skip_ws();
    return pos_ < s_.size() ? s_[pos_] : '\0';
  }

  NodeP expr() {
    NodeP e = term();
    for (;;) {
      if (accept('+')) e = make_node(Op::Add, e, term());
      else if (accept('-')) e = make_node(Op::Sub, e, term());
      else return e;
    }
  }

  NodeP term() {
    NodeP e = factor();
    for (;;) {
      if (accept('*')) e = make_node(Op::Mul, e, factor());
      else if (accept('/')) e = make_node(Op::Div, e, factor());
      else return e;
    }
  }

  NodeP factor() {
    if (accept('-')) return make_node(Op::Neg, factor());
    if (accept('+')) return factor();
    return power();
  }

  NodeP power() {
    NodeP base = atom();
    if (accept('^')) {
      NodeP e = factor();
      if (e->op != Op::Const) fail("exponent must be a constant");
      return make_node(Op::Pow, base, nullptr, e->value);
    }
    return base;
  }

  NodeP atom() {
    skip_ws();
    if (pos_ >= s_.size()) fail("unexpected end of input");
    char c = s_[pos_];
    if (c == '(') {
      ++pos_;
      NodeP e = expr();
      if (!accept(')')) fail("expected ')'");
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c))) return ident();
    fail(std::string("unexpected character '") + c + "'");
  }

  NodeP number() {
    std::size_t end = pos_;
    while (end < s_.size() &&
           (std::isdigit(static_cast<unsigned char>(s_[end])) || s_[end] == '.' || s_[end] == 'e' ||
            s_[end] == 'E' ||
            ((s_[end] == '+' || s_[end] == '-') && (s_[end - 1] == 'e' || s_[end - 1] == 'E'))))
      ++end;
    double v = 0;
    try {
      v = std::stod(s_.substr(pos_, end - pos_));
    } catch (...) {
      fail("bad number literal");
    }
    pos_ = end;
    return make_const(v);
  }

  NodeP ident() {
    std::size_t end = pos_;
    while (end < s_.size() && std::isalnum(static_cast<unsigned char>(s_[end]))) ++end;
    std::string name = s_.substr(pos_, end - pos_);
    pos_ = end;
    if (name.size() >= 2 && name[0] == 'x') {
      int k = 0;
      try {
        k = std::stoi(name.substr(1));
      } catch (...) {
        fail("bad coordinate '" + name + "'");
      }
      if (k < 1 || k > dim_) fail("coordinate " + name + " out of range for dim " + std::to_string(dim_));
      return make_coord(k - 1);
    }
    if (name == "sin" || name == "cos" || name == "exp") {
      if (!accept('(')) fail("expected '(' after " + name);
      NodeP arg = expr();
      if (!accept(')')) fail("expected ')'");
      if (name == "sin") return make_node(Op::Sin, arg);
      if (name == "cos") return make_node(Op::Cos, arg);
      return make_node(Op::Exp, arg);
    }
    fail("unknown identifier '" + name + "'");
  }

  const std::string& s_;
  int dim_;
  std::size_t pos_ = 0;
};

}  // namespace

Expression::Expression(std::shared_ptr<const Node> root, int dim)
    : root_(std::move(root)), dim_(dim) {}

Expression Expression::parse(const std::string& text, int dim) {
  if (dim < 1) throw InvalidInput("expression dim must be >= 1");
  return Expression(Parser(text, dim).run(), dim);
}

double Expression::eval(const Point& x) const { return eval_node(*root_, x); }

Expression Expression::derivative(int coord) const {
  if (coord < 0 || coord >= dim_) throw InvalidInput("derivative coordinate out of range");
  return Expression(diff_node(root_, coord), dim_);
}

Vec Expression::gradient(const Point& x) const {
  Vec g(dim_);
  for (int k = 0; k < dim_; ++k) g[k] = derivative(k).eval(x);
  return g;
}

Mat Expression::hessian(const Point& x) const {
  Mat h(dim_, dim_);
  for (int j = 0; j < dim_; ++j) {
    Expression dj = derivative(j);
    for (int k = j; k < dim_; ++k) {
      h(j, k) = dj.derivative(k).eval(x);
      h(k, j) = h(j, k);
    }
  }
  return h;
}

std::string Expression::str() const {
  std::ostringstream os;
  print_node(*root_, os);
  return os.str();
}

}  // namespace carleman
