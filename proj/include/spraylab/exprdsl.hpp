#pragma once

// A small arithmetic expression language for spray coefficients, metrics and
// volume densities.
//
//   expr   := term (("+" | "-") term)*
//   term   := unary (("*" | "/") unary)*
//   unary  := "-" unary | power
//   power  := atom ("^" ["-"] integer)?
//   atom   := number | variable | func "(" expr ")" | "(" expr ")"
//
// Variables are x1..xn and y1..yn; functions are sqrt, sin, cos, exp, log and
// abs. Evaluation is generic over the carrier: double or Jet.

#include <cmath>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "spraylab/errors.hpp"
#include "spraylab/jets.hpp"

namespace spraylab {

enum class NodeKind { Number, Variable, Negate, Add, Sub, Mul, Div, Power, Call };
enum class Function { Sqrt, Sin, Cos, Exp, Log, Abs };

struct ExprNode {
    NodeKind kind = NodeKind::Number;
    double number = 0.0;
    bool is_y = false;       // Variable: y^index instead of x^index
    int index = 0;           // Variable: 0-based coordinate index
    int exponent = 0;        // Power
    Function function = Function::Sqrt;  // Call
    SourceSpan span;
    std::vector<ExprNode> children;
};

struct ParseOptions {
    bool allow_y = true;
    // Position of the first character of the expression inside a larger document,
    // so that spans and error messages refer to the document.
    std::size_t base_offset = 0;
    int base_line = 1;
    int base_column = 1;
};

// Immutable, cheaply copyable parsed expression.
class Expr {
public:
    Expr() = default;
    Expr(std::shared_ptr<const ExprNode> root, std::string source, int dim, std::size_t base_offset);

    const ExprNode& root() const { return *root_; }
    const std::string& source() const noexcept { return source_; }
    int dim() const noexcept { return dim_; }
    bool valid() const noexcept { return static_cast<bool>(root_); }
    bool uses_y() const;

    // Source text of a node, for error messages.
    std::string snippet(const ExprNode& node) const;

private:
    std::shared_ptr<const ExprNode> root_;
    std::string source_;
    int dim_ = 0;
    std::size_t base_offset_ = 0;
};

Expr parse_expression(std::string_view src, int n, const ParseOptions& options = {});

// Canonical fully parenthesized form; reparses to a structurally identical tree.
std::string to_string(const Expr& e);
std::string to_string(const ExprNode& node);

bool structurally_equal(const ExprNode& a, const ExprNode& b);

const char* function_name(Function f);

namespace detail {

inline double carrier_value(double v) { return v; }
inline double carrier_value(const Jet& j) { return j.value(); }
inline double carrier_constant(double c, double) { return c; }
inline Jet carrier_constant(double c, const Jet& proto) { return Jet::constant(c, proto.dim(), proto.order()); }

inline double integer_power(double base, int e) {
    if (e < 0) return 1.0 / integer_power(base, -e);
    double r = 1.0;
    for (int k = 0; k < e; ++k) r *= base;
    return r;
}
inline Jet integer_power(const Jet& base, int e) { return spraylab::pow(base, e); }

template <class T>
T eval_node(const Expr& expr, const ExprNode& node, std::span<const T> x, std::span<const T> y) {
    using std::cos;
    using std::exp;
    using std::log;
    using std::sin;
    using std::sqrt;
    auto fail = [&](const char* what) -> T { throw DomainError(what, node.span, expr.snippet(node)); };
    switch (node.kind) {
        case NodeKind::Number: {
            const T& proto = !x.empty() ? x[0] : y[0];
            return carrier_constant(node.number, proto);
        }
        case NodeKind::Variable: {
            const auto& src = node.is_y ? y : x;
            return src[static_cast<std::size_t>(node.index)];
        }
        case NodeKind::Negate:
            return -eval_node(expr, node.children[0], x, y);
        case NodeKind::Add:
            return eval_node(expr, node.children[0], x, y) + eval_node(expr, node.children[1], x, y);
        case NodeKind::Sub:
            return eval_node(expr, node.children[0], x, y) - eval_node(expr, node.children[1], x, y);
        case NodeKind::Mul:
            return eval_node(expr, node.children[0], x, y) * eval_node(expr, node.children[1], x, y);
        case NodeKind::Div: {
            T num = eval_node(expr, node.children[0], x, y);
            T den = eval_node(expr, node.children[1], x, y);
            if (carrier_value(den) == 0.0) return fail("division by zero");
            return num / den;
        }
        case NodeKind::Power: {
            T base = eval_node(expr, node.children[0], x, y);
            if (node.exponent < 0 && carrier_value(base) == 0.0) return fail("negative power of zero");
            return integer_power(base, node.exponent);
        }
        case NodeKind::Call: {
            T arg = eval_node(expr, node.children[0], x, y);
            const double v = carrier_value(arg);
            switch (node.function) {
                case Function::Sqrt:
                    if (!(v > 0.0)) return fail("sqrt of non-positive value");
                    return sqrt(arg);
                case Function::Log:
                    if (!(v > 0.0)) return fail("log of non-positive value");
                    return log(arg);
                case Function::Abs:
                    if (v == 0.0) return fail("abs at zero is not differentiable");
                    return v > 0.0 ? arg : -arg;
                case Function::Sin: return sin(arg);
                case Function::Cos: return cos(arg);
                case Function::Exp: return exp(arg);
            }
        }
    }
    throw std::logic_error("unreachable expression node");
}

}  // namespace detail

// Evaluates `expr` with x1..xn bound to x and y1..yn bound to y.
template <class T>
T evaluate(const Expr& expr, std::span<const T> x, std::span<const T> y) {
    if (static_cast<int>(x.size()) < expr.dim() || static_cast<int>(y.size()) < expr.dim()) {
        throw std::invalid_argument("evaluate: incomplete variable bindings");
    }
    return detail::eval_node(expr, expr.root(), x, y);
}

// ---------------------------------------------------------------------------
// Spray-definition documents (see docs/spray-format.md).

struct SprayDefinition {
    int dim = 0;
    std::string label;
    std::optional<std::vector<std::pair<double, double>>> domain;
    std::vector<Expr> G;                     // G1..Gn, empty unless a coefficient block is present
    std::optional<Expr> F;                   // Finsler function F(x, y)
    std::map<std::pair<int, int>, Expr> a;   // 0-based (i, j), i <= j
    std::map<int, Expr> b;                   // 0-based i
    std::optional<Expr> kappa;               // Randers isotropy scalar kappa(x)
    std::optional<Expr> sigma;               // volume density sigma(x)
};

SprayDefinition parse_spray_definition(std::string_view text);
SprayDefinition load_spray_definition(const std::string& path);

}  // namespace spraylab
