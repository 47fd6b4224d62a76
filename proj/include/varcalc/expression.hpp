#pragma once

#include <cctype>
#include <charconv>
#include <cmath>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "varcalc/error.hpp"
#include "varcalc/grid.hpp"

namespace varcalc {

/// Variables of the density expression language. A density
/// l(x, u, ux, e) defines the Lagrangian L(u, e) = (2pi/N) sum_i l(x_i, u_i, (Dx u)_i, e_i).
enum class Variable { X, U, Ux, E };

/// Immutable expression tree. Operator precedence, tightest first:
/// ^ (right-assoc), unary -, * /, + - (left-assoc).
class DensityExpr {
public:
    enum class Func { Sin, Cos, Exp, Log, Sqrt };
    enum class Op { Add, Sub, Mul, Div, Pow };

    struct Node;
    using NodePtr = std::shared_ptr<const Node>;

    struct Node {
        enum class Kind { Number, Var, Neg, Call, Binary };
        Kind kind;
        double number = 0.0;
        Variable var = Variable::X;
        Func func = Func::Sin;
        Op op = Op::Add;
        NodePtr a, b;  // Neg and Call use a only
    };

    DensityExpr() = default;
    explicit DensityExpr(NodePtr root) : root_(std::move(root)) {}

    bool empty() const { return root_ == nullptr; }
    const NodePtr& root() const { return root_; }

    double eval(double x, double u, double ux, double e) const {
        return eval_node(root_.get(), x, u, ux, e);
    }

    bool uses(Variable v) const { return uses_node(root_.get(), v); }

    std::string print() const { return print_node(root_.get(), 0); }

    friend bool operator==(const DensityExpr& a, const DensityExpr& b) {
        return equal_nodes(a.root_.get(), b.root_.get());
    }

    static NodePtr number(double v) {
        auto n = std::make_shared<Node>();
        n->kind = Node::Kind::Number;
        n->number = v;
        return n;
    }
    static NodePtr variable(Variable v) {
        auto n = std::make_shared<Node>();
        n->kind = Node::Kind::Var;
        n->var = v;
        return n;
    }
    static NodePtr negate(NodePtr a) {
        // Fold a negated literal into the literal so that printing and
        // reparsing yield identical trees.
        if (a->kind == Node::Kind::Number) return number(-a->number);
        auto n = std::make_shared<Node>();
        n->kind = Node::Kind::Neg;
        n->a = std::move(a);
        return n;
    }
    static NodePtr call(Func f, NodePtr a) {
        auto n = std::make_shared<Node>();
        n->kind = Node::Kind::Call;
        n->func = f;
        n->a = std::move(a);
        return n;
    }
    static NodePtr binary(Op op, NodePtr a, NodePtr b) {
        auto n = std::make_shared<Node>();
        n->kind = Node::Kind::Binary;
        n->op = op;
        n->a = std::move(a);
        n->b = std::move(b);
        return n;
    }

private:
    static double eval_node(const Node* n, double x, double u, double ux, double e) {
        switch (n->kind) {
        case Node::Kind::Number: return n->number;
        case Node::Kind::Var:
            switch (n->var) {
            case Variable::X: return x;
            case Variable::U: return u;
            case Variable::Ux: return ux;
            case Variable::E: return e;
            }
            return 0.0;
        case Node::Kind::Neg: return -eval_node(n->a.get(), x, u, ux, e);
        case Node::Kind::Call: {
            double v = eval_node(n->a.get(), x, u, ux, e);
            switch (n->func) {
            case Func::Sin: return std::sin(v);
            case Func::Cos: return std::cos(v);
            case Func::Exp: return std::exp(v);
            case Func::Log: return std::log(v);
            case Func::Sqrt: return std::sqrt(v);
            }
            return 0.0;
        }
        case Node::Kind::Binary: {
            double a = eval_node(n->a.get(), x, u, ux, e);
            double b = eval_node(n->b.get(), x, u, ux, e);
            switch (n->op) {
            case Op::Add: return a + b;
            case Op::Sub: return a - b;
            case Op::Mul: return a * b;
            case Op::Div: return a / b;
            case Op::Pow: return std::pow(a, b);
            }
            return 0.0;
        }
        }
        return 0.0;
    }

    static bool uses_node(const Node* n, Variable v) {
        if (!n) return false;
        if (n->kind == Node::Kind::Var) return n->var == v;
        return (n->a && uses_node(n->a.get(), v)) || (n->b && uses_node(n->b.get(), v));
    }

    static int precedence(const Node* n) {
        switch (n->kind) {
        case Node::Kind::Binary:
            switch (n->op) {
            case Op::Add:
            case Op::Sub: return 1;
            case Op::Mul:
            case Op::Div: return 2;
            case Op::Pow: return 4;
            }
            return 1;
        case Node::Kind::Neg: return 3;
        case Node::Kind::Number:
            // A negative literal prints with a leading '-', which reads back
            // as a unary minus; give it that precedence so parentheses land
            // where the reparse needs them.
            return std::signbit(n->number) ? 3 : 5;
        default: return 5;
        }
    }

    static std::string print_node(const Node* n, int parent_prec) {
        std::string s;
        switch (n->kind) {
        case Node::Kind::Number: s = detail::format_double(n->number); break;
        case Node::Kind::Var:
            switch (n->var) {
            case Variable::X: s = "x"; break;
            case Variable::U: s = "u"; break;
            case Variable::Ux: s = "ux"; break;
            case Variable::E: s = "e"; break;
            }
            break;
        case Node::Kind::Neg: s = "-" + print_node(n->a.get(), 3); break;
        case Node::Kind::Call: {
            const char* name = "";
            switch (n->func) {
            case Func::Sin: name = "sin"; break;
            case Func::Cos: name = "cos"; break;
            case Func::Exp: name = "exp"; break;
            case Func::Log: name = "log"; break;
            case Func::Sqrt: name = "sqrt"; break;
            }
            s = std::string(name) + "(" + print_node(n->a.get(), 0) + ")";
            break;
        }
        case Node::Kind::Binary: {
            int p = precedence(n);
            // Left-assoc ops need parens around a same-precedence right child;
            // the right-assoc ^ needs them around a same-or-lower left child.
            int left_min = (n->op == Op::Pow) ? p + 1 : p;
            int right_min = (n->op == Op::Pow) ? p : p + 1;
            std::string l = print_node(n->a.get(), left_min);
            std::string r = print_node(n->b.get(), right_min);
            switch (n->op) {
            case Op::Add: s = l + " + " + r; break;
            case Op::Sub: s = l + " - " + r; break;
            case Op::Mul: s = l + "*" + r; break;
            case Op::Div: s = l + "/" + r; break;
            case Op::Pow: s = l + "^" + r; break;
            }
            break;
        }
        }
        if (precedence(n) < parent_prec) return "(" + s + ")";
        return s;
    }

    static bool equal_nodes(const Node* a, const Node* b) {
        if (a == b) return true;
        if (!a || !b) return false;
        if (a->kind != b->kind) return false;
        switch (a->kind) {
        case Node::Kind::Number:
            return a->number == b->number || (std::isnan(a->number) && std::isnan(b->number));
        case Node::Kind::Var: return a->var == b->var;
        case Node::Kind::Neg: return equal_nodes(a->a.get(), b->a.get());
        case Node::Kind::Call:
            return a->func == b->func && equal_nodes(a->a.get(), b->a.get());
        case Node::Kind::Binary:
            return a->op == b->op && equal_nodes(a->a.get(), b->a.get())
                   && equal_nodes(a->b.get(), b->b.get());
        }
        return false;
    }

    NodePtr root_;
};

namespace detail {

class ExprParser {
public:
    ExprParser(std::string_view text, bool spatial_only)
        : text_(text), spatial_only_(spatial_only) {}

    DensityExpr parse() {
        skip_ws();
        if (pos_ >= text_.size())
            fail("empty expression", "a number, variable, function or '('");
        auto root = parse_sum();
        skip_ws();
        if (pos_ < text_.size())
            fail("unexpected trailing input", "an operator or end of expression");
        return DensityExpr(std::move(root));
    }

private:
    using NodePtr = DensityExpr::NodePtr;

    NodePtr parse_sum() {
        NodePtr lhs = parse_product();
        for (;;) {
            skip_ws();
            if (accept('+'))
                lhs = DensityExpr::binary(DensityExpr::Op::Add, std::move(lhs), parse_product());
            else if (accept('-'))
                lhs = DensityExpr::binary(DensityExpr::Op::Sub, std::move(lhs), parse_product());
            else
                return lhs;
        }
    }

    NodePtr parse_product() {
        NodePtr lhs = parse_unary();
        for (;;) {
            skip_ws();
            if (accept('*'))
                lhs = DensityExpr::binary(DensityExpr::Op::Mul, std::move(lhs), parse_unary());
            else if (accept('/'))
                lhs = DensityExpr::binary(DensityExpr::Op::Div, std::move(lhs), parse_unary());
            else
                return lhs;
        }
    }

    NodePtr parse_unary() {
        skip_ws();
        if (accept('-')) return DensityExpr::negate(parse_unary());
        return parse_power();
    }

    NodePtr parse_power() {
        NodePtr base = parse_atom();
        skip_ws();
        if (accept('^'))
            return DensityExpr::binary(DensityExpr::Op::Pow, std::move(base), parse_unary());
        return base;
    }

    NodePtr parse_atom() {
        skip_ws();
        if (pos_ >= text_.size())
            fail("unexpected end of expression", "a number, variable, function or '('");
        char c = text_[pos_];
        if (c == '(') {
            ++pos_;
            auto inner = parse_sum();
            skip_ws();
            if (!accept(')')) fail("unbalanced parenthesis", "')'");
            return inner;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return parse_identifier();
        fail(std::string("unexpected character '") + c + "'",
             "a number, variable, function or '('");
        return nullptr;
    }

    NodePtr parse_number() {
        double value = 0.0;
        const char* begin = text_.data() + pos_;
        const char* end = text_.data() + text_.size();
        auto res = std::from_chars(begin, end, value);
        if (res.ec != std::errc{}) fail("malformed number", "a decimal literal");
        pos_ += static_cast<std::size_t>(res.ptr - begin);
        return DensityExpr::number(value);
    }

    NodePtr parse_identifier() {
        std::size_t start = pos_;
        while (pos_ < text_.size()
               && (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
            ++pos_;
        std::string_view name = text_.substr(start, pos_ - start);
        skip_ws();
        if (pos_ < text_.size() && text_[pos_] == '(') {
            DensityExpr::Func f;
            if (name == "sin") f = DensityExpr::Func::Sin;
            else if (name == "cos") f = DensityExpr::Func::Cos;
            else if (name == "exp") f = DensityExpr::Func::Exp;
            else if (name == "log") f = DensityExpr::Func::Log;
            else if (name == "sqrt") f = DensityExpr::Func::Sqrt;
            else {
                pos_ = start;
                fail("unknown function '" + std::string(name) + "'",
                     "one of sin, cos, exp, log, sqrt");
                return nullptr;
            }
            ++pos_;  // '('
            auto arg = parse_sum();
            skip_ws();
            if (!accept(')')) fail("unbalanced parenthesis in call", "')'");
            return DensityExpr::call(f, std::move(arg));
        }
        if (name == "x") return DensityExpr::variable(Variable::X);
        if (!spatial_only_) {
            if (name == "u") return DensityExpr::variable(Variable::U);
            if (name == "ux") return DensityExpr::variable(Variable::Ux);
            if (name == "e") return DensityExpr::variable(Variable::E);
        }
        pos_ = start;
        fail("unknown identifier '" + std::string(name) + "'",
             spatial_only_ ? "the variable x or a function name"
                           : "one of x, u, ux, e or a function name");
        return nullptr;
    }

    bool accept(char c) {
        if (pos_ < text_.size() && text_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    void skip_ws() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }

    [[noreturn]] void fail(const std::string& what, const std::string& expected) {
        throw parse_error("expression parse error at position " + std::to_string(pos_) + ": " + what
                              + " (expected " + expected + ")",
                          pos_, expected);
    }

    std::string_view text_;
    bool spatial_only_;
    std::size_t pos_ = 0;
};

} // namespace detail

/// Parse a Lagrangian density over the variables {x, u, ux, e}.
inline DensityExpr parse_density(std::string_view text) {
    return detail::ExprParser(text, /*spatial_only=*/false).parse();
}

/// Parse an expression over the single variable x (initial/endpoint data).
inline DensityExpr parse_spatial(std::string_view text) {
    return detail::ExprParser(text, /*spatial_only=*/true).parse();
}

/// Sample a spatial expression on a grid (m must be 1).
inline GridFunction sample_expression(const DensityExpr& ex, PeriodicGrid g) {
    if (g.dim != 1)
        throw config_error("sample_expression: expression-valued data requires m == 1");
    GridFunction u(g);
    for (int i = 0; i < g.nodes; ++i) {
        double v = ex.eval(g.node(i), 0.0, 0.0, 0.0);
        if (!std::isfinite(v))
            throw evaluation_error("sample_expression: non-finite value at x = "
                                   + detail::format_double(g.node(i)));
        u.at(i, 0) = v;
    }
    return u;
}

} // namespace varcalc
