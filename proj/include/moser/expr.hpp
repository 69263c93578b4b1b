#pragma once

// Scalar coefficient expressions over t, x1..xm with symbolic differentiation.

#include "moser/core.hpp"

#include <cctype>
#include <cstdio>
#include <cstdlib>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace moser {

enum class Op {
    constant,
    variable,
    neg,
    add,
    sub,
    mul,
    div,
    pow,
    sin,
    cos,
    exp,
    log,
    sqrt,
    abs,
    min,
    max,
    step, // internal: 1 if arg >= 0 else 0; only produced by differentiation
};

struct ExprNode;

/// Immutable expression handle. Variable 0 is t, variable i ≥ 1 is x_i.
class Expr {
public:
    Expr() = default;
    explicit Expr(std::shared_ptr<const ExprNode> node) : node_(std::move(node)) {}

    static Expr constant(double v);
    static Expr variable(int index);

    const ExprNode& node() const { return *node_; }
    bool valid() const { return static_cast<bool>(node_); }

    double eval(std::span<const double> vars) const;

    /// Partial derivative with respect to variable `index` (0 = t).
    Expr diff(int index) const;

    /// Source text that reparses to a structurally identical tree.
    std::string str() const;

    bool is_constant() const;
    bool is_constant(double v) const;

    /// Largest variable index referenced (-1 if none).
    int max_variable() const;

private:
    std::shared_ptr<const ExprNode> node_;
};

struct ExprNode {
    Op op = Op::constant;
    double value = 0.0; // constant value
    int var = 0;        // variable index
    std::vector<Expr> args;
};

Expr operator+(const Expr& a, const Expr& b);
Expr operator-(const Expr& a, const Expr& b);
Expr operator*(const Expr& a, const Expr& b);
Expr operator/(const Expr& a, const Expr& b);
Expr operator-(const Expr& a);
Expr pow(const Expr& a, const Expr& b);
Expr call(Op fn, const Expr& a);
Expr call(Op fn, const Expr& a, const Expr& b);

bool structurally_equal(const Expr& a, const Expr& b);

/// Parse `src` with variables t and x1..x_dim.
Expr parse_expr(std::string_view src, int dim);

// ---------------------------------------------------------------------------

namespace detail {

inline Expr make_node(Op op, std::vector<Expr> args, double value = 0.0, int var = 0) {
    auto n = std::make_shared<ExprNode>();
    n->op = op;
    n->args = std::move(args);
    n->value = value;
    n->var = var;
    return Expr(std::move(n));
}

inline Expr raw(Op op, const Expr& a) { return make_node(op, {a}); }
inline Expr raw(Op op, const Expr& a, const Expr& b) { return make_node(op, {a, b}); }

inline const char* function_name(Op op) {
    switch (op) {
    case Op::sin: return "sin";
    case Op::cos: return "cos";
    case Op::exp: return "exp";
    case Op::log: return "log";
    case Op::sqrt: return "sqrt";
    case Op::abs: return "abs";
    case Op::min: return "min";
    case Op::max: return "max";
    case Op::step: return "step";
    default: return nullptr;
    }
}

inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

} // namespace detail

inline Expr Expr::constant(double v) { return detail::make_node(Op::constant, {}, v); }
inline Expr Expr::variable(int index) { return detail::make_node(Op::variable, {}, 0.0, index); }

inline bool Expr::is_constant() const { return node_->op == Op::constant; }
inline bool Expr::is_constant(double v) const { return node_->op == Op::constant && node_->value == v; }

inline int Expr::max_variable() const {
    if (node_->op == Op::variable) return node_->var;
    int m = -1;
    for (const auto& a : node_->args) m = std::max(m, a.max_variable());
    return m;
}

// Simplifying constructors: fold constants and drop additive/multiplicative identities
// so that repeated differentiation stays compact.

inline Expr operator+(const Expr& a, const Expr& b) {
    if (a.is_constant() && b.is_constant()) return Expr::constant(a.node().value + b.node().value);
    if (a.is_constant(0.0)) return b;
    if (b.is_constant(0.0)) return a;
    return detail::raw(Op::add, a, b);
}

inline Expr operator-(const Expr& a) {
    if (a.is_constant()) return Expr::constant(-a.node().value);
    if (a.node().op == Op::neg) return a.node().args[0];
    return detail::raw(Op::neg, a);
}

inline Expr operator-(const Expr& a, const Expr& b) {
    if (a.is_constant() && b.is_constant()) return Expr::constant(a.node().value - b.node().value);
    if (b.is_constant(0.0)) return a;
    if (a.is_constant(0.0)) return -b;
    return detail::raw(Op::sub, a, b);
}

inline Expr operator*(const Expr& a, const Expr& b) {
    if (a.is_constant() && b.is_constant()) return Expr::constant(a.node().value * b.node().value);
    if (a.is_constant(0.0) || b.is_constant(0.0)) return Expr::constant(0.0);
    if (a.is_constant(1.0)) return b;
    if (b.is_constant(1.0)) return a;
    if (a.is_constant(-1.0)) return -b;
    if (b.is_constant(-1.0)) return -a;
    return detail::raw(Op::mul, a, b);
}

inline Expr operator/(const Expr& a, const Expr& b) {
    if (a.is_constant() && b.is_constant()) return Expr::constant(a.node().value / b.node().value);
    if (a.is_constant(0.0)) return Expr::constant(0.0);
    if (b.is_constant(1.0)) return a;
    return detail::raw(Op::div, a, b);
}

inline Expr pow(const Expr& a, const Expr& b) {
    if (a.is_constant() && b.is_constant()) return Expr::constant(std::pow(a.node().value, b.node().value));
    if (b.is_constant(1.0)) return a;
    if (b.is_constant(0.0)) return Expr::constant(1.0);
    return detail::raw(Op::pow, a, b);
}

inline Expr call(Op fn, const Expr& a) {
    if (a.is_constant()) {
        const double v = a.node().value;
        switch (fn) {
        case Op::sin: return Expr::constant(std::sin(v));
        case Op::cos: return Expr::constant(std::cos(v));
        case Op::exp: return Expr::constant(std::exp(v));
        case Op::log: return Expr::constant(std::log(v));
        case Op::sqrt: return Expr::constant(std::sqrt(v));
        case Op::abs: return Expr::constant(std::abs(v));
        case Op::step: return Expr::constant(v >= 0.0 ? 1.0 : 0.0);
        default: break;
        }
    }
    return detail::raw(fn, a);
}

inline Expr call(Op fn, const Expr& a, const Expr& b) {
    if (a.is_constant() && b.is_constant()) {
        const double x = a.node().value, y = b.node().value;
        if (fn == Op::min) return Expr::constant(std::min(x, y));
        if (fn == Op::max) return Expr::constant(std::max(x, y));
    }
    return detail::raw(fn, a, b);
}

inline double Expr::eval(std::span<const double> vars) const {
    const ExprNode& n = *node_;
    switch (n.op) {
    case Op::constant: return n.value;
    case Op::variable: return vars[static_cast<std::size_t>(n.var)];
    case Op::neg: return -n.args[0].eval(vars);
    case Op::add: return n.args[0].eval(vars) + n.args[1].eval(vars);
    case Op::sub: return n.args[0].eval(vars) - n.args[1].eval(vars);
    case Op::mul: return n.args[0].eval(vars) * n.args[1].eval(vars);
    case Op::div: return n.args[0].eval(vars) / n.args[1].eval(vars);
    case Op::pow: {
        const double base = n.args[0].eval(vars);
        const Expr& e = n.args[1];
        // Integer exponents: exact repeated products keep negative bases well-defined.
        if (e.is_constant() && e.node().value == 2.0) return base * base;
        return std::pow(base, e.eval(vars));
    }
    case Op::sin: return std::sin(n.args[0].eval(vars));
    case Op::cos: return std::cos(n.args[0].eval(vars));
    case Op::exp: return std::exp(n.args[0].eval(vars));
    case Op::log: return std::log(n.args[0].eval(vars));
    case Op::sqrt: return std::sqrt(n.args[0].eval(vars));
    case Op::abs: return std::abs(n.args[0].eval(vars));
    case Op::min: return std::min(n.args[0].eval(vars), n.args[1].eval(vars));
    case Op::max: return std::max(n.args[0].eval(vars), n.args[1].eval(vars));
    case Op::step: return n.args[0].eval(vars) >= 0.0 ? 1.0 : 0.0;
    }
    return 0.0;
}

inline Expr Expr::diff(int index) const {
    const ExprNode& n = *node_;
    const auto zero = Expr::constant(0.0);
    const auto one = Expr::constant(1.0);
    switch (n.op) {
    case Op::constant: return zero;
    case Op::variable: return n.var == index ? one : zero;
    case Op::step: return zero;
    default: break;
    }
    const Expr& a = n.args[0];
    const Expr da = a.diff(index);
    switch (n.op) {
    case Op::neg: return -da;
    case Op::add: return da + n.args[1].diff(index);
    case Op::sub: return da - n.args[1].diff(index);
    case Op::mul: {
        const Expr& b = n.args[1];
        return da * b + a * b.diff(index);
    }
    case Op::div: {
        const Expr& b = n.args[1];
        const Expr db = b.diff(index);
        if (db.is_constant(0.0)) return da / b;
        return (da * b - a * db) / pow(b, Expr::constant(2.0));
    }
    case Op::pow: {
        const Expr& b = n.args[1];
        const Expr db = b.diff(index);
        if (db.is_constant(0.0)) {
            if (da.is_constant(0.0)) return zero;
            if (b.is_constant())
                return Expr::constant(b.node().value) * pow(a, Expr::constant(b.node().value - 1.0)) * da;
            return b * pow(a, b - one) * da;
        }
        // d(a^b) = a^b (b' log a + b a'/a)
        return *this * (db * call(Op::log, a) + b * da / a);
    }
    case Op::sin: return call(Op::cos, a) * da;
    case Op::cos: return -(call(Op::sin, a) * da);
    case Op::exp: return *this * da;
    case Op::log: return da / a;
    case Op::sqrt: return da / (Expr::constant(2.0) * *this);
    case Op::abs: return (Expr::constant(2.0) * call(Op::step, a) - one) * da;
    case Op::min: {
        const Expr& b = n.args[1];
        const Expr s = call(Op::step, b - a);
        return s * da + (one - s) * b.diff(index);
    }
    case Op::max: {
        const Expr& b = n.args[1];
        const Expr s = call(Op::step, a - b);
        return s * da + (one - s) * b.diff(index);
    }
    default: break;
    }
    return zero;
}

namespace detail {

inline int precedence(const ExprNode& n) {
    switch (n.op) {
    case Op::add:
    case Op::sub: return 1;
    case Op::mul:
    case Op::div: return 2;
    case Op::neg: return 3;
    case Op::pow: return 4;
    case Op::constant: return n.value < 0.0 ? 0 : 5;
    default: return 5;
    }
}

inline void print(const Expr& e, std::string& out);

inline void print_operand(const Expr& e, int min_prec, std::string& out) {
    if (precedence(e.node()) < min_prec) {
        out += '(';
        print(e, out);
        out += ')';
    } else {
        print(e, out);
    }
}

inline void print(const Expr& e, std::string& out) {
    const ExprNode& n = e.node();
    switch (n.op) {
    case Op::constant:
        if (n.value < 0.0) {
            // Never produced by the parser; keep it reparseable.
            out += "(-" + format_double(-n.value) + ")";
        } else {
            out += format_double(n.value);
        }
        return;
    case Op::variable:
        out += n.var == 0 ? std::string("t") : "x" + std::to_string(n.var);
        return;
    case Op::neg:
        out += '-';
        print_operand(n.args[0], 3, out);
        return;
    case Op::add:
    case Op::sub:
        print_operand(n.args[0], 1, out);
        out += n.op == Op::add ? " + " : " - ";
        print_operand(n.args[1], 2, out); // left-associative
        return;
    case Op::mul:
    case Op::div:
        print_operand(n.args[0], 2, out);
        out += n.op == Op::mul ? " * " : " / ";
        print_operand(n.args[1], 3, out);
        return;
    case Op::pow:
        print_operand(n.args[0], 5, out); // right-associative
        out += "^";
        print_operand(n.args[1], 3, out);
        return;
    default:
        out += function_name(n.op);
        out += '(';
        for (std::size_t i = 0; i < n.args.size(); ++i) {
            if (i) out += ", ";
            print(n.args[i], out);
        }
        out += ')';
        return;
    }
}

class Parser {
public:
    Parser(std::string_view src, int dim) : src_(src), dim_(dim) {}

    Expr parse() {
        Expr e = expression();
        skip_ws();
        if (pos_ != src_.size()) fail("expected one of {'+', '-', '*', '/', '^', end of input}");
        return e;
    }

private:
    std::string_view src_;
    int dim_;
    std::size_t pos_ = 0;

    [[noreturn]] void fail(const std::string& msg) const { throw SyntaxError(pos_, msg); }

    void skip_ws() {
        while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    }

    bool accept(char c) {
        skip_ws();
        if (pos_ < src_.size() && src_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    Expr expression() {
        Expr lhs = term();
        while (true) {
            if (accept('+')) lhs = raw(Op::add, lhs, term());
            else if (accept('-')) lhs = raw(Op::sub, lhs, term());
            else return lhs;
        }
    }

    Expr term() {
        Expr lhs = unary();
        while (true) {
            if (accept('*')) lhs = raw(Op::mul, lhs, unary());
            else if (accept('/')) lhs = raw(Op::div, lhs, unary());
            else return lhs;
        }
    }

    Expr unary() {
        if (accept('-')) return raw(Op::neg, unary());
        if (accept('+')) return unary();
        return power();
    }

    Expr power() {
        Expr base = primary();
        if (accept('^')) return raw(Op::pow, base, unary());
        return base;
    }

    Expr primary() {
        skip_ws();
        if (pos_ >= src_.size()) fail("unexpected end of input; expected one of {number, variable, function, '(', '-'}");
        const char c = src_[pos_];
        if (c == '(') {
            ++pos_;
            Expr e = expression();
            if (!accept(')')) fail("expected ')'");
            return e;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return identifier();
        fail(std::string("unexpected character '") + c + "'; expected one of {number, variable, function, '('}");
    }

    Expr number() {
        const std::size_t start = pos_;
        while (pos_ < src_.size() && (std::isdigit(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '.')) ++pos_;
        if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
            std::size_t p = pos_ + 1;
            if (p < src_.size() && (src_[p] == '+' || src_[p] == '-')) ++p;
            if (p < src_.size() && std::isdigit(static_cast<unsigned char>(src_[p]))) {
                pos_ = p;
                while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
            }
        }
        const std::string text(src_.substr(start, pos_ - start));
        char* end = nullptr;
        const double v = std::strtod(text.c_str(), &end);
        if (end != text.c_str() + text.size()) {
            pos_ = start;
            fail("malformed number '" + text + "'");
        }
        return Expr::constant(v);
    }

    Expr identifier() {
        const std::size_t start = pos_;
        while (pos_ < src_.size() &&
               (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
            ++pos_;
        const std::string name(src_.substr(start, pos_ - start));
        skip_ws();
        if (pos_ < src_.size() && src_[pos_] == '(') {
            static const std::pair<const char*, Op> table[] = {
                {"sin", Op::sin}, {"cos", Op::cos},   {"exp", Op::exp}, {"log", Op::log},
                {"sqrt", Op::sqrt}, {"abs", Op::abs}, {"min", Op::min}, {"max", Op::max}};
            for (const auto& [fname, op] : table) {
                if (name == fname) {
                    ++pos_;
                    std::vector<Expr> args{expression()};
                    while (accept(',')) args.push_back(expression());
                    if (!accept(')')) fail("expected one of {',', ')'}");
                    const std::size_t arity = (op == Op::min || op == Op::max) ? 2 : 1;
                    if (args.size() != arity) {
                        pos_ = start;
                        fail("function '" + name + "' takes " + std::to_string(arity) + " argument(s)");
                    }
                    return make_node(op, std::move(args));
                }
            }
            pos_ = start;
            fail("unknown function '" + name + "'; expected one of {sin, cos, exp, log, sqrt, abs, min, max}");
        }
        if (name == "t") return Expr::variable(0);
        if (name.size() >= 2 && name[0] == 'x' &&
            name.find_first_not_of("0123456789", 1) == std::string::npos && name[1] != '0') {
            const int idx = std::stoi(name.substr(1));
            if (idx >= 1 && idx <= dim_) return Expr::variable(idx);
        }
        throw UnboundVariable(start, name);
    }
};

} // namespace detail

inline std::string Expr::str() const {
    std::string out;
    detail::print(*this, out);
    return out;
}

inline Expr parse_expr(std::string_view src, int dim) { return detail::Parser(src, dim).parse(); }

inline bool structurally_equal(const Expr& a, const Expr& b) {
    const ExprNode& x = a.node();
    const ExprNode& y = b.node();
    if (x.op != y.op || x.args.size() != y.args.size()) return false;
    if (x.op == Op::constant && x.value != y.value) return false;
    if (x.op == Op::variable && x.var != y.var) return false;
    for (std::size_t i = 0; i < x.args.size(); ++i)
        if (!structurally_equal(x.args[i], y.args[i])) return false;
    return true;
}

} // namespace moser
