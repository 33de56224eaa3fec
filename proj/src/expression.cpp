#include "morseflow/expression.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <type_traits>

#include "morseflow/errors.hpp"

namespace morseflow {

namespace {

using Vector3d = Eigen::Vector3d;
using Matrix3d = Eigen::Matrix3d;

// ---------------------------------------------------------------------------
// Jet arithmetic. Jet1 carries (v, ∇v); Jet2 additionally the Hessian.
// Chain rule for a unary φ: g ↦ φ'(u) g_u, h ↦ φ'(u) h_u + φ''(u) g_u g_uᵀ.

inline Jet1 j_const1(double c) { return {c, Vector3d::Zero()}; }
inline Jet2 j_const2(double c) { return {c, Vector3d::Zero(), Matrix3d::Zero()}; }

inline Jet1 j_var1(int axis, const Vector3d& q) {
    Jet1 j{q[axis], Vector3d::Zero()};
    j.g[axis] = 1.0;
    return j;
}

inline Jet2 j_var2(int axis, const Vector3d& q) {
    Jet2 j{q[axis], Vector3d::Zero(), Matrix3d::Zero()};
    j.g[axis] = 1.0;
    return j;
}

inline Jet1 operator+(const Jet1& a, const Jet1& b) { return {a.v + b.v, a.g + b.g}; }
inline Jet2 operator+(const Jet2& a, const Jet2& b) { return {a.v + b.v, a.g + b.g, a.h + b.h}; }
inline Jet1 operator-(const Jet1& a, const Jet1& b) { return {a.v - b.v, a.g - b.g}; }
inline Jet2 operator-(const Jet2& a, const Jet2& b) { return {a.v - b.v, a.g - b.g, a.h - b.h}; }
inline Jet1 operator-(const Jet1& a) { return {-a.v, -a.g}; }
inline Jet2 operator-(const Jet2& a) { return {-a.v, -a.g, -a.h}; }

inline Jet1 operator*(const Jet1& a, const Jet1& b) { return {a.v * b.v, a.g * b.v + b.g * a.v}; }
inline Jet2 operator*(const Jet2& a, const Jet2& b) {
    Jet2 r;
    r.v = a.v * b.v;
    r.g = a.g * b.v + b.g * a.v;
    r.h = a.h * b.v + b.h * a.v + a.g * b.g.transpose() + b.g * a.g.transpose();
    return r;
}

inline Jet1 operator/(const Jet1& a, const Jet1& b) {
    if (b.v == 0.0) raise(ErrorCode::DomainError, "division by zero");
    Jet1 r;
    r.v = a.v / b.v;
    r.g = (a.g - r.v * b.g) / b.v;
    return r;
}

inline Jet2 operator/(const Jet2& a, const Jet2& b) {
    if (b.v == 0.0) raise(ErrorCode::DomainError, "division by zero");
    Jet2 r;
    r.v = a.v / b.v;
    r.g = (a.g - r.v * b.g) / b.v;
    r.h = (a.h - r.v * b.h - r.g * b.g.transpose() - b.g * r.g.transpose()) / b.v;
    return r;
}

template <class J>
inline J chain(const J& u, double f, double df);
template <>
inline Jet1 chain(const Jet1& u, double f, double df) {
    return {f, df * u.g};
}

inline Jet2 chain2(const Jet2& u, double f, double df, double ddf) {
    Jet2 r;
    r.v = f;
    r.g = df * u.g;
    r.h = df * u.h + ddf * u.g * u.g.transpose();
    return r;
}

inline Jet1 j_sin(const Jet1& u) { return chain<Jet1>(u, std::sin(u.v), std::cos(u.v)); }
inline Jet2 j_sin(const Jet2& u) { return chain2(u, std::sin(u.v), std::cos(u.v), -std::sin(u.v)); }
inline Jet1 j_cos(const Jet1& u) { return chain<Jet1>(u, std::cos(u.v), -std::sin(u.v)); }
inline Jet2 j_cos(const Jet2& u) { return chain2(u, std::cos(u.v), -std::sin(u.v), -std::cos(u.v)); }
inline Jet1 j_exp(const Jet1& u) {
    double e = std::exp(u.v);
    return chain<Jet1>(u, e, e);
}
inline Jet2 j_exp(const Jet2& u) {
    double e = std::exp(u.v);
    return chain2(u, e, e, e);
}

inline Jet1 j_sqrt(const Jet1& u) {
    if (u.v < 0.0) raise(ErrorCode::DomainError, "sqrt of negative value");
    double s = std::sqrt(u.v);
    return chain<Jet1>(u, s, 0.5 / s);
}
inline Jet2 j_sqrt(const Jet2& u) {
    if (u.v < 0.0) raise(ErrorCode::DomainError, "sqrt of negative value");
    double s = std::sqrt(u.v);
    return chain2(u, s, 0.5 / s, -0.25 / (s * u.v));
}

inline Jet1 j_pow(const Jet1& u, int n) {
    if (n == 0) return j_const1(1.0);
    double f = std::pow(u.v, n);
    double df = n * std::pow(u.v, n - 1);
    return chain<Jet1>(u, f, df);
}
inline Jet2 j_pow(const Jet2& u, int n) {
    if (n == 0) return j_const2(1.0);
    double f = std::pow(u.v, n);
    double df = n * std::pow(u.v, n - 1);
    double ddf = (n <= 1) ? 0.0 : double(n) * (n - 1) * std::pow(u.v, n - 2);
    return chain2(u, f, df, ddf);
}

}  // namespace

// ---------------------------------------------------------------------------
// Parser. Recursive descent over a token stream; byte offsets in messages.

class ExprParser {
public:
    explicit ExprParser(const std::string& text) : text_(text) {}

    Expression run() {
        if (text_.empty()) raise(ErrorCode::SyntaxError, "empty expression");
        Expression e;
        e.source_ = text_;
        nodes_ = &e.nodes_;
        pos_ = 0;
        e.root_ = parse_sum();
        skip_ws();
        if (pos_ != text_.size())
            raise(ErrorCode::SyntaxError,
                  "unexpected input at offset " + std::to_string(pos_));
        return e;
    }

private:
    const std::string& text_;
    std::size_t pos_ = 0;
    std::vector<Expression::Node>* nodes_ = nullptr;

    int emit(Expression::Node n) {
        nodes_->push_back(n);
        return static_cast<int>(nodes_->size()) - 1;
    }

    void skip_ws() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }

    bool eat(char c) {
        skip_ws();
        if (pos_ < text_.size() && text_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    char peek() {
        skip_ws();
        return pos_ < text_.size() ? text_[pos_] : '\0';
    }

    int parse_sum() {
        int lhs = parse_term();
        for (;;) {
            if (eat('+')) {
                int rhs = parse_term();
                lhs = emit({Expression::Op::Add, lhs, rhs});
            } else if (eat('-')) {
                int rhs = parse_term();
                lhs = emit({Expression::Op::Sub, lhs, rhs});
            } else {
                return lhs;
            }
        }
    }

    int parse_term() {
        int lhs = parse_unary();
        for (;;) {
            if (eat('*')) {
                int rhs = parse_unary();
                lhs = emit({Expression::Op::Mul, lhs, rhs});
            } else if (eat('/')) {
                int rhs = parse_unary();
                lhs = emit({Expression::Op::Div, lhs, rhs});
            } else {
                return lhs;
            }
        }
    }

    int parse_unary() {
        if (eat('-')) {
            int child = parse_unary();
            return emit({Expression::Op::Neg, child});
        }
        return parse_power();
    }

    int parse_power() {
        int base = parse_atom();
        while (eat('^')) {
            skip_ws();
            std::size_t start = pos_;
            while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
            if (pos_ == start)
                raise(ErrorCode::SyntaxError,
                      "expected nonnegative integer exponent at offset " + std::to_string(start));
            int n = std::atoi(text_.substr(start, pos_ - start).c_str());
            Expression::Node node{Expression::Op::Pow, base};
            node.ipow = n;
            base = emit(node);
        }
        return base;
    }

    int parse_atom() {
        skip_ws();
        if (pos_ >= text_.size())
            raise(ErrorCode::SyntaxError, "unexpected end of input at offset " + std::to_string(pos_));
        char c = text_[pos_];
        if (c == '(') {
            ++pos_;
            int inner = parse_sum();
            if (!eat(')'))
                raise(ErrorCode::SyntaxError, "expected ')' at offset " + std::to_string(pos_));
            return inner;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
        if (std::isalpha(static_cast<unsigned char>(c))) return parse_ident();
        raise(ErrorCode::SyntaxError,
              std::string("unexpected character '") + c + "' at offset " + std::to_string(pos_));
    }

    int parse_number() {
        const char* begin = text_.c_str() + pos_;
        char* end = nullptr;
        double v = std::strtod(begin, &end);
        if (end == begin)
            raise(ErrorCode::SyntaxError, "malformed number at offset " + std::to_string(pos_));
        pos_ += static_cast<std::size_t>(end - begin);
        Expression::Node node{Expression::Op::Const};
        node.value = v;
        return emit(node);
    }

    int parse_ident() {
        std::size_t start = pos_;
        while (pos_ < text_.size() &&
               (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
            ++pos_;
        std::string name = text_.substr(start, pos_ - start);
        if (name == "x" || name == "y" || name == "z") {
            Expression::Node node{Expression::Op::Var};
            node.var = name[0] - 'x';
            return emit(node);
        }
        Expression::Op fn;
        if (name == "sin")
            fn = Expression::Op::Sin;
        else if (name == "cos")
            fn = Expression::Op::Cos;
        else if (name == "exp")
            fn = Expression::Op::Exp;
        else if (name == "sqrt")
            fn = Expression::Op::Sqrt;
        else
            raise(ErrorCode::UnknownIdentifier,
                  "'" + name + "' at offset " + std::to_string(start));
        if (!eat('('))
            raise(ErrorCode::SyntaxError,
                  "expected '(' after '" + name + "' at offset " + std::to_string(pos_));
        int arg = parse_sum();
        if (!eat(')'))
            raise(ErrorCode::SyntaxError, "expected ')' at offset " + std::to_string(pos_));
        return emit({fn, arg});
    }
};

Expression Expression::parse(const std::string& text) { return ExprParser(text).run(); }

// ---------------------------------------------------------------------------
// Builders used by the surface catalog.

class ExprBuilder {
public:
    using Node = Expression::Node;
    using Op = Expression::Op;

    static Expression make_const(double c) {
        Expression e;
        Node n{Op::Const};
        n.value = c;
        e.nodes_.push_back(n);
        e.root_ = 0;
        e.source_ = e.to_string();
        return e;
    }

    static Expression make_var(int axis) {
        Expression e;
        Node n{Op::Var};
        n.var = axis;
        e.nodes_.push_back(n);
        e.root_ = 0;
        e.source_ = e.to_string();
        return e;
    }

    static Expression combine(Op op, const Expression& a, const Expression& b) {
        Expression e;
        e.nodes_ = a.nodes_;
        int offset = static_cast<int>(e.nodes_.size());
        for (Node n : b.nodes_) {
            if (n.a >= 0) n.a += offset;
            if (n.b >= 0) n.b += offset;
            e.nodes_.push_back(n);
        }
        e.nodes_.push_back({op, a.root_, b.root_ + offset});
        e.root_ = static_cast<int>(e.nodes_.size()) - 1;
        e.source_ = e.to_string();
        return e;
    }
};

Expression Expression::constant(double c) { return ExprBuilder::make_const(c); }
Expression Expression::variable(int axis) { return ExprBuilder::make_var(axis); }
Expression Expression::add(const Expression& a, const Expression& b) {
    return ExprBuilder::combine(Op::Add, a, b);
}
Expression Expression::scale(double c, const Expression& a) {
    return ExprBuilder::combine(Op::Mul, constant(c), a);
}

// ---------------------------------------------------------------------------
// Evaluation: nodes are already in dependency order.

namespace {

template <class J>
J eval_nodes(const std::vector<Expression::Node>& nodes, int root, const Vector3d& q) {
    thread_local std::vector<J> vals;
    vals.resize(nodes.size());
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        const auto& n = nodes[i];
        switch (n.op) {
            case Expression::Op::Const:
                if constexpr (std::is_same_v<J, Jet1>)
                    vals[i] = j_const1(n.value);
                else
                    vals[i] = j_const2(n.value);
                break;
            case Expression::Op::Var:
                if constexpr (std::is_same_v<J, Jet1>)
                    vals[i] = j_var1(n.var, q);
                else
                    vals[i] = j_var2(n.var, q);
                break;
            case Expression::Op::Add: vals[i] = vals[n.a] + vals[n.b]; break;
            case Expression::Op::Sub: vals[i] = vals[n.a] - vals[n.b]; break;
            case Expression::Op::Mul: vals[i] = vals[n.a] * vals[n.b]; break;
            case Expression::Op::Div: vals[i] = vals[n.a] / vals[n.b]; break;
            case Expression::Op::Neg: vals[i] = -vals[n.a]; break;
            case Expression::Op::Pow: vals[i] = j_pow(vals[n.a], n.ipow); break;
            case Expression::Op::Sin: vals[i] = j_sin(vals[n.a]); break;
            case Expression::Op::Cos: vals[i] = j_cos(vals[n.a]); break;
            case Expression::Op::Exp: vals[i] = j_exp(vals[n.a]); break;
            case Expression::Op::Sqrt: vals[i] = j_sqrt(vals[n.a]); break;
        }
    }
    return vals[root];
}

}  // namespace

double Expression::value(const Vector3d& q) const {
    return eval_nodes<Jet1>(nodes_, root_, q).v;
}

Jet1 Expression::jet1(const Vector3d& q) const { return eval_nodes<Jet1>(nodes_, root_, q); }

Jet2 Expression::jet2(const Vector3d& q) const { return eval_nodes<Jet2>(nodes_, root_, q); }

// ---------------------------------------------------------------------------
// Printing with minimal parentheses; print∘parse is semantically identity.

namespace {
int op_prec(Expression::Op op) {
    switch (op) {
        case Expression::Op::Add:
        case Expression::Op::Sub: return 1;
        case Expression::Op::Mul:
        case Expression::Op::Div: return 2;
        case Expression::Op::Neg: return 3;
        case Expression::Op::Pow: return 4;
        default: return 5;
    }
}
}  // namespace

std::string Expression::print_node(int idx, int parent_prec) const {
    const Node& n = nodes_[idx];
    int prec = op_prec(n.op);
    std::string s;
    switch (n.op) {
        case Op::Const: {
            char buf[40];
            std::snprintf(buf, sizeof(buf), "%.17g", n.value);
            s = buf;
            if (n.value < 0) prec = 3;
            break;
        }
        case Op::Var: s = std::string(1, char('x' + n.var)); break;
        case Op::Add: s = print_node(n.a, 1) + " + " + print_node(n.b, 2); break;
        case Op::Sub: s = print_node(n.a, 1) + " - " + print_node(n.b, 2); break;
        case Op::Mul: s = print_node(n.a, 2) + "*" + print_node(n.b, 3); break;
        case Op::Div: s = print_node(n.a, 2) + "/" + print_node(n.b, 3); break;
        case Op::Neg: s = "-" + print_node(n.a, 3); break;
        case Op::Pow: s = print_node(n.a, 5) + "^" + std::to_string(n.ipow); break;
        case Op::Sin: s = "sin(" + print_node(n.a, 0) + ")"; break;
        case Op::Cos: s = "cos(" + print_node(n.a, 0) + ")"; break;
        case Op::Exp: s = "exp(" + print_node(n.a, 0) + ")"; break;
        case Op::Sqrt: s = "sqrt(" + print_node(n.a, 0) + ")"; break;
    }
    if (prec < parent_prec) return "(" + s + ")";
    return s;
}

std::string Expression::to_string() const { return print_node(root_, 0); }

}  // namespace morseflow
