#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace morseflow {

// Value + gradient of a scalar field at an ambient point.
struct Jet1 {
    double v = 0.0;
    Eigen::Vector3d g = Eigen::Vector3d::Zero();
};

// Value + gradient + symmetric Hessian.
struct Jet2 {
    double v = 0.0;
    Eigen::Vector3d g = Eigen::Vector3d::Zero();
    Eigen::Matrix3d h = Eigen::Matrix3d::Zero();
};

// Scalar expression over ambient coordinates x, y, z.
// Grammar: + - * / ^(nonnegative integer) unary -, functions sin cos exp sqrt.
// Precedence: ^ binds tighter than unary -, which binds tighter than * /,
// which bind tighter than + -.
//
// Nodes are stored in evaluation order (children always precede parents),
// so both jet evaluations are single linear passes.
class Expression {
public:
    enum class Op : std::uint8_t { Const, Var, Add, Sub, Mul, Div, Neg, Pow, Sin, Cos, Exp, Sqrt };

    struct Node {
        Op op;
        int a = -1;          // left / only child
        int b = -1;          // right child
        int ipow = 0;        // Pow exponent
        int var = 0;         // Var axis (0,1,2)
        double value = 0.0;  // Const payload
    };

    static Expression parse(const std::string& text);

    // Algebraic constructors used by the catalog and tests.
    static Expression constant(double c);
    static Expression variable(int axis);
    static Expression add(const Expression& a, const Expression& b);
    static Expression scale(double c, const Expression& a);

    std::string to_string() const;

    double value(const Eigen::Vector3d& q) const;
    Jet1 jet1(const Eigen::Vector3d& q) const;
    Jet2 jet2(const Eigen::Vector3d& q) const;

    std::size_t node_count() const { return nodes_.size(); }
    const std::string& source() const { return source_; }

private:
    std::vector<Node> nodes_;
    int root_ = -1;
    std::string source_;

    friend class ExprParser;
    friend class ExprBuilder;
    std::string print_node(int idx, int parent_prec) const;
};

}  // namespace morseflow
