#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace sldp {

/// Scalar arithmetic expression over named variables.
///
/// Grammar: + - * / ^ (right associative, binds tighter than unary minus),
/// parentheses, numeric literals, the constant `pi`, and the functions
/// sin cos tanh exp log sqrt abs (one argument) and min max (two arguments).
/// Evaluation is strict: log of a nonpositive number, sqrt of a negative
/// number, division by zero and any non-finite intermediate raise
/// EvaluationError.
class Expression {
public:
    static Expression parse(std::string_view text, const std::vector<std::string>& variables);

    double evaluate(std::span<const double> variables) const;

    /// Fully parenthesized text that parses back to the same tree.
    std::string print() const;

    std::size_t variable_count() const noexcept { return variables_.size(); }

private:
    enum class Op : std::uint8_t {
        constant, variable, negate, add, subtract, multiply, divide, power,
        sin, cos, tanh, exp, log, sqrt, abs, min, max,
    };

    struct Node {
        Op op;
        double value = 0.0;
        int index = -1;  // variable slot
        int lhs = -1;
        int rhs = -1;
    };

    class Parser;

    double eval_node(int node, std::span<const double> vars) const;
    void print_node(int node, std::string& out) const;

    std::vector<Node> nodes_;
    std::vector<std::string> variables_;
    int root_ = -1;
};

}  // namespace sldp
