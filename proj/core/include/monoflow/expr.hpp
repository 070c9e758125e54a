#pragma once

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "monoflow/assumptions.hpp"
#include "monoflow/field.hpp"

namespace monoflow {

/// Compiled closed-form scalar expression over named variables.
///
/// Grammar: +, -, *, /, ^ (right associative), parentheses, decimal and
/// scientific literals, constants pi and e, and the functions
/// exp, log, sqrt, abs, sign, sin, cos, tanh, min(a,b), max(a,b), pow(a,b).
/// Field expressions see the components x1..xd plus r = |x| and r2 = |x|^2.
class Expression {
public:
    static Expression parse(const std::string& text, const std::vector<std::string>& variables);

    double eval(std::span<const double> args) const;
    const std::string& text() const { return text_; }

    struct Node;

private:
    std::string text_;
    std::shared_ptr<const Node> root_;
};

/// Field whose drift and diffusion components are given as expressions in
/// x1..xd (and r, r2). sigma_exprs[k] lists the d components of sigma_k.
CoefficientField field_from_expressions(int dim, const std::vector<std::string>& drift_exprs,
                                        const std::vector<std::vector<std::string>>& sigma_exprs,
                                        const std::string& label);

/// One-variable scalar function (rho(u), f(u)) from an expression in `u`.
ScalarFn scalar_fn_from_expression(const std::string& text);

} // namespace monoflow
