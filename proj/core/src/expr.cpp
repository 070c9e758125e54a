#include "monoflow/expr.hpp"

#include <cctype>
#include <cmath>
#include <functional>
#include <numbers>
#include <unordered_map>

namespace monoflow {

struct Expression::Node {
    enum class Op {
        constant, variable,
        add, sub, mul, div, pow_op, neg,
        fn_exp, fn_log, fn_sqrt, fn_abs, fn_sign, fn_sin, fn_cos, fn_tanh,
        fn_min, fn_max
    };
    Op op = Op::constant;
    double value = 0.0;
    int var_index = 0;
    std::shared_ptr<const Node> lhs, rhs;

    double eval(std::span<const double> args) const {
        switch (op) {
            case Op::constant: return value;
            case Op::variable: return args[var_index];
            case Op::add: return lhs->eval(args) + rhs->eval(args);
            case Op::sub: return lhs->eval(args) - rhs->eval(args);
            case Op::mul: return lhs->eval(args) * rhs->eval(args);
            case Op::div: return lhs->eval(args) / rhs->eval(args);
            case Op::pow_op: return std::pow(lhs->eval(args), rhs->eval(args));
            case Op::neg: return -lhs->eval(args);
            case Op::fn_exp: return std::exp(lhs->eval(args));
            case Op::fn_log: return std::log(lhs->eval(args));
            case Op::fn_sqrt: return std::sqrt(lhs->eval(args));
            case Op::fn_abs: return std::abs(lhs->eval(args));
            case Op::fn_sign: {
                const double v = lhs->eval(args);
                return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0);
            }
            case Op::fn_sin: return std::sin(lhs->eval(args));
            case Op::fn_cos: return std::cos(lhs->eval(args));
            case Op::fn_tanh: return std::tanh(lhs->eval(args));
            case Op::fn_min: return std::min(lhs->eval(args), rhs->eval(args));
            case Op::fn_max: return std::max(lhs->eval(args), rhs->eval(args));
        }
        return 0.0;
    }
};

namespace {

using Node = Expression::Node;
using NodePtr = std::shared_ptr<const Node>;

NodePtr make_const(double v) {
    auto n = std::make_shared<Node>();
    n->op = Node::Op::constant;
    n->value = v;
    return n;
}

NodePtr make_unary(Node::Op op, NodePtr a) {
    auto n = std::make_shared<Node>();
    n->op = op;
    n->lhs = std::move(a);
    return n;
}

NodePtr make_binary(Node::Op op, NodePtr a, NodePtr b) {
    auto n = std::make_shared<Node>();
    n->op = op;
    n->lhs = std::move(a);
    n->rhs = std::move(b);
    return n;
}

struct Parser {
    const std::string& text;
    const std::vector<std::string>& variables;
    std::size_t pos = 0;

    [[noreturn]] void fail(const std::string& what) const {
        throw InputError("expression '" + text + "': " + what + " at position " +
                         std::to_string(pos));
    }

    void skip_ws() {
        while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
    }

    bool consume(char c) {
        skip_ws();
        if (pos < text.size() && text[pos] == c) {
            ++pos;
            return true;
        }
        return false;
    }

    NodePtr parse_expr() {
        NodePtr lhs = parse_term();
        while (true) {
            if (consume('+'))
                lhs = make_binary(Node::Op::add, lhs, parse_term());
            else if (consume('-'))
                lhs = make_binary(Node::Op::sub, lhs, parse_term());
            else
                return lhs;
        }
    }

    NodePtr parse_term() {
        NodePtr lhs = parse_factor();
        while (true) {
            if (consume('*'))
                lhs = make_binary(Node::Op::mul, lhs, parse_factor());
            else if (consume('/'))
                lhs = make_binary(Node::Op::div, lhs, parse_factor());
            else
                return lhs;
        }
    }

    NodePtr parse_factor() {
        // unary minus binds below '^': -u^2 reads as -(u^2)
        if (consume('-')) return make_unary(Node::Op::neg, parse_factor());
        if (consume('+')) return parse_factor();
        NodePtr base = parse_primary();
        if (consume('^')) // right associative
            return make_binary(Node::Op::pow_op, base, parse_factor());
        return base;
    }

    NodePtr parse_primary() {
        skip_ws();
        if (pos >= text.size()) fail("unexpected end of input");
        const char c = text[pos];
        if (c == '(') {
            ++pos;
            NodePtr inner = parse_expr();
            if (!consume(')')) fail("missing ')'");
            return inner;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return parse_identifier();
        fail("unexpected character");
    }

    NodePtr parse_number() {
        std::size_t end = pos;
        bool seen_exp = false;
        while (end < text.size()) {
            const char c = text[end];
            if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
                ++end;
            } else if ((c == 'e' || c == 'E') && !seen_exp) {
                seen_exp = true;
                ++end;
                if (end < text.size() && (text[end] == '+' || text[end] == '-')) ++end;
            } else {
                break;
            }
        }
        const std::string token = text.substr(pos, end - pos);
        try {
            const double v = std::stod(token);
            pos = end;
            return make_const(v);
        } catch (const std::exception&) {
            fail("malformed number '" + token + "'");
        }
    }

    NodePtr parse_identifier() {
        std::size_t end = pos;
        while (end < text.size() &&
               (std::isalnum(static_cast<unsigned char>(text[end])) || text[end] == '_'))
            ++end;
        const std::string name = text.substr(pos, end - pos);
        pos = end;

        skip_ws();
        const bool is_call = pos < text.size() && text[pos] == '(';
        if (is_call) {
            static const std::unordered_map<std::string, std::pair<Node::Op, int>> functions = {
                {"exp", {Node::Op::fn_exp, 1}},   {"log", {Node::Op::fn_log, 1}},
                {"sqrt", {Node::Op::fn_sqrt, 1}}, {"abs", {Node::Op::fn_abs, 1}},
                {"sign", {Node::Op::fn_sign, 1}}, {"sin", {Node::Op::fn_sin, 1}},
                {"cos", {Node::Op::fn_cos, 1}},   {"tanh", {Node::Op::fn_tanh, 1}},
                {"min", {Node::Op::fn_min, 2}},   {"max", {Node::Op::fn_max, 2}},
                {"pow", {Node::Op::pow_op, 2}},
            };
            const auto it = functions.find(name);
            if (it == functions.end()) fail("unknown function '" + name + "'");
            if (!consume('(')) fail("expected '('");
            NodePtr first = parse_expr();
            if (it->second.second == 1) {
                if (!consume(')')) fail("missing ')'");
                return make_unary(it->second.first, first);
            }
            if (!consume(',')) fail("expected ',' in two-argument function");
            NodePtr second = parse_expr();
            if (!consume(')')) fail("missing ')'");
            return make_binary(it->second.first, first, second);
        }

        if (name == "pi") return make_const(std::numbers::pi);
        if (name == "e") return make_const(std::numbers::e);
        for (std::size_t i = 0; i < variables.size(); ++i) {
            if (variables[i] == name) {
                auto n = std::make_shared<Node>();
                n->op = Node::Op::variable;
                n->var_index = static_cast<int>(i);
                return n;
            }
        }
        fail("unknown identifier '" + name + "'");
    }
};

} // namespace

Expression Expression::parse(const std::string& text, const std::vector<std::string>& variables) {
    Parser parser{text, variables};
    Expression e;
    e.text_ = text;
    e.root_ = parser.parse_expr();
    parser.skip_ws();
    if (parser.pos != text.size()) parser.fail("trailing input");
    return e;
}

double Expression::eval(std::span<const double> args) const { return root_->eval(args); }

namespace {

std::vector<std::string> field_variables(int dim) {
    std::vector<std::string> vars;
    for (int i = 1; i <= dim; ++i) vars.push_back("x" + std::to_string(i));
    vars.push_back("r");
    vars.push_back("r2");
    return vars;
}

CoefficientField::FieldFn compile_components(int dim, const std::vector<std::string>& exprs) {
    require(static_cast<int>(exprs.size()) == dim,
            "field expression: expected one component expression per dimension");
    std::vector<Expression> compiled;
    compiled.reserve(dim);
    const std::vector<std::string> vars = field_variables(dim);
    for (const std::string& e : exprs) compiled.push_back(Expression::parse(e, vars));
    return [dim, compiled](const Vec& x, Vec& out) {
        std::vector<double> args(dim + 2);
        for (int i = 0; i < dim; ++i) args[i] = x[i];
        args[dim + 1] = norm2(x);
        args[dim] = std::sqrt(args[dim + 1]);
        for (int i = 0; i < dim; ++i) out[i] = compiled[i].eval(args);
    };
}

} // namespace

CoefficientField field_from_expressions(int dim, const std::vector<std::string>& drift_exprs,
                                        const std::vector<std::vector<std::string>>& sigma_exprs,
                                        const std::string& label) {
    require(dim >= 1, "field expression: dimension must be >= 1");
    CoefficientField::FieldFn drift = compile_components(dim, drift_exprs);
    std::vector<CoefficientField::FieldFn> diffusion;
    diffusion.reserve(sigma_exprs.size());
    for (const auto& component_exprs : sigma_exprs)
        diffusion.push_back(compile_components(dim, component_exprs));
    return CoefficientField(dim, std::move(drift), std::move(diffusion), label);
}

ScalarFn scalar_fn_from_expression(const std::string& text) {
    const Expression compiled = Expression::parse(text, {"u"});
    return [compiled](double u) {
        const double args[1] = {u};
        return compiled.eval(std::span<const double>(args, 1));
    };
}

} // namespace monoflow
