#include "sldp/expression.hpp"

#include "sldp/errors.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <numbers>
#include <optional>

namespace sldp {

namespace {

enum class TokenKind { number, identifier, symbol, end };

struct Token {
    TokenKind kind;
    std::string text;
    double number = 0.0;
    std::size_t position = 0;
};

std::vector<Token> tokenize(std::string_view text) {
    std::vector<Token> tokens;
    std::size_t i = 0;
    while (i < text.size()) {
        const char c = text[i];
        if (std::isspace(static_cast<unsigned char>(c))) {
            ++i;
            continue;
        }
        const std::size_t start = i;
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            while (i < text.size() && (std::isdigit(static_cast<unsigned char>(text[i])) || text[i] == '.')) ++i;
            if (i < text.size() && (text[i] == 'e' || text[i] == 'E')) {
                std::size_t j = i + 1;
                if (j < text.size() && (text[j] == '+' || text[j] == '-')) ++j;
                if (j < text.size() && std::isdigit(static_cast<unsigned char>(text[j]))) {
                    i = j;
                    while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i]))) ++i;
                }
            }
            std::string literal(text.substr(start, i - start));
            char* end = nullptr;
            const double value = std::strtod(literal.c_str(), &end);
            if (end != literal.c_str() + literal.size()) {
                throw ParseError("malformed number", start, literal);
            }
            tokens.push_back({TokenKind::number, literal, value, start});
        } else if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            while (i < text.size() && (std::isalnum(static_cast<unsigned char>(text[i])) || text[i] == '_')) ++i;
            tokens.push_back({TokenKind::identifier, std::string(text.substr(start, i - start)), 0.0, start});
        } else if (std::string_view("+-*/^(),").find(c) != std::string_view::npos) {
            ++i;
            tokens.push_back({TokenKind::symbol, std::string(1, c), 0.0, start});
        } else {
            throw ParseError("unexpected character", start, std::string(1, c));
        }
    }
    tokens.push_back({TokenKind::end, "<end>", 0.0, text.size()});
    return tokens;
}

struct FunctionInfo {
    const char* name;
    int arity;
};

}  // namespace

class Expression::Parser {
public:
    Parser(Expression& expr, std::string_view text)
        : expr_(expr), tokens_(tokenize(text)) {}

    int parse_all() {
        const int root = parse_sum();
        if (peek().kind != TokenKind::end) {
            throw ParseError("unexpected token", peek().position, peek().text);
        }
        return root;
    }

private:
    const Token& peek() const { return tokens_[pos_]; }
    const Token& take() { return tokens_[pos_++]; }

    bool accept(char symbol) {
        if (peek().kind == TokenKind::symbol && peek().text[0] == symbol) {
            ++pos_;
            return true;
        }
        return false;
    }

    void expect(char symbol) {
        if (!accept(symbol)) {
            throw ParseError(std::string("expected '") + symbol + "'", peek().position, peek().text);
        }
    }

    int add(Node node) {
        expr_.nodes_.push_back(node);
        return static_cast<int>(expr_.nodes_.size()) - 1;
    }

    int parse_sum() {
        int lhs = parse_product();
        for (;;) {
            if (accept('+')) {
                lhs = add({Op::add, 0.0, -1, lhs, parse_product()});
            } else if (accept('-')) {
                lhs = add({Op::subtract, 0.0, -1, lhs, parse_product()});
            } else {
                return lhs;
            }
        }
    }

    int parse_product() {
        int lhs = parse_unary();
        for (;;) {
            if (accept('*')) {
                lhs = add({Op::multiply, 0.0, -1, lhs, parse_unary()});
            } else if (accept('/')) {
                lhs = add({Op::divide, 0.0, -1, lhs, parse_unary()});
            } else {
                return lhs;
            }
        }
    }

    int parse_unary() {
        if (accept('-')) return add({Op::negate, 0.0, -1, parse_unary(), -1});
        if (accept('+')) return parse_unary();
        return parse_power();
    }

    int parse_power() {
        const int base = parse_primary();
        if (accept('^')) return add({Op::power, 0.0, -1, base, parse_unary()});
        return base;
    }

    int parse_primary() {
        const Token& tok = take();
        switch (tok.kind) {
        case TokenKind::number:
            return add({Op::constant, tok.number});
        case TokenKind::identifier:
            return parse_identifier(tok);
        case TokenKind::symbol:
            if (tok.text[0] == '(') {
                const int inner = parse_sum();
                expect(')');
                return inner;
            }
            throw ParseError("unexpected token", tok.position, tok.text);
        case TokenKind::end:
            break;
        }
        throw ParseError("unexpected end of expression", tok.position, tok.text);
    }

    int parse_identifier(const Token& tok) {
        static constexpr std::pair<FunctionInfo, Op> kFunctions[] = {
            {{"sin", 1}, Op::sin},   {{"cos", 1}, Op::cos},   {{"tanh", 1}, Op::tanh},
            {{"exp", 1}, Op::exp},   {{"log", 1}, Op::log},   {{"sqrt", 1}, Op::sqrt},
            {{"abs", 1}, Op::abs},   {{"min", 2}, Op::min},   {{"max", 2}, Op::max},
        };
        for (const auto& [info, op] : kFunctions) {
            if (tok.text != info.name) continue;
            if (!accept('(')) {
                throw ParseError("function requires an argument list", peek().position, peek().text);
            }
            std::vector<int> args;
            if (!accept(')')) {
                args.push_back(parse_sum());
                while (accept(',')) args.push_back(parse_sum());
                expect(')');
            }
            if (static_cast<int>(args.size()) != info.arity) {
                throw ParseError("function '" + tok.text + "' expects " + std::to_string(info.arity) +
                                     " argument(s), got " + std::to_string(args.size()),
                                 tok.position, tok.text);
            }
            return add({op, 0.0, -1, args[0], info.arity == 2 ? args[1] : -1});
        }
        if (tok.text == "pi") return add({Op::constant, std::numbers::pi});
        for (std::size_t v = 0; v < expr_.variables_.size(); ++v) {
            if (expr_.variables_[v] == tok.text) return add({Op::variable, 0.0, static_cast<int>(v)});
        }
        throw ParseError("unknown identifier", tok.position, tok.text);
    }

    Expression& expr_;
    std::vector<Token> tokens_;
    std::size_t pos_ = 0;
};

Expression Expression::parse(std::string_view text, const std::vector<std::string>& variables) {
    Expression expr;
    expr.variables_ = variables;
    Parser parser(expr, text);
    expr.root_ = parser.parse_all();
    return expr;
}

double Expression::evaluate(std::span<const double> variables) const {
    if (variables.size() < variables_.size()) {
        throw EvaluationError("expression needs " + std::to_string(variables_.size()) + " variables");
    }
    return eval_node(root_, variables);
}

double Expression::eval_node(int index, std::span<const double> vars) const {
    const Node& n = nodes_[static_cast<std::size_t>(index)];
    auto arg = [&](int child) { return eval_node(child, vars); };
    double r = 0.0;
    switch (n.op) {
    case Op::constant: return n.value;
    case Op::variable: return vars[static_cast<std::size_t>(n.index)];
    case Op::negate: return -arg(n.lhs);
    case Op::add: r = arg(n.lhs) + arg(n.rhs); break;
    case Op::subtract: r = arg(n.lhs) - arg(n.rhs); break;
    case Op::multiply: r = arg(n.lhs) * arg(n.rhs); break;
    case Op::divide: {
        const double den = arg(n.rhs);
        if (den == 0.0) throw EvaluationError("division by zero");
        r = arg(n.lhs) / den;
        break;
    }
    case Op::power: r = std::pow(arg(n.lhs), arg(n.rhs)); break;
    case Op::sin: r = std::sin(arg(n.lhs)); break;
    case Op::cos: r = std::cos(arg(n.lhs)); break;
    case Op::tanh: r = std::tanh(arg(n.lhs)); break;
    case Op::exp: r = std::exp(arg(n.lhs)); break;
    case Op::log: {
        const double x = arg(n.lhs);
        if (!(x > 0.0)) throw EvaluationError("log of nonpositive argument " + std::to_string(x));
        r = std::log(x);
        break;
    }
    case Op::sqrt: {
        const double x = arg(n.lhs);
        if (x < 0.0) throw EvaluationError("sqrt of negative argument " + std::to_string(x));
        r = std::sqrt(x);
        break;
    }
    case Op::abs: r = std::abs(arg(n.lhs)); break;
    case Op::min: r = std::min(arg(n.lhs), arg(n.rhs)); break;
    case Op::max: r = std::max(arg(n.lhs), arg(n.rhs)); break;
    }
    if (!std::isfinite(r)) throw EvaluationError("non-finite intermediate value");
    return r;
}

std::string Expression::print() const {
    std::string out;
    print_node(root_, out);
    return out;
}

void Expression::print_node(int index, std::string& out) const {
    const Node& n = nodes_[static_cast<std::size_t>(index)];
    auto binary = [&](const char* symbol) {
        out += '(';
        print_node(n.lhs, out);
        out += symbol;
        print_node(n.rhs, out);
        out += ')';
    };
    auto call = [&](const char* name) {
        out += name;
        out += '(';
        print_node(n.lhs, out);
        if (n.rhs >= 0) {
            out += ',';
            print_node(n.rhs, out);
        }
        out += ')';
    };
    switch (n.op) {
    case Op::constant: {
        char buf[40];
        std::snprintf(buf, sizeof buf, "%.17g", std::abs(n.value));
        if (std::signbit(n.value)) {
            out += "(-";
            out += buf;
            out += ')';
        } else {
            out += buf;
        }
        return;
    }
    case Op::variable: out += variables_[static_cast<std::size_t>(n.index)]; return;
    case Op::negate:
        out += "(-";
        print_node(n.lhs, out);
        out += ')';
        return;
    case Op::add: binary("+"); return;
    case Op::subtract: binary("-"); return;
    case Op::multiply: binary("*"); return;
    case Op::divide: binary("/"); return;
    case Op::power: binary("^"); return;
    case Op::sin: call("sin"); return;
    case Op::cos: call("cos"); return;
    case Op::tanh: call("tanh"); return;
    case Op::exp: call("exp"); return;
    case Op::log: call("log"); return;
    case Op::sqrt: call("sqrt"); return;
    case Op::abs: call("abs"); return;
    case Op::min: call("min"); return;
    case Op::max: call("max"); return;
    }
}

}  // namespace sldp
