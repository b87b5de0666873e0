#pragma once

// Small arithmetic expression language used for user-defined coefficients
// and nonlinearities:
//
//   expression := term (('+'|'-') term)*
//   term       := factor (('*'|'/') factor)*
//   factor     := ('-')? atom ('^' factor)?
//   atom       := number | identifier | identifier '(' args ')' | '(' expression ')'
//
// Variables are `t` and `u1` ... `u8`; radial coefficients may additionally
// be parsed with the variable `r`. The only named constant is `pi`.

#include "conebvp/error.hpp"

#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <system_error>
#include <utility>
#include <vector>

namespace conebvp {

inline constexpr int kMaxComponents = 8;

namespace expr {

enum class NodeKind : std::uint8_t { Constant, Variable, Negate, Binary, Call };

enum class BinaryOp : std::uint8_t { Add, Sub, Mul, Div, Pow };

enum class Function : std::uint8_t { Abs, Min, Max, Exp, Log, Sqrt, Pow, Sin, Cos };

/// Variable slot: `t`, `r`, or `u<k>` with k in 1..8.
struct Variable {
    enum class Kind : std::uint8_t { T, R, U } kind = Kind::T;
    int index = 0;  // 1-based component for Kind::U

    friend bool operator==(const Variable&, const Variable&) = default;
};

struct SourceSpan {
    std::size_t begin = 0;
    std::size_t end = 0;
};

struct Node {
    NodeKind kind = NodeKind::Constant;
    double value = 0.0;          // Constant
    Variable variable{};         // Variable
    BinaryOp op = BinaryOp::Add;  // Binary
    Function function = Function::Abs;  // Call
    std::array<int, 2> children{-1, -1};
    SourceSpan span{};
};

struct FunctionInfo {
    std::string_view name;
    Function function;
    int arity;
};

inline constexpr std::array<FunctionInfo, 9> kFunctions{{
    {"abs", Function::Abs, 1},
    {"min", Function::Min, 2},
    {"max", Function::Max, 2},
    {"exp", Function::Exp, 1},
    {"log", Function::Log, 1},
    {"sqrt", Function::Sqrt, 1},
    {"pow", Function::Pow, 2},
    {"sin", Function::Sin, 1},
    {"cos", Function::Cos, 1},
}};

inline std::string_view function_name(Function f) {
    for (const auto& info : kFunctions) {
        if (info.function == f) return info.name;
    }
    return "?";
}

inline int function_arity(Function f) {
    for (const auto& info : kFunctions) {
        if (info.function == f) return info.arity;
    }
    return 0;
}

}  // namespace expr

/// Immutable parsed expression. Nodes live in a flat arena so the tree
/// copies by value and evaluation does not chase heap pointers.
class ExprAst {
public:
    ExprAst() = default;

    const std::vector<expr::Node>& nodes() const noexcept { return nodes_; }
    int root() const noexcept { return root_; }
    const expr::Node& node(int index) const { return nodes_.at(static_cast<std::size_t>(index)); }
    const std::string& source() const noexcept { return source_; }
    bool empty() const noexcept { return root_ < 0; }

    /// Largest `u<k>` index referenced, 0 when none.
    int max_component() const noexcept {
        int m = 0;
        for (const auto& n : nodes_) {
            if (n.kind == expr::NodeKind::Variable && n.variable.kind == expr::Variable::Kind::U) {
                m = std::max(m, n.variable.index);
            }
        }
        return m;
    }

    bool uses_variable(expr::Variable::Kind kind) const noexcept {
        for (const auto& n : nodes_) {
            if (n.kind == expr::NodeKind::Variable && n.variable.kind == kind) return true;
        }
        return false;
    }

    /// Constant expression with the given value.
    static ExprAst constant(double value) {
        ExprAst ast;
        expr::Node n;
        n.kind = expr::NodeKind::Constant;
        n.value = value;
        ast.root_ = ast.push(n);
        return ast;
    }

    static ExprAst binary(expr::BinaryOp op, const ExprAst& lhs, const ExprAst& rhs) {
        ExprAst ast;
        const int l = ast.graft(lhs, lhs.root_);
        const int r = ast.graft(rhs, rhs.root_);
        expr::Node n;
        n.kind = expr::NodeKind::Binary;
        n.op = op;
        n.children = {l, r};
        ast.root_ = ast.push(n);
        return ast;
    }

    /// Copy of this tree with every occurrence of `var` replaced by `replacement`.
    ExprAst substitute(expr::Variable var, const ExprAst& replacement) const {
        ExprAst out;
        if (empty()) return out;
        out.root_ = out.copy_substituted(*this, root_, var, replacement);
        return out;
    }

    /// Structural equality (kinds, operators, constants, variables); spans ignored.
    bool structurally_equal(const ExprAst& other) const {
        if (empty() || other.empty()) return empty() == other.empty();
        return equal_at(other, root_, other.root_);
    }

private:
    friend class Parser;

    int push(const expr::Node& n) {
        nodes_.push_back(n);
        return static_cast<int>(nodes_.size()) - 1;
    }

    int graft(const ExprAst& from, int index) {
        expr::Node n = from.node(index);
        for (int& c : n.children) {
            if (c >= 0) c = graft(from, c);
        }
        return push(n);
    }

    int copy_substituted(const ExprAst& from, int index, expr::Variable var, const ExprAst& repl) {
        const expr::Node& src = from.node(index);
        if (src.kind == expr::NodeKind::Variable && src.variable == var) {
            return graft(repl, repl.root_);
        }
        expr::Node n = src;
        for (int& c : n.children) {
            if (c >= 0) c = copy_substituted(from, c, var, repl);
        }
        return push(n);
    }

    bool equal_at(const ExprAst& other, int a, int b) const {
        const auto& x = node(a);
        const auto& y = other.node(b);
        if (x.kind != y.kind) return false;
        switch (x.kind) {
            case expr::NodeKind::Constant:
                if (x.value != y.value) return false;
                break;
            case expr::NodeKind::Variable:
                if (!(x.variable == y.variable)) return false;
                break;
            case expr::NodeKind::Binary:
                if (x.op != y.op) return false;
                break;
            case expr::NodeKind::Call:
                if (x.function != y.function) return false;
                break;
            case expr::NodeKind::Negate:
                break;
        }
        for (std::size_t k = 0; k < 2; ++k) {
            if ((x.children[k] < 0) != (y.children[k] < 0)) return false;
            if (x.children[k] >= 0 && !equal_at(other, x.children[k], y.children[k])) return false;
        }
        return true;
    }

    std::vector<expr::Node> nodes_;
    int root_ = -1;
    std::string source_;
};

struct ParseOptions {
    /// Accept the radial coordinate `r` as a variable.
    bool allow_r = false;
};

/// Recursive-descent parser for the grammar at the top of this file.
class Parser {
public:
    Parser(std::string_view text, ParseOptions options) : text_(text), options_(options) {}

    ExprAst parse() {
        skip_space();
        if (pos_ >= text_.size()) throw ParseError("empty expression", pos_);
        ast_ = ExprAst{};
        ast_.source_ = std::string(text_);
        ast_.root_ = expression();
        skip_space();
        if (pos_ < text_.size()) {
            throw ParseError(std::string("unexpected character '") + text_[pos_] + "'", pos_);
        }
        return std::move(ast_);
    }

private:
    int expression() {
        const std::size_t start = pos_;
        int lhs = term();
        for (;;) {
            skip_space();
            if (pos_ >= text_.size()) break;
            const char c = text_[pos_];
            if (c != '+' && c != '-') break;
            ++pos_;
            const int rhs = term();
            lhs = make_binary(c == '+' ? expr::BinaryOp::Add : expr::BinaryOp::Sub, lhs, rhs, start);
        }
        return lhs;
    }

    int term() {
        const std::size_t start = pos_;
        int lhs = factor();
        for (;;) {
            skip_space();
            if (pos_ >= text_.size()) break;
            const char c = text_[pos_];
            if (c != '*' && c != '/') break;
            ++pos_;
            const int rhs = factor();
            lhs = make_binary(c == '*' ? expr::BinaryOp::Mul : expr::BinaryOp::Div, lhs, rhs, start);
        }
        return lhs;
    }

    // Unary minus binds looser than '^': "-2^2" is -(2^2).
    int factor() {
        skip_space();
        const std::size_t start = pos_;
        bool negate = false;
        if (pos_ < text_.size() && text_[pos_] == '-') {
            negate = true;
            ++pos_;
        }
        int base = atom();
        skip_space();
        if (pos_ < text_.size() && text_[pos_] == '^') {
            ++pos_;
            const int exponent = factor();
            base = make_binary(expr::BinaryOp::Pow, base, exponent, start);
        }
        if (negate) {
            expr::Node n;
            n.kind = expr::NodeKind::Negate;
            n.children = {base, -1};
            n.span = {start, pos_};
            return ast_.push(n);
        }
        return base;
    }

    int atom() {
        skip_space();
        if (pos_ >= text_.size()) throw ParseError("unexpected end of expression", pos_);
        const char c = text_[pos_];
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return identifier();
        if (c == '(') {
            ++pos_;
            const int inner = expression();
            skip_space();
            expect(')');
            return inner;
        }
        throw ParseError(std::string("unexpected character '") + c + "'", pos_);
    }

    int number() {
        const std::size_t start = pos_;
        std::size_t p = pos_;
        auto digits = [&] {
            const std::size_t s = p;
            while (p < text_.size() && std::isdigit(static_cast<unsigned char>(text_[p]))) ++p;
            return p - s;
        };
        std::size_t mantissa = digits();
        if (p < text_.size() && text_[p] == '.') {
            ++p;
            mantissa += digits();
        }
        if (mantissa == 0) throw ParseError("malformed number", start);
        if (p < text_.size() && (text_[p] == 'e' || text_[p] == 'E')) {
            ++p;
            if (p < text_.size() && (text_[p] == '+' || text_[p] == '-')) ++p;
            if (digits() == 0) throw ParseError("malformed exponent", start);
        }
        double value = 0.0;
        const auto [ptr, ec] = std::from_chars(text_.data() + start, text_.data() + p, value);
        if (ec != std::errc{} || ptr != text_.data() + p || !std::isfinite(value)) {
            throw ParseError("malformed number", start);
        }
        pos_ = p;
        expr::Node n;
        n.kind = expr::NodeKind::Constant;
        n.value = value;
        n.span = {start, pos_};
        return ast_.push(n);
    }

    int identifier() {
        const std::size_t start = pos_;
        while (pos_ < text_.size() &&
               (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) {
            ++pos_;
        }
        const std::string_view name = text_.substr(start, pos_ - start);
        skip_space();
        if (pos_ < text_.size() && text_[pos_] == '(') return call(name, start);

        expr::Node n;
        n.span = {start, pos_};
        if (name == "pi") {
            n.kind = expr::NodeKind::Constant;
            n.value = 3.14159265358979323846;
            return ast_.push(n);
        }
        n.kind = expr::NodeKind::Variable;
        if (name == "t") {
            n.variable = {expr::Variable::Kind::T, 0};
        } else if (name == "r" && options_.allow_r) {
            n.variable = {expr::Variable::Kind::R, 0};
        } else if (name.size() == 2 && name[0] == 'u' && name[1] >= '1' &&
                   name[1] <= static_cast<char>('0' + kMaxComponents)) {
            n.variable = {expr::Variable::Kind::U, name[1] - '0'};
        } else {
            throw ParseError("unknown identifier '" + std::string(name) + "'", start);
        }
        return ast_.push(n);
    }

    int call(std::string_view name, std::size_t start) {
        const expr::FunctionInfo* info = nullptr;
        for (const auto& f : expr::kFunctions) {
            if (f.name == name) info = &f;
        }
        if (info == nullptr) throw ParseError("unknown function '" + std::string(name) + "'", start);
        ++pos_;  // '('
        std::vector<int> args;
        skip_space();
        if (pos_ < text_.size() && text_[pos_] == ')') {
            ++pos_;
        } else {
            for (;;) {
                args.push_back(expression());
                skip_space();
                if (pos_ < text_.size() && text_[pos_] == ',') {
                    ++pos_;
                    continue;
                }
                expect(')');
                break;
            }
        }
        if (static_cast<int>(args.size()) != info->arity) {
            throw ParseError("function '" + std::string(name) + "' expects " +
                                 std::to_string(info->arity) + " argument(s), got " +
                                 std::to_string(args.size()),
                             start);
        }
        expr::Node n;
        n.kind = expr::NodeKind::Call;
        n.function = info->function;
        n.children = {args[0], args.size() > 1 ? args[1] : -1};
        n.span = {start, pos_};
        return ast_.push(n);
    }

    int make_binary(expr::BinaryOp op, int lhs, int rhs, std::size_t start) {
        expr::Node n;
        n.kind = expr::NodeKind::Binary;
        n.op = op;
        n.children = {lhs, rhs};
        n.span = {start, pos_};
        return ast_.push(n);
    }

    void expect(char c) {
        if (pos_ >= text_.size()) throw ParseError(std::string("expected '") + c + "'", pos_);
        if (text_[pos_] != c) {
            throw ParseError(std::string("expected '") + c + "' but found '" + text_[pos_] + "'", pos_);
        }
        ++pos_;
    }

    void skip_space() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }

    std::string_view text_;
    ParseOptions options_;
    std::size_t pos_ = 0;
    ExprAst ast_;
};

inline ExprAst parse(std::string_view text, ParseOptions options = {}) {
    return Parser(text, options).parse();
}

/// Values bound to the expression variables during evaluation.
struct Bindings {
    double t = 0.0;
    std::span<const double> u{};
    std::optional<double> r{};
};

namespace expr::detail {

inline double checked(double value, const char* what) {
    if (!std::isfinite(value)) throw EvalError(std::string("non-finite result in ") + what);
    return value;
}

inline double power(double base, double exponent) {
    if (exponent == 2.0) return base * base;
    if (exponent == 1.0) return base;
    if (exponent == 3.0) return base * base * base;
    if (base < 0.0 && std::floor(exponent) != exponent) {
        throw EvalError("negative base raised to a non-integer power");
    }
    if (base == 0.0 && exponent < 0.0) throw EvalError("zero raised to a negative power");
    return checked(std::pow(base, exponent), "power");
}

inline double eval_node(const ExprAst& ast, int index, const Bindings& b) {
    const Node& n = ast.node(index);
    switch (n.kind) {
        case NodeKind::Constant:
            return n.value;
        case NodeKind::Variable:
            switch (n.variable.kind) {
                case Variable::Kind::T:
                    return b.t;
                case Variable::Kind::R:
                    if (!b.r) throw EvalError("variable 'r' is not bound");
                    return *b.r;
                case Variable::Kind::U: {
                    const auto k = static_cast<std::size_t>(n.variable.index);
                    if (k > b.u.size()) {
                        throw EvalError("variable 'u" + std::to_string(k) + "' is not bound");
                    }
                    return b.u[k - 1];
                }
            }
            break;
        case NodeKind::Negate:
            return -eval_node(ast, n.children[0], b);
        case NodeKind::Binary: {
            const double x = eval_node(ast, n.children[0], b);
            const double y = eval_node(ast, n.children[1], b);
            switch (n.op) {
                case BinaryOp::Add:
                    return checked(x + y, "addition");
                case BinaryOp::Sub:
                    return checked(x - y, "subtraction");
                case BinaryOp::Mul:
                    return checked(x * y, "multiplication");
                case BinaryOp::Div:
                    if (y == 0.0) throw EvalError("division by zero");
                    return checked(x / y, "division");
                case BinaryOp::Pow:
                    return checked(power(x, y), "power");
            }
            break;
        }
        case NodeKind::Call: {
            const double x = eval_node(ast, n.children[0], b);
            switch (n.function) {
                case Function::Abs:
                    return std::abs(x);
                case Function::Min:
                    return std::min(x, eval_node(ast, n.children[1], b));
                case Function::Max:
                    return std::max(x, eval_node(ast, n.children[1], b));
                case Function::Exp:
                    return checked(std::exp(x), "exp");
                case Function::Log:
                    if (x <= 0.0) throw EvalError("log of a nonpositive argument");
                    return std::log(x);
                case Function::Sqrt:
                    if (x < 0.0) throw EvalError("sqrt of a negative argument");
                    return std::sqrt(x);
                case Function::Pow:
                    return checked(power(x, eval_node(ast, n.children[1], b)), "pow");
                case Function::Sin:
                    return std::sin(x);
                case Function::Cos:
                    return std::cos(x);
            }
            break;
        }
    }
    throw EvalError("corrupt expression tree");
}

}  // namespace expr::detail

inline double evaluate(const ExprAst& ast, const Bindings& bindings) {
    if (ast.empty()) throw EvalError("empty expression");
    return expr::detail::eval_node(ast, ast.root(), bindings);
}

inline double evaluate(const ExprAst& ast, double t, std::span<const double> u = {}) {
    return evaluate(ast, Bindings{t, u, std::nullopt});
}

/// Shortest decimal that reads back to the same double.
inline std::string format_number(double value) {
    std::array<char, 32> buf{};
    const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
    if (ec != std::errc{}) return std::to_string(value);
    return std::string(buf.data(), ptr);
}

namespace expr::detail {

inline void print_node(const ExprAst& ast, int index, std::string& out) {
    const Node& n = ast.node(index);
    switch (n.kind) {
        case NodeKind::Constant:
            if (n.value < 0.0) {
                out += "(" + format_number(n.value) + ")";
            } else {
                out += format_number(n.value);
            }
            return;
        case NodeKind::Variable:
            switch (n.variable.kind) {
                case Variable::Kind::T:
                    out += "t";
                    return;
                case Variable::Kind::R:
                    out += "r";
                    return;
                case Variable::Kind::U:
                    out += "u" + std::to_string(n.variable.index);
                    return;
            }
            return;
        case NodeKind::Negate:
            out += "(-";
            print_node(ast, n.children[0], out);
            out += ")";
            return;
        case NodeKind::Binary: {
            static constexpr std::array<const char*, 5> symbols{" + ", " - ", " * ", " / ", "^"};
            out += "(";
            print_node(ast, n.children[0], out);
            out += symbols[static_cast<std::size_t>(n.op)];
            print_node(ast, n.children[1], out);
            out += ")";
            return;
        }
        case NodeKind::Call:
            out += function_name(n.function);
            out += "(";
            print_node(ast, n.children[0], out);
            if (n.children[1] >= 0) {
                out += ", ";
                print_node(ast, n.children[1], out);
            }
            out += ")";
            return;
    }
}

}  // namespace expr::detail

/// Fully parenthesized rendering; parsing the result gives a structurally
/// identical tree (negative constants only arise from programmatic trees).
inline std::string to_string(const ExprAst& ast) {
    std::string out;
    if (!ast.empty()) expr::detail::print_node(ast, ast.root(), out);
    return out;
}

}  // namespace conebvp
