#include "fredholm/expr.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <numbers>

#include "fredholm/error.hpp"

namespace fredholm::expr {

namespace {

struct FunctionEntry {
    std::string_view name;
    Function fn;
};

constexpr std::array<FunctionEntry, 7> kFunctions{{
    {"sin", Function::sin},
    {"cos", Function::cos},
    {"tan", Function::tan},
    {"exp", Function::exp},
    {"log", Function::log},
    {"sqrt", Function::sqrt},
    {"abs", Function::abs},
}};

const FunctionEntry* find_function(std::string_view name) {
    for (const auto& entry : kFunctions) {
        if (entry.name == name) return &entry;
    }
    return nullptr;
}

bool find_constant(std::string_view name, double& value) {
    if (name == "pi") {
        value = std::numbers::pi;
        return true;
    }
    if (name == "e") {
        value = std::numbers::e;
        return true;
    }
    return false;
}

bool is_ident_start(char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_';
}
bool is_ident_char(char c) { return is_ident_start(c) || (c >= '0' && c <= '9'); }
bool is_digit(char c) { return c >= '0' && c <= '9'; }

NodePtr make(auto&& alternative) {
    return std::make_shared<const Node>(Node{std::forward<decltype(alternative)>(alternative)});
}

class Parser {
public:
    explicit Parser(std::string_view src) : src_(src) {}

    NodePtr parse_all() {
        NodePtr node = parse_sum();
        skip_ws();
        if (pos_ != src_.size()) fail(pos_, "operator or end of input");
        return node;
    }

private:
    [[noreturn]] void fail(std::size_t at, std::string expected) const {
        std::string msg = "syntax error at offset " + std::to_string(at) + ": expected " + expected;
        if (at < src_.size()) {
            msg += ", found '" + std::string(1, src_[at]) + "'";
        } else {
            msg += ", found end of input";
        }
        throw ParseError(at, std::move(expected), msg);
    }

    void skip_ws() {
        while (pos_ < src_.size() &&
               (src_[pos_] == ' ' || src_[pos_] == '\t' || src_[pos_] == '\n' || src_[pos_] == '\r')) {
            ++pos_;
        }
    }

    bool accept(char c) {
        skip_ws();
        if (pos_ < src_.size() && src_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    NodePtr parse_sum() {
        NodePtr lhs = parse_product();
        for (;;) {
            if (accept('+')) {
                lhs = make(Binary{BinaryOp::add, lhs, parse_product()});
            } else if (accept('-')) {
                lhs = make(Binary{BinaryOp::sub, lhs, parse_product()});
            } else {
                return lhs;
            }
        }
    }

    NodePtr parse_product() {
        NodePtr lhs = parse_unary();
        for (;;) {
            if (accept('*')) {
                lhs = make(Binary{BinaryOp::mul, lhs, parse_unary()});
            } else if (accept('/')) {
                lhs = make(Binary{BinaryOp::div, lhs, parse_unary()});
            } else {
                return lhs;
            }
        }
    }

    NodePtr parse_unary() {
        if (accept('-')) return make(Negate{parse_unary()});
        return parse_power();
    }

    NodePtr parse_power() {
        NodePtr base = parse_primary();
        if (accept('^')) return make(Binary{BinaryOp::pow, base, parse_unary()});
        return base;
    }

    NodePtr parse_primary() {
        skip_ws();
        if (pos_ >= src_.size()) fail(pos_, "number, identifier or '('");
        const char c = src_[pos_];
        if (is_digit(c) || (c == '.' && pos_ + 1 < src_.size() && is_digit(src_[pos_ + 1]))) {
            return parse_number();
        }
        if (is_ident_start(c)) return parse_identifier();
        if (c == '(') {
            ++pos_;
            NodePtr inner = parse_sum();
            if (!accept(')')) fail(pos_after_ws(), "')'");
            return inner;
        }
        fail(pos_, "number, identifier or '('");
    }

    std::size_t pos_after_ws() {
        skip_ws();
        return pos_;
    }

    NodePtr parse_number() {
        const std::size_t start = pos_;
        while (pos_ < src_.size() && is_digit(src_[pos_])) ++pos_;
        if (pos_ < src_.size() && src_[pos_] == '.') {
            ++pos_;
            while (pos_ < src_.size() && is_digit(src_[pos_])) ++pos_;
        }
        if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
            std::size_t look = pos_ + 1;
            if (look < src_.size() && (src_[look] == '+' || src_[look] == '-')) ++look;
            if (look < src_.size() && is_digit(src_[look])) {
                pos_ = look;
                while (pos_ < src_.size() && is_digit(src_[pos_])) ++pos_;
            }
        }
        double value = 0.0;
        const char* first = src_.data() + start;
        const char* last = src_.data() + pos_;
        auto [ptr, ec] = std::from_chars(first, last, value);
        if (ec != std::errc{} || ptr != last || !std::isfinite(value)) {
            throw ParseError(start, "finite number",
                             "syntax error at offset " + std::to_string(start) +
                                 ": numeric literal out of range");
        }
        return make(Number{value});
    }

    NodePtr parse_identifier() {
        const std::size_t start = pos_;
        while (pos_ < src_.size() && is_ident_char(src_[pos_])) ++pos_;
        const std::string_view name = src_.substr(start, pos_ - start);

        double constant = 0.0;
        if (find_constant(name, constant)) return make(Number{constant});

        if (const FunctionEntry* entry = find_function(name)) {
            if (!accept('(')) fail(pos_after_ws(), "'(' after function name");
            NodePtr arg = parse_sum();
            if (!accept(')')) fail(pos_after_ws(), "')'");
            return make(Call{entry->fn, arg});
        }

        const std::size_t after = pos_after_ws();
        if (after < src_.size() && src_[after] == '(') {
            throw ParseError(start, "known function",
                             "unknown function '" + std::string(name) + "' at offset " +
                                 std::to_string(start));
        }
        return make(Variable{std::string(name)});
    }

    std::string_view src_;
    std::size_t pos_ = 0;
};

double checked(double result, const char* what) {
    if (!std::isfinite(result)) {
        throw EvalError(std::string("domain error: non-finite result in ") + what);
    }
    return result;
}

double apply_binary(BinaryOp op, double lhs, double rhs) {
    switch (op) {
        case BinaryOp::add:
            return checked(lhs + rhs, "addition");
        case BinaryOp::sub:
            return checked(lhs - rhs, "subtraction");
        case BinaryOp::mul:
            return checked(lhs * rhs, "multiplication");
        case BinaryOp::div:
            if (rhs == 0.0) throw EvalError("domain error: division by zero");
            return checked(lhs / rhs, "division");
        case BinaryOp::pow:
            if (lhs == 0.0 && rhs < 0.0) throw EvalError("domain error: 0 raised to a negative power");
            if (lhs < 0.0 && std::trunc(rhs) != rhs) {
                throw EvalError("domain error: negative base raised to a non-integer power");
            }
            return checked(std::pow(lhs, rhs), "power");
    }
    return 0.0;
}

double apply_function(Function fn, double x) {
    switch (fn) {
        case Function::sin:
            return checked(std::sin(x), "sin");
        case Function::cos:
            return checked(std::cos(x), "cos");
        case Function::tan:
            return checked(std::tan(x), "tan");
        case Function::exp:
            return checked(std::exp(x), "exp");
        case Function::log:
            if (x <= 0.0) throw EvalError("domain error: log of non-positive value " + std::to_string(x));
            return checked(std::log(x), "log");
        case Function::sqrt:
            if (x < 0.0) throw EvalError("domain error: sqrt of negative value " + std::to_string(x));
            return std::sqrt(x);
        case Function::abs:
            return std::abs(x);
    }
    return 0.0;
}

char op_symbol(BinaryOp op) {
    switch (op) {
        case BinaryOp::add: return '+';
        case BinaryOp::sub: return '-';
        case BinaryOp::mul: return '*';
        case BinaryOp::div: return '/';
        case BinaryOp::pow: return '^';
    }
    return '?';
}

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};

double eval_node(const Node& node, const Bindings& env) {
    return std::visit(
        overloaded{
            [](const Number& n) { return n.value; },
            [&](const Variable& v) {
                auto it = env.find(v.name);
                if (it == env.end()) throw EvalError("unbound variable '" + v.name + "'");
                return it->second;
            },
            [&](const Negate& n) { return -eval_node(*n.operand, env); },
            [&](const Binary& b) {
                const double lhs = eval_node(*b.lhs, env);
                const double rhs = eval_node(*b.rhs, env);
                return apply_binary(b.op, lhs, rhs);
            },
            [&](const Call& c) { return apply_function(c.fn, eval_node(*c.arg, env)); },
        },
        node.data);
}

void collect_vars(const Node& node, std::set<std::string>& out) {
    std::visit(overloaded{
                   [](const Number&) {},
                   [&](const Variable& v) { out.insert(v.name); },
                   [&](const Negate& n) { collect_vars(*n.operand, out); },
                   [&](const Binary& b) {
                       collect_vars(*b.lhs, out);
                       collect_vars(*b.rhs, out);
                   },
                   [&](const Call& c) { collect_vars(*c.arg, out); },
               },
               node.data);
}

void render_node(const Node& node, std::string& out) {
    std::visit(overloaded{
                   [&](const Number& n) {
                       char buf[32];
                       std::snprintf(buf, sizeof buf, "%.17g", n.value);
                       out += buf;
                   },
                   [&](const Variable& v) { out += v.name; },
                   [&](const Negate& n) {
                       out += "(-";
                       render_node(*n.operand, out);
                       out += ')';
                   },
                   [&](const Binary& b) {
                       out += '(';
                       render_node(*b.lhs, out);
                       out += ' ';
                       out += op_symbol(b.op);
                       out += ' ';
                       render_node(*b.rhs, out);
                       out += ')';
                   },
                   [&](const Call& c) {
                       out += function_name(c.fn);
                       out += '(';
                       render_node(*c.arg, out);
                       out += ')';
                   },
               },
               node.data);
}

}  // namespace

Expr::Expr(NodePtr root, std::string source) : root_(std::move(root)), source_(std::move(source)) {
    if (!root_) throw ValidationError("expression tree is empty");
}

Expr parse(std::string_view source) {
    Parser parser(source);
    return Expr(parser.parse_all(), std::string(source));
}

double eval(const Expr& expr, const Bindings& env) { return eval_node(expr.root(), env); }

std::set<std::string> free_vars(const Expr& expr) {
    std::set<std::string> out;
    collect_vars(expr.root(), out);
    return out;
}

std::string render(const Expr& expr) {
    std::string out;
    render_node(expr.root(), out);
    return out;
}

bool structurally_equal(const Node& a, const Node& b) {
    if (a.data.index() != b.data.index()) return false;
    return std::visit(
        overloaded{
            [&](const Number& n) { return n.value == std::get<Number>(b.data).value; },
            [&](const Variable& v) { return v.name == std::get<Variable>(b.data).name; },
            [&](const Negate& n) { return structurally_equal(*n.operand, *std::get<Negate>(b.data).operand); },
            [&](const Binary& x) {
                const auto& y = std::get<Binary>(b.data);
                return x.op == y.op && structurally_equal(*x.lhs, *y.lhs) && structurally_equal(*x.rhs, *y.rhs);
            },
            [&](const Call& x) {
                const auto& y = std::get<Call>(b.data);
                return x.fn == y.fn && structurally_equal(*x.arg, *y.arg);
            },
        },
        a.data);
}

bool is_reserved_name(std::string_view name) {
    double unused = 0.0;
    return find_function(name) != nullptr || find_constant(name, unused);
}

std::string_view function_name(Function fn) {
    for (const auto& entry : kFunctions) {
        if (entry.fn == fn) return entry.name;
    }
    return "?";
}

CompiledExpr::CompiledExpr(const Expr& expr, std::vector<std::string> variables)
    : variables_(std::move(variables)), source_(expr.source()) {
    for (const auto& name : free_vars(expr)) {
        if (std::find(variables_.begin(), variables_.end(), name) == variables_.end()) {
            std::string allowed;
            for (const auto& v : variables_) allowed += (allowed.empty() ? "" : ", ") + v;
            throw ValidationError("expression '" + source_ + "' uses variable '" + name +
                                  "'; allowed variables: {" + allowed + "}");
        }
    }
    emit(expr.root());
    std::size_t depth = 0;
    for (const Instr& ins : code_) {
        switch (ins.code) {
            case OpCode::push_const:
            case OpCode::push_var:
                ++depth;
                break;
            case OpCode::add:
            case OpCode::sub:
            case OpCode::mul:
            case OpCode::div:
            case OpCode::pow:
                --depth;
                break;
            default:
                break;
        }
        max_depth_ = std::max(max_depth_, depth);
    }
}

void CompiledExpr::emit(const Node& node) {
    std::visit(overloaded{
                   [&](const Number& n) { code_.push_back({OpCode::push_const, Function::abs, 0, n.value}); },
                   [&](const Variable& v) {
                       const auto it = std::find(variables_.begin(), variables_.end(), v.name);
                       code_.push_back({OpCode::push_var, Function::abs,
                                        static_cast<std::size_t>(it - variables_.begin()), 0.0});
                   },
                   [&](const Negate& n) {
                       emit(*n.operand);
                       code_.push_back({OpCode::negate, Function::abs, 0, 0.0});
                   },
                   [&](const Binary& b) {
                       emit(*b.lhs);
                       emit(*b.rhs);
                       OpCode code = OpCode::add;
                       switch (b.op) {
                           case BinaryOp::add: code = OpCode::add; break;
                           case BinaryOp::sub: code = OpCode::sub; break;
                           case BinaryOp::mul: code = OpCode::mul; break;
                           case BinaryOp::div: code = OpCode::div; break;
                           case BinaryOp::pow: code = OpCode::pow; break;
                       }
                       code_.push_back({code, Function::abs, 0, 0.0});
                   },
                   [&](const Call& c) {
                       emit(*c.arg);
                       code_.push_back({OpCode::call, c.fn, 0, 0.0});
                   },
               },
               node.data);
}

double CompiledExpr::operator()(std::span<const double> args) const {
    if (args.size() != variables_.size()) {
        throw ValidationError("compiled expression expects " + std::to_string(variables_.size()) +
                              " arguments, got " + std::to_string(args.size()));
    }
    constexpr std::size_t kInline = 32;
    std::array<double, kInline> inline_stack{};
    std::vector<double> heap_stack;
    double* stack = inline_stack.data();
    if (max_depth_ > kInline) {
        heap_stack.resize(max_depth_);
        stack = heap_stack.data();
    }
    std::size_t top = 0;
    for (const Instr& ins : code_) {
        switch (ins.code) {
            case OpCode::push_const:
                stack[top++] = ins.value;
                break;
            case OpCode::push_var:
                stack[top++] = args[ins.slot];
                break;
            case OpCode::negate:
                stack[top - 1] = -stack[top - 1];
                break;
            case OpCode::call:
                stack[top - 1] = apply_function(ins.fn, stack[top - 1]);
                break;
            default: {
                const double rhs = stack[--top];
                const double lhs = stack[top - 1];
                BinaryOp op = BinaryOp::add;
                switch (ins.code) {
                    case OpCode::sub: op = BinaryOp::sub; break;
                    case OpCode::mul: op = BinaryOp::mul; break;
                    case OpCode::div: op = BinaryOp::div; break;
                    case OpCode::pow: op = BinaryOp::pow; break;
                    default: break;
                }
                stack[top - 1] = apply_binary(op, lhs, rhs);
            }
        }
    }
    return stack[0];
}

}  // namespace fredholm::expr
