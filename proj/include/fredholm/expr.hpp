#pragma once

// Arithmetic expression language used to write kernels, sources,
// nonlinearities and boundary data in problem configs.
//
// Grammar (lowest to highest precedence):
//   sum     := product (('+' | '-') product)*
//   product := unary (('*' | '/') unary)*
//   unary   := '-' unary | power
//   power   := primary ('^' unary)?          right-associative
//   primary := number | constant | identifier | function '(' sum ')' | '(' sum ')'
//
// Constants: pi, e.  Functions: sin cos tan exp log sqrt abs (log is natural).
// There is no implicit multiplication and no unary plus.

#include <map>
#include <memory>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace fredholm::expr {

enum class BinaryOp { add, sub, mul, div, pow };
enum class Function { sin, cos, tan, exp, log, sqrt, abs };

struct Node;
using NodePtr = std::shared_ptr<const Node>;

struct Number {
    double value;
};
struct Variable {
    std::string name;
};
struct Negate {
    NodePtr operand;
};
struct Binary {
    BinaryOp op;
    NodePtr lhs;
    NodePtr rhs;
};
struct Call {
    Function fn;
    NodePtr arg;
};

struct Node {
    std::variant<Number, Variable, Negate, Binary, Call> data;
};

/// Immutable parsed expression. Copies share the tree.
class Expr {
public:
    explicit Expr(NodePtr root, std::string source = {});

    const Node& root() const noexcept { return *root_; }
    const NodePtr& root_ptr() const noexcept { return root_; }
    const std::string& source() const noexcept { return source_; }

private:
    NodePtr root_;
    std::string source_;
};

using Bindings = std::map<std::string, double, std::less<>>;

Expr parse(std::string_view source);

/// Evaluates in IEEE double precision. Throws EvalError for unbound variables
/// and domain violations (log of x <= 0, sqrt of x < 0, 0 to a negative power,
/// division by zero, non-finite results); never returns NaN.
double eval(const Expr& expr, const Bindings& env);

std::set<std::string> free_vars(const Expr& expr);

/// Fully parenthesized text form; parse(render(e)) is structurally equal to e.
std::string render(const Expr& expr);

bool structurally_equal(const Node& a, const Node& b);
inline bool structurally_equal(const Expr& a, const Expr& b) {
    return structurally_equal(a.root(), b.root());
}

bool is_reserved_name(std::string_view name);
std::string_view function_name(Function fn);

/// Expression flattened to postfix code with variables resolved to argument
/// slots. Use for hot loops such as kernel matrix assembly.
class CompiledExpr {
public:
    /// Throws ValidationError if the expression uses a variable not in `variables`.
    CompiledExpr(const Expr& expr, std::vector<std::string> variables);

    double operator()(std::span<const double> args) const;
    double operator()(double a) const { return (*this)(std::span<const double>(&a, 1)); }
    double operator()(double a, double b) const {
        const double args[2] = {a, b};
        return (*this)(std::span<const double>(args, 2));
    }

    const std::vector<std::string>& variables() const noexcept { return variables_; }
    const std::string& source() const noexcept { return source_; }

private:
    enum class OpCode : unsigned char { push_const, push_var, negate, add, sub, mul, div, pow, call };
    struct Instr {
        OpCode code;
        Function fn;
        std::size_t slot;
        double value;
    };

    void emit(const Node& node);

    std::vector<Instr> code_;
    std::vector<std::string> variables_;
    std::string source_;
    std::size_t max_depth_ = 0;
};

}  // namespace fredholm::expr
