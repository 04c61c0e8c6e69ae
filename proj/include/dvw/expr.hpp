// Small arithmetic expression language over x, y, t.
//
// Grammar (lowest to highest precedence):
//   sum     := product (('+' | '-') product)*
//   product := unary (('*' | '/') unary)*
//   unary   := '-' unary | power
//   power   := primary ('^' exponent)?        exponent is a constant integer
//   primary := number | x | y | t | pi | func '(' sum ')' | '(' sum ')'
//   func    := sin | cos | exp
//
// `^` binds tighter than unary minus, so -x^2 == -(x^2), and is right
// associative (2^3^2 == 2^9).  `pi` is replaced by its double value while
// parsing; the tree only ever holds numeric literals.
#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <map>
#include <tuple>
#include <cstdint>
#include <unordered_map>
#include <vector>

namespace dvw {

enum class Var : unsigned char { x = 0, y = 1, t = 2 };

class ParseError : public std::runtime_error {
public:
    ParseError(std::size_t offset, const std::string& msg);
    std::size_t offset() const { return offset_; }

private:
    std::size_t offset_;
};

class EvalError : public std::runtime_error {
public:
    EvalError(std::size_t offset, const std::string& msg);
    // Byte offset of the offending node in the source text it was parsed
    // from, or npos for nodes created by differentiation.
    std::size_t offset() const { return offset_; }

private:
    std::size_t offset_;
};

struct Node;
using NodePtr = std::shared_ptr<const Node>;

enum class Op : unsigned char { num, var, neg, add, sub, mul, div, pow, sin, cos, exp };

struct Node {
    Op op;
    double value = 0.0;  // num
    Var var = Var::x;    // var
    int exponent = 0;    // pow
    NodePtr a, b;
    std::size_t offset = std::string::npos;
};

class Expr {
public:
    Expr();  // literal zero
    explicit Expr(NodePtr n) : node_(std::move(n)) {}

    static Expr number(double v);
    static Expr variable(Var v);

    const Node& node() const { return *node_; }
    const NodePtr& ptr() const { return node_; }

    bool is_number() const { return node_->op == Op::num; }
    bool is_zero() const { return is_number() && node_->value == 0.0; }
    // True when the expression does not depend on the given variable.
    bool independent_of(Var v) const;

    friend Expr operator+(const Expr& a, const Expr& b);
    friend Expr operator-(const Expr& a, const Expr& b);
    friend Expr operator*(const Expr& a, const Expr& b);
    friend Expr operator/(const Expr& a, const Expr& b);
    friend Expr operator-(const Expr& a);

private:
    NodePtr node_;
};

Expr pow(const Expr& base, int exponent);
Expr sin(const Expr& e);
Expr cos(const Expr& e);
Expr exp(const Expr& e);

Expr parse(std::string_view source);
std::string serialize(const Expr& e);
Expr differentiate(const Expr& e, Var v);
double evaluate(const Expr& e, double x, double y = 0.0, double t = 0.0);

// Evaluates one or more expressions on a fixed point set at many times.
//
// The expressions are flattened into a single instruction list with common
// subexpressions merged.  Instructions that do not involve t are computed
// once at construction; instructions that involve only t are scalars
// recomputed per call; the rest are evaluated pointwise per call.
class PointSampler {
public:
    PointSampler(std::vector<Expr> exprs, std::vector<double> xs, std::vector<double> ys);

    std::size_t size() const { return npts_; }
    std::size_t count() const { return outputs_.size(); }

    // Writes expression `which` at time t into out (length size()).
    void eval(std::size_t which, double t, std::span<double> out) const;
    // Evaluates every expression; out[k] receives expression k.
    void eval_all(double t, std::vector<std::vector<double>>& out) const;

private:
    struct Instr {
        Op op;
        int a = -1, b = -1;
        int exponent = 0;
        double value = 0.0;
        Var var = Var::x;
        unsigned deps = 0;  // bit0 space, bit1 time
        std::size_t offset = std::string::npos;
        int slot = -1;  // index into scalar or field storage
    };

    int intern(const Node& n, std::unordered_map<const Node*, int>& memo);
    void run_time_dependent(double t, std::vector<double>& scalars,
                            std::vector<std::vector<double>>& fields,
                            const std::vector<int>& needed) const;
    void collect(int id, std::vector<char>& mark) const;

    std::size_t npts_;
    std::vector<double> xs_, ys_;
    std::vector<Instr> code_;
    std::vector<int> outputs_;
    std::vector<double> static_scalars_;
    std::vector<std::vector<double>> static_fields_;
    std::vector<std::vector<int>> schedule_;  // per output: time-dependent instrs in order
    std::map<std::tuple<int, int, int, int, int, std::uint64_t>, int> structural_;
};

}  // namespace dvw
