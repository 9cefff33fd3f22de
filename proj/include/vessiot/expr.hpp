#pragma once

#include <map>
#include <memory>
#include <set>
#include <variant>
#include <vector>

#include "gcd.hpp"
#include "poly.hpp"

namespace vessiot {

/* Rational function in canonical form: numerator/denominator fully cancelled,
 * denominator integer-primitive with positive leading coefficient. Immutable;
 * equal functions have identical representations. */
class Expr {
public:
    Expr() : num_(Poly::zero()), den_(Poly::one()) {}

    static Expr zero() { return Expr(); }
    static Expr one() { return from_rat(Rat(1)); }
    static Expr from_rat(const Rat& r) {
        Expr e;
        e.num_ = Poly::constant(r);
        return e;
    }
    static Expr from_int(long v) { return from_rat(Rat(v)); }
    static Expr atom(AtomId a) {
        Expr e;
        e.num_ = Poly::atom(a);
        return e;
    }
    static Expr from_poly(const Poly& p) {
        Expr e;
        e.num_ = p;
        return e;
    }
    /* general constructor; cancels and normalizes */
    static Expr ratio(const Poly& num, const Poly& den) {
        if (den.is_zero()) throw IdenticallyZeroDenominator();
        Expr e;
        e.num_ = num;
        e.den_ = den;
        e.reduce_full();
        return e;
    }

    /* as ratio(), but the caller certifies gcd(num, den) = 1, so the
     * reducing gcd is skipped.  Violating the certificate breaks the
     * reduced-form invariant that structural comparison relies on. */
    static Expr ratio_coprime(const Poly& num, const Poly& den) {
        if (den.is_zero()) throw IdenticallyZeroDenominator();
        Expr e;
        e.num_ = num;
        e.den_ = den;
        e.normalize_scalar();
        return e;
    }

    const Poly& num() const { return num_; }
    const Poly& den() const { return den_; }
    bool is_zero() const { return num_.is_zero(); }
    bool is_rational() const { return num_.is_constant() && den_.is_constant(); }
    Rat rational_value() const { return num_.constant_value() / den_.constant_value(); }

    bool operator==(const Expr& o) const { return num_ == o.num_ && den_ == o.den_; }
    bool operator!=(const Expr& o) const { return !(*this == o); }
    static int compare(const Expr& x, const Expr& y) {
        int c = Poly::compare(x.num_, y.num_);
        if (c) return c;
        return Poly::compare(x.den_, y.den_);
    }

    friend Expr operator-(const Expr& x) {
        Expr r = x;
        r.num_ = -r.num_;
        return r;
    }

    friend Expr operator+(const Expr& x, const Expr& y) {
        if (x.is_zero()) return y;
        if (y.is_zero()) return x;
        Expr r;
        if (x.den_ == y.den_) {
            Poly t = x.num_ + y.num_;
            Poly h = poly_gcd(t, x.den_);
            if (h.is_constant()) {
                r.num_ = t;
                r.den_ = x.den_;
            } else {
                r.num_ = *Poly::divide_exact(t, h);
                r.den_ = *Poly::divide_exact(x.den_, h);
            }
            r.normalize_scalar();
            return r;
        }
        Poly g = poly_gcd(x.den_, y.den_);
        if (g.is_constant()) {
            r.num_ = x.num_ * y.den_ + y.num_ * x.den_;
            r.den_ = x.den_ * y.den_;
            r.normalize_scalar();  // already reduced when denominators are coprime
            return r;
        }
        Poly bd = *Poly::divide_exact(x.den_, g);
        Poly dd = *Poly::divide_exact(y.den_, g);
        Poly t = x.num_ * dd + y.num_ * bd;
        Poly h = poly_gcd(t, g);
        if (h.is_constant()) {
            r.num_ = t;
            r.den_ = bd * y.den_;
        } else {
            r.num_ = *Poly::divide_exact(t, h);
            r.den_ = bd * (*Poly::divide_exact(y.den_, h));
        }
        r.normalize_scalar();
        return r;
    }

    friend Expr operator-(const Expr& x, const Expr& y) { return x + (-y); }

    friend Expr operator*(const Expr& x, const Expr& y) {
        if (x.is_zero() || y.is_zero()) return Expr();
        Expr r;
        Poly g1 = poly_gcd(x.num_, y.den_);
        Poly g2 = poly_gcd(y.num_, x.den_);
        Poly a = g1.is_constant() ? x.num_ : *Poly::divide_exact(x.num_, g1);
        Poly d = g1.is_constant() ? y.den_ : *Poly::divide_exact(y.den_, g1);
        Poly c = g2.is_constant() ? y.num_ : *Poly::divide_exact(y.num_, g2);
        Poly b = g2.is_constant() ? x.den_ : *Poly::divide_exact(x.den_, g2);
        r.num_ = a * c;
        r.den_ = b * d;
        r.normalize_scalar();
        return r;
    }

    friend Expr operator/(const Expr& x, const Expr& y) {
        if (y.is_zero()) throw DivisionByZero("expression division by zero");
        Expr inv;
        inv.num_ = y.den_;
        inv.den_ = y.num_;
        inv.normalize_scalar();
        return x * inv;
    }

    Expr pow(int e) const {
        if (e == 0) return Expr::one();
        if (is_zero()) {
            if (e < 0) throw DivisionByZero("zero raised to a negative power");
            return Expr();
        }
        Expr base = *this;
        if (e < 0) {
            base = Expr::one() / base;
            e = -e;
        }
        // already reduced, so powers stay reduced
        Expr r;
        r.num_ = base.num_.pow(e);
        r.den_ = base.den_.pow(e);
        r.normalize_scalar();
        return r;
    }

    Expr partial(AtomId a) const {
        if (!num_.contains_atom(a) && !den_.contains_atom(a)) return Expr();
        Poly dn = num_.derivative(a);
        if (!den_.contains_atom(a)) return ratio(dn, den_);
        Poly dd = den_.derivative(a);
        return ratio(dn * den_ - num_ * dd, den_ * den_);
    }

    Rat eval(const std::map<AtomId, Rat>& vals) const {
        Rat d = den_.eval(vals);
        if (d == 0) throw DivisionByZero("denominator vanishes at evaluation point");
        return num_.eval(vals) / d;
    }

    /* simultaneous substitution; atoms absent from the map are kept */
    Expr substitute(const std::map<AtomId, Expr>& repl) const {
        bool touched = false;
        for (auto& [a, e] : repl) {
            if (num_.contains_atom(a) || den_.contains_atom(a)) {
                touched = true;
                break;
            }
        }
        if (!touched) return *this;
        Expr n = substitute_poly(num_, repl);
        Expr d = substitute_poly(den_, repl);
        return n / d;
    }

    std::set<AtomId> atoms() const {
        std::set<AtomId> s = num_.atoms();
        den_.collect_atoms(s);
        return s;
    }
    bool contains_atom(AtomId a) const { return num_.contains_atom(a) || den_.contains_atom(a); }

    std::string to_string() const {
        if (den_ == Poly::one()) return num_.to_string();
        return "(" + num_.to_string() + ") / (" + den_.to_string() + ")";
    }

private:
    Poly num_, den_;

    /* make denominator integer-primitive with positive leading coefficient */
    void normalize_scalar() {
        if (num_.is_zero()) {
            den_ = Poly::one();
            return;
        }
        Rat c = den_.content();
        if (den_.leading().coef < 0) c = -c;
        if (c != 1) {
            den_ = Poly::mul_scalar(den_, Rat(1) / c);
            num_ = Poly::mul_scalar(num_, Rat(1) / c);
        }
    }

    void reduce_full() {
        if (num_.is_zero()) {
            den_ = Poly::one();
            return;
        }
        Poly g = poly_gcd(num_, den_);
        if (!g.is_constant()) {
            num_ = *Poly::divide_exact(num_, g);
            den_ = *Poly::divide_exact(den_, g);
        }
        normalize_scalar();
    }

    static Expr substitute_poly(const Poly& p, const std::map<AtomId, Expr>& repl) {
        if (p.is_zero()) return Expr();
        // per-atom power cache
        std::map<AtomId, std::vector<Expr>> powers;
        auto atom_pow = [&](AtomId a, int e) -> Expr {
            auto it = repl.find(a);
            Expr base = it == repl.end() ? Expr::atom(a) : it->second;
            auto& cache = powers[a];
            if (cache.empty()) cache.push_back(Expr::one());
            while (static_cast<int>(cache.size()) <= e) cache.push_back(cache.back() * base);
            return cache[static_cast<size_t>(e)];
        };
        std::vector<Expr> parts;
        parts.reserve(p.terms().size());
        for (auto& t : p.terms()) {
            Expr v = Expr::from_rat(t.coef);
            for (auto& [a, e] : t.mono.factors()) v = v * atom_pow(a, e);
            parts.push_back(v);
        }
        // balanced summation keeps intermediate gcds on comparable operands
        while (parts.size() > 1) {
            std::vector<Expr> next;
            next.reserve(parts.size() / 2 + 1);
            for (size_t i = 0; i + 1 < parts.size(); i += 2) next.push_back(parts[i] + parts[i + 1]);
            if (parts.size() & 1) next.push_back(parts.back());
            parts = std::move(next);
        }
        return parts[0];
    }
};

/* ---- raw expression trees (parser / test input) ---- */

struct ExprTree;
using TreePtr = std::shared_ptr<ExprTree>;

struct ExprTree {
    enum class Op { Const, Atom, Add, Sub, Mul, Div, Neg, Pow };
    Op op;
    Rat value;        // Const
    AtomId atom = 0;  // Atom
    TreePtr a, b;
    int exponent = 0;  // Pow

    static TreePtr constant(const Rat& r) {
        auto t = std::make_shared<ExprTree>();
        t->op = Op::Const;
        t->value = r;
        return t;
    }
    static TreePtr atom_ref(AtomId id) {
        auto t = std::make_shared<ExprTree>();
        t->op = Op::Atom;
        t->atom = id;
        return t;
    }
    static TreePtr node(Op op, TreePtr x, TreePtr y = nullptr) {
        auto t = std::make_shared<ExprTree>();
        t->op = op;
        t->a = std::move(x);
        t->b = std::move(y);
        return t;
    }
    static TreePtr power(TreePtr x, int e) {
        auto t = std::make_shared<ExprTree>();
        t->op = Op::Pow;
        t->a = std::move(x);
        t->exponent = e;
        return t;
    }
};

/* evaluate a raw tree into canonical form; idempotent on canonical content */
inline Expr normalize(const TreePtr& t) {
    switch (t->op) {
        case ExprTree::Op::Const: return Expr::from_rat(t->value);
        case ExprTree::Op::Atom: return Expr::atom(t->atom);
        case ExprTree::Op::Add: return normalize(t->a) + normalize(t->b);
        case ExprTree::Op::Sub: return normalize(t->a) - normalize(t->b);
        case ExprTree::Op::Mul: return normalize(t->a) * normalize(t->b);
        case ExprTree::Op::Div: return normalize(t->a) / normalize(t->b);
        case ExprTree::Op::Neg: return -normalize(t->a);
        case ExprTree::Op::Pow: return normalize(t->a).pow(t->exponent);
    }
    throw Error("corrupt expression tree");
}

inline Expr partial_wrt_atom(const Expr& e, AtomId a) { return e.partial(a); }
inline Expr substitute(const Expr& e, const std::map<AtomId, Expr>& repl) { return e.substitute(repl); }
inline Rat eval_at(const Expr& e, const std::map<AtomId, Rat>& vals) { return e.eval(vals); }

/* determinant of a small square matrix of expressions, by cofactor expansion */
inline Expr det_expr(const std::vector<std::vector<Expr>>& m) {
    size_t n = m.size();
    if (n == 0) return Expr::one();
    if (n == 1) return m[0][0];
    Expr d = Expr::zero();
    for (size_t j = 0; j < n; ++j) {
        if (m[0][j] == Expr::zero()) continue;
        std::vector<std::vector<Expr>> minor;
        for (size_t i = 1; i < n; ++i) {
            std::vector<Expr> row;
            for (size_t k = 0; k < n; ++k)
                if (k != j) row.push_back(m[i][k]);
            minor.push_back(std::move(row));
        }
        Expr c = m[0][j] * det_expr(minor);
        d = (j % 2 == 0) ? d + c : d - c;
    }
    return d;
}

} // namespace vessiot
