#pragma once

#include <algorithm>
#include <atomic>
#include <map>
#include <optional>
#include <set>
#include <unordered_map>
#include <vector>

#include "atoms.hpp"
#include "rational.hpp"

namespace vessiot {

/* Soft cap on term counts produced by ring operations. */
inline std::atomic<size_t>& term_cap() {
    static std::atomic<size_t> cap{200000};
    return cap;
}

inline void set_term_cap(size_t n) { term_cap().store(n); }

inline void check_term_budget(size_t n) {
    size_t cap = term_cap().load();
    if (cap && n > cap)
        throw ResourceLimit("term count " + std::to_string(n) + " exceeds cap " + std::to_string(cap));
}

/* Power product over interned atoms; factors sorted by ascending atom id. */
class Monomial {
public:
    using Factor = std::pair<AtomId, int>;

    Monomial() = default;
    explicit Monomial(AtomId a) : f_{{a, 1}} {}

    const std::vector<Factor>& factors() const { return f_; }
    bool empty() const { return f_.empty(); }
    int degree() const {
        int d = 0;
        for (auto& [a, e] : f_) d += e;
        return d;
    }
    int degree_in(AtomId a) const {
        for (auto& [b, e] : f_)
            if (b == a) return e;
        return 0;
    }

    static Monomial mul(const Monomial& x, const Monomial& y) {
        Monomial r;
        r.f_.reserve(x.f_.size() + y.f_.size());
        size_t i = 0, j = 0;
        while (i < x.f_.size() && j < y.f_.size()) {
            if (x.f_[i].first == y.f_[j].first) {
                r.f_.emplace_back(x.f_[i].first, x.f_[i].second + y.f_[j].second);
                ++i, ++j;
            } else if (x.f_[i].first < y.f_[j].first) {
                r.f_.push_back(x.f_[i++]);
            } else {
                r.f_.push_back(y.f_[j++]);
            }
        }
        for (; i < x.f_.size(); ++i) r.f_.push_back(x.f_[i]);
        for (; j < y.f_.size(); ++j) r.f_.push_back(y.f_[j]);
        return r;
    }

    /* copy with the given atom removed entirely */
    Monomial without(AtomId a) const {
        Monomial r;
        r.f_.reserve(f_.size());
        for (auto& [b, e] : f_)
            if (b != a) r.f_.emplace_back(b, e);
        return r;
    }

    bool divides(const Monomial& m) const {
        size_t j = 0;
        for (auto& [a, e] : f_) {
            while (j < m.f_.size() && m.f_[j].first < a) ++j;
            if (j >= m.f_.size() || m.f_[j].first != a || m.f_[j].second < e) return false;
        }
        return true;
    }

    /* m / this, assuming divisibility */
    Monomial divide_from(const Monomial& m) const {
        Monomial r;
        size_t j = 0;
        for (auto& [a, e] : m.f_) {
            int sub = 0;
            while (j < f_.size() && f_[j].first < a) ++j;
            if (j < f_.size() && f_[j].first == a) sub = f_[j].second;
            if (e - sub > 0) r.f_.emplace_back(a, e - sub);
        }
        return r;
    }

    static Monomial gcd(const Monomial& x, const Monomial& y) {
        Monomial r;
        size_t i = 0, j = 0;
        while (i < x.f_.size() && j < y.f_.size()) {
            if (x.f_[i].first == y.f_[j].first) {
                r.f_.emplace_back(x.f_[i].first, std::min(x.f_[i].second, y.f_[j].second));
                ++i, ++j;
            } else if (x.f_[i].first < y.f_[j].first) {
                ++i;
            } else {
                ++j;
            }
        }
        return r;
    }

    /* graded lexicographic; smaller atom id is the more significant position */
    static int compare(const Monomial& x, const Monomial& y) {
        int dx = x.degree(), dy = y.degree();
        if (dx != dy) return dx < dy ? -1 : 1;
        size_t i = 0, j = 0;
        while (i < x.f_.size() && j < y.f_.size()) {
            if (x.f_[i].first != y.f_[j].first)
                // whichever has the smaller atom id has a positive exponent there
                return x.f_[i].first < y.f_[j].first ? 1 : -1;
            if (x.f_[i].second != y.f_[j].second)
                return x.f_[i].second > y.f_[j].second ? 1 : -1;
            ++i, ++j;
        }
        if (i < x.f_.size()) return 1;
        if (j < y.f_.size()) return -1;
        return 0;
    }

    bool operator==(const Monomial& o) const { return f_ == o.f_; }

    size_t hash() const {
        size_t h = 14695981039346656037ull;
        for (auto& [a, e] : f_) {
            h = (h ^ a) * 1099511628211ull;
            h = (h ^ static_cast<size_t>(e)) * 1099511628211ull;
        }
        return h;
    }

    std::string to_string() const {
        if (f_.empty()) return "1";
        std::string s;
        for (size_t i = 0; i < f_.size(); ++i) {
            if (i) s += "*";
            s += atom_name(f_[i].first);
            if (f_[i].second != 1) s += "^" + std::to_string(f_[i].second);
        }
        return s;
    }

private:
    std::vector<Factor> f_;
    friend class Poly;
};

struct Term {
    Monomial mono;
    Rat coef;
};

/* Sparse multivariate polynomial over Q with graded-lex term order,
 * leading term first. Zero is the empty term list. */
class Poly {
public:
    Poly() = default;

    static Poly zero() { return Poly(); }
    static Poly constant(const Rat& c) {
        Poly p;
        if (c != 0) p.t_.push_back({Monomial(), c});
        return p;
    }
    static Poly one() { return constant(Rat(1)); }
    static Poly atom(AtomId a) {
        Poly p;
        p.t_.push_back({Monomial(a), Rat(1)});
        return p;
    }

    const std::vector<Term>& terms() const { return t_; }
    bool is_zero() const { return t_.empty(); }
    bool is_constant() const { return t_.empty() || (t_.size() == 1 && t_[0].mono.empty()); }
    Rat constant_value() const {
        if (t_.empty()) return Rat(0);
        return t_[0].coef;  // valid when is_constant()
    }
    size_t term_count() const { return t_.size(); }
    const Term& leading() const { return t_.front(); }
    int total_degree() const {
        int d = 0;
        for (auto& t : t_) d = std::max(d, t.mono.degree());
        return d;
    }
    int degree_in(AtomId a) const {
        int d = 0;
        for (auto& t : t_) d = std::max(d, t.mono.degree_in(a));
        return d;
    }
    bool contains_atom(AtomId a) const {
        for (auto& t : t_)
            if (t.mono.degree_in(a) > 0) return true;
        return false;
    }
    void collect_atoms(std::set<AtomId>& out) const {
        for (auto& t : t_)
            for (auto& [a, e] : t.mono.factors()) out.insert(a);
    }
    std::set<AtomId> atoms() const {
        std::set<AtomId> s;
        collect_atoms(s);
        return s;
    }

    friend Poly operator-(const Poly& p) {
        Poly r = p;
        for (auto& t : r.t_) t.coef = -t.coef;
        return r;
    }

    friend Poly operator+(const Poly& x, const Poly& y) {
        Poly r;
        r.t_.reserve(x.t_.size() + y.t_.size());
        size_t i = 0, j = 0;
        while (i < x.t_.size() && j < y.t_.size()) {
            int c = Monomial::compare(x.t_[i].mono, y.t_[j].mono);
            if (c > 0) {
                r.t_.push_back(x.t_[i++]);
            } else if (c < 0) {
                r.t_.push_back(y.t_[j++]);
            } else {
                Rat s = x.t_[i].coef + y.t_[j].coef;
                if (s != 0) r.t_.push_back({x.t_[i].mono, s});
                ++i, ++j;
            }
        }
        for (; i < x.t_.size(); ++i) r.t_.push_back(x.t_[i]);
        for (; j < y.t_.size(); ++j) r.t_.push_back(y.t_[j]);
        check_term_budget(r.t_.size());
        return r;
    }

    friend Poly operator-(const Poly& x, const Poly& y) { return x + (-y); }

    friend Poly operator*(const Poly& x, const Poly& y) {
        if (x.is_zero() || y.is_zero()) return Poly();
        if (x.is_constant()) return mul_scalar(y, x.constant_value());
        if (y.is_constant()) return mul_scalar(x, y.constant_value());
        if (x.t_.size() == 1) return mul_term(y, x.t_[0]);
        if (y.t_.size() == 1) return mul_term(x, y.t_[0]);
        struct MH {
            size_t operator()(const Monomial& m) const { return m.hash(); }
        };
        std::unordered_map<Monomial, Rat, MH> acc;
        acc.reserve(x.t_.size() * 2);
        for (auto& a : x.t_)
            for (auto& b : y.t_) {
                Monomial m = Monomial::mul(a.mono, b.mono);
                auto [it, fresh] = acc.try_emplace(std::move(m), Rat(0));
                it->second += a.coef * b.coef;
            }
        Poly r;
        r.t_.reserve(acc.size());
        for (auto& [m, c] : acc)
            if (c != 0) r.t_.push_back({m, c});
        std::sort(r.t_.begin(), r.t_.end(),
                  [](const Term& a, const Term& b) { return Monomial::compare(a.mono, b.mono) > 0; });
        check_term_budget(r.t_.size());
        return r;
    }

    static Poly mul_scalar(const Poly& p, const Rat& c) {
        if (c == 0) return Poly();
        Poly r = p;
        for (auto& t : r.t_) t.coef *= c;
        return r;
    }

    static Poly mul_term(const Poly& p, const Term& t) {
        if (t.coef == 0) return Poly();
        Poly r;
        r.t_.reserve(p.t_.size());
        for (auto& a : p.t_) r.t_.push_back({Monomial::mul(a.mono, t.mono), a.coef * t.coef});
        return r;  // order is preserved by multiplying with a fixed monomial
    }

    Poly pow(int e) const {
        if (e < 0) throw Error("negative exponent on polynomial");
        Poly acc = Poly::one();
        Poly b = *this;
        while (e) {
            if (e & 1) acc = acc * b;
            if (e >>= 1) b = b * b;
        }
        return acc;
    }

    Poly derivative(AtomId a) const {
        Poly r;
        for (auto& t : t_) {
            int e = t.mono.degree_in(a);
            if (e == 0) continue;
            Monomial m;
            for (auto& [b, k] : t.mono.factors()) {
                int nk = (b == a) ? k - 1 : k;
                if (nk > 0) m.f_.emplace_back(b, nk);
            }
            r.t_.push_back({m, t.coef * e});
        }
        std::sort(r.t_.begin(), r.t_.end(),
                  [](const Term& x, const Term& y) { return Monomial::compare(x.mono, y.mono) > 0; });
        return r;
    }

    /* full evaluation; every atom present must be bound */
    Rat eval(const std::map<AtomId, Rat>& vals) const {
        Rat acc(0);
        for (auto& t : t_) {
            Rat v = t.coef;
            for (auto& [a, e] : t.mono.factors()) {
                auto it = vals.find(a);
                if (it == vals.end()) throw UnboundAtom(atom_name(a));
                v *= rat_pow(it->second, e);
            }
            acc += v;
        }
        return acc;
    }

    /* gcd of coefficients (non-negative), zero poly -> 0 */
    Rat content() const {
        Rat g(0);
        for (auto& t : t_) {
            g = rat_gcd(g, t.coef);
            if (g == 1) break;
        }
        return g;
    }

    /* monomial dividing every term */
    Monomial monomial_content() const {
        if (t_.empty()) return Monomial();
        Monomial g = t_[0].mono;
        for (size_t i = 1; i < t_.size() && !g.empty(); ++i) g = Monomial::gcd(g, t_[i].mono);
        return g;
    }

    /* integer-primitive with positive leading coefficient; zero stays zero */
    Poly primitive() const {
        if (is_zero()) return *this;
        Rat c = content();
        if (t_[0].coef < 0) c = -c;
        return mul_scalar(*this, Rat(1) / c);
    }

    /* exact division in the polynomial ring; nullopt when not divisible */
    static std::optional<Poly> divide_exact(const Poly& num, const Poly& den) {
        if (den.is_zero()) throw DivisionByZero("polynomial division by zero");
        if (num.is_zero()) return Poly();
        if (den.is_constant()) return mul_scalar(num, Rat(1) / den.constant_value());
        Poly rem = num;
        std::vector<Term> q;
        const Term& dlead = den.leading();
        while (!rem.is_zero()) {
            const Term& rlead = rem.leading();
            if (!dlead.mono.divides(rlead.mono)) return std::nullopt;
            Term t{dlead.mono.divide_from(rlead.mono), rlead.coef / dlead.coef};
            q.push_back(t);
            rem = rem - mul_term(den, t);
            check_term_budget(rem.t_.size());
        }
        Poly r;
        r.t_ = std::move(q);
        std::sort(r.t_.begin(), r.t_.end(),
                  [](const Term& x, const Term& y) { return Monomial::compare(x.mono, y.mono) > 0; });
        return r;
    }

    bool operator==(const Poly& o) const {
        if (t_.size() != o.t_.size()) return false;
        for (size_t i = 0; i < t_.size(); ++i)
            if (!(t_[i].mono == o.t_[i].mono) || t_[i].coef != o.t_[i].coef) return false;
        return true;
    }
    bool operator!=(const Poly& o) const { return !(*this == o); }

    /* total order compatible with == (used for canonical sorting of outputs) */
    static int compare(const Poly& x, const Poly& y) {
        size_t n = std::min(x.t_.size(), y.t_.size());
        for (size_t i = 0; i < n; ++i) {
            int c = Monomial::compare(x.t_[i].mono, y.t_[i].mono);
            if (c) return c;
            if (x.t_[i].coef != y.t_[i].coef) return x.t_[i].coef < y.t_[i].coef ? -1 : 1;
        }
        if (x.t_.size() != y.t_.size()) return x.t_.size() < y.t_.size() ? -1 : 1;
        return 0;
    }

    std::string to_string() const {
        if (t_.empty()) return "0";
        std::string s;
        for (size_t i = 0; i < t_.size(); ++i) {
            const Rat& c = t_[i].coef;
            if (i) s += c < 0 ? " - " : " + ";
            else if (c < 0) s += "-";
            Rat a = rat_abs(c);
            if (t_[i].mono.empty()) {
                s += rat_to_string(a);
            } else {
                if (a != 1) s += rat_to_string(a) + "*";
                s += t_[i].mono.to_string();
            }
        }
        return s;
    }

    /* direct construction from presorted terms (internal use) */
    static Poly from_sorted_terms(std::vector<Term> ts) {
        Poly p;
        p.t_ = std::move(ts);
        return p;
    }

private:
    std::vector<Term> t_;
};

} // namespace vessiot
