#pragma once
/* Rewrite maps between the two sides of an action law.
 *
 * An invertible first-order law expresses the transformed components in the
 * original ones and the transformation jets.  Totally differentiating that
 * identity gives, order by order, closed-form expressions for every derived
 * component on either side:
 *
 *   - target_rewrites: target-side object jets as rational functions of
 *     source-side object jets and transformation jets (needs the inverse
 *     Jacobian, so entries are genuinely rational),
 *   - transformed_object_jets: source-side object jets pushed through the
 *     law, i.e. the prolonged action map (polynomial whenever the law is).
 *
 * reduce_modulo normalizes a projection condition by eliminating its
 * target-side atoms through the first map.
 *
 * The rewrite recursion and the substitution are carried out on polynomial
 * numerators over a shared multiplicative basis of denominator factors; the
 * one full rational normalization happens at the end.  Running the same
 * computation through general expression arithmetic would grind through a
 * polynomial gcd at every intermediate product.
 */

#include <map>
#include <utility>
#include <vector>

#include "action.hpp"
#include "errors.hpp"
#include "gcd.hpp"
#include "jets.hpp"

namespace vessiot {

namespace reduce_detail {

/* Gauss-Jordan solve of a square symbolic system.  Pivots on the first
 * row whose entry is not identically zero; empty result means the matrix
 * is singular as a matrix of rational functions. */
inline std::vector<Expr> solve_expr(std::vector<std::vector<Expr>> m, std::vector<Expr> rhs) {
    size_t n = m.size();
    for (size_t col = 0; col < n; ++col) {
        size_t sel = n;
        for (size_t r = col; r < n; ++r)
            if (!m[r][col].is_zero()) {
                sel = r;
                break;
            }
        if (sel == n) return {};
        std::swap(m[sel], m[col]);
        std::swap(rhs[sel], rhs[col]);
        Expr piv = m[col][col];
        for (size_t c = col; c < n; ++c) m[col][c] = m[col][c] / piv;
        rhs[col] = rhs[col] / piv;
        for (size_t r = 0; r < n; ++r) {
            if (r == col || m[r][col].is_zero()) continue;
            Expr f = m[r][col];
            for (size_t c = col; c < n; ++c) m[r][c] = m[r][c] - f * m[col][c];
            rhs[r] = rhs[r] - f * rhs[col];
        }
    }
    return rhs;
}

inline bool has_obj_atoms(const Expr& e, Side s) {
    for (AtomId a : e.atoms()) {
        const AtomData& d = atom_data(a);
        if (d.kind == AtomKind::ObjDeriv && d.side == s) return true;
    }
    return false;
}

inline JetContext wide_context(const NaturalBundleAction& a, int r) {
    return JetContext(a.n, a.m, std::max(6, a.q + r + 1));
}

inline Poly det_poly(const std::vector<std::vector<Poly>>& m) {
    size_t n = m.size();
    if (n == 1) return m[0][0];
    Poly out;
    for (size_t j = 0; j < n; ++j) {
        if (m[0][j].is_zero()) continue;
        std::vector<std::vector<Poly>> minor(n - 1, std::vector<Poly>(n - 1));
        for (size_t r = 1; r < n; ++r)
            for (size_t c = 0, w = 0; c < n; ++c)
                if (c != j) minor[r - 1][w++] = m[r][c];
        Poly piece = m[0][j] * det_poly(minor);
        out = (j % 2 == 0) ? out + piece : out - piece;
    }
    return out;
}

/* total derivative on polynomials: every atom rule is itself polynomial,
 * so the quotient rule never enters */
struct PolyDeriv {
    JetContext ctx;
    std::map<std::pair<AtomId, int>, Poly> rules;

    explicit PolyDeriv(const JetContext& c) : ctx(c) {}

    const Poly& rule(AtomId a, int k) {
        auto key = std::make_pair(a, k);
        auto it = rules.find(key);
        if (it != rules.end()) return it->second;
        Expr e = ctx.total_derivative(Expr::atom(a), k);
        return rules.emplace(key, e.num()).first->second;
    }

    Poly operator()(const Poly& p, int k) {
        Poly out;
        for (AtomId a : p.atoms()) {
            const Poly& r = rule(a, k);
            if (r.is_zero()) continue;
            out = out + p.derivative(a) * r;
        }
        return out;
    }
};

/* numerator over a product of shared base factors: num / (cden * prod base^exps) */
struct Factored {
    Poly num;
    Rat cden = Rat(1);
    std::vector<int> exps;
};

struct FactorBase {
    std::vector<Poly> elems;
    size_t trusted = 0;  // leading elems the builder certifies irreducible

    /* express d as cden * prod elems^exps, extending the basis when a
     * non-constant factor is left over */
    std::vector<int> factorize(Poly d, Rat& cden) {
        std::vector<int> e(elems.size(), 0);
        for (size_t i = 0; i < elems.size(); ++i) {
            while (true) {
                auto q = Poly::divide_exact(d, elems[i]);
                if (!q) break;
                d = *q;
                ++e[i];
            }
        }
        if (d.is_constant()) {
            cden = d.constant_value();
            return e;
        }
        Rat c = d.content();
        if (d.leading().coef < 0) c = -c;
        elems.push_back(Poly::mul_scalar(d, Rat(1) / c));
        e.push_back(1);
        cden = c;
        return e;
    }

    /* cancel exact base factors out of the numerator */
    void strip(Factored& f) const {
        for (size_t i = 0; i < f.exps.size(); ++i) {
            while (f.exps[i] > 0) {
                auto q = Poly::divide_exact(f.num, elems[i]);
                if (!q) break;
                f.num = *q;
                --f.exps[i];
            }
        }
        if (f.num.is_zero()) {
            f.exps.assign(f.exps.size(), 0);
            f.cden = Rat(1);
            return;
        }
        Rat c = f.num.content();
        if (c != 0 && c != 1) {
            f.num = Poly::mul_scalar(f.num, Rat(1) / c);
            f.cden = f.cden / c;
        }
    }

    Poly product_range(const std::vector<int>& exps, size_t lo, size_t hi) const {
        Poly p = Poly::one();
        for (size_t i = lo; i < hi && i < exps.size(); ++i)
            for (int c = 0; c < exps[i]; ++c) p = p * elems[i];
        return p;
    }

    static void reduce_pair(Poly& a, Poly& b) {
        if (a.is_constant() || b.is_constant()) return;
        Poly g = poly_gcd(a, b);
        if (g.is_constant()) return;
        a = *Poly::divide_exact(a, g);
        b = *Poly::divide_exact(b, g);
    }

    /* the exact reduced expression fn / fd.  Stripping already makes each
     * numerator coprime to every trusted irreducible factor, so only the
     * numerator pair and the untrusted leftover factors need real gcds. */
    Expr finalize_ratio(Factored fn, Factored fd) const {
        if (fd.num.is_zero()) throw IdenticallyZeroDenominator();
        strip(fn);
        strip(fd);
        if (fn.num.is_zero()) return Expr::zero();
        size_t nb = elems.size();
        fn.exps.resize(nb, 0);
        fd.exps.resize(nb, 0);
        for (size_t i = 0; i < nb; ++i) {
            int c = std::min(fn.exps[i], fd.exps[i]);
            fn.exps[i] -= c;
            fd.exps[i] -= c;
        }
        Poly unt_n = product_range(fn.exps, trusted, nb);
        Poly unt_d = product_range(fd.exps, trusted, nb);
        reduce_pair(fn.num, fd.num);
        reduce_pair(fn.num, unt_n);
        reduce_pair(unt_d, fd.num);
        reduce_pair(unt_d, unt_n);
        Poly num = fn.num * unt_d * product_range(fd.exps, 0, trusted);
        Poly den = fd.num * unt_n * product_range(fn.exps, 0, trusted);
        return Expr::ratio_coprime(Poly::mul_scalar(num, fd.cden / fn.cden), den);
    }

    Expr finalize(Factored f) const {
        Factored one;
        one.num = Poly::one();
        return finalize_ratio(std::move(f), std::move(one));
    }
};

/* Builds the target-side rewrites in factored form and substitutes them.
 * Order 0 solves the law itself; each higher order applies the chain rule
 * through the adjugate of the transformation Jacobian. */
struct RewriteEngine {
    JetContext ctx;
    int n, m;
    FactorBase base;
    PolyDeriv deriv;
    std::map<AtomId, Factored> rw;
    std::vector<int> detj_exps;
    Rat detj_cden = Rat(1);
    std::vector<std::vector<Poly>> adj;
    int built = -1;

    RewriteEngine(const NaturalBundleAction& a, int r) : ctx(wide_context(a, r)), n(a.n), m(a.m), deriv(ctx) {
        MultiIndex z = MultiIndex::zero(n);

        std::vector<std::vector<Poly>> jac(n, std::vector<Poly>(n));
        for (int k = 1; k <= n; ++k)
            for (int j = 1; j <= n; ++j) jac[k - 1][j - 1] = Poly::atom(ctx.jet(j, MultiIndex::unit(n, k)));
        /* the determinant of a matrix of distinct variables is irreducible */
        base.elems.push_back(normalized(det_poly(jac)));
        base.trusted = 1;

        std::vector<std::vector<Expr>> coef(m, std::vector<Expr>(m));
        std::vector<Expr> rhs(m);
        for (int b = 1; b <= m; ++b) {
            const Expr& law = a.law[b - 1];
            std::map<AtomId, Expr> drop;
            for (int c = 1; c <= m; ++c) {
                AtomId u = ctx.obj(c, z, Side::Target);
                Expr pd = law.partial(u);
                if (has_obj_atoms(pd, Side::Target) || has_obj_atoms(pd, Side::Source))
                    throw ReductionFailed("law is not affine in the transformed components");
                coef[b - 1][c - 1] = pd;
                drop[u] = Expr::zero();
            }
            rhs[b - 1] = Expr::atom(ctx.obj(b, z, Side::Source)) - law.substitute(drop);
        }
        std::vector<Expr> sol = solve_expr(coef, rhs);
        if (sol.empty()) throw ReductionFailed("law cannot be solved for the transformed components");
        for (int b = 1; b <= m; ++b) {
            Factored f;
            f.num = sol[b - 1].num();
            f.exps = base.factorize(sol[b - 1].den(), f.cden);
            base.strip(f);
            rw.emplace(ctx.obj(b, z, Side::Target), std::move(f));
        }
        built = 0;
        if (r == 0) {
            pad();
            return;
        }

        /* adjugate: jac * adj = det * id, with jac[k][j] the derivative of
         * the j-th target coordinate in the k-th direction */
        adj.assign(n, std::vector<Poly>(n));
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k) {
                if (n == 1) {
                    adj[j][k] = Poly::one();
                    continue;
                }
                std::vector<std::vector<Poly>> minor(n - 1, std::vector<Poly>(n - 1));
                for (int r2 = 0, rr = 0; r2 < n; ++r2) {
                    if (r2 == k) continue;
                    for (int c2 = 0, cc = 0; c2 < n; ++c2)
                        if (c2 != j) minor[rr][cc++] = jac[r2][c2];
                    ++rr;
                }
                Poly cof = det_poly(minor);
                adj[j][k] = ((j + k) % 2 == 0) ? cof : -cof;
            }
        detj_exps = base.factorize(base.elems[0], detj_cden);

        for (int g = 1; g <= r; ++g) extend();
        pad();
    }

    static Poly normalized(Poly p) {
        Rat c = p.content();
        if (p.leading().coef < 0) c = -c;
        return Poly::mul_scalar(p, Rat(1) / c);
    }

    void pad() {
        for (auto& [a, f] : rw) f.exps.resize(base.elems.size(), 0);
        detj_exps.resize(base.elems.size(), 0);
    }

    /* chain rule in factored form; no reductions besides exact strips */
    Factored derivative(const Factored& f, int k) {
        Factored out;
        out.cden = f.cden;
        out.exps = f.exps;
        Poly prod_active = Poly::one();
        for (size_t i = 0; i < f.exps.size(); ++i)
            if (f.exps[i] > 0) {
                prod_active = prod_active * base.elems[i];
                ++out.exps[i];
            }
        Poly acc = deriv(f.num, k) * prod_active;
        for (size_t i = 0; i < f.exps.size(); ++i) {
            if (f.exps[i] == 0) continue;
            Poly db = deriv(base.elems[i], k);
            if (db.is_zero()) continue;
            Poly rest = Poly::constant(Rat(f.exps[i]));
            for (size_t j = 0; j < f.exps.size(); ++j)
                if (f.exps[j] > 0 && j != i) rest = rest * base.elems[j];
            acc = acc - f.num * db * rest;
        }
        out.num = acc;
        return out;
    }

    void extend() {
        int g = ++built;
        for (const MultiIndex& parent : multi_indices_exact(n, g - 1)) {
            for (int b = 1; b <= m; ++b) {
                const Factored& f = rw.at(ctx.obj(b, parent, Side::Target));
                std::vector<Factored> d(n);
                for (int k = 1; k <= n; ++k) d[k - 1] = derivative(f, k);
                for (int j = 1; j <= n; ++j) {
                    AtomId child = ctx.obj(b, parent.bumped(j), Side::Target);
                    if (rw.count(child)) continue;
                    Factored v;
                    v.num = Poly::zero();
                    for (int k = 0; k < n; ++k) v.num = v.num + adj[j - 1][k] * d[k].num;
                    v.cden = d[0].cden * detj_cden;
                    v.exps = d[0].exps;
                    v.exps.resize(std::max(v.exps.size(), detj_exps.size()), 0);
                    for (size_t i = 0; i < detj_exps.size(); ++i) v.exps[i] += detj_exps[i];
                    base.strip(v);
                    rw.emplace(child, std::move(v));
                }
            }
        }
    }

    /* substitution of the rewrites into a polynomial, grouped by the
     * rewritten part of each monomial so shared products are formed once */
    Factored subst_poly(const Poly& p) {
        struct MonoLess {
            bool operator()(const Monomial& a, const Monomial& b) const { return Monomial::compare(a, b) < 0; }
        };
        std::map<Monomial, std::vector<Term>, MonoLess> groups;
        for (const Term& t : p.terms()) {
            Monomial sub, kept;
            for (auto& [a, e] : t.mono.factors()) {
                Monomial& dst = rw.count(a) ? sub : kept;
                for (int i = 0; i < e; ++i) dst = Monomial::mul(dst, Monomial(a));
            }
            groups[sub].push_back({kept, t.coef});
        }
        std::map<std::pair<AtomId, int>, Poly> powers;
        auto power = [&](AtomId a, int e) -> const Poly& {
            auto it = powers.find({a, e});
            if (it != powers.end()) return it->second;
            Poly r = Poly::one();
            for (int i = 0; i < e; ++i) r = r * rw.at(a).num;
            return powers.emplace(std::make_pair(a, e), std::move(r)).first->second;
        };
        size_t nb = base.elems.size();
        std::vector<Poly> nums;
        std::vector<std::vector<int>> exps;
        std::vector<int> top(nb, 0);
        for (auto& [sub, terms] : groups) {
            Poly prod = Poly::one();
            std::vector<int> e(nb, 0);
            Rat cden(1);
            for (auto& [a, k] : sub.factors()) {
                const Factored& f = rw.at(a);
                prod = prod * power(a, k);
                for (size_t i = 0; i < nb; ++i) e[i] += k * f.exps[i];
                for (int c = 0; c < k; ++c) cden = cden * f.cden;
            }
            std::vector<Term> sorted = terms;
            std::sort(sorted.begin(), sorted.end(),
                      [](const Term& x, const Term& y) { return Monomial::compare(x.mono, y.mono) > 0; });
            for (auto& t : sorted) t.coef = t.coef / cden;
            prod = prod * Poly::from_sorted_terms(std::move(sorted));
            for (size_t i = 0; i < nb; ++i) top[i] = std::max(top[i], e[i]);
            nums.push_back(std::move(prod));
            exps.push_back(std::move(e));
        }
        Factored out;
        out.exps = top;
        Poly acc;
        for (size_t t = 0; t < nums.size(); ++t) {
            Poly scale = Poly::one();
            for (size_t i = 0; i < nb; ++i)
                for (int c = 0; c < top[i] - exps[t][i]; ++c) scale = scale * base.elems[i];
            acc = acc + nums[t] * scale;
        }
        out.num = acc;
        base.strip(out);
        return out;
    }

    Expr substitute(const Expr& e) {
        Factored fn = subst_poly(e.num());
        if (fn.num.is_zero()) return Expr::zero();
        Factored fd = subst_poly(e.den());
        return base.finalize_ratio(std::move(fn), std::move(fd));
    }
};

} // namespace reduce_detail

/* Expressions for every target-side object jet of order <= r in source-side
 * object jets and transformation jets.  Order 0 solves the law itself for the
 * target components (the coefficient matrix must be free of object atoms,
 * i.e. the law affine in them, and symbolically invertible).  Higher orders
 * follow the chain rule: the total derivative of a known rewrite equals the
 * Jacobian contracted with the next-order unknowns, so the adjugate of one
 * Jacobian drives the whole recursion.  Each jet is assigned exactly once,
 * walking parents in graded enumeration order; the total-derivative relations
 * for the remaining parents then hold identically. */
inline std::map<AtomId, Expr> target_rewrites(const NaturalBundleAction& a, int r) {
    reduce_detail::RewriteEngine eng(a, r);
    std::map<AtomId, Expr> out;
    for (auto& [atom, f] : eng.rw) out.emplace(atom, eng.base.finalize(f));
    return out;
}

/* Normal form of a projection condition modulo the order-q system: each
 * target-side object atom the system determines is replaced by its rewrite.
 * A system of order q pins down target jets up to order q minus the action
 * order; higher target atoms are new unknowns of the next prolongation and
 * stay put, which is what keeps a genuine obstruction from being rewritten
 * into a tautology.  Conditions without target-side atoms are already
 * normal; members of the ideal of the system itself collapse to zero. */
inline Expr reduce_modulo(const Expr& cond, const EquationSystem& s_q, const NaturalBundleAction& a) {
    if (s_q.ctx.dim() != a.n || s_q.ctx.components() != a.m)
        throw DimensionMismatch("system context does not match the action");
    if (!reduce_detail::has_obj_atoms(cond, Side::Target)) return cond;
    int bound = s_q.order() - a.q;
    if (bound < 0) return cond;
    int g = std::min(bound, obj_order(cond, Side::Target));
    reduce_detail::RewriteEngine eng(a, g);
    return eng.substitute(cond);
}

/* The prolonged action map: source-side object jets of order <= r written in
 * target-side object jets and transformation jets.  Order 0 is the law; the
 * source-side chain rule is trivial, so each child is just a total derivative
 * of its parent.  Total derivatives commute, making the first-parent walk
 * path-independent. */
inline std::map<AtomId, Expr> transformed_object_jets(const NaturalBundleAction& a, int r) {
    JetContext c = reduce_detail::wide_context(a, r);
    int n = a.n, m = a.m;
    std::map<AtomId, Expr> out;
    for (int b = 1; b <= m; ++b) out.emplace(c.obj(b, MultiIndex::zero(n), Side::Source), a.law[b - 1]);
    for (int g = 1; g <= r; ++g) {
        for (const MultiIndex& parent : multi_indices_exact(n, g - 1)) {
            for (int b = 1; b <= m; ++b) {
                const Expr& known = out.at(c.obj(b, parent, Side::Source));
                for (int k = 1; k <= n; ++k) {
                    AtomId child = c.obj(b, parent.bumped(k), Side::Source);
                    if (out.count(child)) continue;
                    out.emplace(child, c.total_derivative(known, k));
                }
            }
        }
    }
    return out;
}

} // namespace vessiot
