#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <set>
#include <utility>
#include <vector>

#include "atoms.hpp"
#include "errors.hpp"
#include "expr.hpp"
#include "linalg.hpp"
#include "rng.hpp"

namespace vessiot {

/* Coordinate bookkeeping for one jet bundle: n base directions, m object
 * components, and the total-derivative operator acting on expressions in
 * base coordinates, jet components and object derivatives. */
class JetContext {
public:
    JetContext(int n, int m, int order_cap = 6) : n_(n), m_(m), cap_(order_cap) {
        if (n < 1 || m < 0) throw DimensionMismatch("jet context needs n >= 1, m >= 0");
    }

    int dim() const { return n_; }
    int components() const { return m_; }
    int order_cap() const { return cap_; }

    AtomId x(int i) const {
        check_comp(i, n_);
        return base_coord_atom(i);
    }
    /* |a| = 0 is the target position y^i */
    AtomId jet(int i, const MultiIndex& a) const {
        check_comp(i, n_);
        check_order(a);
        return jet_atom(i, a);
    }
    AtomId obj(int a, const MultiIndex& b, Side s) const {
        check_comp(a, m_);
        check_order(b);
        return obj_atom(a, b, s);
    }

    /* D_k, the formal derivative along base direction k:
     *   D_k x^j            = [j == k]
     *   D_k y^i_a          = y^i_{a+e_k}
     *   D_k w_{a,b}@source = w_{a,b+e_k}@source
     *   D_k w_{a,b}@target = sum_j w_{a,b+e_j}@target * y^j_{e_k}   (chain rule) */
    Expr total_derivative(const Expr& e, int k) const {
        check_comp(k, n_);
        Expr out = Expr::zero();
        for (AtomId a : e.atoms()) {
            Expr pd = e.partial(a);
            if (pd == Expr::zero()) continue;
            out = out + pd * atom_derivative(a, k);
        }
        return out;
    }

    Expr total_derivative(const Expr& e, const MultiIndex& g) const {
        Expr out = e;
        for (int k = 1; k <= g.size(); ++k)
            for (int c = 0; c < g[k]; ++c) out = total_derivative(out, k);
        return out;
    }

private:
    int n_, m_, cap_;

    static void check_comp(int i, int bound) {
        if (i < 1 || i > bound) throw DimensionMismatch("component index out of range");
    }
    void check_order(const MultiIndex& a) const {
        if (a.size() != n_) throw DimensionMismatch("multi-index width mismatch");
        if (a.order() > cap_) throw ResourceLimit("derivative order exceeds the configured cap");
    }

    Expr atom_derivative(AtomId id, int k) const {
        const AtomData& d = atom_data(id);
        switch (d.kind) {
            case AtomKind::BaseCoord:
                return d.comp == k ? Expr::one() : Expr::zero();
            case AtomKind::Jet:
                return Expr::atom(jet(d.comp, d.mi.bumped(k)));
            case AtomKind::ObjDeriv: {
                if (d.side == Side::Source) return Expr::atom(obj(d.comp, d.mi.bumped(k), Side::Source));
                Expr s = Expr::zero();
                for (int j = 1; j <= n_; ++j)
                    s = s + Expr::atom(obj(d.comp, d.mi.bumped(j), Side::Target)) *
                                Expr::atom(jet(j, MultiIndex::unit(n_, k)));
                return s;
            }
        }
        return Expr::zero();
    }
};

/* highest |a| over jet atoms y^i_a occurring in e (0 if none beyond positions) */
inline int jet_order(const Expr& e) {
    int r = 0;
    for (AtomId a : e.atoms()) {
        const AtomData& d = atom_data(a);
        if (d.kind == AtomKind::Jet && d.mi.order() > r) r = d.mi.order();
    }
    return r;
}

inline std::vector<AtomId> jet_atoms_of_order(const Expr& e, int r) {
    std::vector<AtomId> out;
    for (AtomId a : e.atoms()) {
        const AtomData& d = atom_data(a);
        if (d.kind == AtomKind::Jet && d.mi.order() == r) out.push_back(a);
    }
    return out;
}

inline int obj_order(const Expr& e, Side s) {
    int r = 0;
    for (AtomId a : e.atoms()) {
        const AtomData& d = atom_data(a);
        if (d.kind == AtomKind::ObjDeriv && d.side == s && d.mi.order() > r) r = d.mi.order();
    }
    return r;
}

/* affine in its own top-order jet atoms: denominator free of them, and every
 * partial with respect to one of them free of all of them */
inline bool affine_in_top_jets(const Expr& e) {
    int top = jet_order(e);
    if (top == 0) return true;
    auto tops = jet_atoms_of_order(e, top);
    for (AtomId t : tops)
        if (e.den().contains_atom(t)) return false;
    Poly num = e.num();
    for (AtomId t : tops) {
        Poly pd = num.derivative(t);
        for (AtomId u : tops)
            if (pd.contains_atom(u)) return false;
    }
    return true;
}

struct EquationSystem {
    JetContext ctx;
    std::vector<Expr> eqs;  // each understood as lhs = 0

    int order() const {
        int r = 0;
        for (const Expr& e : eqs) r = std::max(r, jet_order(e));
        return r;
    }
};

/* Append all formal derivatives D^g e for 1 <= |g| <= r.  Every equation
 * produced by one application of D_k is affine in the jet atoms of its new
 * top order (the product rule introduces them linearly); this is asserted
 * and a violation reports corrupted input rather than being carried along. */
inline EquationSystem prolong_system(const EquationSystem& s, int r) {
    EquationSystem out = s;
    int n = s.ctx.dim();
    std::map<std::pair<size_t, MultiIndex>, Expr> memo;
    for (size_t i = 0; i < s.eqs.size(); ++i) memo.emplace(std::make_pair(i, MultiIndex::zero(n)), s.eqs[i]);
    for (int grade = 1; grade <= r; ++grade) {
        for (size_t i = 0; i < s.eqs.size(); ++i) {
            for (const MultiIndex& g : multi_indices_exact(n, grade)) {
                int k = 1;
                while (!g.can_lower(k)) ++k;
                const Expr& prev = memo.at(std::make_pair(i, g.lowered(k)));
                Expr d = s.ctx.total_derivative(prev, k);
                if (!affine_in_top_jets(d))
                    throw NonAffineTopOrder("prolonged equation is not affine in its top-order jets");
                memo.emplace(std::make_pair(i, g), d);
                out.eqs.push_back(std::move(d));
            }
        }
    }
    return out;
}

/* A q-jet of a local map at a concrete rational source point.  Components
 * store derivative values (not Taylor coefficients); the order-0 components
 * are the target position. */
struct JetPoint {
    int n = 0;
    int q = 0;
    QVec source;
    std::map<std::pair<int, MultiIndex>, Rat> comp;

    const Rat& value(int i, const MultiIndex& b) const {
        auto it = comp.find(std::make_pair(i, b));
        if (it == comp.end()) throw Error("jet component " + std::to_string(i) + b.to_string() + " not present");
        return it->second;
    }
    void set(int i, const MultiIndex& b, const Rat& v) { comp[std::make_pair(i, b)] = v; }

    QVec target() const {
        QVec t(n);
        for (int i = 1; i <= n; ++i) t[i - 1] = value(i, MultiIndex::zero(n));
        return t;
    }
    QMat linear() const {
        QMat j(n, QVec(n));
        for (int i = 1; i <= n; ++i)
            for (int k = 1; k <= n; ++k) j[i - 1][k - 1] = value(i, MultiIndex::unit(n, k));
        return j;
    }
};

inline JetPoint identity_jet(int n, int q, const QVec& at) {
    if (static_cast<int>(at.size()) != n) throw DimensionMismatch("identity jet: point has wrong width");
    JetPoint p;
    p.n = n;
    p.q = q;
    p.source = at;
    for (int i = 1; i <= n; ++i)
        for (const MultiIndex& b : multi_indices_upto(n, q)) {
            Rat v(0);
            if (b.order() == 0) v = at[i - 1];
            else if (b.order() == 1 && b[i] == 1) v = Rat(1);
            p.set(i, b, v);
        }
    return p;
}

/* uniformly random jet with the given endpoints and an invertible linear part */
inline JetPoint random_jet(Rng& rng, int n, int q, const QVec& src, const QVec& tgt) {
    for (;;) {
        JetPoint p;
        p.n = n;
        p.q = q;
        p.source = src;
        for (int i = 1; i <= n; ++i)
            for (const MultiIndex& b : multi_indices_upto(n, q))
                p.set(i, b, b.order() == 0 ? tgt[i - 1] : rng.rat(3, 2));
        if (det(p.linear()) != 0) return p;
    }
}

/* Symbolic derivatives of a composition g(f(x)), with g's derivative bundle
 * as target-side object atoms and f's jets as jet atoms.  Built once per
 * (n, q) by repeated total differentiation and shared process-wide. */
struct CompositionRule {
    int comp;       // 1-based component of the composite
    MultiIndex mi;  // derivative multi-index
    Expr expr;
};

inline const std::vector<CompositionRule>& composition_rules(int n, int q) {
    static std::mutex mu;
    static std::map<std::pair<int, int>, std::unique_ptr<std::vector<CompositionRule>>> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto key = std::make_pair(n, q);
    auto it = cache.find(key);
    if (it != cache.end()) return *it->second;

    JetContext ctx(n, n, std::max(q, 1));
    auto rules = std::make_unique<std::vector<CompositionRule>>();
    std::map<std::pair<int, MultiIndex>, Expr> memo;
    for (int grade = 0; grade <= q; ++grade) {
        for (int i = 1; i <= n; ++i) {
            for (const MultiIndex& g : multi_indices_exact(n, grade)) {
                Expr e;
                if (grade == 0) {
                    e = Expr::atom(ctx.obj(i, MultiIndex::zero(n), Side::Target));
                } else {
                    int k = 1;
                    while (!g.can_lower(k)) ++k;
                    e = ctx.total_derivative(memo.at(std::make_pair(i, g.lowered(k))), k);
                }
                memo.emplace(std::make_pair(i, g), e);
                rules->push_back({i, g, std::move(e)});
            }
        }
    }
    auto& ref = *rules;
    cache.emplace(key, std::move(rules));
    return ref;
}

/* g after f; requires matching width and order and t(f) = s(g) */
inline JetPoint compose_jets(const JetPoint& g, const JetPoint& f) {
    if (g.n != f.n || g.q != f.q) throw DimensionMismatch("composition of jets with different shapes");
    int n = f.n, q = f.q;
    if (f.target() != g.source) throw SourceTargetMismatch("target of the inner jet differs from source of the outer jet");

    JetContext ctx(n, n, std::max(q, 1));
    std::map<AtomId, Rat> vals;
    for (int i = 1; i <= n; ++i)
        for (const MultiIndex& b : multi_indices_upto(n, q)) {
            vals[ctx.obj(i, b, Side::Target)] = g.value(i, b);
            if (b.order() >= 1) vals[ctx.jet(i, b)] = f.value(i, b);
        }

    JetPoint out;
    out.n = n;
    out.q = q;
    out.source = f.source;
    for (const CompositionRule& r : composition_rules(n, q)) out.set(r.comp, r.mi, r.expr.eval(vals));
    return out;
}

/* Inverse jet, solved order by order.  The composition derivatives are
 * linear in the unknown top-order components of the outer factor, and the
 * coefficient matrix at each order is invertible exactly when the linear
 * part of f is. */
inline JetPoint invert_jet(const JetPoint& f) {
    int n = f.n, q = f.q;
    if (q < 1) throw DimensionMismatch("jet inversion needs order >= 1");
    auto linv = inverse(f.linear());
    if (!linv) throw SingularLinearPart("jet has a singular linear part");

    JetPoint g;
    g.n = n;
    g.q = q;
    g.source = f.target();
    for (int i = 1; i <= n; ++i) g.set(i, MultiIndex::zero(n), f.source[i - 1]);
    if (q >= 1)
        for (int i = 1; i <= n; ++i)
            for (int k = 1; k <= n; ++k) g.set(i, MultiIndex::unit(n, k), (*linv)[i - 1][k - 1]);

    JetContext ctx(n, n, std::max(q, 1));
    const auto& rules = composition_rules(n, q);

    for (int r = 2; r <= q; ++r) {
        auto unknowns = multi_indices_exact(n, r);
        size_t u = unknowns.size();
        // base valuation: f's jets, g's components below order r, unknowns at zero
        std::map<AtomId, Rat> vals;
        for (int i = 1; i <= n; ++i)
            for (const MultiIndex& b : multi_indices_upto(n, q)) {
                if (b.order() >= 1) vals[ctx.jet(i, b)] = f.value(i, b);
                if (b.order() < r) vals[ctx.obj(i, b, Side::Target)] = g.value(i, b);
                else vals[ctx.obj(i, b, Side::Target)] = Rat(0);
            }

        // coefficient matrix is the same for every component, so build it once
        QMat a(u, QVec(u));
        std::vector<const CompositionRule*> order_r_rules_c1;
        for (const CompositionRule& rule : rules)
            if (rule.comp == 1 && rule.mi.order() == r) order_r_rules_c1.push_back(&rule);
        for (size_t row = 0; row < u; ++row)
            for (size_t col = 0; col < u; ++col)
                a[row][col] = order_r_rules_c1[row]->expr.partial(ctx.obj(1, unknowns[col], Side::Target)).eval(vals);

        for (int i = 1; i <= n; ++i) {
            QVec rhs(u);
            size_t row = 0;
            for (const CompositionRule& rule : rules) {
                if (rule.comp != i || rule.mi.order() != r) continue;
                rhs[row++] = -rule.expr.eval(vals);
            }
            auto sol = solve(a, rhs);
            if (!sol) throw SingularLinearPart("inverse jet system is singular");
            for (size_t col = 0; col < u; ++col) g.set(i, unknowns[col], (*sol)[col]);
        }
    }
    return g;
}

} // namespace vessiot
