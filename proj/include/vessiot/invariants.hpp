#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "action.hpp"
#include "reduce.hpp"

/* Separation of integrability conditions into differential invariants.
 *
 * A reduced condition that genuinely says "some function of the object takes
 * the same value at source and target" factors as  M * (Inv at x - Inv at y)
 * with M free of top-order object atoms.  Recovering Inv = NUM / DEN:
 *
 *   1. freeze the jets at the identity; lower-order target atoms collapse
 *      onto their source partners and only top-order atoms of the two sides
 *      survive, each entering affinely;
 *   2. the slice must vanish when every remaining target atom is renamed to
 *      its source partner (the separability certificate);
 *   3. the x-side coefficients, stripped of their common factor, yield the
 *      primitive top-order part of NUM;
 *   4. the cofactor of that part and the lower-order completion of NUM are
 *      fixed by linear algebra: NUM must be annihilated by the derivatives
 *      of the prolonged action along every jet direction at the identity.
 *      The diagonal directions act by integer weights instead, so the search
 *      runs inside one weight-homogeneous class at a time;
 *   5. DEN is a matching-weight polynomial in the lower-order atoms that is
 *      annihilated by the same derivations;
 *   6. each candidate is verified twice: against the full prolonged action,
 *      and against the condition it came from.  Any failure returns the raw
 *      condition marked unseparated instead of a guess.
 */

namespace vessiot {

/* one separated condition: invariant(source object) = free constant */
struct StructureEquation {
    Expr invariant;            // in source-side object atoms only
    std::string constant;      // name of the free constant, "c1", "c2", ...
    Expr condition;            // the reduced condition it separates
    std::optional<Rat> value;  // filled when evaluated on a concrete object
};

struct VessiotReport {
    std::vector<StructureEquation> equations;
    std::vector<Expr> unseparated;  // reduced conditions that resisted separation

    std::vector<Expr> invariants() const {
        std::vector<Expr> v;
        v.reserve(equations.size());
        for (const auto& e : equations) v.push_back(e.invariant);
        return v;
    }
};

inline bool check_invariance(const Expr& inv, const NaturalBundleAction& a);

namespace inv_detail {

inline Monomial monomial_power(AtomId a, int e) {
    Monomial m;
    for (int i = 0; i < e; ++i) m = Monomial::mul(m, Monomial(a));
    return m;
}

inline Poly rebuild_terms(std::vector<Term> ts) {
    std::sort(ts.begin(), ts.end(),
              [](const Term& x, const Term& y) { return Monomial::compare(x.mono, y.mono) > 0; });
    std::vector<Term> out;
    for (auto& t : ts) {
        if (!out.empty() && Monomial::compare(out.back().mono, t.mono) == 0) {
            out.back().coef += t.coef;
            if (out.back().coef == 0) out.pop_back();
        } else if (t.coef != 0) {
            out.push_back(std::move(t));
        }
    }
    return Poly::from_sorted_terms(std::move(out));
}

/* partial evaluation: bound atoms become numbers, the rest stay symbolic */
inline Poly eval_atoms(const Poly& p, const std::map<AtomId, Rat>& vals) {
    std::vector<Term> ts;
    ts.reserve(p.terms().size());
    for (const Term& t : p.terms()) {
        Rat c = t.coef;
        Monomial m;
        for (const auto& [a, e] : t.mono.factors()) {
            auto it = vals.find(a);
            if (it == vals.end())
                m = Monomial::mul(m, monomial_power(a, e));
            else
                c *= rat_pow(it->second, e);
        }
        if (c != 0) ts.push_back({std::move(m), std::move(c)});
    }
    return rebuild_terms(std::move(ts));
}

inline Poly rename_atoms(const Poly& p, const std::map<AtomId, AtomId>& ren) {
    std::vector<Term> ts;
    ts.reserve(p.terms().size());
    for (const Term& t : p.terms()) {
        Monomial m;
        for (const auto& [a, e] : t.mono.factors()) {
            auto it = ren.find(a);
            m = Monomial::mul(m, monomial_power(it == ren.end() ? a : it->second, e));
        }
        ts.push_back({std::move(m), t.coef});
    }
    return rebuild_terms(std::move(ts));
}

/* derivation of the polynomial algebra determined by its values on atoms;
 * atoms without an image are annihilated */
struct Derivation {
    std::map<AtomId, Poly> images;

    Poly apply(const Poly& p) const {
        Poly acc;
        for (const Term& t : p.terms()) {
            for (const auto& [a, e] : t.mono.factors()) {
                auto it = images.find(a);
                if (it == images.end()) continue;
                Monomial rest;
                for (const auto& [b, k] : t.mono.factors())
                    rest = Monomial::mul(rest, monomial_power(b, b == a ? k - 1 : k));
                acc = acc + Poly::mul_term(it->second, {rest, t.coef * e});
            }
        }
        return acc;
    }
};

using Weight = std::vector<Rat>;

/* weight of a monomial over weighted atoms; nullopt when some atom has none */
inline std::optional<Weight> monomial_weight(const Monomial& m, const std::map<AtomId, Weight>& w, int n) {
    Weight acc(n, Rat(0));
    for (const auto& [a, e] : m.factors()) {
        auto it = w.find(a);
        if (it == w.end()) return std::nullopt;
        for (int j = 0; j < n; ++j) acc[j] += it->second[j] * e;
    }
    return acc;
}

inline std::optional<Weight> poly_weight(const Poly& p, const std::map<AtomId, Weight>& w, int n) {
    std::optional<Weight> acc;
    for (const Term& t : p.terms()) {
        auto mw = monomial_weight(t.mono, w, n);
        if (!mw) return std::nullopt;
        if (!acc)
            acc = mw;
        else if (*acc != *mw)
            return std::nullopt;  // not homogeneous
    }
    return acc ? acc : std::optional<Weight>(Weight(n, Rat(0)));
}

/* all monomials of degree <= cap over an ordered atom list, by total degree,
 * then by exponent tuple with the leading slots filled first */
inline std::vector<Monomial> monomials_upto(const std::vector<AtomId>& atoms, int cap) {
    std::vector<Monomial> out;
    int n = static_cast<int>(atoms.size());
    std::vector<int> e(std::max(n, 1), 0);
    for (int deg = 0; deg <= cap; ++deg) {
        if (n == 0) {
            if (deg == 0) out.emplace_back();
            continue;
        }
        auto rec = [&](auto&& self, int pos, int rem) -> void {
            if (pos == n - 1) {
                e[pos] = rem;
                Monomial m;
                for (int i = 0; i < n; ++i) m = Monomial::mul(m, monomial_power(atoms[i], e[i]));
                out.push_back(m);
                return;
            }
            for (int v = rem; v >= 0; --v) {
                e[pos] = v;
                self(self, pos + 1, rem - v);
            }
        };
        rec(rec, 0, deg);
    }
    return out;
}

/* kernel of a rational matrix given row by row; early exit at full rank.
 * Rows are reduced against an accumulated echelon form, so the basis of the
 * kernel is deterministic in the column order. */
class KernelSolver {
public:
    explicit KernelSolver(int ncols) : ncols_(ncols), pivot_of_col_(ncols, -1) {}

    void add_row(std::vector<Rat> row) {
        if (full_rank()) return;
        for (size_t r = 0; r < rows_.size(); ++r) {
            Rat f = row[pivots_[r]];  // by value: the loop below writes row[pivots_[r]]
            if (f == 0) continue;
            for (int c = 0; c < ncols_; ++c) row[c] -= f * rows_[r][c];
        }
        int p = -1;
        for (int c = 0; c < ncols_; ++c)
            if (row[c] != 0) {
                p = c;
                break;
            }
        if (p < 0) return;
        Rat lead = row[p];
        for (int c = 0; c < ncols_; ++c) row[c] /= lead;
        for (size_t r = 0; r < rows_.size(); ++r) {
            Rat f = rows_[r][p];  // by value: the loop below writes rows_[r][p]
            if (f == 0) continue;
            for (int c = 0; c < ncols_; ++c) rows_[r][c] -= f * row[c];
        }
        pivot_of_col_[p] = static_cast<int>(rows_.size());
        pivots_.push_back(p);
        rows_.push_back(std::move(row));
    }

    bool full_rank() const { return static_cast<int>(rows_.size()) == ncols_; }

    std::vector<std::vector<Rat>> kernel() const {
        std::vector<std::vector<Rat>> basis;
        for (int f = 0; f < ncols_; ++f) {
            if (pivot_of_col_[f] >= 0) continue;
            std::vector<Rat> v(ncols_, Rat(0));
            v[f] = 1;
            for (size_t r = 0; r < rows_.size(); ++r) v[pivots_[r]] = -rows_[r][f];
            basis.push_back(std::move(v));
        }
        return basis;
    }

private:
    int ncols_;
    std::vector<int> pivot_of_col_;
    std::vector<int> pivots_;
    std::vector<std::vector<Rat>> rows_;
};

/* jet values of the identity transformation, for every jet atom of order
 * 1..cap: the linear part is the unit matrix, higher parts vanish */
inline std::map<AtomId, Rat> identity_jet_values(int n, int cap) {
    std::map<AtomId, Rat> vals;
    for (int g = 1; g <= cap; ++g)
        for (const MultiIndex& al : multi_indices_exact(n, g))
            for (int i = 1; i <= n; ++i)
                vals[jet_atom(i, al)] = (g == 1 && al[i] == 1) ? Rat(1) : Rat(0);
    return vals;
}

struct ActionDerivations {
    bool usable = false;
    std::vector<Derivation> nilpotent;       // must annihilate invariant numerators
    std::map<AtomId, Weight> weights;        // diagonal scaling weights per atom
    std::map<AtomId, Poly> forward;          // source atom -> polynomial action image
    std::map<AtomId, AtomId> to_target;      // source atom -> matching target atom
};

/* derivatives of the prolonged action along each jet direction, evaluated at
 * the identity and written back in source atoms */
inline ActionDerivations build_derivations(const NaturalBundleAction& a, int d) {
    ActionDerivations out;
    int n = a.n;
    std::map<AtomId, Expr> fwd = transformed_object_jets(a, d);
    std::map<AtomId, AtomId> rename;
    for (int k = 0; k <= d; ++k)
        for (const MultiIndex& be : multi_indices_exact(n, k))
            for (int b = 1; b <= a.m; ++b) {
                rename[obj_atom(b, be, Side::Target)] = obj_atom(b, be, Side::Source);
                out.to_target[obj_atom(b, be, Side::Source)] = obj_atom(b, be, Side::Target);
            }

    std::map<AtomId, Poly> fpoly;
    for (const auto& [atom, e] : fwd) {
        if (!e.den().is_constant()) return out;  // rational law: no polynomial model
        fpoly[atom] = Poly::mul_scalar(e.num(), Rat(1) / e.den().constant_value());
    }
    out.forward = fpoly;

    std::map<AtomId, Rat> idvals = identity_jet_values(n, d + a.q);

    std::vector<std::pair<AtomId, int>> cartan;  // diagonal first-order directions
    std::vector<AtomId> nil_dirs;
    for (int g = 1; g <= d + a.q; ++g)
        for (const MultiIndex& al : multi_indices_exact(n, g))
            for (int j = 1; j <= n; ++j) {
                AtomId h = jet_atom(j, al);
                if (g == 1 && al[j] == 1)
                    cartan.emplace_back(h, j);
                else
                    nil_dirs.push_back(h);
            }

    auto image = [&](const Poly& t, AtomId h) {
        return rename_atoms(eval_atoms(t.derivative(h), idvals), rename);
    };

    for (AtomId h : nil_dirs) {
        Derivation v;
        for (const auto& [atom, t] : fpoly) {
            Poly img = image(t, h);
            if (!img.is_zero()) v.images.emplace(atom, std::move(img));
        }
        if (!v.images.empty()) out.nilpotent.push_back(std::move(v));
    }

    /* the diagonal directions must act diagonally on every atom */
    std::map<AtomId, Weight> w;
    for (const auto& [atom, t] : fpoly) w[atom] = Weight(n, Rat(0));
    for (const auto& [h, j] : cartan) {
        for (const auto& [atom, t] : fpoly) {
            Poly img = image(t, h);
            if (img.is_zero()) continue;
            if (img.term_count() != 1 || !(img.leading().mono == Monomial(atom))) return out;
            w[atom][j - 1] = img.leading().coef;
        }
    }
    out.weights = std::move(w);
    out.usable = true;
    return out;
}

struct Separation {
    bool ok = false;
    Expr inv;
};

/* verification half 2: the condition must be a top-order-free multiple of
 * (Inv at x) - (Inv at y) modulo the lower system */
inline bool matches_condition(const Expr& inv, const Expr& cond, const EquationSystem& s_q,
                              const NaturalBundleAction& a, const std::set<AtomId>& tops,
                              const std::map<AtomId, AtomId>& to_target) {
    Expr at_target = Expr::ratio_coprime(rename_atoms(inv.num(), to_target),
                                         rename_atoms(inv.den(), to_target));
    Expr diff = inv - reduce_modulo(at_target, s_q, a);
    if (diff.is_zero()) return false;
    Expr ratio = cond / diff;
    if (ratio.is_zero()) return false;
    for (AtomId at : ratio.atoms())
        if (tops.count(at)) return false;
    return true;
}

inline Separation separate(const Expr& cond, const EquationSystem& s_q, const NaturalBundleAction& a) {
    const int n = a.n;
    const int m = a.m;

    for (AtomId at : cond.atoms())
        if (atom_data(at).kind == AtomKind::BaseCoord) return {};

    int d = std::max(obj_order(cond, Side::Source), obj_order(cond, Side::Target));

    /* identity-jet slice */
    std::map<AtomId, Rat> idvals = identity_jet_values(n, std::max(jet_order(cond), 1));
    Poly c0n = eval_atoms(cond.num(), idvals);
    Poly c0d = eval_atoms(cond.den(), idvals);
    if (c0d.is_zero()) return {};
    Expr c0 = Expr::ratio(c0n, c0d);

    std::vector<AtomId> tops_x, tops_y;
    for (const MultiIndex& be : multi_indices_exact(n, d))
        for (int b = 1; b <= m; ++b) {
            tops_x.push_back(obj_atom(b, be, Side::Source));
            tops_y.push_back(obj_atom(b, be, Side::Target));
        }
    std::set<AtomId> top_set(tops_x.begin(), tops_x.end());
    top_set.insert(tops_y.begin(), tops_y.end());

    /* affine coefficients on the x side */
    std::vector<Expr> mco(tops_x.size());
    bool any = false;
    for (size_t i = 0; i < tops_x.size(); ++i) {
        mco[i] = c0.partial(tops_x[i]);
        if (mco[i].is_zero()) continue;
        any = true;
        for (AtomId at : mco[i].atoms())
            if (top_set.count(at)) return {};  // not affine in the top order
    }
    if (!any) return {};

    /* separability certificate: the slice dies on the diagonal */
    {
        std::map<AtomId, Expr> diag;
        for (size_t i = 0; i < tops_y.size(); ++i) diag.emplace(tops_y[i], Expr::atom(tops_x[i]));
        if (!c0.substitute(diag).is_zero()) return {};
    }

    /* primitive top-order part: strip the common factor of the coefficients */
    Poly nstar, dstar = Poly::one();
    for (const Expr& c : mco) {
        if (c.is_zero()) continue;
        nstar = nstar.is_zero() ? c.num() : poly_gcd(nstar, c.num());
        Poly g = poly_gcd(dstar, c.den());
        auto q = Poly::divide_exact(c.den(), g);
        dstar = dstar * *q;
    }
    std::vector<Poly> khat(tops_x.size());
    {
        Rat cont(0);
        for (size_t i = 0; i < tops_x.size(); ++i) {
            if (mco[i].is_zero()) continue;
            auto qn = Poly::divide_exact(mco[i].num(), nstar);
            auto qd = Poly::divide_exact(dstar, mco[i].den());
            if (!qn || !qd) return {};
            khat[i] = *qn * *qd;
        }
        Poly g;
        for (const Poly& k : khat)
            if (!k.is_zero()) g = g.is_zero() ? k : poly_gcd(g, k);
        if (g.is_zero()) return {};
        for (auto& k : khat)
            if (!k.is_zero()) k = *Poly::divide_exact(k, g);
        for (const Poly& k : khat) cont = rat_gcd(cont, k.content());
        bool flip = false;
        for (const Poly& k : khat)
            if (!k.is_zero()) {
                flip = k.leading().coef < 0;
                break;
            }
        if (flip) cont = -cont;
        for (auto& k : khat) k = Poly::mul_scalar(k, Rat(1) / cont);
    }
    Poly that;
    for (size_t i = 0; i < tops_x.size(); ++i)
        if (!khat[i].is_zero()) that = that + Poly::mul_term(khat[i], {Monomial(tops_x[i]), Rat(1)});

    ActionDerivations der = build_derivations(a, d);
    if (!der.usable) return {};

    auto wt = poly_weight(that, der.weights, n);
    if (!wt) return {};

    std::vector<AtomId> low;
    for (int k = 0; k < d; ++k)
        for (const MultiIndex& be : multi_indices_exact(n, k))
            for (int b = 1; b <= m; ++b) low.push_back(obj_atom(b, be, Side::Source));

    std::vector<Poly> vthat(der.nilpotent.size());
    for (size_t i = 0; i < der.nilpotent.size(); ++i) vthat[i] = der.nilpotent[i].apply(that);

    struct MonoLess {
        bool operator()(const Monomial& x, const Monomial& y) const { return Monomial::compare(x, y) < 0; }
    };

    /* kernel of the nilpotent derivations on a given candidate span; columns
     * are pairs (polynomial, its derivation images) */
    auto solve_span = [&](const std::vector<std::vector<Poly>>& col_imgs) {
        int ncols = static_cast<int>(col_imgs.size());
        KernelSolver ks(ncols);
        for (size_t vi = 0; vi < der.nilpotent.size() && !ks.full_rank(); ++vi) {
            std::map<Monomial, std::vector<Rat>, MonoLess> rows;
            for (int c = 0; c < ncols; ++c)
                for (const Term& t : col_imgs[c][vi].terms()) {
                    auto [it, fresh] = rows.try_emplace(t.mono, std::vector<Rat>(ncols, Rat(0)));
                    it->second[c] = t.coef;
                }
            for (auto& [mono, row] : rows) ks.add_row(std::move(row));
        }
        return ks.kernel();
    };

    static const std::pair<int, int> ladder[] = {{0, 1}, {1, 2}, {2, 3}, {2, 4}, {3, 4}, {3, 5}};
    constexpr int col_cap = 400;

    for (const auto& [d1, d2] : ladder) {
        std::vector<Monomial> m1 = monomials_upto(low, d1);
        std::vector<Monomial> m2 = monomials_upto(low, d2);

        std::vector<Weight> targets;
        for (const Monomial& mo : m1) {
            auto mw = monomial_weight(mo, der.weights, n);
            if (!mw) continue;
            Weight cand(*wt);
            for (int j = 0; j < n; ++j) cand[j] += (*mw)[j];
            if (std::find(targets.begin(), targets.end(), cand) == targets.end()) targets.push_back(cand);
        }
        std::sort(targets.begin(), targets.end());

        for (const Weight& wbar : targets) {
            std::vector<Monomial> sig, tau;
            for (const Monomial& mo : m1) {
                auto mw = monomial_weight(mo, der.weights, n);
                if (!mw) continue;
                bool match = true;
                for (int j = 0; j < n; ++j)
                    if ((*mw)[j] + (*wt)[j] != wbar[j]) match = false;
                if (match) sig.push_back(mo);
            }
            for (const Monomial& mo : m2) {
                auto mw = monomial_weight(mo, der.weights, n);
                if (mw && *mw == wbar) tau.push_back(mo);
            }
            if (sig.empty()) continue;
            int ncols = static_cast<int>(sig.size() + tau.size());
            if (ncols > col_cap) continue;

            std::vector<std::vector<Poly>> cols;
            cols.reserve(ncols);
            for (const Monomial& mo : sig) {
                Poly mp = Poly::from_sorted_terms({{mo, Rat(1)}});
                std::vector<Poly> imgs(der.nilpotent.size());
                for (size_t vi = 0; vi < der.nilpotent.size(); ++vi)
                    imgs[vi] = vthat[vi] * mp + that * der.nilpotent[vi].apply(mp);
                cols.push_back(std::move(imgs));
            }
            for (const Monomial& mo : tau) {
                Poly mp = Poly::from_sorted_terms({{mo, Rat(1)}});
                std::vector<Poly> imgs(der.nilpotent.size());
                for (size_t vi = 0; vi < der.nilpotent.size(); ++vi)
                    imgs[vi] = der.nilpotent[vi].apply(mp);
                cols.push_back(std::move(imgs));
            }

            for (const auto& sol : solve_span(cols)) {
                Poly sig1, taup;
                for (size_t i = 0; i < sig.size(); ++i)
                    if (sol[i] != 0) sig1 = sig1 + Poly::from_sorted_terms({{sig[i], sol[i]}});
                for (size_t i = 0; i < tau.size(); ++i)
                    if (sol[sig.size() + i] != 0)
                        taup = taup + Poly::from_sorted_terms({{tau[i], sol[sig.size() + i]}});
                if (sig1.is_zero()) continue;
                Poly num = that * sig1 + taup;
                if (num.is_zero()) continue;

                for (int sdeg = 0; sdeg <= d2 + 1; ++sdeg) {
                    std::vector<Monomial> smonos;
                    for (const Monomial& mo : monomials_upto(low, sdeg)) {
                        if (mo.degree() != sdeg) continue;
                        auto mw = monomial_weight(mo, der.weights, n);
                        if (mw && *mw == wbar) smonos.push_back(mo);
                    }
                    if (smonos.empty()) continue;
                    std::vector<std::vector<Poly>> scols;
                    for (const Monomial& mo : smonos) {
                        Poly mp = Poly::from_sorted_terms({{mo, Rat(1)}});
                        std::vector<Poly> imgs(der.nilpotent.size());
                        for (size_t vi = 0; vi < der.nilpotent.size(); ++vi)
                            imgs[vi] = der.nilpotent[vi].apply(mp);
                        scols.push_back(std::move(imgs));
                    }
                    for (const auto& ssol : solve_span(scols)) {
                        Poly den;
                        for (size_t i = 0; i < smonos.size(); ++i)
                            if (ssol[i] != 0) den = den + Poly::from_sorted_terms({{smonos[i], ssol[i]}});
                        if (den.is_zero()) continue;
                        Expr inv = Expr::ratio(num, den);
                        if (!check_invariance(inv, a)) continue;
                        if (!matches_condition(inv, cond, s_q, a, top_set, der.to_target)) continue;
                        return {true, inv};
                    }
                }
            }
        }
    }
    return {};
}

} // namespace inv_detail

/* true iff substituting the transformed object jets into inv reproduces inv
 * at the target.  Checked in the solved form: rewriting the target-side copy
 * of inv through the inverted action must give back inv itself. */
inline bool check_invariance(const Expr& inv, const NaturalBundleAction& a) {
    for (AtomId at : inv.atoms()) {
        const AtomData& dt = atom_data(at);
        if (dt.kind != AtomKind::ObjDeriv || dt.side != Side::Source)
            throw DimensionMismatch("invariant must be written in source-side object atoms");
    }
    int d = obj_order(inv, Side::Source);
    std::map<AtomId, AtomId> ren;
    for (int k = 0; k <= d; ++k)
        for (const MultiIndex& be : multi_indices_exact(a.n, k))
            for (int b = 1; b <= a.m; ++b)
                ren[obj_atom(b, be, Side::Source)] = obj_atom(b, be, Side::Target);
    Expr at_target = Expr::ratio_coprime(inv_detail::rename_atoms(inv.num(), ren),
                                         inv_detail::rename_atoms(inv.den(), ren));
    reduce_detail::RewriteEngine eng(a, d);
    return (eng.substitute(at_target) - inv).is_zero();
}

/* attempt the separated form (Inv at x) - (Inv at y) = 0 for each condition;
 * conditions are first reduced modulo s_q */
inline VessiotReport extract_invariants(const std::vector<Expr>& conditions, const EquationSystem& s_q,
                                        const NaturalBundleAction& a) {
    VessiotReport rep;
    int idx = 0;
    for (const Expr& raw : conditions) {
        Expr cond = reduce_modulo(raw, s_q, a);
        if (cond.is_zero()) continue;  // already implied by the system
        inv_detail::Separation sep = inv_detail::separate(cond, s_q, a);
        if (sep.ok)
            rep.equations.push_back({sep.inv, "c" + std::to_string(++idx), cond, std::nullopt});
        else
            rep.unseparated.push_back(cond);
    }
    return rep;
}

} // namespace vessiot
