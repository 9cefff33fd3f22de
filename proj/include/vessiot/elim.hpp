#pragma once

#include <algorithm>
#include <utility>
#include <vector>

#include "gcd.hpp"
#include "jets.hpp"

namespace vessiot {

/* An equation system written as matrix * unknowns = rhs, where the unknowns
 * are the jet atoms of one fixed order and all coefficients are free of
 * them.  Rows whose equation never touched the top order are kept (flagged)
 * so the elimination can tell genuinely new consequences apart from carried
 * lower-order equations. */
struct AffineTopSystem {
    JetContext ctx;
    int top_order = 0;
    std::vector<AtomId> unknowns;
    std::vector<std::vector<Expr>> matrix;
    std::vector<Expr> rhs;
    std::vector<bool> top_bearing;

    /* matrix * unknowns - rhs, the equation a row encodes */
    Expr row_equation(size_t i) const {
        Expr e = -rhs[i];
        for (size_t j = 0; j < unknowns.size(); ++j)
            if (matrix[i][j] != Expr::zero()) e = e + matrix[i][j] * Expr::atom(unknowns[j]);
        return e;
    }
};

namespace elim_detail {

inline bool affine_in(const Expr& e, const std::vector<AtomId>& tops) {
    for (AtomId t : tops)
        if (e.den().contains_atom(t)) return false;
    for (AtomId t : tops) {
        Poly pd = e.num().derivative(t);
        for (AtomId u : tops)
            if (pd.contains_atom(u)) return false;
    }
    return true;
}

/* canonical unknown order: jet component, then multi-index */
inline bool atom_before(AtomId a, AtomId b) {
    const AtomData& da = atom_data(a);
    const AtomData& db = atom_data(b);
    if (da.comp != db.comp) return da.comp < db.comp;
    return da.mi < db.mi;
}

} // namespace elim_detail

inline AffineTopSystem split_top_order(const EquationSystem& s, int q_top) {
    AffineTopSystem out{s.ctx, q_top, {}, {}, {}, {}};
    if (s.order() > q_top)
        throw NonAffineTopOrder("system carries jet atoms above the requested top order");

    std::set<AtomId> seen;
    for (const Expr& e : s.eqs)
        for (AtomId a : jet_atoms_of_order(e, q_top)) seen.insert(a);
    out.unknowns.assign(seen.begin(), seen.end());
    std::sort(out.unknowns.begin(), out.unknowns.end(), elim_detail::atom_before);

    std::map<AtomId, Expr> zero_tops;
    for (AtomId a : out.unknowns) zero_tops[a] = Expr::zero();

    for (const Expr& e : s.eqs) {
        if (!elim_detail::affine_in(e, out.unknowns))
            throw NonAffineTopOrder("equation is not affine in the top-order jet atoms");
        std::vector<Expr> row;
        bool bearing = false;
        for (AtomId a : out.unknowns) {
            Expr c = e.partial(a);
            if (c != Expr::zero()) bearing = true;
            row.push_back(std::move(c));
        }
        out.matrix.push_back(std::move(row));
        out.rhs.push_back(-(e.substitute(zero_tops)));
        out.top_bearing.push_back(bearing);
    }
    return out;
}

struct EliminationResult {
    std::vector<AtomId> unknowns;
    std::vector<std::pair<AtomId, Expr>> solved;  // generic solution for pivot unknowns
    std::vector<Expr> conditions;                 // consequences free of the unknowns
    std::vector<std::vector<Expr>> condition_multipliers;  // row weights producing each condition
    int generic_rank = 0;
};

/* Fraction-free Gaussian elimination over the rational function field.
 * Rows are cleared of denominators, then reduced with Bareiss two-term
 * updates (every division is exact).  Pivot choice: sparsest eligible
 * column, ties by unknown order, then the lowest-index eligible row.
 * A top-bearing row whose matrix part dies yields a condition together
 * with the multiplier vector that produced it. */
inline EliminationResult eliminate(const AffineTopSystem& a) {
    size_t rows = a.matrix.size(), cols = a.unknowns.size();
    EliminationResult res;
    res.unknowns = a.unknowns;

    // denominator-cleared working copy, with multiplier columns
    std::vector<std::vector<Poly>> m(rows, std::vector<Poly>(cols));
    std::vector<Poly> b(rows);
    std::vector<std::vector<Poly>> mult(rows, std::vector<Poly>(rows, Poly()));
    for (size_t i = 0; i < rows; ++i) {
        Poly d = Poly::one();
        for (size_t j = 0; j < cols; ++j) d = poly_lcm(d, a.matrix[i][j].den());
        d = poly_lcm(d, a.rhs[i].den());
        Expr de = Expr::from_poly(d);
        for (size_t j = 0; j < cols; ++j) {
            Expr c = a.matrix[i][j] * de;
            m[i][j] = c.num();  // den is 1 by construction
        }
        b[i] = (a.rhs[i] * de).num();
        mult[i][i] = d;
    }

    std::vector<bool> row_done(rows, false), col_done(cols, false);
    std::vector<std::pair<size_t, size_t>> pivots;
    Poly prev = Poly::one();

    for (;;) {
        // column stats over active rows
        size_t best_col = cols, best_count = 0;
        for (size_t c = 0; c < cols; ++c) {
            if (col_done[c]) continue;
            size_t count = 0;
            for (size_t i = 0; i < rows; ++i)
                if (!row_done[i] && !(m[i][c] == Poly())) ++count;
            if (count == 0) continue;
            if (best_col == cols || count < best_count) {
                best_col = c;
                best_count = count;
            }
        }
        if (best_col == cols) break;
        size_t prow = rows;
        for (size_t i = 0; i < rows; ++i)
            if (!row_done[i] && !(m[i][best_col] == Poly())) {
                prow = i;
                break;
            }

        const Poly piv = m[prow][best_col];
        for (size_t i = 0; i < rows; ++i) {
            if (row_done[i] || i == prow) continue;
            const Poly f = m[i][best_col];
            auto update = [&](Poly& target, const Poly& pivot_row_entry) {
                Poly num = piv * target - f * pivot_row_entry;
                if (num == Poly()) {
                    target = Poly();
                    return;
                }
                auto q = Poly::divide_exact(num, prev);
                if (!q) throw Error("fraction-free elimination lost exactness");
                target = *q;
            };
            for (size_t j = 0; j < cols; ++j) update(m[i][j], m[prow][j]);
            update(b[i], b[prow]);
            for (size_t k = 0; k < rows; ++k) update(mult[i][k], mult[prow][k]);
        }
        row_done[prow] = true;
        col_done[best_col] = true;
        pivots.emplace_back(prow, best_col);
        prev = piv;
    }

    res.generic_rank = static_cast<int>(pivots.size());

    for (size_t i = 0; i < rows; ++i) {
        if (row_done[i] || !a.top_bearing[i]) continue;
        if (b[i] == Poly()) continue;  // 0 = 0
        res.conditions.push_back(Expr::from_poly(b[i]));
        std::vector<Expr> lam;
        for (size_t k = 0; k < rows; ++k) lam.push_back(Expr::from_poly(mult[i][k]));
        res.condition_multipliers.push_back(std::move(lam));
    }

    // generic back-substitution, later pivots first
    std::map<AtomId, Expr> sol;
    for (auto it = pivots.rbegin(); it != pivots.rend(); ++it) {
        auto [r, c] = *it;
        Expr acc = Expr::from_poly(b[r]);
        for (size_t j = 0; j < cols; ++j) {
            if (j == c || m[r][j] == Poly()) continue;
            Expr uj = Expr::atom(a.unknowns[j]);
            auto found = sol.find(a.unknowns[j]);
            if (found != sol.end()) uj = found->second;
            acc = acc - Expr::from_poly(m[r][j]) * uj;
        }
        sol[a.unknowns[c]] = acc / Expr::from_poly(m[r][c]);
    }
    for (auto& [r, c] : pivots) res.solved.emplace_back(a.unknowns[c], sol.at(a.unknowns[c]));
    std::sort(res.solved.begin(), res.solved.end(),
              [](const auto& x, const auto& y) { return elim_detail::atom_before(x.first, y.first); });
    return res;
}

} // namespace vessiot
