#pragma once

#include <vector>

#include "vessiot/elim.hpp"

/* Independent oracle: plain Gaussian elimination with field divisions over
 * Expr entries, first-nonzero pivoting, no fraction-free updates and no
 * sparsity heuristics.  Shares only the Expr arithmetic with the library. */
namespace vessiot::testsupport {

struct NaiveResult {
    int rank = 0;
    std::vector<Expr> conditions;
    std::vector<std::vector<Expr>> condition_multipliers;
};

inline NaiveResult naive_eliminate(const AffineTopSystem& a) {
    size_t rows = a.matrix.size(), cols = a.unknowns.size();
    auto m = a.matrix;
    auto b = a.rhs;
    std::vector<std::vector<Expr>> mult(rows, std::vector<Expr>(rows, Expr::zero()));
    for (size_t i = 0; i < rows; ++i) mult[i][i] = Expr::one();

    std::vector<bool> done(rows, false);
    NaiveResult res;
    for (size_t c = 0; c < cols; ++c) {
        size_t p = rows;
        for (size_t i = 0; i < rows; ++i)
            if (!done[i] && m[i][c] != Expr::zero()) {
                p = i;
                break;
            }
        if (p == rows) continue;
        for (size_t i = 0; i < rows; ++i) {
            if (done[i] || i == p || m[i][c] == Expr::zero()) continue;
            Expr f = m[i][c] / m[p][c];
            for (size_t j = 0; j < cols; ++j) m[i][j] = m[i][j] - f * m[p][j];
            b[i] = b[i] - f * b[p];
            for (size_t k = 0; k < rows; ++k) mult[i][k] = mult[i][k] - f * mult[p][k];
        }
        done[p] = true;
        ++res.rank;
    }
    for (size_t i = 0; i < rows; ++i) {
        if (done[i] || !a.top_bearing[i]) continue;
        bool zero_row = true;
        for (size_t j = 0; j < cols; ++j)
            if (m[i][j] != Expr::zero()) zero_row = false;
        if (!zero_row) continue;  // defensive; cannot happen after full sweep
        if (b[i] == Expr::zero()) continue;
        res.conditions.push_back(b[i]);
        res.condition_multipliers.push_back(mult[i]);
    }
    return res;
}

/* rank of a matrix over the rational function field, by the same naive
 * divisions; used to compare spans of condition multiplier vectors */
inline int rank_expr(std::vector<std::vector<Expr>> m) {
    if (m.empty()) return 0;
    size_t rows = m.size(), cols = m[0].size();
    std::vector<bool> done(rows, false);
    int rank = 0;
    for (size_t c = 0; c < cols; ++c) {
        size_t p = rows;
        for (size_t i = 0; i < rows; ++i)
            if (!done[i] && m[i][c] != Expr::zero()) {
                p = i;
                break;
            }
        if (p == rows) continue;
        for (size_t i = 0; i < rows; ++i) {
            if (done[i] || i == p || m[i][c] == Expr::zero()) continue;
            Expr f = m[i][c] / m[p][c];
            for (size_t j = 0; j < cols; ++j) m[i][j] = m[i][j] - f * m[p][j];
        }
        done[p] = true;
        ++rank;
    }
    return rank;
}

/* the two condition sets span the same space over the function field */
inline bool same_condition_span(const std::vector<std::vector<Expr>>& ka, const std::vector<std::vector<Expr>>& kb) {
    if (ka.size() != kb.size()) return false;
    if (ka.empty()) return true;
    int ra = rank_expr(ka), rb = rank_expr(kb);
    std::vector<std::vector<Expr>> joint = ka;
    joint.insert(joint.end(), kb.begin(), kb.end());
    int rj = rank_expr(joint);
    return ra == rb && rb == rj;
}

} // namespace vessiot::testsupport
