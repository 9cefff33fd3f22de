#pragma once

#include <optional>
#include <vector>

#include "rational.hpp"

namespace vessiot {

using QVec = std::vector<Rat>;
using QMat = std::vector<QVec>;  // row-major

/* reduced row echelon form in place; returns pivot columns */
inline std::vector<int> rref(QMat& m) {
    std::vector<int> pivots;
    if (m.empty()) return pivots;
    size_t rows = m.size(), cols = m[0].size();
    size_t r = 0;
    for (size_t c = 0; c < cols && r < rows; ++c) {
        size_t sel = r;
        while (sel < rows && m[sel][c] == 0) ++sel;
        if (sel == rows) continue;
        std::swap(m[sel], m[r]);
        Rat inv = Rat(1) / m[r][c];
        for (size_t j = c; j < cols; ++j) m[r][j] *= inv;
        for (size_t i = 0; i < rows; ++i) {
            if (i == r || m[i][c] == 0) continue;
            Rat f = m[i][c];
            for (size_t j = c; j < cols; ++j) m[i][j] -= f * m[r][j];
        }
        pivots.push_back(static_cast<int>(c));
        ++r;
    }
    return pivots;
}

inline int rank(QMat m) { return static_cast<int>(rref(m).size()); }

/* basis of the right kernel, deterministic (one vector per free column) */
inline std::vector<QVec> kernel_basis(QMat m, size_t cols) {
    if (m.empty()) m.push_back(QVec(cols, Rat(0)));
    auto pivots = rref(m);
    std::vector<bool> is_pivot(cols, false);
    for (int c : pivots) is_pivot[static_cast<size_t>(c)] = true;
    std::vector<QVec> basis;
    for (size_t fc = 0; fc < cols; ++fc) {
        if (is_pivot[fc]) continue;
        QVec v(cols, Rat(0));
        v[fc] = Rat(1);
        for (size_t pi = 0; pi < pivots.size(); ++pi) {
            size_t pc = static_cast<size_t>(pivots[pi]);
            v[pc] = -m[pi][fc];
        }
        basis.push_back(std::move(v));
    }
    return basis;
}

/* solve A x = b; nullopt when inconsistent; free coordinates set to zero */
inline std::optional<QVec> solve(QMat a, QVec b) {
    size_t rows = a.size();
    size_t cols = rows ? a[0].size() : 0;
    for (size_t i = 0; i < rows; ++i) a[i].push_back(b[i]);
    auto pivots = rref(a);
    // inconsistent iff a pivot lands in the augmented column
    if (!pivots.empty() && static_cast<size_t>(pivots.back()) == cols) return std::nullopt;
    QVec x(cols, Rat(0));
    for (size_t pi = 0; pi < pivots.size(); ++pi) x[static_cast<size_t>(pivots[pi])] = a[pi][cols];
    return x;
}

inline std::optional<QMat> inverse(const QMat& a) {
    size_t n = a.size();
    QMat m(n, QVec(2 * n, Rat(0)));
    for (size_t i = 0; i < n; ++i) {
        for (size_t j = 0; j < n; ++j) m[i][j] = a[i][j];
        m[i][n + i] = Rat(1);
    }
    auto pivots = rref(m);
    if (pivots.size() != n) return std::nullopt;
    for (size_t i = 0; i < n; ++i)
        if (pivots[i] != static_cast<int>(i)) return std::nullopt;
    QMat inv(n, QVec(n));
    for (size_t i = 0; i < n; ++i)
        for (size_t j = 0; j < n; ++j) inv[i][j] = m[i][n + j];
    return inv;
}

inline Rat det(QMat a) {
    size_t n = a.size();
    Rat d(1);
    for (size_t c = 0; c < n; ++c) {
        size_t sel = c;
        while (sel < n && a[sel][c] == 0) ++sel;
        if (sel == n) return Rat(0);
        if (sel != c) {
            std::swap(a[sel], a[c]);
            d = -d;
        }
        d *= a[c][c];
        for (size_t i = c + 1; i < n; ++i) {
            if (a[i][c] == 0) continue;
            Rat f = a[i][c] / a[c][c];
            for (size_t j = c; j < n; ++j) a[i][j] -= f * a[c][j];
        }
    }
    return d;
}

} // namespace vessiot
