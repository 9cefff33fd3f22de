#pragma once

#include <cstdint>
#include <mutex>
#include <string>
#include <unordered_map>
#include <vector>

#include "errors.hpp"
#include "rational.hpp"

namespace vessiot {

/* Symmetric multi-index over n base directions, stored as an exponent tuple.
 * Only the symmetric representative exists; there is no ordered variant. */
class MultiIndex {
public:
    MultiIndex() = default;
    explicit MultiIndex(int n) : e_(n, 0) {}
    MultiIndex(std::initializer_list<int> l) { for (int v : l) e_.push_back(static_cast<uint8_t>(v)); }

    static MultiIndex zero(int n) { return MultiIndex(n); }
    static MultiIndex unit(int n, int k) {  // k is 1-based
        MultiIndex m(n);
        m.e_[k - 1] = 1;
        return m;
    }

    int size() const { return static_cast<int>(e_.size()); }
    int operator[](int k) const { return e_[k - 1]; }  // 1-based access
    int order() const {
        int s = 0;
        for (auto v : e_) s += v;
        return s;
    }

    MultiIndex bumped(int k) const {  // this + e_k, 1-based
        MultiIndex m = *this;
        m.e_[k - 1]++;
        return m;
    }
    /* this - e_k if possible */
    bool can_lower(int k) const { return e_[k - 1] > 0; }
    MultiIndex lowered(int k) const {
        MultiIndex m = *this;
        m.e_[k - 1]--;
        return m;
    }

    bool operator==(const MultiIndex& o) const { return e_ == o.e_; }
    bool operator!=(const MultiIndex& o) const { return !(*this == o); }
    /* graded, then lexicographic on the exponent tuple */
    bool operator<(const MultiIndex& o) const {
        if (order() != o.order()) return order() < o.order();
        return e_ < o.e_;
    }

    std::string to_string() const {
        std::string s = "(";
        for (size_t i = 0; i < e_.size(); ++i) {
            if (i) s += ",";
            s += std::to_string(e_[i]);
        }
        return s + ")";
    }

    /* expand into a sorted list of directions, e.g. (1,2) -> [1,2,2] */
    std::vector<int> directions() const {
        std::vector<int> d;
        for (int k = 1; k <= size(); ++k)
            for (int c = 0; c < e_[k - 1]; ++c) d.push_back(k);
        return d;
    }

    size_t hash() const {
        size_t h = 1469598103934665603ull;
        for (auto v : e_) h = (h ^ v) * 1099511628211ull;
        return h;
    }

private:
    std::vector<uint8_t> e_;
};

inline Int binomial(int n, int k) {
    if (k < 0 || k > n) return 0;
    Int r = 1;
    for (int i = 1; i <= k; ++i) {
        r *= (n - k + i);
        r /= i;
    }
    return r;
}

/* number of multi-indices of exact order r in n variables, C(n+r-1, r) */
inline long multi_index_count(int n, int r) {
    return static_cast<long>(binomial(n + r - 1, r));
}

/* all multi-indices of exact order r, in graded-lex enumeration order */
inline std::vector<MultiIndex> multi_indices_exact(int n, int r) {
    std::vector<MultiIndex> out;
    MultiIndex cur(n);
    std::vector<int> stack;
    // recursive distribution of r among n slots, lexicographically by tuple
    std::vector<int> e(n, 0);
    auto rec = [&](auto&& self, int pos, int rem) -> void {
        if (pos == n - 1) {
            e[pos] = rem;
            MultiIndex m(n);
            for (int i = 0; i < n; ++i)
                for (int c = 0; c < e[i]; ++c) m = m.bumped(i + 1);
            out.push_back(m);
            return;
        }
        for (int v = rem; v >= 0; --v) {  // descending first slot: (2,0) before (1,1) before (0,2)
            e[pos] = v;
            self(self, pos + 1, rem - v);
        }
    };
    rec(rec, 0, r);
    return out;
}

inline std::vector<MultiIndex> multi_indices_upto(int n, int r) {
    std::vector<MultiIndex> out;
    for (int k = 0; k <= r; ++k) {
        auto v = multi_indices_exact(n, k);
        out.insert(out.end(), v.begin(), v.end());
    }
    return out;
}

enum class AtomKind : uint8_t { BaseCoord, Jet, ObjDeriv };
enum class Side : uint8_t { Source, Target };

/* Descriptor of an interned symbol.
 *  BaseCoord: comp = i            -> coordinate x^i
 *  Jet:       comp = i, mi = a    -> jet component of order |a| (|a| = 0 is the target position)
 *  ObjDeriv:  comp = a, mi = b    -> d^b of object component a, at the source or target point */
struct AtomData {
    AtomKind kind;
    int comp;        // 1-based
    MultiIndex mi;   // empty for BaseCoord
    Side side = Side::Source;

    bool operator==(const AtomData& o) const {
        return kind == o.kind && comp == o.comp && mi == o.mi && side == o.side;
    }
    size_t hash() const {
        size_t h = mi.hash();
        h = h * 31 + static_cast<size_t>(kind);
        h = h * 31 + static_cast<size_t>(comp);
        h = h * 31 + static_cast<size_t>(side);
        return h;
    }
};

using AtomId = uint32_t;

/* Process-wide interning table. Registration is serialized; lookups after
 * interning are wait-free reads of append-only storage. */
class AtomTable {
public:
    static AtomTable& instance() {
        static AtomTable t;
        return t;
    }

    AtomId intern(const AtomData& d) {
        std::lock_guard<std::mutex> lock(mu_);
        auto it = index_.find(d);
        if (it != index_.end()) return it->second;
        AtomId id = static_cast<AtomId>(atoms_.size());
        atoms_.push_back(d);
        index_.emplace(d, id);
        return id;
    }

    const AtomData& data(AtomId id) const { return atoms_[id]; }

private:
    struct Hash {
        size_t operator()(const AtomData& d) const { return d.hash(); }
    };
    std::mutex mu_;
    std::vector<AtomData> atoms_;
    std::unordered_map<AtomData, AtomId, Hash> index_;
};

inline AtomId intern_atom(const AtomData& d) { return AtomTable::instance().intern(d); }
inline const AtomData& atom_data(AtomId id) { return AtomTable::instance().data(id); }

inline AtomId base_coord_atom(int i) { return intern_atom({AtomKind::BaseCoord, i, MultiIndex(), Side::Source}); }
inline AtomId jet_atom(int i, const MultiIndex& a) { return intern_atom({AtomKind::Jet, i, a, Side::Source}); }
inline AtomId obj_atom(int a, const MultiIndex& b, Side s) { return intern_atom({AtomKind::ObjDeriv, a, b, s}); }

inline std::string atom_name(AtomId id) {
    const AtomData& d = atom_data(id);
    switch (d.kind) {
        case AtomKind::BaseCoord: return "x" + std::to_string(d.comp);
        case AtomKind::Jet:
            if (d.mi.order() == 0) return "y" + std::to_string(d.comp);
            return "y" + std::to_string(d.comp) + d.mi.to_string();
        case AtomKind::ObjDeriv: {
            std::string s = "w" + std::to_string(d.comp);
            if (d.mi.order() > 0) s += d.mi.to_string();
            s += d.side == Side::Source ? "@x" : "@y";
            return s;
        }
    }
    return "?";
}

} // namespace vessiot
