#pragma once

#include <cstdint>

#include "rational.hpp"

namespace vessiot {

/* splitmix64: tiny, seedable, identical across platforms. Used everywhere a
 * reproducible stream is needed so reports stay byte-stable for a given seed. */
class Rng {
public:
    explicit Rng(uint64_t seed) : state_(seed) {}

    uint64_t next() {
        uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    /* uniform in [0, n) */
    uint64_t below(uint64_t n) { return n ? next() % n : 0; }

    long int_in(long lo, long hi) {  // inclusive bounds
        return lo + static_cast<long>(below(static_cast<uint64_t>(hi - lo + 1)));
    }

    /* small rational with numerator in [-bound, bound] and denominator in [1, dbound] */
    Rat rat(long bound = 9, long dbound = 4) {
        long n = int_in(-bound, bound);
        long d = int_in(1, dbound);
        return Rat(n, d);
    }

    Rat nonzero_rat(long bound = 9, long dbound = 4) {
        for (;;) {
            Rat r = rat(bound, dbound);
            if (r != 0) return r;
        }
    }

private:
    uint64_t state_;
};

} // namespace vessiot
