#pragma once

// Combinatorial substrate: compositions of ell into n parts, the inverse
// dominance ordering, ladder points (plain and p-shifted), symmetric-group
// bracket factors, and the exponent combinatorics of the determinant formulas.

#include <span>
#include <vector>

#include "qhi/qseries.hpp"
#include "qhi/types.hpp"

namespace qhi {

// An element of Z_ell^n: n nonnegative integers summing to ell.
struct Composition {
    std::vector<int> parts;

    int n() const { return static_cast<int>(parts.size()); }
    int ell() const {
        int s = 0;
        for (int v : parts) s += v;
        return s;
    }
    // partial sum l^m = l_1 + ... + l_m, 1-based m; partial(0) = 0.
    int partial(int m) const {
        int s = 0;
        for (int i = 0; i < m; ++i) s += parts[i];
        return s;
    }
    bool operator==(const Composition&) const = default;
};

// All of Z_ell^n in the canonical (descending lexicographic-by-parts) order;
// this is the global matrix index order.  |result| = C(n+ell-1, n-1).
std::vector<Composition> enumerate_compositions(int n, int ell);

long long binomial(long long n, long long k);

// a << b in the inverse dominance ordering: a^k <= b^k for all partial sums.
// Precondition: same (n, ell), a != b.
bool dominance_ll(const Composition& a, const Composition& b);

// Permutations of {0..ell-1}; perm[a] is the 0-based image of position a.
using Perm = std::vector<int>;
std::vector<Perm> all_permutations(int ell);

// Product over inversions (a<b, sigma_a>sigma_b) of
// (t_{sigma_b} - eta t_{sigma_a}) / (eta t_{sigma_b} - t_{sigma_a}).
// The caller composes [f]_sigma = f(t_{sigma_1},...,t_{sigma_ell}) * factor.
Cplx bracket_factor_rational(const Perm& sigma, std::span<const Cplx> t, Cplx eta,
                             double pole_margin = 1e-12);

// Elliptic analog: product over inversions of
// eta * theta(eta^{-1} t_{sigma_b}/t_{sigma_a}) / theta(eta t_{sigma_b}/t_{sigma_a}).
Cplx bracket_factor_theta(const Perm& sigma, std::span<const Cplx> t, Cplx eta, Cplx p,
                          const Truncation& trunc = {}, double pole_margin = 1e-12);

// A point x|>l[eta] or x|>(l,s)[eta] in (C^x)^ell.
struct LadderPoint {
    enum class Base { X, Y };
    std::vector<Cplx> coords;
    Base base = Base::X;
    Composition comp;
    std::vector<int> shifts;  // all zero for the unshifted point
};

// Unshifted ladder point: block m is (eta^{1-l_m} x_m, ..., eta^{-1} x_m, x_m).
LadderPoint ladder_point(std::span<const Cplx> base_vals, const Composition& comp, Cplx eta);

// p-shifted ladder point: within block m the coordinate at local
// position j picks up p^(s_j + s_{j+1} + ... + s_{block end}).
LadderPoint shifted_ladder_point(std::span<const Cplx> base_vals, const Composition& comp,
                                 std::span<const int> shifts, Cplx eta, Cplx p);

// d(n,m,ell,s): sum over i,j >= 0 with i+j < ell, i-j = s of
// C(m-1+i, m-1) C(n-m-1+j, n-m-1).  Exact integer; requires 1 <= m <= n-1.
long long d_exponent(int n, int m, int ell, int s);

// LHS - RHS of the binomial identity
//   sum_{a=0}^{l} C(j+a,j) C(j+k+a,k) C(l+m-a,m) = C(j+k,k) C(j+k+l+m+1, j+k+m+1),
// in exact integer arithmetic.  Must be 0.
long long combi_identity_residual(int j, int k, int l, int m);

}  // namespace qhi
