#pragma once

// Scalar q-analysis kernel: q-Pochhammer symbols, the Jacobi theta function
// theta(u) = (u)_inf (p/u)_inf (p)_inf, and basic hypergeometric series
// nphi_{n-1} with controlled truncation.
//
// All routines are pure functions of their arguments and are templated on the
// working real type; double is the default throughout the library, long double
// is selectable from the CLI for the scalar/one-dimensional paths.

#include <cmath>
#include <complex>
#include <span>
#include <sstream>
#include <vector>

#include "qhi/types.hpp"

namespace qhi {

template <class R>
using Cx = std::complex<R>;

namespace detail {

template <class R>
void require_q_nome(const Cx<R>& p) {
    if (!(std::abs(p) < R(1)))
        throw DomainError("qseries: divergent, |p| >= 1");
}

}  // namespace detail

// (u; p)_inf = prod_{s>=0} (1 - p^s u), truncated once the geometric tail
// bound |p^{S+1} u| / (1-|p|) drops below series_tail_tol.
template <class R>
Cx<R> qpoch_inf(Cx<R> u, Cx<R> p, const Truncation& trunc = {}) {
    trunc.validate();
    if (u == Cx<R>(0)) return Cx<R>(1);
    detail::require_q_nome(p);
    if (p == Cx<R>(0)) return Cx<R>(1) - u;

    const R ap = std::abs(p);
    Cx<R> prod(1);
    Cx<R> w = u;  // p^s u
    for (int s = 0; s < trunc.max_terms; ++s) {
        prod *= (Cx<R>(1) - w);
        w *= p;
        if (std::abs(w) / (R(1) - ap) <= R(trunc.series_tail_tol)) return prod;
    }
    throw TailBoundError("qpoch_inf: tail bound above tolerance at max_terms");
}

// (u; p)_k = prod_{s=0}^{k-1} (1 - p^s u); (u)_0 = 1.
template <class R>
Cx<R> qpoch_fin(Cx<R> u, Cx<R> p, long k) {
    if (k < 0) throw DomainError("qpoch_fin: negative k");
    Cx<R> prod(1);
    Cx<R> w = u;
    for (long s = 0; s < k; ++s) {
        prod *= (Cx<R>(1) - w);
        w *= p;
    }
    return prod;
}

// theta(u) = (u)_inf (p u^{-1})_inf (p)_inf.  Quasi-periodicity:
// theta(p u) = -u^{-1} theta(u); zeros exactly on u in p^Z.
template <class R>
Cx<R> theta(Cx<R> u, Cx<R> p, const Truncation& trunc = {}) {
    if (u == Cx<R>(0)) throw DomainError("theta: zero argument");
    detail::require_q_nome(p);
    return qpoch_inf(u, p, trunc) * qpoch_inf(p / u, p, trunc) * qpoch_inf(p, p, trunc);
}

// theta'(1) = -((p)_inf)^3.
template <class R>
Cx<R> theta_prime_at_1(Cx<R> p, const Truncation& trunc = {}) {
    detail::require_q_nome(p);
    const Cx<R> pp = qpoch_inf(p, p, trunc);
    return -pp * pp * pp;
}

// Relative distance of q from the lattice p^Z: min over the s-window of
// |1 - q p^{-s}|, window derived from magnitudes.  "q not in p^Z" conditions
// are enforced as lattice_distance(q, p) >= margin.
template <class R>
R lattice_distance(Cx<R> q, Cx<R> p) {
    const R aq = std::abs(q);
    if (!(aq > R(0))) return R(0);
    const R ap = std::abs(p);
    if (!(ap > R(0))) return std::abs(Cx<R>(1) - q);  // p = 0: lattice is {1}
    const int window = static_cast<int>(std::ceil(std::abs(std::log(aq) / std::log(ap)))) + 4;
    R best = std::numeric_limits<R>::max();
    // scan s in [-window, window]; q p^{-s} built multiplicatively
    Cx<R> up = q, down = q;
    best = std::min(best, std::abs(Cx<R>(1) - q));
    for (int s = 1; s <= window; ++s) {
        up /= p;
        down *= p;
        best = std::min(best, std::abs(Cx<R>(1) - up));
        best = std::min(best, std::abs(Cx<R>(1) - down));
    }
    return best;
}

// Basic hypergeometric series
//   nphi_{n-1}(a_1..a_n; b_1..b_{n-1}; p; z) =
//     sum_{k>=0} (a_1)_k ... (a_n)_k / ((b_1)_k ... (b_{n-1})_k (p)_k) z^k.
// Terms are built by the ratio recursion; convergence is certified by the
// observed term-ratio test with a geometric tail bound.
template <class R>
Cx<R> phi_series(std::span<const Cx<R>> a, std::span<const Cx<R>> b, Cx<R> p, Cx<R> z,
                 const Truncation& trunc = {}, R* tail_estimate = nullptr,
                 R lattice_margin = R(1e-4)) {
    trunc.validate();
    detail::require_q_nome(p);
    for (const auto& bm : b) {
        // denominator zeros when b_m = p^{-s}, s >= 0
        if (lattice_distance(bm, p) < lattice_margin && std::abs(bm) >= R(1) - lattice_margin)
            throw PoleProximityError("phi_series: lower parameter within margin of p^{-Z>=0}");
    }
    if (z == Cx<R>(0)) {
        if (tail_estimate) *tail_estimate = R(0);
        return Cx<R>(1);
    }

    Cx<R> sum(1);
    Cx<R> term(1);
    Cx<R> pk(1);  // p^k
    R prev_ratio = R(0);
    int bad_ratio_streak = 0;
    for (int k = 0; k < trunc.max_terms; ++k) {
        Cx<R> num(1), den(1);
        for (const auto& am : a) num *= (Cx<R>(1) - pk * am);
        for (const auto& bm : b) den *= (Cx<R>(1) - pk * bm);
        den *= (Cx<R>(1) - pk * p);  // (p)_k factor advances with (1 - p^{k+1})
        if (den == Cx<R>(0)) throw PoleProximityError("phi_series: vanishing denominator factor");
        term *= z * num / den;
        sum += term;
        pk *= p;

        const R at = std::abs(term);
        const R ratio = std::abs(z * num / den);
        if (k >= 2 && ratio >= R(1)) {
            if (++bad_ratio_streak >= 4) throw ConvergenceError("phi_series: term ratio >= 1, series diverges");
        } else {
            bad_ratio_streak = 0;
        }
        if (k >= 1 && ratio < R(1)) {
            const R r = std::max(ratio, prev_ratio);
            if (r < R(1)) {
                const R tail = at * r / (R(1) - r);
                if (tail <= R(trunc.series_tail_tol) * std::max(std::abs(sum), R(1))) {
                    if (tail_estimate) *tail_estimate = tail;
                    return sum;
                }
            }
        }
        prev_ratio = ratio;
    }
    throw TailBoundError("phi_series: tail bound above tolerance at max_terms");
}

template <class R>
Cx<R> phi_series(const std::vector<Cx<R>>& a, const std::vector<Cx<R>>& b, Cx<R> p, Cx<R> z,
                 const Truncation& trunc = {}, R* tail_estimate = nullptr) {
    return phi_series<R>(std::span<const Cx<R>>(a), std::span<const Cx<R>>(b), p, z, trunc,
                         tail_estimate);
}

}  // namespace qhi
