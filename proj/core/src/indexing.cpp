#include "qhi/indexing.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace qhi {

long long binomial(long long n, long long k) {
    if (k < 0 || k > n) return 0;
    k = std::min(k, n - k);
    long long r = 1;
    for (long long i = 1; i <= k; ++i) {
        r = r * (n - k + i) / i;  // exact: r*(n-k+i) divisible by i at each step
    }
    return r;
}

std::vector<Composition> enumerate_compositions(int n, int ell) {
    if (n < 1) throw std::invalid_argument("enumerate_compositions: n >= 1 required");
    if (ell < 0) throw std::invalid_argument("enumerate_compositions: ell >= 0 required");
    std::vector<Composition> out;
    std::vector<int> parts(n, 0);
    // depth-first, largest first part first => descending lexicographic order
    auto rec = [&](auto&& self, int pos, int rest) -> void {
        if (pos == n - 1) {
            parts[pos] = rest;
            out.push_back(Composition{parts});
            return;
        }
        for (int v = rest; v >= 0; --v) {
            parts[pos] = v;
            self(self, pos + 1, rest - v);
        }
    };
    rec(rec, 0, ell);
    return out;
}

bool dominance_ll(const Composition& a, const Composition& b) {
    if (a.n() != b.n() || a.ell() != b.ell())
        throw std::invalid_argument("dominance_ll: mismatched (n, ell)");
    if (a == b) throw std::invalid_argument("dominance_ll: arguments must differ");
    int pa = 0, pb = 0;
    for (int k = 0; k + 1 < a.n(); ++k) {
        pa += a.parts[k];
        pb += b.parts[k];
        if (pa > pb) return false;
    }
    return true;
}

std::vector<Perm> all_permutations(int ell) {
    if (ell < 0 || ell > kMaxVars) throw std::invalid_argument("all_permutations: ell out of range");
    Perm id(ell);
    std::iota(id.begin(), id.end(), 0);
    std::vector<Perm> out;
    do {
        out.push_back(id);
    } while (std::next_permutation(id.begin(), id.end()));
    return out;
}

Cplx bracket_factor_rational(const Perm& sigma, std::span<const Cplx> t, Cplx eta,
                             double pole_margin) {
    const int ell = static_cast<int>(sigma.size());
    Cplx f(1);
    for (int a = 0; a < ell; ++a)
        for (int b = a + 1; b < ell; ++b) {
            if (sigma[a] <= sigma[b]) continue;
            const Cplx num = t[sigma[b]] - eta * t[sigma[a]];
            const Cplx den = eta * t[sigma[b]] - t[sigma[a]];
            if (std::abs(den) <= pole_margin * std::abs(eta * t[sigma[b]]))
                throw PoleProximityError("bracket_factor_rational: vanishing denominator");
            f *= num / den;
        }
    return f;
}

Cplx bracket_factor_theta(const Perm& sigma, std::span<const Cplx> t, Cplx eta, Cplx p,
                          const Truncation& trunc, double pole_margin) {
    const int ell = static_cast<int>(sigma.size());
    Cplx f(1);
    for (int a = 0; a < ell; ++a)
        for (int b = a + 1; b < ell; ++b) {
            if (sigma[a] <= sigma[b]) continue;
            const Cplx r = t[sigma[b]] / t[sigma[a]];
            if (lattice_distance(eta * r, p) <= pole_margin)
                throw PoleProximityError("bracket_factor_theta: argument on theta zero set");
            f *= eta * theta(r / eta, p, trunc) / theta(eta * r, p, trunc);
        }
    return f;
}

LadderPoint ladder_point(std::span<const Cplx> base_vals, const Composition& comp, Cplx eta) {
    std::vector<int> zero(comp.ell(), 0);
    return shifted_ladder_point(base_vals, comp, zero, eta, Cplx(0));
}

LadderPoint shifted_ladder_point(std::span<const Cplx> base_vals, const Composition& comp,
                                 std::span<const int> shifts, Cplx eta, Cplx p) {
    const int n = comp.n();
    const int ell = comp.ell();
    if (static_cast<int>(base_vals.size()) != n)
        throw std::invalid_argument("ladder point: base length != n");
    if (static_cast<int>(shifts.size()) != ell)
        throw std::invalid_argument("ladder point: shift length != ell");
    if (eta == Cplx(0)) throw std::invalid_argument("ladder point: eta must be nonzero");
    for (const auto& v : base_vals)
        if (v == Cplx(0)) throw std::invalid_argument("ladder point: zero base coordinate");

    LadderPoint pt;
    pt.comp = comp;
    pt.shifts.assign(shifts.begin(), shifts.end());
    pt.coords.resize(ell);
    int pos = 0;
    for (int m = 0; m < n; ++m) {
        const int lm = comp.parts[m];
        for (int j = 1; j <= lm; ++j) {
            int pshift = 0;  // cumulative from local position j to the block end
            for (int v = j; v <= lm; ++v) pshift += shifts[pos + v - 1];
            Cplx c = base_vals[m];
            for (int e = 0; e < lm - j; ++e) c /= eta;  // eta^{j - l_m}
            if (pshift != 0) {
                if (p == Cplx(0)) throw std::invalid_argument("ladder point: p shift with p = 0");
                const Cplx f = pshift > 0 ? p : Cplx(1.0) / p;
                for (int e = 0; e < std::abs(pshift); ++e) c *= f;
            }
            pt.coords[pos + j - 1] = c;
        }
        pos += lm;
    }
    return pt;
}

long long d_exponent(int n, int m, int ell, int s) {
    if (m < 1 || m > n - 1) throw std::invalid_argument("d_exponent: m out of range");
    long long total = 0;
    for (int i = 0; i < ell; ++i) {
        const int j = i - s;
        if (j < 0 || i + j >= ell) continue;
        total += binomial(m - 1 + i, m - 1) * binomial(n - m - 1 + j, n - m - 1);
    }
    return total;
}

long long combi_identity_residual(int j, int k, int l, int m) {
    if (j < 0 || k < 0 || l < 0 || m < 0)
        throw std::invalid_argument("combi_identity_residual: negative argument");
    long long lhs = 0;
    for (int a = 0; a <= l; ++a)
        lhs += binomial(j + a, j) * binomial(j + k + a, k) * binomial(l + m - a, m);
    const long long rhs = binomial(j + k, k) * binomial(j + k + l + m + 1, j + k + m + 1);
    return lhs - rhs;
}

}  // namespace qhi
