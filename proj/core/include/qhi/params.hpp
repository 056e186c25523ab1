#pragma once

// Parameter-domain management: sampling, genericity certification,
// convergence-domain checks, restricted (x_m = eta^{l_m} y_m) construction,
// and the JSON parameter-file format.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "qhi/types.hpp"

namespace qhi {

enum class GenericityFlag { Unchecked, Generic, Restricted };

struct ParameterSet {
    Cplx p{0.2, 0.0};
    Cplx eta{2.0, 0.0};
    Cplx alpha{1.0, 0.0};
    std::vector<Cplx> x, y;
    int n = 0;
    int ell = 0;
    double lattice_margin = 1e-4;
    GenericityFlag flag = GenericityFlag::Unchecked;
    std::vector<int> ell_bounds;  // restricted l_m; empty otherwise
    std::uint64_t seed = 0;

    void validate() const;
    std::string digest() const;  // short hex fingerprint of all fields
};

struct MagnitudeProfile {
    double p_min = 0.1, p_cap = 0.3;
    double eta_lo = 1.5, eta_hi = 3.0;
    double x_lo = 0.3, x_hi = 0.7;
    double y_lo = 1.5, y_hi = 3.0;
    double alpha_lo = 0.5, alpha_hi = 2.0;
    // required multiplicative slack on the Jackson convergence conditions for
    // both pairings (through their usable sides); keeps shell decay <= 1/slack.
    double convergence_slack = 3.0;
    int max_tries = 2000;
};

struct Violation {
    std::string condition;   // e.g. "eta^{r+1} in p^Z (r=0)"
    double lattice_dist = 0; // measured relative lattice distance
};

// Every genericity condition with its measured lattice distance; empty <=> generic.
std::vector<Violation> check_generic(const ParameterSet& ps);

// The weakened genericity conditions used by the restricted identities
// (same-index x_m/y_m ratios only constrained up to the per-index bound).
std::vector<Violation> check_gene(const ParameterSet& ps, const std::vector<int>& ell_bounds);

// Rejection-samples phases/moduli until check_generic passes (plus the
// alpha-side basis and convergence conditions); deterministic per seed.
ParameterSet sample_generic(int n, int ell, std::uint64_t seed,
                            const MagnitudeProfile& profile = {});

// x_m := eta^{l_m} y_m computed by repeated multiplication (bit-reproducible
// against the same helper elsewhere) whenever l_m < ell; other x_m drawn
// generic.  Verifies the weakened genericity conditions; flags the set
// Restricted.
ParameterSet build_restricted(const std::vector<Cplx>& y, Cplx eta,
                              const std::vector<int>& ell_bounds, Cplx alpha, Cplx p,
                              std::uint64_t seed = 0, double lattice_margin = 1e-4);

// eta^s * y by s successive multiplications; shared by build_restricted and
// the closed-form products so that x_m - eta^{l_m} y_m is an exact zero.
Cplx eta_pow_times(Cplx y, Cplx eta, int s);

enum class JacksonSide { X, Y };

// Multiplicative slack of the Jackson convergence condition: bound/attained on the
// x side (|p^n A prod x_m^{-1}| < min(1,|eta|^{1-ell})), attained/bound on the
// y side.  > 1 means admissible.
double convergence_margin(const ParameterSet& ps, Cplx A, int M, JacksonSide side);

// JSON round trip; complex numbers encode as [re, im] arrays, bit-exact.
std::string save_params_json(const ParameterSet& ps);
ParameterSet load_params_json(const std::string& text);

// Deterministic uniform helpers (stable across standard libraries).
struct Rng {
    std::uint64_t state;
    explicit Rng(std::uint64_t seed) : state(seed ^ 0x9e3779b97f4a7c15ull) { next(); next(); }
    std::uint64_t next() {
        // splitmix64
        std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    Cplx unit_phase() {
        const double th = uniform(0.0, 6.283185307179586476925286766559);
        return {std::cos(th), std::sin(th)};
    }
};

}  // namespace qhi
