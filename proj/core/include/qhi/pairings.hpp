#pragma once

// Residue functionals, Shapovalov pairings, Jackson-sum hypergeometric
// integrals, and the pairing / change-of-basis / shift matrices
// I, I', X, Q, K_m, M_m.

#include <Eigen/Dense>

#include "qhi/functions.hpp"
#include "qhi/structured.hpp"

namespace qhi {

struct PairingMatrix {
    std::vector<Composition> order;  // canonical composition order
    Eigen::MatrixXcd entries;
};

// Res[x;eta](f) = sum over m in Z_ell^n of the iterated residue of
// t_1^{-1}..t_ell^{-1} f at x|>m[eta] (base = X) or y|>m[eta^{-1}] (base = Y).
Cplx res_functional(const TermFunction& f, const ParameterSet& ps, const Truncation& trunc,
                    LadderPoint::Base base = LadderPoint::Base::X, double pole_margin = 1e-7);

// Shapovalov pairings: S(f', g) and S_ell(F', G) are both Res[x;eta](f' g).
Cplx shapovalov_S(const TermFunction& fprime, const TermFunction& g, const ParameterSet& ps,
                  const Truncation& trunc);
Cplx shapovalov_S_ell(const TermFunction& fprime, const TermFunction& g, const ParameterSet& ps,
                      const Truncation& trunc);

struct JacksonResult {
    Cplx value{0.0, 0.0};
    JacksonSide side = JacksonSide::X;
    int shells_used = 0;
    double tail_bound = 0.0;
    double margin = 0.0;
    Cplx quasi_period_A{0.0, 0.0};
    bool decayed_geometrically = true;  // observed shell ratios < 1 past shell 1
};

// (1/ell!) Int[x^;y^;eta^](h) as the Jackson residue sum over one side's
// shifted ladders.  h is the full integrand (the t^{-1} measure is added
// internally); frame selects (x;y;eta) or the primed frame (y;x;eta^{-1}).
JacksonResult jackson_integral(const TermFunction& h, const ParameterSet& ps,
                               const Truncation& trunc, FrameView frame, JacksonSide side, Cplx A,
                               int M, double pole_margin = 1e-7,
                               ResidueWorkspace* shared_ws = nullptr);

// Convergence margins of both sides for an integrand with elliptic tag
// alpha_power in the given frame: A = p^{1-n} alpha_eff eta^{+-(1-ell)} prod base
// with alpha_eff = alpha^{alpha_power}, times p^{-1} for primed pairings (the
// pi-map trades one power of p between the elliptic constant and the
// polynomial part: pi^{-1} F'_ell[alpha; y; eta] = F_ell[p^{-1}alpha^{-1}; y; eta^{-1}]).
struct PairingDomain {
    Cplx A;
    int M;
    double margin_x, margin_y;
};
PairingDomain pairing_domain(const ParameterSet& ps, FrameView frame, int alpha_power,
                             bool primed_elliptic = false);

// I[alpha;x;y;eta](fe, ft)  = (1/ell!) Int[x;y;eta](fe ft Phi(.;x;y;eta)),
// I'[alpha;x;y;eta](fe, ft) = (1/ell!) Int[y;x;eta^{-1}](fe ft Phi(.;y;x;eta^{-1})).
// The admissible Jackson side is chosen by margin; ConvergenceError if neither
// side is admissible.
Cplx pairing_I(const TermFunction& fe, const TermFunction& ft, const ParameterSet& ps,
               const Truncation& trunc, JacksonResult* info = nullptr,
               ResidueWorkspace* shared_ws = nullptr);
Cplx pairing_I_prime(const TermFunction& fe, const TermFunction& ft, const ParameterSet& ps,
                     const Truncation& trunc, JacksonResult* info = nullptr,
                     ResidueWorkspace* shared_ws = nullptr);

// Entries I(W_n, w_m) (resp. I'(W'_n, w'_m)) with rows indexed by the weight
// label n and columns by m, both in canonical order:
//   entries(i, j) = I(W_{order[i]}, w_{order[j]}).
PairingMatrix matrix_I(const ParameterSet& ps, const Truncation& trunc);
PairingMatrix matrix_I_prime(const ParameterSet& ps, const Truncation& trunc);

// Change-of-basis matrices: w_l = sum_m X_{lm} g_m and W_l = sum_m Q_{lm} G_m,
// rows obtained by collocation in the g- (resp. G-) frame.
PairingMatrix matrix_X(const ParameterSet& ps, std::uint64_t seed, const Truncation& trunc);
PairingMatrix matrix_Q(const ParameterSet& ps, std::uint64_t seed, const Truncation& trunc);

// K_m = ((B^{-1} L_m B))^* and the primed analog, computed through collocation
// in the w- (w'-) frame; entries(a, b) with K v_b = sum_a entries(a,b) v_a.
PairingMatrix operator_K(int m, const ParameterSet& ps, bool primed, std::uint64_t seed,
                         const Truncation& trunc);

// Diagonal of M_m: mu_{l,m} = (alpha eta^{1 - l^m} prod_{j<=m} x_j/y_j)^{-l^m}.
Eigen::VectorXcd operator_M_diag(int m, const ParameterSet& ps);

// L_m eigen-scalar (alpha eta^{1-ell} prod_{j=1..n} x_j/y_j)^{l^m}.
Cplx L_scalar(int m, const Composition& comp, const ParameterSet& ps);

// Parameters with x_j -> p x_j, y_j -> p y_j for j <= m (the T_m shift).
ParameterSet shift_Tm(const ParameterSet& ps, int m);

// Cyclic shift ^k x = (x_{k+1}, ..., x_n, x_1, ..., x_k) of both x and y.
ParameterSet cycle_params(const ParameterSet& ps, int k);
Composition cycle_composition(const Composition& comp, int k);

// 1-D contour oracle: (1/2 pi i) \oint_{|t|=1} h(t) dt / t by the N-node
// trapezoid rule; valid in the |x_m| < 1 < |y_m|, |eta| > 1 domain.
Cplx contour_integral_ell1(const EvaluableFunction& h, int nodes = 2048);

}  // namespace qhi
