#pragma once

// The named functions: phase functions Phi / Phi~, trigonometric and elliptic
// weight functions w, w', W, W', the g / G / theta_l bases, the
// one-dimensional functions f_k, f'_k, F_k, F'_k, and collocation frames
// representing elements of the hypergeometric spaces by sample values.
//
// Primed objects live in the swapped frame (y; x; eta^{-1}; alpha^{-1}); the
// builders take a FrameView so both frames share one transcription.

#include <Eigen/Dense>

#include "qhi/structured.hpp"

namespace qhi {

struct FrameView {
    bool swapped = false;  // x<->y, eta -> eta^{-1}, alpha -> alpha^{-1}
};

// --- phase functions -------------------------------------------------------

// Phi(t;x;y;eta) as a single product term; with view.swapped this is
// Phi(t;y;x;eta^{-1}) = Phi(t;x;y;eta)^{-1}.
TermFunction tf_phase_phi(const ParameterSet& ps, FrameView view = {});

// Phi~(t;x;y;eta): the reciprocal-Pochhammer master product whose poles are
// the residue ladders.
TermFunction tf_phase_phi_tilde(const ParameterSet& ps, FrameView view = {});

// --- weight functions ------------------------------------------------------

TermFunction tf_weight_w(const Composition& comp, const ParameterSet& ps,
                         const Truncation& trunc, FrameView view = {});
TermFunction tf_weight_w_prime(const Composition& comp, const ParameterSet& ps,
                               const Truncation& trunc);
TermFunction tf_weight_W(const Composition& comp, const ParameterSet& ps,
                         const Truncation& trunc, FrameView view = {});
TermFunction tf_weight_W_prime(const Composition& comp, const ParameterSet& ps,
                               const Truncation& trunc);

// --- g / G / theta_l bases -------------------------------------------------

TermFunction tf_basis_g(const Composition& comp, const ParameterSet& ps, FrameView view = {});

// Root data for the theta basis: omega = exp(2 pi i / n), xi^n = p,
// zeta^n = -1/A with A = alpha eta^{1-ell} prod x_m (principal roots).
struct ThetaRoots {
    Cplx A, zeta, xi, omega;
};
ThetaRoots theta_roots(const ParameterSet& ps, FrameView view = {});

// theta_l(u) = u^{l-1} prod_m theta(-zeta xi^{l-1} omega^m u), l = 1..n.
Cplx theta_basis(int l, Cplx u, const ThetaRoots& roots, Cplx p, const Truncation& trunc);

TermFunction tf_basis_G(const Composition& comp, const ParameterSet& ps, const ThetaRoots& roots,
                        FrameView view = {});

// --- one-dimensional functions (ell = 1) -----------------------------------

TermFunction tf_onedim_f(int k, const ParameterSet& ps);
TermFunction tf_onedim_f_prime(int k, const ParameterSet& ps);
TermFunction tf_onedim_F(int k, const ParameterSet& ps, const Truncation& trunc);
TermFunction tf_onedim_F_prime(int k, const ParameterSet& ps, const Truncation& trunc);

// --- collocation -----------------------------------------------------------

enum class SpaceTag { TrigW, TrigWPrime, EllW, EllWPrime, TrigG, EllG };

struct CollocationFrame {
    int n = 0, ell = 0, dim = 0;
    SpaceTag tag = SpaceTag::TrigW;
    std::vector<Composition> order;
    std::vector<std::vector<Cplx>> samples;     // dim points
    std::vector<std::vector<Cplx>> validation;  // 2*dim points
    Eigen::MatrixXcd basis_matrix;              // (i, j) = basis_j(samples[i])
    Eigen::MatrixXcd validation_matrix;
    double condition_estimate = 0.0;
    Eigen::PartialPivLU<Eigen::MatrixXcd> lu;
    std::vector<TermFunction> basis;
    ParameterSet ps;
    Truncation trunc;
};

struct CollocationOptions {
    double condition_cap = 1e9;
    int max_retries = 24;
    double sample_lo = 0.75, sample_hi = 1.35;  // coordinate modulus band
    double pole_margin = 2e-3;                  // sample rejection near pole families
};

CollocationFrame build_collocation(SpaceTag tag, const ParameterSet& ps, std::uint64_t seed,
                                   const Truncation& trunc, const CollocationOptions& opt = {});

// Solves for the coordinates of f in the frame's basis, then certifies
// membership at the 2*dim validation points.
Eigen::VectorXcd coordinates_of(const EvaluableFunction& f, const CollocationFrame& frame,
                                double membership_tol = 1e-7);

// Interpolates g(t) = f(t) * prod t_a^{-1} * prod_(m,a) (t_a - x_m)
//               * prod_{a<b} (eta t_a - t_b)/(t_a - t_b)
// by a polynomial of per-variable degree < n and returns the residual at
// fresh points (the trigonometric-space structure test).
double trig_membership_residual(const EvaluableFunction& f, const ParameterSet& ps,
                                FrameView view, std::uint64_t seed);

}  // namespace qhi
