#pragma once

// Verification suites: each identity of the underlying theory becomes a
// residual computation returning a structured CheckReport.

#include <chrono>
#include <optional>
#include <string>
#include <vector>

#include "qhi/pairings.hpp"

namespace qhi {

struct CheckReport {
    std::string check_name;
    std::string parameters_digest;
    double max_abs_residual = 0.0;
    double max_rel_residual = 0.0;
    std::optional<Eigen::MatrixXd> per_entry_residuals;
    double elapsed_seconds = 0.0;
    bool pass = false;
    std::string note;  // flagged skips, error diagnostics
    std::uint64_t seed = 0;
    ParameterSet params;
    double tolerance = 0.0;
};

// --- closed-form products ----------------------------------------------------

// alpha_{l,m} = alpha prod_{j<m} eta^{-2 l_j} x_j / y_j   (1-based m)
Cplx alpha_lm(const Composition& comp, int m, const ParameterSet& ps);

// Diagonal weight M_m of the bilinear sum rule (the squared norm of the
// trigonometric basis vector); an exact zero under the restricted
// construction when m has a part above its bound.
Cplx product_M(const Composition& comp, const ParameterSet& ps);

// Diagonal weight N_l of the bilinear sum rule: the closed theta product
// equal to S_ell(W'_l, W_l).
Cplx product_N(const Composition& comp, const ParameterSet& ps, const Truncation& trunc);

// Closed form of the diagonal S(w'_l, w_l) (== 1 / product_M).
Cplx product_S_diag(const Composition& comp, const ParameterSet& ps);

ScaledCplx closed_detX(const ParameterSet& ps, const Truncation& trunc);
ScaledCplx closed_Xi(const ParameterSet& ps, const Truncation& trunc);
ScaledCplx closed_detQ(const ParameterSet& ps, const Truncation& trunc);
ScaledCplx closed_detIW(const ParameterSet& ps, const Truncation& trunc);
ScaledCplx closed_detIG(const ParameterSet& ps, const Truncation& trunc);
ScaledCplx closed_detS(const ParameterSet& ps, const Truncation& trunc);
ScaledCplx closed_detIF(const ParameterSet& ps, const Truncation& trunc);

// Asymptotic-zone limits of the diagonal pairing-matrix entries.
Cplx closed_limI_diag(const Composition& comp, const ParameterSet& ps, const Truncation& trunc);
Cplx closed_limI_prime_diag(const Composition& comp, const ParameterSet& ps,
                            const Truncation& trunc);

// --- suites ------------------------------------------------------------------

CheckReport verify_riemann(const ParameterSet& ps, const Truncation& trunc, double tol);
CheckReport verify_biorthogonality(const ParameterSet& ps, const Truncation& trunc, double tol);
CheckReport verify_determinants(const ParameterSet& ps, const Truncation& trunc, double tol,
                                std::uint64_t seed);
CheckReport verify_qkz(const ParameterSet& ps, const Truncation& trunc, double tol,
                       std::uint64_t seed);

struct AsymptoticsConfig {
    std::vector<double> rho_list{1e-1, 1e-2, 1e-3};
    double final_tol = 1e-3;  // relative deviation of diagonals at the last rho
};
CheckReport verify_asymptotics(int n, int ell, std::uint64_t seed, const AsymptoticsConfig& cfg,
                               const Truncation& trunc);

CheckReport verify_restricted(int n, const std::vector<int>& ell_bounds, std::uint64_t seed,
                              const Truncation& trunc, double tol);

struct OnedimConfig {
    int phi_draws = 100;
    double phi_tol = 1e-9;
    bool extended_precision = false;
};
CheckReport verify_onedim(int n, std::uint64_t seed, const Truncation& trunc, double tol,
                          const OnedimConfig& cfg = {});

// Explicit basic-hypergeometric bilinear identities, evaluated directly
// through phi_series; returns the max relative residual over the draws.
// Which identities run depends on n: the general-n pair always, the 2phi1
// identity at n = 2, both 3phi2 identities at n = 3.
double phi_identity_residual(int n, std::uint64_t seed, int draws, const Truncation& trunc,
                             bool extended_precision = false);

}  // namespace qhi
