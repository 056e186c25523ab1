#pragma once

#include <complex>
#include <stdexcept>
#include <string>

namespace qhi {

using Cplx = std::complex<double>;

inline constexpr int kMaxVars = 6;  // hard cap on ell; symmetrization is ell!

// Truncation policy for all series/product evaluations and Jackson sums.
// Every truncated result carries an a-posteriori tail bound; evaluation
// throws TailBoundError if the bound cannot be met within max_terms.
struct Truncation {
    double series_tail_tol = 1e-14;
    int max_terms = 4000;
    int jackson_shell_max = 120;
    // shell-stopping tolerance for Jackson sums; 0 follows series_tail_tol.
    // Verification suites relax this to a fraction of their check tolerance.
    double shell_tail_tol = 0.0;

    double jackson_tail_tol() const {
        return shell_tail_tol > 0.0 ? shell_tail_tol : series_tail_tol;
    }
    void validate() const {
        if (!(series_tail_tol > 0.0)) throw std::invalid_argument("series_tail_tol must be > 0");
        if (max_terms < 1) throw std::invalid_argument("max_terms must be >= 1");
        if (jackson_shell_max < 0) throw std::invalid_argument("jackson_shell_max must be >= 0");
        if (shell_tail_tol < 0.0) throw std::invalid_argument("shell_tail_tol must be >= 0");
    }
};

struct QhiError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// |p| >= 1, u = 0 in theta, negative k, ... : the input is outside the domain.
struct DomainError : QhiError {
    using QhiError::QhiError;
};

// Tail bound still above tolerance at max_terms, or the ratio test is inconclusive.
struct TailBoundError : QhiError {
    using QhiError::QhiError;
};

// Evaluation point within the configured margin of a declared pole family.
struct PoleProximityError : QhiError {
    using QhiError::QhiError;
};

// Series/sum diverges or a required convergence condition is violated.
struct ConvergenceError : QhiError {
    using QhiError::QhiError;
};

// Iterated residue hit a pole of order >= 2 in one variable.
struct NonSimplePoleError : QhiError {
    using QhiError::QhiError;
};

// A genericity (p^Z-avoidance) condition fails within the lattice margin.
struct GenericityError : QhiError {
    using QhiError::QhiError;
};

// Collocation matrix persistently ill-conditioned.
struct ConditioningError : QhiError {
    using QhiError::QhiError;
};

// A function handed to coordinates_of does not lie in the frame's space.
struct MembershipError : QhiError {
    using QhiError::QhiError;
};

}  // namespace qhi
