#pragma once

// Batch runner: executes verification suites over an (n, ell) grid with
// sampled or loaded parameters and renders machine-readable reports.

#include <string>
#include <vector>

#include "qhi/report.hpp"

namespace qhi {

struct RunConfig {
    std::vector<std::string> suites{"all"};
    std::vector<int> n_list{2};
    std::vector<int> ell_list{1};
    std::uint64_t seed = 1;
    double tol = 1e-7;
    Truncation trunc;
    std::string format = "json";  // json | csv
    std::string out_path;         // empty: caller prints rendered text
    std::string params_path;      // optional parameter file, used verbatim
    int jobs = 1;
    int max_compositions = 20;    // skip grid cells with larger dim
    bool extended_precision = false;

    void validate() const;
};

struct RunOutcome {
    std::vector<CheckReport> reports;
    std::string rendered;
    int exit_code = 0;  // 0 all-pass, 1 any fail, 3 numerical machinery failure
};

RunOutcome run(const RunConfig& config);

inline const std::vector<std::string>& known_suites() {
    static const std::vector<std::string> s{"riemann",     "biorthogonality", "determinants",
                                            "qkz",         "asymptotics",     "restricted",
                                            "onedim",      "all"};
    return s;
}

}  // namespace qhi
