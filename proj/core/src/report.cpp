#include "qhi/report.hpp"

#include <nlohmann/json.hpp>
#include <sstream>

namespace qhi {

using nlohmann::json;

namespace {

json report_to_json(const CheckReport& r) {
    json j;
    j["check_name"] = r.check_name;
    j["seed"] = r.seed;
    j["parameters"] = json::parse(save_params_json(r.params));
    j["parameters_digest"] = r.parameters_digest;
    j["max_abs_residual"] = r.max_abs_residual;
    j["max_rel_residual"] = r.max_rel_residual;
    j["tolerance"] = r.tolerance;
    j["pass"] = r.pass;
    j["elapsed_seconds"] = r.elapsed_seconds;
    j["note"] = r.note;
    if (r.per_entry_residuals) {
        json m = json::array();
        for (int i = 0; i < r.per_entry_residuals->rows(); ++i) {
            json row = json::array();
            for (int k = 0; k < r.per_entry_residuals->cols(); ++k)
                row.push_back((*r.per_entry_residuals)(i, k));
            m.push_back(row);
        }
        j["per_entry_residuals"] = m;
    }
    return j;
}

std::string csv_escape(const std::string& s) {
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += "\"\"";
        else out += c;
    }
    out += "\"";
    return out;
}

}  // namespace

std::string reports_to_json(const std::vector<CheckReport>& reports) {
    json arr = json::array();
    for (const auto& r : reports) arr.push_back(report_to_json(r));
    return arr.dump(2);
}

std::string reports_to_csv(const std::vector<CheckReport>& reports) {
    std::ostringstream os;
    os << "check_name,seed,n,ell,parameters_digest,max_abs_residual,max_rel_residual,"
          "tolerance,pass,elapsed_seconds,note,parameters\n";
    os.precision(17);
    for (const auto& r : reports) {
        os << r.check_name << ',' << r.seed << ',' << r.params.n << ',' << r.params.ell << ','
           << r.parameters_digest << ',' << r.max_abs_residual << ',' << r.max_rel_residual << ','
           << r.tolerance << ',' << (r.pass ? "true" : "false") << ',' << r.elapsed_seconds << ','
           << csv_escape(r.note) << ',' << csv_escape(save_params_json(r.params)) << '\n';
    }
    return os.str();
}

}  // namespace qhi
