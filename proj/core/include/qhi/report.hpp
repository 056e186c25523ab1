#pragma once

// Machine-readable report rendering; JSON and CSV encode identical content.

#include <string>
#include <vector>

#include "qhi/identities.hpp"

namespace qhi {

std::string reports_to_json(const std::vector<CheckReport>& reports);
std::string reports_to_csv(const std::vector<CheckReport>& reports);

}  // namespace qhi
