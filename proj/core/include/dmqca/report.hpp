// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <nlohmann/json.hpp>
#include <span>
#include <string>

#include "dmqca/evalkit.hpp"

namespace dmqca {

/// Aligned text table with columns Method, MAE, Pearson(%), RVD1 .. LL2.
std::string format_table(std::span<const EvalReport> reports);

nlohmann::json report_json(const EvalReport& report);
nlohmann::json reports_json(std::span<const EvalReport> reports);

/// "mean,diff" rows for one index.
std::string bland_altman_csv(const BlandAltman& stats);

}  // namespace dmqca
