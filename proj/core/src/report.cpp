// SPDX-License-Identifier: Apache-2.0
#include "dmqca/report.hpp"

#include <cstdio>
#include <sstream>

namespace dmqca {
namespace {

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string pad(const std::string& s, std::size_t width) {
  return s.size() >= width ? s : s + std::string(width - s.size(), ' ');
}

nlohmann::json optional_number(const std::optional<double>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

}  // namespace

std::string format_table(std::span<const EvalReport> reports) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> header{"Method", "MAE", "Pearson(%)"};
  for (const char* n : kIndexNames) header.emplace_back(n);
  rows.push_back(header);
  for (const auto& r : reports) {
    std::vector<std::string> row;
    std::string method = r.method;
    if (r.failed_folds > 0) {
      method += " [" + std::to_string(r.failed_folds) + "/" + std::to_string(r.folds) +
                " folds failed]";
    }
    row.push_back(method);
    row.push_back(fixed(r.mae, 4) + " ± " + fixed(r.mae_sd_samples, 4));
    row.push_back(r.pearson_defined ? fixed(r.pearson_mean, 2) + " ± " + fixed(r.pearson_sd, 2)
                                    : std::string("undefined"));
    for (double v : r.index_mae) row.push_back(fixed(v, 4));
    rows.push_back(std::move(row));
  }
  std::vector<std::size_t> widths(header.size(), 0);
  for (const auto& row : rows) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      // "±" is two bytes but one column.
      std::size_t w = row[c].size();
      if (row[c].find("±") != std::string::npos) --w;
      widths[c] = std::max(widths[c], w);
    }
  }
  std::ostringstream out;
  out << "# MAE in mm as mean ± sd over held-out samples; Pearson(%) as mean ± sd over "
         "indices and folds; Bland-Altman sd uses N-1\n";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& row = rows[i];
    for (std::size_t c = 0; c < row.size(); ++c) {
      std::size_t extra = row[c].find("±") != std::string::npos ? 1 : 0;
      out << (c == 0 ? "" : "  ") << (c + 1 == row.size() ? row[c] : pad(row[c], widths[c] + extra));
    }
    out << '\n';
    if (i == 0) {
      std::size_t total = 0;
      for (std::size_t w : widths) total += w;
      out << std::string(total + 2 * (widths.size() - 1), '-') << '\n';
    }
  }
  return out.str();
}

nlohmann::json report_json(const EvalReport& r) {
  nlohmann::json j;
  j["method"] = r.method;
  j["folds"] = r.folds;
  j["failed_folds"] = r.failed_folds;
  j["samples"] = r.samples;
  j["mae"] = {{"mean", r.mae},
              {"sd_over_samples", r.mae_sd_samples},
              {"sd_over_folds", r.mae_sd_folds}};
  nlohmann::json idx = nlohmann::json::object();
  for (std::size_t k = 0; k < kNumIndices; ++k) idx[kIndexNames[k]] = r.index_mae[k];
  j["index_mae"] = idx;
  j["pearson_percent"] = {
      {"aggregation", "per index per fold, mean and sd over defined pairs"},
      {"defined", r.pearson_defined},
      {"mean", r.pearson_defined ? nlohmann::json(r.pearson_mean) : nlohmann::json(nullptr)},
      {"sd", r.pearson_defined ? nlohmann::json(r.pearson_sd) : nlohmann::json(nullptr)},
      {"undefined_count", r.pearson_undefined}};
  nlohmann::json pooled = nlohmann::json::object();
  for (std::size_t k = 0; k < kNumIndices; ++k) {
    pooled[kIndexNames[k]] = optional_number(r.pooled_pearson[k]);
  }
  j["pooled_pearson_percent"] = pooled;
  nlohmann::json ba = nlohmann::json::object();
  for (std::size_t k = 0; k < kNumIndices; ++k) {
    const auto& b = r.bland_altman[k];
    ba[kIndexNames[k]] = {{"mean_diff", b.mean_diff},
                          {"sd_diff", b.sd_diff},
                          {"loa_low", b.loa_low},
                          {"loa_high", b.loa_high}};
  }
  j["bland_altman"] = ba;
  j["bland_altman_sd"] = "sample (N-1)";
  nlohmann::json folds = nlohmann::json::array();
  for (const auto& o : r.fold_outcomes) {
    nlohmann::json f;
    f["fold"] = o.fold;
    f["failed"] = o.failed;
    if (o.failed) f["error"] = o.error;
    f["test_ids"] = o.test_ids;
    f["mae"] = o.failed ? nlohmann::json(nullptr) : nlohmann::json(o.mae);
    nlohmann::json pr = nlohmann::json::object();
    for (std::size_t k = 0; k < kNumIndices; ++k) pr[kIndexNames[k]] = optional_number(o.pearson[k]);
    f["pearson"] = pr;
    folds.push_back(std::move(f));
  }
  j["folds_detail"] = folds;
  return j;
}

nlohmann::json reports_json(std::span<const EvalReport> reports) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& r : reports) arr.push_back(report_json(r));
  return {{"reports", arr}};
}

std::string bland_altman_csv(const BlandAltman& stats) {
  std::ostringstream out;
  out << "mean,diff\n";
  char buf[96];
  for (const auto& [m, d] : stats.pairs) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", m, d);
    out << buf;
  }
  return out.str();
}

}  // namespace dmqca
