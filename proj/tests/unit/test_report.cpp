// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include "dmqca/report.hpp"

using namespace dmqca;

namespace {

std::vector<EvalReport> sample_reports() {
  std::mt19937_64 rng(1);
  std::vector<Sample> data(10);
  for (std::size_t i = 0; i < data.size(); ++i) {
    data[i].id = std::to_string(i);
    data[i].label = Tensor::uniform({6}, 1, 5, rng);
  }
  OracleLearner oracle;
  MeanLearner mean;
  return {run_protocol(data, oracle, 2, 1), run_protocol(data, mean, 2, 1)};
}

}  // namespace

TEST(Report, TableHasHeaderAndOneRowPerMethod) {
  const auto reports = sample_reports();
  const std::string table = format_table(reports);
  for (const char* col : {"Method", "MAE", "Pearson(%)", "RVD1", "RVD2", "RVD", "MLD", "LL1", "LL2"})
    EXPECT_NE(table.find(col), std::string::npos) << col;
  EXPECT_NE(table.find("Oracle"), std::string::npos);
  EXPECT_NE(table.find("0.0000 ± 0.0000"), std::string::npos);
  EXPECT_NE(table.find("undefined"), std::string::npos);
}

TEST(Report, JsonFields) {
  const auto reports = sample_reports();
  const nlohmann::json j = reports_json(reports);
  ASSERT_EQ(j.at("reports").size(), 2u);
  const auto& oracle = j.at("reports")[0];
  EXPECT_EQ(oracle.at("method"), "Oracle");
  EXPECT_EQ(oracle.at("mae").at("mean"), 0.0);
  EXPECT_EQ(oracle.at("index_mae").size(), 6u);
  EXPECT_EQ(j.at("reports")[1].at("method"), "Mean");
  EXPECT_EQ(reports_json(reports).dump(), j.dump());
}

TEST(Report, BlandAltmanCsv) {
  BlandAltman ba;
  ba.pairs = {{1.5, 0.25}, {2.0, -1.0}};
  EXPECT_EQ(bland_altman_csv(ba), "mean,diff\n1.5,0.25\n2,-1\n");
}
