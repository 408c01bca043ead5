// Copyright 2026 The dpboost Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "dpboost/harness.hpp"

namespace dpboost {
namespace {

namespace fs = std::filesystem;

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

// A small synthetic census-like dataset written next to a schema and config.
class HarnessTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("dpboost_harness_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
    SeededRng rng(77, 0);
    std::ofstream csv(dir_ / "data.csv");
    csv << "pub_num,pub_cat,pri_num,pri_ord,label\n";
    for (int i = 0; i < 600; ++i) {
      const double a = rng.uniform(0, 10), c = rng.uniform(-5, 5);
      const int o = static_cast<int>(rng.uniform_index(4));
      const char* cat = rng.bernoulli(0.5) ? "u" : "v";
      const double s = 0.3 * (a - 5) + 0.8 * c + (o - 1.5) + (cat[0] == 'u' ? 0.5 : -0.5);
      const bool pos = (s > 0.5) != rng.bernoulli(0.1);
      csv << a << ',' << cat << ',' << c << ",L" << o << ',' << (pos ? "yes" : "no") << '\n';
    }
    csv.close();
    std::ofstream(dir_ / "schema.json") << R"({
      "columns": [{"name": "pub_num", "kind": "numeric", "min": 0, "max": 10},
                  {"name": "pub_cat", "kind": "categorical"},
                  {"name": "pri_num", "kind": "numeric", "min": -5, "max": 5},
                  {"name": "pri_ord", "kind": "ordinal"},
                  {"name": "label", "kind": "label"}],
      "label": {"name": "label", "positive": "yes", "negative": "no"}})";
    base_ = {{"dataset", "data.csv"},
             {"schema", "schema.json"},
             {"public_columns", {"pub_num", "pub_cat"}},
             {"algorithms", {"brc", "brc-all-private", "logreg", "public-only", "dp-logreg", "pate"}},
             {"epsilons", {0.5, 2.0}},
             {"T", 8},
             {"repeats", 3},
             {"seed", 5},
             {"test_frac", 0.2},
             {"output_dir", "out"},
             {"pate_teachers", 5},
             {"trace", true}};
  }
  void TearDown() override { fs::remove_all(dir_); }

  fs::path write_config(const nlohmann::json& j, const std::string& name = "cfg.json") {
    std::ofstream(dir_ / name) << j.dump(2);
    return dir_ / name;
  }
  ExperimentConfig config(const nlohmann::json& j) {
    return load_experiment_config(write_config(j).string());
  }

  fs::path dir_;
  nlohmann::json base_;
};

TEST_F(HarnessTest, ConfigResolvesPathsAndValidates) {
  const auto cfg = config(base_);
  EXPECT_EQ(fs::path(cfg.dataset), dir_ / "data.csv");
  EXPECT_EQ(cfg.algorithms.size(), 6u);
  EXPECT_EQ(cfg.T, 8);
  auto bad = base_;
  bad["repeats"] = 0;
  EXPECT_THROW(config(bad), Error);
  bad = base_;
  bad["epsilons"] = {0.1, -1.0};
  EXPECT_THROW(config(bad), Error);
  bad = base_;
  bad["algorithms"] = {"svm"};
  EXPECT_THROW(config(bad), Error);
  bad = base_;
  bad.erase("dataset");
  EXPECT_THROW(config(bad), Error);
}

TEST_F(HarnessTest, RecordCountAndOrder) {
  auto j = base_;
  j["algorithms"] = {"brc"};
  j["repeats"] = 10;
  j["epsilons"] = {0.01, 0.02, 0.04, 0.08, 0.16};
  j["T"] = 3;
  const auto records = run_experiment(config(j), 1);
  ASSERT_EQ(records.size(), 50u);
  for (std::size_t i = 0; i < records.size(); ++i) {
    EXPECT_EQ(records[i].repeat, static_cast<int>(i % 10));
    EXPECT_TRUE(records[i].ok()) << records[i].error;
    EXPECT_GE(records[i].test_accuracy, 0.0);
    EXPECT_LE(records[i].test_accuracy, 1.0);
  }
  const auto summary = aggregate(records);
  EXPECT_EQ(summary.size(), 5u);
}

TEST_F(HarnessTest, AllAlgorithmsRunAndParallelMatchesSerial) {
  const auto cfg = config(base_);
  const auto serial = run_experiment(cfg, 1);
  const auto parallel = run_experiment(cfg, 4);
  // 4 private algorithms x 2 eps x 3 repeats + 2 non-private x 3 repeats.
  ASSERT_EQ(serial.size(), 30u);
  std::ostringstream a, b;
  write_records_jsonl(serial, a);
  write_records_jsonl(parallel, b);
  EXPECT_EQ(a.str(), b.str());
  for (const auto& r : serial) {
    EXPECT_TRUE(r.ok()) << to_string(r.algorithm) << ": " << r.error;
    EXPECT_EQ(r.epsilon.has_value(), is_private(r.algorithm));
    if (is_boosting(r.algorithm)) {
      EXPECT_EQ(r.rounds.size(), 8u);
      ASSERT_EQ(r.trace.size(), 8u);
      EXPECT_EQ(r.trace.back(), r.test_accuracy);
    }
  }
}

TEST_F(HarnessTest, RecordReplaysFromStreams) {
  auto j = base_;
  j["algorithms"] = {"brc"};
  const auto cfg = config(j);
  const auto records = run_experiment(cfg, 1);
  const auto& rec = records[4];  // eps index 1, repeat 1
  ASSERT_TRUE(rec.ok());
  const Schema schema = load_schema(cfg.schema);
  const Dataset encoded = encode(load_csv(cfg.dataset, schema), schema);
  const auto prep = prepare_repeat(encoded, schema, cfg, rec.repeat);
  SeededRng c(rec.seed, rec.streams.at("private_classifiers"));
  SeededRng l(rec.seed, rec.streams.at("laplace"));
  const PrivacyParams p{*rec.epsilon, cfg.T, cfg.c1, cfg.c2, prep.data.train.n()};
  const auto fit = brc_fit(prep.data.train, prep.split, p, LogRegLearner{cfg.hyper}, {c, l});
  EXPECT_EQ(accuracy_of(fit.ensemble.predict_all(prep.data.test.X), prep.data.test.y), rec.test_accuracy);
  EXPECT_EQ(rec.streams.at("shuffle"), stream_id(0, 1, Purpose::kShuffle));
}

TEST_F(HarnessTest, FailedCellsDoNotAbortSweep) {
  auto j = base_;
  j["algorithms"] = {"pate", "logreg"};
  j["pate_teachers"] = 200;  // shards below 10 rows
  const auto records = run_experiment(config(j), 1);
  std::size_t failed = 0;
  for (const auto& r : records) {
    if (r.algorithm == Algorithm::kPate) {
      EXPECT_FALSE(r.ok());
      EXPECT_NE(r.error.find("shard"), std::string::npos);
      ++failed;
    } else {
      EXPECT_TRUE(r.ok());
    }
  }
  EXPECT_EQ(failed, 6u);
  const auto s = aggregate(records);
  ASSERT_EQ(s.size(), 1u);
  EXPECT_EQ(s[0].algorithm, "logreg");
  auto as_json = to_json(records[0]);
  EXPECT_TRUE(as_json.contains("error"));
  EXPECT_FALSE(as_json.contains("test_accuracy"));
}

TEST_F(HarnessTest, SingleRoundTraceEqualsFinal) {
  auto j = base_;
  j["algorithms"] = {"brc", "brc-all-private"};
  j["T"] = 1;
  for (const auto& r : run_experiment(config(j), 1)) {
    ASSERT_EQ(r.trace.size(), 1u);
    EXPECT_EQ(r.trace[0], r.test_accuracy);
  }
}

TEST_F(HarnessTest, OutputsAreByteIdenticalAcrossRuns) {
  const auto cfg = config(base_);
  write_outputs(cfg, run_experiment(cfg, 2));
  const std::string csv1 = slurp(fs::path(cfg.output_dir) / "summary.csv");
  const std::string rec1 = slurp(fs::path(cfg.output_dir) / "records.jsonl");
  write_outputs(cfg, run_experiment(cfg, 1));
  EXPECT_EQ(slurp(fs::path(cfg.output_dir) / "summary.csv"), csv1);
  EXPECT_EQ(slurp(fs::path(cfg.output_dir) / "records.jsonl"), rec1);
  EXPECT_TRUE(fs::exists(fs::path(cfg.output_dir) / "traces.csv"));
  EXPECT_TRUE(fs::exists(fs::path(cfg.output_dir) / "timings.csv"));
}

ResultRecord rec(Algorithm a, std::optional<double> eps, double acc) {
  ResultRecord r;
  r.algorithm = a;
  r.epsilon = eps;
  r.test_accuracy = acc;
  return r;
}

TEST(Aggregate, SingleRecord) {
  const auto s = aggregate({rec(Algorithm::kBrc, 0.1, 0.7)});
  ASSERT_EQ(s.size(), 1u);
  EXPECT_EQ(s[0].mean, 0.7);
  EXPECT_EQ(s[0].std, 0.0);
  EXPECT_EQ(s[0].count, 1u);
}

TEST(Aggregate, SampleStd) {
  const auto s = aggregate({rec(Algorithm::kBrc, 0.1, 0.6), rec(Algorithm::kBrc, 0.1, 0.8)});
  EXPECT_DOUBLE_EQ(s[0].mean, 0.7);
  EXPECT_NEAR(s[0].std, 0.1414, 1e-4);
}

TEST(Aggregate, GroupsPerEpsilon) {
  std::vector<ResultRecord> rs;
  for (double e : {0.01, 0.02, 0.04, 0.08, 0.16}) {
    for (int r = 0; r < 10; ++r) rs.push_back(rec(Algorithm::kDpLogReg, e, 0.5 + 0.01 * r));
  }
  EXPECT_EQ(aggregate(rs).size(), 5u);
  EXPECT_THROW(aggregate({}), Error);
}

TEST(Aggregate, ConcatenatedShardsMatchWhole) {
  SeededRng rng(3, 0);
  std::vector<ResultRecord> a, b;
  for (int i = 0; i < 40; ++i) {
    auto r = rec(i % 2 ? Algorithm::kBrc : Algorithm::kPate, i % 3 ? 0.1 : 0.2, rng.uniform01());
    (i < 25 ? a : b).push_back(r);
  }
  std::vector<ResultRecord> whole = a;
  whole.insert(whole.end(), b.begin(), b.end());
  const auto s = aggregate(whole);
  // Group-wise recomputation from the two shards.
  for (const auto& row : s) {
    double sum = 0;
    std::size_t count = 0;
    for (const auto* part : {&a, &b}) {
      for (const auto& r : *part) {
        if (to_string(r.algorithm) == row.algorithm && *r.epsilon == row.epsilon) sum += r.test_accuracy, ++count;
      }
    }
    EXPECT_EQ(count, row.count);
    EXPECT_NEAR(sum / static_cast<double>(count), row.mean, 1e-15);
  }
}

std::vector<SummaryRow> five_rows() {
  return {{"brc", 0.01, 0.583, 0.05, 10}, {"brc", 0.02, 0.662, 0.04, 10}, {"brc", 0.04, 0.703, 0.03, 10},
          {"brc", 0.08, 0.719, 0.02, 10}, {"brc", 0.16, 0.7275, 0.01, 10}};
}

TEST(SummaryCsv, FiveRowsPlusHeader) {
  std::ostringstream out;
  write_summary_csv(five_rows(), out);
  const std::string s = out.str();
  EXPECT_EQ(std::count(s.begin(), s.end(), '\n'), 6);
  EXPECT_EQ(s.substr(0, s.find('\n')), "algorithm,epsilon,mean_accuracy,std,count");
}

TEST(SummaryCsv, RoundTrip) {
  auto rows = five_rows();
  rows.push_back({"logreg", std::numeric_limits<double>::infinity(), 0.7575, 0.011, 10});
  std::ostringstream out;
  write_summary_csv(rows, out);
  const auto back = parse_summary_csv(out.str());
  ASSERT_EQ(back.size(), rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    EXPECT_EQ(back[i].algorithm, rows[i].algorithm);
    EXPECT_EQ(back[i].epsilon, rows[i].epsilon);
    EXPECT_NEAR(back[i].mean, rows[i].mean, 1e-6);
    EXPECT_NEAR(back[i].std, rows[i].std, 1e-6);
    EXPECT_EQ(back[i].count, rows[i].count);
  }
  EXPECT_TRUE(std::isinf(back.back().epsilon));
}

TEST(SummaryCsv, UnwritablePath) {
  EXPECT_THROW(emit_csv(five_rows(), "/nonexistent/dir/out.csv"), Error);
  EXPECT_THROW(emit_svg(five_rows(), "/nonexistent/dir/out.svg"), Error);
  EXPECT_THROW(emit_csv({}, "/tmp/x.csv"), Error);
}

std::size_t count_of(const std::string& s, const std::string& needle) {
  std::size_t n = 0;
  for (auto p = s.find(needle); p != std::string::npos; p = s.find(needle, p + 1)) ++n;
  return n;
}

TEST(Svg, OnePolylinePerAlgorithm) {
  auto rows = five_rows();
  for (auto r : five_rows()) {
    r.algorithm = "dp-logreg";
    r.mean -= 0.05;
    rows.push_back(r);
  }
  rows.push_back({"logreg", std::numeric_limits<double>::infinity(), 0.7575, 0.01, 10});
  std::ostringstream out;
  write_svg(rows, out);
  const std::string s = out.str();
  EXPECT_EQ(count_of(s, "<polyline"), 3u);
  EXPECT_EQ(s.rfind("</svg>\n"), s.size() - 7);
  // Well-formedness smoke check: every opened element is self-closed or closed.
  EXPECT_EQ(count_of(s, "<text"), count_of(s, "</text>"));
  EXPECT_EQ(count_of(s, "<svg"), 1u);
  EXPECT_NE(s.find("epsilon (log scale)"), std::string::npos);
  EXPECT_NE(s.find(">dp-logreg<"), std::string::npos);
}

TEST(Workers, EnvironmentCap) {
  ::setenv("DPBOOST_WORKERS", "3", 1);
  EXPECT_EQ(resolve_workers(), 3u);
  EXPECT_EQ(resolve_workers(2), 2u);
  ::unsetenv("DPBOOST_WORKERS");
  EXPECT_GE(resolve_workers(), 1u);
}

int run_cli(const std::string& args) {
  const int status = std::system((std::string(DPBOOST_CLI) + " " + args + " >/dev/null 2>&1").c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

TEST_F(HarnessTest, CliExitCodesAndDeterminism) {
  auto j = base_;
  j["algorithms"] = {"brc", "dp-logreg"};
  const auto cfg_path = write_config(j);
  ASSERT_EQ(run_cli("run --config " + cfg_path.string()), 0);
  const std::string first = slurp(dir_ / "out" / "summary.csv");
  ASSERT_EQ(run_cli("run --config " + cfg_path.string()), 0);
  EXPECT_EQ(slurp(dir_ / "out" / "summary.csv"), first);

  EXPECT_EQ(run_cli("plot --in " + (dir_ / "out" / "summary.csv").string() + " --out " +
                    (dir_ / "plot.svg").string()),
            0);
  EXPECT_TRUE(fs::exists(dir_ / "plot.svg"));

  auto partial = base_;
  partial["algorithms"] = {"pate", "logreg"};
  partial["pate_teachers"] = 200;
  EXPECT_EQ(run_cli("run --config " + write_config(partial, "partial.json").string()), 2);
  EXPECT_EQ(run_cli("run --config " + (dir_ / "missing.json").string()), 1);
  EXPECT_EQ(run_cli("baseline --algo logreg --config " + cfg_path.string()), 0);
  EXPECT_TRUE(fs::exists(dir_ / "out" / "logreg" / "summary.csv"));
  EXPECT_EQ(run_cli("sensitivity-check --instances 2"), 0);

  std::ofstream(dir_ / "toy.json") << R"({"n": 200, "T": 10, "repeats": 2, "epsilons": [1, 10]})";
  EXPECT_EQ(run_cli("toy --config " + (dir_ / "toy.json").string() + " --out " + (dir_ / "toy").string()), 0);
  EXPECT_TRUE(fs::exists(dir_ / "toy" / "toy.csv"));
  EXPECT_TRUE(fs::exists(dir_ / "toy" / "toy_traces.json"));
}

}  // namespace
}  // namespace dpboost
