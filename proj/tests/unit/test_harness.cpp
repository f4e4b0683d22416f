#include <gtest/gtest.h>

#include <sstream>

#include "drsim/event_log.hpp"
#include "drsim/harness/audit.hpp"
#include "drsim/harness/config.hpp"
#include "drsim/harness/experiment.hpp"
#include "drsim/harness/expr.hpp"
#include "drsim/harness/report.hpp"

using namespace drsim;
using namespace drsim::harness;
using nlohmann::json;

namespace {

json minimal() {
  return json{{"protocol", "alg1"}, {"n", 64}, {"k", 16}, {"beta", 0.25}, {"trials", 10}, {"seed", 1}};
}

std::string lines_after_header(const std::string& csv) {
  return csv.substr(csv.find('\n') + 1);
}

}  // namespace

TEST(Config, MinimalSpecParses) {
  const ExperimentSpec s = parse_spec(minimal());
  EXPECT_EQ(s.protocols, std::vector<std::string>{"alg1"});
  EXPECT_EQ(s.ns, std::vector<std::int64_t>{64});
  EXPECT_EQ(s.ks, std::vector<int>{16});
  EXPECT_EQ(s.betas, std::vector<Rational>{Rational(1, 4)});
  EXPECT_EQ(s.trials, 10);
  EXPECT_EQ(s.seed, 1u);
}

TEST(Config, RejectsBadValues) {
  json j = minimal();
  j["beta"] = 1.0;
  EXPECT_THROW(parse_spec(j), ConfigError);
  j = minimal();
  j["protocol"] = "no-such-protocol";
  EXPECT_THROW(parse_spec(j), ConfigError);
  j = minimal();
  j["adversary"] = "no-such-adversary";
  EXPECT_THROW(parse_spec(j), ConfigError);
  j = minimal();
  j.erase("n");
  EXPECT_THROW(parse_spec(j), ConfigError);
  EXPECT_THROW(parse_spec(json::array()), ConfigError);
}

TEST(Config, ListsMultiplyCells) {
  json j = minimal();
  j["n"] = {64, 128};
  j["k"] = {16, 32};
  EXPECT_EQ(expand_cells(parse_spec(j)).size(), 4u);
}

TEST(Expr, Arithmetic) {
  const Bindings vars{{"n", 1024}, {"k", 64}, {"gamma", 0.75}};
  EXPECT_NEAR(Expr::parse("32 * n * lg(n) / (gamma * k)").eval(vars), 32.0 * 1024 * 10 / 48, 1e-9);
  EXPECT_EQ(Expr::parse("ceil(n / 3)").eval(vars), 342);
  EXPECT_EQ(Expr::parse("min(n, k) + max(1, 2)").eval(vars), 66);
  EXPECT_EQ(Expr::parse("-k + 4").eval(vars), -60);
  EXPECT_EQ(Expr::parse("n ≤ 1024").eval(vars), 1);
  EXPECT_EQ(Expr::parse("n < 1024").eval(vars), 0);
  EXPECT_EQ(Expr::parse("2 × 3 · 4").eval(vars), 24);
  EXPECT_THROW(Expr::parse("n +").eval(vars), ExprError);
  EXPECT_THROW(Expr::parse("q + 1").eval(vars), ExprError);
}

TEST(Experiment, HonestTwoRoundAlwaysCorrect) {
  json j{{"protocol", "alg3-2round"}, {"n", 64}, {"k", 300}, {"trials", 10}, {"seed", 3},
         {"bounds", {{"q", "Q_max <= n"}}}};
  const auto sums = run_experiment(parse_spec(j));
  ASSERT_EQ(sums.size(), 1u);
  EXPECT_EQ(sums[0].trials, 10);
  EXPECT_EQ(sums[0].errors, 0);
  EXPECT_DOUBLE_EQ(sums[0].correct_freq, 1.0);
  ASSERT_EQ(sums[0].bounds.size(), 1u);
  EXPECT_TRUE(sums[0].bounds[0].ok);
}

TEST(Experiment, RoundCapErrorIsCounted) {
  json j{{"protocol", "alg1"}, {"n", 64}, {"k", 32}, {"trials", 3}, {"seed", 2}};
  RunOptions opt;
  opt.round_cap = 1;
  opt.trials = 1;
  const auto sums = run_experiment(parse_spec(j), opt);
  ASSERT_EQ(sums.size(), 1u);
  EXPECT_EQ(sums[0].trials, 1);
  EXPECT_EQ(sums[0].errors, 1);
  EXPECT_FALSE(sums[0].runs[0].ok);
  EXPECT_FALSE(sums[0].runs[0].error.empty());
}

TEST(Experiment, SameSeedSameSummary) {
  json j{{"protocol", "alg1"}, {"n", 64}, {"k", 32}, {"beta", "1/4"}, {"adversary", "contrarian"}, {"trials", 4},
         {"seed", 9}};
  const auto spec = parse_spec(j);
  RunOptions two;
  two.jobs = 2;
  std::ostringstream a, b;
  write_trials_csv(a, run_experiment(spec));
  write_trials_csv(b, run_experiment(spec, two));
  EXPECT_EQ(a.str(), b.str());
}

TEST(Report, EmptySummariesGiveHeaderOnly) {
  std::ostringstream out;
  write_summary_csv(out, {});
  EXPECT_EQ(out.str(), std::string(kSummaryHeader) + "\n");
}

TEST(Report, RowsSortedByCell) {
  CellSummary a, b;
  a.cell = Cell{"query-all", "none", 64, 8, Rational(0)};
  b.cell = Cell{"alg1", "none", 128, 8, Rational(0)};
  std::ostringstream out;
  write_summary_csv(out, {a, b});
  const std::string body = lines_after_header(out.str());
  EXPECT_EQ(body.rfind("alg1,", 0), 0u);
  EXPECT_NE(body.find("\nquery-all,"), std::string::npos);
  EXPECT_EQ(format_real(0.5), "0.500000");
}

TEST(Audit, RecomputesMetricsFromEvents) {
  json j{{"protocol", "alg1"}, {"n", 64}, {"k", 32}, {"trials", 1}, {"seed", 5}};
  ExperimentSpec spec = parse_spec(j);
  spec.record_events = true;
  const auto dir = std::filesystem::temp_directory_path() / "drsim_audit_test";
  std::filesystem::remove_all(dir);
  RunOptions opt;
  opt.event_dir = dir;
  const auto sums = run_experiment(spec, opt);
  std::filesystem::path log;
  for (const auto& e : std::filesystem::directory_iterator(dir)) {
    if (e.path().extension() == ".ndjson") log = e.path();
  }
  ASSERT_FALSE(log.empty());
  const AuditResult a = audit_file(log);
  EXPECT_TRUE(a.compared);
  EXPECT_TRUE(a.mismatches.empty());
  EXPECT_EQ(a.q_max, sums[0].q_max_max);
  std::filesystem::remove_all(dir);
}
