#include <gtest/gtest.h>

#include <sstream>

#include "combkit/errors.hpp"
#include "combkit/verify.hpp"

using namespace combkit;

namespace {

SuiteOptions small(std::uint64_t seed = 5) {
  SuiteOptions o;
  o.seed = seed;
  o.trials = 2;
  return o;
}

void expect_no_fail(const std::vector<CheckRecord>& recs) {
  ASSERT_FALSE(recs.empty());
  for (const auto& r : recs) {
    EXPECT_NE(r.status, CheckStatus::fail) << r.name << " lhs=" << r.lhs << " rhs=" << r.rhs;
    EXPECT_FALSE(r.runtime_ms.has_value());
  }
}

}  // namespace

TEST(Suites, SmallRunsHaveNoFailures) {
  for (const char* s : {"t1", "t2", "t3", "t4", "t9", "lemma8"}) {
    SCOPED_TRACE(s);
    const auto recs = run_suite(s, small());
    expect_no_fail(recs);
    for (const auto& r : recs) {
      EXPECT_EQ(r.suite, s);
      EXPECT_FALSE(r.paper_ref.empty());
      EXPECT_FALSE(r.seeds.empty() && r.name != "t9/identity-choi");
    }
  }
}

TEST(Suites, UnknownSuiteIsInputError) {
  EXPECT_THROW(run_suite("t7", small()), InputError);
}

TEST(Suites, SameSeedGivesIdenticalReports) {
  const auto a = run_suite("lemma8", small(9));
  const auto b = run_suite("lemma8", small(9));
  EXPECT_EQ(report_json("lemma8", small(9), a).dump(), report_json("lemma8", small(9), b).dump());
  EXPECT_EQ(report_csv(a), report_csv(b));
  const auto c = run_suite("lemma8", small(10));
  EXPECT_NE(report_csv(a), report_csv(c));
}

TEST(Suites, ThreadCountDoesNotChangeResults) {
  SuiteOptions one = small(3);
  one.trials = 4;
  SuiteOptions many = one;
  many.jobs = 3;
  EXPECT_EQ(report_csv(suite_t3_states(one, 4)), report_csv(suite_t3_states(many, 4)));
}

TEST(Suites, TimingIsOptIn) {
  SuiteOptions o = small();
  o.timing = true;
  for (const auto& r : suite_lemma8(o, 2)) {
    ASSERT_TRUE(r.runtime_ms.has_value());
    EXPECT_GE(*r.runtime_ms, 0.0);
  }
}

TEST(Suites, ZeroEpsilonSeriesIsTight) {
  SuiteOptions o = small();
  o.epsilon = 0.0;
  const auto recs = suite_t9_series(o, 2);
  expect_no_fail(recs);
  for (const auto& r : recs)
    if (r.name.ends_with("/left") || r.name.ends_with("/right"))
      EXPECT_NEAR(r.lhs, r.rhs, 1e-5 * std::max(1.0, std::abs(r.rhs))) << r.name;
}

TEST(Reports, JsonLayout) {
  const auto recs = suite_t4(small(), 1);
  const Json j = report_json("t4", small(), recs);
  EXPECT_EQ(j.at("version"), 1);
  EXPECT_EQ(j.at("suite"), "t4");
  EXPECT_EQ(j.at("seed"), 5);
  EXPECT_EQ(j.at("checks").size(), recs.size());
  const auto s = summarize(recs);
  EXPECT_EQ(j.at("summary").at("pass").get<int>(), s.pass);
  EXPECT_EQ(j.at("summary").at("fail").get<int>(), s.fail);
  for (const auto& c : j.at("checks")) {
    for (const char* key : {"name", "paper_ref", "status", "lhs", "rhs", "margin",
                            "direction_certified", "seeds", "runtime_ms"})
      EXPECT_TRUE(c.contains(key)) << key;
    EXPECT_TRUE(c.at("runtime_ms").is_null());
  }
}

TEST(Reports, CsvHasOneRowPerCheck) {
  CheckRecord r;
  r.suite = "x";
  r.name = "x/a";
  r.paper_ref = "a \"quoted\", text";
  r.status = CheckStatus::pass;
  r.lhs = 1.0;
  r.rhs = INFINITY;
  r.seeds = {1, 2};
  const std::string csv = report_csv({r, r});
  std::istringstream is(csv);
  std::string line;
  int lines = 0;
  while (std::getline(is, line)) ++lines;
  EXPECT_EQ(lines, 3);
  EXPECT_NE(csv.find(",inf,"), std::string::npos);
  EXPECT_NE(csv.find("\"a \"\"quoted\"\", text\""), std::string::npos);
  EXPECT_NE(csv.find(",1 2,"), std::string::npos);
}
