#include "gg/verify.hpp"

#include <gtest/gtest.h>

#include <sstream>

using gg::CheckReport;

TEST(VerifyTest, Property1PassesAcrossGroupSizes) {
  CheckReport report = gg::check_property1(2, 8, 100, 424242);
  EXPECT_TRUE(report.pass);
  EXPECT_EQ(report.instances, 700u);
  EXPECT_LE(report.max_error, 1e-12);
}

TEST(VerifyTest, StepSizeEquivalenceAndStationarity) {
  for (std::size_t n = 2; n <= 6; ++n) {
    CheckReport report = gg::check_step_sizes(20, n, 50, 7);
    EXPECT_TRUE(report.pass) << "n=" << n << " max_error=" << report.max_error;
    EXPECT_GT(report.instances, 0u);
    EXPECT_LE(report.max_error, 1e-10);
  }
}

TEST(VerifyTest, OneStepConvergence) {
  CheckReport report = gg::check_one_step({2, 10, 100}, {2, 3, 5}, 20, 11);
  EXPECT_TRUE(report.pass);
  EXPECT_EQ(report.instances, 180u);
  EXPECT_LE(report.max_error, 1e-8);
  // The rho=2 control must show a visibly nonzero residual.
  EXPECT_NE(report.note.find("rho2_control_residual"), std::string::npos);
  EXPECT_EQ(report.note.find("UNEXPECTEDLY_SMALL"), std::string::npos);
}

TEST(VerifyTest, PostconditionProjection) {
  CheckReport report = gg::check_postcondition(20, 4, 50, 13);
  EXPECT_TRUE(report.pass) << "max_error=" << report.max_error;
  EXPECT_GT(report.instances, 0u);
}

TEST(VerifyTest, ReportsAreDeterministicGivenSeed) {
  auto run = [](std::uint64_t seed) {
    std::ostringstream out;
    gg::print_reports(gg::run_all_checks(seed), out);
    return out.str();
  };
  std::string first = run(12345);
  std::string second = run(12345);
  EXPECT_EQ(first, second);
  EXPECT_NE(first, run(54321));
}

TEST(VerifyTest, AllChecksPassAtDefaults) {
  auto reports = gg::run_all_checks(20240901);
  EXPECT_TRUE(gg::all_pass(reports));
  std::ostringstream out;
  gg::print_reports(reports, out);
  EXPECT_NE(out.str().find("[PASS]"), std::string::npos);
  EXPECT_EQ(out.str().find("[FAIL]"), std::string::npos);
}
