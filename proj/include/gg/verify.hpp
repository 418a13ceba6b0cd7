#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace gg {

// Result of one randomized oracle check. pass is exactly
// (max_error <= tolerance); skipped counts instances rejected by an
// invertibility/conditioning precondition rather than failed.
struct CheckReport {
  std::string name;
  std::size_t instances = 0;
  std::size_t skipped = 0;
  double max_error = 0.0;
  double tolerance = 0.0;
  bool pass = false;
  std::string note;
};

// sum_i Lambda_i^T B Lambda_i == (1/N) B (.) L, checked by explicit summation
// against the Hadamard form for random B at every N in [n_min, n_max].
CheckReport check_property1(std::size_t n_min, std::size_t n_max, std::size_t trials,
                            std::uint64_t seed);

// The Hadamard-form step sizes against (a) a Gaussian-elimination solve of the
// unsimplified summation-form normal equations and (b) finite-difference
// stationarity and local minimality of the spread objective.
CheckReport check_step_sizes(std::size_t d, std::size_t n, std::size_t trials, std::uint64_t seed);

// Condition-number-1 quadratics reach the optimum in one update (alpha = 1,
// tiny epsilon); a rho=2 control confirms the residual is not trivially zero.
CheckReport check_one_step(const std::vector<std::size_t>& d_range,
                           const std::vector<std::size_t>& n_range, std::size_t trials,
                           std::uint64_t seed);

// G * (G^T G)^{-1} (G^T Theta) equals the orthogonal projection of Theta onto
// span(G), with the projector built independently by Gram-Schmidt; and the
// post-conditioner is the identity on unit isotropic quadratics.
CheckReport check_postcondition(std::size_t d, std::size_t n, std::size_t trials,
                                std::uint64_t seed);

// All four checks at their default settings.
std::vector<CheckReport> run_all_checks(std::uint64_t seed);

// One line per report: [PASS|FAIL] name instances=... max_error=... tol=...
void print_reports(const std::vector<CheckReport>& reports, std::ostream& out);

bool all_pass(const std::vector<CheckReport>& reports);

}  // namespace gg
