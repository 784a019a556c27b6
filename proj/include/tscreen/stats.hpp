#pragma once

#include <cstdint>
#include <optional>
#include <string_view>

namespace tscreen {

/// Rows: target stratum / complement stratum. Columns: current window / reference window.
struct ContingencyTable {
  std::uint64_t a = 0;  // target, current
  std::uint64_t b = 0;  // target, reference
  std::uint64_t c = 0;  // complement, current
  std::uint64_t d = 0;  // complement, reference

  std::uint64_t total() const { return a + b + c + d; }
  friend bool operator==(const ContingencyTable&, const ContingencyTable&) = default;
};

enum class TestKind { kFisher, kChiSquare };

std::string_view test_name(TestKind kind);

struct TestResult {
  double p_value = 1.0;              // elevation-sided
  std::optional<double> statistic;   // chi-square only
  TestKind test_used = TestKind::kFisher;
  double expected_a = 0.0;
};

struct ChiSquareResult {
  double statistic = 0.0;
  double two_sided_p = 1.0;  // upper tail of chi-square(1)
  double p_value = 1.0;      // elevation-sided: two_sided_p / 2 when a > expected_a, else 1
};

/// (a+b)(a+c)/N. Throws StatError on an empty table.
double expected_count(const ContingencyTable& t);

/// P(X >= a) for X hypergeometric with the table's margins.
double fisher_exact_p(const ContingencyTable& t);

/// Pearson statistic without continuity correction, 1 degree of freedom.
/// Throws StatError if any expected cell is zero.
ChiSquareResult chi_square_p(const ContingencyTable& t);

/// Upper tail of chi-square(1) at x: erfc(sqrt(x / 2)).
double chi_square_1_upper_tail(double x);

/// Fisher when any expected cell is below 5 or N < 200, chi-square otherwise.
TestKind select_test(const ContingencyTable& t);

/// Routes via select_test. An empty table yields p = 1, expected 0.
TestResult run_test(const ContingencyTable& t);

}  // namespace tscreen
