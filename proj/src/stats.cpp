#include "tscreen/stats.hpp"

#include <algorithm>
#include <cmath>

#include "tscreen/errors.hpp"

namespace tscreen {
namespace {

double log_factorial(std::uint64_t n) { return std::lgamma(static_cast<double>(n) + 1.0); }

double log_choose(std::uint64_t n, std::uint64_t k) {
  return log_factorial(n) - log_factorial(k) - log_factorial(n - k);
}

}  // namespace

std::string_view test_name(TestKind kind) { return kind == TestKind::kFisher ? "fisher" : "chi_square"; }

double expected_count(const ContingencyTable& t) {
  const auto n = t.total();
  if (n == 0) throw StatError("expected count of an empty table");
  return static_cast<double>(t.a + t.b) * static_cast<double>(t.a + t.c) / static_cast<double>(n);
}

double fisher_exact_p(const ContingencyTable& t) {
  if (t.a == 0) return 1.0;
  const std::uint64_t row1 = t.a + t.b;  // target stratum
  const std::uint64_t row2 = t.c + t.d;
  const std::uint64_t col1 = t.a + t.c;  // current window
  const std::uint64_t n = row1 + row2;
  const std::uint64_t lo = col1 > row2 ? col1 - row2 : 0;
  const std::uint64_t hi = std::min(row1, col1);
  if (t.a <= lo) return 1.0;

  // P(X = x) = C(row1, x) C(row2, col1 - x) / C(n, col1); successive terms by ratio.
  const double log_denominator = log_choose(n, col1);
  auto log_pmf = [&](std::uint64_t x) {
    return log_choose(row1, x) + log_choose(row2, col1 - x) - log_denominator;
  };

  // Sum the shorter side of the distribution around the observed cell.
  const double mean = static_cast<double>(row1) * static_cast<double>(col1) / static_cast<double>(n);
  if (static_cast<double>(t.a) >= mean) {
    double term = std::exp(log_pmf(t.a));
    double sum = term;
    for (std::uint64_t x = t.a; x < hi; ++x) {
      term *= static_cast<double>(row1 - x) * static_cast<double>(col1 - x) /
              (static_cast<double>(x + 1) * static_cast<double>(row2 - col1 + x + 1));
      sum += term;
      if (term < sum * 1e-17) break;
    }
    return std::clamp(sum, 0.0, 1.0);
  }
  // Lower tail P(X <= a - 1), walking down from a - 1.
  double term = std::exp(log_pmf(t.a - 1));
  double sum = term;
  for (std::uint64_t x = t.a - 1; x > lo; --x) {
    term *= static_cast<double>(x) * static_cast<double>(row2 - col1 + x) /
            (static_cast<double>(row1 - x + 1) * static_cast<double>(col1 - x + 1));
    sum += term;
    if (term < sum * 1e-17) break;
  }
  return std::clamp(1.0 - sum, 0.0, 1.0);
}

double chi_square_1_upper_tail(double x) {
  if (!(x > 0.0)) return 1.0;
  return std::erfc(std::sqrt(x / 2.0));
}

ChiSquareResult chi_square_p(const ContingencyTable& t) {
  const double n = static_cast<double>(t.total());
  const double r1 = static_cast<double>(t.a + t.b);
  const double r2 = static_cast<double>(t.c + t.d);
  const double c1 = static_cast<double>(t.a + t.c);
  const double c2 = static_cast<double>(t.b + t.d);
  if (n == 0.0 || r1 == 0.0 || r2 == 0.0 || c1 == 0.0 || c2 == 0.0) {
    throw StatError("chi-square test with a zero expected cell");
  }
  const double ea = r1 * c1 / n, eb = r1 * c2 / n, ec = r2 * c1 / n, ed = r2 * c2 / n;
  auto cell = [](double obs, double exp) { return (obs - exp) * (obs - exp) / exp; };
  ChiSquareResult r;
  r.statistic = cell(static_cast<double>(t.a), ea) + cell(static_cast<double>(t.b), eb) +
                cell(static_cast<double>(t.c), ec) + cell(static_cast<double>(t.d), ed);
  r.two_sided_p = chi_square_1_upper_tail(r.statistic);
  r.p_value = static_cast<double>(t.a) > ea ? r.two_sided_p / 2.0 : 1.0;
  return r;
}

TestKind select_test(const ContingencyTable& t) {
  const auto n = t.total();
  if (n < 200) return TestKind::kFisher;
  const double nn = static_cast<double>(n);
  const double r1 = static_cast<double>(t.a + t.b), r2 = static_cast<double>(t.c + t.d);
  const double c1 = static_cast<double>(t.a + t.c), c2 = static_cast<double>(t.b + t.d);
  const double smallest = std::min({r1 * c1, r1 * c2, r2 * c1, r2 * c2}) / nn;
  return smallest < 5.0 ? TestKind::kFisher : TestKind::kChiSquare;
}

TestResult run_test(const ContingencyTable& t) {
  TestResult r;
  if (t.total() == 0) return r;
  r.expected_a = expected_count(t);
  r.test_used = select_test(t);
  if (r.test_used == TestKind::kFisher) {
    r.p_value = fisher_exact_p(t);
  } else {
    auto chi = chi_square_p(t);
    r.statistic = chi.statistic;
    r.p_value = chi.p_value;
  }
  return r;
}

}  // namespace tscreen
