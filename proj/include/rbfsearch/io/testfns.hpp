#pragma once

// Analytic global optimization test problems (minimization) with known
// optimum values. Optima are re-verified by a multistart oracle in the tests.

#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rbfsearch/core.hpp"

namespace rbfsearch::testfns {

struct TestFunction {
  std::string name;
  std::vector<double> lower;
  std::vector<double> upper;
  double optimum = 0.0;
  Point argmin;             // one global minimizer
  std::string provenance;   // where the optimum value comes from
  std::function<double(std::span<const double>)> f;

  std::size_t dim() const { return lower.size(); }
  BoxDomain domain() const { return BoxDomain(lower, upper); }
};

double branin(std::span<const double> x);
double goldstein_price(std::span<const double> x);
double hartman3(std::span<const double> x);
double hartman6(std::span<const double> x);
double shekel(std::span<const double> x, int m);
double rosenbrock(std::span<const double> x);
double ackley(std::span<const double> x);
double sphere(std::span<const double> x);

/// Looks a function up by instance name (e.g. "branin", "shekel7",
/// "rosenbrock5"). Throws ConfigError for unknown names.
TestFunction get(std::string_view name);

/// Named suites: "dixon_szego" (the 12-instance desk suite), "small"
/// (instances with n <= 3).
std::vector<std::string> suite(std::string_view name);

/// Relative gap to the optimum, or absolute gap when |optimum| < 1e-8.
double optimality_gap(double found, double optimum);
bool solved(double found, double optimum, double tolerance);

}  // namespace rbfsearch::testfns
