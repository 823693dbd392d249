#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace vgmgc::verify {

/// One measured quantity against its tolerance.
struct Check {
  std::string name;
  double measured = 0.0;
  double tolerance = 0.0;
  /// How `measured` relates to `tolerance` when the check passes, e.g. "<=".
  std::string relation;
  bool pass = false;
};

struct SuiteReport {
  std::string suite;
  std::vector<Check> checks;
  double seconds = 0.0;

  bool passed() const;
  /// One line per check: `PASS name: measured <= tolerance`.
  std::string format() const;
};

/// Names accepted by run_suite, in a stable order.
const std::vector<std::string>& suite_names();

/// Throws InvalidArgument for an unknown name.
SuiteReport run_suite(const std::string& name, std::uint64_t seed);

/// Closed form for two equally believed graphs against the entrywise bound,
/// 50 random pairs with n = 30 and b in {0.6, 0.7, 0.9}.
SuiteReport theorem1(std::uint64_t seed);
/// Cross entropy between a view and its prior contribution must fall strictly
/// as that view's belief rises from 0.1 to 0.9 (others at 0.5); 20 random
/// three-view instances.
SuiteReport theorem2(std::uint64_t seed);
/// Relaxed-sample statistics over the temperature grid {0.1, 1, 2, 5, 10, 50, 100}.
SuiteReport temperature(std::uint64_t seed);
/// Finite differences on the full objective of a toy model.
SuiteReport gradients(std::uint64_t seed);
/// Hungarian ACC against exhaustive search and NMI/ARI against a separate implementation.
SuiteReport metrics_oracle(std::uint64_t seed);

}  // namespace vgmgc::verify
