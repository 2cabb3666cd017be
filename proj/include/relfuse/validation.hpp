#pragma once

#include <cstdint>
#include <iosfwd>

namespace relfuse {

struct ValidationOptions {
  std::uint64_t seed = 1;
  /// Test hook: evaluate the degenerate series check with the wrong
  /// middle term 1 - 2 G1 G2 instead of 1 - 2 (1 - G1)(1 - G2). The check
  /// must then fail.
  bool inject_series_typo = false;
};

/// Runs the worked-example, Kaplan-Meier, Monte Carlo and beta-approximation
/// checks at reduced sizes and prints one PASS/FAIL line each. Returns true
/// when every check passes.
bool run_validation(std::ostream& report, const ValidationOptions& options = {});

}  // namespace relfuse
