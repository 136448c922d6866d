// Runs every acceptance criterion; one PASS/FAIL line each.
#include <iostream>

#include "platoon/acceptance.hpp"

int main() {
  const auto results = platoon::run_acceptance();
  std::cout << platoon::format_results(results);
  int failed = 0;
  for (const auto& r : results) failed += r.pass ? 0 : 1;
  std::cout << (failed == 0 ? "all criteria passed" : std::to_string(failed) + " criteria failed") << '\n';
  return failed == 0 ? 0 : 1;
}
