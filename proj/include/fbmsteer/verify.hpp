#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "fbmsteer/parallel.hpp"

namespace fbmsteer {

struct CriterionResult {
  int id = 0;
  std::string name;
  bool pass = false;
  std::string detail;            // measured-vs-threshold summary
  std::vector<double> numbers;   // measured values, serialized into the report
};

struct VerifyReport {
  std::vector<CriterionResult> results;

  bool all_pass() const;
  std::string to_csv() const;
  void print_table(std::ostream& os) const;
};

/// Runs the full acceptance suite at the given seed. Every tolerance is fixed
/// here; the report carries one row per criterion.
VerifyReport run_acceptance(std::uint64_t seed, Exec exec = Exec::parallel,
                            std::ostream* log = nullptr);

}  // namespace fbmsteer
