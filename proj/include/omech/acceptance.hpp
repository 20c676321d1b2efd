#pragma once

// Reproduction suite: each criterion regenerates a headline number from the
// reference device parameters and compares it with its target.

#include <functional>
#include <string>
#include <vector>

namespace omech::acceptance {

struct Check {
  std::string label;
  double value = 0;
  std::string target;  // human-readable target and tolerance
  bool pass = false;
};

struct CriterionResult {
  int id = 0;
  std::string name;
  std::vector<Check> checks;
  std::string error;  // set when the pipeline threw

  bool pass() const;
  // "PASS 1 ground-state cooling" followed by the check summary.
  std::string line() const;
};

CriterionResult ground_state_cooling();
CriterionResult thermal_decoherence();
CriterionResult amplifier_calibration();
CriterionResult squeezing_bookkeeping();
CriterionResult dephasing_extraction();
CriterionResult oracle_equivalence();
CriterionResult noise_budgets();
CriterionResult device_figures();
CriterionResult g0_sweep();

struct Criterion {
  int id;
  const char* name;
  std::function<CriterionResult()> run;
};

const std::vector<Criterion>& criteria();

// Runs one criterion, converting exceptions into a failed result.
CriterionResult run_criterion(const Criterion& c);

}  // namespace omech::acceptance
