#pragma once
// Acceptance suite: one record per criterion A1..A12 plus diagnostic
// companions that are reported but do not gate the exit status.

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace toeplitz::acceptance {

struct CriterionResult {
  std::string id;
  std::string description;
  double measured = 0.0;
  double bound = 0.0;
  bool pass = false;
  bool gating = true;
  std::string note;
};

struct SuiteOptions {
  std::uint64_t seed = 20240611;
  // Called after each criterion finishes (progress reporting).
  std::function<void(const CriterionResult&)> on_result;
};

// Seed from TP_SEED when set, the default otherwise.
std::uint64_t seed_from_env();

std::vector<CriterionResult> run_all(const SuiteOptions& opts = {});
bool all_gating_pass(const std::vector<CriterionResult>& results);

// "A3   PASS  measured=... bound=...  description [note]"
std::string format_line(const CriterionResult& r);

}  // namespace toeplitz::acceptance
