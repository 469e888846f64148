#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace utrad::ml {

struct FoldPlan {
  int k = 3;
  std::vector<int> fold;  ///< fold id per instance

  std::vector<std::size_t> train_indices(int f) const;
  std::vector<std::size_t> validation_indices(int f) const;
};

/// Stratified, patient-grouped k-fold assignment. Patients are visited in a
/// seeded order, largest first, and each goes to the fold holding the fewest
/// instances of the patient's majority class (then fewest instances overall).
/// Throws PreconditionError when a class occurs in fewer than k patients.
FoldPlan make_folds(std::span<const int> labels, std::span<const std::string> groups, int k,
                    std::uint64_t seed);

}  // namespace utrad::ml
