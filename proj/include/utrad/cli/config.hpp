#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "utrad/classify/learners.hpp"
#include "utrad/classify/selectors.hpp"
#include "utrad/dataset.hpp"
#include "utrad/preprocess.hpp"

namespace utrad::cli {

/// Flat `section.key = value` settings. Lines starting with '#' are comments.
/// Unknown keys are errors.
struct RunConfig {
  std::optional<std::uint64_t> seed;
  unsigned threads = 1;
  prep::PreprocessConfig preprocess;
  double test_fraction = 30.0 / 115.0;
  std::string task = "dlm_vs_lms";
  /// task.<name>.positive / task.<name>.negative
  std::map<std::string, std::pair<std::string, std::string>> custom_tasks;
  std::vector<std::string> selectors;  ///< empty: all methods
  std::vector<std::string> learners;   ///< empty: all kinds
  double screen_alpha = 0.05;
  double plateau_tolerance = 0.01;

  static RunConfig parse(std::string_view text);
  static RunConfig load(const std::filesystem::path& path);

  data::TaskSpec task_spec(const std::string& name) const;
  std::vector<ml::SelectorConfig> selector_grid() const;
  std::vector<ml::LearnerConfig> learner_grid() const;
};

}  // namespace utrad::cli
