#include "utrad/cli/config.hpp"

#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include "utrad/classify/pipeline.hpp"
#include "utrad/common/csv.hpp"
#include "utrad/common/error.hpp"

namespace utrad::cli {

namespace {

double to_real(const std::string& key, const std::string& v) {
  double out = 0.0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size()) {
    throw InputError("config " + key + ": expected a number, got '" + v + "'");
  }
  return out;
}

std::uint64_t to_u64(const std::string& key, const std::string& v) {
  std::uint64_t out = 0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size()) {
    throw InputError("config " + key + ": expected a nonnegative integer, got '" + v + "'");
  }
  return out;
}

std::vector<std::string> to_list(const std::string& v) {
  std::vector<std::string> out;
  for (auto& item : csv::split(v, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::set<data::TumorClass> to_classes(const std::string& v) {
  std::set<data::TumorClass> out;
  for (const auto& item : to_list(v)) out.insert(data::parse_tumor_class(item));
  return out;
}

}  // namespace

RunConfig RunConfig::parse(std::string_view text) {
  RunConfig cfg;
  std::istringstream in{std::string(text)};
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    const std::string t = csv::trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw InputError("config line " + std::to_string(number) + ": expected key = value");
    }
    const std::string key = csv::trim(std::string_view(t).substr(0, eq));
    const std::string value = csv::trim(std::string_view(t).substr(eq + 1));
    try {
      if (key == "run.seed") {
        cfg.seed = to_u64(key, value);
      } else if (key == "run.threads") {
        cfg.threads = static_cast<unsigned>(std::max<std::uint64_t>(1, to_u64(key, value)));
      } else if (key == "preprocess.clip_percentile") {
        cfg.preprocess.clip_percentile = to_real(key, value);
      } else if (key == "preprocess.rescale_max") {
        cfg.preprocess.rescale_max = to_real(key, value);
      } else if (key == "preprocess.bin_width") {
        cfg.preprocess.bin_width = to_real(key, value);
      } else if (key == "preprocess.target_spacing") {
        const auto parts = to_list(value);
        if (parts.size() != 3) throw InputError("config " + key + ": expected three comma-separated values");
        for (int a = 0; a < 3; ++a) cfg.preprocess.target_spacing_mm[a] = to_real(key, parts[a]);
      } else if (key == "split.test_fraction") {
        cfg.test_fraction = to_real(key, value);
      } else if (key == "task.name") {
        cfg.task = value;
      } else if (key.rfind("task.", 0) == 0 &&
                 (key.size() > 9 && (key.ends_with(".positive") || key.ends_with(".negative")))) {
        const bool positive = key.ends_with(".positive");
        const std::string name = key.substr(5, key.size() - 5 - 9);
        if (name.empty()) throw InputError("config " + key + ": empty task name");
        auto& entry = cfg.custom_tasks[name];
        (positive ? entry.first : entry.second) = value;
      } else if (key == "grid.selectors") {
        cfg.selectors = to_list(value);
      } else if (key == "grid.learners") {
        cfg.learners = to_list(value);
      } else if (key == "screen.alpha") {
        cfg.screen_alpha = to_real(key, value);
      } else if (key == "learncurve.tolerance") {
        cfg.plateau_tolerance = to_real(key, value);
      } else {
        throw InputError("unknown config key '" + key + "'");
      }
    } catch (const InputError& e) {
      throw InputError("config line " + std::to_string(number) + ": " + e.what());
    }
  }
  cfg.preprocess.validate();
  if (!(cfg.test_fraction > 0.0 && cfg.test_fraction < 1.0)) {
    throw InputError("config split.test_fraction must lie in (0, 1)");
  }
  // Validate grid names and custom tasks eagerly.
  cfg.selector_grid();
  cfg.learner_grid();
  for (const auto& [name, sets] : cfg.custom_tasks) cfg.task_spec(name);
  return cfg;
}

RunConfig RunConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot read config: " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

data::TaskSpec RunConfig::task_spec(const std::string& name) const {
  const auto it = custom_tasks.find(name);
  if (it == custom_tasks.end()) return data::TaskSpec::named(name);
  if (it->second.first.empty() || it->second.second.empty()) {
    throw InputError("task " + name + " needs both task." + name + ".positive and task." + name +
                     ".negative");
  }
  try {
    return data::TaskSpec(name, to_classes(it->second.first), to_classes(it->second.second));
  } catch (const PreconditionError& e) {
    throw InputError(e.what());
  }
}

std::vector<ml::SelectorConfig> RunConfig::selector_grid() const {
  const auto all = ml::default_selector_grid();
  if (selectors.empty()) return all;
  std::vector<ml::SelectorConfig> out;
  for (const auto& name : selectors) {
    bool known = false;
    for (const auto& s : all) {
      if (s.method == name) {
        out.push_back(s);
        known = true;
      }
    }
    if (!known) throw InputError("unknown feature selection method in grid.selectors: " + name);
  }
  return out;
}

std::vector<ml::LearnerConfig> RunConfig::learner_grid() const {
  const auto all = ml::default_learner_grid();
  if (learners.empty()) return all;
  std::vector<ml::LearnerConfig> out;
  for (const auto& name : learners) {
    bool known = false;
    for (const auto& l : all) {
      if (l.kind == name) {
        out.push_back(l);
        known = true;
      }
    }
    if (!known) throw InputError("unknown learner in grid.learners: " + name);
  }
  return out;
}

}  // namespace utrad::cli
