#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "utrad/cli/config.hpp"

namespace utrad::cli {

/// Raised for bad invocations (missing flags, too few points); exit code 2.
class UsageError : public Error {
 public:
  using Error::Error;
};

/// Files of one command, held in memory until every one is ready. commit()
/// writes them in order and removes the ones already written if any write
/// fails.
class OutputSet {
 public:
  explicit OutputSet(std::filesystem::path dir) : dir_(std::move(dir)) {}
  void add(const std::string& name, std::string content);
  std::vector<std::filesystem::path> commit() const;
  const std::filesystem::path& dir() const { return dir_; }

 private:
  std::filesystem::path dir_;
  std::vector<std::pair<std::string, std::string>> files_;
};

struct Context {
  RunConfig config;
  std::filesystem::path out_dir;
  std::ostream& out;
  std::ostream& err;

  std::uint64_t require_seed(const char* command) const;
};

struct ExtractArgs {
  std::filesystem::path manifest;
  std::string source = "manual";
  std::filesystem::path predicted_dir;
};

struct StudyArgs {
  std::filesystem::path features;
  std::filesystem::path manifest;
  std::string task;  ///< empty: config task.name
};

struct EvaluateArgs {
  std::filesystem::path features;
  std::filesystem::path manifest;
  std::filesystem::path model;
};

struct BayesArgs {
  std::vector<double> priors;
  std::optional<std::int64_t> tp, fn, fp, tn;
  std::optional<double> tpr, fpr;
};

OutputSet cmd_split(const Context& ctx, const std::filesystem::path& manifest);
OutputSet cmd_extract(const Context& ctx, const ExtractArgs& args);
OutputSet cmd_segeval(const Context& ctx, const std::filesystem::path& pairs);
OutputSet cmd_learncurve(const Context& ctx, const std::filesystem::path& points);
OutputSet cmd_screen(const Context& ctx, const StudyArgs& args);
OutputSet cmd_train(const Context& ctx, const StudyArgs& args);
OutputSet cmd_evaluate(const Context& ctx, const EvaluateArgs& args);
void cmd_bayes(const Context& ctx, const BayesArgs& args);

}  // namespace utrad::cli
