#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace utrad::data {

enum class TumorClass { NDLM, DLM, CLM, STUMP, LMS };

inline constexpr TumorClass kAllClasses[] = {TumorClass::NDLM, TumorClass::DLM, TumorClass::CLM,
                                             TumorClass::STUMP, TumorClass::LMS};

/// Throws InputError("unknown tumor class ...") for anything but the five names.
TumorClass parse_tumor_class(std::string_view text);
std::string_view to_string(TumorClass c);

enum class MenstrualStatus { Peri = 0, Pre = 1, Post = 2 };
enum class Adenomyosis { Yes = 1, No = 2, Possible = 3, Probable = 4, Unknown = 5 };
enum class Split { Train, Test };

// Covariates are accepted as names or numeric codes.
MenstrualStatus parse_menstrual_status(std::string_view text);
Adenomyosis parse_adenomyosis(std::string_view text);
bool parse_yes_no(std::string_view text);  // fat_saturated: no=0, yes=1
std::optional<Split> parse_split(std::string_view text);
std::string_view to_string(MenstrualStatus s);
std::string_view to_string(Adenomyosis a);
std::string_view to_string(Split s);

struct CaseRecord {
  std::string patient_id;
  std::string image_id;
  std::filesystem::path image_path;
  std::filesystem::path tumor_mask_path;
  std::optional<std::filesystem::path> uterus_mask_path;
  std::map<std::uint16_t, TumorClass> instance_classes;
  int age_years = 0;
  MenstrualStatus menstrual_status = MenstrualStatus::Pre;
  Adenomyosis adenomyosis = Adenomyosis::Unknown;
  bool fat_saturated = false;
  std::optional<Split> split;

  /// "patient_id/image_id"; the key used by volume maps and reports.
  std::string case_id() const;
};

struct Manifest {
  std::vector<CaseRecord> records;

  const CaseRecord* find(std::string_view patient_id, std::string_view image_id) const;
};

/// Rows are one per instance; rows of the same (patient_id, image_id) merge
/// into one record and must agree on every per-case field. Relative paths are
/// resolved against the manifest's directory and must exist.
Manifest load_manifest(const std::filesystem::path& path);
/// Parses without touching the filesystem; paths are joined onto `base_dir`.
Manifest parse_manifest(std::string_view csv_text, const std::filesystem::path& base_dir,
                        bool check_files);
/// Paths are written relative to the output file's directory when possible.
void write_manifest(const Manifest& manifest, const std::filesystem::path& path);
std::string format_manifest(const Manifest& manifest, const std::filesystem::path& base_dir);

/// Per-instance tumor volumes in ml, keyed by case_id().
using InstanceVolumes = std::map<std::string, std::map<std::uint16_t, double>>;

struct SplitResult {
  Manifest manifest;
  std::vector<std::string> warnings;
};

/// Patient-grouped split stratified on dominant class x volume tertile.
SplitResult stratified_group_split(const Manifest& manifest, double test_fraction,
                                   const InstanceVolumes& volumes, std::uint64_t seed);

class TaskSpec {
 public:
  /// Throws PreconditionError unless both sets are nonempty and disjoint.
  TaskSpec(std::string name, std::set<TumorClass> positive, std::set<TumorClass> negative);

  static TaskSpec benign_vs_malignant();
  static TaskSpec dlm_vs_lms();
  /// Built-in tasks by name; throws InputError for unknown names.
  static TaskSpec named(std::string_view name);
  static std::vector<std::string> builtin_names();

  const std::string& name() const { return name_; }
  const std::set<TumorClass>& positive() const { return positive_; }
  const std::set<TumorClass>& negative() const { return negative_; }
  /// 1, 0, or nullopt for classes outside the task.
  std::optional<int> label(TumorClass c) const;

 private:
  std::string name_;
  std::set<TumorClass> positive_;
  std::set<TumorClass> negative_;
};

struct LabeledInstance {
  std::string patient_id;
  std::string image_id;
  std::uint16_t instance_label = 0;
  TumorClass tumor_class = TumorClass::NDLM;
  int label = 0;
};

/// Manifest order, ascending instance label within a case. Throws InputError
/// if no instance falls in the task.
std::vector<LabeledInstance> binarize(const Manifest& manifest, const TaskSpec& task);

}  // namespace utrad::data
