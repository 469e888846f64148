#include "utrad/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <tuple>

#include "utrad/common/csv.hpp"
#include "utrad/common/error.hpp"
#include "utrad/common/rng.hpp"

namespace utrad::data {

namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::optional<long> parse_int(std::string_view s) {
  long v = 0;
  const auto* end = s.data() + s.size();
  auto [p, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || p != end) return std::nullopt;
  return v;
}

}  // namespace

TumorClass parse_tumor_class(std::string_view text) {
  const std::string t = csv::trim(text);
  for (auto c : kAllClasses) {
    if (t == to_string(c)) return c;
  }
  throw InputError("unknown tumor class: '" + t + "'");
}

std::string_view to_string(TumorClass c) {
  switch (c) {
    case TumorClass::NDLM: return "NDLM";
    case TumorClass::DLM: return "DLM";
    case TumorClass::CLM: return "CLM";
    case TumorClass::STUMP: return "STUMP";
    case TumorClass::LMS: return "LMS";
  }
  return "?";
}

MenstrualStatus parse_menstrual_status(std::string_view text) {
  const std::string t = lower(csv::trim(text));
  if (t == "peri" || t == "0") return MenstrualStatus::Peri;
  if (t == "pre" || t == "1") return MenstrualStatus::Pre;
  if (t == "post" || t == "2") return MenstrualStatus::Post;
  throw InputError("unknown menstrual_status: '" + std::string(text) + "'");
}

Adenomyosis parse_adenomyosis(std::string_view text) {
  const std::string t = lower(csv::trim(text));
  if (t == "yes" || t == "1") return Adenomyosis::Yes;
  if (t == "no" || t == "2") return Adenomyosis::No;
  if (t == "possible" || t == "3") return Adenomyosis::Possible;
  if (t == "probable" || t == "4") return Adenomyosis::Probable;
  if (t == "unknown" || t == "5") return Adenomyosis::Unknown;
  throw InputError("unknown adenomyosis value: '" + std::string(text) + "'");
}

bool parse_yes_no(std::string_view text) {
  const std::string t = lower(csv::trim(text));
  if (t == "yes" || t == "1") return true;
  if (t == "no" || t == "0") return false;
  throw InputError("expected yes/no, got '" + std::string(text) + "'");
}

std::optional<Split> parse_split(std::string_view text) {
  const std::string t = lower(csv::trim(text));
  if (t.empty()) return std::nullopt;
  if (t == "train") return Split::Train;
  if (t == "test") return Split::Test;
  throw InputError("unknown split: '" + std::string(text) + "'");
}

std::string_view to_string(MenstrualStatus s) {
  switch (s) {
    case MenstrualStatus::Peri: return "peri";
    case MenstrualStatus::Pre: return "pre";
    case MenstrualStatus::Post: return "post";
  }
  return "?";
}

std::string_view to_string(Adenomyosis a) {
  switch (a) {
    case Adenomyosis::Yes: return "yes";
    case Adenomyosis::No: return "no";
    case Adenomyosis::Possible: return "possible";
    case Adenomyosis::Probable: return "probable";
    case Adenomyosis::Unknown: return "unknown";
  }
  return "?";
}

std::string_view to_string(Split s) { return s == Split::Train ? "train" : "test"; }

std::string CaseRecord::case_id() const { return patient_id + "/" + image_id; }

const CaseRecord* Manifest::find(std::string_view patient_id, std::string_view image_id) const {
  for (const auto& r : records) {
    if (r.patient_id == patient_id && r.image_id == image_id) return &r;
  }
  return nullptr;
}

namespace {

constexpr const char* kColumns[] = {"patient_id",  "image_id",       "image_path",
                                    "tumor_mask_path", "uterus_mask_path", "instance_label",
                                    "instance_class",  "age_years",      "menstrual_status",
                                    "adenomyosis",     "fat_saturated",  "split"};

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& raw) {
  std::filesystem::path p(raw);
  if (p.is_relative()) p = base / p;
  return p.lexically_normal();
}

bool same_case_fields(const CaseRecord& a, const CaseRecord& b) {
  return std::tie(a.image_path, a.tumor_mask_path, a.uterus_mask_path, a.age_years,
                  a.menstrual_status, a.adenomyosis, a.fat_saturated, a.split) ==
         std::tie(b.image_path, b.tumor_mask_path, b.uterus_mask_path, b.age_years,
                  b.menstrual_status, b.adenomyosis, b.fat_saturated, b.split);
}

}  // namespace

Manifest parse_manifest(std::string_view csv_text, const std::filesystem::path& base_dir,
                        bool check_files) {
  const csv::Document doc = csv::parse(csv_text);
  std::size_t col[std::size(kColumns)];
  for (std::size_t i = 0; i < std::size(kColumns); ++i) col[i] = doc.column(kColumns[i]);

  Manifest m;
  std::map<std::pair<std::string, std::string>, std::size_t> index;
  for (std::size_t r = 0; r < doc.rows.size(); ++r) {
    const auto& row = doc.rows[r];
    const std::string where = "manifest line " + std::to_string(doc.line_numbers[r]) + ": ";
    if (row.size() != doc.header.size()) {
      throw InputError(where + "expected " + std::to_string(doc.header.size()) + " fields, got " +
                       std::to_string(row.size()));
    }
    auto field = [&](int c) { return csv::trim(row[col[c]]); };
    try {
      CaseRecord rec;
      rec.patient_id = field(0);
      rec.image_id = field(1);
      if (rec.patient_id.empty() || rec.image_id.empty()) {
        throw InputError("empty patient_id or image_id");
      }
      rec.image_path = resolve(base_dir, field(2));
      rec.tumor_mask_path = resolve(base_dir, field(3));
      if (!field(4).empty()) rec.uterus_mask_path = resolve(base_dir, field(4));
      const auto label = parse_int(field(5));
      if (!label || *label < 1 || *label > 65535) {
        throw InputError("instance_label must be an integer in [1, 65535], got '" + field(5) + "'");
      }
      const TumorClass cls = parse_tumor_class(field(6));
      const auto age = parse_int(field(7));
      if (!age || *age < 0) throw InputError("age_years must be a nonnegative integer");
      rec.age_years = static_cast<int>(*age);
      rec.menstrual_status = parse_menstrual_status(field(8));
      rec.adenomyosis = parse_adenomyosis(field(9));
      rec.fat_saturated = parse_yes_no(field(10));
      rec.split = parse_split(field(11));

      const auto l = static_cast<std::uint16_t>(*label);
      const auto key = std::make_pair(rec.patient_id, rec.image_id);
      auto it = index.find(key);
      if (it == index.end()) {
        rec.instance_classes[l] = cls;
        index.emplace(key, m.records.size());
        m.records.push_back(std::move(rec));
        continue;
      }
      CaseRecord& existing = m.records[it->second];
      if (existing.instance_classes.count(l)) {
        throw InputError("duplicate case (" + rec.patient_id + ", " + rec.image_id +
                         ") instance " + std::to_string(l));
      }
      if (!same_case_fields(existing, rec)) {
        throw InputError("duplicate case (" + rec.patient_id + ", " + rec.image_id +
                         ") with conflicting per-case fields");
      }
      existing.instance_classes[l] = cls;
    } catch (const InputError& e) {
      throw InputError(where + e.what());
    }
  }
  if (m.records.empty()) throw InputError("manifest has no rows");

  if (check_files) {
    for (const auto& rec : m.records) {
      auto need = [](const std::filesystem::path& p) {
        if (!std::filesystem::is_regular_file(p)) throw InputError("missing file: " + p.string());
      };
      need(rec.image_path);
      need(rec.tumor_mask_path);
      if (rec.uterus_mask_path) need(*rec.uterus_mask_path);
    }
  }
  return m;
}

Manifest load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot read manifest: " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_manifest(ss.str(), path.parent_path(), true);
}

std::string format_manifest(const Manifest& manifest, const std::filesystem::path& base_dir) {
  auto rel = [&](const std::filesystem::path& p) {
    if (base_dir.empty()) return p.generic_string();
    const auto r = std::filesystem::absolute(p).lexically_normal().lexically_relative(
        std::filesystem::absolute(base_dir).lexically_normal());
    return r.empty() ? p.generic_string() : r.generic_string();
  };
  std::string out = csv::join(csv::Row(std::begin(kColumns), std::end(kColumns))) + "\n";
  for (const auto& rec : manifest.records) {
    for (const auto& [label, cls] : rec.instance_classes) {
      csv::Row row{rec.patient_id,
                   rec.image_id,
                   rel(rec.image_path),
                   rel(rec.tumor_mask_path),
                   rec.uterus_mask_path ? rel(*rec.uterus_mask_path) : "",
                   std::to_string(label),
                   std::string(to_string(cls)),
                   std::to_string(rec.age_years),
                   std::string(to_string(rec.menstrual_status)),
                   std::string(to_string(rec.adenomyosis)),
                   rec.fat_saturated ? "yes" : "no",
                   rec.split ? std::string(to_string(*rec.split)) : ""};
      out += csv::join(row) + "\n";
    }
  }
  return out;
}

void write_manifest(const Manifest& manifest, const std::filesystem::path& path) {
  const auto dir = std::filesystem::absolute(path).parent_path();
  Manifest abs = manifest;
  for (auto& r : abs.records) {
    r.image_path = std::filesystem::absolute(r.image_path).lexically_normal();
    r.tumor_mask_path = std::filesystem::absolute(r.tumor_mask_path).lexically_normal();
    if (r.uterus_mask_path) {
      r.uterus_mask_path = std::filesystem::absolute(*r.uterus_mask_path).lexically_normal();
    }
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write manifest: " + path.string());
  out << format_manifest(abs, dir);
  if (!out) throw InputError("failed writing manifest: " + path.string());
}

SplitResult stratified_group_split(const Manifest& manifest, double test_fraction,
                                   const InstanceVolumes& volumes, std::uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw PreconditionError("test_fraction must lie in (0, 1)");
  }

  struct Patient {
    std::string id;
    double volume = 0.0;
    double largest = -1.0;
    TumorClass dominant = TumorClass::NDLM;
    int tertile = 0;
  };
  std::map<std::string, Patient> patients;
  for (const auto& rec : manifest.records) {
    const auto vit = volumes.find(rec.case_id());
    if (vit == volumes.end()) throw InputError("no volume for case " + rec.case_id());
    Patient& p = patients[rec.patient_id];
    p.id = rec.patient_id;
    for (const auto& [label, cls] : rec.instance_classes) {
      const auto iit = vit->second.find(label);
      if (iit == vit->second.end() || !(iit->second >= 0.0)) {
        throw InputError("no volume for case " + rec.case_id() + " instance " +
                         std::to_string(label));
      }
      p.volume += iit->second;
      // First-seen wins on equal volumes: manifest order, then ascending label.
      if (iit->second > p.largest) {
        p.largest = iit->second;
        p.dominant = cls;
      }
    }
  }

  // Tertiles by volume rank over all patients; ties ordered by id.
  std::vector<Patient*> by_volume;
  for (auto& [id, p] : patients) by_volume.push_back(&p);
  std::stable_sort(by_volume.begin(), by_volume.end(),
                   [](const Patient* a, const Patient* b) { return a->volume < b->volume; });
  const std::size_t n = by_volume.size();
  for (std::size_t r = 0; r < n; ++r) by_volume[r]->tertile = static_cast<int>(3 * r / n);

  std::map<std::pair<int, int>, std::vector<std::string>> strata;
  for (const auto& [id, p] : patients) {
    strata[{static_cast<int>(p.dominant), p.tertile}].push_back(id);
  }

  SplitResult result;
  std::map<std::string, Split> assignment;
  struct Quota {
    std::vector<std::string>* members;
    std::size_t count;
    double fraction;
  };
  std::vector<Quota> quotas;
  std::size_t eligible = 0;
  for (auto& [key, members] : strata) {
    if (members.size() == 1) {
      assignment[members[0]] = Split::Train;
      result.warnings.push_back("stratum " + std::string(to_string(TumorClass(key.first))) +
                                " volume tertile " + std::to_string(key.second + 1) +
                                " has a single patient (" + members[0] + "); assigned to train");
      continue;
    }
    const double exact = test_fraction * static_cast<double>(members.size());
    quotas.push_back({&members, static_cast<std::size_t>(std::floor(exact)),
                      exact - std::floor(exact)});
    eligible += members.size();
  }

  // Largest remainder so the total hits round(f * eligible) while every
  // stratum stays within one group of its exact share.
  std::size_t assigned = 0;
  for (const auto& q : quotas) assigned += q.count;
  const auto total =
      static_cast<std::size_t>(std::llround(test_fraction * static_cast<double>(eligible)));
  std::vector<std::size_t> order(quotas.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return quotas[a].fraction > quotas[b].fraction;
  });
  for (std::size_t i = 0; i < order.size() && assigned < total; ++i) {
    if (quotas[order[i]].fraction > 0.0) {
      ++quotas[order[i]].count;
      ++assigned;
    }
  }

  Rng rng(seed);
  for (const auto& q : quotas) {
    std::vector<std::string> members = *q.members;
    rng.shuffle(members);
    for (std::size_t i = 0; i < members.size(); ++i) {
      assignment[members[i]] = i < q.count ? Split::Test : Split::Train;
    }
  }

  result.manifest = manifest;
  for (auto& rec : result.manifest.records) rec.split = assignment.at(rec.patient_id);
  return result;
}

TaskSpec::TaskSpec(std::string name, std::set<TumorClass> positive, std::set<TumorClass> negative)
    : name_(std::move(name)), positive_(std::move(positive)), negative_(std::move(negative)) {
  if (positive_.empty() || negative_.empty()) {
    throw PreconditionError("task " + name_ + ": positive and negative classes must be nonempty");
  }
  for (auto c : positive_) {
    if (negative_.count(c)) {
      throw PreconditionError("task " + name_ + ": class " + std::string(to_string(c)) +
                              " is both positive and negative");
    }
  }
}

TaskSpec TaskSpec::benign_vs_malignant() {
  return TaskSpec("benign_vs_malignant", {TumorClass::STUMP, TumorClass::LMS},
                  {TumorClass::NDLM, TumorClass::DLM, TumorClass::CLM});
}

TaskSpec TaskSpec::dlm_vs_lms() {
  return TaskSpec("dlm_vs_lms", {TumorClass::LMS}, {TumorClass::DLM});
}

std::vector<std::string> TaskSpec::builtin_names() {
  return {"benign_vs_malignant", "dlm_vs_lms", "clm_vs_lms", "clm_vs_ndlm", "stump_vs_lms"};
}

TaskSpec TaskSpec::named(std::string_view name) {
  if (name == "benign_vs_malignant") return benign_vs_malignant();
  if (name == "dlm_vs_lms") return dlm_vs_lms();
  if (name == "clm_vs_lms") return TaskSpec("clm_vs_lms", {TumorClass::LMS}, {TumorClass::CLM});
  if (name == "clm_vs_ndlm") return TaskSpec("clm_vs_ndlm", {TumorClass::CLM}, {TumorClass::NDLM});
  if (name == "stump_vs_lms") {
    return TaskSpec("stump_vs_lms", {TumorClass::LMS}, {TumorClass::STUMP});
  }
  throw InputError("unknown task: " + std::string(name));
}

std::optional<int> TaskSpec::label(TumorClass c) const {
  if (positive_.count(c)) return 1;
  if (negative_.count(c)) return 0;
  return std::nullopt;
}

std::vector<LabeledInstance> binarize(const Manifest& manifest, const TaskSpec& task) {
  std::vector<LabeledInstance> out;
  for (const auto& rec : manifest.records) {
    for (const auto& [label, cls] : rec.instance_classes) {
      if (auto y = task.label(cls)) {
        out.push_back({rec.patient_id, rec.image_id, label, cls, *y});
      }
    }
  }
  if (out.empty()) throw InputError("no instance matches task " + task.name());
  return out;
}

}  // namespace utrad::data
