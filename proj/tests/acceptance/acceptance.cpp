// Acceptance suite: one line per criterion, nonzero exit if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "matrix_oracle.hpp"
#include "mwu_oracle.hpp"
#include "phantom.hpp"
#include "random_roi.hpp"
#include "temp_dir.hpp"
#include "utrad/bayes.hpp"
#include "utrad/classify/metrics.hpp"
#include "utrad/cli/run.hpp"
#include "utrad/common/csv.hpp"
#include "utrad/common/rng.hpp"
#include "utrad/dataset.hpp"
#include "utrad/learncurve.hpp"
#include "utrad/radiomics/extractor.hpp"
#include "utrad/radiomics/features.hpp"
#include "utrad/radiomics/matrices.hpp"
#include "utrad/segmetrics.hpp"
#include "utrad/stats.hpp"
#include "utrad/volume/nifti.hpp"

namespace fs = std::filesystem;
using utrad::Rng;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, double v) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct CliResult {
  int code;
  std::string out;
  std::string err;
};

CliResult cli(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = utrad::cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

// ---- 1 ---------------------------------------------------------------------

Outcome bayes_reproduction() {
  const auto t0 = Clock::now();
  const auto op = utrad::bayes::OperatingPoint::from_counts(13, 0, 11, 163);  // tpr 1, fpr 11/174
  const std::int64_t n3 = utrad::bayes::one_in_n(utrad::bayes::posterior_probability(0.003, op));
  const std::int64_t n2 = utrad::bayes::one_in_n(utrad::bayes::posterior_probability(0.002, op));
  const std::int64_t n4 = utrad::bayes::one_in_n(utrad::bayes::posterior_probability(0.004, op));
  const double ms = seconds_since(t0) * 1e3;
  const bool exact = op.tpr == 1.0 && op.fpr == 11.0 / 174.0;
  return {exact && n3 == 22 && n2 == 32 && n4 == 17 && ms < 1.0,
          "1 in " + std::to_string(n3) + " / " + std::to_string(n2) + " / " + std::to_string(n4) + " for priors "
              "0.003 / 0.002 / 0.004, " + fmt("%.4f ms", ms)};
}

// ---- 2 ---------------------------------------------------------------------

Outcome naive_benchmark() {
  const double f = utrad::ml::naive_benchmark(6, 180);
  const std::string printed = fmt("%.3f", f);
  return {std::abs(f - 0.0645) <= 0.0005 && printed == "0.065",
          "F1 " + fmt("%.6f", f) + ", printed " + printed};
}

// ---- 3 ---------------------------------------------------------------------

Outcome class_weights() {
  const auto w = utrad::ml::ClassWeights::from_counts(30, 13);
  const std::string a = fmt("%.2f", w.negative), b = fmt("%.1f", w.positive);
  return {a == "0.43" && b == "1.0" && std::abs(w.negative - 13.0 / 30.0) < 1e-15,
          "weights " + fmt("%.3f", w.negative) + ":" + fmt("%.1f", w.positive)};
}

// ---- 4 ---------------------------------------------------------------------

Outcome feature_census() {
  const auto t0 = Clock::now();
  Rng rng(404);
  utrad::prep::PreprocessConfig cfg;
  std::size_t extractions = 0;
  std::string problem;
  const std::map<std::string, std::size_t> expected{{"shape", 14}, {"firstorder", 18}, {"glcm", 24},
                                                    {"glrlm", 16}, {"glszm", 16},      {"gldm", 14},
                                                    {"ngtdm", 5}};
  for (int trial = 0; trial < 60 && problem.empty(); ++trial) {
    utrad::Geometry g;
    g.dims = {4 + rng.uniform_index(10), 4 + rng.uniform_index(10), 1 + rng.uniform_index(5)};
    g.spacing_mm = cfg.target_spacing_mm;
    utrad::VoxelGrid image(g);
    for (auto& v : image.data) v = rng.uniform(0.0, 1000.0);
    utrad::LabelGrid mask(g);
    const double density = rng.uniform(0.05, 0.9);
    for (auto& v : mask.data) v = rng.uniform01() < density ? 1 : 0;
    mask.data[rng.uniform_index(mask.data.size())] = 1;
    try {
      const auto fv = utrad::radiomics::extract_instance(image, mask, 1, cfg);
      utrad::radiomics::check_census(fv);
      std::map<std::string, std::size_t> families;
      for (const auto& [name, value] : fv.entries) ++families[name.substr(0, name.find('_'))];
      if (fv.size() != 107 || families != expected) problem = "trial " + std::to_string(trial) + " census differs";
      ++extractions;
    } catch (const std::exception& e) {
      problem = "trial " + std::to_string(trial) + ": " + e.what();
    }
  }
  return {problem.empty(), problem.empty()
                               ? std::to_string(extractions) + " random ROIs, each 107 = 14+18+24+16+16+14+5, " +
                                     fmt("%.2f s", seconds_since(t0))
                               : problem};
}

// ---- 5 ---------------------------------------------------------------------

Outcome matrix_oracle() {
  const auto t0 = Clock::now();
  Rng rng(505);
  int mismatches = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const auto roi = support::random_roi(rng, 1 + static_cast<std::int64_t>(rng.uniform_index(6)),
                                         1 + static_cast<std::int64_t>(rng.uniform_index(6)),
                                         1 + static_cast<std::int64_t>(rng.uniform_index(3)), rng.uniform(0.2, 1.0));
    const auto got = utrad::radiomics::compute_matrices(roi);
    const auto want = oracle::build(roi);
    bool same = got.glszm == want.glszm && got.gldm == want.gldm && got.ngtdm == want.ngtdm;
    for (std::size_t d = 0; d < 13; ++d) same = same && got.glcm[d] == want.glcm[d] && got.glrlm[d] == want.glrlm[d];
    mismatches += !same;
  }
  const double s = seconds_since(t0);
  return {mismatches == 0 && s < 30.0,
          "200 ROIs <= 6x6x3, " + std::to_string(mismatches) + " mismatches, " + fmt("%.2f s", s)};
}

// ---- 6 ---------------------------------------------------------------------

double sorted_percentile(const std::vector<double>& sorted, double p) {
  const double pos = p / 100.0 * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

Outcome first_order_oracle() {
  const auto t0 = Clock::now();
  const auto& names = utrad::radiomics::feature_names();
  auto index = [&](const std::string& n) {
    return static_cast<std::size_t>(std::find(names.begin(), names.end(), "firstorder_" + n) - names.begin()) - 14;
  };
  const std::size_t i_mean = index("Mean"), i_median = index("Median"), i_var = index("Variance"),
                    i_p10 = index("10Percentile"), i_p90 = index("90Percentile");
  Rng rng(606);
  double worst = 0.0;
  auto rel = [](double got, double want) { return std::abs(got - want) / std::max(1.0, std::abs(want)); };
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<double> x(1 + rng.uniform_index(300));
    for (double& v : x) v = rng.uniform(-100.0, 1000.0);
    const auto f = utrad::radiomics::first_order_features(x, 25.0, 1.0);
    auto sorted = x;
    std::sort(sorted.begin(), sorted.end());
    double sum = 0.0;
    for (double v : sorted) sum += v;
    const double mean = sum / static_cast<double>(x.size());
    double ss = 0.0;
    for (double v : sorted) ss += (v - mean) * (v - mean);
    worst = std::max({worst, rel(f[i_mean], mean), rel(f[i_var], ss / static_cast<double>(x.size())),
                      rel(f[i_median], sorted_percentile(sorted, 50)), rel(f[i_p10], sorted_percentile(sorted, 10)),
                      rel(f[i_p90], sorted_percentile(sorted, 90))});
  }
  const double s = seconds_since(t0);
  return {worst <= 1e-9 && s < 5.0, "1000 vectors, worst relative error " + fmt("%.2e", worst) + ", " + fmt("%.2f s", s)};
}

// ---- 7 ---------------------------------------------------------------------

Outcome dice_oracle() {
  const auto t0 = Clock::now();
  Rng rng(707);
  int mismatches = 0;
  for (int trial = 0; trial < 500; ++trial) {
    utrad::Geometry g;
    g.dims = {1 + rng.uniform_index(12), 1 + rng.uniform_index(12), 1 + rng.uniform_index(6)};
    utrad::LabelGrid a(g), b(g);
    const double da = trial % 25 == 0 ? 0.0 : rng.uniform01(), db = trial % 50 == 0 ? 0.0 : rng.uniform01();
    for (std::size_t i = 0; i < a.data.size(); ++i) {
      a.data[i] = rng.uniform01() < da ? static_cast<std::uint16_t>(1 + rng.uniform_index(3)) : 0;
      b.data[i] = rng.uniform01() < db ? static_cast<std::uint16_t>(1 + rng.uniform_index(3)) : 0;
    }
    std::size_t na = 0, nb = 0, both = 0;
    for (std::size_t i = 0; i < a.data.size(); ++i) {
      na += a.data[i] != 0;
      nb += b.data[i] != 0;
      both += a.data[i] != 0 && b.data[i] != 0;
    }
    const double want = na + nb == 0 ? 1.0 : 2.0 * static_cast<double>(both) / static_cast<double>(na + nb);
    mismatches += utrad::seg::dice(a, 0, b, 0) != want;
  }
  utrad::Geometry g;
  g.dims = {3, 3, 3};
  const bool empty_ok = utrad::seg::dice(utrad::LabelGrid(g), 0, utrad::LabelGrid(g), 0) == 1.0;
  const double s = seconds_since(t0);
  return {mismatches == 0 && empty_ok && s < 5.0, "500 pairs, " + std::to_string(mismatches) +
                                                       " mismatches, both-empty = 1: " + (empty_ok ? "yes" : "no") +
                                                       ", " + fmt("%.2f s", s)};
}

// ---- 8 ---------------------------------------------------------------------

Outcome plateau_fit() {
  const auto t0 = Clock::now();
  const utrad::curve::PlateauModel truth{0.5, 0.9, 0.02};
  std::vector<utrad::curve::CurvePoint> pts;
  for (double n : {10.0, 20.0, 40.0, 60.0, 80.0, 100.0, 150.0, 200.0}) pts.push_back({n, truth(n)});
  const auto fit = utrad::curve::fit_plateau(pts);
  const double err = std::max({std::abs(fit.model.y0 - 0.5), std::abs(fit.model.ym - 0.9), std::abs(fit.model.k - 0.02)});
  const auto closed = utrad::curve::plateau_point(fit.model);
  std::int64_t scan = 0;
  while (fit.model(static_cast<double>(scan)) < 0.99 * fit.model.ym) ++scan;
  const double s = seconds_since(t0);
  return {err <= 1e-3 && closed == 190 && scan == 190 && s < 1.0,
          "max parameter error " + fmt("%.1e", err) + ", plateau " + std::to_string(closed) + " (scan " +
              std::to_string(scan) + "), " + fmt("%.3f s", s)};
}

// ---- 9 ---------------------------------------------------------------------

Outcome mann_whitney_exact() {
  const auto t0 = Clock::now();
  std::size_t cases = 0, mismatches = 0;
  for (std::size_t total = 2; total <= 10; ++total) {
    for (std::uint32_t mask = 1; mask + 1 < (1u << total); ++mask) {
      std::vector<double> x, y;
      for (std::size_t r = 0; r < total; ++r) ((mask >> r) & 1u ? x : y).push_back(static_cast<double>(r + 1));
      const auto got = utrad::stats::mann_whitney_u(x, y);
      const double want = oracle::permutation_p(x, y);
      mismatches += !got.exact || std::abs(got.p - want) > 1e-12;
      ++cases;
    }
  }
  const double s = seconds_since(t0);
  return {mismatches == 0 && s < 10.0, std::to_string(cases) + " rank splits with n+m <= 10, " +
                                           std::to_string(mismatches) + " mismatches, " + fmt("%.2f s", s)};
}

// ---- 10 and 11 share a phantom study --------------------------------------

struct Study {
  fs::path dir;
  fs::path manifest;  // with split column
  fs::path features;
  bool ok = false;
  std::string error;
};

Study prepare_study(const fs::path& dir, std::uint64_t seed) {
  Study s;
  s.dir = dir;
  support::PhantomOptions opt;
  opt.patients = 60;
  opt.lms_patients = 24;
  opt.seed = seed;
  const auto cohort = support::make_phantom_cohort(dir, opt);
  const auto seed_str = std::to_string(seed);
  auto r = cli({"--seed", seed_str, "--out-dir", (dir / "out").string(), "split", "--manifest", cohort.manifest.string()});
  if (r.code != 0) {
    s.error = "split failed: " + r.err;
    return s;
  }
  s.manifest = dir / "out" / "manifest_split.csv";
  r = cli({"--out-dir", (dir / "out").string(), "extract", "--manifest", s.manifest.string()});
  if (r.code != 0) {
    s.error = "extract failed: " + r.err;
    return s;
  }
  s.features = dir / "out" / "features.csv";
  s.ok = true;
  return s;
}

CliResult train(const Study& s, const fs::path& features, const fs::path& out, std::uint64_t seed) {
  return cli({"--seed", std::to_string(seed), "--out-dir", out.string(), "train", "--features", features.string(),
              "--manifest", s.manifest.string(), "--task", "dlm_vs_lms"});
}

Outcome determinism_and_leakage(const fs::path& scratch) {
  const auto study = prepare_study(scratch / "c10", 1010);
  if (!study.ok) return {false, study.error};
  const auto t0 = Clock::now();
  const auto a = train(study, study.features, scratch / "c10" / "run_a", 99);
  const auto b = train(study, study.features, scratch / "c10" / "run_b", 99);

  // The same table without any test-split rows.
  const auto manifest = utrad::data::load_manifest(study.manifest);
  const auto doc = utrad::csv::read_file(study.features);
  std::string trimmed = utrad::csv::join(doc.header) + "\n";
  std::size_t dropped = 0;
  for (const auto& row : doc.rows) {
    const auto* rec = manifest.find(row[0], row[1]);
    if (rec && rec->split == utrad::data::Split::Test) {
      ++dropped;
      continue;
    }
    trimmed += utrad::csv::join(row) + "\n";
  }
  std::ofstream(scratch / "c10" / "train_only.csv", std::ios::binary) << trimmed;
  const auto c = train(study, scratch / "c10" / "train_only.csv", scratch / "c10" / "run_c", 99);
  const double s = seconds_since(t0);
  if (a.code || b.code || c.code) return {false, "train failed: " + a.err + b.err + c.err};

  const auto pa = slurp(scratch / "c10" / "run_a" / "pipeline.txt");
  const bool same = pa == slurp(scratch / "c10" / "run_b" / "pipeline.txt") &&
                    slurp(scratch / "c10" / "run_a" / "model_report.csv") ==
                        slurp(scratch / "c10" / "run_b" / "model_report.csv");
  const bool no_leak = pa == slurp(scratch / "c10" / "run_c" / "pipeline.txt") &&
                       slurp(scratch / "c10" / "run_a" / "model_report.csv") ==
                           slurp(scratch / "c10" / "run_c" / "model_report.csv");
  return {same && no_leak && dropped > 0 && s < 120.0,
          std::string("rerun identical: ") + (same ? "yes" : "no") + ", identical without " + std::to_string(dropped) +
              " test rows: " + (no_leak ? "yes" : "no") + ", 3 full grid searches in " + fmt("%.1f s", s)};
}

Outcome end_to_end(const fs::path& scratch) {
  const auto t0 = Clock::now();
  const auto study = prepare_study(scratch / "c11", 1111);
  if (!study.ok) return {false, study.error};
  const auto out = scratch / "c11" / "model";
  const auto t = train(study, study.features, out, 2024);
  if (t.code) return {false, "train failed: " + t.err};
  const auto e = cli({"--out-dir", out.string(), "evaluate", "--features", study.features.string(), "--manifest",
                      study.manifest.string(), "--model", (out / "pipeline.txt").string()});
  if (e.code) return {false, "evaluate failed: " + e.err};
  const double s = seconds_since(t0);

  std::map<std::string, std::string> metrics;
  for (const auto& row : utrad::csv::read_file(out / "evaluation.csv").rows) metrics[row[0]] = row[1];
  double median_f1 = -1.0;
  for (const auto& row : utrad::csv::read_file(out / "single_feature_test.csv").rows) {
    if (row[0] == "firstorder_Median") median_f1 = std::stod(row[2]);
  }
  const double f1 = std::stod(metrics.at("test_f1_mean"));
  const double bench = std::stod(metrics.at("naive_benchmark_f1"));
  return {f1 >= 0.9 && median_f1 > bench && s < 600.0,
          "test F1 " + fmt("%.3f", f1) + " (mean of 3 fold models), median-intensity F1 " + fmt("%.3f", median_f1) +
              " vs naive " + fmt("%.3f", bench) + ", " + metrics.at("n_test") + " test instances, " + fmt("%.1f s", s)};
}

// ---- 12 --------------------------------------------------------------------

Outcome nifti_round_trip(const fs::path& scratch) {
  const auto t0 = Clock::now();
  Rng rng(1212);
  int failures = 0;
  for (int trial = 0; trial < 100; ++trial) {
    utrad::Geometry g;
    g.dims = {1 + rng.uniform_index(16), 1 + rng.uniform_index(16), 1 + rng.uniform_index(8)};
    for (int a = 0; a < 3; ++a) {
      g.spacing_mm[a] = rng.uniform(0.2, 6.0);
      g.origin_mm[a] = rng.uniform(-300.0, 300.0);
    }
    const bool gzip = trial % 2 == 0;
    const auto ext = gzip ? ".nii.gz" : ".nii";
    utrad::VoxelGrid image(g);
    for (auto& v : image.data) v = static_cast<float>(rng.uniform(-2000.0, 5000.0));
    utrad::LabelGrid labels(g);
    for (auto& v : labels.data) v = static_cast<std::uint16_t>(rng.uniform_index(65536));
    const auto pi = scratch / ("img" + std::to_string(trial) + ext);
    const auto pl = scratch / ("lab" + std::to_string(trial) + ext);
    utrad::nifti::write(image, pi, gzip);
    utrad::nifti::write(labels, pl, gzip);
    const auto ri = utrad::nifti::read_image(pi);
    const auto rl = utrad::nifti::read_labels(pl);
    bool ok = ri.geometry.dims == g.dims && rl.geometry.dims == g.dims &&
              std::memcmp(ri.data.data(), image.data.data(), image.data.size() * sizeof(double)) == 0 &&
              rl.data == labels.data;
    for (int a = 0; a < 3; ++a) {
      ok = ok && std::abs(ri.geometry.spacing_mm[a] - g.spacing_mm[a]) <= 1e-6 * std::max(1.0, g.spacing_mm[a]) &&
           std::abs(ri.geometry.origin_mm[a] - g.origin_mm[a]) <= 1e-6 * std::max(1.0, std::abs(g.origin_mm[a])) &&
           rl.geometry.matches(ri.geometry, 1e-6 * 300.0);
    }
    failures += !ok;
  }
  const double s = seconds_since(t0);
  return {failures == 0 && s < 10.0, "100 grids (image + labels, gzip and plain), " + std::to_string(failures) +
                                         " failures, " + fmt("%.2f s", s)};
}

}  // namespace

int main() {
  support::TempDir scratch("acceptance");
  struct Criterion {
    int id;
    const char* name;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria{
      {1, "Bayesian reproduction", bayes_reproduction},
      {2, "naive benchmark reproduction", naive_benchmark},
      {3, "class-weight reproduction", class_weights},
      {4, "feature census", feature_census},
      {5, "matrix oracle equivalence", matrix_oracle},
      {6, "first-order oracle", first_order_oracle},
      {7, "Dice oracle", dice_oracle},
      {8, "plateau fit", plateau_fit},
      {9, "Mann-Whitney exact", mann_whitney_exact},
      {10, "no leakage and determinism", [&] { return determinism_and_leakage(scratch.path()); }},
      {11, "end-to-end synthetic study", [&] { return end_to_end(scratch.path()); }},
      {12, "NIfTI round trip", [&] { return nifti_round_trip(scratch.path()); }},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::cout << (o.pass ? "PASS" : "FAIL") << "  criterion " << c.id << " (" << c.name << "): " << o.detail
              << std::endl;
  }
  std::cout << (failed ? std::to_string(failed) + " criteria failed" : std::string("all 12 criteria passed"))
            << std::endl;
  return failed ? 1 : 0;
}
