// split, extract, segeval, learncurve and bayes.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>

#include "commands.hpp"
#include "utrad/bayes.hpp"
#include "utrad/classify/feature_table.hpp"
#include "utrad/cli/svg.hpp"
#include "utrad/common/csv.hpp"
#include "utrad/common/parallel.hpp"
#include "utrad/learncurve.hpp"
#include "utrad/radiomics/extractor.hpp"
#include "utrad/segmetrics.hpp"
#include "utrad/stats.hpp"
#include "utrad/volume/merge.hpp"
#include "utrad/volume/nifti.hpp"

namespace utrad::cli {

namespace fs = std::filesystem;

namespace {

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string general(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

fs::path resolve(const fs::path& base, const std::string& p) {
  const fs::path path(p);
  return path.is_absolute() ? path : base / path;
}

}  // namespace

// ---- split ----------------------------------------------------------------

OutputSet cmd_split(const Context& ctx, const fs::path& manifest_path) {
  const std::uint64_t seed = ctx.require_seed("split");
  const auto manifest = data::load_manifest(manifest_path);
  const auto& records = manifest.records;

  std::vector<std::map<std::uint16_t, double>> slots(records.size());
  parallel_for(records.size(), ctx.config.threads, [&](std::size_t i) {
    const auto& rec = records[i];
    try {
      const auto labels = nifti::read_labels(rec.tumor_mask_path);
      std::map<std::uint16_t, std::size_t> counts;
      for (auto v : labels.data) {
        if (v != 0 && rec.instance_classes.count(v)) ++counts[v];
      }
      const double ml_per_voxel = labels.geometry.voxel_volume_mm3() / 1000.0;
      for (const auto& [label, cls] : rec.instance_classes) {
        slots[i][label] = static_cast<double>(counts[label]) * ml_per_voxel;
      }
    } catch (const std::exception& e) {
      throw InputError("case " + rec.case_id() + ": " + e.what());
    }
  });
  data::InstanceVolumes volumes;
  for (std::size_t i = 0; i < records.size(); ++i) volumes[records[i].case_id()] = slots[i];

  auto result = data::stratified_group_split(manifest, ctx.config.test_fraction, volumes, seed);
  for (const auto& w : result.warnings) ctx.err << "warning: " << w << '\n';

  // Train/test balance on the clinical covariates, one entry per patient
  // (first image) and one per instance for class and volume.
  std::map<std::string, bool> seen;
  stats::Covariate age{"age_years", true, {}, {}}, menstrual{"menstrual_status", false, {}, {}},
      adeno{"adenomyosis", false, {}, {}}, fat{"fat_saturated", false, {}, {}},
      cls{"tumor_class", false, {}, {}}, vol{"tumor_volume_ml", true, {}, {}};
  std::size_t counts[2][3] = {};  // [test][patients, images, instances]
  for (const auto& rec : result.manifest.records) {
    const bool test = rec.split == data::Split::Test;
    auto pick = [test](stats::Covariate& c) -> std::vector<double>& { return test ? c.group_b : c.group_a; };
    if (!seen.count(rec.patient_id)) {
      seen[rec.patient_id] = true;
      ++counts[test][0];
      pick(age).push_back(rec.age_years);
      pick(menstrual).push_back(static_cast<double>(rec.menstrual_status));
      pick(adeno).push_back(static_cast<double>(rec.adenomyosis));
      pick(fat).push_back(rec.fat_saturated ? 1.0 : 0.0);
    }
    ++counts[test][1];
    for (const auto& [label, c] : rec.instance_classes) {
      ++counts[test][2];
      pick(cls).push_back(static_cast<double>(c));
      pick(vol).push_back(volumes[rec.case_id()][label]);
    }
  }

  OutputSet out(ctx.out_dir);
  out.add("manifest_split.csv", data::format_manifest(result.manifest, fs::absolute(ctx.out_dir)));
  std::string cov = "covariate,method,p\n";
  if (counts[0][0] && counts[1][0]) {
    for (const auto& r : stats::compare_covariates({age, menstrual, adeno, fat, cls, vol})) {
      cov += csv::join({r.name, r.method, csv::format_double(r.p)}) + "\n";
    }
  }
  out.add("split_covariates.csv", cov);
  for (int t = 0; t < 2; ++t) {
    ctx.out << (t ? "test" : "train") << ": " << counts[t][0] << " patients, " << counts[t][1] << " images, "
            << counts[t][2] << " instances\n";
  }
  return out;
}

// ---- extract --------------------------------------------------------------

OutputSet cmd_extract(const Context& ctx, const ExtractArgs& args) {
  const bool predicted = args.source == "predicted";
  if (!predicted && args.source != "manual") {
    throw UsageError("--source must be manual or predicted, got '" + args.source + "'");
  }
  if (predicted && args.predicted_dir.empty()) throw UsageError("--source predicted needs --predicted-dir");
  const auto manifest = data::load_manifest(args.manifest);
  const auto& records = manifest.records;

  struct CaseRows {
    std::vector<ml::FeatureRowKey> keys;
    std::vector<std::vector<double>> values;
    std::vector<std::string> warnings;
  };
  std::vector<CaseRows> slots(records.size());

  parallel_for(records.size(), ctx.config.threads, [&](std::size_t i) {
    const auto& rec = records[i];
    auto& slot = slots[i];
    auto key = [&](std::uint16_t label, data::TumorClass c) {
      return ml::FeatureRowKey{rec.patient_id, rec.image_id, label, std::string(data::to_string(c)),
                               args.source};
    };
    try {
      const auto image = nifti::read_image(rec.image_path);
      const auto manual = nifti::read_labels(rec.tumor_mask_path);
      if (!predicted) {
        const auto prepared = radiomics::prepare_case(image, manual, ctx.config.preprocess);
        for (const auto& [label, c] : rec.instance_classes) {
          const auto fv = radiomics::extract_prepared(prepared, label);
          radiomics::check_census(fv);
          slot.keys.push_back(key(label, c));
          slot.values.push_back(fv.values());
        }
        return;
      }
      fs::path file = args.predicted_dir / (rec.patient_id + "_" + rec.image_id + ".nii.gz");
      if (!fs::exists(file)) file.replace_extension();  // .nii
      if (!fs::exists(file)) {
        throw InputError("missing file: " + (args.predicted_dir / (rec.patient_id + "_" + rec.image_id + ".nii.gz")).string());
      }
      const auto pred = nifti::read_labels(file);
      auto match = seg::cross_match(manual, seg::foreground(pred));
      std::set<std::uint16_t> used;
      for (const auto& m : match.matches) {
        if (m.predicted_component) used.insert(*m.predicted_component);
      }
      LabelGrid components = match.predicted.labels;
      for (auto& v : components.data) {
        if (v && !used.count(v)) v = 0;
      }
      const auto prepared = radiomics::prepare_case(image, components, ctx.config.preprocess);
      std::map<std::uint16_t, std::vector<double>> cache;
      for (const auto& [label, c] : rec.instance_classes) {
        const auto it = std::find_if(match.matches.begin(), match.matches.end(),
                                     [&](const seg::InstanceMatch& m) { return m.manual_label == label; });
        if (it == match.matches.end() || !it->predicted_component) {
          slot.warnings.push_back("case " + rec.case_id() + " instance " + std::to_string(label) +
                                  ": no overlapping predicted component; row omitted");
          continue;
        }
        const auto comp = *it->predicted_component;
        if (!cache.count(comp)) {
          const auto fv = radiomics::extract_prepared(prepared, comp);
          radiomics::check_census(fv);
          cache[comp] = fv.values();
        }
        slot.keys.push_back(key(label, c));
        slot.values.push_back(cache[comp]);
      }
    } catch (const std::exception& e) {
      throw InputError("extraction failed for case " + rec.case_id() + ": " + e.what());
    }
  });

  ml::FeatureTable table;
  table.columns = radiomics::feature_names();
  std::vector<std::vector<double>> rows;
  for (auto& s : slots) {
    for (const auto& w : s.warnings) ctx.err << "warning: " << w << '\n';
    for (std::size_t r = 0; r < s.keys.size(); ++r) {
      table.keys.push_back(std::move(s.keys[r]));
      rows.push_back(std::move(s.values[r]));
    }
  }
  table.values.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(table.columns.size()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < rows[r].size(); ++c) {
      table.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
    }
  }

  OutputSet out(ctx.out_dir);
  out.add(predicted ? "features_predicted.csv" : "features.csv", ml::format_feature_table(table));
  ctx.out << "extracted " << table.rows() << " instances x " << table.columns.size() << " features from "
          << records.size() << " images\n";
  return out;
}

// ---- segeval --------------------------------------------------------------

OutputSet cmd_segeval(const Context& ctx, const fs::path& pairs_path) {
  const auto doc = csv::read_file(pairs_path);
  const auto base = pairs_path.parent_path();
  const auto c_case = doc.column("case_id");
  const auto c_rater = doc.column("rater");
  const auto c_tumor = doc.column("tumor_mask_path");
  const bool has_uterus = doc.has_column("uterus_mask_path");
  const auto c_uterus = has_uterus ? doc.column("uterus_mask_path") : 0;

  struct Masks {
    fs::path tumor;
    std::optional<fs::path> uterus;
  };
  std::vector<std::string> raters;
  std::map<std::string, std::map<std::string, Masks>> by_rater;
  std::set<std::string> case_ids;
  for (std::size_t r = 0; r < doc.rows.size(); ++r) {
    const auto& row = doc.rows[r];
    const std::string id = csv::trim(row[c_case]);
    const std::string rater = csv::trim(row[c_rater]);
    if (id.empty() || rater.empty()) {
      throw InputError(pairs_path.string() + " line " + std::to_string(doc.line_numbers[r]) +
                       ": empty case_id or rater");
    }
    if (!by_rater.count(rater)) raters.push_back(rater);
    Masks m{resolve(base, csv::trim(row[c_tumor])), std::nullopt};
    if (has_uterus && !csv::trim(row[c_uterus]).empty()) m.uterus = resolve(base, csv::trim(row[c_uterus]));
    if (!by_rater[rater].emplace(id, m).second) {
      throw InputError("duplicate case " + id + " for rater " + rater);
    }
    case_ids.insert(id);
  }
  if (raters.size() < 2) throw InputError("segeval needs masks from at least two raters");
  for (const auto& rater : raters) {
    std::string missing;
    for (const auto& id : case_ids) {
      if (!by_rater[rater].count(id)) missing += (missing.empty() ? "" : ", ") + id;
    }
    if (!missing.empty()) throw InputError("unpaired case ids: rater " + rater + " lacks " + missing);
  }
  if (case_ids.size() < 2) throw InputError("segeval needs at least two cases");

  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t a = 0; a < raters.size(); ++a) {
    for (std::size_t b = a + 1; b < raters.size(); ++b) pairs.emplace_back(a, b);
  }
  const std::vector<std::string> ids(case_ids.begin(), case_ids.end());
  // [case][pair] -> tumor, merged (NaN when a uterus mask is missing)
  std::vector<std::vector<std::pair<double, double>>> scores(ids.size());
  parallel_for(ids.size(), ctx.config.threads, [&](std::size_t i) {
    try {
      std::vector<LabelGrid> tumor, merged;
      bool all_uterus = true;
      for (const auto& rater : raters) {
        const auto& m = by_rater[rater].at(ids[i]);
        tumor.push_back(nifti::read_labels(m.tumor));
        if (m.uterus) {
          merged.push_back(merge_uterus_and_tumor(nifti::read_labels(*m.uterus), tumor.back()));
        } else {
          all_uterus = false;
        }
      }
      for (const auto& [a, b] : pairs) {
        const double t = seg::dice(tumor[a], 0, tumor[b], 0);
        const double u = all_uterus ? seg::dice(merged[a], 0, merged[b], 0) : std::nan("");
        scores[i].emplace_back(t, u);
      }
    } catch (const std::exception& e) {
      throw InputError("case " + ids[i] + ": " + e.what());
    }
  });

  std::string report = "row_type,rater_a,rater_b,structure,case_id,dsc,sd,ci_low,ci_high\n";
  std::vector<svg::Series> boxes;
  std::string summary;
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    const auto& ra = raters[pairs[p].first];
    const auto& rb = raters[pairs[p].second];
    for (int s = 0; s < 2; ++s) {
      const char* structure = s == 0 ? "tumor" : "uterus_tumor";
      std::vector<seg::CaseScore> per_case;
      for (std::size_t i = 0; i < ids.size(); ++i) {
        const double v = s == 0 ? scores[i][p].first : scores[i][p].second;
        if (!std::isnan(v)) per_case.push_back({ids[i], v});
      }
      if (per_case.empty()) continue;
      for (const auto& c : per_case) {
        report += csv::join({"case", ra, rb, structure, c.case_id, csv::format_double(c.dsc), "", "", ""}) + "\n";
      }
      if (per_case.size() < 2) {
        ctx.err << "warning: " << ra << " vs " << rb << " " << structure << ": fewer than two cases, no summary\n";
        continue;
      }
      svg::Series box{ra + " vs " + rb + " " + structure, {}};
      for (const auto& c : per_case) box.values.push_back(c.dsc);
      boxes.push_back(std::move(box));
      const auto rep = seg::summarize(per_case);
      summary += csv::join({"summary", ra, rb, structure, "", csv::format_double(rep.mean),
                            csv::format_double(rep.sd), csv::format_double(rep.ci_low),
                            csv::format_double(rep.ci_high)}) +
                 "\n";
      ctx.out << ra << " vs " << rb << " " << structure << ": DSC " << fixed(rep.mean, 3) << " [" << fixed(rep.ci_low, 3)
              << ", " << fixed(rep.ci_high, 3) << "] over " << per_case.size() << " cases\n";
    }
  }
  OutputSet out(ctx.out_dir);
  out.add("segeval.csv", report + summary);
  out.add("segeval.svg", svg::boxplot("Segmentation agreement (DSC)", boxes));
  return out;
}

// ---- learncurve -----------------------------------------------------------

OutputSet cmd_learncurve(const Context& ctx, const fs::path& points_path) {
  const auto doc = csv::read_file(points_path);
  const auto c_n = doc.column("n");
  const auto c_dsc = doc.column("dsc");
  if (doc.rows.size() < 3) {
    throw UsageError("learncurve needs at least 3 points, got " + std::to_string(doc.rows.size()));
  }
  std::vector<curve::CurvePoint> points;
  for (std::size_t r = 0; r < doc.rows.size(); ++r) {
    try {
      points.push_back({std::stod(doc.rows[r][c_n]), std::stod(doc.rows[r][c_dsc])});
    } catch (const std::logic_error&) {
      throw InputError(points_path.string() + " line " + std::to_string(doc.line_numbers[r]) + ": bad number");
    }
  }
  const auto fit = curve::fit_plateau(points);
  std::int64_t plateau_n = 0;
  if (fit.degenerate) {
    double lo = points[0].n;
    for (const auto& p : points) lo = std::min(lo, p.n);
    plateau_n = static_cast<std::int64_t>(std::llround(lo));
    ctx.err << "warning: degenerate fit (flat data); plateau_n set to the smallest n\n";
  } else {
    plateau_n = curve::plateau_point(fit.model, ctx.config.plateau_tolerance);
  }
  if (!fit.converged) ctx.err << "warning: refinement did not converge; using the best grid start\n";

  ctx.out << "y0=" << general(fit.model.y0) << " ym=" << general(fit.model.ym) << " k=" << general(fit.model.k)
          << " plateau_n=" << plateau_n << '\n';

  std::string report = "y0,ym,k,plateau_n,rss,degenerate,converged\n";
  report += csv::join({csv::format_double(fit.model.y0), csv::format_double(fit.model.ym),
                       csv::format_double(fit.model.k), std::to_string(plateau_n), csv::format_double(fit.rss),
                       fit.degenerate ? "1" : "0", fit.converged ? "1" : "0"}) +
            "\n";

  svg::CurvePlot plot;
  plot.title = "Annotation budget: exponential plateau fit";
  plot.x_label = "training cases";
  plot.y_label = "DSC";
  double xmax = static_cast<double>(plateau_n);
  for (const auto& p : points) {
    plot.points.emplace_back(p.n, p.dsc);
    xmax = std::max(xmax, p.n);
  }
  for (int i = 0; i <= 100; ++i) {
    const double n = xmax * i / 100.0;
    plot.curve.emplace_back(n, fit.model(n));
  }
  plot.marker_x = static_cast<double>(plateau_n);
  plot.marker_label = "plateau n=" + std::to_string(plateau_n);

  OutputSet out(ctx.out_dir);
  out.add("learncurve.csv", report);
  out.add("learncurve.svg", svg::curve(plot));
  return out;
}

// ---- bayes ----------------------------------------------------------------

void cmd_bayes(const Context& ctx, const BayesArgs& args) {
  if (args.priors.empty()) throw UsageError("bayes needs at least one --prior");
  const bool counts = args.tp || args.fn || args.fp || args.tn;
  const bool rates = args.tpr || args.fpr;
  if (counts == rates) throw UsageError("give either --tp --fn --fp --tn or --tpr --fpr");
  bayes::OperatingPoint op;
  if (counts) {
    if (!(args.tp && args.fn && args.fp && args.tn)) throw UsageError("--tp, --fn, --fp and --tn go together");
    op = bayes::OperatingPoint::from_counts(*args.tp, *args.fn, *args.fp, *args.tn);
  } else {
    if (!(args.tpr && args.fpr)) throw UsageError("--tpr and --fpr go together");
    op = {*args.tpr, *args.fpr};
  }
  op.validate();
  ctx.out << "likelihood ratio " << general(op.likelihood_ratio()) << '\n';
  for (double prior : args.priors) {
    ctx.out << "prior " << general(prior) << ": posterior "
            << bayes::describe(bayes::posterior_probability(prior, op)) << '\n';
  }
}

}  // namespace utrad::cli
