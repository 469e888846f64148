// screen, train and evaluate. All three rebuild the same FoldPlan from the
// training rows and the seed, so every study stage sees identical folds.

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

#include "commands.hpp"
#include "utrad/classify.hpp"
#include "utrad/cli/svg.hpp"
#include "utrad/common/csv.hpp"
#include "utrad/stats.hpp"

namespace utrad::cli {

namespace fs = std::filesystem;

namespace {

constexpr int kFolds = 3;

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string fmt(double v) { return csv::format_double(v); }

struct StudyRows {
  ml::FeatureTable table;
  std::vector<int> y;
  std::vector<std::string> groups;
  std::vector<data::TumorClass> classes;
};

// Rows of `which` split whose class belongs to the task. Every row must be
// known to the manifest with a matching class and an assigned split.
StudyRows study_rows(const ml::FeatureTable& all, const data::Manifest& manifest, const data::TaskSpec& task,
                     data::Split which) {
  std::vector<std::size_t> keep;
  StudyRows out;
  for (std::size_t r = 0; r < all.rows(); ++r) {
    const auto& k = all.keys[r];
    const std::string where = k.patient_id + "/" + k.image_id + " instance " + std::to_string(k.instance_label);
    const auto* rec = manifest.find(k.patient_id, k.image_id);
    if (!rec) throw InputError("feature row " + where + " is not in the manifest");
    if (!rec->split) throw InputError("manifest has no split for " + rec->case_id() + "; run split first");
    const auto cls = data::parse_tumor_class(k.instance_class);
    const auto it = rec->instance_classes.find(k.instance_label);
    if (it == rec->instance_classes.end() || it->second != cls) {
      throw InputError("feature row " + where + ": class " + k.instance_class + " disagrees with the manifest");
    }
    if (*rec->split != which) continue;
    const auto label = task.label(cls);
    if (!label) continue;
    keep.push_back(r);
    out.y.push_back(*label);
    out.groups.push_back(k.patient_id);
    out.classes.push_back(cls);
  }
  out.table = all.select(keep);
  return out;
}

void require_task_classes(const StudyRows& rows, const data::TaskSpec& task) {
  std::string missing;
  for (const auto& side : {task.positive(), task.negative()}) {
    for (auto c : side) {
      if (std::find(rows.classes.begin(), rows.classes.end(), c) == rows.classes.end()) {
        missing += (missing.empty() ? "" : ", ") + std::string(data::to_string(c));
      }
    }
  }
  if (!missing.empty()) {
    throw InputError("task " + task.name() + " references classes absent from the training rows: " + missing);
  }
}

ml::FoldPlan fold_plan(const StudyRows& rows, std::uint64_t seed) {
  try {
    return ml::make_folds(rows.y, rows.groups, kFolds, seed);
  } catch (const PreconditionError& e) {
    throw InputError(std::string("cannot build folds: ") + e.what());
  }
}

struct Study {
  data::TaskSpec task;
  StudyRows train;
  ml::FoldPlan plan;
};

Study load_study(const Context& ctx, const StudyArgs& args, std::uint64_t seed) {
  auto task = ctx.config.task_spec(args.task.empty() ? ctx.config.task : args.task);
  const auto table = ml::read_feature_table(args.features);
  const auto manifest = data::load_manifest(args.manifest);
  auto train = study_rows(table, manifest, task, data::Split::Train);
  require_task_classes(train, task);
  auto plan = fold_plan(train, seed);
  return {std::move(task), std::move(train), std::move(plan)};
}

std::string folds_csv(const StudyRows& rows, const ml::FoldPlan& plan) {
  std::string s = "patient_id,image_id,instance_label,label,fold\n";
  for (std::size_t r = 0; r < rows.table.rows(); ++r) {
    const auto& k = rows.table.keys[r];
    s += csv::join({k.patient_id, k.image_id, std::to_string(k.instance_label), std::to_string(rows.y[r]),
                    std::to_string(plan.fold[r])}) +
         "\n";
  }
  return s;
}

std::string direction(const ml::ThresholdClassifier& t) {
  if (t.degenerate) return "constant";
  return t.positive_above ? "above" : "below";
}

std::string class_list(const std::set<data::TumorClass>& s) {
  std::string out;
  for (auto c : s) out += (out.empty() ? "" : "+") + std::string(data::to_string(c));
  return out;
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("missing file: " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

// ---- screen ---------------------------------------------------------------

OutputSet cmd_screen(const Context& ctx, const StudyArgs& args) {
  const auto seed = ctx.require_seed("screen");
  const auto study = load_study(ctx, args, seed);
  const auto& rows = study.train;
  const auto& x = rows.table.values;
  const auto& names = rows.table.columns;

  std::string mwu = "feature,u,p,method,significant\n";
  std::size_t significant = 0;
  for (std::size_t j = 0; j < names.size(); ++j) {
    std::vector<double> pos, neg;
    for (std::size_t r = 0; r < rows.y.size(); ++r) {
      (rows.y[r] ? pos : neg).push_back(x(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(j)));
    }
    const auto t = stats::mann_whitney_u(pos, neg);
    const bool sig = t.p < ctx.config.screen_alpha;
    significant += sig;
    mwu += csv::join({names[j], fmt(t.u), fmt(t.p), t.exact ? "exact" : "normal", sig ? "1" : "0"}) + "\n";
  }

  const auto results = ml::single_feature_study(x, names, rows.y, study.plan);
  std::string sf = "feature,val_f1_mean,val_f1_sd,val_ci_low,val_ci_high";
  for (int f = 1; f <= study.plan.k; ++f) {
    const auto p = "fold" + std::to_string(f);
    sf += "," + p + "_threshold," + p + "_direction," + p + "_val_f1";
  }
  sf += "\n";
  for (const auto& r : results) {
    csv::Row row{r.feature, fmt(r.validation.mean), fmt(r.validation.sd), fmt(r.validation.low),
                 fmt(r.validation.high)};
    for (std::size_t f = 0; f < r.folds.size(); ++f) {
      row.push_back(fmt(r.folds[f].threshold));
      row.push_back(direction(r.folds[f]));
      row.push_back(fmt(r.validation_f1[f]));
    }
    sf += csv::join(row) + "\n";
  }
  const auto& best = ml::best_single_feature(results);

  std::vector<svg::Series> groups{{class_list(study.task.negative()), {}}, {class_list(study.task.positive()), {}}};
  for (std::size_t r = 0; r < rows.y.size(); ++r) {
    groups[rows.y[r]].values.push_back(x(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(best.column)));
  }
  const auto& t0 = best.folds.front();

  ctx.out << "task " << study.task.name() << ": " << rows.y.size() << " training instances, "
          << std::count(rows.y.begin(), rows.y.end(), 1) << " positive\n";
  ctx.out << significant << " of " << names.size() << " features differ at alpha " << ctx.config.screen_alpha
          << " (Mann-Whitney U)\n";
  ctx.out << "best single feature: " << best.feature << " validation F1 " << fixed(best.validation.mean, 3) << " ["
          << fixed(best.validation.low, 3) << ", " << fixed(best.validation.high, 3) << "]\n";

  OutputSet out(ctx.out_dir);
  out.add("mwu.csv", mwu);
  out.add("single_feature.csv", sf);
  out.add("single_feature.svg",
          svg::strip(best.feature + " (fold 1 threshold dashed)", groups, t0.threshold, !t0.degenerate));
  out.add("folds.csv", folds_csv(rows, study.plan));
  return out;
}

// ---- train ----------------------------------------------------------------

OutputSet cmd_train(const Context& ctx, const StudyArgs& args) {
  const auto seed = ctx.require_seed("train");
  const auto study = load_study(ctx, args, seed);
  const auto& rows = study.train;

  ml::TaskData data{rows.table.values, rows.y, rows.groups, rows.table.columns};
  const auto selectors = ctx.config.selector_grid();
  const auto learners = ctx.config.learner_grid();
  auto result = ml::grid_search(data, study.plan, selectors, learners, seed, ctx.config.threads);
  auto& best = result.best;
  best.task = study.task.name();
  for (auto c : study.task.positive()) best.positive_classes.emplace_back(data::to_string(c));
  for (auto c : study.task.negative()) best.negative_classes.emplace_back(data::to_string(c));

  std::string report =
      "selector,selector_params,learner,learner_params,train_f1_mean,val_f1_mean,val_ci_low,val_ci_high,"
      "test_f1_mean\n";
  for (const auto& c : result.table) {
    report += csv::join({c.selector.method, c.selector.params(), c.learner.kind, c.learner.params(),
                         fmt(c.train.mean), fmt(c.validation.mean), fmt(c.validation.low), fmt(c.validation.high),
                         ""}) +
              "\n";
  }

  ctx.out << "task " << study.task.name() << ": " << rows.y.size() << " training instances, " << result.table.size()
          << " combinations\n";
  ctx.out << "best: " << best.selector.method << " (" << best.selector.params() << ") + " << best.learner.kind
          << " (" << best.learner.params() << "), validation F1 " << fixed(best.validation.mean, 3) << " ["
          << fixed(best.validation.low, 3) << ", " << fixed(best.validation.high, 3) << "]\n";

  OutputSet out(ctx.out_dir);
  out.add("model_report.csv", report);
  out.add("pipeline.txt", ml::serialize(best));
  out.add("folds.csv", folds_csv(rows, study.plan));
  return out;
}

// ---- evaluate -------------------------------------------------------------

OutputSet cmd_evaluate(const Context& ctx, const EvaluateArgs& args) {
  const auto pipeline = ml::deserialize(read_text(args.model));
  std::set<data::TumorClass> pos, neg;
  for (const auto& c : pipeline.positive_classes) pos.insert(data::parse_tumor_class(c));
  for (const auto& c : pipeline.negative_classes) neg.insert(data::parse_tumor_class(c));
  if (pos.empty() || neg.empty()) throw InputError("model artifact carries no task definition");
  const data::TaskSpec task(pipeline.task, pos, neg);

  const auto table = ml::read_feature_table(args.features);
  const auto manifest = data::load_manifest(args.manifest);
  const auto test = study_rows(table, manifest, task, data::Split::Test);
  if (test.y.empty()) throw InputError("no test rows for task " + task.name());

  const auto report = ml::evaluate_test(pipeline, test.table.values, test.table.columns, test.y);
  const auto n_pos = static_cast<std::size_t>(std::count(test.y.begin(), test.y.end(), 1));
  const double benchmark = ml::naive_benchmark(n_pos, test.y.size());

  std::string eval = "metric,value\n";
  auto row = [&](const std::string& k, const std::string& v) { eval += csv::join({k, v}) + "\n"; };
  row("task", task.name());
  row("n_test", std::to_string(test.y.size()));
  row("n_test_positive", std::to_string(n_pos));
  row("selector", pipeline.selector.method + " " + pipeline.selector.params());
  row("learner", pipeline.learner.kind + " " + pipeline.learner.params());
  row("val_f1_mean", fmt(pipeline.validation.mean));
  for (std::size_t m = 0; m < report.per_model_f1.size(); ++m) {
    row("test_f1_model" + std::to_string(m + 1), fmt(report.per_model_f1[m]));
  }
  row("test_f1_mean", fmt(report.f1.mean));
  row("test_f1_ci_low", fmt(report.f1.low));
  row("test_f1_ci_high", fmt(report.f1.high));
  row("majority_vote_f1", fmt(report.majority_f1));
  row("naive_benchmark_f1", fmt(benchmark));

  std::string preds = "patient_id,image_id,instance_label,instance_class,label,majority\n";
  for (std::size_t r = 0; r < test.y.size(); ++r) {
    const auto& k = test.table.keys[r];
    preds += csv::join({k.patient_id, k.image_id, std::to_string(k.instance_label), k.instance_class,
                        std::to_string(test.y[r]), std::to_string(report.majority[r])}) +
             "\n";
  }

  OutputSet out(ctx.out_dir);
  ctx.out << "task " << task.name() << ": " << test.y.size() << " test instances, " << n_pos << " positive\n";
  ctx.out << "test F1 (mean of " << report.per_model_f1.size() << " models): " << fixed(report.f1.mean, 3) << " ["
          << fixed(report.f1.low, 3) << ", " << fixed(report.f1.high, 3) << "]\n";
  ctx.out << "majority-vote F1: " << fixed(report.majority_f1, 3) << '\n';

  // Single-feature reference on the same folds the model was trained with.
  const auto train = study_rows(table, manifest, task, data::Split::Train);
  if (train.y.empty()) {
    ctx.err << "warning: no training rows in " << args.features.string() << "; single-feature reference skipped\n";
  } else {
    const auto plan = fold_plan(train, pipeline.seed);
    const auto results = ml::single_feature_study(train.table.values, train.table.columns, train.y, plan);
    std::string sf = "feature,val_f1_mean,test_f1_mean,test_ci_low,test_ci_high,test_majority_f1\n";
    std::vector<ml::TestReport> tests;
    for (const auto& r : results) {
      const Eigen::VectorXd col = test.table.values.col(static_cast<Eigen::Index>(r.column));
      tests.push_back(r.evaluate(std::span<const double>(col.data(), static_cast<std::size_t>(col.size())), test.y));
      const auto& t = tests.back();
      sf += csv::join({r.feature, fmt(r.validation.mean), fmt(t.f1.mean), fmt(t.f1.low), fmt(t.f1.high),
                       fmt(t.majority_f1)}) +
            "\n";
    }
    const auto& best = ml::best_single_feature(results);
    const auto& bt = tests[static_cast<std::size_t>(&best - results.data())];
    row("best_single_feature", best.feature);
    row("best_single_feature_val_f1_mean", fmt(best.validation.mean));
    row("best_single_feature_test_f1_mean", fmt(bt.f1.mean));
    out.add("single_feature_test.csv", sf);
    ctx.out << "best single feature: " << best.feature << ", test F1 " << fixed(bt.f1.mean, 3) << '\n';
  }
  ctx.out << "naive benchmark F1: " << fixed(benchmark, 3) << '\n';

  out.add("evaluation.csv", eval);
  out.add("predictions.csv", preds);
  return out;
}

}  // namespace utrad::cli
