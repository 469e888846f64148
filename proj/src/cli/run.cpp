#include "utrad/cli/run.hpp"

#include <CLI11.hpp>

#include "commands.hpp"

namespace utrad::cli {

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Uterine tumor radiomics: feature extraction, segmentation agreement and classification", "utrad"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path, out_dir = ".";
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> threads;
  app.add_option("--config", config_path, "key = value configuration file")->check(CLI::ExistingFile);
  app.add_option("--seed", seed, "random seed (overrides run.seed)");
  app.add_option("--threads", threads, "worker threads (overrides run.threads)")->check(CLI::PositiveNumber);
  app.add_option("--out-dir", out_dir, "directory for output files");

  std::string manifest, features, model, pairs, points, task;
  ExtractArgs extract;
  BayesArgs bayes;
  std::optional<std::int64_t> tp, fn, fp, tn;

  auto* split = app.add_subcommand("split", "patient-grouped stratified train/test split");
  split->add_option("--manifest", manifest, "case manifest CSV")->required();

  auto* ext = app.add_subcommand("extract", "radiomic features per tumor instance");
  ext->add_option("--manifest", extract.manifest, "case manifest CSV")->required();
  ext->add_option("--source", extract.source, "manual or predicted")->capture_default_str();
  ext->add_option("--predicted-dir", extract.predicted_dir, "directory of {patient}_{image}.nii.gz masks");

  auto* seg = app.add_subcommand("segeval", "Dice agreement between raters");
  seg->add_option("--pairs", pairs, "CSV: case_id,rater,tumor_mask_path[,uterus_mask_path]")->required();

  auto* lc = app.add_subcommand("learncurve", "exponential plateau fit of DSC against training size");
  lc->add_option("--points", points, "CSV: n,dsc")->required();

  auto study_opts = [&](CLI::App* sub) {
    sub->add_option("--features", features, "feature table CSV")->required();
    sub->add_option("--manifest", manifest, "manifest with split column")->required();
    sub->add_option("--task", task, "task name (default: config task.name)");
  };
  auto* screen = app.add_subcommand("screen", "Mann-Whitney screen and single-feature study");
  study_opts(screen);
  auto* train = app.add_subcommand("train", "grid search over selectors and learners");
  study_opts(train);

  auto* evaluate = app.add_subcommand("evaluate", "score a trained pipeline on the test split");
  evaluate->add_option("--features", features, "feature table CSV")->required();
  evaluate->add_option("--manifest", manifest, "manifest with split column")->required();
  evaluate->add_option("--model", model, "pipeline artifact from train")->required();

  auto* bay = app.add_subcommand("bayes", "posterior malignancy risk from a prior and an operating point");
  bay->add_option("--prior", bayes.priors, "prior probability (repeatable)")->required();
  bay->add_option("--tp", tp);
  bay->add_option("--fn", fn);
  bay->add_option("--fp", fp);
  bay->add_option("--tn", tn);
  bay->add_option("--tpr", bayes.tpr);
  bay->add_option("--fpr", bayes.fpr);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }

  try {
    Context ctx{config_path.empty() ? RunConfig{} : RunConfig::load(config_path), out_dir, out, err};
    if (seed) ctx.config.seed = seed;
    if (threads) ctx.config.threads = *threads;

    std::optional<OutputSet> outputs;
    if (split->parsed()) {
      outputs = cmd_split(ctx, manifest);
    } else if (ext->parsed()) {
      outputs = cmd_extract(ctx, extract);
    } else if (seg->parsed()) {
      outputs = cmd_segeval(ctx, pairs);
    } else if (lc->parsed()) {
      outputs = cmd_learncurve(ctx, points);
    } else if (screen->parsed()) {
      outputs = cmd_screen(ctx, {features, manifest, task});
    } else if (train->parsed()) {
      outputs = cmd_train(ctx, {features, manifest, task});
    } else if (evaluate->parsed()) {
      outputs = cmd_evaluate(ctx, {features, manifest, model});
    } else if (bay->parsed()) {
      bayes.tp = tp;
      bayes.fn = fn;
      bayes.fp = fp;
      bayes.tn = tn;
      cmd_bayes(ctx, bayes);
    }
    if (outputs) {
      for (const auto& p : outputs->commit()) err << "wrote " << p.string() << '\n';
    }
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitOk;
}

}  // namespace utrad::cli
