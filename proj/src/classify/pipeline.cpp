#include "utrad/classify/pipeline.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>
#include <tuple>

#include "utrad/classify/metrics.hpp"
#include "utrad/common/csv.hpp"
#include "utrad/common/error.hpp"
#include "utrad/common/parallel.hpp"
#include "utrad/common/rng.hpp"

namespace utrad::ml {

void TaskData::validate() const {
  const auto n = static_cast<std::size_t>(x.rows());
  if (y.size() != n || groups.size() != n) throw PreconditionError("task data: row counts differ");
  if (feature_names.size() != static_cast<std::size_t>(x.cols())) {
    throw PreconditionError("task data: feature names do not match columns");
  }
  for (int v : y) {
    if (v != 0 && v != 1) throw PreconditionError("task data: labels must be 0 or 1");
  }
}

std::vector<SelectorConfig> default_selector_grid() {
  std::vector<SelectorConfig> g{{"none", 0}};
  for (const char* m : {"topk_mi", "mrmr", "pca"}) {
    for (int k : {5, 10, 25}) g.push_back({m, k});
  }
  for (int t : {10, 25}) g.push_back({"lasso", t});
  g.push_back({"stability", 0});
  return g;
}

std::vector<LearnerConfig> default_learner_grid() {
  std::vector<LearnerConfig> g;
  for (double c : {0.01, 0.1, 1.0, 10.0, 100.0}) {
    LearnerConfig l;
    l.kind = "logreg";
    l.c = c;
    g.push_back(l);
  }
  const double cs[] = {0.1, 1.0, 10.0, 100.0, 1000.0};
  for (double c : cs) {
    LearnerConfig l;
    l.kind = "svm_linear";
    l.c = c;
    g.push_back(l);
  }
  for (double c : cs) {
    for (double gamma : {0.001, 0.01, 0.1, 1.0, 10.0}) {
      LearnerConfig l;
      l.kind = "svm_rbf";
      l.c = c;
      l.gamma = gamma;
      g.push_back(l);
    }
  }
  for (int trees : {100, 500}) {
    for (int depth : {0, 5}) {
      LearnerConfig l;
      l.kind = "random_forest";
      l.trees = trees;
      l.depth = depth;
      g.push_back(l);
    }
  }
  for (int rounds : {50, 200}) {
    for (int depth : {2, 3}) {
      for (double lr : {0.1, 0.3}) {
        LearnerConfig l;
        l.kind = "grad_boost";
        l.rounds = rounds;
        l.depth = depth;
        l.learning_rate = lr;
        g.push_back(l);
      }
    }
  }
  return g;
}

std::uint64_t grid_hash(const std::vector<SelectorConfig>& selectors,
                        const std::vector<LearnerConfig>& learners) {
  std::string text;
  for (const auto& s : selectors) text += "selector " + s.method + " " + s.params() + "\n";
  for (const auto& l : learners) text += "learner " + l.kind + " " + l.params() + "\n";
  return fnv1a(text);
}

bool better_combo(const ComboResult& a, const ComboResult& b) {
  const auto key = [](const ComboResult& c) {
    return std::make_tuple(-c.validation.mean, c.mean_features, c.selector.method, c.learner.kind,
                           c.selector.params(), c.learner.params());
  };
  return key(a) < key(b);
}

std::vector<int> FoldModel::predict(const Eigen::MatrixXd& raw) const {
  return learner->predict(selector.transform(normalizer.apply(raw)));
}

namespace {

bool uses_k(const SelectorConfig& s) { return s.method != "none" && s.method != "stability"; }

Eigen::MatrixXd rows_of(const Eigen::MatrixXd& x, const std::vector<std::size_t>& rows) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), x.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.row(static_cast<Eigen::Index>(i)) = x.row(static_cast<Eigen::Index>(rows[i]));
  }
  return out;
}

template <typename T>
std::vector<T> pick(const std::vector<T>& v, const std::vector<std::size_t>& rows) {
  std::vector<T> out;
  out.reserve(rows.size());
  for (auto r : rows) out.push_back(v[r]);
  return out;
}

std::uint64_t selector_seed(std::uint64_t seed, int fold, std::size_t s) {
  return Rng::mix(Rng::mix(seed, 0x5e1ec7 + static_cast<std::uint64_t>(fold)), s);
}

std::uint64_t learner_seed(std::uint64_t seed, int fold, std::size_t s, std::size_t l) {
  return Rng::mix(Rng::mix(Rng::mix(seed, 0x1ea7 + static_cast<std::uint64_t>(fold)), s), l);
}

struct FoldData {
  std::vector<std::size_t> train, val;
  stats::Normalizer normalizer;
  Eigen::MatrixXd z_train, z_val;
  std::vector<int> y_train, y_val;
  std::vector<double> w_train;
};

}  // namespace

GridSearchResult grid_search(const TaskData& data, const FoldPlan& plan,
                             const std::vector<SelectorConfig>& selector_grid,
                             const std::vector<LearnerConfig>& learners, std::uint64_t seed,
                             unsigned threads) {
  data.validate();
  if (plan.fold.size() != data.y.size()) throw PreconditionError("fold plan does not match data");
  const auto p = static_cast<std::size_t>(data.x.cols());
  std::vector<SelectorConfig> selectors;
  for (const auto& s : selector_grid) {
    if (!uses_k(s) || static_cast<std::size_t>(s.k) <= p) selectors.push_back(s);
  }
  if (selectors.empty() || learners.empty()) throw PreconditionError("empty model grid");

  const auto k = static_cast<std::size_t>(plan.k);
  std::vector<FoldData> folds(k);
  for (std::size_t f = 0; f < k; ++f) {
    FoldData& fd = folds[f];
    fd.train = plan.train_indices(static_cast<int>(f));
    fd.val = plan.validation_indices(static_cast<int>(f));
    if (fd.train.empty() || fd.val.empty()) throw PreconditionError("fold without rows");
    const Eigen::MatrixXd raw_train = rows_of(data.x, fd.train);
    fd.normalizer = stats::Normalizer::fit(raw_train);
    fd.z_train = fd.normalizer.apply(raw_train);
    fd.z_val = fd.normalizer.apply(rows_of(data.x, fd.val));
    fd.y_train = pick(data.y, fd.train);
    fd.y_val = pick(data.y, fd.val);
    fd.w_train = ClassWeights::from_labels(fd.y_train).per_sample(fd.y_train);
  }

  const std::size_t ns = selectors.size(), nl = learners.size();
  struct SelectorFit {
    std::unique_ptr<Selector> selector;
    Eigen::MatrixXd train, val;
  };
  std::vector<SelectorFit> sel(k * ns);
  parallel_for(k * ns, threads, [&](std::size_t job) {
    const std::size_t f = job / ns, s = job % ns;
    const FoldData& fd = folds[f];
    auto fit = std::make_unique<Selector>(Selector::fit(
        selectors[s], fd.z_train, fd.y_train, fd.w_train, selector_seed(seed, static_cast<int>(f), s)));
    sel[job].train = fit->transform(fd.z_train);
    sel[job].val = fit->transform(fd.z_val);
    sel[job].selector = std::move(fit);
  });

  std::vector<double> train_f1(k * ns * nl), val_f1(k * ns * nl);
  parallel_for(k * ns * nl, threads, [&](std::size_t job) {
    const std::size_t f = job / (ns * nl), s = (job / nl) % ns, l = job % nl;
    const FoldData& fd = folds[f];
    const SelectorFit& sf = sel[f * ns + s];
    const auto model = fit_learner(learners[l], sf.train, fd.y_train, fd.w_train,
                                   learner_seed(seed, static_cast<int>(f), s, l));
    train_f1[job] = f1(model->predict(sf.train), fd.y_train);
    val_f1[job] = f1(model->predict(sf.val), fd.y_val);
  });

  GridSearchResult result;
  for (std::size_t s = 0; s < ns; ++s) {
    for (std::size_t l = 0; l < nl; ++l) {
      ComboResult c;
      c.selector = selectors[s];
      c.learner = learners[l];
      for (std::size_t f = 0; f < k; ++f) {
        const std::size_t job = (f * ns + s) * nl + l;
        c.train_f1.push_back(train_f1[job]);
        c.validation_f1.push_back(val_f1[job]);
        c.mean_features += static_cast<double>(sel[f * ns + s].selector->output_dim());
      }
      c.mean_features /= static_cast<double>(k);
      c.train = unit_interval(c.train_f1);
      c.validation = unit_interval(c.validation_f1);
      result.table.push_back(std::move(c));
    }
  }

  std::size_t best = 0;
  for (std::size_t i = 1; i < result.table.size(); ++i) {
    if (better_combo(result.table[i], result.table[best])) best = i;
  }
  const ComboResult& win = result.table[best];
  const std::size_t bs = best / nl, bl = best % nl;

  TrainedPipeline& tp = result.best;
  tp.seed = seed;
  tp.grid_hash = grid_hash(selector_grid, learners);
  tp.feature_names = data.feature_names;
  tp.selector = win.selector;
  tp.learner = win.learner;
  tp.train_f1 = win.train_f1;
  tp.validation_f1 = win.validation_f1;
  tp.validation = win.validation;
  for (std::size_t f = 0; f < k; ++f) {
    const FoldData& fd = folds[f];
    const SelectorFit& sf = sel[f * ns + bs];
    FoldModel m;
    m.normalizer = fd.normalizer;
    m.selector = *sf.selector;
    m.learner = fit_learner(win.learner, sf.train, fd.y_train, fd.w_train,
                            learner_seed(seed, static_cast<int>(f), bs, bl));
    tp.folds.push_back(std::move(m));
  }
  return result;
}

TestReport evaluate_test(const TrainedPipeline& pipeline, const Eigen::MatrixXd& test,
                         const std::vector<std::string>& columns, std::span<const int> labels) {
  if (static_cast<std::size_t>(test.cols()) != columns.size() ||
      static_cast<std::size_t>(test.rows()) != labels.size()) {
    throw PreconditionError("test table, column names and labels disagree");
  }
  if (pipeline.folds.empty()) throw PreconditionError("pipeline has no fold models");
  std::map<std::string, std::size_t> where;
  for (std::size_t i = 0; i < columns.size(); ++i) where[columns[i]] = i;
  const std::set<std::string> expected(pipeline.feature_names.begin(), pipeline.feature_names.end());
  std::string missing, extra;
  for (const auto& name : pipeline.feature_names) {
    if (!where.count(name)) missing += (missing.empty() ? "" : ", ") + name;
  }
  for (const auto& name : columns) {
    if (!expected.count(name)) extra += (extra.empty() ? "" : ", ") + name;
  }
  if (!missing.empty() || !extra.empty() || columns.size() != expected.size()) {
    std::string msg = "feature schema mismatch";
    if (!missing.empty()) msg += "; missing columns: " + missing;
    if (!extra.empty()) msg += "; unexpected columns: " + extra;
    if (missing.empty() && extra.empty()) msg += "; duplicate columns";
    throw InputError(msg);
  }
  Eigen::MatrixXd ordered(test.rows(), static_cast<Eigen::Index>(pipeline.feature_names.size()));
  for (std::size_t j = 0; j < pipeline.feature_names.size(); ++j) {
    ordered.col(static_cast<Eigen::Index>(j)) =
        test.col(static_cast<Eigen::Index>(where.at(pipeline.feature_names[j])));
  }
  std::vector<std::vector<int>> preds;
  for (const auto& m : pipeline.folds) preds.push_back(m.predict(ordered));
  return score_models(preds, labels);
}

std::string serialize(const TrainedPipeline& tp) {
  std::ostringstream ss;
  Writer w(ss);
  w.tag("utrad-pipeline").put(1);
  w.tag("seed").put(tp.seed);
  w.tag("grid_hash").put(tp.grid_hash);
  w.tag("task").put(tp.task.empty() ? std::string("-") : tp.task);
  w.tag("positive").put(static_cast<std::uint64_t>(tp.positive_classes.size()));
  for (const auto& c : tp.positive_classes) w.put(c);
  w.tag("negative").put(static_cast<std::uint64_t>(tp.negative_classes.size()));
  for (const auto& c : tp.negative_classes) w.put(c);
  w.tag("features").put(static_cast<std::uint64_t>(tp.feature_names.size()));
  for (const auto& name : tp.feature_names) w.tag("f").put(name);
  w.tag("selector_config").put(tp.selector.method).put(tp.selector.k);
  w.tag("learner_config")
      .put(tp.learner.kind)
      .put(tp.learner.c)
      .put(tp.learner.gamma)
      .put(tp.learner.trees)
      .put(tp.learner.depth)
      .put(tp.learner.rounds)
      .put(tp.learner.learning_rate);
  w.tag("train_f1").put(Eigen::VectorXd(Eigen::Map<const Eigen::VectorXd>(
      tp.train_f1.data(), static_cast<Eigen::Index>(tp.train_f1.size()))));
  w.tag("validation_f1").put(Eigen::VectorXd(Eigen::Map<const Eigen::VectorXd>(
      tp.validation_f1.data(), static_cast<Eigen::Index>(tp.validation_f1.size()))));
  w.tag("folds").put(static_cast<std::uint64_t>(tp.folds.size()));
  for (const auto& m : tp.folds) {
    w.tag("normalizer").put(m.normalizer.mean()).put(m.normalizer.sd());
    m.selector.save(w);
    m.learner->save(w);
  }
  w.tag("end");
  ss << '\n';
  return ss.str();
}

TrainedPipeline deserialize(const std::string& text) {
  std::istringstream ss(text);
  Reader r(ss);
  TrainedPipeline tp;
  r.expect("utrad-pipeline");
  if (r.integer() != 1) throw InputError("unsupported pipeline artifact version");
  r.expect("seed");
  tp.seed = r.u64();
  r.expect("grid_hash");
  tp.grid_hash = r.u64();
  r.expect("task");
  tp.task = r.word();
  r.expect("positive");
  tp.positive_classes.resize(r.u64());
  for (auto& c : tp.positive_classes) c = r.word();
  r.expect("negative");
  tp.negative_classes.resize(r.u64());
  for (auto& c : tp.negative_classes) c = r.word();
  r.expect("features");
  tp.feature_names.resize(r.u64());
  for (auto& name : tp.feature_names) {
    r.expect("f");
    name = r.word();
  }
  r.expect("selector_config");
  tp.selector.method = r.word();
  tp.selector.k = r.integer();
  r.expect("learner_config");
  tp.learner.kind = r.word();
  tp.learner.c = r.real();
  tp.learner.gamma = r.real();
  tp.learner.trees = r.integer();
  tp.learner.depth = r.integer();
  tp.learner.rounds = r.integer();
  tp.learner.learning_rate = r.real();
  const auto to_vec = [](const Eigen::VectorXd& v) {
    return std::vector<double>(v.data(), v.data() + v.size());
  };
  r.expect("train_f1");
  tp.train_f1 = to_vec(r.vector());
  r.expect("validation_f1");
  tp.validation_f1 = to_vec(r.vector());
  if (!tp.validation_f1.empty()) tp.validation = unit_interval(tp.validation_f1);
  r.expect("folds");
  tp.folds.resize(r.u64());
  for (auto& m : tp.folds) {
    r.expect("normalizer");
    Eigen::VectorXd mean = r.vector();
    Eigen::VectorXd sd = r.vector();
    if (static_cast<std::size_t>(mean.size()) != tp.feature_names.size()) {
      throw InputError("normalizer width differs from the feature list");
    }
    m.normalizer = stats::Normalizer::from_params(std::move(mean), std::move(sd));
    m.selector = Selector::load(r);
    m.learner = load_learner(r);
  }
  r.expect("end");
  return tp;
}

}  // namespace utrad::ml
