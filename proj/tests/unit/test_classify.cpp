#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

#include "utrad/classify.hpp"
#include "utrad/common/error.hpp"
#include "utrad/common/rng.hpp"

using namespace utrad;
using namespace utrad::ml;

namespace {

std::vector<double> ones(std::size_t n) { return std::vector<double>(n, 1.0); }

// Weighted F1 of every midpoint x direction, by direct counting.
struct Candidate {
  double f1;
  double gap;
  double threshold;
  bool above;
};

std::vector<Candidate> brute_thresholds(const std::vector<double>& v, const std::vector<int>& y,
                                        const std::vector<double>& w) {
  std::vector<double> u = v;
  std::sort(u.begin(), u.end());
  u.erase(std::unique(u.begin(), u.end()), u.end());
  std::vector<Candidate> out;
  for (std::size_t j = 0; j + 1 < u.size(); ++j) {
    const double t = 0.5 * (u[j] + u[j + 1]);
    for (bool above : {true, false}) {
      double tp = 0, fp = 0, fn = 0;
      for (std::size_t i = 0; i < v.size(); ++i) {
        const bool pred = above ? v[i] > t : v[i] < t;
        if (pred && y[i]) tp += w[i];
        if (pred && !y[i]) fp += w[i];
        if (!pred && y[i]) fn += w[i];
      }
      const double d = 2 * tp + fp + fn;
      out.push_back({d > 0 ? 2 * tp / d : 0.0, u[j + 1] - u[j], t, above});
    }
  }
  return out;
}

Eigen::MatrixXd matrix(std::initializer_list<std::initializer_list<double>> rows) {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()),
                    static_cast<Eigen::Index>(rows.begin()->size()));
  Eigen::Index r = 0;
  for (const auto& row : rows) {
    Eigen::Index c = 0;
    for (double v : row) m(r, c++) = v;
    ++r;
  }
  return m;
}

std::vector<LearnerConfig> one_of_each() {
  std::vector<LearnerConfig> out;
  LearnerConfig l;
  l.kind = "logreg";
  l.c = 10;
  out.push_back(l);
  l = {};
  l.kind = "svm_linear";
  l.c = 10;
  out.push_back(l);
  l = {};
  l.kind = "svm_rbf";
  l.c = 1000;
  l.gamma = 1;
  out.push_back(l);
  l = {};
  l.kind = "random_forest";
  l.trees = 50;
  out.push_back(l);
  l = {};
  l.kind = "grad_boost";
  l.rounds = 50;
  l.depth = 2;
  l.learning_rate = 0.3;
  out.push_back(l);
  return out;
}

// Equal-frequency coding: one bin per distinct value when there are at most
// ten, otherwise bin = floor(10 * #below / n).
std::vector<int> oracle_bins(const std::vector<double>& v) {
  std::set<double> distinct(v.begin(), v.end());
  std::vector<int> out;
  for (double x : v) {
    int below = 0;
    for (double z : v) below += z < x;
    if (distinct.size() <= 10) {
      out.push_back(static_cast<int>(std::distance(distinct.begin(), distinct.find(x))));
    } else {
      out.push_back(std::min(9, 10 * below / static_cast<int>(v.size())));
    }
  }
  return out;
}

double oracle_mi(const std::vector<int>& a, const std::vector<int>& b) {
  std::map<std::pair<int, int>, double> joint;
  std::map<int, double> pa, pb;
  const double n = static_cast<double>(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    joint[{a[i], b[i]}] += 1 / n;
    pa[a[i]] += 1 / n;
    pb[b[i]] += 1 / n;
  }
  double mi = 0;
  for (const auto& [k, p] : joint) mi += p * std::log(p / (pa[k.first] * pb[k.second]));
  return mi;
}

std::vector<double> column(const Eigen::MatrixXd& x, Eigen::Index c) {
  return std::vector<double>(x.col(c).data(), x.col(c).data() + x.rows());
}

TaskData separable_task(int patients, std::uint64_t seed) {
  Rng rng(seed);
  TaskData d;
  const int p = 6;
  d.x.resize(patients, p);
  for (int i = 0; i < patients; ++i) {
    const int y = i % 3 == 0 ? 1 : 0;
    d.y.push_back(y);
    d.groups.push_back("P" + std::to_string(i));
    d.x(i, 0) = y;  // the label itself
    for (int c = 1; c < p; ++c) d.x(i, c) = rng.normal();
  }
  for (int c = 0; c < p; ++c) d.feature_names.push_back("f" + std::to_string(c));
  return d;
}

}  // namespace

TEST_CASE("f1 conventions") {
  const std::vector<int> y{1, 1, 0, 0, 1};
  CHECK(f1(y, y) == 1.0);
  // TP=2, FP=1, FN=1
  CHECK(f1(std::vector<int>{1, 1, 1, 0, 0}, y) == doctest::Approx(2.0 / 3.0));
  CHECK(f1(std::vector<int>{0, 0, 0, 0, 0}, y) == 0.0);
  CHECK(f1(std::vector<int>{0, 0}, std::vector<int>{0, 0}) == 0.0);

  Rng rng(4);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<int> a(20), b(20);
    for (int i = 0; i < 20; ++i) {
      a[i] = rng.uniform01() < 0.4;
      b[i] = rng.uniform01() < 0.4;
    }
    const double before = f1(a, b);
    std::vector<std::size_t> perm(20);
    std::iota(perm.begin(), perm.end(), 0);
    rng.shuffle(perm);
    std::vector<int> pa(20), pb(20);
    for (int i = 0; i < 20; ++i) {
      pa[i] = a[perm[i]];
      pb[i] = b[perm[i]];
    }
    CHECK(f1(pa, pb) == before);
  }
}

TEST_CASE("naive benchmark") {
  const double b = naive_benchmark(6, 180);
  CHECK(std::abs(b - 0.0645) <= 0.0005);
  char buf[16];
  std::snprintf(buf, sizeof buf, "%.3f", b);
  CHECK(std::string(buf) == "0.065");
  CHECK(naive_benchmark(5, 5) == 1.0);
  CHECK(naive_benchmark(1, 2) == doctest::Approx(2.0 / 3.0));
  CHECK_THROWS_AS(naive_benchmark(0, 10), PreconditionError);
}

TEST_CASE("class weights") {
  const auto w = ClassWeights::from_counts(30, 13);
  CHECK(w.positive == 1.0);
  CHECK(w.negative == doctest::Approx(0.4333).epsilon(1e-4));
  char buf[16];
  std::snprintf(buf, sizeof buf, "%.2f", w.negative);
  CHECK(std::string(buf) == "0.43");
  for (std::size_t a = 1; a < 60; ++a) {
    for (std::size_t b = 1; b < 60; ++b) {
      const auto cw = ClassWeights::from_counts(a, b);
      const double maj = a >= b ? cw.negative : cw.positive;
      const double minority = static_cast<double>(std::min(a, b));
      CHECK(std::min(cw.negative, cw.positive) > 0.0);
      CHECK(std::max(cw.negative, cw.positive) == 1.0);
      // Exact up to the single rounding of the quotient.
      const double product = maj * static_cast<double>(std::max(a, b));
      CHECK(std::abs(product - minority) <= std::nextafter(minority, 1e9) - minority);
    }
  }
  CHECK_THROWS_AS(ClassWeights::from_counts(0, 3), PreconditionError);
}

TEST_CASE("majority vote") {
  CHECK(predict_majority(std::vector<int>{1, 1, 0}) == 1);
  CHECK(predict_majority(std::vector<int>{0, 0, 0}) == 0);
  CHECK(predict_majority(std::vector<int>{0, 1, 0}) == 0);
  CHECK_THROWS_AS(predict_majority(std::vector<int>{0, 1}), PreconditionError);

  // Thresholds all below a value: unanimous, equal to each prediction.
  std::vector<ThresholdClassifier> clfs(3);
  clfs[0].threshold = 1;
  clfs[1].threshold = 2;
  clfs[2].threshold = 3;
  std::vector<int> votes;
  for (const auto& c : clfs) votes.push_back(c.predict(10));
  CHECK(predict_majority(votes) == clfs[0].predict(10));
}

TEST_CASE("fit_threshold examples") {
  const std::vector<double> v{10, 20, 30, 40, 50};
  const std::vector<int> y{0, 0, 0, 1, 1};
  auto c = fit_threshold(v, y, ones(5));
  CHECK(c.threshold == 35.0);
  CHECK(c.positive_above);
  CHECK(c.training_f1 == 1.0);

  const std::vector<int> inv{1, 1, 1, 0, 0};
  c = fit_threshold(v, std::vector<int>{0, 0, 0, 1, 1}, ones(5));
  auto d = fit_threshold(v, inv, ones(5));
  CHECK(d.threshold == 35.0);
  CHECK_FALSE(d.positive_above);

  // Interleaved: compare with the exhaustive scan.
  const std::vector<double> iv{1, 3, 2, 4};
  const std::vector<int> iy{0, 0, 1, 1};
  const auto e = fit_threshold(iv, iy, ones(4));
  CHECK(e.training_f1 < 1.0);
  double best = 0;
  for (const auto& cand : brute_thresholds(iv, iy, ones(4))) best = std::max(best, cand.f1);
  CHECK(e.training_f1 == doctest::Approx(best));
  // Among equal-F1 candidates with equal gaps, the lowest threshold wins.
  CHECK(e.threshold == 1.5);

  const auto k = fit_threshold(std::vector<double>{5, 5, 5}, std::vector<int>{1, 0, 0}, ones(3));
  CHECK(k.degenerate);
  CHECK(k.predict(100) == 0);
  CHECK_THROWS_AS(fit_threshold(v, std::vector<int>{0, 0, 0, 0, 0}, ones(5)), PreconditionError);
}

TEST_CASE("fit_threshold is optimal against the exhaustive scan") {
  Rng rng(8);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = 4 + rng.uniform_index(20);
    std::vector<double> v(n), w(n);
    std::vector<int> y(n);
    for (std::size_t i = 0; i < n; ++i) {
      v[i] = std::round(rng.uniform(0, 12));  // ties on purpose
      y[i] = rng.uniform01() < 0.4;
      w[i] = trial % 2 ? 1.0 : rng.uniform(0.2, 1.0);
    }
    y[0] = 1;
    y[1] = 0;
    const auto c = fit_threshold(v, y, w);
    const auto cands = brute_thresholds(v, y, w);
    if (cands.empty()) {
      CHECK(c.degenerate);
      continue;
    }
    double best = -1;
    for (const auto& cand : cands) best = std::max(best, cand.f1);
    CHECK(c.training_f1 == doctest::Approx(best).epsilon(1e-12));
    double widest = 0;
    for (const auto& cand : cands) {
      if (cand.f1 > best - 1e-12) widest = std::max(widest, cand.gap);
    }
    double lowest = 1e300;
    for (const auto& cand : cands) {
      if (cand.f1 > best - 1e-12 && cand.gap == widest) lowest = std::min(lowest, cand.threshold);
    }
    CHECK(c.threshold == lowest);
    // Refit reproduces the claimed training score.
    std::vector<int> pred(n);
    for (std::size_t i = 0; i < n; ++i) pred[i] = c.predict(v[i]);
    CHECK(weighted_f1(pred, y, w) == doctest::Approx(c.training_f1));
  }
}

TEST_CASE("make_folds examples") {
  std::vector<int> y;
  std::vector<std::string> g;
  for (int i = 0; i < 9; ++i) {
    y.push_back(i % 2);
    g.push_back("P" + std::to_string(i));
  }
  y[8] = 1;  // 4 negatives... keep 5/4 split
  const auto plan = make_folds(y, g, 3, 1);
  for (int f = 0; f < 3; ++f) {
    const auto v = plan.validation_indices(f);
    CHECK(v.size() == 3);
    int pos = 0;
    for (auto i : v) pos += y[i];
    CHECK(pos >= 1);
    CHECK(pos <= 2);
  }

  // Patient with three instances lands in one fold.
  std::vector<int> y2{1, 1, 1, 0, 1, 0, 1, 0, 0};
  std::vector<std::string> g2{"A", "A", "A", "B", "C", "D", "E", "F", "G"};
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const auto p = make_folds(y2, g2, 3, seed);
    CHECK(p.fold[0] == p.fold[1]);
    CHECK(p.fold[1] == p.fold[2]);
    CHECK(p.fold == make_folds(y2, g2, 3, seed).fold);
  }
  CHECK_THROWS_AS(make_folds(std::vector<int>{1, 1, 0, 0, 0}, std::vector<std::string>{"a", "b", "c", "d", "e"},
                             3, 0),
                  PreconditionError);
}

TEST_CASE("make_folds properties over random cohorts") {
  Rng rng(21);
  for (int trial = 0; trial < 200; ++trial) {
    const int patients = 9 + static_cast<int>(rng.uniform_index(50));
    const bool multi = trial % 2 == 1;
    std::vector<int> y;
    std::vector<std::string> g;
    std::size_t largest = 1;
    for (int p = 0; p < patients; ++p) {
      const int label = p < 3 ? 1 : (p < 6 ? 0 : static_cast<int>(rng.uniform01() < 0.3));
      const std::size_t count = multi ? 1 + rng.uniform_index(3) : 1;
      largest = std::max(largest, count);
      for (std::size_t i = 0; i < count; ++i) {
        y.push_back(label);
        g.push_back("P" + std::to_string(p));
      }
    }
    const auto plan = make_folds(y, g, 3, rng.next());
    std::map<std::string, std::set<int>> where;
    for (std::size_t i = 0; i < y.size(); ++i) where[g[i]].insert(plan.fold[i]);
    for (const auto& [p, s] : where) CHECK(s.size() == 1);
    for (int c = 0; c < 2; ++c) {
      const double total = static_cast<double>(std::count(y.begin(), y.end(), c));
      for (int f = 0; f < 3; ++f) {
        double in_fold = 0;
        for (std::size_t i = 0; i < y.size(); ++i) in_fold += plan.fold[i] == f && y[i] == c;
        CHECK(in_fold >= 1);
        CHECK(std::abs(in_fold - total / 3.0) <= static_cast<double>(largest));
      }
    }
  }
}

TEST_CASE("topk_mi ranks the label feature first") {
  Rng rng(3);
  Eigen::MatrixXd x(40, 8);
  std::vector<int> y(40);
  for (int i = 0; i < 40; ++i) {
    y[i] = i % 2;
    for (int c = 0; c < 8; ++c) x(i, c) = rng.normal();
    x(i, 5) = y[i];
  }
  const auto s = Selector::fit({"topk_mi", 3}, x, y, ones(40), 1);
  REQUIRE(s.indices().size() == 3);
  CHECK(s.indices()[0] == 5);
  CHECK(s.transform(x).col(0) == x.col(5));
  CHECK_THROWS_AS(Selector::fit({"topk_mi", 9}, x, y, ones(40), 1), PreconditionError);
  CHECK_THROWS_AS(Selector::fit({"bogus", 1}, x, y, ones(40), 1), InputError);
}

TEST_CASE("pca components are orthonormal with nonincreasing variance") {
  Rng rng(5);
  Eigen::MatrixXd x(30, 7);
  for (int i = 0; i < 30; ++i) {
    const double a = rng.normal(), b = rng.normal();
    for (int c = 0; c < 7; ++c) x(i, c) = a * (c + 1) + b * (7 - c) * 0.3 + 0.1 * rng.normal();
  }
  std::vector<int> y(30, 0);
  y[0] = 1;
  const auto s = Selector::fit({"pca", 4}, x, y, ones(30), 1);
  const Eigen::MatrixXd v = s.components();
  CHECK((v.transpose() * v - Eigen::MatrixXd::Identity(4, 4)).cwiseAbs().maxCoeff() < 1e-10);
  for (int j = 0; j + 1 < 4; ++j) CHECK(s.explained_variance()(j) >= s.explained_variance()(j + 1));
  // Variance of each projected column equals its eigenvalue.
  const Eigen::MatrixXd z = s.transform(x);
  for (int j = 0; j < 4; ++j) {
    const double var = (z.col(j).array() - z.col(j).mean()).square().sum() / 29.0;
    CHECK(var == doctest::Approx(s.explained_variance()(j)).epsilon(1e-9));
  }
}

TEST_CASE("mrmr picks one duplicate plus a complementary feature") {
  Rng rng(12);
  const int n = 60;
  Eigen::MatrixXd x(n, 5);
  std::vector<int> y(n);
  for (int i = 0; i < n; ++i) {
    const int a = rng.uniform01() < 0.5, b = rng.uniform01() < 0.5;
    y[i] = a | b;
    x(i, 0) = a + 0.01 * rng.normal();
    x(i, 1) = x(i, 0);  // duplicate
    x(i, 2) = b + 0.01 * rng.normal();
    x(i, 3) = rng.normal();
    x(i, 4) = rng.normal();
  }
  const auto picked = mrmr_rank(x, y, 2);
  REQUIRE(picked.size() == 2);
  CHECK((picked[0] == 0 || picked[0] == 1 || picked[0] == 2));
  const std::set<std::size_t> s(picked.begin(), picked.end());
  CHECK_FALSE((s.count(0) && s.count(1)));
}

TEST_CASE("mrmr matches an independent greedy oracle") {
  Rng rng(31);
  for (int trial = 0; trial < 60; ++trial) {
    const int n = 20 + static_cast<int>(rng.uniform_index(30));
    const int p = 3 + static_cast<int>(rng.uniform_index(4));
    Eigen::MatrixXd x(n, p);
    std::vector<int> y(n);
    for (int i = 0; i < n; ++i) {
      y[i] = rng.uniform01() < 0.45;
      for (int c = 0; c < p; ++c) x(i, c) = std::round(4 * (rng.normal() + 0.8 * c * y[i] / p));
    }
    y[0] = 0;
    y[1] = 1;
    const int k = 1 + static_cast<int>(rng.uniform_index(static_cast<std::size_t>(p)));
    std::vector<std::vector<int>> bins;
    std::vector<double> rel;
    for (int c = 0; c < p; ++c) {
      bins.push_back(oracle_bins(column(x, c)));
      rel.push_back(oracle_mi(bins.back(), y));
    }
    std::vector<std::size_t> expect;
    while (static_cast<int>(expect.size()) < k) {
      int best = -1;
      double best_score = 0;
      for (int c = 0; c < p; ++c) {
        if (std::find(expect.begin(), expect.end(), static_cast<std::size_t>(c)) != expect.end()) continue;
        double red = 0;
        for (auto s : expect) red += oracle_mi(bins[c], bins[s]);
        const double score = rel[c] - (expect.empty() ? 0 : red / expect.size());
        if (best < 0 || score > best_score + 1e-12) {
          best = c;
          best_score = score;
        }
      }
      expect.push_back(static_cast<std::size_t>(best));
    }
    CHECK(mrmr_rank(x, y, k) == expect);
  }
}

TEST_CASE("lasso path reaches the target count at the largest lambda") {
  Rng rng(9);
  const int n = 60, p = 12;
  Eigen::MatrixXd x(n, p);
  std::vector<int> y(n);
  for (int i = 0; i < n; ++i) {
    for (int c = 0; c < p; ++c) x(i, c) = rng.normal();
    y[i] = x(i, 0) + 0.5 * x(i, 1) + 0.3 * rng.normal() > 0;
  }
  const auto w = ones(n);
  const auto path = lasso_path(x, y, w, 3);
  CHECK(path.reached_target);
  CHECK(path.selected.size() >= 3);
  CHECK(std::find(path.selected.begin(), path.selected.end(), 0u) != path.selected.end());

  // Coefficients at the chosen lambda satisfy the L1 optimality conditions.
  const Eigen::VectorXd coef = lasso_logistic(x, y, w, path.lambda);
  Eigen::VectorXd resid(n);
  for (int i = 0; i < n; ++i) {
    const double eta = x.row(i).dot(coef.head(p)) + coef(p);
    resid(i) = (y[i] - 1.0 / (1.0 + std::exp(-eta))) / n;
  }
  const Eigen::VectorXd grad = x.transpose() * resid;
  for (int c = 0; c < p; ++c) {
    if (coef(c) != 0.0) {
      CHECK(grad(c) == doctest::Approx(path.lambda * (coef(c) > 0 ? 1 : -1)).epsilon(1e-3));
    } else {
      CHECK(std::abs(grad(c)) <= path.lambda * (1 + 1e-3));
    }
  }
  CHECK(std::abs(resid.sum()) < 1e-6);
}

TEST_CASE("stability selection finds the strong feature and is seeded") {
  Rng rng(19);
  const int n = 50, p = 15;
  Eigen::MatrixXd x(n, p);
  std::vector<int> y(n);
  for (int i = 0; i < n; ++i) {
    y[i] = i % 2;
    for (int c = 0; c < p; ++c) x(i, c) = rng.normal();
    x(i, 4) += 3.0 * y[i];
  }
  const auto a = Selector::fit({"stability", 0}, x, y, ones(n), 77);
  const auto b = Selector::fit({"stability", 0}, x, y, ones(n), 77);
  CHECK(a.indices() == b.indices());
  CHECK(std::find(a.indices().begin(), a.indices().end(), 4u) != a.indices().end());
}

TEST_CASE("every learner separates two points") {
  const Eigen::MatrixXd x = matrix({{-1.0, 0.5}, {1.0, -0.5}});
  const std::vector<int> y{0, 1};
  for (const auto& cfg : one_of_each()) {
    const auto m = fit_learner(cfg, x, y, ones(2), 3);
    CHECK_MESSAGE(f1(m->predict(x), y) == 1.0, cfg.kind);
  }
  CHECK_THROWS_AS(fit_learner(one_of_each()[0], x, std::vector<int>{1, 1}, ones(2), 0),
                  PreconditionError);
}

TEST_CASE("xor: linear models fail, trees succeed") {
  const Eigen::MatrixXd x = matrix({{0, 0}, {0, 1}, {1, 0}, {1, 1}});
  const std::vector<int> y{0, 1, 1, 0};
  // Every labelling of the four corners except the two XOR patterns is
  // linearly separable; the best such F1 is 0.8 (three positives), so no
  // linear model reaches 1.
  double best_linear = 0;
  for (int mask = 0; mask < 16; ++mask) {
    if (mask == 0b0110 || mask == 0b1001) continue;
    std::vector<int> pred{mask & 1, (mask >> 1) & 1, (mask >> 2) & 1, (mask >> 3) & 1};
    best_linear = std::max(best_linear, f1(pred, y));
  }
  CHECK(best_linear == doctest::Approx(0.8));
  // The symmetric L2 optimum is the zero model, which predicts no positives.
  for (double c : {0.01, 1.0, 100.0}) {
    LearnerConfig cfg;
    cfg.kind = "logreg";
    cfg.c = c;
    CHECK(f1(fit_learner(cfg, x, y, ones(4), 0)->predict(x), y) <= 2.0 / 3.0);
  }
  for (const auto& cfg : one_of_each()) {
    if (cfg.kind == "random_forest" || cfg.kind == "grad_boost") {
      CHECK_MESSAGE(f1(fit_learner(cfg, x, y, ones(4), 11)->predict(x), y) == 1.0, cfg.kind);
    }
  }
}

TEST_CASE("weighted logistic loss equals the replicated-sample loss") {
  // 30 majority (label 0) and 13 minority rows; weight 13/30 on the majority.
  Rng rng(2);
  Eigen::MatrixXd x(43, 3);
  std::vector<int> y(43);
  for (int i = 0; i < 43; ++i) {
    y[i] = i >= 30;
    for (int c = 0; c < 3; ++c) x(i, c) = rng.normal() + 0.7 * y[i];
  }
  const auto cw = ClassWeights::from_labels(y);
  CHECK(cw.negative == doctest::Approx(13.0 / 30.0));
  const auto w = cw.per_sample(y);

  // Majority rows repeated 13 times, minority rows 30 times: every class
  // then carries 390 units, and the loss is exactly 30 x the weighted loss.
  Eigen::MatrixXd xr(30 * 13 + 13 * 30, 3);
  std::vector<int> yr;
  Eigen::Index r = 0;
  for (int i = 0; i < 43; ++i) {
    for (int k = 0; k < (y[i] ? 30 : 13); ++k) {
      xr.row(r++) = x.row(i);
      yr.push_back(y[i]);
    }
  }
  const double c = 2.0;
  for (int trial = 0; trial < 5; ++trial) {
    Eigen::VectorXd coef(4);
    for (int j = 0; j < 4; ++j) coef(j) = rng.normal();
    const double weighted = logistic_objective(coef, x, y, w, c);
    const double replicated = logistic_objective(coef, xr, yr, ones(yr.size()), c / 30.0);
    CHECK(std::abs(30.0 * weighted - replicated) <= 1e-9 * replicated);
  }
  const Eigen::VectorXd a = fit_logistic(x, y, w, c);
  const Eigen::VectorXd b = fit_logistic(xr, yr, ones(yr.size()), c / 30.0);
  CHECK((a - b).cwiseAbs().maxCoeff() < 1e-7);
}

TEST_CASE("svm dual solution has a small duality gap") {
  Rng rng(14);
  const int n = 40;
  Eigen::MatrixXd x(n, 3);
  std::vector<int> y(n);
  std::vector<double> w(n);
  for (int i = 0; i < n; ++i) {
    y[i] = i % 3 == 0;
    for (int c = 0; c < 3; ++c) x(i, c) = rng.normal() + 1.2 * y[i];
    w[i] = y[i] ? 1.0 : 0.5;
  }
  LearnerConfig cfg;
  cfg.kind = "svm_linear";
  cfg.c = 1.0;
  const auto m = fit_learner(cfg, x, y, w, 0);
  std::ostringstream ss;
  Writer out(ss);
  m->save(out);
  std::istringstream in(ss.str());
  Reader r(in);
  r.expect("learner");
  r.expect("svm_linear");
  r.real();
  const double rho = r.real();
  r.expect("sv");
  const Eigen::MatrixXd sv = r.matrix();
  r.expect("coef");
  const Eigen::VectorXd coef = r.vector();
  const Eigen::VectorXd wv = sv.transpose() * coef;
  double primal = 0.5 * wv.squaredNorm(), dual = -0.5 * wv.squaredNorm();
  for (int i = 0; i < n; ++i) {
    const double yi = y[i] ? 1.0 : -1.0;
    primal += cfg.c * w[i] * std::max(0.0, 1.0 - yi * (x.row(i).dot(wv) - rho));
  }
  dual += coef.cwiseAbs().sum();
  CHECK(primal >= dual - 1e-9);
  CHECK((primal - dual) / primal < 0.02);
  for (Eigen::Index s = 0; s < coef.size(); ++s) CHECK(std::abs(coef(s)) <= cfg.c + 1e-12);
}

TEST_CASE("learners are deterministic and survive serialization") {
  Rng rng(6);
  Eigen::MatrixXd x(30, 4);
  std::vector<int> y(30);
  for (int i = 0; i < 30; ++i) {
    y[i] = i % 2;
    for (int c = 0; c < 4; ++c) x(i, c) = rng.normal() + y[i] * (c == 0);
  }
  for (const auto& cfg : one_of_each()) {
    const auto a = fit_learner(cfg, x, y, ones(30), 42);
    const auto b = fit_learner(cfg, x, y, ones(30), 42);
    std::ostringstream sa, sb;
    Writer wa(sa), wb(sb);
    a->save(wa);
    b->save(wb);
    CHECK(sa.str() == sb.str());
    std::istringstream in(sa.str());
    Reader r(in);
    const auto loaded = load_learner(r);
    std::ostringstream sc;
    Writer wc(sc);
    loaded->save(wc);
    CHECK(sc.str() == sa.str());
    CHECK(loaded->decision(x) == a->decision(x));
  }
}

TEST_CASE("combination ordering") {
  ComboResult a, b;
  a.validation.mean = 0.73;
  b.validation.mean = 0.66;
  a.mean_features = 25;
  b.mean_features = 5;
  CHECK(better_combo(a, b));
  CHECK_FALSE(better_combo(b, a));
  b.validation.mean = 0.73;
  CHECK(better_combo(b, a));  // fewer features
  a.mean_features = 5;
  a.selector.method = "lasso";
  b.selector.method = "mrmr";
  CHECK(better_combo(a, b));  // name order
}

TEST_CASE("grid search on a single combination") {
  const TaskData d = separable_task(30, 1);
  const auto plan = make_folds(d.y, d.groups, 3, 5);
  LearnerConfig l;
  l.kind = "logreg";
  l.c = 1;
  const auto r = grid_search(d, plan, {{"none", 0}}, {l}, 9);
  REQUIRE(r.table.size() == 1);
  CHECK(r.best.learner == l);
  CHECK(r.best.validation_f1 == r.table[0].validation_f1);
  CHECK(r.best.folds.size() == 3);
  CHECK_THROWS_AS(grid_search(d, plan, {}, {l}, 9), PreconditionError);
}

TEST_CASE("grid search on separable data reaches validation F1 of 1") {
  const TaskData d = separable_task(36, 2);
  const auto plan = make_folds(d.y, d.groups, 3, 1);
  std::vector<SelectorConfig> sel{{"none", 0}, {"topk_mi", 2}, {"mrmr", 2}, {"pca", 2}, {"lasso", 1}};
  const auto r = grid_search(d, plan, sel, one_of_each(), 4);
  CHECK(r.best.validation.mean == 1.0);
  CHECK(r.table.size() == sel.size() * 5);

  // Byte-identical artifact on a rerun and after a load/save round trip.
  const auto again = grid_search(d, plan, sel, one_of_each(), 4);
  const std::string text = serialize(r.best);
  CHECK(serialize(again.best) == text);
  const TrainedPipeline loaded = deserialize(text);
  CHECK(serialize(loaded) == text);

  // Identical fold models give a zero-width interval.
  TrainedPipeline same = loaded;
  same.folds = {loaded.folds[0], loaded.folds[0], loaded.folds[0]};
  const auto report = evaluate_test(same, d.x, d.feature_names, d.y);
  CHECK(report.f1.low == report.f1.high);
  CHECK(report.f1.mean == 1.0);
}

TEST_CASE("evaluate_test arithmetic and schema checks") {
  const TaskData d = separable_task(30, 3);
  const auto plan = make_folds(d.y, d.groups, 3, 2);
  LearnerConfig l;
  l.kind = "logreg";
  l.c = 10;
  auto r = grid_search(d, plan, {{"topk_mi", 1}}, {l}, 1);
  const auto perfect = evaluate_test(r.best, d.x, d.feature_names, d.y);
  CHECK(perfect.f1.mean == 1.0);
  CHECK(perfect.majority == d.y);

  // Reorder columns: evaluation maps by name.
  Eigen::MatrixXd swapped = d.x;
  swapped.col(0).swap(swapped.col(1));
  auto names = d.feature_names;
  std::swap(names[0], names[1]);
  CHECK(evaluate_test(r.best, swapped, names, d.y).f1.mean == 1.0);

  // One model predicting everything positive; others perfect.
  class AllPositive : public Learner {
   public:
    Eigen::VectorXd decision(const Eigen::MatrixXd& x) const override {
      return Eigen::VectorXd::Ones(x.rows());
    }
    void save(Writer& out) const override { out.tag("learner").put("none"); }
  };
  r.best.folds[1].learner = std::make_shared<AllPositive>();
  const auto mixed = evaluate_test(r.best, d.x, d.feature_names, d.y);
  const double pos = static_cast<double>(std::count(d.y.begin(), d.y.end(), 1));
  const double all_pos_f1 = 2 * pos / (2 * pos + (d.y.size() - pos));
  CHECK(mixed.per_model_f1[1] == doctest::Approx(all_pos_f1));
  CHECK(mixed.f1.mean == doctest::Approx((2.0 + all_pos_f1) / 3.0));

  auto bad = d.feature_names;
  bad[2] = "mystery";
  CHECK_THROWS_WITH_AS(evaluate_test(r.best, d.x, bad, d.y),
                       doctest::Contains("missing columns: f2; unexpected columns: mystery"),
                       InputError);
}

TEST_CASE("single feature study") {
  TaskData d = separable_task(30, 4);
  const auto plan = make_folds(d.y, d.groups, 3, 2);
  const auto study = single_feature_study(d.x, d.feature_names, d.y, plan);
  REQUIRE(study.size() == 6);
  const auto& best = best_single_feature(study);
  CHECK(best.feature == "f0");
  CHECK(best.validation.mean == 1.0);
  CHECK(best.evaluate(column(d.x, 0), d.y).f1.mean == 1.0);
}

TEST_CASE("feature table round trip") {
  FeatureTable t;
  t.columns = {"a", "b"};
  t.keys = {{"P1", "I1", 1, "LMS", "manual"}, {"P2", "I1", 3, "DLM", "predicted"}};
  t.values = matrix({{0.1, 1e-300}, {-2.5, 123456.789}});
  const std::string text = format_feature_table(t);
  const FeatureTable back = parse_feature_table(text);
  CHECK(back.columns == t.columns);
  CHECK(back.values == t.values);
  CHECK(back.keys[1].instance_label == 3);
  CHECK(format_feature_table(back) == text);
  CHECK_THROWS_AS(parse_feature_table("patient_id,image_id\n"), InputError);
}
