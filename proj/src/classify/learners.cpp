#include "utrad/classify/learners.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "utrad/common/csv.hpp"
#include "utrad/common/error.hpp"
#include "utrad/common/rng.hpp"

namespace utrad::ml {

std::string LearnerConfig::params() const {
  const auto num = [](double v) { return csv::format_double(v); };
  const auto depth_str = depth > 0 ? std::to_string(depth) : std::string("none");
  if (kind == "logreg") return "C=" + num(c);
  if (kind == "svm_linear") return "C=" + num(c) + ";gamma=n/a";
  if (kind == "svm_rbf") return "C=" + num(c) + ";gamma=" + num(gamma);
  if (kind == "random_forest") return "trees=" + std::to_string(trees) + ";depth=" + depth_str;
  if (kind == "grad_boost") {
    return "rounds=" + std::to_string(rounds) + ";depth=" + depth_str + ";lr=" + num(learning_rate);
  }
  return "";
}

std::vector<int> Learner::predict(const Eigen::MatrixXd& x) const {
  const Eigen::VectorXd d = decision(x);
  std::vector<int> out(static_cast<std::size_t>(d.size()));
  for (Eigen::Index i = 0; i < d.size(); ++i) out[static_cast<std::size_t>(i)] = d(i) > 0.0 ? 1 : 0;
  return out;
}

namespace {

void check_training(const Eigen::MatrixXd& x, std::span<const int> y, std::span<const double> w) {
  const auto n = static_cast<std::size_t>(x.rows());
  if (y.size() != n || w.size() != n) throw PreconditionError("learner: sizes differ");
  bool has[2] = {false, false};
  for (std::size_t i = 0; i < n; ++i) {
    if (!(w[i] > 0.0)) throw PreconditionError("learner: sample weights must be positive");
    has[y[i] ? 1 : 0] = true;
  }
  if (!has[0] || !has[1]) throw PreconditionError("learner: training set holds a single class");
}

// log(1 + exp(t)) without overflow
double softplus(double t) { return t > 0.0 ? t + std::log1p(std::exp(-t)) : std::log1p(std::exp(t)); }
double sigmoid(double t) {
  if (t >= 0.0) return 1.0 / (1.0 + std::exp(-t));
  const double e = std::exp(t);
  return e / (1.0 + e);
}

Eigen::MatrixXd with_intercept(const Eigen::MatrixXd& x) {
  Eigen::MatrixXd a(x.rows(), x.cols() + 1);
  a << x, Eigen::VectorXd::Ones(x.rows());
  return a;
}

// ---------------------------------------------------------------- logreg

class LogReg : public Learner {
 public:
  explicit LogReg(Eigen::VectorXd coef) : coef_(std::move(coef)) {}
  Eigen::VectorXd decision(const Eigen::MatrixXd& x) const override {
    if (x.cols() + 1 != coef_.size()) throw InputError("logreg: feature count mismatch");
    return (x * coef_.head(x.cols())).array() + coef_(x.cols());
  }
  void save(Writer& out) const override { out.tag("learner").put("logreg").put(coef_); }

 private:
  Eigen::VectorXd coef_;
};

// ---------------------------------------------------------------- svm

class Svm : public Learner {
 public:
  Svm(bool rbf, double gamma, Eigen::MatrixXd sv, Eigen::VectorXd coef, double rho)
      : rbf_(rbf), gamma_(gamma), sv_(std::move(sv)), coef_(std::move(coef)), rho_(rho) {}

  Eigen::VectorXd decision(const Eigen::MatrixXd& x) const override {
    if (sv_.rows() > 0 && x.cols() != sv_.cols()) throw InputError("svm: feature count mismatch");
    Eigen::VectorXd out = Eigen::VectorXd::Constant(x.rows(), -rho_);
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      for (Eigen::Index s = 0; s < sv_.rows(); ++s) {
        out(i) += coef_(s) * kernel(x.row(i), sv_.row(s));
      }
    }
    return out;
  }

  void save(Writer& out) const override {
    out.tag("learner").put(rbf_ ? "svm_rbf" : "svm_linear").put(gamma_).put(rho_);
    out.tag("sv").put(sv_);
    out.tag("coef").put(coef_);
  }

  double kernel(const Eigen::RowVectorXd& a, const Eigen::RowVectorXd& b) const {
    return rbf_ ? std::exp(-gamma_ * (a - b).squaredNorm()) : a.dot(b);
  }

 private:
  bool rbf_;
  double gamma_;
  Eigen::MatrixXd sv_;
  Eigen::VectorXd coef_;
  double rho_;
};

// Dual SMO with second-order working-set selection; box C_i = C * w_i.
std::unique_ptr<Learner> fit_svm(bool rbf, double c, double gamma, const Eigen::MatrixXd& x,
                                 std::span<const int> labels, std::span<const double> w) {
  const Eigen::Index n = x.rows();
  const Svm shape(rbf, gamma, {}, {}, 0.0);
  Eigen::MatrixXd k(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j <= i; ++j) k(i, j) = k(j, i) = shape.kernel(x.row(i), x.row(j));
  }
  std::vector<double> y(n), cap(n), alpha(n, 0.0), grad(n, -1.0);
  for (Eigen::Index i = 0; i < n; ++i) {
    y[i] = labels[i] ? 1.0 : -1.0;
    cap[i] = c * w[i];
  }
  const auto q = [&](Eigen::Index i, Eigen::Index j) { return y[i] * y[j] * k(i, j); };
  const double eps = 1e-3, tau = 1e-12;
  const auto upper = [&](Eigen::Index t) { return alpha[t] >= cap[t]; };
  const auto lower = [&](Eigen::Index t) { return alpha[t] <= 0.0; };

  for (long iter = 0; iter < 10'000'000; ++iter) {
    double gmax = -std::numeric_limits<double>::infinity();
    Eigen::Index i = -1;
    for (Eigen::Index t = 0; t < n; ++t) {
      if (y[t] > 0 ? !upper(t) : !lower(t)) {
        const double v = -y[t] * grad[t];
        if (v >= gmax) {
          gmax = v;
          i = t;
        }
      }
    }
    if (i < 0) break;
    double gmax2 = -std::numeric_limits<double>::infinity();
    double best_obj = std::numeric_limits<double>::infinity();
    Eigen::Index j = -1;
    for (Eigen::Index t = 0; t < n; ++t) {
      if (y[t] > 0 ? lower(t) : upper(t)) continue;
      const double v = y[t] * grad[t];
      gmax2 = std::max(gmax2, v);
      const double diff = gmax + v;
      if (diff > 0.0) {
        double quad = k(i, i) + k(t, t) - 2.0 * k(i, t);
        if (quad <= 0.0) quad = tau;
        const double obj = -diff * diff / quad;
        if (obj <= best_obj) {
          best_obj = obj;
          j = t;
        }
      }
    }
    if (j < 0 || gmax + gmax2 < eps) break;

    const double ai = alpha[i], aj = alpha[j];
    if (y[i] != y[j]) {
      double quad = k(i, i) + k(j, j) - 2.0 * k(i, j);
      if (quad <= 0.0) quad = tau;
      const double delta = (-grad[i] - grad[j]) / quad;
      const double diff = alpha[i] - alpha[j];
      alpha[i] += delta;
      alpha[j] += delta;
      if (diff > 0.0) {
        if (alpha[j] < 0.0) { alpha[j] = 0.0; alpha[i] = diff; }
      } else if (alpha[i] < 0.0) {
        alpha[i] = 0.0;
        alpha[j] = -diff;
      }
      if (diff > cap[i] - cap[j]) {
        if (alpha[i] > cap[i]) { alpha[i] = cap[i]; alpha[j] = cap[i] - diff; }
      } else if (alpha[j] > cap[j]) {
        alpha[j] = cap[j];
        alpha[i] = cap[j] + diff;
      }
    } else {
      double quad = k(i, i) + k(j, j) - 2.0 * k(i, j);
      if (quad <= 0.0) quad = tau;
      const double delta = (grad[i] - grad[j]) / quad;
      const double sum = alpha[i] + alpha[j];
      alpha[i] -= delta;
      alpha[j] += delta;
      if (sum > cap[i]) {
        if (alpha[i] > cap[i]) { alpha[i] = cap[i]; alpha[j] = sum - cap[i]; }
      } else if (alpha[j] < 0.0) {
        alpha[j] = 0.0;
        alpha[i] = sum;
      }
      if (sum > cap[j]) {
        if (alpha[j] > cap[j]) { alpha[j] = cap[j]; alpha[i] = sum - cap[j]; }
      } else if (alpha[i] < 0.0) {
        alpha[i] = 0.0;
        alpha[j] = sum;
      }
    }
    const double di = alpha[i] - ai, dj = alpha[j] - aj;
    for (Eigen::Index t = 0; t < n; ++t) grad[t] += q(t, i) * di + q(t, j) * dj;
  }

  // Bias from free vectors, else the midpoint of the feasible interval.
  double ub = std::numeric_limits<double>::infinity(), lb = -ub, free_sum = 0.0;
  int free_count = 0;
  for (Eigen::Index t = 0; t < n; ++t) {
    const double yg = y[t] * grad[t];
    if (upper(t)) {
      if (y[t] < 0) ub = std::min(ub, yg); else lb = std::max(lb, yg);
    } else if (lower(t)) {
      if (y[t] > 0) ub = std::min(ub, yg); else lb = std::max(lb, yg);
    } else {
      ++free_count;
      free_sum += yg;
    }
  }
  const double rho = free_count > 0 ? free_sum / free_count : 0.5 * (ub + lb);

  std::vector<Eigen::Index> support;
  for (Eigen::Index t = 0; t < n; ++t) {
    if (alpha[t] > 0.0) support.push_back(t);
  }
  Eigen::MatrixXd sv(static_cast<Eigen::Index>(support.size()), x.cols());
  Eigen::VectorXd coef(static_cast<Eigen::Index>(support.size()));
  for (std::size_t s = 0; s < support.size(); ++s) {
    sv.row(static_cast<Eigen::Index>(s)) = x.row(support[s]);
    coef(static_cast<Eigen::Index>(s)) = alpha[support[s]] * y[support[s]];
  }
  return std::make_unique<Svm>(rbf, gamma, std::move(sv), std::move(coef), rho);
}

// ---------------------------------------------------------------- trees

struct Node {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  double value = 0.0;
};

struct Tree {
  std::vector<Node> nodes;

  double eval(const Eigen::MatrixXd& x, Eigen::Index row) const {
    int at = 0;
    while (nodes[at].feature >= 0) {
      const Node& nd = nodes[at];
      if (nd.feature >= x.cols()) throw InputError("tree: feature count mismatch");
      at = x(row, nd.feature) <= nd.threshold ? nd.left : nd.right;
    }
    return nodes[at].value;
  }

  void save(Writer& out) const {
    out.tag("tree").put(static_cast<std::uint64_t>(nodes.size()));
    for (const auto& nd : nodes) {
      out.tag("n").put(nd.feature).put(nd.threshold).put(nd.left).put(nd.right).put(nd.value);
    }
  }

  static Tree load(Reader& in) {
    in.expect("tree");
    Tree t;
    t.nodes.resize(in.u64());
    if (t.nodes.empty()) throw InputError("tree without nodes");
    for (auto& nd : t.nodes) {
      in.expect("n");
      nd.feature = in.integer();
      nd.threshold = in.real();
      nd.left = in.integer();
      nd.right = in.integer();
      nd.value = in.real();
    }
    const int count = static_cast<int>(t.nodes.size());
    for (int i = 0; i < count; ++i) {
      const Node& nd = t.nodes[i];
      if (nd.feature >= 0 && (nd.left <= i || nd.right <= i || nd.left >= count || nd.right >= count)) {
        throw InputError("tree: malformed node links");
      }
    }
    return t;
  }
};

// Candidate split: sample order along one feature; threshold between
// consecutive distinct values.
template <typename Score>
void scan_feature(const Eigen::MatrixXd& x, int feature, std::vector<int>& samples, Score&& score) {
  std::stable_sort(samples.begin(), samples.end(),
                   [&](int a, int b) { return x(a, feature) < x(b, feature); });
  for (std::size_t i = 0; i + 1 < samples.size(); ++i) {
    const double v = x(samples[i], feature), next = x(samples[i + 1], feature);
    score(i, v, next);
  }
}

class TreeBuilder {
 public:
  // Classification (Gini) when grad is null; otherwise second-order
  // regression on (grad, hess) with L2 leaf penalty.
  TreeBuilder(const Eigen::MatrixXd& x, std::span<const int> y, std::span<const double> w,
              int max_depth, int mtry, Rng* rng)
      : x_(x), y_(y), w_(w), max_depth_(max_depth), mtry_(mtry), rng_(rng) {}

  TreeBuilder(const Eigen::MatrixXd& x, const std::vector<double>& grad,
              const std::vector<double>& hess, int max_depth, double scale)
      : x_(x), grad_(&grad), hess_(&hess), max_depth_(max_depth), scale_(scale) {}

  Tree build(std::vector<int> samples) {
    Tree t;
    grow(t, std::move(samples), 0);
    return t;
  }

 private:
  static constexpr double kLambda = 1.0;
  static constexpr double kMinHess = 1e-3;

  struct Stats {
    double a = 0.0, b = 0.0;  // gini: (total, positive) weight; boost: (G, H)
  };

  Stats add(Stats s, int i) const {
    if (grad_) {
      s.a += (*grad_)[i];
      s.b += (*hess_)[i];
    } else {
      s.a += w_[i];
      if (y_[i]) s.b += w_[i];
    }
    return s;
  }
  static Stats minus(Stats s, Stats t) { return {s.a - t.a, s.b - t.b}; }

  double impurity(Stats s) const {
    if (grad_) return -s.a * s.a / (s.b + kLambda);  // negative structure score
    if (s.a <= 0.0) return 0.0;
    const double p = s.b / s.a;
    return s.a * (1.0 - p * p - (1.0 - p) * (1.0 - p));  // weight * gini
  }

  bool admissible(Stats left, Stats right) const {
    return grad_ ? (left.b >= kMinHess && right.b >= kMinHess) : (left.a > 0.0 && right.a > 0.0);
  }

  double leaf_value(Stats s) const {
    if (grad_) return -scale_ * s.a / (s.b + kLambda);
    return s.a > 0.0 ? s.b / s.a : 0.0;
  }

  int grow(Tree& t, std::vector<int> samples, int depth) {
    Stats all;
    for (int i : samples) all = add(all, i);
    const int id = static_cast<int>(t.nodes.size());
    t.nodes.push_back(Node{});
    t.nodes[id].value = leaf_value(all);

    const bool pure = !grad_ && (all.b <= 0.0 || all.b >= all.a);
    if (pure || samples.size() < 2 || (max_depth_ > 0 && depth >= max_depth_)) return id;

    const int p = static_cast<int>(x_.cols());
    std::vector<int> features(p);
    std::iota(features.begin(), features.end(), 0);
    if (rng_) rng_->shuffle(features);
    const int budget = rng_ ? mtry_ : p;

    const double parent = impurity(all);
    // Zero-gain splits are allowed (XOR-like nodes need one to make progress).
    double best_gain = -1e-12;
    int best_feature = -1;
    double best_threshold = 0.0;
    int visited = 0;
    for (int f : features) {
      if (visited >= budget) break;
      bool varies = false;
      for (int i : samples) {
        if (x_(i, f) != x_(samples[0], f)) {
          varies = true;
          break;
        }
      }
      if (!varies) continue;
      ++visited;
      Stats left;
      scan_feature(x_, f, samples, [&](std::size_t i, double v, double next) {
        left = add(left, samples[i]);
        if (v == next) return;
        const Stats right = minus(all, left);
        if (!admissible(left, right)) return;
        const double gain = parent - impurity(left) - impurity(right);
        if (gain > best_gain) {
          best_gain = gain;
          best_feature = f;
          best_threshold = 0.5 * (v + next);
        }
      });
    }
    if (best_feature < 0) return id;

    std::vector<int> l, r;
    for (int i : samples) (x_(i, best_feature) <= best_threshold ? l : r).push_back(i);
    samples.clear();
    samples.shrink_to_fit();
    t.nodes[id].feature = best_feature;
    t.nodes[id].threshold = best_threshold;
    const int li = grow(t, std::move(l), depth + 1);
    const int ri = grow(t, std::move(r), depth + 1);
    t.nodes[id].left = li;
    t.nodes[id].right = ri;
    return id;
  }

  const Eigen::MatrixXd& x_;
  std::span<const int> y_;
  std::span<const double> w_;
  const std::vector<double>* grad_ = nullptr;
  const std::vector<double>* hess_ = nullptr;
  int max_depth_ = 0;
  int mtry_ = 0;
  Rng* rng_ = nullptr;
  double scale_ = 1.0;
};

class Forest : public Learner {
 public:
  explicit Forest(std::vector<Tree> trees) : trees_(std::move(trees)) {}
  Eigen::VectorXd decision(const Eigen::MatrixXd& x) const override {
    Eigen::VectorXd out = Eigen::VectorXd::Zero(x.rows());
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      for (const auto& t : trees_) out(i) += t.eval(x, i);
      out(i) = out(i) / static_cast<double>(trees_.size()) - 0.5;
    }
    return out;
  }
  void save(Writer& out) const override {
    out.tag("learner").put("random_forest").put(static_cast<std::uint64_t>(trees_.size()));
    for (const auto& t : trees_) t.save(out);
  }

 private:
  std::vector<Tree> trees_;
};

class Boost : public Learner {
 public:
  Boost(double base, std::vector<Tree> trees) : base_(base), trees_(std::move(trees)) {}
  Eigen::VectorXd decision(const Eigen::MatrixXd& x) const override {
    Eigen::VectorXd out = Eigen::VectorXd::Constant(x.rows(), base_);
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      for (const auto& t : trees_) out(i) += t.eval(x, i);
    }
    return out;
  }
  void save(Writer& out) const override {
    out.tag("learner").put("grad_boost").put(base_).put(static_cast<std::uint64_t>(trees_.size()));
    for (const auto& t : trees_) t.save(out);
  }

 private:
  double base_;
  std::vector<Tree> trees_;
};

std::unique_ptr<Learner> fit_forest(const LearnerConfig& cfg, const Eigen::MatrixXd& x,
                                    std::span<const int> y, std::span<const double> w,
                                    std::uint64_t seed) {
  if (cfg.trees < 1) throw PreconditionError("random_forest needs at least one tree");
  const int n = static_cast<int>(x.rows());
  const int mtry = std::max(1, static_cast<int>(std::floor(std::sqrt(static_cast<double>(x.cols())))));
  std::vector<Tree> trees;
  trees.reserve(static_cast<std::size_t>(cfg.trees));
  for (int t = 0; t < cfg.trees; ++t) {
    Rng rng(Rng::mix(seed, static_cast<std::uint64_t>(t)));
    std::vector<int> boot(n);
    for (auto& b : boot) b = static_cast<int>(rng.uniform_index(static_cast<std::size_t>(n)));
    std::sort(boot.begin(), boot.end());
    TreeBuilder builder(x, y, w, cfg.depth, mtry, &rng);
    trees.push_back(builder.build(std::move(boot)));
  }
  return std::make_unique<Forest>(std::move(trees));
}

std::unique_ptr<Learner> fit_boost(const LearnerConfig& cfg, const Eigen::MatrixXd& x,
                                   std::span<const int> y, std::span<const double> w) {
  if (cfg.rounds < 1 || !(cfg.learning_rate > 0.0)) {
    throw PreconditionError("grad_boost needs rounds >= 1 and a positive learning rate");
  }
  const int n = static_cast<int>(x.rows());
  double wp = 0.0, wn = 0.0;
  for (int i = 0; i < n; ++i) (y[i] ? wp : wn) += w[i];
  const double base = std::log(wp / wn);
  std::vector<double> f(n, base), grad(n), hess(n);
  std::vector<int> all(n);
  std::iota(all.begin(), all.end(), 0);
  std::vector<Tree> trees;
  for (int r = 0; r < cfg.rounds; ++r) {
    for (int i = 0; i < n; ++i) {
      const double p = sigmoid(f[i]);
      grad[i] = w[i] * (p - (y[i] ? 1.0 : 0.0));
      hess[i] = w[i] * std::max(p * (1.0 - p), 1e-16);
    }
    TreeBuilder builder(x, grad, hess, cfg.depth, cfg.learning_rate);
    Tree t = builder.build(all);
    for (int i = 0; i < n; ++i) f[i] += t.eval(x, i);
    trees.push_back(std::move(t));
  }
  return std::make_unique<Boost>(base, std::move(trees));
}

}  // namespace

double logistic_objective(const Eigen::VectorXd& coef, const Eigen::MatrixXd& x,
                          std::span<const int> y, std::span<const double> w, double c) {
  const Eigen::VectorXd eta = with_intercept(x) * coef;
  double loss = 0.0;
  for (Eigen::Index i = 0; i < eta.size(); ++i) {
    const auto k = static_cast<std::size_t>(i);
    loss += w[k] * (softplus(eta(i)) - (y[k] ? eta(i) : 0.0));
  }
  return loss + coef.head(x.cols()).squaredNorm() / (2.0 * c);
}

Eigen::VectorXd fit_logistic(const Eigen::MatrixXd& x, std::span<const int> y,
                             std::span<const double> w, double c) {
  check_training(x, y, w);
  if (!(c > 0.0)) throw PreconditionError("logreg: C must be positive");
  const Eigen::MatrixXd a = with_intercept(x);
  const Eigen::Index p = a.cols();
  Eigen::VectorXd coef = Eigen::VectorXd::Zero(p);
  Eigen::VectorXd penalty = Eigen::VectorXd::Constant(p, 1.0 / c);
  penalty(p - 1) = 0.0;

  double obj = logistic_objective(coef, x, y, w, c);
  for (int iter = 0; iter < 200; ++iter) {
    const Eigen::VectorXd eta = a * coef;
    Eigen::VectorXd r(a.rows()), h(a.rows());
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
      const auto k = static_cast<std::size_t>(i);
      const double pr = sigmoid(eta(i));
      r(i) = w[k] * (pr - (y[k] ? 1.0 : 0.0));
      h(i) = w[k] * pr * (1.0 - pr);
    }
    const Eigen::VectorXd g = a.transpose() * r + penalty.cwiseProduct(coef);
    if (g.cwiseAbs().maxCoeff() < 1e-8) break;
    Eigen::MatrixXd hess = a.transpose() * h.asDiagonal() * a;
    hess.diagonal() += penalty;
    hess(p - 1, p - 1) += 1e-12;
    const Eigen::VectorXd step = hess.ldlt().solve(g);
    double t = 1.0;
    Eigen::VectorXd next = coef - step;
    double next_obj = logistic_objective(next, x, y, w, c);
    while (next_obj > obj - 1e-4 * t * g.dot(step) && t > 1e-10) {
      t *= 0.5;
      next = coef - t * step;
      next_obj = logistic_objective(next, x, y, w, c);
    }
    if (!(next_obj <= obj)) break;
    coef = next;
    obj = next_obj;
  }
  return coef;
}

std::unique_ptr<Learner> fit_learner(const LearnerConfig& config, const Eigen::MatrixXd& x,
                                     std::span<const int> y, std::span<const double> w,
                                     std::uint64_t seed) {
  check_training(x, y, w);
  if (config.kind == "logreg") return std::make_unique<LogReg>(fit_logistic(x, y, w, config.c));
  if (config.kind == "svm_linear" || config.kind == "svm_rbf") {
    if (!(config.c > 0.0)) throw PreconditionError("svm: C must be positive");
    const bool rbf = config.kind == "svm_rbf";
    if (rbf && !(config.gamma > 0.0)) throw PreconditionError("svm_rbf: gamma must be positive");
    return fit_svm(rbf, config.c, rbf ? config.gamma : 0.0, x, y, w);
  }
  if (config.kind == "random_forest") return fit_forest(config, x, y, w, seed);
  if (config.kind == "grad_boost") return fit_boost(config, x, y, w);
  throw InputError("unknown learner: " + config.kind);
}

std::unique_ptr<Learner> load_learner(Reader& in) {
  in.expect("learner");
  const std::string kind = in.word();
  if (kind == "logreg") return std::make_unique<LogReg>(in.vector());
  if (kind == "svm_linear" || kind == "svm_rbf") {
    const double gamma = in.real();
    const double rho = in.real();
    in.expect("sv");
    Eigen::MatrixXd sv = in.matrix();
    in.expect("coef");
    Eigen::VectorXd coef = in.vector();
    if (coef.size() != sv.rows()) throw InputError("svm: coefficient count mismatch");
    return std::make_unique<Svm>(kind == "svm_rbf", gamma, std::move(sv), std::move(coef), rho);
  }
  if (kind == "random_forest" || kind == "grad_boost") {
    const double base = kind == "grad_boost" ? in.real() : 0.0;
    std::vector<Tree> trees(in.u64());
    for (auto& t : trees) t = Tree::load(in);
    if (kind == "random_forest") return std::make_unique<Forest>(std::move(trees));
    return std::make_unique<Boost>(base, std::move(trees));
  }
  throw InputError("unknown learner in artifact: " + kind);
}

}  // namespace utrad::ml
