#include "utrad/classify/selectors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "utrad/common/error.hpp"
#include "utrad/common/rng.hpp"
#include "utrad/stats.hpp"

namespace utrad::ml {

std::string SelectorConfig::params() const {
  if (method == "none") return "";
  if (method == "lasso") return "target=" + std::to_string(k);
  if (method == "stability") {
    return "runs=" + std::to_string(kStabilityRuns) + ";fraction=0.5;threshold=0.6;target=" +
           std::to_string(kStabilityTarget);
  }
  return "K=" + std::to_string(k);
}

namespace {

double soft_threshold(double g, double lambda) {
  if (g > lambda) return g - lambda;
  if (g < -lambda) return g + lambda;
  return 0.0;
}

struct LassoState {
  Eigen::VectorXd beta;
  double intercept = 0.0;
};

// One lambda: IRLS outer loop with coordinate descent on the weighted
// quadratic approximation. `omega` sums to 1.
void lasso_solve(const Eigen::MatrixXd& x, const Eigen::VectorXd& yv, const Eigen::VectorXd& omega,
                 double lambda, LassoState& s) {
  const Eigen::Index n = x.rows(), p = x.cols();
  for (int outer = 0; outer < 100; ++outer) {
    const Eigen::VectorXd eta = (x * s.beta).array() + s.intercept;
    Eigen::VectorXd v(n), r(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const double pr = std::clamp(1.0 / (1.0 + std::exp(-eta(i))), 1e-5, 1.0 - 1e-5);
      const double h = pr * (1.0 - pr);
      v(i) = omega(i) * h;
      r(i) = (yv(i) - pr) / h;  // z - eta
    }
    const double vsum = v.sum();
    if (!(vsum > 0.0)) break;
    Eigen::VectorXd xv(p);
    for (Eigen::Index j = 0; j < p; ++j) xv(j) = (v.array() * x.col(j).array().square()).sum();

    const LassoState before = s;
    // Coordinate step on j; returns the scaled change.
    auto step = [&](Eigen::Index j) {
      if (!(xv(j) > 0.0)) return 0.0;
      const double old = s.beta(j);
      const double g = (v.array() * x.col(j).array() * r.array()).sum() + xv(j) * old;
      const double nb = soft_threshold(g, lambda) / xv(j);
      if (nb == old) return 0.0;
      r -= (nb - old) * x.col(j);
      s.beta(j) = nb;
      return std::abs(nb - old) * std::sqrt(xv(j));
    };
    auto center = [&] {
      const double db = (v.array() * r.array()).sum() / vsum;
      r.array() -= db;
      s.intercept += db;
      return std::abs(db) * std::sqrt(vsum);
    };
    // Full sweeps alternate with sweeps over the nonzero coefficients until a
    // full sweep changes nothing.
    for (int sweep = 0; sweep < 1000; ++sweep) {
      double change = 0.0;
      for (Eigen::Index j = 0; j < p; ++j) change = std::max(change, step(j));
      change = std::max(change, center());
      if (change < 1e-8) break;
      std::vector<Eigen::Index> active;
      for (Eigen::Index j = 0; j < p; ++j) {
        if (s.beta(j) != 0.0) active.push_back(j);
      }
      for (int inner = 0; inner < 1000; ++inner) {
        double c = 0.0;
        for (auto j : active) c = std::max(c, step(j));
        c = std::max(c, center());
        if (c < 1e-8) break;
      }
    }
    const double moved = std::max((s.beta - before.beta).cwiseAbs().maxCoeff(),
                                  std::abs(s.intercept - before.intercept));
    if (moved < 1e-7) break;
  }
}

void lasso_prepare(const Eigen::MatrixXd& x, std::span<const int> y, std::span<const double> w,
                   Eigen::VectorXd& yv, Eigen::VectorXd& omega, double& ybar) {
  const auto n = static_cast<std::size_t>(x.rows());
  if (y.size() != n || w.size() != n) throw PreconditionError("lasso: sizes differ");
  yv.resize(x.rows());
  omega.resize(x.rows());
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) total += w[i];
  if (!(total > 0.0)) throw PreconditionError("lasso: weights sum to zero");
  ybar = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    yv(static_cast<Eigen::Index>(i)) = y[i] ? 1.0 : 0.0;
    omega(static_cast<Eigen::Index>(i)) = w[i] / total;
    ybar += omega(static_cast<Eigen::Index>(i)) * yv(static_cast<Eigen::Index>(i));
  }
  if (ybar <= 0.0 || ybar >= 1.0) throw PreconditionError("lasso needs both classes");
}

}  // namespace

Eigen::VectorXd lasso_logistic(const Eigen::MatrixXd& x, std::span<const int> y,
                               std::span<const double> w, double lambda) {
  Eigen::VectorXd yv, omega;
  double ybar = 0.0;
  lasso_prepare(x, y, w, yv, omega, ybar);
  LassoState s{Eigen::VectorXd::Zero(x.cols()), std::log(ybar / (1.0 - ybar))};
  lasso_solve(x, yv, omega, lambda, s);
  Eigen::VectorXd out(x.cols() + 1);
  out << s.beta, s.intercept;
  return out;
}

LassoPathResult lasso_path(const Eigen::MatrixXd& x, std::span<const int> y,
                           std::span<const double> w, int target) {
  if (target < 1 || target > x.cols()) {
    throw PreconditionError("lasso target " + std::to_string(target) + " outside [1, " +
                            std::to_string(x.cols()) + "]");
  }
  Eigen::VectorXd yv, omega;
  double ybar = 0.0;
  lasso_prepare(x, y, w, yv, omega, ybar);
  const Eigen::VectorXd resid = (omega.array() * (yv.array() - ybar)).matrix();
  const double lambda_max = (x.transpose() * resid).cwiseAbs().maxCoeff();

  LassoState s{Eigen::VectorXd::Zero(x.cols()), std::log(ybar / (1.0 - ybar))};
  LassoPathResult out;
  if (!(lambda_max > 0.0)) return out;
  for (int j = 0; j < 100; ++j) {
    const double lambda = lambda_max * std::pow(1e-3, j / 99.0);
    lasso_solve(x, yv, omega, lambda, s);
    out.selected.clear();
    for (Eigen::Index c = 0; c < x.cols(); ++c) {
      if (s.beta(c) != 0.0) out.selected.push_back(static_cast<std::size_t>(c));
    }
    out.lambda = lambda;
    if (out.selected.size() >= static_cast<std::size_t>(target)) {
      out.reached_target = true;
      break;
    }
  }
  return out;
}

std::vector<std::size_t> mrmr_rank(const Eigen::MatrixXd& x, std::span<const int> y, int k) {
  const auto p = static_cast<std::size_t>(x.cols());
  if (k < 1 || static_cast<std::size_t>(k) > p) {
    throw PreconditionError("K = " + std::to_string(k) + " exceeds the " + std::to_string(p) +
                            " available features");
  }
  std::vector<std::vector<int>> bins(p);
  std::vector<double> relevance(p);
  for (std::size_t c = 0; c < p; ++c) {
    const Eigen::VectorXd col = x.col(static_cast<Eigen::Index>(c));
    std::span<const double> values(col.data(), static_cast<std::size_t>(col.size()));
    bins[c] = stats::equal_frequency_bins(values);
    relevance[c] = stats::mutual_information(values, y);
  }
  std::vector<std::size_t> picked;
  std::vector<double> redundancy_sum(p, 0.0);
  std::vector<bool> used(p, false);
  while (picked.size() < static_cast<std::size_t>(k)) {
    std::size_t best = p;
    double best_score = 0.0;
    for (std::size_t c = 0; c < p; ++c) {
      if (used[c]) continue;
      const double score =
          relevance[c] - (picked.empty() ? 0.0 : redundancy_sum[c] / static_cast<double>(picked.size()));
      if (best == p || score > best_score) {
        best = c;
        best_score = score;
      }
    }
    used[best] = true;
    picked.push_back(best);
    for (std::size_t c = 0; c < p; ++c) {
      if (!used[c]) redundancy_sum[c] += stats::mutual_information_discrete(bins[c], bins[best]);
    }
  }
  return picked;
}

namespace {

std::vector<std::size_t> topk_mi(const Eigen::MatrixXd& x, std::span<const int> y, int k) {
  const auto p = static_cast<std::size_t>(x.cols());
  std::vector<double> mi(p);
  for (std::size_t c = 0; c < p; ++c) {
    const Eigen::VectorXd col = x.col(static_cast<Eigen::Index>(c));
    mi[c] = stats::mutual_information(
        std::span<const double>(col.data(), static_cast<std::size_t>(col.size())), y);
  }
  std::vector<std::size_t> order(p);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return mi[a] > mi[b]; });
  order.resize(static_cast<std::size_t>(k));
  return order;
}

Eigen::MatrixXd take_rows(const Eigen::MatrixXd& x, const std::vector<std::size_t>& rows) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), x.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = x.row(static_cast<Eigen::Index>(rows[i]));
  return out;
}

}  // namespace

Selector Selector::fit(const SelectorConfig& config, const Eigen::MatrixXd& x,
                       std::span<const int> y, std::span<const double> w, std::uint64_t seed) {
  Selector s;
  s.config_ = config;
  s.input_dim_ = static_cast<std::size_t>(x.cols());
  const auto p = s.input_dim_;
  const auto need_k = [&] {
    if (config.k < 1 || static_cast<std::size_t>(config.k) > p) {
      throw PreconditionError(config.method + ": K = " + std::to_string(config.k) +
                              " exceeds the " + std::to_string(p) + " available features");
    }
  };

  if (config.method == "none") {
    // identity
  } else if (config.method == "topk_mi") {
    need_k();
    s.indices_ = topk_mi(x, y, config.k);
  } else if (config.method == "mrmr") {
    need_k();
    s.indices_ = mrmr_rank(x, y, config.k);
  } else if (config.method == "lasso") {
    need_k();
    const auto path = lasso_path(x, y, w, config.k);
    s.indices_ = path.selected;
    s.flagged_ = !path.reached_target;
    if (s.indices_.empty()) {
      s.indices_ = topk_mi(x, y, 1);
      s.flagged_ = true;
    }
  } else if (config.method == "stability") {
    const int target = static_cast<int>(std::min<std::size_t>(kStabilityTarget, p));
    std::vector<std::size_t> by_class[2];
    for (std::size_t i = 0; i < y.size(); ++i) by_class[y[i] ? 1 : 0].push_back(i);
    std::vector<int> hits(p, 0);
    for (int run = 0; run < kStabilityRuns; ++run) {
      Rng rng(Rng::mix(seed, static_cast<std::uint64_t>(run)));
      std::vector<std::size_t> rows;
      for (auto& members : by_class) {
        std::vector<std::size_t> m = members;
        rng.shuffle(m);
        const auto take = std::max<std::size_t>(
            1, static_cast<std::size_t>(std::floor(kStabilityFraction * static_cast<double>(m.size()))));
        rows.insert(rows.end(), m.begin(), m.begin() + static_cast<std::ptrdiff_t>(take));
      }
      std::sort(rows.begin(), rows.end());
      std::vector<int> ys;
      std::vector<double> ws;
      for (auto r : rows) {
        ys.push_back(y[r]);
        ws.push_back(w[r]);
      }
      for (auto c : lasso_path(take_rows(x, rows), ys, ws, target).selected) ++hits[c];
    }
    for (std::size_t c = 0; c < p; ++c) {
      if (hits[c] >= kStabilityThreshold * kStabilityRuns) s.indices_.push_back(c);
    }
    if (s.indices_.empty()) {
      s.indices_.push_back(static_cast<std::size_t>(
          std::max_element(hits.begin(), hits.end()) - hits.begin()));
      s.flagged_ = true;
    }
  } else if (config.method == "pca") {
    need_k();
    s.center_ = x.colwise().mean().transpose();
    const Eigen::MatrixXd centered = x.rowwise() - s.center_.transpose();
    const double denom = std::max<double>(1.0, static_cast<double>(x.rows() - 1));
    const Eigen::MatrixXd cov = centered.transpose() * centered / denom;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
    s.components_.resize(x.cols(), config.k);
    s.variance_.resize(config.k);
    for (int j = 0; j < config.k; ++j) {
      const Eigen::Index src = x.cols() - 1 - j;  // eigenvalues ascend
      Eigen::VectorXd v = eig.eigenvectors().col(src);
      Eigen::Index arg = 0;
      v.cwiseAbs().maxCoeff(&arg);
      if (v(arg) < 0.0) v = -v;
      s.components_.col(j) = v;
      s.variance_(j) = std::max(0.0, eig.eigenvalues()(src));
    }
  } else {
    throw InputError("unknown feature selection method: " + config.method);
  }
  return s;
}

std::size_t Selector::output_dim() const {
  if (config_.method == "none") return input_dim_;
  if (config_.method == "pca") return static_cast<std::size_t>(components_.cols());
  return indices_.size();
}

Eigen::MatrixXd Selector::transform(const Eigen::MatrixXd& x) const {
  if (static_cast<std::size_t>(x.cols()) != input_dim_) {
    throw InputError("selector expects " + std::to_string(input_dim_) + " columns, got " +
                     std::to_string(x.cols()));
  }
  if (config_.method == "none") return x;
  if (config_.method == "pca") return (x.rowwise() - center_.transpose()) * components_;
  Eigen::MatrixXd out(x.rows(), static_cast<Eigen::Index>(indices_.size()));
  for (std::size_t j = 0; j < indices_.size(); ++j) {
    out.col(static_cast<Eigen::Index>(j)) = x.col(static_cast<Eigen::Index>(indices_[j]));
  }
  return out;
}

void Selector::save(Writer& out) const {
  out.tag("selector").put(config_.method).put(config_.k).put(static_cast<std::uint64_t>(input_dim_))
      .put(flagged_ ? 1 : 0);
  out.tag("indices").put_indices(indices_);
  if (config_.method == "pca") {
    out.tag("center").put(center_);
    out.tag("components").put(components_);
    out.tag("variance").put(variance_);
  }
}

Selector Selector::load(Reader& in) {
  Selector s;
  in.expect("selector");
  s.config_.method = in.word();
  s.config_.k = in.integer();
  s.input_dim_ = in.u64();
  s.flagged_ = in.integer() != 0;
  in.expect("indices");
  s.indices_ = in.indices();
  for (auto i : s.indices_) {
    if (i >= s.input_dim_) throw InputError("selector index out of range");
  }
  if (s.config_.method == "pca") {
    in.expect("center");
    s.center_ = in.vector();
    in.expect("components");
    s.components_ = in.matrix();
    in.expect("variance");
    s.variance_ = in.vector();
    if (static_cast<std::size_t>(s.center_.size()) != s.input_dim_ ||
        static_cast<std::size_t>(s.components_.rows()) != s.input_dim_) {
      throw InputError("pca selector dimensions disagree");
    }
  }
  return s;
}

}  // namespace utrad::ml
