#include "utrad/stats.hpp"

#include <boost/math/distributions/chi_squared.hpp>

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>

#include "utrad/common/error.hpp"

namespace utrad::stats {

namespace {

// Exact P(U <= u) for sample sizes n, m without ties, by counting rank-sum
// subsets: count[k][s] = number of k-subsets of {1..N} with rank sum s.
double exact_lower_tail(std::size_t n, std::size_t m, double u) {
  const std::size_t total = n + m;
  const std::size_t max_sum = total * (total + 1) / 2;
  std::vector<std::vector<double>> count(n + 1, std::vector<double>(max_sum + 1, 0.0));
  count[0][0] = 1.0;
  for (std::size_t r = 1; r <= total; ++r) {
    for (std::size_t k = std::min(r, n); k >= 1; --k) {
      for (std::size_t s = max_sum; s >= r; --s) count[k][s] += count[k - 1][s - r];
    }
  }
  const double offset = static_cast<double>(n * (n + 1) / 2);
  double hits = 0.0, all = 0.0;
  for (std::size_t s = 0; s <= max_sum; ++s) {
    all += count[n][s];
    if (static_cast<double>(s) - offset <= u + 1e-9) hits += count[n][s];
  }
  return std::min(1.0, 2.0 * hits / all);
}

}  // namespace

MannWhitney mann_whitney_u(std::span<const double> x, std::span<const double> y) {
  if (x.empty() || y.empty()) throw PreconditionError("Mann-Whitney U needs two nonempty samples");
  const std::size_t n = x.size(), m = y.size(), total = n + m;
  std::vector<std::pair<double, int>> pooled;
  pooled.reserve(total);
  for (double v : x) pooled.emplace_back(v, 0);
  for (double v : y) pooled.emplace_back(v, 1);
  std::sort(pooled.begin(), pooled.end());
  double rank_sum_x = 0.0, tie_term = 0.0;
  bool ties = false;
  for (std::size_t i = 0; i < total;) {
    std::size_t j = i;
    while (j < total && pooled[j].first == pooled[i].first) ++j;
    const double t = static_cast<double>(j - i);
    const double midrank = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
    for (std::size_t k = i; k < j; ++k) {
      if (pooled[k].second == 0) rank_sum_x += midrank;
    }
    if (t > 1) {
      ties = true;
      tie_term += t * t * t - t;
    }
    i = j;
  }
  const double nd = static_cast<double>(n), md = static_cast<double>(m), nt = static_cast<double>(total);
  const double ux = rank_sum_x - nd * (nd + 1.0) / 2.0;
  const double uy = nd * md - ux;
  MannWhitney out;
  out.u = std::min(ux, uy);
  if (total <= 16 && !ties) {
    out.exact = true;
    out.p = exact_lower_tail(n, m, out.u);
    return out;
  }
  const double variance = nd * md / 12.0 * ((nt + 1.0) - tie_term / (nt * (nt - 1.0)));
  if (variance <= 0.0) {
    out.p = 1.0;
    return out;
  }
  const double z = std::max(0.0, std::abs(ux - nd * md / 2.0) - 0.5) / std::sqrt(variance);
  out.p = std::min(1.0, std::erfc(z / std::sqrt(2.0)));
  return out;
}

Normalizer Normalizer::fit(const Eigen::MatrixXd& train) {
  if (train.rows() == 0) throw PreconditionError("cannot fit a normalizer on an empty table");
  Normalizer z;
  z.mean_ = train.colwise().mean().transpose();
  z.sd_ = Eigen::VectorXd::Zero(train.cols());
  if (train.rows() > 1) {
    for (Eigen::Index c = 0; c < train.cols(); ++c) {
      const double ss = (train.col(c).array() - z.mean_(c)).square().sum();
      z.sd_(c) = std::sqrt(ss / static_cast<double>(train.rows() - 1));
    }
  }
  z.fitted_ = true;
  return z;
}

Normalizer Normalizer::from_params(Eigen::VectorXd mean, Eigen::VectorXd sd) {
  if (mean.size() != sd.size()) throw InputError("normalizer mean and sd differ in length");
  Normalizer z;
  z.mean_ = std::move(mean);
  z.sd_ = std::move(sd);
  z.fitted_ = true;
  return z;
}

Eigen::MatrixXd Normalizer::apply(const Eigen::MatrixXd& table) const {
  if (!fitted_) throw PreconditionError("normalizer applied before fitting");
  if (table.cols() != mean_.size()) throw InputError("table width differs from the fitted normalizer");
  Eigen::MatrixXd out(table.rows(), table.cols());
  for (Eigen::Index c = 0; c < table.cols(); ++c) {
    if (sd_(c) > 0.0) {
      out.col(c) = (table.col(c).array() - mean_(c)) / sd_(c);
    } else {
      out.col(c).setZero();
    }
  }
  return out;
}

std::vector<std::size_t> Normalizer::constant_columns() const {
  std::vector<std::size_t> out;
  for (Eigen::Index c = 0; c < sd_.size(); ++c) {
    if (!(sd_(c) > 0.0)) out.push_back(static_cast<std::size_t>(c));
  }
  return out;
}

std::vector<int> equal_frequency_bins(std::span<const double> values, int max_bins) {
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
  std::vector<int> bins(values.size());
  if (static_cast<int>(sorted.size()) <= max_bins) {
    for (std::size_t i = 0; i < values.size(); ++i) {
      bins[i] = static_cast<int>(std::lower_bound(sorted.begin(), sorted.end(), values[i]) - sorted.begin());
    }
    return bins;
  }
  std::vector<double> all(values.begin(), values.end());
  std::sort(all.begin(), all.end());
  const double n = static_cast<double>(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    const auto below = static_cast<double>(std::lower_bound(all.begin(), all.end(), values[i]) - all.begin());
    bins[i] = std::min(max_bins - 1, static_cast<int>(std::floor(max_bins * below / n)));
  }
  return bins;
}

double mutual_information_discrete(std::span<const int> a, std::span<const int> b) {
  if (a.size() != b.size() || a.empty()) throw PreconditionError("mutual information needs paired samples");
  std::map<std::pair<int, int>, double> joint;
  std::map<int, double> pa, pb;
  for (std::size_t i = 0; i < a.size(); ++i) {
    joint[{a[i], b[i]}] += 1.0;
    pa[a[i]] += 1.0;
    pb[b[i]] += 1.0;
  }
  const double n = static_cast<double>(a.size());
  double mi = 0.0;
  for (const auto& [key, count] : joint) {
    mi += count / n * std::log(count * n / (pa[key.first] * pb[key.second]));
  }
  return std::max(0.0, mi);
}

double mutual_information(std::span<const double> feature, std::span<const int> labels) {
  if (feature.size() != labels.size() || feature.size() < 2) {
    throw PreconditionError("mutual information needs at least two paired samples");
  }
  if (std::set<int>(labels.begin(), labels.end()).size() < 2) {
    throw PreconditionError("mutual information needs both labels present");
  }
  const auto bins = equal_frequency_bins(feature);
  return mutual_information_discrete(bins, labels);
}

namespace {

double log_choose(double n, double k) { return std::lgamma(n + 1) - std::lgamma(k + 1) - std::lgamma(n - k + 1); }

// Fisher-Freeman-Halton for two rows: enumerate first-row counts with fixed
// margins. Returns a negative value when the table count exceeds `limit`.
double fisher_two_rows(const std::vector<double>& top, const std::vector<double>& cols, double limit) {
  double tables = 1.0;
  for (double c : cols) tables *= c + 1.0;
  if (tables > limit) return -1.0;
  const double n = std::accumulate(cols.begin(), cols.end(), 0.0);
  const double r1 = std::accumulate(top.begin(), top.end(), 0.0);
  const double log_denominator = log_choose(n, r1);
  const auto log_prob = [&](const std::vector<double>& x) {
    double s = 0.0;
    for (std::size_t j = 0; j < cols.size(); ++j) s += log_choose(cols[j], x[j]);
    return s - log_denominator;
  };
  const double observed = log_prob(top);
  std::vector<double> suffix(cols.size() + 1, 0.0);
  for (std::size_t j = cols.size(); j-- > 0;) suffix[j] = suffix[j + 1] + cols[j];
  std::vector<double> x(cols.size(), 0.0);
  double p = 0.0;
  const auto recurse = [&](auto&& self, std::size_t j, double remaining) -> void {
    if (j + 1 == cols.size()) {
      if (remaining > cols[j]) return;
      x[j] = remaining;
      const double lp = log_prob(x);
      if (lp <= observed + 1e-7) p += std::exp(lp);
      return;
    }
    const double lo = std::max(0.0, remaining - suffix[j + 1]);
    const double hi = std::min(cols[j], remaining);
    for (double v = lo; v <= hi; v += 1.0) {
      x[j] = v;
      self(self, j + 1, remaining - v);
    }
  };
  recurse(recurse, 0, r1);
  return std::min(1.0, p);
}

}  // namespace

TableTest contingency_test(const std::vector<std::vector<double>>& table) {
  if (table.size() != 2) throw PreconditionError("contingency test expects two groups");
  const std::size_t c = table[0].size();
  if (table[1].size() != c || c == 0) throw PreconditionError("ragged contingency table");
  std::vector<double> cols(c, 0.0);
  double rows[2] = {0.0, 0.0};
  for (int r = 0; r < 2; ++r) {
    for (std::size_t j = 0; j < c; ++j) {
      cols[j] += table[r][j];
      rows[r] += table[r][j];
    }
  }
  if (rows[0] == 0.0 || rows[1] == 0.0) throw PreconditionError("contingency test with an empty group");
  // Categories absent from both groups carry no information.
  std::vector<double> kept_cols, top;
  for (std::size_t j = 0; j < c; ++j) {
    if (cols[j] > 0.0) {
      kept_cols.push_back(cols[j]);
      top.push_back(table[0][j]);
    }
  }
  if (kept_cols.size() < 2) return {1.0, "chi-square"};
  const double n = rows[0] + rows[1];
  bool small = false;
  double chi2 = 0.0;
  for (int r = 0; r < 2; ++r) {
    for (std::size_t j = 0; j < kept_cols.size(); ++j) {
      const double expected = rows[r] * kept_cols[j] / n;
      if (expected < 5.0) small = true;
      const double observed = r == 0 ? top[j] : kept_cols[j] - top[j];
      chi2 += (observed - expected) * (observed - expected) / expected;
    }
  }
  if (small) {
    const double p = fisher_two_rows(top, kept_cols, 2e7);
    if (p >= 0.0) return {p, "fisher"};
  }
  const boost::math::chi_squared dist(static_cast<double>(kept_cols.size() - 1));
  return {boost::math::cdf(boost::math::complement(dist, chi2)), "chi-square"};
}

std::vector<CovariateResult> compare_covariates(const std::vector<Covariate>& covariates) {
  std::vector<CovariateResult> out;
  for (const auto& cov : covariates) {
    if (cov.group_a.empty() || cov.group_b.empty()) {
      throw PreconditionError("covariate " + cov.name + " has an empty group");
    }
    if (cov.ordered) {
      const auto mw = mann_whitney_u(cov.group_a, cov.group_b);
      out.push_back({cov.name, mw.exact ? "mann-whitney-exact" : "mann-whitney", mw.p});
      continue;
    }
    std::set<double> categories(cov.group_a.begin(), cov.group_a.end());
    categories.insert(cov.group_b.begin(), cov.group_b.end());
    std::vector<std::vector<double>> table(2, std::vector<double>(categories.size(), 0.0));
    const auto fill = [&](const std::vector<double>& g, int row) {
      for (double v : g) table[row][std::distance(categories.begin(), categories.find(v))] += 1.0;
    };
    fill(cov.group_a, 0);
    fill(cov.group_b, 1);
    const auto t = contingency_test(table);
    out.push_back({cov.name, t.method, t.p});
  }
  return out;
}

}  // namespace utrad::stats
