#include <Eigen/Dense>

#include <algorithm>
#include <cmath>

#include "utrad/radiomics/features.hpp"

namespace utrad::radiomics {

namespace {

double plogp(double p) { return p > 0.0 ? p * std::log2(p) : 0.0; }

std::vector<double> average(const std::vector<std::vector<double>>& per_direction) {
  std::vector<double> mean(per_direction.front().size(), 0.0);
  for (const auto& v : per_direction) {
    for (std::size_t k = 0; k < v.size(); ++k) mean[k] += v[k];
  }
  for (double& v : mean) v /= static_cast<double>(per_direction.size());
  return mean;
}

// Second-largest eigenvalue route to the maximal correlation coefficient,
// restricted to gray levels present in the matrix.
double maximal_correlation(const std::vector<double>& p, const std::vector<double>& px, std::size_t ng) {
  std::vector<std::size_t> present;
  for (std::size_t i = 0; i < ng; ++i) {
    if (px[i] > 0.0) present.push_back(i);
  }
  if (present.size() < 2) return 1.0;
  const auto m = static_cast<Eigen::Index>(present.size());
  Eigen::MatrixXd scaled(m, m);
  for (Eigen::Index a = 0; a < m; ++a) {
    for (Eigen::Index b = 0; b < m; ++b) {
      const auto i = present[a];
      const auto j = present[b];
      scaled(a, b) = p[i * ng + j] / std::sqrt(px[i] * px[j]);
    }
  }
  const Eigen::MatrixXd q = scaled * scaled.transpose();
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(q, Eigen::EigenvaluesOnly);
  const double second = solver.eigenvalues()[m - 2];
  return std::sqrt(std::max(0.0, second));
}

// Statistics shared by the run-length, size-zone and dependence families.
// Row r is gray level r + 1, column c is size c + 1.
struct SizeStats {
  double small = 0, large = 0, gln = 0, glnn = 0, sn = 0, snn = 0, percentage = 0;
  double glv = 0, sv = 0, entropy = 0, low = 0, high = 0;
  double small_low = 0, small_high = 0, large_low = 0, large_high = 0;
};

SizeStats size_stats(const CountMatrix& m, double voxels) {
  SizeStats s;
  const double total = m.total();
  if (total <= 0.0) return s;
  std::vector<double> by_level(m.rows, 0.0), by_size(m.cols, 0.0);
  double mu_i = 0.0, mu_j = 0.0;
  for (std::size_t r = 0; r < m.rows; ++r) {
    const double i = static_cast<double>(r + 1);
    for (std::size_t c = 0; c < m.cols; ++c) {
      const double count = m(r, c);
      if (count == 0.0) continue;
      const double j = static_cast<double>(c + 1);
      by_level[r] += count;
      by_size[c] += count;
      s.small += count / (j * j);
      s.large += count * j * j;
      s.low += count / (i * i);
      s.high += count * i * i;
      s.small_low += count / (i * i * j * j);
      s.small_high += count * i * i / (j * j);
      s.large_low += count * j * j / (i * i);
      s.large_high += count * i * i * j * j;
      const double p = count / total;
      mu_i += p * i;
      mu_j += p * j;
      s.entropy -= plogp(p);
    }
  }
  for (std::size_t r = 0; r < m.rows; ++r) {
    for (std::size_t c = 0; c < m.cols; ++c) {
      const double count = m(r, c);
      if (count == 0.0) continue;
      const double p = count / total;
      s.glv += p * std::pow(static_cast<double>(r + 1) - mu_i, 2);
      s.sv += p * std::pow(static_cast<double>(c + 1) - mu_j, 2);
    }
  }
  for (double v : by_level) s.gln += v * v;
  for (double v : by_size) s.sn += v * v;
  s.glnn = s.gln / (total * total);
  s.snn = s.sn / (total * total);
  s.gln /= total;
  s.sn /= total;
  for (double* f : {&s.small, &s.large, &s.low, &s.high, &s.small_low, &s.small_high, &s.large_low,
                    &s.large_high}) {
    *f /= total;
  }
  s.percentage = voxels > 0.0 ? total / voxels : 0.0;
  return s;
}

std::vector<double> run_or_zone_features(const SizeStats& s) {
  return {s.small, s.large, s.gln, s.glnn, s.sn, s.snn, s.percentage, s.glv,
          s.sv,    s.entropy, s.low, s.high, s.small_low, s.small_high, s.large_low, s.large_high};
}

}  // namespace

std::vector<double> glcm_direction_features(const CountMatrix& counts, int gray_levels) {
  const std::size_t ng = counts.rows;
  const double total = counts.total();
  std::vector<double> p(counts.values.size());
  for (std::size_t k = 0; k < p.size(); ++k) p[k] = counts.values[k] / total;
  std::vector<double> px(ng, 0.0), py(ng, 0.0), sum_dist(2 * ng + 1, 0.0), diff_dist(ng, 0.0);
  double ux = 0.0, uy = 0.0, autocorrelation = 0.0, energy = 0.0, hxy = 0.0, max_prob = 0.0;
  for (std::size_t r = 0; r < ng; ++r) {
    for (std::size_t c = 0; c < ng; ++c) {
      const double v = p[r * ng + c];
      if (v == 0.0) continue;
      const double i = static_cast<double>(r + 1);
      const double j = static_cast<double>(c + 1);
      px[r] += v;
      py[c] += v;
      ux += i * v;
      uy += j * v;
      autocorrelation += i * j * v;
      energy += v * v;
      hxy -= plogp(v);
      max_prob = std::max(max_prob, v);
      sum_dist[r + c + 2] += v;
      diff_dist[r > c ? r - c : c - r] += v;
    }
  }
  double prominence = 0.0, shade = 0.0, tendency = 0.0, contrast = 0.0, sum_squares = 0.0;
  double hxy1 = 0.0;
  for (std::size_t r = 0; r < ng; ++r) {
    for (std::size_t c = 0; c < ng; ++c) {
      const double v = p[r * ng + c];
      if (v == 0.0) continue;
      const double i = static_cast<double>(r + 1);
      const double j = static_cast<double>(c + 1);
      const double t = i + j - ux - uy;
      prominence += t * t * t * t * v;
      shade += t * t * t * v;
      tendency += t * t * v;
      contrast += (i - j) * (i - j) * v;
      sum_squares += (i - ux) * (i - ux) * v;
      hxy1 -= v * std::log2(px[r] * py[c]);
    }
  }
  double var_x = 0.0, var_y = 0.0, hx = 0.0, hy = 0.0, hxy2 = 0.0;
  for (std::size_t r = 0; r < ng; ++r) {
    const double i = static_cast<double>(r + 1);
    var_x += (i - ux) * (i - ux) * px[r];
    var_y += (i - uy) * (i - uy) * py[r];
    hx -= plogp(px[r]);
    hy -= plogp(py[r]);
    for (std::size_t c = 0; c < ng; ++c) hxy2 -= plogp(px[r] * py[c]);
  }
  const double sigma = std::sqrt(var_x) * std::sqrt(var_y);
  const double correlation = sigma > 0.0 ? (autocorrelation - ux * uy) / sigma : 1.0;

  double diff_avg = 0.0, diff_entropy = 0.0, idm = 0.0, idmn = 0.0, id = 0.0, idn = 0.0, inv_var = 0.0;
  const double ngd = static_cast<double>(gray_levels);
  for (std::size_t k = 0; k < ng; ++k) {
    const double v = diff_dist[k];
    const double kd = static_cast<double>(k);
    diff_avg += kd * v;
    diff_entropy -= plogp(v);
    idm += v / (1.0 + kd * kd);
    idmn += v / (1.0 + kd * kd / (ngd * ngd));
    id += v / (1.0 + kd);
    idn += v / (1.0 + kd / ngd);
    if (k > 0) inv_var += v / (kd * kd);
  }
  double diff_var = 0.0;
  for (std::size_t k = 0; k < ng; ++k) diff_var += std::pow(static_cast<double>(k) - diff_avg, 2) * diff_dist[k];
  double sum_avg = 0.0, sum_entropy = 0.0;
  for (std::size_t k = 2; k < sum_dist.size(); ++k) {
    sum_avg += static_cast<double>(k) * sum_dist[k];
    sum_entropy -= plogp(sum_dist[k]);
  }
  const double hmax = std::max(hx, hy);
  const double imc1 = hmax > 0.0 ? (hxy - hxy1) / hmax : hxy - hxy1;
  const double imc2 = hxy > hxy2 ? 0.0 : std::sqrt(std::max(0.0, 1.0 - std::exp(-2.0 * (hxy2 - hxy))));

  return {autocorrelation, ux,         prominence, shade,   tendency, contrast, correlation, diff_avg,
          diff_entropy,    diff_var,   energy,     hxy,     imc1,     imc2,     idm,         maximal_correlation(p, px, ng),
          idmn,            id,         idn,        inv_var, max_prob, sum_avg,  sum_entropy, sum_squares};
}

std::vector<double> glcm_features(const GrayLevelMatrices& m) {
  std::vector<std::vector<double>> per_direction;
  for (const auto& counts : m.glcm) {
    if (counts.total() > 0.0) per_direction.push_back(glcm_direction_features(counts, m.gray_levels));
  }
  if (per_direction.empty()) {
    // No voxel pair is adjacent: treat every voxel as co-occurring with itself.
    CountMatrix self(static_cast<std::size_t>(m.gray_levels), static_cast<std::size_t>(m.gray_levels));
    for (std::size_t r = 0; r < m.gldm.rows; ++r) {
      for (std::size_t c = 0; c < m.gldm.cols; ++c) self(r, r) += m.gldm(r, c);
    }
    per_direction.push_back(glcm_direction_features(self, m.gray_levels));
  }
  return average(per_direction);
}

std::vector<double> glrlm_features(const GrayLevelMatrices& m) {
  std::vector<std::vector<double>> per_direction;
  for (const auto& counts : m.glrlm) {
    if (counts.total() > 0.0) {
      per_direction.push_back(run_or_zone_features(size_stats(counts, static_cast<double>(m.voxel_count))));
    }
  }
  return average(per_direction);
}

std::vector<double> glszm_features(const GrayLevelMatrices& m) {
  return run_or_zone_features(size_stats(m.glszm, static_cast<double>(m.voxel_count)));
}

std::vector<double> gldm_features(const GrayLevelMatrices& m) {
  const SizeStats s = size_stats(m.gldm, static_cast<double>(m.voxel_count));
  return {s.small, s.large,   s.gln, s.sn,   s.snn,       s.glv,        s.sv,
          s.entropy, s.low,   s.high, s.small_low, s.small_high, s.large_low, s.large_high};
}

std::vector<double> ngtdm_features(const GrayLevelMatrices& m) {
  double nvp = 0.0, sum_s = 0.0;
  for (const auto& row : m.ngtdm) {
    nvp += row.count;
    sum_s += row.difference;
  }
  constexpr double kCoarsenessCap = 1e6;
  if (nvp <= 0.0) return {kCoarsenessCap, 0.0, 0.0, 0.0, 0.0};
  struct Level {
    double i, p, s;
  };
  std::vector<Level> levels;
  for (std::size_t r = 0; r < m.ngtdm.size(); ++r) {
    if (m.ngtdm[r].count > 0.0) {
      levels.push_back({static_cast<double>(r + 1), m.ngtdm[r].count / nvp, m.ngtdm[r].difference});
    }
  }
  double ps = 0.0;
  for (const auto& l : levels) ps += l.p * l.s;
  const double coarseness = ps > 0.0 ? 1.0 / ps : kCoarsenessCap;

  const double ngp = static_cast<double>(levels.size());
  double contrast_sum = 0.0, busy_den = 0.0, complexity = 0.0, strength_num = 0.0;
  for (const auto& a : levels) {
    for (const auto& b : levels) {
      const double d = a.i - b.i;
      contrast_sum += a.p * b.p * d * d;
      busy_den += std::abs(a.i * a.p - b.i * b.p);
      complexity += std::abs(d) * (a.p * a.s + b.p * b.s) / (a.p + b.p);
      strength_num += (a.p + b.p) * d * d;
    }
  }
  const double contrast = ngp > 1.0 ? contrast_sum / (ngp * (ngp - 1.0)) * (sum_s / nvp) : 0.0;
  const double busyness = busy_den > 0.0 ? ps / busy_den : 0.0;
  const double strength = sum_s > 0.0 ? strength_num / sum_s : 0.0;
  return {coarseness, contrast, busyness, complexity / nvp, strength};
}

std::vector<double> texture_features(const GrayLevelMatrices& m) {
  std::vector<double> out;
  out.reserve(75);
  for (const auto& part : {glcm_features(m), glrlm_features(m), glszm_features(m), gldm_features(m),
                           ngtdm_features(m)}) {
    out.insert(out.end(), part.begin(), part.end());
  }
  return out;
}

}  // namespace utrad::radiomics
