#include "utrad/segmetrics.hpp"

#include <algorithm>
#include <map>

namespace utrad::seg {

double dice(std::span<const std::uint8_t> a, std::span<const std::uint8_t> b) {
  if (a.size() != b.size()) throw PreconditionError("dice of masks with different sizes");
  std::size_t na = 0, nb = 0, both = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const bool in_a = a[i] != 0;
    const bool in_b = b[i] != 0;
    na += in_a;
    nb += in_b;
    both += in_a && in_b;
  }
  if (na + nb == 0) return 1.0;
  return 2.0 * static_cast<double>(both) / static_cast<double>(na + nb);
}

double dice(const LabelGrid& a, std::uint16_t la, const LabelGrid& b, std::uint16_t lb) {
  if (!a.geometry.matches(b.geometry)) throw InputError("dice of masks with different geometry");
  std::vector<std::uint8_t> ma(a.data.size()), mb(b.data.size());
  for (std::size_t i = 0; i < ma.size(); ++i) {
    ma[i] = la == 0 ? a.data[i] != 0 : a.data[i] == la;
    mb[i] = lb == 0 ? b.data[i] != 0 : b.data[i] == lb;
  }
  return dice(ma, mb);
}

BinaryGrid foreground(const LabelGrid& labels) {
  BinaryGrid out(labels.geometry, std::uint8_t{0});
  for (std::size_t i = 0; i < labels.data.size(); ++i) out.data[i] = labels.data[i] != 0;
  return out;
}

Components connected_components(const BinaryGrid& mask) {
  const auto& g = mask.geometry;
  Components out;
  out.labels = LabelGrid(g, std::uint16_t{0});
  std::vector<std::size_t> stack;
  for (std::size_t start = 0; start < mask.data.size(); ++start) {
    if (!mask.data[start] || out.labels.data[start]) continue;
    if (out.count == 65535) throw Error("more than 65535 connected components");
    const auto label = static_cast<std::uint16_t>(++out.count);
    std::size_t size = 0;
    out.labels.data[start] = label;
    stack.push_back(start);
    while (!stack.empty()) {
      const std::size_t i = stack.back();
      stack.pop_back();
      ++size;
      const Index3 p = g.unravel(i);
      for (std::int64_t dz = -1; dz <= 1; ++dz) {
        for (std::int64_t dy = -1; dy <= 1; ++dy) {
          for (std::int64_t dx = -1; dx <= 1; ++dx) {
            const Index3 q{p[0] + dx, p[1] + dy, p[2] + dz};
            if (!g.contains(q)) continue;
            const std::size_t j = g.linear(q[0], q[1], q[2]);
            if (mask.data[j] && !out.labels.data[j]) {
              out.labels.data[j] = label;
              stack.push_back(j);
            }
          }
        }
      }
    }
    out.sizes.push_back(size);
  }
  return out;
}

CrossMatch cross_match(const LabelGrid& manual, const BinaryGrid& predicted) {
  if (!manual.geometry.matches(predicted.geometry)) {
    throw InputError("manual and predicted masks have different geometry");
  }
  CrossMatch out;
  out.predicted = connected_components(predicted);
  std::map<std::uint16_t, std::size_t> manual_size;
  std::map<std::pair<std::uint16_t, std::uint16_t>, std::size_t> overlap;
  for (std::size_t i = 0; i < manual.data.size(); ++i) {
    const auto m = manual.data[i];
    if (m == 0) continue;
    ++manual_size[m];
    const auto c = out.predicted.labels.data[i];
    if (c != 0) ++overlap[{m, c}];
  }
  for (const auto& [label, size] : manual_size) {
    InstanceMatch match{label, std::nullopt, 0.0};
    for (auto it = overlap.lower_bound({label, 0}); it != overlap.end() && it->first.first == label; ++it) {
      const auto c = it->first.second;
      const double d = 2.0 * static_cast<double>(it->second) /
                       static_cast<double>(size + out.predicted.sizes[c - 1]);
      if (d > match.dsc) {
        match.dsc = d;
        match.predicted_component = c;
      }
    }
    out.matches.push_back(match);
  }
  return out;
}

AgreementReport summarize(std::vector<CaseScore> per_case) {
  if (per_case.size() < 2) throw PreconditionError("agreement summary needs at least two cases");
  std::vector<double> values;
  for (const auto& c : per_case) {
    if (!(c.dsc >= 0.0 && c.dsc <= 1.0)) throw PreconditionError("Dice value outside [0,1] for " + c.case_id);
    values.push_back(c.dsc);
  }
  const Interval iv = unit_interval(values);
  AgreementReport r;
  r.per_case = std::move(per_case);
  r.mean = iv.mean;
  r.sd = iv.sd;
  r.ci_low = iv.low;
  r.ci_high = iv.high;
  return r;
}

}  // namespace utrad::seg
