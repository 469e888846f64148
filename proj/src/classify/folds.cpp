#include "utrad/classify/folds.hpp"

#include <algorithm>
#include <map>

#include "utrad/common/error.hpp"
#include "utrad/common/rng.hpp"

namespace utrad::ml {

std::vector<std::size_t> FoldPlan::train_indices(int f) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < fold.size(); ++i) {
    if (fold[i] != f) out.push_back(i);
  }
  return out;
}

std::vector<std::size_t> FoldPlan::validation_indices(int f) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < fold.size(); ++i) {
    if (fold[i] == f) out.push_back(i);
  }
  return out;
}

FoldPlan make_folds(std::span<const int> labels, std::span<const std::string> groups, int k,
                    std::uint64_t seed) {
  if (labels.size() != groups.size()) throw PreconditionError("labels and groups differ in length");
  if (k < 2) throw PreconditionError("need at least 2 folds");

  struct Group {
    std::vector<std::size_t> members;
    std::size_t count[2] = {0, 0};
  };
  std::map<std::string, Group> by_id;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    Group& g = by_id[groups[i]];
    g.members.push_back(i);
    ++g.count[labels[i] ? 1 : 0];
  }
  for (int c = 0; c < 2; ++c) {
    std::size_t patients = 0;
    for (const auto& [id, g] : by_id) patients += g.count[c] > 0;
    if (patients < static_cast<std::size_t>(k)) {
      throw PreconditionError("class " + std::to_string(c) + " occurs in " +
                              std::to_string(patients) + " patients, fewer than k = " +
                              std::to_string(k));
    }
  }

  std::vector<const Group*> order;
  for (const auto& [id, g] : by_id) order.push_back(&g);
  Rng rng(seed);
  rng.shuffle(order);
  std::stable_sort(order.begin(), order.end(), [](const Group* a, const Group* b) {
    return a->members.size() > b->members.size();
  });

  FoldPlan plan;
  plan.k = k;
  plan.fold.assign(labels.size(), -1);
  std::vector<std::size_t> per_class[2] = {std::vector<std::size_t>(k), std::vector<std::size_t>(k)};
  std::vector<std::size_t> total(k);
  for (const Group* g : order) {
    const int major = g->count[1] >= g->count[0] ? 1 : 0;
    int best = 0;
    for (int f = 1; f < k; ++f) {
      if (per_class[major][f] < per_class[major][best] ||
          (per_class[major][f] == per_class[major][best] && total[f] < total[best])) {
        best = f;
      }
    }
    for (auto i : g->members) plan.fold[i] = best;
    per_class[0][best] += g->count[0];
    per_class[1][best] += g->count[1];
    total[best] += g->members.size();
  }
  return plan;
}

}  // namespace utrad::ml
