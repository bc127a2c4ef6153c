#include "mecmfg/types.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace mecmfg {

const char* class_name(TaskClass c) {
  switch (c) {
    case TaskClass::Red: return "red";
    case TaskClass::Yellow: return "yellow";
    case TaskClass::Green: return "green";
  }
  return "?";
}

std::vector<int> apportion_ues(const std::vector<UEProfile>& profiles, int num_ues) {
  if (profiles.empty()) throw std::invalid_argument("apportion_ues: no profiles");
  if (num_ues < 1) throw std::invalid_argument("apportion_ues: num_ues < 1");
  const std::size_t k = profiles.size();
  std::vector<int> counts(k, 0);
  std::vector<std::pair<double, std::size_t>> remainders(k);
  int assigned = 0;
  for (std::size_t i = 0; i < k; ++i) {
    const double share = profiles[i].weight * static_cast<double>(num_ues);
    counts[i] = static_cast<int>(std::floor(share));
    assigned += counts[i];
    remainders[i] = {share - std::floor(share), i};
  }
  std::stable_sort(remainders.begin(), remainders.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  for (std::size_t i = 0; assigned < num_ues; ++i, ++assigned) {
    counts[remainders[i % k].second] += 1;
  }
  return counts;
}

}  // namespace mecmfg
