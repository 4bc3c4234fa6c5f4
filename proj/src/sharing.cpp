#include "mapd/sharing.hpp"

#include <algorithm>
#include <stdexcept>

namespace mapd {

SharingScheme SharingScheme::fully_shared(int n_agents) {
  SharingScheme s;
  s.blocks = {kTrunkBlock, kHeadBlock};
  std::vector<int> all(static_cast<std::size_t>(n_agents));
  for (int i = 0; i < n_agents; ++i) all[static_cast<std::size_t>(i)] = i;
  s.partitions = {{all}, {all}};
  return s;
}

SharingScheme SharingScheme::independent(int n_agents) {
  SharingScheme s;
  s.blocks = {kTrunkBlock, kHeadBlock};
  std::vector<std::vector<int>> singletons;
  singletons.reserve(static_cast<std::size_t>(n_agents));
  for (int i = 0; i < n_agents; ++i) singletons.push_back({i});
  s.partitions = {singletons, singletons};
  return s;
}

int SharingScheme::group_of(int block, int agent) const {
  const auto& part = partitions[static_cast<std::size_t>(block)];
  for (std::size_t g = 0; g < part.size(); ++g)
    for (int a : part[g])
      if (a == agent) return static_cast<int>(g);
  throw std::invalid_argument("SharingScheme::group_of: agent not in partition");
}

int SharingScheme::find_group(int block, const std::vector<int>& members) const {
  std::vector<int> key = members;
  std::sort(key.begin(), key.end());
  const auto& part = partitions[static_cast<std::size_t>(block)];
  for (std::size_t g = 0; g < part.size(); ++g)
    if (part[g] == key) return static_cast<int>(g);
  return -1;
}

int SharingScheme::block_index(const std::string& name) const {
  for (std::size_t b = 0; b < blocks.size(); ++b)
    if (blocks[b] == name) return static_cast<int>(b);
  return -1;
}

void SharingScheme::normalize() {
  for (auto& part : partitions) {
    for (auto& g : part) std::sort(g.begin(), g.end());
    std::sort(part.begin(), part.end(),
              [](const auto& a, const auto& b) { return a.front() < b.front(); });
  }
}

void SharingScheme::validate(int n_agents) const {
  if (blocks.size() != partitions.size())
    throw std::invalid_argument("SharingScheme: blocks/partitions size mismatch");
  for (const auto& part : partitions) {
    std::vector<int> seen(static_cast<std::size_t>(n_agents), 0);
    for (const auto& g : part) {
      if (g.empty()) throw std::invalid_argument("SharingScheme: empty group");
      for (int a : g) {
        if (a < 0 || a >= n_agents) throw std::invalid_argument("SharingScheme: agent id out of range");
        if (seen[static_cast<std::size_t>(a)]++)
          throw std::invalid_argument("SharingScheme: agent appears in two groups of one block");
      }
    }
    for (int a = 0; a < n_agents; ++a)
      if (!seen[static_cast<std::size_t>(a)])
        throw std::invalid_argument("SharingScheme: agent missing from a block partition");
  }
}

}  // namespace mapd
