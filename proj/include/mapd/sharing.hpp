#pragma once

#include <string>
#include <vector>

namespace mapd {

// Per parameter-block partition of agents into sharing groups. Each group
// owns one parameter vector for that block. Fully shared = one group per
// block; independent = all singletons. Groups are kept in canonical order
// (members sorted, groups sorted by smallest member) so schemes compare and
// serialize deterministically.
struct SharingScheme {
  std::vector<std::string> blocks;                       // e.g. {"trunk", "head"}
  std::vector<std::vector<std::vector<int>>> partitions; // [block][group] -> agent ids

  static SharingScheme fully_shared(int n_agents);
  static SharingScheme independent(int n_agents);

  int n_blocks() const { return static_cast<int>(blocks.size()); }
  int n_groups(int block) const { return static_cast<int>(partitions[static_cast<std::size_t>(block)].size()); }
  const std::vector<int>& group_members(int block, int group) const {
    return partitions[static_cast<std::size_t>(block)][static_cast<std::size_t>(group)];
  }
  int group_of(int block, int agent) const;
  int find_group(int block, const std::vector<int>& members) const;  // -1 when absent
  int block_index(const std::string& name) const;                    // -1 when absent

  void normalize();
  void validate(int n_agents) const;

  bool operator==(const SharingScheme&) const = default;
};

inline const char* const kTrunkBlock = "trunk";
inline const char* const kHeadBlock = "head";

}  // namespace mapd
