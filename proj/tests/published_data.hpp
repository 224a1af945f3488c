#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "dca/assignment.hpp"
#include "dca/constraint_graph.hpp"

namespace testdata {

inline const std::filesystem::path kFixtures = DCA_SOURCE_DIR "/fixtures";
inline const std::filesystem::path kConfigs = DCA_SOURCE_DIR "/configs";

// The twelve induced constraints, in induction order.
inline const std::vector<std::pair<int, int>> kG12 = {
    {10, 11}, {11, 9}, {2, 3}, {3, 10}, {3, 6}, {6, 10},
    {4, 10},  {5, 4},  {4, 7}, {7, 10}, {4, 8}, {8, 10}};

inline const std::vector<std::pair<int, int>> kBrackets = {{2, 10}, {6, 9}, {3, 4}, {3, 5}};

inline const std::vector<int> kX0 = {11, 2, 3, 10, 9, 6, 4, 5, 7, 8};
inline const std::vector<int> kX34 = {2, 3, 5, 4, 8, 10, 11, 9, 6, 7};
inline const std::vector<int> kX44 = {5, 4, 2, 3, 7, 6, 8, 10, 11, 9};

inline dca::ConstraintGraph g12() {
  dca::ConstraintGraph g;
  g.add_nodes(kX0);
  for (auto [a, b] : kG12) g.try_add({a, b, {}});
  return g;
}

// Direct count of pairs (a,b) with a after b in the order.
inline std::size_t count_backwards(const std::vector<int> &order,
                                   const std::vector<std::pair<int, int>> &pairs) {
  std::size_t n = 0;
  for (auto [a, b] : pairs) {
    std::size_t ia = 0, ib = 0;
    for (std::size_t i = 0; i < order.size(); ++i) {
      if (order[i] == a) ia = i;
      if (order[i] == b) ib = i;
    }
    if (ia > ib) ++n;
  }
  return n;
}

}  // namespace testdata
