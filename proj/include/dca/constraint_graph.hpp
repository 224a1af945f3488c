#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "dca/assignment.hpp"

namespace dca {

// Which tests induced a constraint, and by how much the fitter one won.
struct Evidence {
  int test_a = -1;
  int test_b = -1;
  double gap = 0.0;        // goal-difference units
  double threshold = 0.0;  // gate the gap had to exceed
};

// rho(before) < rho(after)
struct RankConstraint {
  ElementId before = 0;
  ElementId after = 0;
  Evidence evidence;
};

enum class AddOutcome { added, duplicate, redundant, cycle_rejected };

const char *outcome_name(AddOutcome outcome) noexcept;

// Induced partial order over element ranks. Core edges form a DAG; edges already
// implied by reachability when submitted go to a side list instead.
class ConstraintGraph {
 public:
  ConstraintGraph() = default;

  void add_node(ElementId e);
  template <class Range>
  void add_nodes(const Range &elements) {
    for (ElementId e : elements) add_node(e);
  }

  // Throws Error(invalid_constraint) on a self-loop.
  AddOutcome try_add(const RankConstraint &c);

  // True iff a directed path from -> to exists over core edges (from != to).
  bool reaches(ElementId from, ElementId to) const;
  bool has_edge(ElementId before, ElementId after) const;

  const std::set<ElementId> &nodes() const noexcept { return nodes_; }
  // Core edges in insertion order.
  const std::vector<RankConstraint> &edges() const noexcept { return edges_; }
  const std::vector<RankConstraint> &redundant() const noexcept { return redundant_; }
  bool empty() const noexcept { return edges_.empty(); }

  // Core edges ordered backwards in x. Throws Error(incompatible) if a node is
  // missing from x.
  std::size_t violations(const Assignment &x) const;
  bool satisfies(const Assignment &x) const { return violations(x) == 0; }

  // Minimal edge set with the same reachability; evidence is kept.
  ConstraintGraph transitive_reduction() const;

 private:
  std::set<ElementId> nodes_;
  std::vector<RankConstraint> edges_;
  std::vector<RankConstraint> redundant_;
  std::map<ElementId, std::set<ElementId>> successors_;
};

// k linear extensions of g over `elements` (which must cover g's nodes). Each
// draw is a random topological sort picking uniformly among available minima.
std::vector<Assignment> topological_orders_sample(const ConstraintGraph &g,
                                                  std::span<const ElementId> elements,
                                                  std::size_t k, std::uint64_t seed);

// Number of linear extensions, by dynamic programming over subsets (n <= 24).
std::uint64_t count_linear_extensions(const ConstraintGraph &g,
                                      std::span<const ElementId> elements);

// Visits every linear extension in lexicographic order. The visitor returns
// false to stop early.
void for_each_linear_extension(const ConstraintGraph &g, std::span<const ElementId> elements,
                               const std::function<bool(const Assignment &)> &visit);

// DOT text: declared node list, then one `i -> j;` line per edge, numerically sorted.
std::string to_dot(const ConstraintGraph &g);

// One `i < j # test_a,test_b gap=G thr=T` line per core edge.
std::string to_edge_list(const ConstraintGraph &g);
// Accepts the edge-list format; the `#` evidence comment is optional.
ConstraintGraph parse_edge_list(std::string_view text);

}  // namespace dca
