#include "dca/constraint_graph.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cstdio>
#include <sstream>

#include "dca/error.hpp"
#include "dca/rng.hpp"

namespace dca {

const char *outcome_name(AddOutcome outcome) noexcept {
  switch (outcome) {
    case AddOutcome::added: return "added";
    case AddOutcome::duplicate: return "duplicate";
    case AddOutcome::redundant: return "redundant";
    case AddOutcome::cycle_rejected: return "cycle-rejected";
  }
  return "unknown";
}

void ConstraintGraph::add_node(ElementId e) {
  if (e <= 0) throw Error(Errc::invalid_argument, "element ids must be positive");
  nodes_.insert(e);
}

bool ConstraintGraph::has_edge(ElementId before, ElementId after) const {
  auto it = successors_.find(before);
  return it != successors_.end() && it->second.count(after) > 0;
}

bool ConstraintGraph::reaches(ElementId from, ElementId to) const {
  if (from == to) return false;
  std::vector<ElementId> stack{from};
  std::set<ElementId> seen{from};
  while (!stack.empty()) {
    const ElementId u = stack.back();
    stack.pop_back();
    auto it = successors_.find(u);
    if (it == successors_.end()) continue;
    for (ElementId v : it->second) {
      if (v == to) return true;
      if (seen.insert(v).second) stack.push_back(v);
    }
  }
  return false;
}

AddOutcome ConstraintGraph::try_add(const RankConstraint &c) {
  if (c.before == c.after) {
    throw Error(Errc::invalid_constraint,
                "self-loop constraint on element " + std::to_string(c.before));
  }
  add_node(c.before);
  add_node(c.after);
  if (has_edge(c.before, c.after)) return AddOutcome::duplicate;
  for (const auto &r : redundant_) {
    if (r.before == c.before && r.after == c.after) return AddOutcome::duplicate;
  }
  if (reaches(c.after, c.before)) return AddOutcome::cycle_rejected;
  if (reaches(c.before, c.after)) {
    redundant_.push_back(c);
    return AddOutcome::redundant;
  }
  edges_.push_back(c);
  successors_[c.before].insert(c.after);
  return AddOutcome::added;
}

std::size_t ConstraintGraph::violations(const Assignment &x) const {
  for (ElementId e : nodes_) {
    if (!x.contains(e)) {
      throw Error(Errc::incompatible, "constraint node " + std::to_string(e) +
                                          " missing from [" + x.to_string() + "]");
    }
  }
  std::size_t count = 0;
  for (const auto &c : edges_) {
    if (x.rank_of(c.before) > x.rank_of(c.after)) ++count;
  }
  return count;
}

ConstraintGraph ConstraintGraph::transitive_reduction() const {
  ConstraintGraph out;
  out.nodes_ = nodes_;
  for (const auto &c : edges_) {
    // Implied iff some other successor of `before` reaches `after`.
    bool implied = false;
    for (ElementId mid : successors_.at(c.before)) {
      if (mid != c.after && reaches(mid, c.after)) {
        implied = true;
        break;
      }
    }
    if (!implied) {
      out.edges_.push_back(c);
      out.successors_[c.before].insert(c.after);
    }
  }
  return out;
}

namespace {

struct IndexedOrder {
  std::vector<ElementId> elements;        // sorted
  std::vector<std::uint32_t> pred_mask;   // bit j set: element j must precede i
};

IndexedOrder index_order(const ConstraintGraph &g, std::span<const ElementId> elements) {
  IndexedOrder idx;
  idx.elements.assign(elements.begin(), elements.end());
  std::sort(idx.elements.begin(), idx.elements.end());
  if (std::adjacent_find(idx.elements.begin(), idx.elements.end()) != idx.elements.end()) {
    throw Error(Errc::invalid_argument, "duplicate element in element set");
  }
  if (idx.elements.size() > 24) {
    throw Error(Errc::too_large, "linear-extension routines support at most 24 elements");
  }
  auto index_of = [&](ElementId e) -> std::size_t {
    auto it = std::lower_bound(idx.elements.begin(), idx.elements.end(), e);
    if (it == idx.elements.end() || *it != e) {
      throw Error(Errc::incompatible,
                  "constraint node " + std::to_string(e) + " not in the element set");
    }
    return static_cast<std::size_t>(it - idx.elements.begin());
  };
  idx.pred_mask.assign(idx.elements.size(), 0);
  for (ElementId e : g.nodes()) index_of(e);
  for (const auto &c : g.edges()) {
    idx.pred_mask[index_of(c.after)] |= 1u << index_of(c.before);
  }
  return idx;
}

}  // namespace

std::vector<Assignment> topological_orders_sample(const ConstraintGraph &g,
                                                  std::span<const ElementId> elements,
                                                  std::size_t k, std::uint64_t seed) {
  if (k == 0) throw Error(Errc::invalid_argument, "sample size must be >= 1");
  const auto idx = index_order(g, elements);
  const std::size_t n = idx.elements.size();
  Rng rng(seed);
  std::vector<Assignment> out;
  out.reserve(k);
  for (std::size_t draw = 0; draw < k; ++draw) {
    std::uint32_t placed = 0;
    std::vector<ElementId> order;
    order.reserve(n);
    for (std::size_t step = 0; step < n; ++step) {
      std::vector<std::size_t> available;
      for (std::size_t i = 0; i < n; ++i) {
        if (!(placed >> i & 1u) && (idx.pred_mask[i] & ~placed) == 0) available.push_back(i);
      }
      const std::size_t pick = available[rng.below(available.size())];
      placed |= 1u << pick;
      order.push_back(idx.elements[pick]);
    }
    out.emplace_back(std::move(order));
  }
  return out;
}

std::uint64_t count_linear_extensions(const ConstraintGraph &g,
                                      std::span<const ElementId> elements) {
  const auto idx = index_order(g, elements);
  const std::size_t n = idx.elements.size();
  std::vector<std::uint64_t> ways(std::size_t{1} << n, 0);
  ways[0] = 1;
  for (std::uint32_t placed = 0; placed < ways.size(); ++placed) {
    if (!ways[placed]) continue;
    for (std::size_t i = 0; i < n; ++i) {
      if (!(placed >> i & 1u) && (idx.pred_mask[i] & ~placed) == 0) {
        ways[placed | (1u << i)] += ways[placed];
      }
    }
  }
  return ways.back();
}

void for_each_linear_extension(const ConstraintGraph &g, std::span<const ElementId> elements,
                               const std::function<bool(const Assignment &)> &visit) {
  const auto idx = index_order(g, elements);
  const std::size_t n = idx.elements.size();
  std::vector<ElementId> order;
  order.reserve(n);
  bool stop = false;
  std::function<void(std::uint32_t)> extend = [&](std::uint32_t placed) {
    if (order.size() == n) {
      stop = !visit(Assignment(order));
      return;
    }
    // Ascending index order yields lexicographic output.
    for (std::size_t i = 0; i < n && !stop; ++i) {
      if (!(placed >> i & 1u) && (idx.pred_mask[i] & ~placed) == 0) {
        order.push_back(idx.elements[i]);
        extend(placed | (1u << i));
        order.pop_back();
      }
    }
  };
  extend(0);
}

namespace {

std::vector<RankConstraint> sorted_edges(const ConstraintGraph &g) {
  auto edges = g.edges();
  std::sort(edges.begin(), edges.end(), [](const RankConstraint &a, const RankConstraint &b) {
    return std::pair(a.before, a.after) < std::pair(b.before, b.after);
  });
  return edges;
}

std::string format_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

}  // namespace

std::string to_dot(const ConstraintGraph &g) {
  std::ostringstream out;
  out << "digraph constraints {\n";
  for (ElementId e : g.nodes()) out << "  " << e << ";\n";
  for (const auto &c : sorted_edges(g)) out << "  " << c.before << " -> " << c.after << ";\n";
  out << "}\n";
  return out.str();
}

std::string to_edge_list(const ConstraintGraph &g) {
  std::ostringstream out;
  for (const auto &c : g.edges()) {
    out << c.before << " < " << c.after << " # " << c.evidence.test_a << ','
        << c.evidence.test_b << " gap=" << format_number(c.evidence.gap)
        << " thr=" << format_number(c.evidence.threshold) << '\n';
  }
  return out.str();
}

ConstraintGraph parse_edge_list(std::string_view text) {
  ConstraintGraph g;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    std::string head = line.substr(0, hash);
    std::string comment = hash == std::string::npos ? "" : line.substr(hash + 1);
    if (head.find_first_not_of(" \t\r") == std::string::npos) continue;
    RankConstraint c;
    char lt = 0;
    std::istringstream fields(head);
    std::string rest;
    if (!(fields >> c.before >> lt >> c.after) || lt != '<' || (fields >> rest)) {
      throw Error(Errc::invalid_argument,
                  "edge list line " + std::to_string(line_no) + ": expected 'i < j'");
    }
    if (!comment.empty()) {
      std::sscanf(comment.c_str(), " %d,%d gap=%lf thr=%lf", &c.evidence.test_a,
                  &c.evidence.test_b, &c.evidence.gap, &c.evidence.threshold);
    }
    if (g.try_add(c) == AddOutcome::cycle_rejected) {
      throw Error(Errc::invalid_constraint,
                  "edge list line " + std::to_string(line_no) + ": constraint closes a cycle");
    }
  }
  return g;
}

}  // namespace dca
