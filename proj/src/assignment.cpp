#include "dca/assignment.hpp"

#include <algorithm>
#include <charconv>
#include <map>
#include <unordered_set>

#include "dca/error.hpp"

namespace dca {

Assignment::Assignment(std::vector<ElementId> order) : order_(std::move(order)) {
  if (order_.size() < 2) {
    throw Error(Errc::invalid_argument, "assignment needs at least 2 elements");
  }
  std::unordered_set<ElementId> seen;
  for (ElementId e : order_) {
    if (e <= 0) {
      throw Error(Errc::invalid_argument,
                  "element ids must be positive, got " + std::to_string(e));
    }
    if (!seen.insert(e).second) {
      throw Error(Errc::invalid_argument,
                  "element " + std::to_string(e) + " appears more than once");
    }
  }
}

Assignment Assignment::parse(std::string_view text) {
  std::vector<ElementId> order;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && (text[i] == ' ' || text[i] == '\t' || text[i] == ',')) ++i;
    if (i == text.size()) break;
    ElementId value = 0;
    auto [ptr, ec] = std::from_chars(text.data() + i, text.data() + text.size(), value);
    if (ec != std::errc()) {
      throw Error(Errc::invalid_argument,
                  "cannot parse assignment '" + std::string(text) + "'");
    }
    order.push_back(value);
    i = static_cast<std::size_t>(ptr - text.data());
  }
  return Assignment(std::move(order));
}

std::string Assignment::to_string() const {
  std::string out;
  for (std::size_t i = 0; i < order_.size(); ++i) {
    if (i) out += ' ';
    out += std::to_string(order_[i]);
  }
  return out;
}

ElementId Assignment::at(Rank r) const {
  if (r.value < 1 || r.value > order_.size()) {
    throw Error(Errc::invalid_rank, "rank " + std::to_string(r.value) +
                                        " outside 1.." + std::to_string(order_.size()));
  }
  return order_[r.value - 1];
}

bool Assignment::contains(ElementId e) const noexcept {
  return std::find(order_.begin(), order_.end(), e) != order_.end();
}

Rank Assignment::rank_of(ElementId e) const {
  auto it = std::find(order_.begin(), order_.end(), e);
  if (it == order_.end()) {
    throw Error(Errc::element_not_found,
                "element " + std::to_string(e) + " not in [" + to_string() + "]");
  }
  return Rank(static_cast<std::size_t>(it - order_.begin()) + 1);
}

bool Assignment::same_elements(const Assignment &other) const {
  if (order_.size() != other.order_.size()) return false;
  auto a = order_;
  auto b = other.order_;
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  return a == b;
}

Rank rank_of(const Assignment &x, ElementId e) { return x.rank_of(e); }

Assignment insertion_move(const Assignment &x, ElementId e, Rank r) {
  if (r.value < 1 || r.value > x.size()) {
    throw Error(Errc::invalid_rank, "target rank " + std::to_string(r.value) +
                                        " outside 1.." + std::to_string(x.size()));
  }
  const Rank from = x.rank_of(e);
  std::vector<ElementId> order(x.order().begin(), x.order().end());
  order.erase(order.begin() + static_cast<std::ptrdiff_t>(from.value - 1));
  order.insert(order.begin() + static_cast<std::ptrdiff_t>(r.value - 1), e);
  return Assignment(std::move(order));
}

std::optional<AdjacentSwap> adjacent_transposition_diff(const Assignment &a,
                                                        const Assignment &b) {
  if (!a.same_elements(b)) {
    throw Error(Errc::incompatible, "assignments [" + a.to_string() + "] and [" +
                                        b.to_string() + "] permute different elements");
  }
  const auto oa = a.order();
  const auto ob = b.order();
  std::size_t first = 0;
  while (first < oa.size() && oa[first] == ob[first]) ++first;
  if (first == oa.size() || first + 1 == oa.size()) return std::nullopt;
  if (oa[first] != ob[first + 1] || oa[first + 1] != ob[first]) return std::nullopt;
  for (std::size_t i = first + 2; i < oa.size(); ++i) {
    if (oa[i] != ob[i]) return std::nullopt;
  }
  return AdjacentSwap{{oa[first], oa[first + 1]}, Rank(first + 1)};
}

std::vector<Neighbor> enumerate_insertion_neighbors(const Assignment &x) {
  std::map<Assignment, MoveDescriptor> unique;
  for (ElementId e : x.order()) {
    const Rank from = x.rank_of(e);
    for (std::size_t r = 1; r <= x.size(); ++r) {
      if (r == from.value) continue;
      const std::size_t distance = r > from.value ? r - from.value : from.value - r;
      MoveDescriptor move{distance == 1 ? MoveKind::adjacent_transposition : MoveKind::insertion,
                          e, from, Rank(r)};
      auto next = insertion_move(x, e, Rank(r));
      auto [it, inserted] = unique.emplace(std::move(next), move);
      if (!inserted && move < it->second) it->second = move;
    }
  }
  std::vector<Neighbor> out;
  out.reserve(unique.size());
  for (auto &[assignment, move] : unique) out.push_back({move, assignment});
  return out;
}

}  // namespace dca
