#pragma once

#include <compare>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace dca {

using ElementId = int;

// 1-based position within an Assignment.
struct Rank {
  std::size_t value = 1;

  constexpr Rank() = default;
  constexpr explicit Rank(std::size_t v) : value(v) {}
  friend constexpr auto operator<=>(Rank, Rank) = default;
};

// A permutation of distinct positive element ids; immutable value type.
class Assignment {
 public:
  // Throws Error(invalid_argument) unless order has >= 2 distinct ids, all > 0.
  explicit Assignment(std::vector<ElementId> order);

  // Space-separated integers, e.g. "2 3 10 11 9 6 4 5 7 8".
  static Assignment parse(std::string_view text);
  std::string to_string() const;

  std::size_t size() const noexcept { return order_.size(); }
  std::span<const ElementId> order() const noexcept { return order_; }
  ElementId at(Rank r) const;
  bool contains(ElementId e) const noexcept;
  Rank rank_of(ElementId e) const;
  // True iff other permutes the same element set.
  bool same_elements(const Assignment &other) const;

  friend bool operator==(const Assignment &, const Assignment &) = default;
  friend auto operator<=>(const Assignment &a, const Assignment &b) {
    return a.order_ <=> b.order_;
  }

 private:
  std::vector<ElementId> order_;
};

enum class MoveKind { insertion, adjacent_transposition };

struct MoveDescriptor {
  MoveKind kind = MoveKind::insertion;
  ElementId element = 0;
  Rank from_rank;
  Rank to_rank;

  friend auto operator<=>(const MoveDescriptor &, const MoveDescriptor &) = default;
};

struct AdjacentSwap {
  // Elements at ranks r and r+1 of the first argument.
  std::pair<ElementId, ElementId> pair;
  Rank rank;

  friend bool operator==(const AdjacentSwap &, const AdjacentSwap &) = default;
};

Rank rank_of(const Assignment &x, ElementId e);

// Removes e and reinserts it so that it lands at rank r.
Assignment insertion_move(const Assignment &x, ElementId e, Rank r);

// Returns the swapped pair if a and b differ by one adjacent transposition.
std::optional<AdjacentSwap> adjacent_transposition_diff(const Assignment &a,
                                                        const Assignment &b);

struct Neighbor {
  MoveDescriptor move;
  Assignment assignment;
};

// All distinct assignments one insertion move away from x, sorted by
// assignment. Adjacent moves reachable two ways keep the smaller descriptor.
std::vector<Neighbor> enumerate_insertion_neighbors(const Assignment &x);

}  // namespace dca
