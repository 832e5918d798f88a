#pragma once

// Dense discrete factors and sum-product variable elimination.  Variables
// are small integers; a factor's scope is kept sorted and its table is laid
// out with the last scope variable varying fastest.

#include <cstddef>
#include <vector>

namespace plif::detail {

struct Factor {
  std::vector<int> scope;          // sorted variable ids
  std::vector<std::size_t> cards;  // parallel to scope
  std::vector<double> values;

  static Factor constant(double value) { return Factor{{}, {}, {value}}; }
  std::size_t size() const { return values.size(); }
};

// Fix `var` to `state`, dropping it from the scope.  No-op if absent.
Factor restrict_to(const Factor& f, int var, std::size_t state);

Factor multiply(const Factor& a, const Factor& b);

Factor sum_out(const Factor& f, int var);

// Eliminates every variable not in `keep` (greedy min-size order, ties by
// id) and returns the product of what remains, with scope == keep ∩ present.
Factor eliminate_all_but(std::vector<Factor> factors, const std::vector<int>& keep);

}  // namespace plif::detail
