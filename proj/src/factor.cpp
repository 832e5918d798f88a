#include "factor.hpp"

#include <algorithm>
#include <limits>
#include <map>

namespace plif::detail {

namespace {

std::vector<std::size_t> strides_of(const std::vector<std::size_t>& cards) {
  std::vector<std::size_t> strides(cards.size(), 1);
  for (std::size_t i = cards.size(); i-- > 1;) strides[i - 1] = strides[i] * cards[i];
  return strides;
}

std::size_t position(const std::vector<int>& scope, int var) {
  auto it = std::lower_bound(scope.begin(), scope.end(), var);
  if (it == scope.end() || *it != var) return static_cast<std::size_t>(-1);
  return static_cast<std::size_t>(it - scope.begin());
}

}  // namespace

Factor restrict_to(const Factor& f, int var, std::size_t state) {
  const std::size_t pos = position(f.scope, var);
  if (pos == static_cast<std::size_t>(-1)) return f;
  const auto strides = strides_of(f.cards);
  const std::size_t stride = strides[pos];
  const std::size_t card = f.cards[pos];

  Factor out;
  out.scope = f.scope;
  out.cards = f.cards;
  out.scope.erase(out.scope.begin() + static_cast<std::ptrdiff_t>(pos));
  out.cards.erase(out.cards.begin() + static_cast<std::ptrdiff_t>(pos));
  out.values.reserve(f.values.size() / card);
  const std::size_t block = stride * card;
  for (std::size_t hi = 0; hi < f.values.size(); hi += block) {
    for (std::size_t lo = 0; lo < stride; ++lo) {
      out.values.push_back(f.values[hi + state * stride + lo]);
    }
  }
  return out;
}

Factor multiply(const Factor& a, const Factor& b) {
  Factor out;
  std::set_union(a.scope.begin(), a.scope.end(), b.scope.begin(), b.scope.end(),
                 std::back_inserter(out.scope));
  out.cards.resize(out.scope.size());
  for (std::size_t i = 0; i < out.scope.size(); ++i) {
    std::size_t pa = position(a.scope, out.scope[i]);
    out.cards[i] = pa != static_cast<std::size_t>(-1) ? a.cards[pa]
                                                      : b.cards[position(b.scope, out.scope[i])];
  }
  std::size_t total = 1;
  for (auto c : out.cards) total *= c;
  out.values.assign(total, 0.0);

  // Per output axis, the stride it contributes to each input (0 if absent).
  const auto sa = strides_of(a.cards);
  const auto sb = strides_of(b.cards);
  std::vector<std::size_t> step_a(out.scope.size(), 0), step_b(out.scope.size(), 0);
  for (std::size_t i = 0; i < out.scope.size(); ++i) {
    std::size_t pa = position(a.scope, out.scope[i]);
    std::size_t pb = position(b.scope, out.scope[i]);
    if (pa != static_cast<std::size_t>(-1)) step_a[i] = sa[pa];
    if (pb != static_cast<std::size_t>(-1)) step_b[i] = sb[pb];
  }

  std::vector<std::size_t> digit(out.scope.size(), 0);
  std::size_t ia = 0, ib = 0;
  for (std::size_t k = 0; k < total; ++k) {
    out.values[k] = a.values[ia] * b.values[ib];
    for (std::size_t d = out.scope.size(); d-- > 0;) {
      if (++digit[d] < out.cards[d]) {
        ia += step_a[d];
        ib += step_b[d];
        break;
      }
      digit[d] = 0;
      ia -= step_a[d] * (out.cards[d] - 1);
      ib -= step_b[d] * (out.cards[d] - 1);
    }
  }
  return out;
}

Factor sum_out(const Factor& f, int var) {
  const std::size_t pos = position(f.scope, var);
  if (pos == static_cast<std::size_t>(-1)) return f;
  const auto strides = strides_of(f.cards);
  const std::size_t stride = strides[pos];
  const std::size_t card = f.cards[pos];

  Factor out;
  out.scope = f.scope;
  out.cards = f.cards;
  out.scope.erase(out.scope.begin() + static_cast<std::ptrdiff_t>(pos));
  out.cards.erase(out.cards.begin() + static_cast<std::ptrdiff_t>(pos));
  out.values.assign(f.values.size() / card, 0.0);
  const std::size_t block = stride * card;
  std::size_t o = 0;
  for (std::size_t hi = 0; hi < f.values.size(); hi += block) {
    for (std::size_t lo = 0; lo < stride; ++lo, ++o) {
      double acc = 0.0;
      for (std::size_t s = 0; s < card; ++s) acc += f.values[hi + s * stride + lo];
      out.values[o] = acc;
    }
  }
  return out;
}

Factor eliminate_all_but(std::vector<Factor> factors, const std::vector<int>& keep) {
  auto kept = [&](int v) { return std::find(keep.begin(), keep.end(), v) != keep.end(); };

  for (;;) {
    // Candidate variables with their cardinalities.
    std::map<int, std::size_t> card_of;
    for (const auto& f : factors) {
      for (std::size_t i = 0; i < f.scope.size(); ++i) {
        if (!kept(f.scope[i])) card_of[f.scope[i]] = f.cards[i];
      }
    }
    if (card_of.empty()) break;

    // Greedy: the variable whose combined factor is smallest.
    int best = 0;
    std::size_t best_cost = std::numeric_limits<std::size_t>::max();
    for (const auto& [var, _] : card_of) {
      std::map<int, std::size_t> merged;
      for (const auto& f : factors) {
        if (!std::binary_search(f.scope.begin(), f.scope.end(), var)) continue;
        for (std::size_t i = 0; i < f.scope.size(); ++i) merged[f.scope[i]] = f.cards[i];
      }
      std::size_t cost = 1;
      for (const auto& [_, c] : merged) cost *= c;
      if (cost < best_cost) {
        best_cost = cost;
        best = var;
      }
    }

    Factor product = Factor::constant(1.0);
    std::vector<Factor> rest;
    rest.reserve(factors.size());
    for (auto& f : factors) {
      if (std::binary_search(f.scope.begin(), f.scope.end(), best)) {
        product = multiply(product, f);
      } else {
        rest.push_back(std::move(f));
      }
    }
    rest.push_back(sum_out(product, best));
    factors = std::move(rest);
  }

  Factor result = Factor::constant(1.0);
  for (const auto& f : factors) result = multiply(result, f);
  return result;
}

}  // namespace plif::detail
