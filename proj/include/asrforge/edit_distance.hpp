#pragma once

#include <cstdint>
#include <vector>

namespace asrforge {

struct EditCounts {
  long distance = 0;
  long substitutions = 0;
  long insertions = 0;
  long deletions = 0;
};

// Levenshtein distance with unit costs and deterministic S/I/D attribution:
// on ties a substitution is preferred over an insert+delete pair, then a
// deletion over an insertion.
template <typename Token>
EditCounts edit_distance(const std::vector<Token>& ref, const std::vector<Token>& hyp) {
  const std::size_t n = ref.size();
  const std::size_t m = hyp.size();

  struct Cell {
    long d, s, i, del;
  };
  std::vector<Cell> prev(m + 1), cur(m + 1);
  for (std::size_t j = 0; j <= m; ++j) prev[j] = {static_cast<long>(j), 0, static_cast<long>(j), 0};

  for (std::size_t i = 1; i <= n; ++i) {
    cur[0] = {static_cast<long>(i), 0, 0, static_cast<long>(i)};
    for (std::size_t j = 1; j <= m; ++j) {
      const bool match = ref[i - 1] == hyp[j - 1];
      const long diag_cost = prev[j - 1].d + (match ? 0 : 1);
      const long del_cost = prev[j].d + 1;
      const long ins_cost = cur[j - 1].d + 1;

      if (diag_cost <= del_cost && diag_cost <= ins_cost) {
        cur[j] = prev[j - 1];
        cur[j].d = diag_cost;
        if (!match) ++cur[j].s;
      } else if (del_cost <= ins_cost) {
        cur[j] = prev[j];
        cur[j].d = del_cost;
        ++cur[j].del;
      } else {
        cur[j] = cur[j - 1];
        cur[j].d = ins_cost;
        ++cur[j].i;
      }
    }
    std::swap(prev, cur);
  }
  return {prev[m].d, prev[m].s, prev[m].i, prev[m].del};
}

}  // namespace asrforge
