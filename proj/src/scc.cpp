#include "ccssp/scc.hpp"

#include <algorithm>
#include <limits>

namespace ccssp {

// Iterative Tarjan.
SccDecomposition strongly_connected_components(const Digraph& g) {
  const std::size_t n = g.num_vertices();
  constexpr std::int32_t kUnvisited = -1;
  std::vector<std::int32_t> index(n, kUnvisited), low(n, 0);
  std::vector<char> on_stack(n, 0);
  std::vector<std::int32_t> stack;
  std::vector<std::pair<std::int32_t, std::size_t>> call;  // vertex, next edge

  SccDecomposition out;
  out.component.assign(n, -1);
  out.members.reserve(n);
  std::int32_t counter = 0;

  for (std::size_t root = 0; root < n; ++root) {
    if (index[root] != kUnvisited) continue;
    call.emplace_back(static_cast<std::int32_t>(root), g.offsets[root]);
    index[root] = low[root] = counter++;
    stack.push_back(static_cast<std::int32_t>(root));
    on_stack[root] = 1;

    while (!call.empty()) {
      auto& [v, e] = call.back();
      if (e < g.offsets[v + 1]) {
        const std::int32_t w = g.targets[e++];
        if (index[w] == kUnvisited) {
          index[w] = low[w] = counter++;
          stack.push_back(w);
          on_stack[w] = 1;
          call.emplace_back(w, g.offsets[w]);
        } else if (on_stack[w]) {
          low[v] = std::min(low[v], index[w]);
        }
        continue;
      }
      const std::int32_t done = v;
      call.pop_back();
      if (!call.empty()) {
        const std::int32_t parent = call.back().first;
        low[parent] = std::min(low[parent], low[done]);
      }
      if (low[done] == index[done]) {
        const auto id = static_cast<std::int32_t>(out.num_components());
        std::int32_t w;
        do {
          w = stack.back();
          stack.pop_back();
          on_stack[w] = 0;
          out.component[w] = id;
          out.members.push_back(w);
        } while (w != done);
        std::sort(out.members.begin() + static_cast<std::ptrdiff_t>(out.offsets.back()),
                  out.members.end());
        out.offsets.push_back(out.members.size());
      }
    }
  }
  return out;
}

}  // namespace ccssp
