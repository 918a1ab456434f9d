#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace ccssp {

/// Directed graph in compressed adjacency form.
struct Digraph {
  std::vector<std::size_t> offsets{0};
  std::vector<std::int32_t> targets;

  std::size_t num_vertices() const noexcept { return offsets.size() - 1; }
};

/// Strongly connected components listed sinks first (reverse topological
/// order of the condensation), so a component only points at earlier ones.
struct SccDecomposition {
  std::vector<std::int32_t> component;  // vertex -> component id
  std::vector<std::size_t> offsets{0};  // component id -> range in members
  std::vector<std::int32_t> members;

  std::size_t num_components() const noexcept { return offsets.size() - 1; }
};

SccDecomposition strongly_connected_components(const Digraph& g);

}  // namespace ccssp
