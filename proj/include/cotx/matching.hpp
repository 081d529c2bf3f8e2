// Copyright 2026 The cotx Authors
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <array>
#include <vector>

namespace cotx {

/// Edge (a, b) with a <= b; a == b is a self-loop covering vertex a once.
struct PairingEdge {
  int a = 0;
  int b = 0;
  double weight = 0.0;
};

/// AP pairing graph: physical APs as vertices, one edge per extended AP.
struct PairingGraph {
  int vertex_count = 0;
  std::vector<PairingEdge> edges;

  /// Throws Error on out-of-range vertices, a > b, or duplicate edges.
  void validate() const;
};

/// Indices into PairingGraph::edges (ascending) and their total weight.
struct Selection {
  std::vector<int> edges;
  double weight = 0.0;
};

/// Sum of the selected weights in ascending edge-index order.
double selection_weight(const PairingGraph& graph, const std::vector<int>& edges);

/// True when no vertex is covered twice.
bool is_feasible_selection(const PairingGraph& graph, const std::vector<int>& edges);

/// Exact maximum-weight edge set in which every vertex is covered at most once.
///
/// Self-loops are reduced to ordinary edges to a private clone vertex, non-positive edges are
/// dropped, and each connected component is solved with Edmonds' blossom algorithm on
/// integer-quantized weights.
Selection max_weight_selection(const PairingGraph& graph);

/// Exhaustive search over all feasible subsets. Test oracle; refuses graphs above max_edges.
Selection brute_force_selection(const PairingGraph& graph, int max_edges = 20);

namespace detail {

/// Maximum-weight (not necessarily maximum-cardinality) matching on a simple graph with
/// integer weights. Returns mate[v] or -1.
std::vector<int> blossom_matching(int vertex_count, const std::vector<std::array<long long, 3>>& edges);

}  // namespace detail

}  // namespace cotx
