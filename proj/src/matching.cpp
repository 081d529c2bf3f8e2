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

#include "cotx/matching.hpp"

#include "cotx/types.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <utility>

namespace cotx {
namespace detail {
namespace {

// Primal-dual O(V^3) weighted matching (Galil's formulation of Edmonds' algorithm).
// Duals of vertices start at the max weight; slack(k) = u_i + u_j - 2 w_k, which keeps every
// quantity integral for integer weights.
class Blossom {
 public:
  Blossom(int nvertex, const std::vector<std::array<long long, 3>>& edges)
      : nv_(nvertex), edges_(edges), ne_(static_cast<int>(edges.size())) {
    long long maxweight = 0;
    for (const auto& e : edges_) maxweight = std::max(maxweight, e[2]);
    endpoint_.resize(2 * ne_);
    for (int p = 0; p < 2 * ne_; ++p) endpoint_[p] = static_cast<int>(edges_[p / 2][p % 2]);
    neighbend_.assign(nv_, {});
    for (int k = 0; k < ne_; ++k) {
      neighbend_[edges_[k][0]].push_back(2 * k + 1);
      neighbend_[edges_[k][1]].push_back(2 * k);
    }
    mate_.assign(nv_, -1);
    label_.assign(2 * nv_, 0);
    labelend_.assign(2 * nv_, -1);
    inblossom_.resize(nv_);
    std::iota(inblossom_.begin(), inblossom_.end(), 0);
    blossomparent_.assign(2 * nv_, -1);
    blossomchilds_.assign(2 * nv_, {});
    blossombase_.assign(2 * nv_, -1);
    std::iota(blossombase_.begin(), blossombase_.begin() + nv_, 0);
    blossomendps_.assign(2 * nv_, {});
    bestedge_.assign(2 * nv_, -1);
    blossombestedges_.assign(2 * nv_, {});
    has_bestedges_.assign(2 * nv_, false);
    for (int b = 2 * nv_ - 1; b >= nv_; --b) unused_.push_back(b);
    dualvar_.assign(2 * nv_, 0);
    std::fill(dualvar_.begin(), dualvar_.begin() + nv_, maxweight);
    allowedge_.assign(ne_, false);
  }

  std::vector<int> solve() {
    for (int stage = 0; stage < nv_; ++stage) {
      std::fill(label_.begin(), label_.end(), 0);
      std::fill(bestedge_.begin(), bestedge_.end(), -1);
      for (int b = nv_; b < 2 * nv_; ++b) {
        blossombestedges_[b].clear();
        has_bestedges_[b] = false;
      }
      std::fill(allowedge_.begin(), allowedge_.end(), false);
      queue_.clear();
      for (int v = 0; v < nv_; ++v) {
        if (mate_[v] == -1 && label_[inblossom_[v]] == 0) assign_label(v, 1, -1);
      }
      bool augmented = false;
      while (true) {
        while (!queue_.empty() && !augmented) {
          const int v = queue_.back();
          queue_.pop_back();
          for (int p : neighbend_[v]) {
            const int k = p / 2;
            const int w = endpoint_[p];
            if (inblossom_[v] == inblossom_[w]) continue;
            long long kslack = 0;
            if (!allowedge_[k]) {
              kslack = slack(k);
              if (kslack <= 0) allowedge_[k] = true;
            }
            if (allowedge_[k]) {
              if (label_[inblossom_[w]] == 0) {
                assign_label(w, 2, p ^ 1);
              } else if (label_[inblossom_[w]] == 1) {
                const int base = scan_blossom(v, w);
                if (base >= 0) {
                  add_blossom(base, k);
                } else {
                  augment_matching(k);
                  augmented = true;
                  break;
                }
              } else if (label_[w] == 0) {
                label_[w] = 2;
                labelend_[w] = p ^ 1;
              }
            } else if (label_[inblossom_[w]] == 1) {
              const int b = inblossom_[v];
              if (bestedge_[b] == -1 || kslack < slack(bestedge_[b])) bestedge_[b] = k;
            } else if (label_[w] == 0) {
              if (bestedge_[w] == -1 || kslack < slack(bestedge_[w])) bestedge_[w] = k;
            }
          }
        }
        if (augmented) break;

        int deltatype = 1;
        long long delta = *std::min_element(dualvar_.begin(), dualvar_.begin() + nv_);
        int deltaedge = -1;
        int deltablossom = -1;
        for (int v = 0; v < nv_; ++v) {
          if (label_[inblossom_[v]] == 0 && bestedge_[v] != -1) {
            const long long d = slack(bestedge_[v]);
            if (d < delta) {
              delta = d;
              deltatype = 2;
              deltaedge = bestedge_[v];
            }
          }
        }
        for (int b = 0; b < 2 * nv_; ++b) {
          if (blossomparent_[b] == -1 && label_[b] == 1 && bestedge_[b] != -1) {
            const long long d = slack(bestedge_[b]) / 2;
            if (d < delta) {
              delta = d;
              deltatype = 3;
              deltaedge = bestedge_[b];
            }
          }
        }
        for (int b = nv_; b < 2 * nv_; ++b) {
          if (blossombase_[b] >= 0 && blossomparent_[b] == -1 && label_[b] == 2 && dualvar_[b] < delta) {
            delta = dualvar_[b];
            deltatype = 4;
            deltablossom = b;
          }
        }
        for (int v = 0; v < nv_; ++v) {
          if (label_[inblossom_[v]] == 1) {
            dualvar_[v] -= delta;
          } else if (label_[inblossom_[v]] == 2) {
            dualvar_[v] += delta;
          }
        }
        for (int b = nv_; b < 2 * nv_; ++b) {
          if (blossombase_[b] >= 0 && blossomparent_[b] == -1) {
            if (label_[b] == 1) {
              dualvar_[b] += delta;
            } else if (label_[b] == 2) {
              dualvar_[b] -= delta;
            }
          }
        }
        if (deltatype == 1) break;
        if (deltatype == 2) {
          allowedge_[deltaedge] = true;
          int i = static_cast<int>(edges_[deltaedge][0]);
          int j = static_cast<int>(edges_[deltaedge][1]);
          if (label_[inblossom_[i]] == 0) std::swap(i, j);
          queue_.push_back(i);
        } else if (deltatype == 3) {
          allowedge_[deltaedge] = true;
          queue_.push_back(static_cast<int>(edges_[deltaedge][0]));
        } else {
          expand_blossom(deltablossom, false);
        }
      }
      if (!augmented) break;
      for (int b = nv_; b < 2 * nv_; ++b) {
        if (blossomparent_[b] == -1 && blossombase_[b] >= 0 && label_[b] == 1 && dualvar_[b] == 0) {
          expand_blossom(b, true);
        }
      }
    }
    std::vector<int> out(nv_, -1);
    for (int v = 0; v < nv_; ++v) {
      if (mate_[v] >= 0) out[v] = endpoint_[mate_[v]];
    }
    return out;
  }

 private:
  long long slack(int k) const { return dualvar_[edges_[k][0]] + dualvar_[edges_[k][1]] - 2 * edges_[k][2]; }

  void leaves(int b, std::vector<int>& out) const {
    if (b < nv_) {
      out.push_back(b);
      return;
    }
    for (int t : blossomchilds_[b]) leaves(t, out);
  }

  std::vector<int> leaves(int b) const {
    std::vector<int> out;
    leaves(b, out);
    return out;
  }

  void assign_label(int w, int t, int p) {
    const int b = inblossom_[w];
    label_[w] = label_[b] = t;
    labelend_[w] = labelend_[b] = p;
    bestedge_[w] = bestedge_[b] = -1;
    if (t == 1) {
      leaves(b, queue_);
    } else if (t == 2) {
      const int base = blossombase_[b];
      assign_label(endpoint_[mate_[base]], 1, mate_[base] ^ 1);
    }
  }

  int scan_blossom(int v, int w) {
    std::vector<int> path;
    int base = -1;
    while (v != -1 || w != -1) {
      int b = inblossom_[v];
      if (label_[b] & 4) {
        base = blossombase_[b];
        break;
      }
      path.push_back(b);
      label_[b] = 5;
      if (labelend_[b] == -1) {
        v = -1;
      } else {
        v = endpoint_[labelend_[b]];
        b = inblossom_[v];
        v = endpoint_[labelend_[b]];
      }
      if (w != -1) std::swap(v, w);
    }
    for (int b : path) label_[b] = 1;
    return base;
  }

  void add_blossom(int base, int k) {
    int v = static_cast<int>(edges_[k][0]);
    int w = static_cast<int>(edges_[k][1]);
    const int bb = inblossom_[base];
    int bv = inblossom_[v];
    int bw = inblossom_[w];
    const int b = unused_.back();
    unused_.pop_back();
    blossombase_[b] = base;
    blossomparent_[b] = -1;
    blossomparent_[bb] = b;
    std::vector<int> path;
    std::vector<int> endps;
    while (bv != bb) {
      blossomparent_[bv] = b;
      path.push_back(bv);
      endps.push_back(labelend_[bv]);
      v = endpoint_[labelend_[bv]];
      bv = inblossom_[v];
    }
    path.push_back(bb);
    std::reverse(path.begin(), path.end());
    std::reverse(endps.begin(), endps.end());
    endps.push_back(2 * k);
    while (bw != bb) {
      blossomparent_[bw] = b;
      path.push_back(bw);
      endps.push_back(labelend_[bw] ^ 1);
      w = endpoint_[labelend_[bw]];
      bw = inblossom_[w];
    }
    blossomchilds_[b] = path;
    blossomendps_[b] = endps;
    label_[b] = 1;
    labelend_[b] = labelend_[bb];
    dualvar_[b] = 0;
    for (int leaf : leaves(b)) {
      if (label_[inblossom_[leaf]] == 2) queue_.push_back(leaf);
      inblossom_[leaf] = b;
    }
    std::vector<int> bestedgeto(2 * nv_, -1);
    for (int child : path) {
      std::vector<std::vector<int>> nblists;
      if (!has_bestedges_[child]) {
        for (int leaf : leaves(child)) {
          std::vector<int> lst;
          for (int p : neighbend_[leaf]) lst.push_back(p / 2);
          nblists.push_back(std::move(lst));
        }
      } else {
        nblists.push_back(blossombestedges_[child]);
      }
      for (const auto& nblist : nblists) {
        for (int kk : nblist) {
          int i = static_cast<int>(edges_[kk][0]);
          int j = static_cast<int>(edges_[kk][1]);
          if (inblossom_[j] == b) std::swap(i, j);
          const int bj = inblossom_[j];
          if (bj != b && label_[bj] == 1 && (bestedgeto[bj] == -1 || slack(kk) < slack(bestedgeto[bj]))) {
            bestedgeto[bj] = kk;
          }
        }
      }
      blossombestedges_[child].clear();
      has_bestedges_[child] = false;
      bestedge_[child] = -1;
    }
    blossombestedges_[b].clear();
    for (int kk : bestedgeto) {
      if (kk != -1) blossombestedges_[b].push_back(kk);
    }
    has_bestedges_[b] = true;
    bestedge_[b] = -1;
    for (int kk : blossombestedges_[b]) {
      if (bestedge_[b] == -1 || slack(kk) < slack(bestedge_[b])) bestedge_[b] = kk;
    }
  }

  void expand_blossom(int b, bool endstage) {
    for (int s : blossomchilds_[b]) {
      blossomparent_[s] = -1;
      if (s < nv_) {
        inblossom_[s] = s;
      } else if (endstage && dualvar_[s] == 0) {
        expand_blossom(s, endstage);
      } else {
        for (int leaf : leaves(s)) inblossom_[leaf] = s;
      }
    }
    if (!endstage && label_[b] == 2) {
      const auto& childs = blossomchilds_[b];
      const auto& endps = blossomendps_[b];
      const int len = static_cast<int>(childs.size());
      auto at = [len](const std::vector<int>& xs, int idx) { return xs[((idx % len) + len) % len]; };
      const int entrychild = inblossom_[endpoint_[labelend_[b] ^ 1]];
      int j = static_cast<int>(std::find(childs.begin(), childs.end(), entrychild) - childs.begin());
      int jstep;
      int endptrick;
      if (j & 1) {
        j -= len;
        jstep = 1;
        endptrick = 0;
      } else {
        jstep = -1;
        endptrick = 1;
      }
      int p = labelend_[b];
      while (j != 0) {
        label_[endpoint_[p ^ 1]] = 0;
        label_[endpoint_[at(endps, j - endptrick) ^ endptrick ^ 1]] = 0;
        assign_label(endpoint_[p ^ 1], 2, p);
        allowedge_[at(endps, j - endptrick) / 2] = true;
        j += jstep;
        p = at(endps, j - endptrick) ^ endptrick;
        allowedge_[p / 2] = true;
        j += jstep;
      }
      int bv = at(childs, j);
      label_[endpoint_[p ^ 1]] = label_[bv] = 2;
      labelend_[endpoint_[p ^ 1]] = labelend_[bv] = p;
      bestedge_[bv] = -1;
      j += jstep;
      while (at(childs, j) != entrychild) {
        bv = at(childs, j);
        if (label_[bv] == 1) {
          j += jstep;
          continue;
        }
        int found = -1;
        for (int leaf : leaves(bv)) {
          if (label_[leaf] != 0) {
            found = leaf;
            break;
          }
        }
        if (found >= 0) {
          label_[found] = 0;
          label_[endpoint_[mate_[blossombase_[bv]]]] = 0;
          assign_label(found, 2, labelend_[found]);
        }
        j += jstep;
      }
    }
    label_[b] = labelend_[b] = -1;
    blossomchilds_[b].clear();
    blossomendps_[b].clear();
    blossombase_[b] = -1;
    blossombestedges_[b].clear();
    has_bestedges_[b] = false;
    bestedge_[b] = -1;
    unused_.push_back(b);
  }

  void augment_blossom(int b, int v) {
    int t = v;
    while (blossomparent_[t] != b) t = blossomparent_[t];
    if (t >= nv_) augment_blossom(t, v);
    auto& childs = blossomchilds_[b];
    auto& endps = blossomendps_[b];
    const int len = static_cast<int>(childs.size());
    auto at = [len](const std::vector<int>& xs, int idx) { return xs[((idx % len) + len) % len]; };
    const int i = static_cast<int>(std::find(childs.begin(), childs.end(), t) - childs.begin());
    int j = i;
    int jstep;
    int endptrick;
    if (i & 1) {
      j -= len;
      jstep = 1;
      endptrick = 0;
    } else {
      jstep = -1;
      endptrick = 1;
    }
    while (j != 0) {
      j += jstep;
      t = at(childs, j);
      const int p = at(endps, j - endptrick) ^ endptrick;
      if (t >= nv_) augment_blossom(t, endpoint_[p]);
      j += jstep;
      t = at(childs, j);
      if (t >= nv_) augment_blossom(t, endpoint_[p ^ 1]);
      mate_[endpoint_[p]] = p ^ 1;
      mate_[endpoint_[p ^ 1]] = p;
    }
    std::rotate(childs.begin(), childs.begin() + i, childs.end());
    std::rotate(endps.begin(), endps.begin() + i, endps.end());
    blossombase_[b] = blossombase_[childs[0]];
  }

  void augment_matching(int k) {
    const int v = static_cast<int>(edges_[k][0]);
    const int w = static_cast<int>(edges_[k][1]);
    for (auto [s, p] : {std::pair{v, 2 * k + 1}, std::pair{w, 2 * k}}) {
      while (true) {
        const int bs = inblossom_[s];
        if (bs >= nv_) augment_blossom(bs, s);
        mate_[s] = p;
        if (labelend_[bs] == -1) break;
        const int t = endpoint_[labelend_[bs]];
        const int bt = inblossom_[t];
        s = endpoint_[labelend_[bt]];
        const int j = endpoint_[labelend_[bt] ^ 1];
        if (bt >= nv_) augment_blossom(bt, j);
        mate_[j] = labelend_[bt];
        p = labelend_[bt] ^ 1;
      }
    }
  }

  int nv_;
  const std::vector<std::array<long long, 3>>& edges_;
  int ne_;
  std::vector<int> endpoint_;
  std::vector<std::vector<int>> neighbend_;
  std::vector<int> mate_;
  std::vector<int> label_;
  std::vector<int> labelend_;
  std::vector<int> inblossom_;
  std::vector<int> blossomparent_;
  std::vector<std::vector<int>> blossomchilds_;
  std::vector<int> blossombase_;
  std::vector<std::vector<int>> blossomendps_;
  std::vector<int> bestedge_;
  std::vector<std::vector<int>> blossombestedges_;
  std::vector<bool> has_bestedges_;
  std::vector<int> unused_;
  std::vector<long long> dualvar_;
  std::vector<bool> allowedge_;
  std::vector<int> queue_;
};

}  // namespace

std::vector<int> blossom_matching(int vertex_count, const std::vector<std::array<long long, 3>>& edges) {
  if (vertex_count == 0 || edges.empty()) return std::vector<int>(vertex_count, -1);
  return Blossom(vertex_count, edges).solve();
}

}  // namespace detail

void PairingGraph::validate() const {
  if (vertex_count < 0) throw Error("pairing graph: negative vertex count");
  std::set<std::pair<int, int>> seen;
  for (const auto& e : edges) {
    if (e.a < 0 || e.b >= vertex_count || e.a > e.b) throw Error("pairing graph: bad edge endpoints");
    if (!std::isfinite(e.weight)) throw Error("pairing graph: non-finite weight");
    if (!seen.emplace(e.a, e.b).second) throw Error("pairing graph: duplicate edge");
  }
}

double selection_weight(const PairingGraph& graph, const std::vector<int>& edges) {
  std::vector<int> sorted = edges;
  std::sort(sorted.begin(), sorted.end());
  double w = 0.0;
  for (int k : sorted) w += graph.edges[k].weight;
  return w;
}

bool is_feasible_selection(const PairingGraph& graph, const std::vector<int>& edges) {
  std::vector<int> cover(graph.vertex_count, 0);
  for (int k : edges) {
    const auto& e = graph.edges[k];
    if (++cover[e.a] > 1) return false;
    if (e.b != e.a && ++cover[e.b] > 1) return false;
  }
  return true;
}

Selection max_weight_selection(const PairingGraph& graph) {
  graph.validate();
  Selection out;
  const int n = graph.vertex_count;

  std::vector<int> positive;
  double max_w = 0.0;
  for (int k = 0; k < static_cast<int>(graph.edges.size()); ++k) {
    if (graph.edges[k].weight > 0.0) {
      positive.push_back(k);
      max_w = std::max(max_w, graph.edges[k].weight);
    }
  }
  if (positive.empty()) return out;
  std::sort(positive.begin(), positive.end(), [&](int x, int y) {
    const auto& ex = graph.edges[x];
    const auto& ey = graph.edges[y];
    return std::tie(ex.a, ex.b) < std::tie(ey.a, ey.b);
  });

  // Components over positive edges.
  std::vector<int> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (int k : positive) parent[find(graph.edges[k].a)] = find(graph.edges[k].b);

  std::vector<std::vector<int>> comp_edges(n);
  for (int k : positive) comp_edges[find(graph.edges[k].a)].push_back(k);

  std::vector<int> local(n, -1);
  for (int root = 0; root < n; ++root) {
    const auto& ks = comp_edges[root];
    if (ks.empty()) continue;
    if (ks.size() == 1) {
      out.edges.push_back(ks[0]);
      continue;
    }
    std::vector<int> verts;
    for (int k : ks) {
      for (int v : {graph.edges[k].a, graph.edges[k].b}) {
        if (local[v] < 0) {
          local[v] = static_cast<int>(verts.size());
          verts.push_back(v);
        }
      }
    }
    const int nv = static_cast<int>(verts.size());
    // Quantized weight times `spread` plus a rank bonus that prefers lexicographically earlier
    // edges among equal-weight optima; the bonus of any matching stays below one quantum.
    const long long m = static_cast<long long>(ks.size());
    const long long spread = m * (2 * nv) + 1;
    const double scale = std::ldexp(1.0, 52) / (max_w * static_cast<double>(spread));
    // A vertex left unmatched keeps its own loop, so a pair only competes through its excess over
    // the two loops it displaces. In integers this is an exact reformulation.
    std::vector<long long> loop(nv, 0);
    std::vector<int> loop_owner(nv, -1);
    std::vector<std::array<long long, 3>> qedges;
    std::vector<int> owner;
    std::vector<long long> quantized(ks.size(), 0);
    for (std::size_t r = 0; r < ks.size(); ++r) {
      const auto& e = graph.edges[ks[r]];
      const long long base = std::llround(e.weight * scale);
      if (base <= 0) continue;
      quantized[r] = base * spread + (m - static_cast<long long>(r));
      if (e.a == e.b) {
        loop[local[e.a]] = quantized[r];
        loop_owner[local[e.a]] = ks[r];
      }
    }
    for (std::size_t r = 0; r < ks.size(); ++r) {
      const auto& e = graph.edges[ks[r]];
      if (quantized[r] == 0 || e.a == e.b) continue;
      const int a = local[e.a];
      const int b = local[e.b];
      const long long excess = quantized[r] - loop[a] - loop[b];
      if (excess <= 0) continue;
      qedges.push_back({a, b, excess});
      owner.push_back(ks[r]);
    }
    const auto mate = detail::blossom_matching(nv, qedges);
    for (std::size_t q = 0; q < qedges.size(); ++q) {
      if (mate[qedges[q][0]] == qedges[q][1]) out.edges.push_back(owner[q]);
    }
    for (int v = 0; v < nv; ++v) {
      if (mate[v] < 0 && loop_owner[v] >= 0) out.edges.push_back(loop_owner[v]);
    }
    for (int v : verts) local[v] = -1;
  }
  std::sort(out.edges.begin(), out.edges.end());
  out.weight = selection_weight(graph, out.edges);
  return out;
}

namespace {

void brute_force(const PairingGraph& graph, std::size_t k, std::vector<char>& used, std::vector<int>& current,
                 Selection& best) {
  if (k == graph.edges.size()) {
    const double w = selection_weight(graph, current);
    if (w > best.weight) {
      best.weight = w;
      best.edges = current;
    }
    return;
  }
  brute_force(graph, k + 1, used, current, best);
  const auto& e = graph.edges[k];
  if (used[e.a] || used[e.b]) return;
  used[e.a] = used[e.b] = 1;
  current.push_back(static_cast<int>(k));
  brute_force(graph, k + 1, used, current, best);
  current.pop_back();
  used[e.a] = used[e.b] = 0;
}

}  // namespace

Selection brute_force_selection(const PairingGraph& graph, int max_edges) {
  graph.validate();
  if (static_cast<int>(graph.edges.size()) > max_edges) {
    throw Error("brute force selection: " + std::to_string(graph.edges.size()) + " edges exceeds limit " +
                std::to_string(max_edges));
  }
  Selection best;
  std::vector<char> used(graph.vertex_count, 0);
  std::vector<int> current;
  brute_force(graph, 0, used, current, best);
  return best;
}

}  // namespace cotx
