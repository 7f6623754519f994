// Copyright 2026 The mcs Authors.
//
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

#ifndef MCS_MATCHING_HPP_
#define MCS_MATCHING_HPP_

// Maximum-weight perfect matching on a complete graph with an even number of
// vertices, by Edmonds' blossom algorithm in the O(n^3) primal-dual form
// (after J. van Rantwijk's well-known formulation). Weights are 64-bit
// integers so that every comparison, and in particular tie detection, is
// exact. With integer weights all dual variables stay integral (they are kept
// at twice their LP value).
//
// Besides the matching, the solver exposes the reduced cost of every edge
// under the final optimal dual. An edge with positive reduced cost cannot be
// part of any maximum-weight perfect matching, which lets callers search
// among tied optima cheaply.

#include <algorithm>
#include <cassert>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <vector>

#include "mcs/error.hpp"

namespace mcs {

class PerfectMatcher {
 public:
  using Weight = std::int64_t;

  PerfectMatcher(int n, const std::function<Weight(int, int)>& weight) : n_(n) {
    if (n < 0 || n % 2 != 0) throw InputError("perfect matching needs an even number of vertices");
    neighbend_.assign(n, {});
    for (int i = 0; i < n; ++i) {
      for (int j = i + 1; j < n; ++j) {
        const int k = static_cast<int>(edges_.size());
        edges_.push_back({i, j, weight(i, j)});
        neighbend_[i].push_back(2 * k + 1);
        neighbend_[j].push_back(2 * k);
      }
    }
  }

  int size() const { return n_; }

  // Returns mate[v] for every vertex.
  const std::vector<int>& solve();

  // Twice the LP reduced cost y_i + y_j + sum_{B containing i, j} z_B - w_ij.
  // Nonnegative for every edge, zero on matched edges. Valid after solve().
  Weight reduced_cost(int i, int j) const {
    if (i > j) std::swap(i, j);
    const Edge& e = edges_[edge_index(i, j)];
    Weight s = dualvar_[i] + dualvar_[j] - 2 * e.w;
    std::vector<int> bi{i}, bj{j};
    while (blossomparent_[bi.back()] != -1) bi.push_back(blossomparent_[bi.back()]);
    while (blossomparent_[bj.back()] != -1) bj.push_back(blossomparent_[bj.back()]);
    std::reverse(bi.begin(), bi.end());
    std::reverse(bj.begin(), bj.end());
    for (std::size_t t = 0; t < bi.size() && t < bj.size(); ++t) {
      if (bi[t] != bj[t]) break;
      s += 2 * dualvar_[bi[t]];
    }
    return s;
  }

  Weight weight(int i, int j) const {
    if (i > j) std::swap(i, j);
    return edges_[edge_index(i, j)].w;
  }

 private:
  struct Edge {
    int i;
    int j;
    Weight w;
  };

  int edge_index(int i, int j) const {
    // Row-major index of (i, j), i < j, in the upper triangle.
    return i * (2 * n_ - i - 1) / 2 + (j - i - 1);
  }
  int endpoint(int p) const { return (p & 1) ? edges_[p >> 1].j : edges_[p >> 1].i; }
  Weight slack(int k) const { return dualvar_[edges_[k].i] + dualvar_[edges_[k].j] - 2 * edges_[k].w; }

  static int wrap(int j, std::size_t len) {
    const int l = static_cast<int>(len);
    return ((j % l) + l) % l;
  }

  void leaves(int b, std::vector<int>& out) const {
    if (b < n_) {
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

  void assign_label(int w, int t, int p);
  int scan_blossom(int v, int w);
  void add_blossom(int base, int k);
  void expand_blossom(int b, bool endstage);
  void augment_blossom(int b, int v);
  void augment_matching(int k);

  int n_;
  std::vector<Edge> edges_;
  std::vector<std::vector<int>> neighbend_;
  std::vector<int> mate_;
  std::vector<int> label_, labelend_, inblossom_, blossomparent_, blossombase_, bestedge_;
  std::vector<std::vector<int>> blossomchilds_, blossomendps_, blossombestedges_;
  std::vector<char> has_bestedges_;
  std::vector<int> unusedblossoms_;
  std::vector<Weight> dualvar_;
  std::vector<char> allowedge_;
  std::vector<int> queue_;
  std::vector<int> result_;
};

inline void PerfectMatcher::assign_label(int w, int t, int p) {
  const int b = inblossom_[w];
  assert(label_[w] == 0 && label_[b] == 0);
  label_[w] = label_[b] = t;
  labelend_[w] = labelend_[b] = p;
  bestedge_[w] = bestedge_[b] = -1;
  if (t == 1) {
    leaves(b, queue_);
  } else if (t == 2) {
    const int base = blossombase_[b];
    assert(mate_[base] >= 0);
    assign_label(endpoint(mate_[base]), 1, mate_[base] ^ 1);
  }
}

inline int PerfectMatcher::scan_blossom(int v, int w) {
  std::vector<int> path;
  int base = -1;
  while (v != -1 || w != -1) {
    int b = inblossom_[v];
    if (label_[b] & 4) {
      base = blossombase_[b];
      break;
    }
    assert(label_[b] == 1);
    path.push_back(b);
    label_[b] = 5;
    if (labelend_[b] == -1) {
      v = -1;
    } else {
      v = endpoint(labelend_[b]);
      b = inblossom_[v];
      assert(label_[b] == 2);
      v = endpoint(labelend_[b]);
    }
    if (w != -1) std::swap(v, w);
  }
  for (int b : path) label_[b] = 1;
  return base;
}

inline void PerfectMatcher::add_blossom(int base, int k) {
  int v = edges_[k].i;
  int w = edges_[k].j;
  const int bb = inblossom_[base];
  int bv = inblossom_[v];
  int bw = inblossom_[w];
  const int b = unusedblossoms_.back();
  unusedblossoms_.pop_back();
  blossombase_[b] = base;
  blossomparent_[b] = -1;
  blossomparent_[bb] = b;
  std::vector<int> path, endps;
  while (bv != bb) {
    blossomparent_[bv] = b;
    path.push_back(bv);
    endps.push_back(labelend_[bv]);
    v = endpoint(labelend_[bv]);
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
    w = endpoint(labelend_[bw]);
    bw = inblossom_[w];
  }
  assert(label_[bb] == 1);
  label_[b] = 1;
  labelend_[b] = labelend_[bb];
  dualvar_[b] = 0;
  blossomchilds_[b] = path;
  blossomendps_[b] = endps;
  for (int leaf : leaves(b)) {
    if (label_[inblossom_[leaf]] == 2) queue_.push_back(leaf);
    inblossom_[leaf] = b;
  }
  std::vector<int> bestedgeto(2 * n_, -1);
  for (int sub : path) {
    std::vector<std::vector<int>> nblists;
    if (!has_bestedges_[sub]) {
      for (int leaf : leaves(sub)) {
        std::vector<int> list;
        for (int p : neighbend_[leaf]) list.push_back(p / 2);
        nblists.push_back(std::move(list));
      }
    } else {
      nblists.push_back(blossombestedges_[sub]);
    }
    for (const auto& nblist : nblists) {
      for (int kk : nblist) {
        int i = edges_[kk].i;
        int j = edges_[kk].j;
        if (inblossom_[j] == b) std::swap(i, j);
        const int bj = inblossom_[j];
        if (bj != b && label_[bj] == 1 &&
            (bestedgeto[bj] == -1 || slack(kk) < slack(bestedgeto[bj]))) {
          bestedgeto[bj] = kk;
        }
      }
    }
    blossombestedges_[sub].clear();
    has_bestedges_[sub] = 0;
    bestedge_[sub] = -1;
  }
  blossombestedges_[b].clear();
  for (int kk : bestedgeto) {
    if (kk != -1) blossombestedges_[b].push_back(kk);
  }
  has_bestedges_[b] = 1;
  bestedge_[b] = -1;
  for (int kk : blossombestedges_[b]) {
    if (bestedge_[b] == -1 || slack(kk) < slack(bestedge_[b])) bestedge_[b] = kk;
  }
}

inline void PerfectMatcher::expand_blossom(int b, bool endstage) {
  const std::vector<int> childs = blossomchilds_[b];
  for (int s : childs) {
    blossomparent_[s] = -1;
    if (s < n_) {
      inblossom_[s] = s;
    } else if (endstage && dualvar_[s] == 0) {
      expand_blossom(s, endstage);
    } else {
      for (int leaf : leaves(s)) inblossom_[leaf] = s;
    }
  }
  if (!endstage && label_[b] == 2) {
    const auto& ch = blossomchilds_[b];
    const auto& ep = blossomendps_[b];
    const int entrychild = inblossom_[endpoint(labelend_[b] ^ 1)];
    int j = static_cast<int>(std::find(ch.begin(), ch.end(), entrychild) - ch.begin());
    int jstep, endptrick;
    if (j & 1) {
      j -= static_cast<int>(ch.size());
      jstep = 1;
      endptrick = 0;
    } else {
      jstep = -1;
      endptrick = 1;
    }
    int p = labelend_[b];
    while (j != 0) {
      label_[endpoint(p ^ 1)] = 0;
      label_[endpoint(ep[wrap(j - endptrick, ep.size())] ^ endptrick ^ 1)] = 0;
      assign_label(endpoint(p ^ 1), 2, p);
      allowedge_[ep[wrap(j - endptrick, ep.size())] / 2] = 1;
      j += jstep;
      p = ep[wrap(j - endptrick, ep.size())] ^ endptrick;
      allowedge_[p / 2] = 1;
      j += jstep;
    }
    int bv = ch[wrap(j, ch.size())];
    label_[endpoint(p ^ 1)] = label_[bv] = 2;
    labelend_[endpoint(p ^ 1)] = labelend_[bv] = p;
    bestedge_[bv] = -1;
    j += jstep;
    while (ch[wrap(j, ch.size())] != entrychild) {
      bv = ch[wrap(j, ch.size())];
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
      if (found != -1) {
        assert(label_[found] == 2);
        assert(inblossom_[found] == bv);
        label_[found] = 0;
        label_[endpoint(mate_[blossombase_[bv]])] = 0;
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
  has_bestedges_[b] = 0;
  bestedge_[b] = -1;
  unusedblossoms_.push_back(b);
}

inline void PerfectMatcher::augment_blossom(int b, int v) {
  int t = v;
  while (blossomparent_[t] != b) t = blossomparent_[t];
  if (t >= n_) augment_blossom(t, v);
  auto& ch = blossomchilds_[b];
  auto& ep = blossomendps_[b];
  const int i = static_cast<int>(std::find(ch.begin(), ch.end(), t) - ch.begin());
  int j = i;
  int jstep, endptrick;
  if (i & 1) {
    j -= static_cast<int>(ch.size());
    jstep = 1;
    endptrick = 0;
  } else {
    jstep = -1;
    endptrick = 1;
  }
  while (j != 0) {
    j += jstep;
    t = ch[wrap(j, ch.size())];
    const int p = ep[wrap(j - endptrick, ep.size())] ^ endptrick;
    if (t >= n_) augment_blossom(t, endpoint(p));
    j += jstep;
    t = ch[wrap(j, ch.size())];
    if (t >= n_) augment_blossom(t, endpoint(p ^ 1));
    mate_[endpoint(p)] = p ^ 1;
    mate_[endpoint(p ^ 1)] = p;
  }
  std::rotate(ch.begin(), ch.begin() + i, ch.end());
  std::rotate(ep.begin(), ep.begin() + i, ep.end());
  blossombase_[b] = blossombase_[ch[0]];
  assert(blossombase_[b] == v);
}

inline void PerfectMatcher::augment_matching(int k) {
  const int v = edges_[k].i;
  const int w = edges_[k].j;
  const int starts[2][2] = {{v, 2 * k + 1}, {w, 2 * k}};
  for (const auto& start : starts) {
    int s = start[0];
    int p = start[1];
    while (true) {
      const int bs = inblossom_[s];
      assert(label_[bs] == 1);
      if (bs >= n_) augment_blossom(bs, s);
      mate_[s] = p;
      if (labelend_[bs] == -1) break;
      const int t = endpoint(labelend_[bs]);
      const int bt = inblossom_[t];
      assert(label_[bt] == 2);
      s = endpoint(labelend_[bt]);
      const int j = endpoint(labelend_[bt] ^ 1);
      assert(blossombase_[bt] == t);
      if (bt >= n_) augment_blossom(bt, j);
      mate_[j] = labelend_[bt];
      p = labelend_[bt] ^ 1;
    }
  }
}

inline const std::vector<int>& PerfectMatcher::solve() {
  const int n = n_;
  const int nedge = static_cast<int>(edges_.size());
  Weight maxweight = 0;
  for (const Edge& e : edges_) maxweight = std::max(maxweight, e.w);

  mate_.assign(n, -1);
  label_.assign(2 * n, 0);
  labelend_.assign(2 * n, -1);
  inblossom_.resize(n);
  for (int i = 0; i < n; ++i) inblossom_[i] = i;
  blossomparent_.assign(2 * n, -1);
  blossomchilds_.assign(2 * n, {});
  blossomendps_.assign(2 * n, {});
  blossombase_.assign(2 * n, -1);
  for (int i = 0; i < n; ++i) blossombase_[i] = i;
  bestedge_.assign(2 * n, -1);
  blossombestedges_.assign(2 * n, {});
  has_bestedges_.assign(2 * n, 0);
  unusedblossoms_.clear();
  for (int b = n; b < 2 * n; ++b) unusedblossoms_.push_back(b);
  dualvar_.assign(2 * n, 0);
  for (int i = 0; i < n; ++i) dualvar_[i] = maxweight;
  allowedge_.assign(nedge, 0);
  queue_.clear();

  for (int stage = 0; stage < n; ++stage) {
    std::fill(label_.begin(), label_.end(), 0);
    std::fill(bestedge_.begin(), bestedge_.end(), -1);
    for (int b = n; b < 2 * n; ++b) {
      blossombestedges_[b].clear();
      has_bestedges_[b] = 0;
    }
    std::fill(allowedge_.begin(), allowedge_.end(), 0);
    queue_.clear();
    for (int v = 0; v < n; ++v) {
      if (mate_[v] == -1 && label_[inblossom_[v]] == 0) assign_label(v, 1, -1);
    }
    bool augmented = false;
    while (true) {
      while (!queue_.empty() && !augmented) {
        const int v = queue_.back();
        queue_.pop_back();
        assert(label_[inblossom_[v]] == 1);
        for (int p : neighbend_[v]) {
          const int k = p / 2;
          const int w = endpoint(p);
          if (inblossom_[v] == inblossom_[w]) continue;
          Weight kslack = 0;
          if (!allowedge_[k]) {
            kslack = slack(k);
            if (kslack <= 0) allowedge_[k] = 1;
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
              assert(label_[inblossom_[w]] == 2);
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

      // Dual adjustment. Perfect matching: no vertex-dual stopping rule.
      int deltatype = -1;
      Weight delta = 0;
      int deltaedge = -1;
      int deltablossom = -1;
      for (int v = 0; v < n; ++v) {
        if (label_[inblossom_[v]] == 0 && bestedge_[v] != -1) {
          const Weight d = slack(bestedge_[v]);
          if (deltatype == -1 || d < delta) {
            delta = d;
            deltatype = 2;
            deltaedge = bestedge_[v];
          }
        }
      }
      for (int b = 0; b < 2 * n; ++b) {
        if (blossomparent_[b] == -1 && label_[b] == 1 && bestedge_[b] != -1) {
          const Weight ks = slack(bestedge_[b]);
          if (ks % 2 != 0) throw std::logic_error("blossom matching: odd slack between S-vertices");
          const Weight d = ks / 2;
          if (deltatype == -1 || d < delta) {
            delta = d;
            deltatype = 3;
            deltaedge = bestedge_[b];
          }
        }
      }
      for (int b = n; b < 2 * n; ++b) {
        if (blossombase_[b] >= 0 && blossomparent_[b] == -1 && label_[b] == 2 &&
            (deltatype == -1 || dualvar_[b] < delta)) {
          delta = dualvar_[b];
          deltatype = 4;
          deltablossom = b;
        }
      }
      if (deltatype == -1) {
        // No further progress possible; the matching has maximum cardinality.
        deltatype = 1;
        Weight mn = dualvar_[0];
        for (int v = 1; v < n; ++v) mn = std::min(mn, dualvar_[v]);
        delta = std::max<Weight>(0, mn);
      }
      for (int v = 0; v < n; ++v) {
        if (label_[inblossom_[v]] == 1) {
          dualvar_[v] -= delta;
        } else if (label_[inblossom_[v]] == 2) {
          dualvar_[v] += delta;
        }
      }
      for (int b = n; b < 2 * n; ++b) {
        if (blossombase_[b] >= 0 && blossomparent_[b] == -1) {
          if (label_[b] == 1) {
            dualvar_[b] += delta;
          } else if (label_[b] == 2) {
            dualvar_[b] -= delta;
          }
        }
      }
      if (deltatype == 1) {
        break;
      } else if (deltatype == 2) {
        allowedge_[deltaedge] = 1;
        int i = edges_[deltaedge].i;
        int j = edges_[deltaedge].j;
        if (label_[inblossom_[i]] == 0) std::swap(i, j);
        assert(label_[inblossom_[i]] == 1);
        queue_.push_back(i);
      } else if (deltatype == 3) {
        allowedge_[deltaedge] = 1;
        const int i = edges_[deltaedge].i;
        assert(label_[inblossom_[i]] == 1);
        queue_.push_back(i);
      } else if (deltatype == 4) {
        expand_blossom(deltablossom, false);
      }
    }
    if (!augmented) break;
    for (int b = n; b < 2 * n; ++b) {
      if (blossomparent_[b] == -1 && blossombase_[b] >= 0 && label_[b] == 1 && dualvar_[b] == 0) {
        expand_blossom(b, true);
      }
    }
  }

  result_.assign(n, -1);
  for (int v = 0; v < n; ++v) {
    if (mate_[v] < 0) throw std::logic_error("blossom matching: matching is not perfect");
    result_[v] = endpoint(mate_[v]);
  }
  return result_;
}

struct MatchingResult {
  std::vector<int> mate;
  PerfectMatcher::Weight total = 0;
};

inline PerfectMatcher::Weight matching_total(const std::vector<int>& mate,
                                             const std::function<PerfectMatcher::Weight(int, int)>& weight) {
  PerfectMatcher::Weight total = 0;
  for (int v = 0; v < static_cast<int>(mate.size()); ++v) {
    if (v < mate[v]) total += weight(v, mate[v]);
  }
  return total;
}

// Maximum-weight perfect matching; among all optima, the one whose mate
// vector is lexicographically smallest.
inline MatchingResult max_weight_perfect_matching(int n, const std::function<PerfectMatcher::Weight(int, int)>& weight) {
  using Weight = PerfectMatcher::Weight;
  MatchingResult out;
  if (n == 0) return out;
  PerfectMatcher full(n, weight);
  std::vector<int> mate = full.solve();
  const Weight best = matching_total(mate, weight);

  std::vector<char> fixed(n, 0);
  for (int v = 0; v < n; ++v) {
    if (fixed[v]) continue;
    for (int u = 0; u < mate[v]; ++u) {
      if (u == v || fixed[u]) continue;
      // Edges that are not tight under an optimal dual are in no optimum.
      if (full.reduced_cost(v, u) != 0) continue;
      const int m = mate[v];
      const int mu = mate[u];
      if (weight(v, u) + weight(std::min(m, mu), std::max(m, mu)) == weight(std::min(v, m), std::max(v, m)) +
                                                                         weight(std::min(u, mu), std::max(u, mu))) {
        mate[v] = u;
        mate[u] = v;
        mate[m] = mu;
        mate[mu] = m;
        break;
      }
      std::vector<int> rest;
      for (int x = 0; x < n; ++x) {
        if (!fixed[x] && x != v && x != u) rest.push_back(x);
      }
      const int r = static_cast<int>(rest.size());
      PerfectMatcher sub(r, [&](int a, int b) { return weight(rest[a], rest[b]); });
      const std::vector<int>& sm = sub.solve();
      Weight total = weight(std::min(v, u), std::max(v, u));
      for (int x = 0; x < n; ++x) {
        if (fixed[x] && x < mate[x]) total += weight(x, mate[x]);
      }
      for (int a = 0; a < r; ++a) {
        if (a < sm[a]) total += weight(rest[a], rest[sm[a]]);
      }
      if (total == best) {
        mate[v] = u;
        mate[u] = v;
        for (int a = 0; a < r; ++a) mate[rest[a]] = rest[sm[a]];
        break;
      }
    }
    fixed[v] = 1;
    fixed[mate[v]] = 1;
  }
  out.mate = std::move(mate);
  out.total = matching_total(out.mate, weight);
  if (out.total != best) throw std::logic_error("blossom matching: tie-break lost optimality");
  return out;
}

// Exhaustive search in lexicographic order of the mate vector, keeping only
// strict improvements. Exponential; intended for small n.
inline MatchingResult brute_force_perfect_matching(int n, const std::function<PerfectMatcher::Weight(int, int)>& weight) {
  if (n < 0 || n % 2 != 0) throw InputError("perfect matching needs an even number of vertices");
  MatchingResult best;
  bool have = false;
  std::vector<int> mate(n, -1);
  std::function<void(PerfectMatcher::Weight)> rec = [&](PerfectMatcher::Weight acc) {
    int v = 0;
    while (v < n && mate[v] != -1) ++v;
    if (v == n) {
      if (!have || acc > best.total) {
        best.mate = mate;
        best.total = acc;
        have = true;
      }
      return;
    }
    for (int u = v + 1; u < n; ++u) {
      if (mate[u] != -1) continue;
      mate[v] = u;
      mate[u] = v;
      rec(acc + weight(v, u));
      mate[v] = mate[u] = -1;
    }
  };
  rec(0);
  return best;
}

}  // namespace mcs

#endif  // MCS_MATCHING_HPP_
