#pragma once

#include <algorithm>
#include <numeric>
#include <set>
#include <span>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include <nlohmann/json.hpp>

#include "tradenet/core.hpp"

namespace tnet {

// One directed link: seller -> buyer, carrying its trade.
struct TradeEdge {
  std::string seller;
  std::string buyer;
  Seq global_seq = 0;  // 1-based position in the stock's pooled (day, seq) order
  Day day = 0;
  Seq day_seq = 0;
  Millis ts = 0;
  Ticks price = 0;
  Shares size = 0;
  Aggressor aggressor = Aggressor::buyer;
};

// Directed multigraph of one stock's traders over the whole sample period.
// Parallel edges and self-loops are preserved.
struct TradingNetwork {
  std::string stock;
  std::vector<std::string> nodes;  // sorted, unique
  std::vector<TradeEdge> edges;
};

enum class MotifKind { A, B, C };

inline const char* to_string(MotifKind k) {
  switch (k) {
    case MotifKind::A: return "A";
    case MotifKind::B: return "B";
    default: return "C";
  }
}

// A: one trader, its self-loop edges. B: an unordered pair with at least one
// edge each way, all edges between the pair. C: an ordered pair with >= 2
// same-direction edges, those parallel edges.
struct MotifInstance {
  MotifKind kind = MotifKind::A;
  std::vector<std::string> traders;
  std::vector<std::size_t> edges;  // indices into TradingNetwork::edges

  std::size_t n_edges() const { return edges.size(); }
};

// Occurrence counts N_M and trader counts. N_A counts self-loop edges (a
// trader self-trading k times contributes k overlapping A-motifs); n_A counts
// the traders. n_B and n_C are half the distinct trader counts of their
// instances and may be half-integral when instances share traders.
struct MotifCensus {
  std::int64_t N_A = 0;
  std::int64_t N_B = 0;
  std::int64_t N_C = 0;
  std::int64_t n_A = 0;
  double n_B = 0.0;
  double n_C = 0.0;

  bool operator==(const MotifCensus&) const = default;
};

struct MotifScan {
  std::vector<MotifInstance> instances;
  MotifCensus census;
};

// Builds the per-stock network: one edge per trade, pooled over all days in
// (day, seq) order, nodes = every id seen as buyer or seller.
inline TradingNetwork build_network(std::span<const Trade> trades) {
  TradingNetwork net;
  std::vector<const Trade*> ordered;
  ordered.reserve(trades.size());
  for (const auto& t : trades) {
    if (!net.stock.empty() && t.stock != net.stock)
      throw DomainError("build_network requires trades of a single stock");
    if (net.stock.empty()) net.stock = t.stock;
    ordered.push_back(&t);
  }
  std::sort(ordered.begin(), ordered.end(), [](const Trade* a, const Trade* b) {
    return std::pair(a->day, a->seq) < std::pair(b->day, b->seq);
  });
  net.edges.reserve(ordered.size());
  std::set<std::string> nodes;
  Seq gseq = 1;
  for (const Trade* t : ordered) {
    net.edges.push_back({t->seller, t->buyer, gseq++, t->day, t->seq, t->ts, t->price, t->size,
                         t->aggressor});
    nodes.insert(t->seller);
    nodes.insert(t->buyer);
  }
  net.nodes.assign(nodes.begin(), nodes.end());
  return net;
}

namespace detail {

struct PairHash {
  std::size_t operator()(const std::pair<std::string, std::string>& p) const {
    std::size_t h = std::hash<std::string>{}(p.first);
    return h ^ (std::hash<std::string>{}(p.second) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2));
  }
};

}  // namespace detail

// Single hash-grouped pass over the edges; expected O(E).
inline MotifScan detect_motifs(const TradingNetwork& net) {
  using Pair = std::pair<std::string, std::string>;
  std::unordered_map<Pair, std::vector<std::size_t>, detail::PairHash> by_ordered_pair;
  by_ordered_pair.reserve(net.edges.size() * 2);
  for (std::size_t i = 0; i < net.edges.size(); ++i)
    by_ordered_pair[{net.edges[i].seller, net.edges[i].buyer}].push_back(i);

  MotifScan scan;
  std::vector<const std::pair<const Pair, std::vector<std::size_t>>*> groups;
  groups.reserve(by_ordered_pair.size());
  for (const auto& g : by_ordered_pair) groups.push_back(&g);
  std::sort(groups.begin(), groups.end(),
            [](const auto* a, const auto* b) { return a->first < b->first; });

  std::set<std::string> traders_b, traders_c;
  for (const auto* g : groups) {
    const auto& [pair, edges] = *g;
    if (pair.first == pair.second) {
      scan.instances.push_back({MotifKind::A, {pair.first}, edges});
      scan.census.N_A += static_cast<std::int64_t>(edges.size());
      scan.census.n_A += 1;
      continue;
    }
    // C: ordered pair with parallel edges.
    if (edges.size() >= 2) {
      scan.instances.push_back({MotifKind::C, {pair.first, pair.second}, edges});
      scan.census.N_C += 1;
      traders_c.insert(pair.first);
      traders_c.insert(pair.second);
    }
    // B: emit once per unordered pair, from its lexicographically first
    // direction, when the reverse direction also traded.
    if (pair.first < pair.second) {
      auto rev = by_ordered_pair.find({pair.second, pair.first});
      if (rev != by_ordered_pair.end()) {
        MotifInstance inst{MotifKind::B, {pair.first, pair.second}, edges};
        inst.edges.insert(inst.edges.end(), rev->second.begin(), rev->second.end());
        std::sort(inst.edges.begin(), inst.edges.end());
        scan.instances.push_back(std::move(inst));
        scan.census.N_B += 1;
        traders_b.insert(pair.first);
        traders_b.insert(pair.second);
      }
    }
  }
  scan.census.n_B = static_cast<double>(traders_b.size()) / 2.0;
  scan.census.n_C = static_cast<double>(traders_c.size()) / 2.0;

  // Canonical order: kind, then traders, so reports and oracles compare
  // directly.
  std::sort(scan.instances.begin(), scan.instances.end(),
            [](const MotifInstance& a, const MotifInstance& b) {
              if (a.kind != b.kind) return a.kind < b.kind;
              if (a.traders != b.traders) return a.traders < b.traders;
              return a.edges < b.edges;
            });
  return scan;
}

// Restriction of the network to the union of all `kind` instance edges and
// their endpoints.
inline TradingNetwork motif_subnetwork(const TradingNetwork& net, const MotifScan& scan,
                                       MotifKind kind) {
  std::set<std::size_t> keep;
  for (const auto& inst : scan.instances)
    if (inst.kind == kind) keep.insert(inst.edges.begin(), inst.edges.end());
  TradingNetwork sub;
  sub.stock = net.stock;
  std::set<std::string> nodes;
  for (std::size_t i : keep) {
    sub.edges.push_back(net.edges[i]);
    nodes.insert(net.edges[i].seller);
    nodes.insert(net.edges[i].buyer);
  }
  sub.nodes.assign(nodes.begin(), nodes.end());
  return sub;
}

// Node counts of weakly connected components (directions ignored), largest
// first.
inline std::vector<std::int64_t> cluster_sizes(const TradingNetwork& net) {
  std::unordered_map<std::string, std::size_t> index;
  index.reserve(net.nodes.size());
  for (std::size_t i = 0; i < net.nodes.size(); ++i) index[net.nodes[i]] = i;
  std::vector<std::size_t> parent(net.nodes.size());
  std::iota(parent.begin(), parent.end(), 0);
  std::function<std::size_t(std::size_t)> find = [&](std::size_t x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  };
  for (const auto& e : net.edges) {
    std::size_t a = find(index.at(e.seller));
    std::size_t b = find(index.at(e.buyer));
    if (a != b) parent[a] = b;
  }
  std::unordered_map<std::size_t, std::int64_t> counts;
  for (std::size_t i = 0; i < parent.size(); ++i) counts[find(i)] += 1;
  std::vector<std::int64_t> sizes;
  sizes.reserve(counts.size());
  for (const auto& [root, n] : counts) sizes.push_back(n);
  std::sort(sizes.begin(), sizes.end(), std::greater<>());
  return sizes;
}

// The n_edges of every C-instance; the tail fed to the power-law fit.
inline std::vector<std::int64_t> edge_count_sample(const MotifScan& scan, MotifKind kind) {
  if (kind != MotifKind::C)
    throw DomainError("edge_count_sample is defined for C-motifs only");
  std::vector<std::int64_t> counts;
  for (const auto& inst : scan.instances)
    if (inst.kind == MotifKind::C) counts.push_back(static_cast<std::int64_t>(inst.n_edges()));
  return counts;
}

inline nlohmann::json census_json(const MotifCensus& c) {
  return {{"N_A", c.N_A}, {"N_B", c.N_B}, {"N_C", c.N_C},
          {"n_A", c.n_A}, {"n_B", c.n_B}, {"n_C", c.n_C}};
}

// Full per-stock report: census, instances, per-kind subnetwork cluster
// sizes, and the C edge-count sample.
inline nlohmann::json motif_report_json(const TradingNetwork& net, const MotifScan& scan) {
  nlohmann::json instances = nlohmann::json::array();
  for (const auto& inst : scan.instances) {
    nlohmann::json seqs = nlohmann::json::array();
    for (std::size_t i : inst.edges) seqs.push_back(net.edges[i].global_seq);
    instances.push_back(
        {{"kind", to_string(inst.kind)}, {"traders", inst.traders}, {"trade_seqs", seqs}});
  }
  nlohmann::json clusters;
  for (MotifKind k : {MotifKind::A, MotifKind::B, MotifKind::C})
    clusters[to_string(k)] = cluster_sizes(motif_subnetwork(net, scan, k));
  return {{"stock", net.stock},
          {"n_nodes", net.nodes.size()},
          {"n_edges", net.edges.size()},
          {"census", census_json(scan.census)},
          {"instances", instances},
          {"cluster_sizes", clusters},
          {"c_edge_counts", edge_count_sample(scan, MotifKind::C)}};
}

}  // namespace tnet
