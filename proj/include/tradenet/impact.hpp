#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <unordered_set>
#include <vector>

#include <nlohmann/json.hpp>

#include "tradenet/core.hpp"
#include "tradenet/stats.hpp"
#include "tradenet/tape.hpp"

namespace tnet {

inline constexpr int kImpactLags = 10;                     // i = -10 .. 10
inline constexpr int kImpactWindow = 2 * kImpactLags + 1;  // 21 returns

// Trade-by-trade return window around one event: raw returns, the mean over
// its benchmark control set, and their difference.
struct ReturnWindow {
  std::string stock;
  Seq global_seq = 0;  // 1-based index into the stock's pooled trade sequence
  Aggressor aggressor = Aggressor::buyer;
  std::array<double, kImpactWindow> raw{};
  std::array<double, kImpactWindow> bench{};
  std::array<double, kImpactWindow> excess{};
};

struct ImpactConfig {
  int n_benchmarks = 20;
  int min_benchmarks = 5;
  std::optional<Aggressor> side;
};

// r_{m,i} = log p(m+i) - log p(m+i-1) over the stock's pooled trade sequence,
// for i in [-10, 10]. Windows that would cross a day boundary (overnight
// return) are unavailable.
inline std::optional<std::array<double, kImpactWindow>> trade_returns(
    std::span<const Trade> pooled, std::size_t idx) {
  if (idx < static_cast<std::size_t>(kImpactLags + 1)) return std::nullopt;
  if (idx + kImpactLags >= pooled.size()) return std::nullopt;
  std::size_t first = idx - kImpactLags - 1;
  std::size_t last = idx + kImpactLags;
  if (pooled[first].day != pooled[last].day) return std::nullopt;
  std::array<double, kImpactWindow> r{};
  for (int i = -kImpactLags; i <= kImpactLags; ++i) {
    double p1 = static_cast<double>(pooled[idx + i].price);
    double p0 = static_cast<double>(pooled[idx + i - 1].price);
    r[i + kImpactLags] = std::log(p1) - std::log(p0);
  }
  return r;
}

// Control set for one event: same-stock trades on other days with the same
// aggressor type and a full return window, ranked by intraday-time distance,
// then day distance, then sequence. Returns at least min_benchmarks indices
// or nothing.
inline std::optional<std::vector<std::size_t>> benchmark_set(
    std::span<const Trade> pooled, std::size_t event_idx,
    const std::unordered_set<Seq>& event_seqs, const std::vector<bool>& window_ok,
    const ImpactConfig& cfg = {}) {
  const Trade& ev = pooled[event_idx];
  struct Ranked {
    Millis dt;
    Day dd;
    Seq seq;
    std::size_t idx;
    bool operator<(const Ranked& o) const {
      return std::tie(dt, dd, seq) < std::tie(o.dt, o.dd, o.seq);
    }
  };
  std::vector<Ranked> candidates;
  for (std::size_t j = 0; j < pooled.size(); ++j) {
    const Trade& t = pooled[j];
    if (t.day == ev.day) continue;
    if (t.aggressor != ev.aggressor) continue;
    if (!window_ok[j]) continue;
    if (event_seqs.contains(static_cast<Seq>(j + 1))) continue;
    candidates.push_back({std::abs(t.ts - ev.ts), std::abs(t.day - ev.day),
                          static_cast<Seq>(j + 1), j});
  }
  if (static_cast<int>(candidates.size()) < cfg.min_benchmarks) return std::nullopt;
  std::size_t take = std::min<std::size_t>(candidates.size(), cfg.n_benchmarks);
  std::partial_sort(candidates.begin(), candidates.begin() + take, candidates.end());
  std::vector<std::size_t> out;
  out.reserve(take);
  for (std::size_t k = 0; k < take; ++k) out.push_back(candidates[k].idx);
  return out;
}

// Fills bench (per-lag mean over the control windows) and excess = raw - bench.
inline void excess_returns(ReturnWindow& w,
                           std::span<const std::array<double, kImpactWindow>> benchmarks) {
  w.bench.fill(0.0);
  for (const auto& b : benchmarks)
    for (int i = 0; i < kImpactWindow; ++i) w.bench[i] += b[i];
  if (!benchmarks.empty())
    for (auto& x : w.bench) x /= static_cast<double>(benchmarks.size());
  for (int i = 0; i < kImpactWindow; ++i) w.excess[i] = w.raw[i] - w.bench[i];
}

struct LagRow {
  std::string label;  // "-10".."10", "[-10,-1]", "0", "[1,10]"
  bool cumulative = false;
  int n = 0;
  double mean_raw = 0.0;
  double p_raw = 1.0;
  double mean_excess = 0.0;
  double p_excess = 1.0;
  bool degenerate_raw = false;
  bool degenerate_excess = false;
};

struct ImpactTable {
  Aggressor side = Aggressor::buyer;
  int n_windows = 0;
  std::vector<LagRow> rows;  // 21 per-lag rows then 3 cumulative rows
};

// Per-lag means with one-sample t-tests against zero, then the Panel-B
// per-event sums over [-10,-1], {0}, [1,10]. Needs at least two windows.
inline std::optional<ImpactTable> lag_table(std::span<const ReturnWindow> windows,
                                            Aggressor side) {
  std::vector<const ReturnWindow*> ws;
  for (const auto& w : windows)
    if (w.aggressor == side) ws.push_back(&w);
  if (ws.size() < 2) return std::nullopt;

  ImpactTable table;
  table.side = side;
  table.n_windows = static_cast<int>(ws.size());
  auto add_row = [&](const std::string& label, bool cumulative,
                     const std::vector<double>& raw, const std::vector<double>& exc) {
    TTestResult tr = one_sample_t_test(raw);
    TTestResult te = one_sample_t_test(exc);
    table.rows.push_back({label, cumulative, tr.n, tr.mean, tr.p, te.mean, te.p, tr.degenerate,
                          te.degenerate});
  };
  for (int i = -kImpactLags; i <= kImpactLags; ++i) {
    std::vector<double> raw, exc;
    raw.reserve(ws.size());
    exc.reserve(ws.size());
    for (const auto* w : ws) {
      raw.push_back(w->raw[i + kImpactLags]);
      exc.push_back(w->excess[i + kImpactLags]);
    }
    add_row(std::to_string(i), false, raw, exc);
  }
  auto sum_range = [&](const ReturnWindow& w, int lo, int hi, bool excess) {
    double s = 0.0;
    for (int i = lo; i <= hi; ++i) s += excess ? w.excess[i + kImpactLags] : w.raw[i + kImpactLags];
    return s;
  };
  const std::array<std::tuple<std::string, int, int>, 3> panels{
      std::tuple{std::string("[-10,-1]"), -10, -1}, std::tuple{std::string("0"), 0, 0},
      std::tuple{std::string("[1,10]"), 1, 10}};
  for (const auto& [label, lo, hi] : panels) {
    std::vector<double> raw, exc;
    raw.reserve(ws.size());
    exc.reserve(ws.size());
    for (const auto* w : ws) {
      raw.push_back(sum_range(*w, lo, hi, false));
      exc.push_back(sum_range(*w, lo, hi, true));
    }
    add_row(label, true, raw, exc);
  }
  return table;
}

// ---------------------------------------------------------------------------
// Whole-analysis orchestration
// ---------------------------------------------------------------------------

struct StockImpactInput {
  std::string stock;
  std::vector<Trade> pooled;          // sorted by (day, seq)
  std::vector<Seq> event_seqs;        // global (pooled, 1-based) sequence numbers
};

struct ImpactResult {
  std::vector<ReturnWindow> windows;
  std::optional<ImpactTable> buyer;
  std::optional<ImpactTable> seller;
  int dropped_no_history = 0;
  int dropped_no_benchmark = 0;
  int short_benchmark = 0;  // events analyzed with fewer than n_benchmarks controls
};

inline ImpactResult run_impact(std::span<const StockImpactInput> stocks,
                               const ImpactConfig& cfg = {}, unsigned jobs = 1) {
  ImpactResult out;
  std::vector<ImpactResult> partial(stocks.size());
  parallel_for(stocks.size(), jobs, [&](std::size_t si) {
    const auto& input = stocks[si];
    ImpactResult& res = partial[si];
    std::vector<bool> window_ok(input.pooled.size());
    for (std::size_t j = 0; j < input.pooled.size(); ++j)
      window_ok[j] = trade_returns(input.pooled, j).has_value();
    std::unordered_set<Seq> event_set(input.event_seqs.begin(), input.event_seqs.end());
    for (Seq seq : input.event_seqs) {
      if (seq < 1 || static_cast<std::size_t>(seq) > input.pooled.size())
        throw DomainError("event seq " + std::to_string(seq) + " outside pooled trades");
      std::size_t idx = static_cast<std::size_t>(seq) - 1;
      if (cfg.side && input.pooled[idx].aggressor != *cfg.side) continue;
      auto raw = trade_returns(input.pooled, idx);
      if (!raw) {
        ++res.dropped_no_history;
        continue;
      }
      auto bench_idx = benchmark_set(input.pooled, idx, event_set, window_ok, cfg);
      if (!bench_idx) {
        ++res.dropped_no_benchmark;
        continue;
      }
      if (static_cast<int>(bench_idx->size()) < cfg.n_benchmarks) ++res.short_benchmark;
      std::vector<std::array<double, kImpactWindow>> bench_windows;
      bench_windows.reserve(bench_idx->size());
      for (std::size_t j : *bench_idx) bench_windows.push_back(*trade_returns(input.pooled, j));
      ReturnWindow w;
      w.stock = input.stock;
      w.global_seq = seq;
      w.aggressor = input.pooled[idx].aggressor;
      w.raw = *raw;
      excess_returns(w, bench_windows);
      res.windows.push_back(std::move(w));
    }
  });
  for (auto& res : partial) {
    out.dropped_no_history += res.dropped_no_history;
    out.dropped_no_benchmark += res.dropped_no_benchmark;
    out.short_benchmark += res.short_benchmark;
    out.windows.insert(out.windows.end(), std::make_move_iterator(res.windows.begin()),
                       std::make_move_iterator(res.windows.end()));
  }
  out.buyer = lag_table(out.windows, Aggressor::buyer);
  out.seller = lag_table(out.windows, Aggressor::seller);
  return out;
}

inline nlohmann::json impact_table_json(const ImpactTable& t) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : t.rows) {
    rows.push_back({{"lag", r.label},
                    {"panel", r.cumulative ? "B" : "A"},
                    {"n", r.n},
                    {"mean_raw_e5", r.mean_raw * 1e5},
                    {"p_raw", r.p_raw},
                    {"stars_raw", significance_stars(r.p_raw)},
                    {"mean_excess_e5", r.mean_excess * 1e5},
                    {"p_excess", r.p_excess},
                    {"stars_excess", significance_stars(r.p_excess)},
                    {"degenerate_raw", r.degenerate_raw},
                    {"degenerate_excess", r.degenerate_excess}});
  }
  return {{"side", to_string(t.side)}, {"n_events", t.n_windows}, {"rows", rows}};
}

inline nlohmann::json impact_report_json(const ImpactResult& res) {
  nlohmann::json j{{"dropped_no_history", res.dropped_no_history},
                   {"dropped_no_benchmark", res.dropped_no_benchmark},
                   {"short_benchmark", res.short_benchmark},
                   {"n_windows", res.windows.size()}};
  j["tables"] = nlohmann::json::array();
  if (res.buyer) j["tables"].push_back(impact_table_json(*res.buyer));
  if (res.seller) j["tables"].push_back(impact_table_json(*res.seller));
  return j;
}

// Table-2-shaped CSV: one row per lag and per cumulative range, per side.
inline void write_impact_csv(std::ostream& out, const ImpactResult& res) {
  out << "side,panel,lag,n,mean_raw_e5,p_raw,stars_raw,mean_excess_e5,p_excess,stars_excess\n";
  for (const auto* t : {res.buyer ? &*res.buyer : nullptr, res.seller ? &*res.seller : nullptr}) {
    if (!t) continue;
    for (const auto& r : t->rows) {
      out << to_string(t->side) << ',' << (r.cumulative ? 'B' : 'A') << ',' << r.label << ','
          << r.n << ',' << detail::render_double(r.mean_raw * 1e5) << ','
          << detail::render_double(r.p_raw) << ',' << significance_stars(r.p_raw) << ','
          << detail::render_double(r.mean_excess * 1e5) << ',' << detail::render_double(r.p_excess)
          << ',' << significance_stars(r.p_excess) << '\n';
    }
  }
}

}  // namespace tnet
