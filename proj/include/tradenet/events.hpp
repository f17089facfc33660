#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "tradenet/core.hpp"
#include "tradenet/network.hpp"
#include "tradenet/powerlaw.hpp"
#include "tradenet/tape.hpp"

namespace tnet {

// The four minute-level variables tracked around events: volatility, traded
// volume, average trade size, turnover.
enum class BarVariable { v, w_cum, w_ave, f };

inline constexpr std::array<BarVariable, 4> kAllBarVariables{BarVariable::v, BarVariable::w_cum,
                                                             BarVariable::w_ave, BarVariable::f};

inline const char* to_string(BarVariable v) {
  switch (v) {
    case BarVariable::v: return "v";
    case BarVariable::w_cum: return "w_cum";
    case BarVariable::w_ave: return "w_ave";
    default: return "f";
  }
}

using MinuteRow = std::array<double, kMinutesPerDay>;

// One stock's minute bars as a day-by-minute matrix per variable.
struct BarPanel {
  std::string stock;
  std::vector<Day> days;  // sorted; the stock's trading calendar
  std::vector<MinuteRow> v, w_cum, w_ave, f;

  const std::vector<MinuteRow>& matrix(BarVariable var) const {
    switch (var) {
      case BarVariable::v: return v;
      case BarVariable::w_cum: return w_cum;
      case BarVariable::w_ave: return w_ave;
      default: return f;
    }
  }

  std::optional<std::size_t> day_index(Day d) const {
    auto it = std::lower_bound(days.begin(), days.end(), d);
    if (it == days.end() || *it != d) return std::nullopt;
    return static_cast<std::size_t>(it - days.begin());
  }
};

// Builds the panel from per-day bar series (240 bars per day).
inline BarPanel build_bar_panel(const std::string& stock,
                                const std::map<Day, std::vector<MinuteBar>>& bars_by_day) {
  BarPanel panel;
  panel.stock = stock;
  for (const auto& [day, bars] : bars_by_day) {
    if (bars.size() != static_cast<std::size_t>(kMinutesPerDay))
      throw DomainError("bar panel requires 240 bars per day");
    panel.days.push_back(day);
    MinuteRow rv{}, rc{}, ra{}, rf{};
    for (int m = 0; m < kMinutesPerDay; ++m) {
      rv[m] = bars[m].volatility;
      rc[m] = static_cast<double>(bars[m].volume);
      ra[m] = bars[m].avg_trade_size;
      rf[m] = bars[m].turnover;
    }
    panel.v.push_back(rv);
    panel.w_cum.push_back(rc);
    panel.w_ave.push_back(ra);
    panel.f.push_back(rf);
  }
  return panel;
}

struct IntradayPattern {
  std::string stock;
  BarVariable var = BarVariable::v;
  int n_days = 0;
  MinuteRow values{};
};

// Per-minute mean over the stock's trading days.
inline IntradayPattern intraday_pattern(const BarPanel& panel, BarVariable var) {
  if (panel.days.empty()) throw DomainError("intraday_pattern requires at least one day");
  IntradayPattern p;
  p.stock = panel.stock;
  p.var = var;
  p.n_days = static_cast<int>(panel.days.size());
  const auto& mat = panel.matrix(var);
  for (const auto& row : mat)
    for (int m = 0; m < kMinutesPerDay; ++m) p.values[m] += row[m];
  for (auto& x : p.values) x /= p.n_days;
  return p;
}

// Deseasonalized minute values x / pattern, flattened day-major so event
// windows can index across day boundaries. Minutes whose pattern mean is zero
// (the variable never fired there) sit at the no-abnormality baseline 1.
struct DeseasonalizedSeries {
  std::string stock;
  BarVariable var = BarVariable::v;
  std::vector<Day> days;
  std::vector<double> flat;  // days.size() * 240 values

  double at(std::size_t day_idx, int minute1) const {
    return flat[day_idx * kMinutesPerDay + static_cast<std::size_t>(minute1 - 1)];
  }
};

inline DeseasonalizedSeries deseasonalize(const BarPanel& panel, const IntradayPattern& pattern) {
  if (panel.stock != pattern.stock) throw DomainError("pattern belongs to a different stock");
  DeseasonalizedSeries out;
  out.stock = panel.stock;
  out.var = pattern.var;
  out.days = panel.days;
  const auto& mat = panel.matrix(pattern.var);
  out.flat.resize(panel.days.size() * kMinutesPerDay);
  for (std::size_t d = 0; d < mat.size(); ++d)
    for (int m = 0; m < kMinutesPerDay; ++m)
      out.flat[d * kMinutesPerDay + m] =
          pattern.values[m] == 0.0 ? 1.0 : mat[d][m] / pattern.values[m];
  return out;
}

// A suspicious transaction: one edge of a detected motif.
struct EventRef {
  std::string stock;
  Day day = 0;
  int minute = 0;  // t'_0 in [1, 240]
  Seq global_seq = 0;
  Shares size = 0;
  double normalized_size = 0.0;  // size / stock mean trade size
  Aggressor aggressor = Aggressor::buyer;
};

// The union of all motif-instance edges, one event per trade. An edge shared
// by a B- and a C-instance appears once.
inline std::vector<EventRef> motif_events(const TradingNetwork& net, const MotifScan& scan) {
  std::set<std::size_t> edge_set;
  for (const auto& inst : scan.instances) edge_set.insert(inst.edges.begin(), inst.edges.end());
  double mean_size = 0.0;
  for (const auto& e : net.edges) mean_size += static_cast<double>(e.size);
  if (!net.edges.empty()) mean_size /= static_cast<double>(net.edges.size());
  std::vector<EventRef> events;
  events.reserve(edge_set.size());
  for (std::size_t i : edge_set) {
    const TradeEdge& e = net.edges[i];
    EventRef ev;
    ev.stock = net.stock;
    ev.day = e.day;
    ev.minute = static_cast<int>(e.ts / kMillisPerMinute) + 1;
    ev.global_seq = e.global_seq;
    ev.size = e.size;
    ev.normalized_size = mean_size > 0.0 ? static_cast<double>(e.size) / mean_size : 0.0;
    ev.aggressor = e.aggressor;
    events.push_back(std::move(ev));
  }
  return events;
}

// Builds event refs from pooled-sequence numbers (e.g. parsed from a motif
// report). `pooled` must be the stock's trades sorted by (day, seq); global
// sequence k refers to pooled[k-1]. Duplicate seqs collapse to one event.
inline std::vector<EventRef> events_from_pooled(const std::string& stock,
                                                std::span<const Trade> pooled,
                                                std::span<const Seq> seqs) {
  double mean_size = 0.0;
  for (const auto& t : pooled) mean_size += static_cast<double>(t.size);
  if (!pooled.empty()) mean_size /= static_cast<double>(pooled.size());
  std::set<Seq> unique(seqs.begin(), seqs.end());
  std::vector<EventRef> events;
  events.reserve(unique.size());
  for (Seq s : unique) {
    if (s < 1 || static_cast<std::size_t>(s) > pooled.size())
      throw InputError("event seq " + std::to_string(s) + " outside pooled trades of " + stock);
    const Trade& t = pooled[static_cast<std::size_t>(s) - 1];
    EventRef ev;
    ev.stock = stock;
    ev.day = t.day;
    ev.minute = static_cast<int>(t.ts / kMillisPerMinute) + 1;
    ev.global_seq = s;
    ev.size = t.size;
    ev.normalized_size = mean_size > 0.0 ? static_cast<double>(t.size) / mean_size : 0.0;
    ev.aggressor = t.aggressor;
    events.push_back(std::move(ev));
  }
  return events;
}

enum class SizeGroup { L, M, S };

inline const char* to_string(SizeGroup g) {
  switch (g) {
    case SizeGroup::L: return "L";
    case SizeGroup::M: return "M";
    default: return "S";
  }
}

// Greedy size-ranked selection with the distinct-day rule: an event is
// accepted only if no previously accepted event of the group shares its day.
// L scans from the largest trade, S from the smallest, M outward from the
// median of the size-descending order (offsets 0, +1, -1, +2, -2, ...).
// Ties in size break by (day, trade seq).
inline std::vector<EventRef> select_events(std::vector<EventRef> events, SizeGroup group,
                                           int group_size = 20) {
  std::sort(events.begin(), events.end(), [](const EventRef& a, const EventRef& b) {
    if (a.size != b.size) return a.size > b.size;
    return std::pair(a.day, a.global_seq) < std::pair(b.day, b.global_seq);
  });
  std::vector<std::size_t> visit_order;
  visit_order.reserve(events.size());
  std::size_t n = events.size();
  if (group == SizeGroup::L) {
    for (std::size_t i = 0; i < n; ++i) visit_order.push_back(i);
  } else if (group == SizeGroup::S) {
    // From the smallest upward; ties still resolve by (day, seq) ascending.
    std::vector<std::size_t> idx(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = i;
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
      if (events[a].size != events[b].size) return events[a].size < events[b].size;
      return std::pair(events[a].day, events[a].global_seq) <
             std::pair(events[b].day, events[b].global_seq);
    });
    visit_order = std::move(idx);
  } else {
    if (n > 0) {
      std::size_t mid = (n - 1) / 2;
      visit_order.push_back(mid);
      for (std::size_t step = 1; visit_order.size() < n; ++step) {
        if (mid + step < n) visit_order.push_back(mid + step);
        if (step <= mid) visit_order.push_back(mid - step);
      }
    }
  }
  std::vector<EventRef> chosen;
  std::set<Day> used_days;
  for (std::size_t i : visit_order) {
    if (static_cast<int>(chosen.size()) >= group_size) break;
    if (used_days.contains(events[i].day)) continue;
    used_days.insert(events[i].day);
    chosen.push_back(events[i]);
  }
  return chosen;
}

inline constexpr int kWindowHalf = 200;
inline constexpr int kWindowLen = 2 * kWindowHalf + 1;

struct EventWindow {
  EventRef event;
  BarVariable var = BarVariable::v;
  std::array<double, kWindowLen> x{};
};

// The +/-200-minute deseasonalized trajectory around the event. Minutes
// beyond the session borrow the adjacent trading day in the sample calendar;
// events that would need a missing neighbor yield no window.
inline std::optional<EventWindow> extract_window(const DeseasonalizedSeries& series,
                                                 const EventRef& event) {
  auto day_it = std::lower_bound(series.days.begin(), series.days.end(), event.day);
  if (day_it == series.days.end() || *day_it != event.day) return std::nullopt;
  std::int64_t day_idx = day_it - series.days.begin();
  std::int64_t center = day_idx * kMinutesPerDay + (event.minute - 1);
  std::int64_t lo = center - kWindowHalf;
  std::int64_t hi = center + kWindowHalf;
  if (lo < 0 || hi >= static_cast<std::int64_t>(series.flat.size())) return std::nullopt;
  EventWindow w;
  w.event = event;
  w.var = series.var;
  for (int t = -kWindowHalf; t <= kWindowHalf; ++t)
    w.x[t + kWindowHalf] = series.flat[center + t];
  return w;
}

// Pointwise mean trajectory of a group.
inline std::array<double, kWindowLen> group_average(std::span<const EventWindow> windows) {
  if (windows.empty()) throw InputError("group_average requires at least one window");
  std::array<double, kWindowLen> mean{};
  for (const auto& w : windows)
    for (int i = 0; i < kWindowLen; ++i) mean[i] += w.x[i];
  for (auto& m : mean) m /= static_cast<double>(windows.size());
  return mean;
}

struct EventDynamics {
  SlopeFit pre;
  SlopeFit post;
};

// Power-law exponents of the accumulation (t < 0, reflected) and relaxation
// (t > 0) branches of a mean trajectory.
inline EventDynamics event_dynamics_exponents(const std::array<double, kWindowLen>& mean,
                                              int fit_lo = 3, int fit_hi = kWindowHalf) {
  std::vector<double> pre(kWindowHalf), post(kWindowHalf);
  for (int t = 1; t <= kWindowHalf; ++t) {
    pre[t - 1] = mean[kWindowHalf - t];
    post[t - 1] = mean[kWindowHalf + t];
  }
  return {loglog_slope(pre, fit_lo, fit_hi), loglog_slope(post, fit_lo, fit_hi)};
}

// ---------------------------------------------------------------------------
// Whole-study orchestration
// ---------------------------------------------------------------------------

struct StockMarketData {
  std::string stock;
  std::map<Day, std::vector<Trade>> trades;        // per day, seq order
  std::map<Day, std::vector<QuoteRecord>> quotes;  // per day, ts order
};

struct EventStudyConfig {
  int group_size = 20;
  int fit_lo = 3;
  int fit_hi = kWindowHalf;
  std::optional<Aggressor> side;  // restrict events to one aggressor type
};

struct GroupVariableResult {
  SizeGroup group = SizeGroup::L;
  BarVariable var = BarVariable::v;
  int n_windows = 0;
  double mean_normalized_size = 0.0;
  std::array<double, kWindowLen> mean{};
  std::optional<EventDynamics> dynamics;  // absent if the fit range hit zeros
  std::string fit_error;
};

struct EventStudyResult {
  std::vector<GroupVariableResult> results;
  std::vector<std::string> warnings;
};

inline BarPanel panel_from_market(const StockMarketData& data) {
  std::set<Day> days;
  for (const auto& [d, v] : data.trades) days.insert(d);
  for (const auto& [d, v] : data.quotes) days.insert(d);
  std::map<Day, std::vector<MinuteBar>> bars;
  static const std::vector<Trade> no_trades;
  static const std::vector<QuoteRecord> no_quotes;
  for (Day d : days) {
    auto ti = data.trades.find(d);
    auto qi = data.quotes.find(d);
    const auto& trades = ti == data.trades.end() ? no_trades : ti->second;
    const auto& quotes = qi == data.quotes.end() ? no_quotes : qi->second;
    auto mids = minute_mid_points(quotes, trades);
    bars[d] = bar_series(data.stock, d, trades, mids);
  }
  return build_bar_panel(data.stock, bars);
}

// Runs the full study: per-stock deseasonalization, per-stock group
// selection, pooled group averages, and branch exponents.
inline EventStudyResult run_event_study(std::span<const StockMarketData> stocks,
                                        std::span<const std::vector<EventRef>> events_per_stock,
                                        const EventStudyConfig& cfg = {}, unsigned jobs = 1) {
  if (stocks.size() != events_per_stock.size())
    throw DomainError("events_per_stock must parallel stocks");
  EventStudyResult out;

  struct StockPrep {
    std::array<std::optional<DeseasonalizedSeries>, 4> series;
    std::array<std::vector<EventRef>, 3> selected;  // by group
  };
  std::vector<StockPrep> prep(stocks.size());
  parallel_for(stocks.size(), jobs, [&](std::size_t si) {
    BarPanel panel = panel_from_market(stocks[si]);
    if (panel.days.empty()) return;
    for (std::size_t vi = 0; vi < kAllBarVariables.size(); ++vi) {
      auto pat = intraday_pattern(panel, kAllBarVariables[vi]);
      prep[si].series[vi] = deseasonalize(panel, pat);
    }
    std::vector<EventRef> events = events_per_stock[si];
    if (cfg.side) {
      std::erase_if(events, [&](const EventRef& e) { return e.aggressor != *cfg.side; });
    }
    for (SizeGroup g : {SizeGroup::L, SizeGroup::M, SizeGroup::S})
      prep[si].selected[static_cast<int>(g)] = select_events(events, g, cfg.group_size);
  });

  for (SizeGroup g : {SizeGroup::L, SizeGroup::M, SizeGroup::S}) {
    for (std::size_t vi = 0; vi < kAllBarVariables.size(); ++vi) {
      BarVariable var = kAllBarVariables[vi];
      std::vector<EventWindow> windows;
      double norm_sum = 0.0;
      for (std::size_t si = 0; si < stocks.size(); ++si) {
        if (!prep[si].series[vi]) continue;
        for (const EventRef& ev : prep[si].selected[static_cast<int>(g)]) {
          auto w = extract_window(*prep[si].series[vi], ev);
          if (!w) {
            if (vi == 0)
              out.warnings.push_back("event at (" + ev.stock + ", day " +
                                     std::to_string(ev.day) + ", min " +
                                     std::to_string(ev.minute) +
                                     ") lacks an adjacent trading day; dropped");
            continue;
          }
          norm_sum += ev.normalized_size;
          windows.push_back(std::move(*w));
        }
      }
      GroupVariableResult r;
      r.group = g;
      r.var = var;
      r.n_windows = static_cast<int>(windows.size());
      if (!windows.empty()) {
        r.mean = group_average(windows);
        r.mean_normalized_size = norm_sum / static_cast<double>(windows.size());
        try {
          r.dynamics = event_dynamics_exponents(r.mean, cfg.fit_lo, cfg.fit_hi);
        } catch (const DomainError& e) {
          r.fit_error = e.what();
        }
      }
      out.results.push_back(std::move(r));
    }
  }
  return out;
}

inline nlohmann::json event_study_report_json(const EventStudyResult& study,
                                              const EventStudyConfig& cfg) {
  nlohmann::json groups = nlohmann::json::array();
  for (const auto& r : study.results) {
    nlohmann::json j{{"group", to_string(r.group)},
                     {"variable", to_string(r.var)},
                     {"n_events", r.n_windows},
                     {"mean_normalized_size", r.mean_normalized_size},
                     {"trajectory", r.mean}};
    if (r.dynamics) {
      j["beta_pre"] = r.dynamics->pre.beta;
      j["beta_pre_stderr"] = r.dynamics->pre.stderr_;
      j["beta_post"] = r.dynamics->post.beta;
      j["beta_post_stderr"] = r.dynamics->post.stderr_;
    } else if (!r.fit_error.empty()) {
      j["fit_error"] = r.fit_error;
    }
    groups.push_back(std::move(j));
  }
  return {{"fit_range", {cfg.fit_lo, cfg.fit_hi}},
          {"group_size", cfg.group_size},
          {"side", cfg.side ? to_string(*cfg.side) : "both"},
          {"groups", groups},
          {"warnings", study.warnings}};
}

inline void write_trajectories_csv(std::ostream& out, const EventStudyResult& study) {
  out << "group,variable,t,value\n";
  for (const auto& r : study.results) {
    if (r.n_windows == 0) continue;
    for (int t = -kWindowHalf; t <= kWindowHalf; ++t)
      out << to_string(r.group) << ',' << to_string(r.var) << ',' << t << ','
          << detail::render_double(r.mean[t + kWindowHalf]) << '\n';
  }
}

}  // namespace tnet
