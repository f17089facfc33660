#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "tradenet/core.hpp"
#include "tradenet/csv.hpp"

namespace tnet {

enum class FileFormat { csv, jsonl };

inline FileFormat format_from_string(const std::string& s) {
  if (s == "csv") return FileFormat::csv;
  if (s == "jsonl") return FileFormat::jsonl;
  throw InputError("unknown file format: " + s);
}

struct StreamKey {
  std::string stock;
  Day day = 0;

  auto operator<=>(const StreamKey&) const = default;
};

// Order-flow records indexed by (stock, day), each stream in tape order.
struct OrderTape {
  std::map<StreamKey, std::vector<OrderEvent>> streams;
  std::vector<Diagnostic> diagnostics;

  std::size_t event_count() const {
    std::size_t n = 0;
    for (const auto& [k, v] : streams) n += v.size();
    return n;
  }
};

inline constexpr const char* kOrderCsvHeader =
    "stock,day,timestamp_ms,trader,action,side,price_ticks,size,order_ref";
inline constexpr const char* kTradeCsvHeader =
    "stock,day,timestamp_ms,seller,buyer,price_ticks,size,aggressor,seq";
inline constexpr const char* kQuoteCsvHeader = "stock,day,timestamp_ms,bid_ticks,ask_ticks";
inline constexpr const char* kBarCsvHeader =
    "stock,day,minute,volatility,volume,avg_trade_size,turnover,n_trades,mid_close";

namespace detail {

// Shortest round-trip rendering keeps file output byte-stable across runs.
inline std::string render_double(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  (void)ec;
  return std::string(buf, ptr);
}

// Per-stream validation state shared by the csv and jsonl parsers.
class StreamValidator {
 public:
  // Returns true when the event may be appended; otherwise fills `message`.
  bool admit(const OrderEvent& ev, std::string& message) {
    State& st = state_[StreamKey{ev.stock, ev.day}];
    if (ev.ts < 0 || ev.ts >= kSessionMillis) {
      message = "timestamp outside the 240-minute session";
      return false;
    }
    if (ev.ts < st.last_ts) {
      message = "timestamp regression within (" + ev.stock + ", day " + std::to_string(ev.day) +
                ") stream";
      return false;
    }
    if (ev.action == Action::submit) {
      if (!ev.side) {
        message = "submit without side";
        return false;
      }
      if (ev.price <= 0 || ev.size <= 0) {
        message = "submit requires positive price and size";
        return false;
      }
      if (!st.live.insert(ev.order_ref).second) {
        message = "duplicate order_ref " + std::to_string(ev.order_ref);
        return false;
      }
    } else {
      if (ev.side) {
        message = "cancel must not carry a side";
        return false;
      }
      auto it = st.live.find(ev.order_ref);
      if (it == st.live.end()) {
        message = "cancel references unknown or already-canceled order_ref " +
                  std::to_string(ev.order_ref);
        return false;
      }
      st.live.erase(it);
    }
    st.last_ts = ev.ts;
    return true;
  }

 private:
  struct State {
    Millis last_ts = -1;
    std::set<std::int64_t> live;  // submitted and not yet canceled
  };
  std::map<StreamKey, State> state_;
};

inline bool parse_order_row_csv(std::string_view line, OrderEvent& ev, std::string& message) {
  auto f = csv::split(line);
  if (f.size() != 9) {
    message = "expected 9 fields, got " + std::to_string(f.size());
    return false;
  }
  ev.stock = std::string(f[0]);
  auto day = csv::parse_int(f[1]);
  auto ts = csv::parse_int(f[2]);
  ev.trader = std::string(f[3]);
  auto ref = csv::parse_int(f[8]);
  if (ev.stock.empty() || ev.trader.empty() || !day || !ts || !ref) {
    message = "malformed stock/day/timestamp/trader/order_ref";
    return false;
  }
  ev.day = static_cast<Day>(*day);
  ev.ts = *ts;
  ev.order_ref = *ref;
  if (f[4] == "submit") {
    ev.action = Action::submit;
    ev.side = side_from_string(std::string(f[5]));
    if (!ev.side) {
      message = "submit with missing or unknown side";
      return false;
    }
  } else if (f[4] == "cancel") {
    ev.action = Action::cancel;
    ev.side = std::nullopt;
    if (!f[5].empty()) {
      message = "cancel must leave the side field empty";
      return false;
    }
  } else {
    message = "unknown action '" + std::string(f[4]) + "'";
    return false;
  }
  auto price = csv::parse_int(f[6]);
  auto size = csv::parse_int(f[7]);
  if (!price || !size) {
    message = "malformed price/size";
    return false;
  }
  ev.price = *price;
  ev.size = *size;
  return true;
}

inline bool parse_order_row_jsonl(std::string_view line, OrderEvent& ev, std::string& message) {
  nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
  if (j.is_discarded() || !j.is_object()) {
    message = "invalid JSON object";
    return false;
  }
  try {
    ev.stock = j.at("stock").get<std::string>();
    ev.day = j.at("day").get<Day>();
    ev.ts = j.at("timestamp_ms").get<Millis>();
    ev.trader = j.at("trader").get<std::string>();
    ev.order_ref = j.at("order_ref").get<std::int64_t>();
    std::string action = j.at("action").get<std::string>();
    if (action == "submit") {
      ev.action = Action::submit;
      ev.side = side_from_string(j.at("side").get<std::string>());
      if (!ev.side) {
        message = "submit with unknown side";
        return false;
      }
    } else if (action == "cancel") {
      ev.action = Action::cancel;
      ev.side = std::nullopt;
      if (j.contains("side")) {
        message = "cancel must not carry a side";
        return false;
      }
    } else {
      message = "unknown action '" + action + "'";
      return false;
    }
    ev.price = j.at("price_ticks").get<Ticks>();
    ev.size = j.at("size").get<Shares>();
  } catch (const nlohmann::json::exception& e) {
    message = e.what();
    return false;
  }
  if (ev.stock.empty() || ev.trader.empty()) {
    message = "empty stock or trader id";
    return false;
  }
  return true;
}

}  // namespace detail

// Parses an order tape, validating rows and stream order. Rejected rows are
// dropped with a line-accurate diagnostic; surviving events are grouped by
// (stock, day) in tape order.
inline OrderTape parse_order_tape(std::istream& in, FileFormat fmt) {
  OrderTape tape;
  detail::StreamValidator validator;
  std::string raw;
  std::size_t line_no = 0;
  bool saw_header = false;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line = csv::strip_cr(raw);
    if (line.empty()) continue;
    if (fmt == FileFormat::csv && !saw_header) {
      saw_header = true;
      if (line == kOrderCsvHeader) continue;
      // Headerless files are accepted; fall through and parse as a row.
    }
    OrderEvent ev;
    std::string message;
    bool ok = fmt == FileFormat::csv ? detail::parse_order_row_csv(line, ev, message)
                                     : detail::parse_order_row_jsonl(line, ev, message);
    if (ok && !validator.admit(ev, message)) ok = false;
    if (!ok) {
      tape.diagnostics.push_back({line_no, message});
      continue;
    }
    tape.streams[StreamKey{ev.stock, ev.day}].push_back(std::move(ev));
  }
  return tape;
}

inline OrderTape parse_order_tape_file(const std::string& path, FileFormat fmt) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open order tape: " + path);
  return parse_order_tape(in, fmt);
}

inline void write_order_event(std::ostream& out, const OrderEvent& ev, FileFormat fmt) {
  if (fmt == FileFormat::csv) {
    out << ev.stock << ',' << ev.day << ',' << ev.ts << ',' << ev.trader << ','
        << to_string(ev.action) << ',' << (ev.side ? to_string(*ev.side) : "") << ',' << ev.price
        << ',' << ev.size << ',' << ev.order_ref << '\n';
  } else {
    nlohmann::json j{{"stock", ev.stock},     {"day", ev.day},
                     {"timestamp_ms", ev.ts}, {"trader", ev.trader},
                     {"action", to_string(ev.action)}, {"price_ticks", ev.price},
                     {"size", ev.size},       {"order_ref", ev.order_ref}};
    if (ev.side) j["side"] = to_string(*ev.side);
    out << j.dump() << '\n';
  }
}

inline void write_order_tape(std::ostream& out, const OrderTape& tape, FileFormat fmt) {
  if (fmt == FileFormat::csv) out << kOrderCsvHeader << '\n';
  for (const auto& [key, events] : tape.streams)
    for (const auto& ev : events) write_order_event(out, ev, fmt);
}

inline void write_trade(std::ostream& out, const Trade& t, FileFormat fmt) {
  if (fmt == FileFormat::csv) {
    out << t.stock << ',' << t.day << ',' << t.ts << ',' << t.seller << ',' << t.buyer << ','
        << t.price << ',' << t.size << ',' << to_string(t.aggressor) << ',' << t.seq << '\n';
  } else {
    nlohmann::json j{{"stock", t.stock},   {"day", t.day},     {"timestamp_ms", t.ts},
                     {"seller", t.seller}, {"buyer", t.buyer}, {"price_ticks", t.price},
                     {"size", t.size},     {"aggressor", to_string(t.aggressor)},
                     {"seq", t.seq}};
    out << j.dump() << '\n';
  }
}

inline void write_trades(std::ostream& out, std::span<const Trade> trades, FileFormat fmt) {
  if (fmt == FileFormat::csv) out << kTradeCsvHeader << '\n';
  for (const auto& t : trades) write_trade(out, t, fmt);
}

inline std::vector<Trade> parse_trades(std::istream& in, FileFormat fmt) {
  std::vector<Trade> trades;
  std::string raw;
  std::size_t line_no = 0;
  auto fail = [&](const std::string& what) {
    throw InputError("trades line " + std::to_string(line_no) + ": " + what);
  };
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line = csv::strip_cr(raw);
    if (line.empty()) continue;
    Trade t;
    if (fmt == FileFormat::csv) {
      if (line_no == 1 && line == kTradeCsvHeader) continue;
      auto f = csv::split(line);
      if (f.size() != 9) fail("expected 9 fields");
      auto day = csv::parse_int(f[1]);
      auto ts = csv::parse_int(f[2]);
      auto price = csv::parse_int(f[5]);
      auto size = csv::parse_int(f[6]);
      auto aggr = aggressor_from_string(std::string(f[7]));
      auto seq = csv::parse_int(f[8]);
      if (!day || !ts || !price || !size || !aggr || !seq) fail("malformed field");
      t.stock = std::string(f[0]);
      t.day = static_cast<Day>(*day);
      t.ts = *ts;
      t.seller = std::string(f[3]);
      t.buyer = std::string(f[4]);
      t.price = *price;
      t.size = *size;
      t.aggressor = *aggr;
      t.seq = *seq;
    } else {
      nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
      if (j.is_discarded()) fail("invalid JSON");
      try {
        t.stock = j.at("stock").get<std::string>();
        t.day = j.at("day").get<Day>();
        t.ts = j.at("timestamp_ms").get<Millis>();
        t.seller = j.at("seller").get<std::string>();
        t.buyer = j.at("buyer").get<std::string>();
        t.price = j.at("price_ticks").get<Ticks>();
        t.size = j.at("size").get<Shares>();
        auto aggr = aggressor_from_string(j.at("aggressor").get<std::string>());
        if (!aggr) fail("unknown aggressor");
        t.aggressor = *aggr;
        t.seq = j.at("seq").get<Seq>();
      } catch (const nlohmann::json::exception& e) {
        fail(e.what());
      }
    }
    if (t.size <= 0 || t.seller.empty() || t.buyer.empty()) fail("invalid trade");
    trades.push_back(std::move(t));
  }
  return trades;
}

inline std::vector<Trade> parse_trades_file(const std::string& path, FileFormat fmt) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open trades: " + path);
  return parse_trades(in, fmt);
}

inline void write_quotes(std::ostream& out, std::span<const QuoteRecord> quotes, FileFormat fmt) {
  if (fmt == FileFormat::csv) out << kQuoteCsvHeader << '\n';
  for (const auto& q : quotes) {
    if (fmt == FileFormat::csv) {
      out << q.stock << ',' << q.day << ',' << q.ts << ',';
      if (q.bid) out << *q.bid;
      out << ',';
      if (q.ask) out << *q.ask;
      out << '\n';
    } else {
      nlohmann::json j{{"stock", q.stock}, {"day", q.day}, {"timestamp_ms", q.ts}};
      if (q.bid) j["bid_ticks"] = *q.bid;
      if (q.ask) j["ask_ticks"] = *q.ask;
      out << j.dump() << '\n';
    }
  }
}

inline std::vector<QuoteRecord> parse_quotes(std::istream& in, FileFormat fmt) {
  std::vector<QuoteRecord> quotes;
  std::string raw;
  std::size_t line_no = 0;
  auto fail = [&](const std::string& what) {
    throw InputError("quotes line " + std::to_string(line_no) + ": " + what);
  };
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line = csv::strip_cr(raw);
    if (line.empty()) continue;
    QuoteRecord q;
    if (fmt == FileFormat::csv) {
      if (line_no == 1 && line == kQuoteCsvHeader) continue;
      auto f = csv::split(line);
      if (f.size() != 5) fail("expected 5 fields");
      auto day = csv::parse_int(f[1]);
      auto ts = csv::parse_int(f[2]);
      if (!day || !ts) fail("malformed day/timestamp");
      q.stock = std::string(f[0]);
      q.day = static_cast<Day>(*day);
      q.ts = *ts;
      if (!f[3].empty()) {
        auto bid = csv::parse_int(f[3]);
        if (!bid) fail("malformed bid");
        q.bid = *bid;
      }
      if (!f[4].empty()) {
        auto ask = csv::parse_int(f[4]);
        if (!ask) fail("malformed ask");
        q.ask = *ask;
      }
    } else {
      nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
      if (j.is_discarded()) fail("invalid JSON");
      try {
        q.stock = j.at("stock").get<std::string>();
        q.day = j.at("day").get<Day>();
        q.ts = j.at("timestamp_ms").get<Millis>();
        if (j.contains("bid_ticks")) q.bid = j["bid_ticks"].get<Ticks>();
        if (j.contains("ask_ticks")) q.ask = j["ask_ticks"].get<Ticks>();
      } catch (const nlohmann::json::exception& e) {
        fail(e.what());
      }
    }
    quotes.push_back(std::move(q));
  }
  return quotes;
}

inline std::vector<QuoteRecord> parse_quotes_file(const std::string& path, FileFormat fmt) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open quotes: " + path);
  return parse_quotes(in, fmt);
}

// ---------------------------------------------------------------------------
// Minute bars
// ---------------------------------------------------------------------------

struct MidPoint {
  Millis ts = 0;
  double mid = 0.0;
};

// Collapses a quote stream into mid-price points. One-sided quotes fall back
// to the last trade price at or before the quote; quotes with neither a
// two-sided book nor a prior trade yield no point.
inline std::vector<MidPoint> minute_mid_points(std::span<const QuoteRecord> quotes,
                                               std::span<const Trade> trades) {
  std::vector<MidPoint> mids;
  mids.reserve(quotes.size());
  std::size_t ti = 0;
  std::optional<Ticks> last_trade;
  for (const auto& q : quotes) {
    while (ti < trades.size() && trades[ti].ts <= q.ts) last_trade = trades[ti++].price;
    if (q.bid && q.ask) {
      mids.push_back({q.ts, (static_cast<double>(*q.bid) + static_cast<double>(*q.ask)) / 2.0});
    } else if (last_trade) {
      mids.push_back({q.ts, static_cast<double>(*last_trade)});
    }
  }
  return mids;
}

// Aggregates one (stock, day) into 240 minute bars. Bar t' covers trade
// timestamps in [60s*(t'-1), 60s*t'); its closing mid is the last mid point at
// or before the bar's closing boundary.
inline std::vector<MinuteBar> bar_series(const std::string& stock, Day day,
                                         std::span<const Trade> trades,
                                         std::span<const MidPoint> mids) {
  std::vector<MinuteBar> bars(kMinutesPerDay);
  for (int m = 0; m < kMinutesPerDay; ++m) {
    bars[m].stock = stock;
    bars[m].day = day;
    bars[m].minute = m + 1;
  }
  for (const auto& t : trades) {
    int m = static_cast<int>(t.ts / kMillisPerMinute);
    if (m < 0 || m >= kMinutesPerDay) continue;
    bars[m].volume += t.size;
    bars[m].turnover += static_cast<double>(t.price) * static_cast<double>(t.size);
    bars[m].n_trades += 1;
  }
  for (auto& b : bars)
    if (b.n_trades > 0) b.avg_trade_size = static_cast<double>(b.volume) / b.n_trades;

  // Boundary mids m[0..240]: last point with ts <= 60s*k, then forward/backward
  // filled so every defined-day boundary has a value. A day with no mids at all
  // keeps volatility and mid_close at zero.
  std::vector<double> boundary(kMinutesPerDay + 1, std::numeric_limits<double>::quiet_NaN());
  std::size_t qi = 0;
  double last = std::numeric_limits<double>::quiet_NaN();
  for (int k = 0; k <= kMinutesPerDay; ++k) {
    Millis bound = static_cast<Millis>(k) * kMillisPerMinute;
    while (qi < mids.size() && mids[qi].ts <= bound) last = mids[qi++].mid;
    boundary[k] = last;
  }
  double first_defined = std::numeric_limits<double>::quiet_NaN();
  for (double v : boundary)
    if (!std::isnan(v)) {
      first_defined = v;
      break;
    }
  if (!std::isnan(first_defined)) {
    for (auto& v : boundary) {
      if (std::isnan(v))
        v = first_defined;  // leading boundaries before the first quote
      else
        break;
    }
    for (int k = 1; k <= kMinutesPerDay; ++k) {
      bars[k - 1].mid_close = boundary[k];
      bars[k - 1].volatility = std::abs(std::log(boundary[k]) - std::log(boundary[k - 1]));
    }
  }
  return bars;
}

inline void write_bars(std::ostream& out, std::span<const MinuteBar> bars) {
  out << kBarCsvHeader << '\n';
  for (const auto& b : bars) {
    out << b.stock << ',' << b.day << ',' << b.minute << ',' << detail::render_double(b.volatility)
        << ',' << b.volume << ',' << detail::render_double(b.avg_trade_size) << ','
        << detail::render_double(b.turnover) << ',' << b.n_trades << ','
        << detail::render_double(b.mid_close) << '\n';
  }
}

}  // namespace tnet
