#pragma once

#include <deque>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "tradenet/core.hpp"

namespace tnet {

struct BookEntry {
  std::int64_t order_ref = 0;
  std::string trader;
  Shares remaining = 0;
  Millis arrival = 0;
};

// Price levels with FIFO queues. Bids iterate best-first (descending price),
// asks likewise (ascending price).
struct OrderBook {
  std::map<Ticks, std::deque<BookEntry>, std::greater<Ticks>> bids;
  std::map<Ticks, std::deque<BookEntry>> asks;

  std::optional<Ticks> best_bid() const {
    return bids.empty() ? std::nullopt : std::optional<Ticks>(bids.begin()->first);
  }
  std::optional<Ticks> best_ask() const {
    return asks.empty() ? std::nullopt : std::optional<Ticks>(asks.begin()->first);
  }
  // Resting volume an incoming buy (sell) limit at `limit` would have to clear
  // before reaching the back of the book at that price.
  Shares ask_volume_at_or_below(Ticks limit) const {
    Shares v = 0;
    for (auto it = asks.begin(); it != asks.end() && it->first <= limit; ++it)
      for (const auto& e : it->second) v += e.remaining;
    return v;
  }
  Shares bid_volume_at_or_above(Ticks limit) const {
    Shares v = 0;
    for (auto it = bids.begin(); it != bids.end() && it->first >= limit; ++it)
      for (const auto& e : it->second) v += e.remaining;
    return v;
  }
};

// Mid when both sides quote; else the last trade price; else undefined.
inline std::optional<double> mid_price(const OrderBook& book, std::optional<Ticks> last_trade) {
  auto bb = book.best_bid();
  auto ba = book.best_ask();
  if (bb && ba) return (static_cast<double>(*bb) + static_cast<double>(*ba)) / 2.0;
  if (last_trade) return static_cast<double>(*last_trade);
  return std::nullopt;
}

struct ReplayResult {
  std::vector<Trade> trades;
  std::vector<QuoteRecord> quotes;
  std::vector<Diagnostic> diagnostics;
};

// Continuous double auction for one (stock, day): price-time priority,
// executions at the resting order's limit price, residuals rest at their
// limit. Self-crossing is executed like any other match; flagging it is the
// motif scan's job, not the engine's.
class MatchingEngine {
 public:
  MatchingEngine(std::string stock, Day day) : stock_(std::move(stock)), day_(day) {}

  // Processes one validated event and returns the trades it generated, in
  // execution order.
  std::vector<Trade> on_event(const OrderEvent& ev) {
    if (ev.action == Action::cancel) {
      cancel(ev);
      return {};
    }
    return *ev.side == Side::buy ? match_and_rest<Side::buy>(ev) : match_and_rest<Side::sell>(ev);
  }

  const OrderBook& book() const { return book_; }
  std::optional<Ticks> last_trade() const { return last_trade_; }
  Seq trades_so_far() const { return next_seq_ - 1; }
  bool has_order(std::int64_t order_ref) const { return locator_.contains(order_ref); }
  const std::vector<Diagnostic>& diagnostics() const { return diagnostics_; }

 private:
  template <Side Incoming>
  std::vector<Trade> match_and_rest(const OrderEvent& ev) {
    std::vector<Trade> fills;
    Shares remaining = ev.size;
    auto crosses = [&](Ticks level_price) {
      return Incoming == Side::buy ? level_price <= ev.price : level_price >= ev.price;
    };
    auto& opposite_levels = [&]() -> auto& {
      if constexpr (Incoming == Side::buy)
        return book_.asks;
      else
        return book_.bids;
    }();
    while (remaining > 0 && !opposite_levels.empty()) {
      auto level = opposite_levels.begin();
      if (!crosses(level->first)) break;
      auto& queue = level->second;
      BookEntry& resting = queue.front();
      Shares fill = std::min(remaining, resting.remaining);
      Trade t;
      t.stock = stock_;
      t.day = day_;
      t.ts = ev.ts;
      t.price = level->first;
      t.size = fill;
      t.seq = next_seq_++;
      if constexpr (Incoming == Side::buy) {
        t.seller = resting.trader;
        t.buyer = ev.trader;
        t.aggressor = Aggressor::buyer;
      } else {
        t.seller = ev.trader;
        t.buyer = resting.trader;
        t.aggressor = Aggressor::seller;
      }
      fills.push_back(std::move(t));
      last_trade_ = level->first;
      remaining -= fill;
      resting.remaining -= fill;
      if (resting.remaining == 0) {
        locator_.erase(resting.order_ref);
        queue.pop_front();
        if (queue.empty()) opposite_levels.erase(level);
      }
    }
    if (remaining > 0) {
      BookEntry entry{ev.order_ref, ev.trader, remaining, ev.ts};
      if constexpr (Incoming == Side::buy)
        book_.bids[ev.price].push_back(std::move(entry));
      else
        book_.asks[ev.price].push_back(std::move(entry));
      locator_[ev.order_ref] = {Incoming, ev.price};
    }
    return fills;
  }

  void cancel(const OrderEvent& ev) {
    auto it = locator_.find(ev.order_ref);
    if (it == locator_.end()) {
      diagnostics_.push_back(
          {0, "cancel of filled or unknown order_ref " + std::to_string(ev.order_ref) + " at ts " +
                  std::to_string(ev.ts)});
      return;
    }
    auto [side, price] = it->second;
    auto erase_from = [&](auto& levels) {
      auto level = levels.find(price);
      auto& queue = level->second;
      for (auto qit = queue.begin(); qit != queue.end(); ++qit) {
        if (qit->order_ref == ev.order_ref) {
          queue.erase(qit);
          break;
        }
      }
      if (queue.empty()) levels.erase(level);
    };
    if (side == Side::buy)
      erase_from(book_.bids);
    else
      erase_from(book_.asks);
    locator_.erase(it);
  }

  std::string stock_;
  Day day_;
  OrderBook book_;
  std::unordered_map<std::int64_t, std::pair<Side, Ticks>> locator_;
  std::optional<Ticks> last_trade_;
  Seq next_seq_ = 1;
  std::vector<Diagnostic> diagnostics_;
};

// Replays one (stock, day) event stream. A quote record is appended after
// every event that moved the best bid or ask.
inline ReplayResult replay(const std::string& stock, Day day, std::span<const OrderEvent> events) {
  MatchingEngine engine(stock, day);
  ReplayResult result;
  std::optional<Ticks> bid, ask;
  for (const auto& ev : events) {
    auto fills = engine.on_event(ev);
    result.trades.insert(result.trades.end(), std::make_move_iterator(fills.begin()),
                         std::make_move_iterator(fills.end()));
    auto bb = engine.book().best_bid();
    auto ba = engine.book().best_ask();
    if (bb != bid || ba != ask) {
      bid = bb;
      ask = ba;
      result.quotes.push_back({stock, day, ev.ts, bid, ask});
    }
  }
  result.diagnostics = engine.diagnostics();
  return result;
}

}  // namespace tnet
