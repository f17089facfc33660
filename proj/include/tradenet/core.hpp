#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace tnet {

using Ticks = std::int64_t;
using Shares = std::int64_t;
using Millis = std::int64_t;  // milliseconds since session open
using Day = std::int32_t;
using Seq = std::int64_t;

// The trading session is modeled as 240 contiguous one-minute bins.
inline constexpr int kMinutesPerDay = 240;
inline constexpr Millis kMillisPerMinute = 60'000;
inline constexpr Millis kSessionMillis = kMinutesPerDay * kMillisPerMinute;

enum class Side { buy, sell };
enum class Action { submit, cancel };
enum class Aggressor { buyer, seller };  // side whose incoming order triggered the execution

// Malformed user input (files, configs, CLI arguments). Maps to exit code 2.
struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Operation invoked outside its stated domain.
struct DomainError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Diagnostic {
  std::size_t line = 0;  // 1-based input line; 0 when not tied to a line
  std::string message;

  bool operator==(const Diagnostic&) const = default;
};

// One submission or cancelation on the order tape.
struct OrderEvent {
  std::string stock;
  Day day = 0;
  Millis ts = 0;
  std::string trader;
  Action action = Action::submit;
  std::optional<Side> side;  // absent for cancels
  Ticks price = 0;           // > 0 for submits
  Shares size = 0;           // > 0 for submits
  std::int64_t order_ref = 0;

  bool operator==(const OrderEvent&) const = default;
};

// One execution. seller == buyer is legal and is exactly the wash-sale pattern
// the downstream motif scan looks for.
struct Trade {
  std::string stock;
  Day day = 0;
  Millis ts = 0;
  std::string seller;
  std::string buyer;
  Ticks price = 0;
  Shares size = 0;
  Aggressor aggressor = Aggressor::buyer;
  Seq seq = 0;  // 1-based within a (stock, day)

  bool operator==(const Trade&) const = default;
};

// Best bid/ask snapshot emitted after an event moved either side.
struct QuoteRecord {
  std::string stock;
  Day day = 0;
  Millis ts = 0;
  std::optional<Ticks> bid;
  std::optional<Ticks> ask;

  bool operator==(const QuoteRecord&) const = default;
};

// Per-minute aggregates of one (stock, day). Empty bars carry zeros, not
// missing values, so the intraday-pattern averages stay total.
struct MinuteBar {
  std::string stock;
  Day day = 0;
  int minute = 0;           // t' in [1, 240]
  double volatility = 0.0;  // |log mid_close(t') - log mid_close(t'-1)|
  Shares volume = 0;        // total traded shares in the bar
  double avg_trade_size = 0.0;
  double turnover = 0.0;    // sum of price * size over the bar's trades
  int n_trades = 0;
  double mid_close = 0.0;   // mid sampled at the bar's closing boundary
};

inline const char* to_string(Side s) { return s == Side::buy ? "buy" : "sell"; }
inline const char* to_string(Action a) { return a == Action::submit ? "submit" : "cancel"; }
inline const char* to_string(Aggressor a) { return a == Aggressor::buyer ? "buyer" : "seller"; }

inline std::optional<Side> side_from_string(const std::string& s) {
  if (s == "buy") return Side::buy;
  if (s == "sell") return Side::sell;
  return std::nullopt;
}

inline std::optional<Aggressor> aggressor_from_string(const std::string& s) {
  if (s == "buyer") return Aggressor::buyer;
  if (s == "seller") return Aggressor::seller;
  return std::nullopt;
}

// Runs fn(i) for i in [0, n) on up to `jobs` threads. Callers own determinism:
// results must be written to pre-sized slots indexed by i.
inline void parallel_for(std::size_t n, unsigned jobs, const std::function<void(std::size_t)>& fn) {
  if (n == 0) return;
  if (jobs == 0) jobs = std::thread::hardware_concurrency();
  if (jobs <= 1 || n == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  std::size_t workers = std::min<std::size_t>(jobs, n);
  std::vector<std::exception_ptr> errors(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t i = w; i < n; i += workers) fn(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace tnet
