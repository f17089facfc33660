#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "tradenet/core.hpp"
#include "tradenet/matching.hpp"
#include "tradenet/network.hpp"
#include "tradenet/tape.hpp"

namespace tnet {

struct SizeDistribution {
  double log_mean = 2.0;
  double log_sd = 0.7;
  Shares min_size = 2;
};

struct MarketConfig {
  int n_stocks = 1;
  int n_days = 5;
  int n_background_traders = 100;
  double order_rate_per_min = 6.0;
  Ticks tick_size = 1;
  Ticks initial_price = 10000;
  SizeDistribution size_dist;
  double cancel_fraction = 0.1;
  // Fresh trader id per background order: the background flow then forms no
  // motifs at all, so every motif edge is an injected one.
  bool unique_background_traders = false;
  std::uint64_t seed = 1;
};

// Background order rate around each scheduled trade is multiplied by
// 1 + amplitude * max(|dt|, 1)^(-exponent), dt in minutes across the
// flattened day calendar, zero beyond kBumpReachMinutes so bumps of
// well-separated events stay disjoint.
struct BumpProfile {
  double amplitude = 0.0;
  double exponent = 0.1;
};

inline constexpr int kBumpReachMinutes = 400;

struct ScheduledTrade {
  Day day = 1;
  int minute = 1;  // [1, 240]
  Shares size = 1;
  Aggressor aggressor = Aggressor::buyer;
};

struct Injection {
  MotifKind kind = MotifKind::A;
  std::vector<std::string> traders;  // 1 account for A, 2 for B and C
  std::vector<ScheduledTrade> schedule;
  std::optional<BumpProfile> bump;
  // When set, each scheduled trade is staged behind a reference trade so the
  // labeled execution realizes exactly this log price jump at lag 0.
  // Must be > 0 for buyer-initiated entries and < 0 for seller-initiated.
  std::optional<double> price_jump;
};

struct InjectionPlan {
  std::map<std::string, std::vector<Injection>> by_stock;
};

struct LabelRecord {
  std::string stock;
  Day day = 0;
  Millis ts = 0;
  MotifKind kind = MotifKind::A;
  std::vector<std::string> traders;  // [account] for A, [seller, buyer] for B/C
  Shares size = 0;
};

// Everything the generator knows about one scheduled trade's realization.
struct InjectionOutcome {
  std::string stock;
  std::size_t injection_index = 0;
  std::size_t schedule_index = 0;
  MotifKind kind = MotifKind::A;
  Day day = 0;
  Millis ts = 0;
  std::string seller;
  std::string buyer;
  Shares size = 0;
  bool voided = false;
  std::string void_reason;
  std::optional<double> realized_jump;  // log(q / p0) for price-jump entries
};

struct SynthResult {
  OrderTape tape;
  std::vector<LabelRecord> labels;  // sound labels only; voided ones are logged
  std::vector<InjectionOutcome> outcomes;
};

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

struct SeqLess {
  bool operator()(const ScheduledTrade& a, const ScheduledTrade& b) const {
    return std::pair(a.day, a.minute) < std::pair(b.day, b.minute);
  }
};

}  // namespace detail

inline std::string synth_stock_id(int index) { return "S" + std::to_string(index); }

inline void validate_plan(const MarketConfig& cfg, const InjectionPlan& plan) {
  if (cfg.n_stocks <= 0 || cfg.n_days <= 0) throw InputError("config: counts must be positive");
  if (!cfg.unique_background_traders && cfg.n_background_traders <= 0)
    throw InputError("config: n_background_traders must be positive");
  if (cfg.order_rate_per_min <= 0.0) throw InputError("config: order rate must be positive");
  if (cfg.initial_price < 10) throw InputError("config: initial price too small");
  if (cfg.tick_size <= 0) throw InputError("config: tick size must be positive");
  if (cfg.size_dist.min_size <= 0) throw InputError("config: min size must be positive");
  if (cfg.cancel_fraction < 0.0 || cfg.cancel_fraction >= 1.0)
    throw InputError("config: cancel fraction must lie in [0, 1)");

  std::vector<std::string> stock_ids;
  for (int s = 0; s < cfg.n_stocks; ++s) stock_ids.push_back(synth_stock_id(s));
  for (const auto& [stock, injections] : plan.by_stock) {
    if (std::find(stock_ids.begin(), stock_ids.end(), stock) == stock_ids.end())
      throw InputError("plan: unknown stock " + stock);
    std::map<std::pair<Day, int>, int> per_minute;
    for (const auto& inj : injections) {
      std::size_t want = inj.kind == MotifKind::A ? 1 : 2;
      if (inj.traders.size() != want)
        throw InputError("plan: motif " + std::string(to_string(inj.kind)) + " needs " +
                         std::to_string(want) + " trader id(s)");
      for (const auto& t : inj.traders)
        if (t.empty()) throw InputError("plan: empty trader id");
      if (want == 2 && inj.traders[0] == inj.traders[1])
        throw InputError("plan: motif " + std::string(to_string(inj.kind)) +
                         " needs two distinct accounts");
      if (inj.schedule.empty()) throw InputError("plan: empty schedule");
      if (inj.kind == MotifKind::C && inj.schedule.size() < 2)
        throw InputError("plan: motif C needs at least two scheduled trades");
      if (inj.kind == MotifKind::B && inj.schedule.size() < 2)
        throw InputError("plan: motif B needs at least two scheduled trades");
      for (const auto& st : inj.schedule) {
        if (st.day < 1 || st.day > cfg.n_days) throw InputError("plan: day out of range");
        if (st.minute < 1 || st.minute > kMinutesPerDay)
          throw InputError("plan: minute out of range");
        if (st.size <= 0) throw InputError("plan: size must be positive");
        if (inj.price_jump) {
          double j = *inj.price_jump;
          if (!(std::isfinite(j)) || j == 0.0) throw InputError("plan: price_jump must be nonzero");
          if (st.aggressor == Aggressor::buyer && j < 0.0)
            throw InputError("plan: buyer-initiated price_jump must be positive");
          if (st.aggressor == Aggressor::seller && j > 0.0)
            throw InputError("plan: seller-initiated price_jump must be negative");
        }
        // 37 ms injection slots starting mid-minute; more would collide,
        // which is the same-millisecond infeasibility the schema forbids.
        if (++per_minute[{st.day, st.minute}] > 64)
          throw InputError("plan: more than 64 injections in one minute of " + stock);
      }
      if (inj.bump && (inj.bump->amplitude < 0.0 || inj.bump->exponent <= 0.0))
        throw InputError("plan: bump needs amplitude >= 0 and exponent > 0");
    }
  }
}

namespace detail {

class StockGenerator {
 public:
  StockGenerator(const MarketConfig& cfg, std::string stock, int stock_index,
                 const std::vector<Injection>& injections, SynthResult& out)
      : cfg_(cfg),
        stock_(std::move(stock)),
        injections_(injections),
        out_(out),
        rng_(splitmix64(cfg.seed ^ splitmix64(static_cast<std::uint64_t>(stock_index) + 1))),
        size_dist_(cfg.size_dist.log_mean, cfg.size_dist.log_sd),
        ref_price_(cfg.initial_price) {}

  void run() {
    index_schedule();
    for (Day day = 1; day <= cfg_.n_days; ++day) run_day(day);
  }

 private:
  struct SlotRef {
    std::size_t injection;
    std::size_t entry;
  };

  void index_schedule() {
    for (std::size_t i = 0; i < injections_.size(); ++i)
      for (std::size_t k = 0; k < injections_[i].schedule.size(); ++k) {
        const auto& st = injections_[i].schedule[k];
        slots_[{st.day, st.minute}].push_back({i, k});
      }
  }

  double rate_factor(Day day, int minute) const {
    double extra = 0.0;
    std::int64_t here = static_cast<std::int64_t>(day - 1) * kMinutesPerDay + (minute - 1);
    for (const auto& inj : injections_) {
      if (!inj.bump || inj.bump->amplitude == 0.0) continue;
      for (const auto& st : inj.schedule) {
        std::int64_t there =
            static_cast<std::int64_t>(st.day - 1) * kMinutesPerDay + (st.minute - 1);
        std::int64_t gap = std::llabs(here - there);
        if (gap > kBumpReachMinutes) continue;
        double dt = std::max<double>(1.0, static_cast<double>(gap));
        extra += inj.bump->amplitude * std::pow(dt, -inj.bump->exponent);
      }
    }
    return 1.0 + extra;
  }

  Ticks to_tick(double px) const {
    Ticks t = static_cast<Ticks>(std::llround(px / static_cast<double>(cfg_.tick_size))) *
              cfg_.tick_size;
    return std::max<Ticks>(t, cfg_.tick_size);
  }

  Ticks fair_price() const {
    auto mid = mid_price(engine_->book(), engine_->last_trade());
    return mid ? to_tick(*mid) : ref_price_;
  }

  Shares draw_size() {
    double s = size_dist_(rng_);  // lognormal
    return std::max<Shares>(cfg_.size_dist.min_size, static_cast<Shares>(std::llround(s)));
  }

  void emit(OrderEvent ev) {
    last_fills_ = engine_->on_event(ev);
    if (ev.action == Action::submit && engine_->has_order(ev.order_ref))
      live_.push_back({ev.order_ref, ev.trader});
    day_events_.push_back(std::move(ev));
  }

  OrderEvent submit(Millis ts, const std::string& trader, Side side, Ticks price, Shares size) {
    OrderEvent ev;
    ev.stock = stock_;
    ev.day = day_;
    ev.ts = ts;
    ev.trader = trader;
    ev.action = Action::submit;
    ev.side = side;
    ev.price = std::max<Ticks>(price, cfg_.tick_size);
    ev.size = size;
    ev.order_ref = next_ref_++;
    return ev;
  }

  void background_order(Millis ts) {
    // A slice of the flow is cancels of still-live resting orders.
    if (!live_.empty() && unit_(rng_) < cfg_.cancel_fraction) {
      for (int attempt = 0; attempt < 5 && !live_.empty(); ++attempt) {
        std::size_t i = static_cast<std::size_t>(rng_() % live_.size());
        auto [ref, owner] = live_[i];
        live_[i] = live_.back();
        live_.pop_back();
        if (!engine_->has_order(ref)) continue;  // filled since we tracked it
        OrderEvent ev;
        ev.stock = stock_;
        ev.day = day_;
        ev.ts = ts;
        ev.trader = owner;
        ev.action = Action::cancel;
        ev.order_ref = ref;
        emit(std::move(ev));
        return;
      }
    }
    std::string trader = cfg_.unique_background_traders
                             ? "U" + std::to_string(unique_counter_++)
                             : "B" + std::to_string(rng_() % cfg_.n_background_traders);
    Side side = (rng_() & 1) ? Side::buy : Side::sell;
    Ticks mid = fair_price();
    std::int64_t offset = static_cast<std::int64_t>(rng_() % 11) - 5;
    Ticks price = mid + offset * cfg_.tick_size;
    emit(submit(ts, trader, side, price, draw_size()));
  }

  // Places a resting limit plus an immediately marketable counter-order in
  // the same millisecond. The aggressive leg is sized to clear whatever rests
  // ahead at the chosen price, so the scheduled pair meets exactly.
  void inject_plain(Millis ts, const Injection& inj, const SlotRef& slot,
                    const std::string& seller, const std::string& buyer,
                    const ScheduledTrade& st) {
    InjectionOutcome outcome = make_outcome(inj, slot, seller, buyer, st, ts);
    const OrderBook& book = engine_->book();
    auto bb = book.best_bid();
    auto ba = book.best_ask();
    if (st.aggressor == Aggressor::buyer) {
      Ticks q;
      if (ba)
        q = (bb && *ba - *bb >= 2 * cfg_.tick_size) ? *ba - cfg_.tick_size : *ba;
      else
        q = std::max(bb ? *bb + cfg_.tick_size : cfg_.tick_size, fair_price());
      Shares ahead = book.ask_volume_at_or_below(q);
      emit(submit(ts, seller, Side::sell, q, st.size));
      if (!last_fills_.empty()) {
        finish(outcome, false, "resting leg crossed the book");
        return;
      }
      emit(submit(ts, buyer, Side::buy, q, ahead + st.size));
    } else {
      Ticks q;
      if (bb)
        q = (ba && *ba - *bb >= 2 * cfg_.tick_size) ? *bb + cfg_.tick_size : *bb;
      else
        q = std::min(ba ? *ba - cfg_.tick_size : fair_price(), fair_price());
      q = std::max<Ticks>(q, cfg_.tick_size);
      Shares ahead = book.bid_volume_at_or_above(q);
      emit(submit(ts, buyer, Side::buy, q, st.size));
      if (!last_fills_.empty()) {
        finish(outcome, false, "resting leg crossed the book");
        return;
      }
      emit(submit(ts, seller, Side::sell, q, ahead + st.size));
    }
    verify_labeled_fill(outcome, seller, buyer, st.size);
  }

  // Price-jump staging: clear the near side up to the target, plant a
  // reference trade at p0, then execute the labeled pair at q so the labeled
  // trade's lag-0 return is exactly log(q / p0).
  void inject_jump(Millis ts, const Injection& inj, const SlotRef& slot,
                   const std::string& seller, const std::string& buyer,
                   const ScheduledTrade& st) {
    InjectionOutcome outcome = make_outcome(inj, slot, seller, buyer, st, ts);
    const OrderBook& book = engine_->book();
    auto bb = book.best_bid();
    auto ba = book.best_ask();
    Shares ref_size = std::max<Shares>(cfg_.size_dist.min_size, 10);
    double jump = *inj.price_jump;
    if (st.aggressor == Aggressor::buyer) {
      Ticks p0 = fair_price();
      if (bb && p0 <= *bb) p0 = *bb + cfg_.tick_size;
      Ticks q = to_tick(static_cast<double>(p0) * std::exp(jump));
      if (q <= p0) q = p0 + cfg_.tick_size;
      Shares sweep = book.ask_volume_at_or_below(q);
      if (sweep > 0) emit(submit(ts, dummy(), Side::buy, q, sweep));
      emit(submit(ts, dummy(), Side::sell, p0, ref_size));
      std::string d2 = dummy();
      emit(submit(ts, d2, Side::buy, p0, ref_size));
      if (last_fills_.size() != 1 || last_fills_[0].price != p0) {
        finish(outcome, false, "reference trade not realized");
        return;
      }
      emit(submit(ts, seller, Side::sell, q, st.size));
      if (!last_fills_.empty()) {
        finish(outcome, false, "resting leg crossed the book");
        return;
      }
      emit(submit(ts, buyer, Side::buy, q, st.size));
      outcome.realized_jump = std::log(static_cast<double>(q) / static_cast<double>(p0));
    } else {
      Ticks p0 = fair_price();
      if (ba && p0 >= *ba) p0 = *ba - cfg_.tick_size;
      p0 = std::max<Ticks>(p0, 2 * cfg_.tick_size);
      Ticks q = to_tick(static_cast<double>(p0) * std::exp(jump));
      if (q >= p0) q = p0 - cfg_.tick_size;
      if (q < cfg_.tick_size) {
        finish(outcome, false, "target price below one tick");
        return;
      }
      Shares sweep = book.bid_volume_at_or_above(q);
      if (sweep > 0) emit(submit(ts, dummy(), Side::sell, q, sweep));
      emit(submit(ts, dummy(), Side::buy, p0, ref_size));
      std::string d2 = dummy();
      emit(submit(ts, d2, Side::sell, p0, ref_size));
      if (last_fills_.size() != 1 || last_fills_[0].price != p0) {
        finish(outcome, false, "reference trade not realized");
        return;
      }
      emit(submit(ts, buyer, Side::buy, q, st.size));
      if (!last_fills_.empty()) {
        finish(outcome, false, "resting leg crossed the book");
        return;
      }
      emit(submit(ts, seller, Side::sell, q, st.size));
      outcome.realized_jump = std::log(static_cast<double>(q) / static_cast<double>(p0));
    }
    verify_labeled_fill(outcome, seller, buyer, st.size);
  }

  InjectionOutcome make_outcome(const Injection& inj, const SlotRef& slot,
                                const std::string& seller, const std::string& buyer,
                                const ScheduledTrade& st, Millis ts) {
    InjectionOutcome o;
    o.stock = stock_;
    o.injection_index = slot.injection;
    o.schedule_index = slot.entry;
    o.kind = inj.kind;
    o.day = day_;
    o.ts = ts;
    o.seller = seller;
    o.buyer = buyer;
    o.size = st.size;
    return o;
  }

  void verify_labeled_fill(InjectionOutcome& outcome, const std::string& seller,
                           const std::string& buyer, Shares size) {
    // The scheduled pair must meet as the aggressive leg's final fill.
    bool ok = !last_fills_.empty();
    if (ok) {
      const Trade& t = last_fills_.back();
      ok = t.seller == seller && t.buyer == buyer && t.size == size;
    }
    if (!ok) {
      finish(outcome, false, "scheduled counterparties were intercepted");
      return;
    }
    finish(outcome, true, "");
  }

  void finish(InjectionOutcome& outcome, bool sound, const std::string& reason) {
    outcome.voided = !sound;
    outcome.void_reason = reason;
    if (sound) {
      LabelRecord label;
      label.stock = stock_;
      label.day = outcome.day;
      label.ts = outcome.ts;
      label.kind = outcome.kind;
      if (outcome.kind == MotifKind::A)
        label.traders = {outcome.seller};
      else
        label.traders = {outcome.seller, outcome.buyer};
      label.size = outcome.size;
      out_.labels.push_back(std::move(label));
    }
    out_.outcomes.push_back(outcome);
  }

  std::string dummy() { return "D" + std::to_string(dummy_counter_++); }

  // B alternates direction along its schedule; A and C keep one direction.
  std::pair<std::string, std::string> roles(const Injection& inj, std::size_t entry) const {
    if (inj.kind == MotifKind::A) return {inj.traders[0], inj.traders[0]};
    if (inj.kind == MotifKind::B && entry % 2 == 1) return {inj.traders[1], inj.traders[0]};
    return {inj.traders[0], inj.traders[1]};
  }

  void run_day(Day day) {
    day_ = day;
    engine_.emplace(stock_, day);
    live_.clear();
    day_events_.clear();
    next_ref_ = 1;

    for (int minute = 1; minute <= kMinutesPerDay; ++minute) {
      double lambda = cfg_.order_rate_per_min * rate_factor(day, minute);
      std::poisson_distribution<int> arrivals(lambda);
      int n = arrivals(rng_);
      Millis base = static_cast<Millis>(minute - 1) * kMillisPerMinute;
      std::vector<Millis> times(n);
      for (auto& t : times) t = base + static_cast<Millis>(rng_() % kMillisPerMinute);
      std::sort(times.begin(), times.end());

      std::vector<std::pair<Millis, SlotRef>> minute_injections;
      if (auto it = slots_.find({day, minute}); it != slots_.end()) {
        Millis slot_ts = base + 29'000;
        for (const auto& ref : it->second) {
          minute_injections.push_back({slot_ts, ref});
          slot_ts += 37;
        }
      }

      std::size_t bi = 0, ii = 0;
      while (bi < times.size() || ii < minute_injections.size()) {
        bool take_background =
            bi < times.size() &&
            (ii >= minute_injections.size() || times[bi] <= minute_injections[ii].first);
        if (take_background) {
          background_order(times[bi++]);
        } else {
          const auto& [ts, slot] = minute_injections[ii++];
          const Injection& inj = injections_[slot.injection];
          const ScheduledTrade& st = inj.schedule[slot.entry];
          auto [seller, buyer] = roles(inj, slot.entry);
          if (inj.price_jump)
            inject_jump(ts, inj, slot, seller, buyer, st);
          else
            inject_plain(ts, inj, slot, seller, buyer, st);
        }
      }
    }
    ref_price_ = engine_->last_trade().value_or(ref_price_);
    out_.tape.streams[StreamKey{stock_, day_}] = std::move(day_events_);
  }

  const MarketConfig& cfg_;
  std::string stock_;
  const std::vector<Injection>& injections_;
  SynthResult& out_;
  std::mt19937_64 rng_;
  std::lognormal_distribution<double> size_dist_{};
  std::uniform_real_distribution<double> unit_{0.0, 1.0};
  Ticks ref_price_;
  Day day_ = 1;
  std::optional<MatchingEngine> engine_;
  std::vector<std::pair<std::int64_t, std::string>> live_;
  std::vector<OrderEvent> day_events_;
  std::vector<Trade> last_fills_;
  std::int64_t next_ref_ = 1;
  std::int64_t dummy_counter_ = 0;
  std::int64_t unique_counter_ = 0;
  std::map<std::pair<Day, int>, std::vector<SlotRef>> slots_;
};

}  // namespace detail

// Deterministic seeded market generation: zero-intelligence background flow
// plus the plan's labeled manipulator structures. Identical (config, plan)
// yields a byte-identical tape.
inline SynthResult generate(const MarketConfig& cfg, const InjectionPlan& plan) {
  validate_plan(cfg, plan);
  SynthResult out;
  static const std::vector<Injection> none;
  for (int s = 0; s < cfg.n_stocks; ++s) {
    std::string stock = synth_stock_id(s);
    auto it = plan.by_stock.find(stock);
    const auto& injections = it == plan.by_stock.end() ? none : it->second;
    detail::StockGenerator gen(cfg, stock, s, injections, out);
    gen.run();
  }
  // Group labels/outcomes deterministically: generation order is already
  // stock-major, day-major, time-major.
  return out;
}

// ---------------------------------------------------------------------------
// JSON bindings for config, plan, labels
// ---------------------------------------------------------------------------

inline MarketConfig market_config_from_json(const nlohmann::json& j) {
  MarketConfig cfg;
  try {
    cfg.n_stocks = j.value("n_stocks", cfg.n_stocks);
    cfg.n_days = j.value("n_days", cfg.n_days);
    cfg.n_background_traders = j.value("n_background_traders", cfg.n_background_traders);
    cfg.order_rate_per_min = j.value("order_rate_per_min", cfg.order_rate_per_min);
    cfg.tick_size = j.value("tick_size", cfg.tick_size);
    cfg.initial_price = j.value("initial_price_ticks", cfg.initial_price);
    cfg.size_dist.log_mean = j.value("size_log_mean", cfg.size_dist.log_mean);
    cfg.size_dist.log_sd = j.value("size_log_sd", cfg.size_dist.log_sd);
    cfg.size_dist.min_size = j.value("min_size", cfg.size_dist.min_size);
    cfg.cancel_fraction = j.value("cancel_fraction", cfg.cancel_fraction);
    cfg.unique_background_traders =
        j.value("unique_background_traders", cfg.unique_background_traders);
    cfg.seed = j.value("seed", cfg.seed);
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("market config: ") + e.what());
  }
  return cfg;
}

inline nlohmann::json market_config_to_json(const MarketConfig& cfg) {
  return {{"n_stocks", cfg.n_stocks},
          {"n_days", cfg.n_days},
          {"n_background_traders", cfg.n_background_traders},
          {"order_rate_per_min", cfg.order_rate_per_min},
          {"tick_size", cfg.tick_size},
          {"initial_price_ticks", cfg.initial_price},
          {"size_log_mean", cfg.size_dist.log_mean},
          {"size_log_sd", cfg.size_dist.log_sd},
          {"min_size", cfg.size_dist.min_size},
          {"cancel_fraction", cfg.cancel_fraction},
          {"unique_background_traders", cfg.unique_background_traders},
          {"seed", cfg.seed}};
}

inline MotifKind motif_kind_from_string(const std::string& s) {
  if (s == "A") return MotifKind::A;
  if (s == "B") return MotifKind::B;
  if (s == "C") return MotifKind::C;
  throw InputError("unknown motif kind: " + s);
}

inline InjectionPlan injection_plan_from_json(const nlohmann::json& j) {
  InjectionPlan plan;
  try {
    if (!j.contains("stocks")) return plan;
    for (const auto& [stock, arr] : j.at("stocks").items()) {
      for (const auto& ij : arr) {
        Injection inj;
        inj.kind = motif_kind_from_string(ij.at("kind").get<std::string>());
        inj.traders = ij.at("traders").get<std::vector<std::string>>();
        for (const auto& sj : ij.at("schedule")) {
          ScheduledTrade st;
          st.day = sj.at("day").get<Day>();
          st.minute = sj.at("minute").get<int>();
          st.size = sj.at("size").get<Shares>();
          auto aggr = aggressor_from_string(sj.value("aggressor", "buyer"));
          if (!aggr) throw InputError("plan: unknown aggressor");
          st.aggressor = *aggr;
          inj.schedule.push_back(st);
        }
        if (ij.contains("bump"))
          inj.bump = BumpProfile{ij["bump"].at("amplitude").get<double>(),
                                 ij["bump"].at("exponent").get<double>()};
        if (ij.contains("price_jump")) inj.price_jump = ij["price_jump"].get<double>();
        plan.by_stock[stock].push_back(std::move(inj));
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("injection plan: ") + e.what());
  }
  return plan;
}

inline void write_labels(std::ostream& out, std::span<const LabelRecord> labels) {
  for (const auto& l : labels) {
    nlohmann::json j{{"stock", l.stock},          {"day", l.day},
                     {"ts_ms", l.ts},             {"kind", to_string(l.kind)},
                     {"traders", l.traders},      {"size", l.size}};
    out << j.dump() << '\n';
  }
}

inline std::vector<LabelRecord> parse_labels(std::istream& in) {
  std::vector<LabelRecord> labels;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded())
      throw InputError("labels line " + std::to_string(line_no) + ": invalid JSON");
    LabelRecord l;
    l.stock = j.at("stock").get<std::string>();
    l.day = j.at("day").get<Day>();
    l.ts = j.at("ts_ms").get<Millis>();
    l.kind = motif_kind_from_string(j.at("kind").get<std::string>());
    l.traders = j.at("traders").get<std::vector<std::string>>();
    l.size = j.at("size").get<Shares>();
    labels.push_back(std::move(l));
  }
  return labels;
}

inline nlohmann::json outcomes_json(std::span<const InjectionOutcome> outcomes) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& o : outcomes) {
    nlohmann::json j{{"stock", o.stock},
                     {"injection", o.injection_index},
                     {"entry", o.schedule_index},
                     {"kind", to_string(o.kind)},
                     {"day", o.day},
                     {"ts_ms", o.ts},
                     {"seller", o.seller},
                     {"buyer", o.buyer},
                     {"size", o.size},
                     {"voided", o.voided}};
    if (o.voided) j["reason"] = o.void_reason;
    if (o.realized_jump) j["realized_jump"] = *o.realized_jump;
    arr.push_back(std::move(j));
  }
  return arr;
}

}  // namespace tnet
