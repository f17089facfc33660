#include "tradenet/impact.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace tnet;

namespace {

std::vector<Trade> trades_from_prices(const std::vector<Ticks>& prices, Day day = 1,
                                      Millis start_ts = 1000,
                                      Aggressor aggr = Aggressor::buyer) {
  std::vector<Trade> out;
  for (std::size_t i = 0; i < prices.size(); ++i) {
    Trade t;
    t.stock = "S";
    t.day = day;
    t.ts = start_ts + static_cast<Millis>(i) * 100;
    t.seller = "X" + std::to_string(i);
    t.buyer = "Y" + std::to_string(i);
    t.price = prices[i];
    t.size = 10;
    t.aggressor = aggr;
    t.seq = static_cast<Seq>(i + 1);
    out.push_back(std::move(t));
  }
  return out;
}

std::vector<bool> window_mask(const std::vector<Trade>& pooled) {
  std::vector<bool> ok(pooled.size());
  for (std::size_t j = 0; j < pooled.size(); ++j) ok[j] = trade_returns(pooled, j).has_value();
  return ok;
}

}  // namespace

TEST(TradeReturns, ConstantPricesGiveZeroWindow) {
  auto pooled = trades_from_prices(std::vector<Ticks>(40, 500));
  auto r = trade_returns(pooled, 20);
  ASSERT_TRUE(r.has_value());
  for (double x : *r) EXPECT_EQ(x, 0.0);
}

TEST(TradeReturns, LagZeroIsEventVsPredecessor) {
  std::vector<Ticks> prices(40, 100);
  prices[20] = 101;
  auto pooled = trades_from_prices(prices);
  auto r = trade_returns(pooled, 20);
  ASSERT_TRUE(r.has_value());
  EXPECT_NEAR((*r)[10], std::log(101.0 / 100.0), 1e-15);
}

TEST(TradeReturns, MatchesDirectRecomputation) {
  std::mt19937_64 rng(11);
  std::vector<Ticks> prices;
  Ticks p = 1000;
  for (int i = 0; i < 200; ++i) {
    p += static_cast<Ticks>(rng() % 7) - 3;
    prices.push_back(std::max<Ticks>(p, 100));
  }
  auto pooled = trades_from_prices(prices);
  for (std::size_t m : {15u, 50u, 120u, 188u}) {
    auto r = trade_returns(pooled, m);
    ASSERT_TRUE(r.has_value());
    for (int i = -10; i <= 10; ++i) {
      double want = std::log(static_cast<double>(prices[m + i])) -
                    std::log(static_cast<double>(prices[m + i - 1]));
      EXPECT_DOUBLE_EQ((*r)[i + 10], want);
    }
  }
}

TEST(TradeReturns, InsufficientHistoryOrDayBoundaryUnavailable) {
  auto pooled = trades_from_prices(std::vector<Ticks>(40, 500));
  EXPECT_FALSE(trade_returns(pooled, 5).has_value());    // < 11 before
  EXPECT_FALSE(trade_returns(pooled, 35).has_value());   // < 10 after
  EXPECT_TRUE(trade_returns(pooled, 11).has_value());
  EXPECT_TRUE(trade_returns(pooled, 29).has_value());

  // Two days spliced: a window spanning the boundary is dropped.
  auto day1 = trades_from_prices(std::vector<Ticks>(20, 500), 1);
  auto day2 = trades_from_prices(std::vector<Ticks>(20, 500), 2);
  for (auto& t : day2) t.seq += 0;  // seq restarts per day
  std::vector<Trade> both = day1;
  both.insert(both.end(), day2.begin(), day2.end());
  EXPECT_FALSE(trade_returns(both, 20).has_value());  // needs day 1 tail
  EXPECT_FALSE(trade_returns(both, 25).has_value());
}

TEST(BenchmarkSet, ExactIntradayMatchesWin) {
  // Event on day 21; 20 other days each carry one same-minute trade plus
  // noise trades far away in intraday time.
  std::vector<Trade> pooled;
  auto add_day = [&](Day d) {
    auto day = trades_from_prices(std::vector<Ticks>(45, 500), d, 1000);
    // trade index 22 sits at ts 1000 + 2200.
    for (auto& t : day) t.stock = "S";
    pooled.insert(pooled.end(), day.begin(), day.end());
  };
  for (Day d = 1; d <= 21; ++d) add_day(d);
  std::size_t event_idx = 20 * 45 + 22;  // day 21, middle trade
  auto mask = window_mask(pooled);
  auto got = benchmark_set(pooled, event_idx, {}, mask);
  ASSERT_TRUE(got.has_value());
  ASSERT_EQ(got->size(), 20u);
  for (std::size_t idx : *got) {
    EXPECT_NE(pooled[idx].day, 21);
    EXPECT_EQ(pooled[idx].ts, pooled[event_idx].ts);  // nearest in intraday time
  }
}

TEST(BenchmarkSet, OppositeAggressorTypeIsFilteredOut) {
  std::vector<Trade> pooled;
  auto ev_day = trades_from_prices(std::vector<Ticks>(45, 500), 1, 1000, Aggressor::buyer);
  auto other = trades_from_prices(std::vector<Ticks>(45, 500), 2, 1000, Aggressor::seller);
  pooled.insert(pooled.end(), ev_day.begin(), ev_day.end());
  pooled.insert(pooled.end(), other.begin(), other.end());
  auto mask = window_mask(pooled);
  EXPECT_FALSE(benchmark_set(pooled, 22, {}, mask).has_value());
}

TEST(BenchmarkSet, MatchesIndependentRankingOracle) {
  std::mt19937_64 rng(77);
  std::vector<Trade> pooled;
  for (Day d = 1; d <= 12; ++d) {
    int n = 40 + static_cast<int>(rng() % 30);
    std::vector<Ticks> prices(n, 500);
    auto day = trades_from_prices(prices, d, 500 + static_cast<Millis>(rng() % 5000));
    for (auto& t : day) {
      t.ts += static_cast<Millis>(rng() % 100000);
      t.aggressor = (rng() & 1) ? Aggressor::buyer : Aggressor::seller;
    }
    std::sort(day.begin(), day.end(), [](const Trade& a, const Trade& b) { return a.ts < b.ts; });
    for (int i = 0; i < n; ++i) day[i].seq = i + 1;
    pooled.insert(pooled.end(), day.begin(), day.end());
  }
  auto mask = window_mask(pooled);
  std::unordered_set<Seq> events{50, 200};
  for (std::size_t event_idx : {60u, 150u, 300u}) {
    if (!mask[event_idx]) continue;
    auto got = benchmark_set(pooled, event_idx, events, mask);

    // Oracle: full sort by the stated key.
    struct Key {
      Millis dt;
      Day dd;
      Seq seq;
      std::size_t idx;
    };
    std::vector<Key> cand;
    const Trade& ev = pooled[event_idx];
    for (std::size_t j = 0; j < pooled.size(); ++j) {
      const Trade& t = pooled[j];
      if (t.day == ev.day || t.aggressor != ev.aggressor || !mask[j]) continue;
      if (events.contains(static_cast<Seq>(j + 1))) continue;
      cand.push_back({std::abs(t.ts - ev.ts), std::abs(t.day - ev.day),
                      static_cast<Seq>(j + 1), j});
    }
    std::sort(cand.begin(), cand.end(), [](const Key& a, const Key& b) {
      return std::tie(a.dt, a.dd, a.seq) < std::tie(b.dt, b.dd, b.seq);
    });
    if (cand.size() < 5) {
      EXPECT_FALSE(got.has_value());
      continue;
    }
    ASSERT_TRUE(got.has_value());
    std::vector<std::size_t> want;
    for (std::size_t k = 0; k < std::min<std::size_t>(cand.size(), 20); ++k)
      want.push_back(cand[k].idx);
    EXPECT_EQ(*got, want);
  }
}

TEST(ExcessReturns, SelfSubtractionAndZeroBenchmarks) {
  ReturnWindow w;
  for (int i = 0; i < kImpactWindow; ++i) w.raw[i] = 0.001 * (i - 10);

  std::vector<std::array<double, kImpactWindow>> same{w.raw, w.raw, w.raw};
  excess_returns(w, same);
  for (double x : w.excess) EXPECT_NEAR(x, 0.0, 1e-18);

  std::vector<std::array<double, kImpactWindow>> zeros(4);
  for (auto& z : zeros) z.fill(0.0);
  excess_returns(w, zeros);
  for (int i = 0; i < kImpactWindow; ++i) EXPECT_EQ(w.excess[i], w.raw[i]);
}

TEST(ExcessReturns, RandomWindowsMatchDirectArithmetic) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> noise(0.0, 1e-3);
  ReturnWindow w;
  for (auto& x : w.raw) x = noise(rng);
  std::vector<std::array<double, kImpactWindow>> bench(7);
  for (auto& b : bench)
    for (auto& x : b) x = noise(rng);
  excess_returns(w, bench);
  for (int i = 0; i < kImpactWindow; ++i) {
    double mean = 0.0;
    for (const auto& b : bench) mean += b[i];
    mean /= 7.0;
    EXPECT_NEAR(w.bench[i], mean, 1e-15);
    EXPECT_NEAR(w.excess[i], w.raw[i] - mean, 1e-15);
  }
}

TEST(LagTable, DegenerateConstantLagZero) {
  std::vector<ReturnWindow> ws(5);
  for (auto& w : ws) {
    w.aggressor = Aggressor::buyer;
    w.raw.fill(0.0);
    w.excess.fill(0.0);
    w.raw[10] = 0.00144;  // same nonzero constant at lag 0 in every window
    w.excess[10] = 0.00144;
  }
  auto table = lag_table(ws, Aggressor::buyer);
  ASSERT_TRUE(table.has_value());
  const LagRow& lag0 = table->rows[10];
  EXPECT_EQ(lag0.label, "0");
  EXPECT_DOUBLE_EQ(lag0.mean_raw, 0.00144);
  EXPECT_EQ(lag0.p_raw, 0.0);
  EXPECT_TRUE(lag0.degenerate_raw);
}

TEST(LagTable, NeedsTwoWindows) {
  std::vector<ReturnWindow> one(1);
  one[0].aggressor = Aggressor::buyer;
  EXPECT_FALSE(lag_table(one, Aggressor::buyer).has_value());
  EXPECT_FALSE(lag_table(one, Aggressor::seller).has_value());
}

TEST(LagTable, CumulativeLinearityIdentity) {
  std::mt19937_64 rng(13);
  std::normal_distribution<double> noise(0.0, 1e-3);
  std::vector<ReturnWindow> ws(37);
  for (auto& w : ws) {
    w.aggressor = Aggressor::buyer;
    for (auto& x : w.raw) x = noise(rng);
    for (int i = 0; i < kImpactWindow; ++i) w.excess[i] = w.raw[i] - 1e-4;
  }
  auto table = lag_table(ws, Aggressor::buyer);
  ASSERT_TRUE(table.has_value());
  // Sum of per-lag means over [1,10] equals the mean of per-event sums.
  double lag_sum = 0.0;
  for (int i = 1; i <= 10; ++i) lag_sum += table->rows[i + 10].mean_raw;
  const LagRow& post = table->rows[23];  // "[1,10]"
  EXPECT_EQ(post.label, "[1,10]");
  EXPECT_NEAR(lag_sum, post.mean_raw, 1e-12);

  double pre_sum = 0.0;
  for (int i = -10; i <= -1; ++i) pre_sum += table->rows[i + 10].mean_excess;
  EXPECT_NEAR(pre_sum, table->rows[21].mean_excess, 1e-12);
}

TEST(LagTable, FalsePositiveRateOnNoiseIsNominal) {
  // Miniature of the acceptance calibration: i.i.d. zero-mean noise windows
  // should reject at roughly the nominal 5% rate.
  std::mt19937_64 rng(314);
  std::normal_distribution<double> noise(0.0, 1.0);
  int tests = 0, rejections = 0;
  for (int rep = 0; rep < 150; ++rep) {
    std::vector<ReturnWindow> ws(30);
    for (auto& w : ws) {
      w.aggressor = Aggressor::buyer;
      for (auto& x : w.raw) x = noise(rng);
      w.excess = w.raw;
    }
    auto table = lag_table(ws, Aggressor::buyer);
    for (int i = 0; i < kImpactWindow; ++i) {
      ++tests;
      if (table->rows[i].p_raw < 0.05) ++rejections;
    }
  }
  double rate = static_cast<double>(rejections) / tests;
  EXPECT_GE(rate, 0.02);
  EXPECT_LE(rate, 0.08);
}

TEST(Antisymmetry, MirroredMarketFlipsEverySign) {
  // Prices as powers of two so the mirror p -> 2^20 / p is exact in ticks.
  std::mt19937_64 rng(21);
  std::vector<Ticks> prices;
  int a = 10;
  for (int i = 0; i < 400; ++i) {
    a += static_cast<int>(rng() % 3) - 1;
    a = std::clamp(a, 8, 12);
    prices.push_back(Ticks{1} << a);
  }
  auto original = trades_from_prices(prices, 1, 1000, Aggressor::seller);
  std::vector<Ticks> mirrored_prices;
  for (Ticks p : prices) mirrored_prices.push_back((Ticks{1} << 20) / p);
  auto mirrored = trades_from_prices(mirrored_prices, 1, 1000, Aggressor::buyer);

  auto build = [](const std::vector<Trade>& pooled, Aggressor side) {
    std::vector<ReturnWindow> ws;
    for (std::size_t m = 50; m < 350; m += 13) {
      auto r = trade_returns(pooled, m);
      if (!r) continue;
      ReturnWindow w;
      w.aggressor = side;
      w.raw = *r;
      w.excess = *r;
      ws.push_back(w);
    }
    return ws;
  };
  auto t_orig = lag_table(build(original, Aggressor::seller), Aggressor::seller);
  auto t_mirror = lag_table(build(mirrored, Aggressor::buyer), Aggressor::buyer);
  ASSERT_TRUE(t_orig.has_value() && t_mirror.has_value());
  for (std::size_t i = 0; i < t_orig->rows.size(); ++i)
    EXPECT_NEAR(t_mirror->rows[i].mean_raw, -t_orig->rows[i].mean_raw, 1e-12);
}

TEST(RunImpact, EndToEndCountsAndTables) {
  std::mt19937_64 rng(500);
  std::vector<Trade> pooled;
  for (Day d = 1; d <= 8; ++d) {
    std::vector<Ticks> prices;
    Ticks p = 1000;
    for (int i = 0; i < 80; ++i) {
      p += static_cast<Ticks>(rng() % 5) - 2;
      prices.push_back(std::max<Ticks>(p, 100));
    }
    auto day = trades_from_prices(prices, d);
    for (auto& t : day) t.aggressor = (rng() & 1) ? Aggressor::buyer : Aggressor::seller;
    pooled.insert(pooled.end(), day.begin(), day.end());
  }
  StockImpactInput input;
  input.stock = "S";
  input.pooled = pooled;
  // Events: a spread of pooled seqs, including ones with no history (dropped).
  for (Seq s : {3, 40, 120, 200, 280, 360, 440, 520, 600, 630}) input.event_seqs.push_back(s);
  std::vector<StockImpactInput> inputs{input};
  auto result = run_impact(inputs);
  EXPECT_GT(result.dropped_no_history, 0);
  EXPECT_GT(result.windows.size(), 0u);
  if (result.buyer) EXPECT_EQ(result.buyer->rows.size(), 24u);
  if (result.seller) EXPECT_EQ(result.seller->rows.size(), 24u);
  auto j = impact_report_json(result);
  EXPECT_TRUE(j.contains("tables"));
}
