// tradenet: reconstructs trades from order flow, builds trading networks,
// flags abnormal motifs, and measures market dynamics and price impact around
// the flagged trades. One subcommand per pipeline stage; `pipeline` chains
// them. Every run writes a manifest with content hashes of its inputs and
// outputs, so identical runs are diffable by hash.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "tradenet/core.hpp"
#include "tradenet/events.hpp"
#include "tradenet/impact.hpp"
#include "tradenet/manifest.hpp"
#include "tradenet/matching.hpp"
#include "tradenet/network.hpp"
#include "tradenet/powerlaw.hpp"
#include "tradenet/synth.hpp"
#include "tradenet/tape.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct CommonOpts {
  std::string out_dir;
  std::string format = "csv";
  unsigned jobs = 0;
};

std::string tape_filename(tnet::FileFormat fmt) {
  return fmt == tnet::FileFormat::csv ? "tape.csv" : "tape.jsonl";
}
std::string trades_filename(tnet::FileFormat fmt) {
  return fmt == tnet::FileFormat::csv ? "trades.csv" : "trades.jsonl";
}
std::string quotes_filename(tnet::FileFormat fmt) {
  return fmt == tnet::FileFormat::csv ? "quotes.csv" : "quotes.jsonl";
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw tnet::InputError("cannot write " + path.string());
  return out;
}

void write_json_file(const fs::path& path, const json& j) {
  auto out = open_out(path);
  out << j.dump(2) << '\n';
}

json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw tnet::InputError("cannot open " + path);
  json j = json::parse(in, nullptr, false);
  if (j.is_discarded()) throw tnet::InputError("invalid JSON in " + path);
  return j;
}

void write_manifest(const fs::path& dir, tnet::RunManifest& manifest) {
  write_json_file(dir / "run_manifest.json", manifest.to_json());
}

tnet::FileFormat detect_format(const std::string& path, const std::string& flag) {
  if (!flag.empty()) return tnet::format_from_string(flag);
  return path.ends_with(".jsonl") ? tnet::FileFormat::jsonl : tnet::FileFormat::csv;
}

// Groups a flat trade file by stock, pooled across days in (day, seq) order.
std::map<std::string, std::vector<tnet::Trade>> pool_by_stock(std::vector<tnet::Trade> trades) {
  std::map<std::string, std::vector<tnet::Trade>> by_stock;
  for (auto& t : trades) by_stock[t.stock].push_back(std::move(t));
  for (auto& [stock, v] : by_stock)
    std::sort(v.begin(), v.end(), [](const tnet::Trade& a, const tnet::Trade& b) {
      return std::pair(a.day, a.seq) < std::pair(b.day, b.seq);
    });
  return by_stock;
}

// Per-stock union of instance edge sequence numbers from a motif report.
std::map<std::string, std::vector<tnet::Seq>> event_seqs_from_report(const json& report) {
  std::map<std::string, std::vector<tnet::Seq>> out;
  if (!report.contains("stocks")) throw tnet::InputError("motif report: missing stocks");
  for (const auto& stock_block : report["stocks"]) {
    std::set<tnet::Seq> seqs;
    for (const auto& inst : stock_block.at("instances"))
      for (const auto& s : inst.at("trade_seqs")) seqs.insert(s.get<tnet::Seq>());
    out[stock_block.at("stock").get<std::string>()] =
        std::vector<tnet::Seq>(seqs.begin(), seqs.end());
  }
  return out;
}

// ---------------------------------------------------------------------------
// Subcommand bodies
// ---------------------------------------------------------------------------

int run_synth(const std::string& config_path, const std::string& plan_path,
              const CommonOpts& opts, std::uint64_t seed_override, bool has_seed) {
  fs::create_directories(opts.out_dir);
  tnet::MarketConfig cfg = tnet::market_config_from_json(load_json_file(config_path));
  if (has_seed) cfg.seed = seed_override;
  tnet::InjectionPlan plan;
  if (!plan_path.empty()) plan = tnet::injection_plan_from_json(load_json_file(plan_path));
  auto result = tnet::generate(cfg, plan);

  tnet::FileFormat fmt = tnet::format_from_string(opts.format);
  fs::path dir(opts.out_dir);
  fs::path tape_path = dir / tape_filename(fmt);
  {
    auto out = open_out(tape_path);
    tnet::write_order_tape(out, result.tape, fmt);
  }
  fs::path labels_path = dir / "labels.jsonl";
  {
    auto out = open_out(labels_path);
    tnet::write_labels(out, result.labels);
  }
  fs::path outcomes_path = dir / "synth_outcomes.json";
  write_json_file(outcomes_path, tnet::outcomes_json(result.outcomes));

  int voided = 0;
  for (const auto& o : result.outcomes)
    if (o.voided) ++voided;
  std::cerr << "synth: " << result.tape.event_count() << " events, " << result.labels.size()
            << " labels, " << voided << " voided\n";

  tnet::RunManifest manifest;
  manifest.command = "synth";
  manifest.params = {{"config", config_path}, {"plan", plan_path}, {"format", opts.format},
                     {"seed", cfg.seed}};
  manifest.add_input(config_path);
  if (!plan_path.empty()) manifest.add_input(plan_path);
  manifest.add_output(tape_path.string());
  manifest.add_output(labels_path.string());
  manifest.add_output(outcomes_path.string());
  write_manifest(dir, manifest);
  return 0;
}

int run_replay(const std::string& tape_path, const CommonOpts& opts,
               const std::string& in_format) {
  fs::create_directories(opts.out_dir);
  tnet::FileFormat ifmt = detect_format(tape_path, in_format);
  tnet::OrderTape tape = tnet::parse_order_tape_file(tape_path, ifmt);

  std::vector<const std::pair<const tnet::StreamKey, std::vector<tnet::OrderEvent>>*> streams;
  for (const auto& s : tape.streams) streams.push_back(&s);
  std::vector<tnet::ReplayResult> results(streams.size());
  tnet::parallel_for(streams.size(), opts.jobs, [&](std::size_t i) {
    results[i] = tnet::replay(streams[i]->first.stock, streams[i]->first.day, streams[i]->second);
  });

  tnet::FileFormat ofmt = tnet::format_from_string(opts.format);
  fs::path dir(opts.out_dir);
  fs::path trades_path = dir / trades_filename(ofmt);
  fs::path quotes_path = dir / quotes_filename(ofmt);
  fs::path bars_path = dir / "bars.csv";
  json diagnostics = json::array();
  for (const auto& d : tape.diagnostics)
    diagnostics.push_back({{"line", d.line}, {"message", d.message}});
  {
    auto trades_out = open_out(trades_path);
    auto quotes_out = open_out(quotes_path);
    auto bars_out = open_out(bars_path);
    if (ofmt == tnet::FileFormat::csv) trades_out << tnet::kTradeCsvHeader << '\n';
    if (ofmt == tnet::FileFormat::csv) quotes_out << tnet::kQuoteCsvHeader << '\n';
    bars_out << tnet::kBarCsvHeader << '\n';
    for (std::size_t i = 0; i < streams.size(); ++i) {
      for (const auto& t : results[i].trades) tnet::write_trade(trades_out, t, ofmt);
      for (const auto& q : results[i].quotes) {
        if (ofmt == tnet::FileFormat::csv) {
          quotes_out << q.stock << ',' << q.day << ',' << q.ts << ',';
          if (q.bid) quotes_out << *q.bid;
          quotes_out << ',';
          if (q.ask) quotes_out << *q.ask;
          quotes_out << '\n';
        } else {
          json j{{"stock", q.stock}, {"day", q.day}, {"timestamp_ms", q.ts}};
          if (q.bid) j["bid_ticks"] = *q.bid;
          if (q.ask) j["ask_ticks"] = *q.ask;
          quotes_out << j.dump() << '\n';
        }
      }
      auto mids = tnet::minute_mid_points(results[i].quotes, results[i].trades);
      auto bars = tnet::bar_series(streams[i]->first.stock, streams[i]->first.day,
                                   results[i].trades, mids);
      for (const auto& b : bars) {
        bars_out << b.stock << ',' << b.day << ',' << b.minute << ','
                 << tnet::detail::render_double(b.volatility) << ',' << b.volume << ','
                 << tnet::detail::render_double(b.avg_trade_size) << ','
                 << tnet::detail::render_double(b.turnover) << ',' << b.n_trades << ','
                 << tnet::detail::render_double(b.mid_close) << '\n';
      }
      for (const auto& d : results[i].diagnostics)
        diagnostics.push_back({{"stock", streams[i]->first.stock},
                               {"day", streams[i]->first.day},
                               {"message", d.message}});
    }
  }
  fs::path diag_path = dir / "replay_diagnostics.json";
  write_json_file(diag_path, diagnostics);
  if (!diagnostics.empty()) std::cerr << "replay: " << diagnostics.size() << " diagnostics\n";

  tnet::RunManifest manifest;
  manifest.command = "replay";
  manifest.params = {{"tape", tape_path}, {"format", opts.format}};
  manifest.add_input(tape_path);
  manifest.add_output(trades_path.string());
  manifest.add_output(quotes_path.string());
  manifest.add_output(bars_path.string());
  manifest.add_output(diag_path.string());
  write_manifest(dir, manifest);
  return 0;
}

int run_motifs(const std::string& trades_path, const CommonOpts& opts,
               const std::string& in_format) {
  fs::create_directories(opts.out_dir);
  tnet::FileFormat ifmt = detect_format(trades_path, in_format);
  auto by_stock = pool_by_stock(tnet::parse_trades_file(trades_path, ifmt));

  std::vector<std::pair<const std::string*, const std::vector<tnet::Trade>*>> stocks;
  for (const auto& [stock, trades] : by_stock) stocks.push_back({&stock, &trades});
  std::vector<json> blocks(stocks.size());
  std::vector<tnet::TradingNetwork> nets(stocks.size());
  tnet::parallel_for(stocks.size(), opts.jobs, [&](std::size_t i) {
    nets[i] = tnet::build_network(*stocks[i].second);
    auto scan = tnet::detect_motifs(nets[i]);
    blocks[i] = tnet::motif_report_json(nets[i], scan);
  });

  fs::path dir(opts.out_dir);
  json report{{"stocks", blocks}};
  fs::path report_path = dir / "motif_report.json";
  write_json_file(report_path, report);

  tnet::RunManifest manifest;
  manifest.command = "motifs";
  manifest.params = {{"trades", trades_path}};
  manifest.add_input(trades_path);
  manifest.add_output(report_path.string());
  for (std::size_t i = 0; i < stocks.size(); ++i) {
    fs::path edges_path = dir / ("edges_" + *stocks[i].first + ".csv");
    auto out = open_out(edges_path);
    out << "seller,buyer,seq\n";
    for (const auto& e : nets[i].edges)
      out << e.seller << ',' << e.buyer << ',' << e.global_seq << '\n';
    manifest.add_output(edges_path.string());
  }
  write_manifest(dir, manifest);
  return 0;
}

tnet::EventStudyConfig study_config(int group_size, const std::string& fit_range,
                                    const std::string& side) {
  tnet::EventStudyConfig cfg;
  cfg.group_size = group_size;
  if (!fit_range.empty()) {
    auto colon = fit_range.find(':');
    if (colon == std::string::npos) throw tnet::InputError("--fit-range expects LO:HI");
    auto lo = tnet::csv::parse_int(fit_range.substr(0, colon));
    auto hi = tnet::csv::parse_int(fit_range.substr(colon + 1));
    if (!lo || !hi || *lo < 1 || *hi <= *lo || *hi > tnet::kWindowHalf)
      throw tnet::InputError("--fit-range expects 1 <= LO < HI <= 200");
    cfg.fit_lo = static_cast<int>(*lo);
    cfg.fit_hi = static_cast<int>(*hi);
  }
  if (side == "buyer")
    cfg.side = tnet::Aggressor::buyer;
  else if (side == "seller")
    cfg.side = tnet::Aggressor::seller;
  else if (side != "both")
    throw tnet::InputError("--side expects buyer, seller, or both");
  return cfg;
}

int run_eventstudy(const std::string& trades_path, const std::string& quotes_path,
                   const std::string& motifs_path, const CommonOpts& opts, int group_size,
                   const std::string& fit_range, const std::string& side,
                   const std::string& in_format) {
  fs::create_directories(opts.out_dir);
  tnet::FileFormat tfmt = detect_format(trades_path, in_format);
  tnet::FileFormat qfmt = detect_format(quotes_path, in_format);
  auto by_stock = pool_by_stock(tnet::parse_trades_file(trades_path, tfmt));
  auto quotes = tnet::parse_quotes_file(quotes_path, qfmt);
  auto seqs = event_seqs_from_report(load_json_file(motifs_path));

  std::map<std::string, tnet::StockMarketData> data;
  for (auto& [stock, pooled] : by_stock) {
    auto& d = data[stock];
    d.stock = stock;
    for (auto& t : pooled) d.trades[t.day].push_back(t);
  }
  for (auto& q : quotes) data[q.stock].quotes[q.day].push_back(q);
  for (auto& [stock, d] : data) d.stock = stock;

  std::vector<tnet::StockMarketData> stocks;
  std::vector<std::vector<tnet::EventRef>> events;
  for (auto& [stock, d] : data) {
    stocks.push_back(std::move(d));
    auto it = seqs.find(stock);
    auto bt = by_stock.find(stock);
    if (it != seqs.end() && bt != by_stock.end())
      events.push_back(tnet::events_from_pooled(stock, bt->second, it->second));
    else
      events.push_back({});
  }

  tnet::EventStudyConfig cfg = study_config(group_size, fit_range, side);
  auto study = tnet::run_event_study(stocks, events, cfg, opts.jobs);

  fs::path dir(opts.out_dir);
  fs::path report_path = dir / "event_study.json";
  write_json_file(report_path, tnet::event_study_report_json(study, cfg));
  fs::path traj_path = dir / "trajectories.csv";
  {
    auto out = open_out(traj_path);
    tnet::write_trajectories_csv(out, study);
  }

  tnet::RunManifest manifest;
  manifest.command = "eventstudy";
  manifest.params = {{"trades", trades_path},   {"quotes", quotes_path},
                     {"motifs", motifs_path},   {"group_size", cfg.group_size},
                     {"fit_lo", cfg.fit_lo},    {"fit_hi", cfg.fit_hi},
                     {"side", side.empty() ? "both" : side}};
  manifest.add_input(trades_path);
  manifest.add_input(quotes_path);
  manifest.add_input(motifs_path);
  manifest.add_output(report_path.string());
  manifest.add_output(traj_path.string());
  write_manifest(dir, manifest);
  return 0;
}

int run_impact_cmd(const std::string& trades_path, const std::string& motifs_path,
                   const CommonOpts& opts, const std::string& side,
                   const std::string& in_format) {
  fs::create_directories(opts.out_dir);
  tnet::FileFormat tfmt = detect_format(trades_path, in_format);
  auto by_stock = pool_by_stock(tnet::parse_trades_file(trades_path, tfmt));
  auto seqs = event_seqs_from_report(load_json_file(motifs_path));

  tnet::ImpactConfig cfg;
  if (side == "buyer")
    cfg.side = tnet::Aggressor::buyer;
  else if (side == "seller")
    cfg.side = tnet::Aggressor::seller;
  else if (!side.empty() && side != "both")
    throw tnet::InputError("--side expects buyer, seller, or both");

  std::vector<tnet::StockImpactInput> inputs;
  for (auto& [stock, pooled] : by_stock) {
    tnet::StockImpactInput in;
    in.stock = stock;
    in.pooled = std::move(pooled);
    if (auto it = seqs.find(stock); it != seqs.end()) in.event_seqs = it->second;
    inputs.push_back(std::move(in));
  }
  auto result = tnet::run_impact(inputs, cfg, opts.jobs);

  fs::path dir(opts.out_dir);
  fs::path report_path = dir / "impact.json";
  write_json_file(report_path, tnet::impact_report_json(result));
  fs::path table_path = dir / "impact_table.csv";
  {
    auto out = open_out(table_path);
    tnet::write_impact_csv(out, result);
  }

  tnet::RunManifest manifest;
  manifest.command = "impact";
  manifest.params = {{"trades", trades_path},
                     {"motifs", motifs_path},
                     {"side", side.empty() ? "both" : side}};
  manifest.add_input(trades_path);
  manifest.add_input(motifs_path);
  manifest.add_output(report_path.string());
  manifest.add_output(table_path.string());
  write_manifest(dir, manifest);
  return 0;
}

int run_fit(const std::string& sample_path, const CommonOpts& opts, int bootstrap,
            std::uint64_t seed) {
  fs::create_directories(opts.out_dir);
  std::ifstream in(sample_path);
  if (!in) throw tnet::InputError("cannot open sample: " + sample_path);
  std::vector<std::int64_t> sample;
  std::int64_t v;
  while (in >> v) sample.push_back(v);
  if (!in.eof()) throw tnet::InputError("sample file must contain whitespace-separated integers");

  tnet::PowerLawFit fit = tnet::fit_discrete_powerlaw(sample);
  if (bootstrap > 0) {
    fit.p_value = tnet::powerlaw_bootstrap_p(sample, fit, bootstrap, seed);
    fit.p_value_seed = seed;
  }
  fs::path dir(opts.out_dir);
  fs::path report_path = dir / "fit.json";
  write_json_file(report_path, tnet::fit_report_json(fit));
  for (const auto& w : fit.warnings) std::cerr << "fit: " << w << '\n';

  tnet::RunManifest manifest;
  manifest.command = "fit";
  manifest.params = {{"sample", sample_path}, {"bootstrap", bootstrap}, {"seed", seed}};
  manifest.add_input(sample_path);
  manifest.add_output(report_path.string());
  write_manifest(dir, manifest);
  return 0;
}

int run_pipeline(const std::string& config_path, const std::string& plan_path,
                 const CommonOpts& opts, int group_size, const std::string& fit_range,
                 const std::string& side, std::uint64_t seed_override, bool has_seed) {
  fs::path root(opts.out_dir);
  CommonOpts stage = opts;

  stage.out_dir = (root / "synth").string();
  run_synth(config_path, plan_path, stage, seed_override, has_seed);
  tnet::FileFormat fmt = tnet::format_from_string(opts.format);
  std::string tape = (root / "synth" / tape_filename(fmt)).string();

  stage.out_dir = (root / "replay").string();
  run_replay(tape, stage, opts.format);
  std::string trades = (root / "replay" / trades_filename(fmt)).string();
  std::string quotes = (root / "replay" / quotes_filename(fmt)).string();

  stage.out_dir = (root / "motifs").string();
  run_motifs(trades, stage, opts.format);
  std::string motifs = (root / "motifs" / "motif_report.json").string();

  stage.out_dir = (root / "events").string();
  run_eventstudy(trades, quotes, motifs, stage, group_size, fit_range, side, opts.format);

  stage.out_dir = (root / "impact").string();
  run_impact_cmd(trades, motifs, stage, side, opts.format);

  tnet::RunManifest manifest;
  manifest.command = "pipeline";
  manifest.params = {{"config", config_path}, {"plan", plan_path}, {"format", opts.format}};
  manifest.add_input(config_path);
  if (!plan_path.empty()) manifest.add_input(plan_path);
  for (const char* sub : {"synth", "replay", "motifs", "events", "impact"})
    manifest.add_output((root / sub / "run_manifest.json").string());
  write_manifest(root, manifest);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"trading-network surveillance toolkit"};
  app.require_subcommand(1);

  CommonOpts opts;
  std::string config_path, plan_path, tape_path, trades_path, quotes_path, motifs_path,
      sample_path;
  std::string fit_range, side = "both", in_format;
  int group_size = 20;
  int bootstrap = 0;
  std::uint64_t seed = 0;
  bool has_seed = false;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--out", opts.out_dir, "output directory")->required();
    cmd->add_option("--format", opts.format, "csv or jsonl")->check(CLI::IsMember({"csv", "jsonl"}));
    cmd->add_option("--jobs", opts.jobs, "parallel stocks (0 = hardware)");
  };

  auto* synth = app.add_subcommand("synth", "generate a seeded synthetic market");
  synth->add_option("--config", config_path, "market config JSON")->required();
  synth->add_option("--plan", plan_path, "injection plan JSON");
  synth->add_option("--seed", seed, "override the config seed")->each([&](const std::string&) {
    has_seed = true;
  });
  add_common(synth);

  auto* replay = app.add_subcommand("replay", "replay an order tape through the auction");
  replay->add_option("--tape", tape_path, "order tape file")->required();
  replay->add_option("--in-format", in_format, "input format override");
  add_common(replay);

  auto* motifs = app.add_subcommand("motifs", "build networks and detect motifs");
  motifs->add_option("--trades", trades_path, "trades file")->required();
  motifs->add_option("--in-format", in_format, "input format override");
  add_common(motifs);

  auto* eventstudy = app.add_subcommand("eventstudy", "minute-level dynamics around motif trades");
  eventstudy->add_option("--trades", trades_path, "trades file")->required();
  eventstudy->add_option("--quotes", quotes_path, "quotes file")->required();
  eventstudy->add_option("--motifs", motifs_path, "motif report JSON")->required();
  eventstudy->add_option("--group-size", group_size, "events per size group");
  eventstudy->add_option("--fit-range", fit_range, "LO:HI minutes for the exponent fits");
  eventstudy->add_option("--side", side, "buyer, seller, or both");
  eventstudy->add_option("--in-format", in_format, "input format override");
  add_common(eventstudy);

  auto* impact = app.add_subcommand("impact", "trade-by-trade impact around motif trades");
  impact->add_option("--trades", trades_path, "trades file")->required();
  impact->add_option("--motifs", motifs_path, "motif report JSON")->required();
  impact->add_option("--side", side, "buyer, seller, or both");
  impact->add_option("--in-format", in_format, "input format override");
  add_common(impact);

  auto* fit = app.add_subcommand("fit", "discrete power-law tail fit");
  fit->add_option("--sample", sample_path, "whitespace-separated positive integers")->required();
  fit->add_option("--bootstrap", bootstrap, "bootstrap replications for the p-value");
  fit->add_option("--seed", seed, "bootstrap seed");
  add_common(fit);

  auto* pipeline = app.add_subcommand("pipeline", "synth + replay + motifs + eventstudy + impact");
  pipeline->add_option("--config", config_path, "market config JSON")->required();
  pipeline->add_option("--plan", plan_path, "injection plan JSON");
  pipeline->add_option("--group-size", group_size, "events per size group");
  pipeline->add_option("--fit-range", fit_range, "LO:HI minutes for the exponent fits");
  pipeline->add_option("--side", side, "buyer, seller, or both");
  pipeline->add_option("--seed", seed, "override the config seed")->each([&](const std::string&) {
    has_seed = true;
  });
  add_common(pipeline);

  CLI11_PARSE(app, argc, argv);

  try {
    if (synth->parsed()) return run_synth(config_path, plan_path, opts, seed, has_seed);
    if (replay->parsed()) return run_replay(tape_path, opts, in_format);
    if (motifs->parsed()) return run_motifs(trades_path, opts, in_format);
    if (eventstudy->parsed())
      return run_eventstudy(trades_path, quotes_path, motifs_path, opts, group_size, fit_range,
                            side, in_format);
    if (impact->parsed()) return run_impact_cmd(trades_path, motifs_path, opts, side, in_format);
    if (fit->parsed()) return run_fit(sample_path, opts, bootstrap, seed);
    if (pipeline->parsed())
      return run_pipeline(config_path, plan_path, opts, group_size, fit_range, side, seed,
                          has_seed);
  } catch (const tnet::InputError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
