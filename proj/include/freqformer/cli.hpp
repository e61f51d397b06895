#pragma once

// Command dispatch for the freqformer tool: sim, compare, demo, check.
// Everything writes to caller-supplied streams so the commands can be driven
// in-process by tests as well as from tools/freqformer.cpp.

#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "freqformer/checks.hpp"
#include "freqformer/layer.hpp"
#include "freqformer/perf_model.hpp"
#include "freqformer/report.hpp"
#include "json.hpp"

namespace freqformer {

/// Bad command line (empty N list, unknown kind, ...). Exit code 2.
class usage_error : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum ExitCode { exit_ok = 0, exit_failure = 1, exit_usage = 2, exit_config = 3 };

struct RunSpec {
  std::string kind;
  std::vector<double> n_list;
  std::vector<double> durations;
  std::string profile;  // empty: per-kind default
  CostConfig cost;
  RooflineMode mode = RooflineMode::table_match;
  InputSource source = InputSource::analytic;
  bool separate = false;
  std::string out;       // empty: stdout
  std::string svg_path;  // empty: no plot
};

inline const std::vector<double>& default_n_grid() {
  static const std::vector<double> grid = {65'536, 131'072, 262'144, 524'288, 1'048'576};
  return grid;
}

inline const std::vector<double>& default_durations() {
  static const std::vector<double> d = {5, 10, 20, 40, 80, 120};
  return d;
}

namespace cli_detail {

inline void write_text(const std::string& path, const std::string& text, std::ostream& fallback) {
  if (path.empty() || path == "-") {
    fallback << text;
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw config_error("cannot write '" + path + "'");
  f << text;
}

inline void check_ns(const std::vector<double>& ns) {
  if (ns.empty()) throw usage_error("at least one N is required");
  for (double n : ns)
    if (!(n >= 1) || n != std::floor(n)) throw argument_error("invalid N " + format_fixed(n, 4));
}

// NaN marks "no published cell".
inline std::string deviation_cell(double published, double computed) {
  return std::isnan(published) ? "" : format_deviation(deviation_pct(computed, published));
}

inline constexpr double kNoAnchor = std::numeric_limits<double>::quiet_NaN();

}  // namespace cli_detail

/// One CSV row per N (or duration). The trailing deviation_pct column compares
/// the FreqFormer headline column of the row with the matching published cell,
/// and is blank when no cell exists for that N and profile.
inline std::string cmd_sim(const RunSpec& spec, std::ostream& out,
                           const PublishedTables& tables = PublishedTables::embedded()) {
  using cli_detail::deviation_cell;
  spec.cost.validate();
  const CostConfig& c = spec.cost;
  const std::string& kind = spec.kind;
  const HardwareProfile hw = resolve_profile(spec.profile.empty() ? "h100" : spec.profile);
  if (kind == "duration") {
    if (spec.durations.empty()) throw usage_error("at least one duration is required");
    for (double s : spec.durations)
      if (!(s > 0)) throw argument_error("invalid duration " + format_fixed(s, 4));
  } else {
    cli_detail::check_ns(spec.n_list);
  }
  constexpr double gib = 1024.0 * 1024.0 * 1024.0;
  auto published_row = [&](auto& rows, double n) -> decltype(&rows.front()) {
    for (auto& r : rows)
      if (static_cast<double>(r.n) == n) return &r;
    return nullptr;
  };
  auto time_of = [&](double flops, double bytes, bool fused) {
    return roofline_time(flops, bytes, hw, spec.mode, fused, c.unfused_traffic_multiplier);
  };

  std::vector<PlotSeries> series;
  std::vector<PlotGuide> guides;
  std::string title, xlabel = "tokens N", ylabel;
  auto series_at = [&](std::size_t i, const std::string& name) -> PlotSeries& {
    if (series.size() <= i) series.resize(i + 1);
    series[i].name = name;
    return series[i];
  };

  std::optional<CsvTable> csv;
  if (kind == "flops") {
    csv.emplace(std::vector<std::string>{"n", "dense_flops", "freq_attention_flops", "transform_flops",
                                         "freq_total_flops", "reduction", "deviation_pct"});
    for (double n : spec.n_list) {
      const double dense = flops_dense(n, c), attn = flops_freq_attention(n, c), tr = flops_transform(n, c);
      const auto* p = tables.flops_at(static_cast<std::uint64_t>(n));
      const double anchor = p ? static_cast<double>(p->freq_total) : cli_detail::kNoAnchor;
      csv->add({format_count(n), format_count(dense), format_count(attn), format_count(tr), format_count(attn + tr),
                format_fixed(dense / (attn + tr), 2), deviation_cell(anchor, attn + tr)});
      series_at(0, "dense").points.emplace_back(n, dense);
      series_at(1, "FreqFormer total").points.emplace_back(n, attn + tr);
      if (p) {
        auto& s = series_at(2, "published total");
        s.markers_only = true;
        s.points.emplace_back(n, anchor);
      }
    }
    title = "Per-layer FLOPs", ylabel = "FLOPs";
  } else if (kind == "traffic") {
    csv.emplace(std::vector<std::string>{"n", "dense_bytes", "dense_gib", "freq_bytes", "freq_gib", "reduction",
                                         "deviation_pct"});
    for (double n : spec.n_list) {
      const double dense = traffic_dense(n, c), freq = traffic_freq(n, c);
      const auto* p = tables.traffic_at(static_cast<std::uint64_t>(n));
      const double anchor = p ? static_cast<double>(p->freq_bytes) : cli_detail::kNoAnchor;
      csv->add({format_count(n), format_count(dense), format_fixed(dense / gib, 4), format_count(freq),
                format_fixed(freq / gib, 4), format_fixed(dense / freq, 2), deviation_cell(anchor, freq)});
      series_at(0, "dense").points.emplace_back(n, dense);
      series_at(1, "FreqFormer").points.emplace_back(n, freq);
    }
    title = "Score/KV traffic", ylabel = "bytes";
  } else if (kind == "intensity") {
    csv.emplace(std::vector<std::string>{"n", "dense_intensity", "freq_attention_intensity", "freq_total_intensity",
                                         "deviation_pct"});
    for (double n : spec.n_list) {
      const auto work = freq_work(n, c, spec.source, tables);
      const double attn_flops = work.from_published
                                    ? static_cast<double>(tables.flops_at(static_cast<std::uint64_t>(n))->freq_attention)
                                    : flops_freq_attention(n, c);
      const double dense_i = arithmetic_intensity(flops_dense(n, c), traffic_dense(n, c));
      const double total_i = arithmetic_intensity(work.flops, work.bytes);
      const auto* p = tables.intensity_at(static_cast<std::uint64_t>(n));
      csv->add({format_count(n), format_fixed(dense_i, 4), format_fixed(arithmetic_intensity(attn_flops, work.bytes), 4),
                format_fixed(total_i, 4),
                deviation_cell(p ? p->freq_total : cli_detail::kNoAnchor, total_i)});
      const double dense_rate = flops_dense(n, c) / time_of(flops_dense(n, c), traffic_dense(n, c), true);
      const double freq_rate = work.flops / time_of(work.flops, work.bytes, !spec.separate);
      series_at(0, "dense").points.emplace_back(dense_i, dense_rate);
      series_at(1, "FreqFormer").points.emplace_back(total_i, freq_rate);
    }
    for (auto& s : series) s.markers_only = true;
    PlotGuide roof;
    for (double i = 1; i <= 1e4; i *= 1.25)
      roof.points.emplace_back(i, std::min(hw.p_peak * hw.eta_c, i * hw.b_peak * hw.eta_b));
    guides.push_back(roof);
    title = "Roofline (" + hw.name + ")", xlabel = "FLOPs per byte", ylabel = "achieved FLOP/s";
  } else if (kind == "throughput") {
    const auto& rows = hw.name == "h20" ? tables.h20 : tables.h100;
    const bool anchored = hw.name == "h100" || hw.name == "h20";
    csv.emplace(std::vector<std::string>{"n", "dense_ms", "dense_tokens_per_s", spec.separate ? "freq_separate_ms" : "freq_fused_ms",
                                         "freq_tokens_per_s", "speedup", "deviation_pct"});
    for (double n : spec.n_list) {
      const auto work = freq_work(n, c, spec.source, tables);
      const double dense_s = time_of(flops_dense(n, c), traffic_dense(n, c), true);
      const double freq_s = time_of(work.flops, work.bytes, !spec.separate);
      double anchor = cli_detail::kNoAnchor;
      if (anchored && !spec.separate) {
        if (const auto* p = published_row(rows, n)) anchor = p->freq_ms;
      } else if (hw.name == "h100" && spec.separate) {
        if (const auto* p = tables.fusion_at(static_cast<std::uint64_t>(n))) anchor = p->separate_ms;
      }
      csv->add({format_count(n), format_fixed(dense_s * 1e3, 4), format_fixed(std::round(n / dense_s), 0),
                format_fixed(freq_s * 1e3, 4), format_fixed(std::round(n / freq_s), 0),
                format_fixed(dense_s / freq_s, 2), deviation_cell(anchor, freq_s * 1e3)});
      series_at(0, "dense").points.emplace_back(n, dense_s * 1e3);
      series_at(1, "FreqFormer").points.emplace_back(n, freq_s * 1e3);
    }
    title = "Layer time (" + hw.name + ", " + mode_name(spec.mode) + ")", ylabel = "ms";
  } else if (kind == "fusion") {
    csv.emplace(std::vector<std::string>{"n", "fused_ms", "separate_ms", "fused_tokens_per_s",
                                         "separate_tokens_per_s", "fused_speedup", "deviation_pct"});
    for (double n : spec.n_list) {
      const auto work = freq_work(n, c, spec.source, tables);
      const double fused = time_of(work.flops, work.bytes, true);
      const double sep = time_of(work.flops, work.bytes, false);
      double anchor = cli_detail::kNoAnchor;
      if (hw.name == "h100")
        if (const auto* p = tables.fusion_at(static_cast<std::uint64_t>(n))) anchor = p->separate_ms;
      csv->add({format_count(n), format_fixed(fused * 1e3, 4), format_fixed(sep * 1e3, 4),
                format_fixed(std::round(n / fused), 0), format_fixed(std::round(n / sep), 0),
                format_fixed(sep / fused, 4), deviation_cell(anchor, sep * 1e3)});
      series_at(0, "fused").points.emplace_back(n, fused * 1e3);
      series_at(1, "separate").points.emplace_back(n, sep * 1e3);
    }
    title = "Fused vs separate (" + hw.name + ")", ylabel = "ms";
  } else if (kind == "duration") {
    csv.emplace(std::vector<std::string>{"seconds", "n", "dense_ms", "freq_ms", "speedup", "deviation_pct"});
    for (double s : spec.durations) {
      const double n = static_cast<double>(duration_to_tokens(s));
      const auto work = freq_work(n, c, spec.source, tables);
      const double dense_s = time_of(flops_dense(n, c), traffic_dense(n, c), true);
      const double freq_s = time_of(work.flops, work.bytes, !spec.separate);
      double anchor = cli_detail::kNoAnchor;
      if (hw.name == "h100" && !spec.separate)
        if (const auto* p = tables.duration_at(s)) anchor = p->freq_ms;
      csv->add({format_count(s), format_count(n), format_fixed(dense_s * 1e3, 4), format_fixed(freq_s * 1e3, 4),
                format_fixed(dense_s / freq_s, 2), deviation_cell(anchor, freq_s * 1e3)});
      series_at(0, "dense").points.emplace_back(n, dense_s * 1e3);
      series_at(1, "FreqFormer").points.emplace_back(n, freq_s * 1e3);
    }
    title = "Duration scaling (" + hw.name + ")", ylabel = "ms";
  } else {
    throw usage_error("unknown sim kind '" + kind +
                      "' (expected flops, traffic, intensity, throughput, fusion or duration)");
  }

  const std::string text = csv->str();
  cli_detail::write_text(spec.out, text, out);
  if (!spec.svg_path.empty()) {
    cli_detail::write_text(spec.svg_path, svg_loglog_chart(title, xlabel, ylabel, series, guides), out);
  }
  return text;
}

struct CompareSpec {
  int table = 1;
  CostConfig cost;
  RooflineMode mode = RooflineMode::table_match;
  InputSource source = InputSource::published;
  std::string profile;  // empty: the table's own hardware
  std::string out;
};

/// Deviation report for one published table. Notes go to `notes`; the
/// return value is the CSV text. Deviations never make this fail.
inline std::string cmd_compare(const CompareSpec& spec, std::ostream& out, std::ostream& notes,
                               const PublishedTables& tables = PublishedTables::embedded()) {
  std::optional<HardwareProfile> hw;
  if (!spec.profile.empty()) hw = resolve_profile(spec.profile);
  const TableReport rep = table_report(spec.table, spec.cost, spec.mode, spec.source, hw, tables);
  const std::string text = report_csv(rep);
  cli_detail::write_text(spec.out, text, out);
  notes << "table " << rep.table;
  if (!rep.profile.empty()) notes << " profile=" << rep.profile << " mode=" << mode_name(spec.mode);
  notes << '\n';
  for (const auto& n : rep.notes) notes << "note: " << n << '\n';
  return text;
}

struct DemoSpec {
  LayerConfig layer;
  std::int64_t timestep = 500;
  bool saturate = false;
  std::string out;  // CSV summary; empty: appended to stdout after the text
};

inline constexpr std::size_t kDemoTokenCap = 4096;

inline std::string cmd_demo(const DemoSpec& spec, std::ostream& out) {
  LayerConfig cfg = spec.layer;
  if (cfg.tokens() > kDemoTokenCap) {
    throw argument_error("demo: N = " + std::to_string(cfg.tokens()) + " exceeds the desk-scale cap of " +
                         std::to_string(kDemoTokenCap));
  }
  if (spec.saturate) cfg = cfg.saturated();
  cfg.validate();
  const LayerWeights wt = LayerWeights::random(cfg);
  const Tensor4 x = seeded_tensor(cfg.input_shape(), derive_seed(cfg.seed, 1000), 1.0);
  const LayerTrace trace = layer_forward_traced(cfg, wt, x, spec.timestep);
  const Tensor4 reference = spec.saturate ? band_dense_forward(cfg, wt, x) : dense_reference_forward(cfg, wt, x);
  const auto part = build_partition(cfg.t, cfg.h, cfg.w, cfg.band);
  const ApproxReport rep =
      approximation_report(reference, trace.output, SpectralPlan::dct(cfg.t, cfg.h, cfg.w), part);
  const double sq = rep.eps[0] * rep.eps[0] + rep.eps[1] * rep.eps[1] + rep.eps[2] * rep.eps[2];

  CsvTable csv({"metric", "value"});
  auto sci = [](double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6e", v);
    return std::string(buf);
  };
  csv.add({"tokens", std::to_string(cfg.tokens())});
  csv.add({"n_low", std::to_string(part.n_low())});
  csv.add({"n_low_compressed", std::to_string(part.n_low_compressed())});
  csv.add({"n_mid", std::to_string(part.n_mid())});
  csv.add({"n_high", std::to_string(part.n_high())});
  csv.add({"reference", spec.saturate ? "band_dense" : "dense"});
  const double ref_norm = frobenius_norm(reference.data);
  const double relative = ref_norm > 0 ? rep.total_error / ref_norm : 0.0;
  csv.add({"total_error", sci(rep.total_error)});
  csv.add({"relative_error", sci(relative)});
  csv.add({"eps_low", sci(rep.eps[0])});
  csv.add({"eps_mid", sci(rep.eps[1])});
  csv.add({"eps_high", sci(rep.eps[2])});
  csv.add({"sum_of_squares_gap", sci(std::abs(sq - rep.total_error * rep.total_error))});
  for (Band b : kBands) {
    const auto i = static_cast<std::size_t>(b);
    csv.add({std::string("pi_") + band_name(b), format_fixed(trace.decision.pi[i], 6)});
  }
  for (Band b : kBands) {
    const auto i = static_cast<std::size_t>(b);
    csv.add({std::string("heads_") + band_name(b), std::to_string(trace.decision.heads[i])});
  }
  csv.add({"pairs_low", std::to_string(trace.counts.low)});
  csv.add({"pairs_mid", std::to_string(trace.counts.mid)});
  csv.add({"pairs_high", std::to_string(trace.counts.high)});
  csv.add({"pairs_exchange", std::to_string(trace.counts.exchange)});
  csv.add({"pairs_dense", std::to_string(static_cast<std::uint64_t>(cfg.n_heads) * count_interactions_dense(cfg.tokens(), cfg.tokens()))});

  out << "layer " << cfg.t << "x" << cfg.h << "x" << cfg.w << " d_model=" << cfg.d_model
      << " heads=" << cfg.n_heads << " routing=" << (cfg.routing == HeadRouting::routed ? "routed" : "broadcast")
      << " timestep=" << spec.timestep << " seed=" << cfg.seed << (spec.saturate ? " saturated" : "") << '\n';
  out << "bands: low=" << part.n_low() << " (compressed " << part.n_low_compressed() << ") mid=" << part.n_mid()
      << " high=" << part.n_high() << '\n';
  out << "error vs " << (spec.saturate ? "band-dense pipeline" : "dense attention") << ": total=" << sci(rep.total_error)
      << " (relative " << sci(relative) << ") low=" << sci(rep.eps[0]) << " mid=" << sci(rep.eps[1]) << " high=" << sci(rep.eps[2]) << '\n';
  out << "routing pi: low=" << format_fixed(trace.decision.pi[0], 4) << " mid=" << format_fixed(trace.decision.pi[1], 4)
      << " high=" << format_fixed(trace.decision.pi[2], 4) << "  heads: " << trace.decision.heads[0] << "/"
      << trace.decision.heads[1] << "/" << trace.decision.heads[2] << '\n';
  out << "pairs: low=" << trace.counts.low << " mid=" << trace.counts.mid << " high=" << trace.counts.high
      << " exchange=" << trace.counts.exchange << '\n';

  const std::string text = csv.str();
  if (spec.out.empty()) {
    out << '\n' << text;
  } else {
    cli_detail::write_text(spec.out, text, out);
  }
  return text;
}

inline int cmd_check(std::ostream& out, const PublishedTables& tables = PublishedTables::embedded()) {
  return run_checks(out, tables).ok() ? exit_ok : exit_failure;
}

namespace cli_detail {

// Split "a,b,c" entries (CLI11 already splits on spaces) into numbers.
inline std::vector<double> parse_numbers(const std::vector<std::string>& raw, const char* what) {
  std::vector<double> out;
  for (const auto& item : raw) {
    std::stringstream ss(item);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
      if (tok.empty()) continue;
      std::size_t used = 0;
      double v = 0;
      try {
        v = std::stod(tok, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != tok.size()) throw usage_error(std::string("invalid ") + what + " '" + tok + "'");
      out.push_back(v);
    }
  }
  return out;
}

inline nlohmann::json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw config_error("cannot read config '" + path + "'");
  try {
    nlohmann::json j;
    in >> j;
    return j;
  } catch (const nlohmann::json::exception& e) {
    throw config_error("config '" + path + "': " + e.what());
  }
}

}  // namespace cli_detail

/// Parse and dispatch. `args` excludes the program name.
inline int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"FreqFormer reference layer and analytic performance simulator", "freqformer"};
  app.require_subcommand(1);

  std::string config_path;
  app.add_option("--config", config_path, "JSON file with cost-model keys and optional profile/mode");

  // sim
  auto* sim = app.add_subcommand("sim", "Simulate one cost table over N (or durations)");
  RunSpec run;
  std::vector<std::string> n_raw, dur_raw;
  std::string mode_s, source_s = "analytic";
  std::optional<double> offset;
  std::optional<std::string> svg;
  sim->add_option("kind", run.kind, "flops|traffic|intensity|throughput|fusion|duration")->required();
  auto* n_opt = sim->add_option("--n", n_raw, "token counts (space or comma separated)")->expected(0, -1);
  auto* dur_opt = sim->add_option("--duration", dur_raw, "video durations in seconds")->expected(0, -1);
  sim->add_option("--profile", run.profile, "h100, h20 or a profile JSON path");
  sim->add_option("--mode", mode_s, "roofline-max or table-match");
  sim->add_option("--source", source_s, "analytic or published FreqFormer totals");
  sim->add_option("--transform-offset", offset, "log2 offset of the transform cost (0 or 4)");
  sim->add_flag("--separate", run.separate, "model unfused execution");
  sim->add_option("--out", run.out, "CSV output path (default stdout)");
  sim->add_option("--svg", svg, "write a log-log SVG plot to this path")->expected(0, 1);
  sim->add_option("--seed", "accepted for uniformity; the analytic model is deterministic");

  // compare
  auto* compare = app.add_subcommand("compare", "Deviation report against a published table");
  CompareSpec cmp;
  std::string cmp_mode, cmp_source = "published";
  std::optional<double> cmp_offset;
  compare->add_option("--table", cmp.table, "table id 1-7")->required();
  compare->add_option("--profile", cmp.profile, "h100, h20 or a profile JSON path");
  compare->add_option("--mode", cmp_mode, "roofline-max or table-match");
  compare->add_option("--source", cmp_source, "analytic or published FreqFormer totals");
  compare->add_option("--transform-offset", cmp_offset, "log2 offset of the transform cost (0 or 4)");
  compare->add_option("--out", cmp.out, "CSV output path (default stdout)");

  // demo
  auto* demo = app.add_subcommand("demo", "Run the reference layer at desk scale");
  DemoSpec dm;
  bool no_exchange = false;
  demo->add_option("--frames", dm.layer.t, "T, frames");
  demo->add_option("--height", dm.layer.h, "H, rows per frame");
  demo->add_option("--width", dm.layer.w, "W, columns per frame");
  demo->add_option("--d-model", dm.layer.d_model, "model width");
  demo->add_option("--heads", dm.layer.n_heads, "attention heads (d_k = d_model / heads)");
  demo->add_option("--timestep", dm.timestep, "diffusion timestep");
  demo->add_option("--seed", dm.layer.seed, "weight and input seed");
  demo->add_flag("--saturate", dm.saturate, "saturate every band operator and compare with the band-dense pipeline");
  demo->add_flag("--no-exchange", no_exchange, "disable cross-band exchange");
  demo->add_option("--out", dm.out, "CSV summary path (default stdout)");

  auto* check = app.add_subcommand("check", "Run the invariant suite");

  std::vector<std::string> argv_rev(args.rbegin(), args.rend());
  try {
    app.parse(argv_rev);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << app.help();
      return exit_ok;
    }
    err << "error: " << e.what() << '\n';
    return exit_usage;
  }

  try {
    // defaults < config file < flags
    CostConfig cost;
    std::string cfg_profile, cfg_mode;
    if (!config_path.empty()) {
      const nlohmann::json j = cli_detail::load_json(config_path);
      try {
        cost.merge_json(j);
        if (j.contains("profile")) cfg_profile = j.at("profile").get<std::string>();
        if (j.contains("mode")) cfg_mode = j.at("mode").get<std::string>();
      } catch (const nlohmann::json::exception& e) {
        throw config_error("config '" + config_path + "': " + e.what());
      }
    }

    if (sim->parsed()) {
      run.cost = cost;
      if (offset) run.cost.transform_log_offset = *offset;
      if (run.profile.empty()) run.profile = cfg_profile;
      if (run.profile.empty() && run.kind == "throughput") run.profile = "h100";
      run.mode = parse_mode(!mode_s.empty() ? mode_s : (!cfg_mode.empty() ? cfg_mode : "table-match"));
      run.source = parse_source(source_s);
      run.n_list = n_opt->count() ? cli_detail::parse_numbers(n_raw, "N") : default_n_grid();
      run.durations = dur_opt->count() ? cli_detail::parse_numbers(dur_raw, "duration") : default_durations();
      if (svg) run.svg_path = !svg->empty() ? *svg : run.kind + ".svg";
      cmd_sim(run, out);
      return exit_ok;
    }
    if (compare->parsed()) {
      cmp.cost = cost;
      if (cmp_offset) cmp.cost.transform_log_offset = *cmp_offset;
      if (cmp.profile.empty()) cmp.profile = cfg_profile;
      cmp.mode = parse_mode(!cmp_mode.empty() ? cmp_mode : (!cfg_mode.empty() ? cfg_mode : "table-match"));
      cmp.source = parse_source(cmp_source);
      cmd_compare(cmp, out, err);
      return exit_ok;
    }
    if (demo->parsed()) {
      if (dm.layer.n_heads == 0 || dm.layer.d_model % dm.layer.n_heads != 0) {
        throw argument_error("demo: d_model must be a multiple of --heads");
      }
      dm.layer.d_k = dm.layer.d_model / dm.layer.n_heads;
      if (dm.layer.n_heads < 3) dm.layer.routing = HeadRouting::broadcast;
      dm.layer.exchange = !no_exchange;
      cmd_demo(dm, out);
      return exit_ok;
    }
    if (check->parsed()) return cmd_check(out);
  } catch (const usage_error& e) {
    err << "usage error: " << e.what() << '\n';
    return exit_usage;
  } catch (const config_error& e) {
    err << "config error: " << e.what() << '\n';
    return exit_config;
  } catch (const std::invalid_argument& e) {
    err << "argument error: " << e.what() << '\n';
    return exit_usage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return exit_failure;
  }
  return exit_usage;
}

}  // namespace freqformer
