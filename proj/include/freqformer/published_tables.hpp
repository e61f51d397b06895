#pragma once

// Published per-layer cost tables (FLOPs, traffic, intensity, H100/H20
// throughput, fused vs separate execution, duration scaling), embedded
// verbatim as regression anchors. Nothing here is recomputed; the analytic
// engine in perf_model.hpp is compared against these cells.

#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace freqformer {

struct FlopsRow {
  std::uint64_t n;
  std::uint64_t dense;
  std::uint64_t freq_attention;
  std::uint64_t transform;
  std::uint64_t freq_total;
  double reduction;
};

struct TrafficRow {
  std::uint64_t n;
  std::uint64_t dense_bytes;
  double dense_gib;
  std::uint64_t freq_bytes;
  double freq_gib;
  double reduction;
};

struct IntensityRow {
  std::uint64_t n;
  double dense;
  double freq_attention;
  double freq_total;
};

struct ThroughputRow {
  std::uint64_t n;
  double dense_ms;
  double dense_tokens_per_s;
  double freq_ms;
  double freq_tokens_per_s;
  double speedup;
};

struct FusionRow {
  std::uint64_t n;
  double fused_ms;
  double separate_ms;
  double fused_tokens_per_s;
  double separate_tokens_per_s;
  double fused_speedup;
};

struct DurationRow {
  double seconds;
  std::uint64_t n;
  double dense_ms;
  double freq_ms;
  double speedup;
};

struct PublishedTables {
  std::vector<FlopsRow> flops;            // --table 1
  std::vector<TrafficRow> traffic;        // --table 2
  std::vector<IntensityRow> intensity;    // --table 3
  std::vector<ThroughputRow> h100;        // --table 4
  std::vector<ThroughputRow> h20;         // --table 5
  std::vector<FusionRow> fusion;          // --table 6 (H100)
  std::vector<DurationRow> duration;      // --table 7 (H100)

  static PublishedTables embedded() {
    PublishedTables t;
    t.flops = {
        {65'536, 549'755'813'888ULL, 1'625'366'528ULL, 603'979'776ULL, 2'229'346'304ULL, 246.59},
        {131'072, 2'199'023'255'552ULL, 4'056'154'112ULL, 1'308'622'848ULL, 5'364'776'960ULL, 409.90},
        {262'144, 8'796'093'022'208ULL, 11'314'446'336ULL, 2'818'572'288ULL, 14'133'018'624ULL, 622.37},
        {524'288, 35'184'372'088'832ULL, 35'026'370'560ULL, 6'040'797'184ULL, 41'067'167'744ULL, 856.82},
        {1'048'576, 140'737'488'355'328ULL, 119'789'838'336ULL, 12'884'901'888ULL, 132'674'740'224ULL,
         1'060.70},
    };
    t.traffic = {
        {65'536, 8'589'934'592ULL, 8.0, 25'396'352ULL, 0.0237, 338.24},
        {131'072, 34'359'738'368ULL, 32.0, 63'377'408ULL, 0.0590, 542.14},
        {262'144, 137'438'953'472ULL, 128.0, 176'788'224ULL, 0.1647, 777.19},
        {524'288, 549'755'813'888ULL, 512.0, 547'287'040ULL, 0.5097, 1'004.51},
        {1'048'576, 2'199'023'255'552ULL, 2048.0, 1'871'716'224ULL, 1.7434, 1'174.87},
    };
    t.intensity = {
        {65'536, 64.0, 64.0, 87.7795},   {131'072, 64.0, 64.0, 84.6479},
        {262'144, 64.0, 64.0, 79.9413},  {524'288, 64.0, 64.0, 75.0369},
        {1'048'576, 64.0, 64.0, 70.8834},
    };
    t.h100 = {
        {65'536, 2.2295, 29'394'504, 0.0150, 4'380'358'757, 148.88},
        {131'072, 8.9010, 14'725'078, 0.0277, 4'731'245'487, 321.32},
        {262'144, 35.5808, 7'367'735, 0.0631, 4'154'190'984, 564.13},
        {524'288, 142.2997, 3'684'042, 0.1721, 3'046'840'209, 826.74},
        {1'048'576, 569.1758, 1'842'470, 0.5426, 1'932'867'888, 1'049.31},
    };
    t.h20 = {
        {65'536, 16.8952, 3'878'940, 0.0755, 867'932'971, 223.76},
        {131'072, 67.5313, 1'941'019, 0.1718, 762'937'288, 393.06},
        {262'144, 270.0756, 970'624, 0.4409, 594'572'465, 612.55},
        {524'288, 1'080.2525, 485'350, 1.2679, 413'507'370, 851.97},
        {1'048'576, 4'320.9607, 242'668, 4.0815, 256'918'161, 1'058.67},
    };
    t.fusion = {
        {65'536, 0.0150, 0.0418, 4'380'358'757, 1'568'832'675, 2.7922},
        {131'072, 0.0277, 0.0549, 4'731'245'487, 2'386'088'877, 1.9828},
        {262'144, 0.0631, 0.0903, 4'154'190'984, 2'904'091'006, 1.4304},
        {524'288, 0.1721, 0.1993, 3'046'840'209, 2'630'809'117, 1.1581},
        {1'048'576, 0.5426, 0.5698, 1'932'867'888, 1'840'580'903, 1.0501},
    };
    t.duration = {
        {5, 65'536, 2.2295, 0.0150, 148.88},          {10, 131'072, 8.9010, 0.0277, 321.32},
        {20, 262'144, 35.5808, 0.0631, 564.13},       {40, 524'288, 142.2997, 0.1721, 826.74},
        {80, 1'048'576, 569.1758, 0.5426, 1'049.31},  {120, 1'572'864, 1'280.6289, 1.1234, 1'139.90},
    };
    return t;
  }

  const FlopsRow* flops_at(std::uint64_t n) const {
    for (const auto& r : flops)
      if (r.n == n) return &r;
    return nullptr;
  }
  const TrafficRow* traffic_at(std::uint64_t n) const {
    for (const auto& r : traffic)
      if (r.n == n) return &r;
    return nullptr;
  }
  const IntensityRow* intensity_at(std::uint64_t n) const {
    for (const auto& r : intensity)
      if (r.n == n) return &r;
    return nullptr;
  }
  const FusionRow* fusion_at(std::uint64_t n) const {
    for (const auto& r : fusion)
      if (r.n == n) return &r;
    return nullptr;
  }
  const DurationRow* duration_at(double seconds) const {
    for (const auto& r : duration)
      if (r.seconds == seconds) return &r;
    return nullptr;
  }
};

struct ConsistencyResult {
  std::string name;
  bool passed = true;
  std::string detail;  // first offending row when failed
};

/// Internal relations the published tables satisfy among themselves:
///  - FLOPs: total = attention + transform, exactly;
///  - traffic: FreqFormer bytes = 2 * attention FLOPs / (2 d_k), exactly;
///  - intensity: total FLOPs / FreqFormer bytes, relative 1e-3.
inline std::vector<ConsistencyResult> check_consistency(const PublishedTables& t, std::uint64_t d_k = 64) {
  std::vector<ConsistencyResult> out;
  {
    ConsistencyResult r{"flops_total_is_attention_plus_transform", true, {}};
    for (const auto& row : t.flops) {
      if (row.freq_attention + row.transform != row.freq_total) {
        r.passed = false;
        r.detail = "N=" + std::to_string(row.n);
        break;
      }
    }
    out.push_back(r);
  }
  {
    ConsistencyResult r{"bytes_match_attention_flops", true, {}};
    if (t.traffic.size() != t.flops.size()) {
      r.passed = false;
      r.detail = "row count mismatch";
    }
    for (const auto& row : t.traffic) {
      const auto* f = t.flops_at(row.n);
      if (f == nullptr || f->freq_attention % (2 * d_k) != 0 ||
          2 * (f->freq_attention / (2 * d_k)) != row.freq_bytes) {
        r.passed = false;
        r.detail = "N=" + std::to_string(row.n);
        break;
      }
    }
    out.push_back(r);
  }
  {
    ConsistencyResult r{"intensity_matches_flops_over_bytes", true, {}};
    for (const auto& row : t.intensity) {
      const auto* f = t.flops_at(row.n);
      const auto* m = t.traffic_at(row.n);
      if (f == nullptr || m == nullptr) {
        r.passed = false;
        r.detail = "N=" + std::to_string(row.n) + " missing from the FLOP or traffic table";
        break;
      }
      const double derived = static_cast<double>(f->freq_total) / static_cast<double>(m->freq_bytes);
      if (std::abs(derived - row.freq_total) > 1e-3 * std::abs(row.freq_total)) {
        r.passed = false;
        r.detail = "N=" + std::to_string(row.n);
        break;
      }
    }
    out.push_back(r);
  }
  return out;
}

}  // namespace freqformer
