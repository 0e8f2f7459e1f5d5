// Proxy area/delay/power models and redacted-vs-original overhead.
#pragma once

#include <cstdint>
#include <string>

#include <json.hpp>

#include "redactor/netlist.hpp"

namespace redactor {

/// Area weight per cell. LUT(k) costs 2^k * lut_entry.
struct AreaWeights {
  double gate = 1.0;  // BUF, NOT, AND, OR, NAND, NOR, XOR, XNOR
  double mux2 = 2.0;
  double lut_entry = 0.5;
  double dff = 4.0;
  double constant = 0.0;

  [[nodiscard]] AreaWeights scaled(double c) const { return {gate * c, mux2 * c, lut_entry * c, dff * c, constant * c}; }
};

nlohmann::json to_json(const AreaWeights& w);

struct PpaProxy {
  double area_units = 0;
  int delay_levels = 0;
  double power_units = 0;
};

double area_proxy(const Netlist& n, const AreaWeights& w = {});

/// Longest unit-delay path, in cells, from an input or DFF output to an output
/// or DFF input. Constant drivers start paths at level 0. Throws on a loop.
int delay_proxy(const Netlist& n);

/// Mean number of nets (inputs included) that change value between
/// consecutive uniform random scan vectors, over `vectors` pairs. Throws on a loop.
double power_proxy(const Netlist& n, std::size_t vectors = 4096, std::uint64_t seed = 1);

PpaProxy ppa_proxy(const Netlist& n, std::size_t vectors = 4096, std::uint64_t seed = 1, const AreaWeights& w = {});

/// Metrics of a redacted module. Area counts the whole key-exposed fabric with
/// one DFF of configuration storage per key bit; delay and power come from the
/// programmed fabric.
PpaProxy redacted_ppa(const Netlist& keyed, const Netlist& programmed, std::size_t vectors = 4096,
                      std::uint64_t seed = 1, const AreaWeights& w = {});

struct OverheadReport {
  std::string ip;
  std::string fabric;
  double area_overhead = 0;
  double power_overhead = 0;
  double delay_overhead = 0;
};

/// (redacted - original) / original per metric. Throws when an original metric is 0.
OverheadReport overhead_report(const PpaProxy& original, const PpaProxy& redacted, std::string ip = "",
                               std::string fabric = "");
OverheadReport overhead_report(const Netlist& original, const Netlist& redacted, std::size_t vectors = 4096,
                               std::uint64_t seed = 1);

nlohmann::json to_json(const PpaProxy& p);
nlohmann::json to_json(const OverheadReport& r);
std::string overhead_csv_header();
std::string overhead_csv_row(const OverheadReport& r);

}  // namespace redactor
