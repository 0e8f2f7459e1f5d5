// Architecture parameters of the generated eFPGA fabric.
#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "redactor/netlist.hpp"

namespace redactor {

enum class BleKind { Lut, Flut };

struct ArchParams {
  int k = 4;
  BleKind ble_kind = BleKind::Lut;
  int n = 1;
  int grid_w = 1;
  int grid_h = 1;
  int io_per_tile = 1;
  int w = 0;  // 0 selects automatic channel-width search
  double fc_in = 0.15;
  double fc_out = 0.1;
  int fs = 3;
  int l = 4;

  [[nodiscard]] int clb_inputs() const;
  /// Outputs per BLE: 2 for a fracturable LUT.
  [[nodiscard]] int ble_outputs() const { return ble_kind == BleKind::Flut ? 2 : 1; }
  [[nodiscard]] int num_clbs() const { return grid_w * grid_h; }
  [[nodiscard]] int num_pads() const { return (2 * grid_w + 2 * grid_h) * io_per_tile; }
  /// Short name such as "2x2 K4N2" or "1x1 K4_frac_N1".
  [[nodiscard]] std::string name() const;

  bool operator==(const ArchParams&) const = default;
};

/// ceil(K(N+1)/2).
int derive_clb_inputs(int k, int n);

/// Throws Error when a parameter is out of range.
void validate(const ArchParams& p);

/// Flat key=value text; '#' starts a comment; w may be "auto".
ArchParams parse_arch(std::string_view text);
std::string write_arch(const ArchParams& p);

/// round-half-up(fc * w), at least 1 and at most w.
int fc_tracks(double fc, int w);

/// Reference behaviour of a fracturable LUT. Whole mode (mode=false) takes K
/// inputs and returns one value; fractured mode takes K-1 inputs and returns two.
std::vector<bool> evaluate_flut(std::uint64_t table, int k, bool mode, std::span<const bool> inputs);

}  // namespace redactor
