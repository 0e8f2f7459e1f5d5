#include "redactor/arch.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <sstream>

namespace redactor {

int derive_clb_inputs(int k, int n) { return (k * (n + 1) + 1) / 2; }

int ArchParams::clb_inputs() const { return derive_clb_inputs(k, n); }

std::string ArchParams::name() const {
  std::ostringstream os;
  os << grid_w << 'x' << grid_h << " K" << k << (ble_kind == BleKind::Flut ? "_frac_N" : "N") << n;
  return os.str();
}

void validate(const ArchParams& p) {
  auto fail = [](const std::string& what) { throw Error("invalid architecture: " + what); };
  if (p.k < 2 || p.k > kMaxLutInputs) fail("k must be in 2.." + std::to_string(kMaxLutInputs));
  if (p.ble_kind == BleKind::Flut && p.k < 3) fail("fracturable LUTs need k >= 3");
  if (p.n < 1 || p.n > 9) fail("n must be in 1..9");
  if (p.grid_w < 1 || p.grid_h < 1) fail("grid must be at least 1x1");
  if (p.io_per_tile < 1) fail("io_per_tile must be >= 1");
  if (p.w != 0 && (p.w < 2 || p.w % 2 != 0)) fail("w must be even and >= 2");
  if (!(p.fc_in > 0 && p.fc_in <= 1)) fail("fc_in must be in (0, 1]");
  if (!(p.fc_out > 0 && p.fc_out <= 1)) fail("fc_out must be in (0, 1]");
  if (p.fs < 1) fail("fs must be >= 1");
  if (p.l < 1) fail("l must be >= 1");
}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

int to_int(std::string_view key, std::string_view v) {
  int out = 0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) throw Error("arch: bad integer for " + std::string(key));
  return out;
}

double to_double(std::string_view key, std::string_view v) {
  try {
    std::size_t used = 0;
    const double d = std::stod(std::string(v), &used);
    if (used != v.size()) throw Error("");
    return d;
  } catch (...) {
    throw Error("arch: bad number for " + std::string(key));
  }
}

}  // namespace

ArchParams parse_arch(std::string_view text) {
  ArchParams p;
  std::size_t pos = 0;
  int line_no = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw Error("arch line " + std::to_string(line_no) + ": expected key=value");
    const auto key = trim(line.substr(0, eq));
    const auto val = trim(line.substr(eq + 1));
    if (key == "k") p.k = to_int(key, val);
    else if (key == "ble_kind") {
      if (val == "LUT" || val == "lut") p.ble_kind = BleKind::Lut;
      else if (val == "FLUT" || val == "flut") p.ble_kind = BleKind::Flut;
      else throw Error("arch: ble_kind must be LUT or FLUT");
    } else if (key == "n") p.n = to_int(key, val);
    else if (key == "grid_w") p.grid_w = to_int(key, val);
    else if (key == "grid_h") p.grid_h = to_int(key, val);
    else if (key == "io_per_tile") p.io_per_tile = to_int(key, val);
    else if (key == "w") p.w = (val == "auto" || val == "Auto") ? 0 : to_int(key, val);
    else if (key == "fc_in") p.fc_in = to_double(key, val);
    else if (key == "fc_out") p.fc_out = to_double(key, val);
    else if (key == "fs") p.fs = to_int(key, val);
    else if (key == "l") p.l = to_int(key, val);
    else throw Error("arch line " + std::to_string(line_no) + ": unknown key '" + std::string(key) + "'");
    if (pos > text.size()) break;
  }
  validate(p);
  return p;
}

std::string write_arch(const ArchParams& p) {
  std::ostringstream os;
  os << "k=" << p.k << "\nble_kind=" << (p.ble_kind == BleKind::Flut ? "FLUT" : "LUT") << "\nn=" << p.n
     << "\ngrid_w=" << p.grid_w << "\ngrid_h=" << p.grid_h << "\nio_per_tile=" << p.io_per_tile << "\nw="
     << (p.w == 0 ? std::string("auto") : std::to_string(p.w)) << "\nfc_in=" << p.fc_in << "\nfc_out=" << p.fc_out
     << "\nfs=" << p.fs << "\nl=" << p.l << "\n";
  return os.str();
}

int fc_tracks(double fc, int w) {
  const int t = static_cast<int>(std::floor(fc * w + 0.5));
  return std::clamp(t, 1, std::max(1, w));
}

std::vector<bool> evaluate_flut(std::uint64_t table, int k, bool mode, std::span<const bool> inputs) {
  std::uint64_t idx = 0;
  for (std::size_t i = 0; i < inputs.size(); ++i) idx |= std::uint64_t{inputs[i]} << i;
  if (!mode) {
    if (static_cast<int>(inputs.size()) != k) throw Error("evaluate_flut: whole mode takes k inputs");
    return {((table >> idx) & 1) != 0};
  }
  if (static_cast<int>(inputs.size()) != k - 1) throw Error("evaluate_flut: fractured mode takes k-1 inputs");
  const std::uint64_t half = std::uint64_t{1} << (k - 1);
  return {((table >> idx) & 1) != 0, ((table >> (half + idx)) & 1) != 0};
}

}  // namespace redactor
