// Gate-level netlist IR shared by every stage of the redaction flow.
#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace redactor {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using NetId = std::uint32_t;
using CellId = std::uint32_t;
inline constexpr CellId kNoCell = std::numeric_limits<CellId>::max();
inline constexpr int kMaxLutInputs = 6;

enum class CellKind : std::uint8_t {
  Buf,
  Not,
  And,
  Or,
  Nand,
  Nor,
  Xor,
  Xnor,
  Mux2,  // inputs [sel, a, b]; a when sel=0
  Lut,   // table bit i = output for input index i, inputs[0] is the LSB
  Dff,
  Const0,
  Const1,
};

std::string_view kind_name(CellKind kind);

struct Cell {
  CellKind kind = CellKind::Buf;
  std::vector<NetId> inputs;
  NetId output = 0;
  std::uint64_t table = 0;  // LUT only
  std::string label;        // DFF only: scan label, empty means "use output net name"

  [[nodiscard]] int lut_size() const { return static_cast<int>(inputs.size()); }
};

/// True when the name starts with "key"; such inputs are configuration/key bits.
bool is_key_name(std::string_view name);

/// Checks arity/table constraints for a cell kind; throws Error on violation.
void check_cell_shape(CellKind kind, std::size_t n_inputs, int line = 0);

class Netlist {
 public:
  explicit Netlist(std::string name = "top") : name_(std::move(name)) {}

  [[nodiscard]] const std::string& name() const { return name_; }
  void set_name(std::string name) { name_ = std::move(name); }

  // Construction -----------------------------------------------------------
  NetId add_net(std::string name);
  NetId add_input(std::string name);
  NetId add_input_net(NetId net);
  void add_output(NetId net);
  CellId add_cell(CellKind kind, std::vector<NetId> inputs, NetId output, std::uint64_t table = 0);
  /// Creates the output net and the cell in one step.
  NetId add_gate(CellKind kind, std::vector<NetId> inputs, std::string out_name,
                 std::uint64_t table = 0);

  // Rewriting (used by programming and binding) ------------------------------
  /// Turns a primary input into a constant-driven internal net.
  void tie_input(NetId net, bool value);
  void rewrite_cell(CellId cell, CellKind kind, std::vector<NetId> inputs, std::uint64_t table = 0);
  void rename_net(NetId net, std::string name);
  void set_outputs(std::vector<NetId> outputs);
  /// Reorders inputs; `order` must be a permutation of inputs().
  void set_input_order(std::vector<NetId> order);
  void set_label(CellId cell, std::string label) { cells_.at(cell).label = std::move(label); }

  // Queries ------------------------------------------------------------------
  [[nodiscard]] std::size_t num_nets() const { return net_names_.size(); }
  [[nodiscard]] std::size_t num_cells() const { return cells_.size(); }
  [[nodiscard]] const std::string& net_name(NetId net) const { return net_names_.at(net); }
  [[nodiscard]] std::optional<NetId> find_net(std::string_view name) const;
  [[nodiscard]] NetId net(std::string_view name) const;
  [[nodiscard]] const Cell& cell(CellId id) const { return cells_.at(id); }
  [[nodiscard]] const std::vector<Cell>& cells() const { return cells_; }
  [[nodiscard]] const std::vector<NetId>& inputs() const { return inputs_; }
  [[nodiscard]] const std::vector<NetId>& outputs() const { return outputs_; }
  [[nodiscard]] std::vector<NetId> key_inputs() const;
  /// Non-key primary inputs in declaration order.
  [[nodiscard]] std::vector<NetId> data_inputs() const;
  [[nodiscard]] CellId driver(NetId net) const { return driver_.at(net); }
  [[nodiscard]] bool is_input(NetId net) const { return is_input_.at(net) != 0; }
  [[nodiscard]] bool is_key(NetId net) const { return is_input(net) && is_key_name(net_names_[net]); }
  [[nodiscard]] std::vector<CellId> dffs() const;
  /// Scan label of a DFF cell.
  [[nodiscard]] const std::string& state_label(CellId dff) const;

  struct Reader {
    CellId cell;
    std::uint32_t pin;
  };
  /// Per-net list of (cell, pin) readers.
  [[nodiscard]] std::vector<std::vector<Reader>> fanouts() const;

  /// Throws Error when any structural invariant is broken.
  void validate() const;

 private:
  std::string name_;
  std::vector<std::string> net_names_;
  std::unordered_map<std::string, NetId> by_name_;
  std::vector<CellId> driver_;
  std::vector<std::uint8_t> is_input_;
  std::vector<std::uint8_t> is_output_;
  std::vector<NetId> inputs_;
  std::vector<NetId> outputs_;
  std::vector<Cell> cells_;
};

/// Scan-level view of a netlist under the full-scan model: data inputs plus DFF
/// outputs on the input side, primary outputs plus DFF data pins on the output side.
/// Key inputs are excluded. Labels are used to match two netlists.
struct ScanPorts {
  std::vector<std::string> input_labels;
  std::vector<NetId> input_nets;
  std::vector<std::string> output_labels;
  std::vector<NetId> output_nets;
};

ScanPorts scan_ports(const Netlist& n);

}  // namespace redactor
