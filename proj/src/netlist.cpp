#include "redactor/netlist.hpp"

#include <algorithm>
#include <unordered_set>

namespace redactor {

std::string_view kind_name(CellKind kind) {
  switch (kind) {
    case CellKind::Buf: return "BUF";
    case CellKind::Not: return "NOT";
    case CellKind::And: return "AND";
    case CellKind::Or: return "OR";
    case CellKind::Nand: return "NAND";
    case CellKind::Nor: return "NOR";
    case CellKind::Xor: return "XOR";
    case CellKind::Xnor: return "XNOR";
    case CellKind::Mux2: return "MUX";
    case CellKind::Lut: return "LUT";
    case CellKind::Dff: return "DFF";
    case CellKind::Const0: return "gnd";
    case CellKind::Const1: return "vcc";
  }
  return "?";
}

bool is_key_name(std::string_view name) { return name.substr(0, 3) == "key"; }

void check_cell_shape(CellKind kind, std::size_t n, int line) {
  auto fail = [&](const std::string& what) {
    std::string msg = std::string(kind_name(kind)) + ": " + what;
    if (line > 0) msg = "line " + std::to_string(line) + ": " + msg;
    throw Error(msg);
  };
  switch (kind) {
    case CellKind::Buf:
    case CellKind::Not:
    case CellKind::Dff:
      if (n != 1) fail("expects exactly 1 input, got " + std::to_string(n));
      break;
    case CellKind::And:
    case CellKind::Or:
    case CellKind::Nand:
    case CellKind::Nor:
    case CellKind::Xor:
    case CellKind::Xnor:
      if (n < 1) fail("expects at least 1 input");
      break;
    case CellKind::Mux2:
      if (n != 3) fail("expects 3 inputs (sel, a, b), got " + std::to_string(n));
      break;
    case CellKind::Lut:
      if (n > static_cast<std::size_t>(kMaxLutInputs)) fail("at most 6 inputs supported");
      break;
    case CellKind::Const0:
    case CellKind::Const1:
      if (n != 0) fail("constants take no inputs");
      break;
  }
}

NetId Netlist::add_net(std::string name) {
  if (by_name_.count(name)) throw Error("duplicate net name '" + name + "'");
  const auto id = static_cast<NetId>(net_names_.size());
  by_name_.emplace(name, id);
  net_names_.push_back(std::move(name));
  driver_.push_back(kNoCell);
  is_input_.push_back(0);
  is_output_.push_back(0);
  return id;
}

NetId Netlist::add_input(std::string name) { return add_input_net(add_net(std::move(name))); }

NetId Netlist::add_input_net(NetId net) {
  if (is_input_.at(net)) throw Error("duplicate input '" + net_names_[net] + "'");
  if (driver_[net] != kNoCell) throw Error("net '" + net_names_[net] + "' has two drivers");
  is_input_[net] = 1;
  inputs_.push_back(net);
  return net;
}

void Netlist::add_output(NetId net) {
  if (is_output_.at(net)) throw Error("duplicate output '" + net_names_[net] + "'");
  is_output_[net] = 1;
  outputs_.push_back(net);
}

CellId Netlist::add_cell(CellKind kind, std::vector<NetId> inputs, NetId output, std::uint64_t table) {
  check_cell_shape(kind, inputs.size());
  if (output >= num_nets()) throw Error("cell output refers to unknown net");
  for (NetId in : inputs)
    if (in >= num_nets()) throw Error("cell input refers to unknown net");
  if (is_input_[output] || driver_[output] != kNoCell)
    throw Error("net '" + net_names_[output] + "' has two drivers");
  if (kind != CellKind::Lut) table = 0;
  if (kind == CellKind::Lut && inputs.size() < 6) table &= (std::uint64_t{1} << (1u << inputs.size())) - 1;
  const auto id = static_cast<CellId>(cells_.size());
  cells_.push_back(Cell{kind, std::move(inputs), output, table, {}});
  driver_[output] = id;
  return id;
}

NetId Netlist::add_gate(CellKind kind, std::vector<NetId> inputs, std::string out_name, std::uint64_t table) {
  const NetId out = add_net(std::move(out_name));
  add_cell(kind, std::move(inputs), out, table);
  return out;
}

void Netlist::tie_input(NetId net, bool value) {
  if (!is_input_.at(net)) throw Error("tie_input: '" + net_names_[net] + "' is not an input");
  is_input_[net] = 0;
  inputs_.erase(std::find(inputs_.begin(), inputs_.end(), net));
  add_cell(value ? CellKind::Const1 : CellKind::Const0, {}, net);
}

void Netlist::rewrite_cell(CellId id, CellKind kind, std::vector<NetId> inputs, std::uint64_t table) {
  check_cell_shape(kind, inputs.size());
  Cell& c = cells_.at(id);
  if (kind != CellKind::Lut) table = 0;
  if (kind == CellKind::Lut && inputs.size() < 6) table &= (std::uint64_t{1} << (1u << inputs.size())) - 1;
  c.kind = kind;
  c.inputs = std::move(inputs);
  c.table = table;
  if (kind != CellKind::Dff) c.label.clear();
}

void Netlist::rename_net(NetId net, std::string name) {
  if (net_names_.at(net) == name) return;
  if (by_name_.count(name)) throw Error("rename: net name '" + name + "' already used");
  by_name_.erase(net_names_[net]);
  by_name_.emplace(name, net);
  net_names_[net] = std::move(name);
}

void Netlist::set_outputs(std::vector<NetId> outputs) {
  std::fill(is_output_.begin(), is_output_.end(), 0);
  outputs_.clear();
  for (NetId o : outputs) add_output(o);
}

void Netlist::set_input_order(std::vector<NetId> order) {
  auto a = order;
  auto b = inputs_;
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  if (a != b) throw Error("set_input_order: not a permutation of the inputs");
  inputs_ = std::move(order);
}

std::optional<NetId> Netlist::find_net(std::string_view name) const {
  auto it = by_name_.find(std::string(name));
  if (it == by_name_.end()) return std::nullopt;
  return it->second;
}

NetId Netlist::net(std::string_view name) const {
  if (auto n = find_net(name)) return *n;
  throw Error("no net named '" + std::string(name) + "'");
}

std::vector<NetId> Netlist::key_inputs() const {
  std::vector<NetId> out;
  for (NetId n : inputs_)
    if (is_key_name(net_names_[n])) out.push_back(n);
  return out;
}

std::vector<NetId> Netlist::data_inputs() const {
  std::vector<NetId> out;
  for (NetId n : inputs_)
    if (!is_key_name(net_names_[n])) out.push_back(n);
  return out;
}

std::vector<CellId> Netlist::dffs() const {
  std::vector<CellId> out;
  for (CellId c = 0; c < cells_.size(); ++c)
    if (cells_[c].kind == CellKind::Dff) out.push_back(c);
  return out;
}

const std::string& Netlist::state_label(CellId dff) const {
  const Cell& c = cells_.at(dff);
  return c.label.empty() ? net_names_[c.output] : c.label;
}

std::vector<std::vector<Netlist::Reader>> Netlist::fanouts() const {
  std::vector<std::vector<Reader>> out(num_nets());
  for (CellId c = 0; c < cells_.size(); ++c)
    for (std::uint32_t p = 0; p < cells_[c].inputs.size(); ++p) out[cells_[c].inputs[p]].push_back({c, p});
  return out;
}

void Netlist::validate() const {
  for (NetId n = 0; n < num_nets(); ++n) {
    const bool in = is_input_[n] != 0;
    const bool driven = driver_[n] != kNoCell;
    if (in == driven) {
      throw Error("net '" + net_names_[n] + "' " + (in ? "has two drivers" : "has no driver"));
    }
  }
  for (const Cell& c : cells_) {
    check_cell_shape(c.kind, c.inputs.size());
    for (NetId i : c.inputs)
      if (i >= num_nets()) throw Error("cell input refers to unknown net");
  }
  std::unordered_set<std::string> labels;
  for (CellId d : dffs())
    if (!labels.insert(state_label(d)).second) throw Error("duplicate DFF label '" + state_label(d) + "'");
}

ScanPorts scan_ports(const Netlist& n) {
  ScanPorts p;
  for (NetId i : n.data_inputs()) {
    p.input_labels.push_back(n.net_name(i));
    p.input_nets.push_back(i);
  }
  for (NetId o : n.outputs()) {
    p.output_labels.push_back(n.net_name(o));
    p.output_nets.push_back(o);
  }
  for (CellId d : n.dffs()) {
    const Cell& c = n.cell(d);
    p.input_labels.push_back("state:" + n.state_label(d));
    p.input_nets.push_back(c.output);
    p.output_labels.push_back("next:" + n.state_label(d));
    p.output_nets.push_back(c.inputs[0]);
  }
  return p;
}

}  // namespace redactor
