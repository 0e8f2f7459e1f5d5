#include "redactor/bench_io.hpp"

#include <cctype>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

namespace redactor {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

bool valid_name(std::string_view s) {
  if (s.empty()) return false;
  const auto first = static_cast<unsigned char>(s[0]);
  if (!(std::isalpha(first) || first == '_')) return false;
  for (char ch : s) {
    const auto c = static_cast<unsigned char>(ch);
    if (!(std::isalnum(c) || c == '_' || c == '.' || c == '[' || c == ']')) return false;
  }
  return true;
}

std::string upper(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return out;
}

struct GateLine {
  int line;
  std::string out;
  CellKind kind;
  std::uint64_t table = 0;
  std::vector<std::string> args;
};

std::vector<std::string> split_args(std::string_view inner, int line) {
  std::vector<std::string> args;
  inner = trim(inner);
  if (inner.empty()) return args;
  std::size_t start = 0;
  while (true) {
    const auto comma = inner.find(',', start);
    auto tok = trim(inner.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
    if (!valid_name(tok)) throw ParseError(line, "bad net name '" + std::string(tok) + "'");
    args.emplace_back(tok);
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return args;
}

std::uint64_t parse_hex(std::string_view s, int line) {
  if (s.size() < 3 || s[0] != '0' || (s[1] != 'x' && s[1] != 'X')) throw ParseError(line, "LUT table must be 0x-prefixed hex");
  s.remove_prefix(2);
  if (s.size() > 16) throw ParseError(line, "LUT table too wide");
  std::uint64_t v = 0;
  for (char ch : s) {
    int d;
    if (ch >= '0' && ch <= '9') d = ch - '0';
    else if (ch >= 'a' && ch <= 'f') d = ch - 'a' + 10;
    else if (ch >= 'A' && ch <= 'F') d = ch - 'A' + 10;
    else throw ParseError(line, "bad hex digit in LUT table");
    v = (v << 4) | static_cast<std::uint64_t>(d);
  }
  return v;
}

const std::unordered_map<std::string, CellKind>& gate_kinds() {
  static const std::unordered_map<std::string, CellKind> kinds = {
      {"BUF", CellKind::Buf},   {"BUFF", CellKind::Buf}, {"NOT", CellKind::Not},   {"AND", CellKind::And},
      {"OR", CellKind::Or},     {"NAND", CellKind::Nand}, {"NOR", CellKind::Nor},  {"XOR", CellKind::Xor},
      {"XNOR", CellKind::Xnor}, {"MUX", CellKind::Mux2}, {"DFF", CellKind::Dff},
  };
  return kinds;
}

}  // namespace

Netlist parse_bench(std::string_view text, std::string name) {
  std::vector<std::pair<int, std::string>> inputs, outputs;
  std::vector<GateLine> gates;
  std::vector<std::pair<std::string, std::string>> labels;

  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    std::string_view raw = text.substr(pos, eol - pos);
    pos = eol + 1;
    ++line_no;

    if (raw.rfind("#@label", 0) == 0) {
      std::istringstream is{std::string(raw.substr(7))};
      std::string net, label;
      if (!(is >> net >> label)) throw ParseError(line_no, "malformed #@label pragma");
      labels.emplace_back(net, label);
      continue;
    }
    if (auto hash = raw.find('#'); hash != std::string_view::npos) raw = raw.substr(0, hash);
    std::string_view line = trim(raw);
    if (line.empty()) {
      if (pos > text.size()) break;
      continue;
    }

    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      const auto open = line.find('(');
      const auto close = line.rfind(')');
      if (open == std::string_view::npos || close == std::string_view::npos || close < open ||
          !trim(line.substr(close + 1)).empty())
        throw ParseError(line_no, "expected INPUT(...), OUTPUT(...) or assignment");
      const auto kw = upper(trim(line.substr(0, open)));
      const auto arg = std::string(trim(line.substr(open + 1, close - open - 1)));
      if (!valid_name(arg)) throw ParseError(line_no, "bad net name '" + arg + "'");
      if (kw == "INPUT") inputs.emplace_back(line_no, arg);
      else if (kw == "OUTPUT") outputs.emplace_back(line_no, arg);
      else throw ParseError(line_no, "unknown declaration '" + kw + "'");
      continue;
    }

    GateLine g;
    g.line = line_no;
    g.out = std::string(trim(line.substr(0, eq)));
    if (!valid_name(g.out)) throw ParseError(line_no, "bad net name '" + g.out + "'");
    std::string_view rhs = trim(line.substr(eq + 1));
    const auto rhs_upper = upper(rhs);
    if (rhs_upper == "VCC" || rhs_upper == "VDD") {
      g.kind = CellKind::Const1;
    } else if (rhs_upper == "GND") {
      g.kind = CellKind::Const0;
    } else {
      const auto open = rhs.find('(');
      const auto close = rhs.rfind(')');
      if (open == std::string_view::npos || close == std::string_view::npos || close < open ||
          !trim(rhs.substr(close + 1)).empty())
        throw ParseError(line_no, "malformed gate expression");
      std::string_view head = trim(rhs.substr(0, open));
      if (upper(head.substr(0, 3)) == "LUT" && (head.size() == 3 || std::isspace(static_cast<unsigned char>(head[3])))) {
        g.kind = CellKind::Lut;
        g.table = parse_hex(trim(head.substr(3)), line_no);
      } else {
        auto it = gate_kinds().find(upper(head));
        if (it == gate_kinds().end()) throw ParseError(line_no, "unknown gate '" + std::string(head) + "'");
        g.kind = it->second;
      }
      g.args = split_args(rhs.substr(open + 1, close - open - 1), line_no);
    }
    try {
      check_cell_shape(g.kind, g.args.size(), line_no);
    } catch (const ParseError&) {
      throw;
    } catch (const Error& e) {
      throw ParseError(line_no, std::string("bad arity: ") + e.what());
    }
    if (g.kind == CellKind::Lut && g.args.size() < 6 && (g.table >> (1u << g.args.size())) != 0)
      throw ParseError(line_no, "LUT table wider than 2^k bits");
    gates.push_back(std::move(g));
  }

  Netlist n(std::move(name));
  std::unordered_map<std::string, int> defined_at;
  for (const auto& [line, in] : inputs) {
    if (defined_at.count(in)) throw ParseError(line, "duplicate driver for '" + in + "'");
    defined_at[in] = line;
    n.add_input(in);
  }
  for (const auto& g : gates) {
    if (defined_at.count(g.out)) throw ParseError(g.line, "duplicate driver for '" + g.out + "'");
    defined_at[g.out] = g.line;
    n.add_net(g.out);
  }
  for (const auto& g : gates) {
    std::vector<NetId> args;
    args.reserve(g.args.size());
    for (const auto& a : g.args) {
      auto id = n.find_net(a);
      if (!id) throw ParseError(g.line, "undeclared net '" + a + "'");
      args.push_back(*id);
    }
    n.add_cell(g.kind, std::move(args), n.net(g.out), g.table);
  }
  for (const auto& [line, out] : outputs) {
    auto id = n.find_net(out);
    if (!id) throw ParseError(line, "undeclared net '" + out + "'");
    try {
      n.add_output(*id);
    } catch (const Error& e) {
      throw ParseError(line, e.what());
    }
  }
  for (const auto& [net, label] : labels) {
    auto id = n.find_net(net);
    if (!id || n.driver(*id) == kNoCell || n.cell(n.driver(*id)).kind != CellKind::Dff)
      throw Error("#@label refers to '" + net + "', which is not a DFF output");
    n.set_label(n.driver(*id), label);
  }
  n.validate();
  return n;
}

std::string write_bench(const Netlist& n) {
  std::ostringstream os;
  os << "# " << n.name() << "\n";
  for (NetId i : n.inputs()) os << "INPUT(" << n.net_name(i) << ")\n";
  for (NetId o : n.outputs()) os << "OUTPUT(" << n.net_name(o) << ")\n";
  for (const Cell& c : n.cells()) {
    os << n.net_name(c.output) << " = ";
    switch (c.kind) {
      case CellKind::Const0: os << "gnd\n"; continue;
      case CellKind::Const1: os << "vcc\n"; continue;
      case CellKind::Lut: {
        const std::size_t digits = c.inputs.size() <= 2 ? 1 : (std::size_t{1} << c.inputs.size()) / 4;
        static const char* hex = "0123456789abcdef";
        std::string t(digits, '0');
        for (std::size_t d = 0; d < digits; ++d) t[digits - 1 - d] = hex[(c.table >> (4 * d)) & 0xF];
        os << "LUT 0x" << t;
        break;
      }
      default: os << kind_name(c.kind); break;
    }
    os << "(";
    for (std::size_t i = 0; i < c.inputs.size(); ++i) os << (i ? ", " : "") << n.net_name(c.inputs[i]);
    os << ")\n";
  }
  for (const Cell& c : n.cells())
    if (c.kind == CellKind::Dff && !c.label.empty()) os << "#@label " << n.net_name(c.output) << " " << c.label << "\n";
  return os.str();
}

Netlist read_bench_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_bench(ss.str(), std::filesystem::path(path).stem().string());
}

void write_bench_file(const Netlist& n, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write '" + path + "'");
  out << write_bench(n);
}

}  // namespace redactor
