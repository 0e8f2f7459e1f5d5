// .bench reader/writer.
//
// Dialect: INPUT(x) / OUTPUT(x) declarations, `y = OP(a, b, ...)` gates with OP in
// {BUF, NOT, AND, OR, NAND, NOR, XOR, XNOR, MUX}, `y = LUT 0xHH(a, ...)`,
// `y = DFF(d)`, `y = vcc` / `y = gnd`. `#` starts a comment. The writer emits
// `#@label <net> <label>` pragmas for DFFs carrying a scan label; other tools see
// them as comments.
#pragma once

#include <string>
#include <string_view>

#include "redactor/netlist.hpp"

namespace redactor {

class ParseError : public Error {
 public:
  ParseError(int line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  [[nodiscard]] int line() const { return line_; }

 private:
  int line_;
};

Netlist parse_bench(std::string_view text, std::string name = "top");
std::string write_bench(const Netlist& n);

Netlist read_bench_file(const std::string& path);
void write_bench_file(const Netlist& n, const std::string& path);

}  // namespace redactor
