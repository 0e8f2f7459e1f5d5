// Command-line front end: one subcommand per flow stage plus `run` for manifests.
#include <CLI11.hpp>

#include <atomic>
#include <csignal>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <json.hpp>

#include "redactor/attack.hpp"
#include "redactor/bench_io.hpp"
#include "redactor/cad.hpp"
#include "redactor/experiment.hpp"
#include "redactor/fabric.hpp"
#include "redactor/metrics.hpp"
#include "redactor/verify.hpp"

using namespace redactor;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::atomic<bool> g_interrupted{false};

struct Common {
  std::uint64_t seed = 1;
  std::string out_dir = ".";
  bool json = false;
};

// Architecture from an optional file plus command-line overrides.
struct ArchArgs {
  std::string file;
  std::optional<int> k, n, io, w;
  std::optional<std::string> ble, grid;

  void attach(CLI::App* app) {
    app->add_option("--arch", file, "architecture file (key=value)")->check(CLI::ExistingFile);
    app->add_option("--k", k, "LUT size");
    app->add_option("--n", n, "BLEs per CLB");
    app->add_option("--ble", ble, "lut or flut")->check(CLI::IsMember({"lut", "flut", "LUT", "FLUT"}));
    app->add_option("--grid", grid, "grid as WxH");
    app->add_option("--io", io, "pads per perimeter tile");
    app->add_option("--w", w, "channel width (0 = automatic)");
  }

  [[nodiscard]] ArchParams get() const {
    ArchParams p;
    if (!file.empty()) {
      std::ifstream f(file);
      std::stringstream ss;
      ss << f.rdbuf();
      p = parse_arch(ss.str());
    }
    if (k) p.k = *k;
    if (n) p.n = *n;
    if (io) p.io_per_tile = *io;
    if (w) p.w = *w;
    if (ble) p.ble_kind = (*ble == "flut" || *ble == "FLUT") ? BleKind::Flut : BleKind::Lut;
    if (grid) {
      const auto x = grid->find('x');
      if (x == std::string::npos) throw Error("--grid expects WxH");
      p.grid_w = std::stoi(grid->substr(0, x));
      p.grid_h = std::stoi(grid->substr(x + 1));
    }
    validate(p);
    return p;
  }
};

std::string read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error("cannot read " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

fs::path out_path(const Common& c, const std::string& name) {
  fs::create_directories(c.out_dir);
  return fs::path(c.out_dir) / name;
}

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream f(p, std::ios::binary);
  if (!f) throw Error("cannot write " + p.string());
  f << text;
}

void emit(const Common& c, const json& j, const std::string& human) {
  if (c.json) std::cout << j.dump(2) << "\n";
  else std::cout << human;
}

std::string stem(const std::string& path) { return fs::path(path).stem().string(); }

json stats_json(const FabricStats& s) {
  return {{"block_utilization", s.block_utilization}, {"io_utilization", s.io_utilization},
          {"bitstream_size", s.bitstream_size},       {"channel_width", s.channel_width},
          {"used_clbs", s.used_clbs},                 {"used_pads", s.used_pads}};
}

// Implementation report shared by route and bitgen.
json impl_report(const std::string& stage, const FlowResult& r, const std::string& bitstream_path) {
  json j = {{"stage", stage},
            {"fabric", r.fabric.params.name()},
            {"arch", arch_to_json(r.fabric.params)},
            {"utilization", stats_json(fabric_stats(r))},
            {"W", r.routing.width},
            {"wirelength", r.routing.wirelength(r.fabric)},
            {"route_iterations", r.routing.iterations},
            {"width_trials", r.width_trials}};
  j["bitstream"] = bitstream_path.empty() ? json(nullptr) : json(bitstream_path);
  return j;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"eFPGA redaction flow: fabric generation, CAD, verification, attack and metrics"};
  app.require_subcommand(1);
  Common common;
  app.add_option("--seed", common.seed, "random seed")->capture_default_str();
  app.add_option("--out-dir", common.out_dir, "directory for written files")->capture_default_str();
  app.add_flag("--json", common.json, "print results as JSON");

  auto sub = [&](const char* name, const char* help) {
    CLI::App* s = app.add_subcommand(name, help);
    s->fallthrough();
    return s;
  };

  // fabric-gen
  ArchArgs fg_arch;
  std::string fg_name = "fabric";
  CLI::App* fabric_gen = sub("fabric-gen", "write a key-exposed fabric netlist and its configuration chain");
  fg_arch.attach(fabric_gen);
  fabric_gen->add_option("--name", fg_name, "output file stem")->capture_default_str();

  // size-search
  ArchArgs ss_arch;
  std::string ss_design;
  SizeSearchOptions ss_opt;
  CLI::App* size = sub("size-search", "smallest fabric with full block use and the I/O target");
  ss_arch.attach(size);
  size->add_option("--design", ss_design, "benchmark .bench")->required()->check(CLI::ExistingFile);
  size->add_option("--max-grid", ss_opt.max_grid)->capture_default_str();
  size->add_option("--max-n", ss_opt.max_n)->capture_default_str();
  size->add_option("--max-io", ss_opt.max_io_per_tile)->capture_default_str();
  size->add_option("--min-io", ss_opt.min_io_utilization)->capture_default_str();
  size->add_flag("--relax-io", ss_opt.relax_io, "accept lower I/O utilization");

  // map
  std::string map_design;
  int map_k = 4;
  CLI::App* map = sub("map", "technology-map a design into K-input LUTs");
  map->add_option("--design", map_design)->required()->check(CLI::ExistingFile);
  map->add_option("--k", map_k)->capture_default_str();

  // route and bitgen run the flow up to their stage.
  ArchArgs rt_arch, bg_arch;
  std::string rt_design, bg_design;
  int max_width = 128;
  CLI::App* route_cmd = sub("route", "map, pack, place and route a design; write the implementation report");
  rt_arch.attach(route_cmd);
  route_cmd->add_option("--design", rt_design)->required()->check(CLI::ExistingFile);
  route_cmd->add_option("--max-width", max_width)->capture_default_str();
  CLI::App* bitgen_cmd = sub("bitgen", "run the flow and write the bitstream and bound fabric");
  bg_arch.attach(bitgen_cmd);
  bitgen_cmd->add_option("--design", bg_design)->required()->check(CLI::ExistingFile);
  bitgen_cmd->add_option("--max-width", max_width)->capture_default_str();

  // program
  std::string pg_fabric, pg_bits, pg_out;
  CLI::App* program_cmd = sub("program", "apply a bitstream to a key-exposed fabric netlist");
  program_cmd->add_option("--fabric", pg_fabric, "fabric .bench")->required()->check(CLI::ExistingFile);
  program_cmd->add_option("--bitstream", pg_bits)->required()->check(CLI::ExistingFile);
  program_cmd->add_option("--out", pg_out, "output .bench (default <out-dir>/programmed.bench)");

  // verify
  std::string vf_a, vf_b, vf_method = "auto";
  std::uint64_t vf_vectors = 100000;
  int vf_max_inputs = 16;
  CLI::App* verify_cmd = sub("verify", "check two netlists for scan equivalence (exit 0 equal, 1 different)");
  verify_cmd->add_option("a", vf_a, "first .bench")->required()->check(CLI::ExistingFile);
  verify_cmd->add_option("b", vf_b, "second .bench")->required()->check(CLI::ExistingFile);
  verify_cmd->add_option("--method", vf_method)->check(CLI::IsMember({"auto", "exhaustive", "random", "sat"}))
      ->capture_default_str();
  verify_cmd->add_option("--vectors", vf_vectors, "random vectors")->capture_default_str();
  verify_cmd->add_option("--max-inputs", vf_max_inputs, "exhaustive limit")->capture_default_str();
  bool vf_loops = false;
  verify_cmd->add_flag("--loops", vf_loops, "also report combinational loops of the second netlist");

  // attack
  std::string at_fabric, at_chain, at_oracle, at_report, at_strategy = "break_then_unroll", at_key;
  AttackConfig at_cfg;
  CLI::App* attack_cmd = sub("attack", "oracle-guided bitstream recovery (exit 0 when a key is reported)");
  attack_cmd->add_option("--fabric", at_fabric, "keyed fabric .bench, or a stem with .bench and .chain")->required();
  attack_cmd->add_option("--chain", at_chain, "configuration chain file");
  attack_cmd->add_option("--oracle", at_oracle, "original design .bench")->required()->check(CLI::ExistingFile);
  attack_cmd->add_option("--timeout", at_cfg.timeout_s, "seconds")->capture_default_str();
  attack_cmd->add_option("--strategy", at_strategy)->check(CLI::IsMember({"break_then_unroll", "unroll_only"}))
      ->capture_default_str();
  attack_cmd->add_option("--max-unroll", at_cfg.max_unroll)->capture_default_str();
  attack_cmd->add_option("--initial-unroll", at_cfg.initial_unroll, "0 = feedback edges + 1")->capture_default_str();
  attack_cmd->add_option("--report", at_report, "report JSON path");
  attack_cmd->add_option("--key-out", at_key, "recovered key path (default <out-dir>/recovered.bit)");

  // metrics
  std::string mt_original, mt_redacted, mt_keyed, mt_programmed, mt_fabric_name;
  std::size_t mt_vectors = 4096;
  CLI::App* metrics_cmd = sub("metrics", "proxy area/delay/power and overhead");
  metrics_cmd->add_option("--original", mt_original)->required()->check(CLI::ExistingFile);
  metrics_cmd->add_option("--redacted", mt_redacted, "redacted netlist (plain comparison)")->check(CLI::ExistingFile);
  metrics_cmd->add_option("--keyed", mt_keyed, "key-exposed fabric (area)")->check(CLI::ExistingFile);
  metrics_cmd->add_option("--programmed", mt_programmed, "programmed fabric (delay, power)")->check(CLI::ExistingFile);
  metrics_cmd->add_option("--vectors", mt_vectors)->capture_default_str();
  metrics_cmd->add_option("--fabric-name", mt_fabric_name);

  // run
  std::string rn_manifest;
  RunOptions rn_opt;
  CLI::App* run_cmd = sub("run", "run an experiment manifest");
  run_cmd->add_option("--manifest", rn_manifest)->required()->check(CLI::ExistingFile);
  run_cmd->add_option("--jobs", rn_opt.jobs)->capture_default_str();
  run_cmd->add_flag("--resume", rn_opt.resume, "reuse unchanged experiments from an existing bundle");

  CLI11_PARSE(app, argc, argv);
  std::signal(SIGINT, [](int) { g_interrupted = true; });

  try {
    FlowOptions flow_opt;
    flow_opt.seed = common.seed;
    flow_opt.max_width = max_width;

    if (*fabric_gen) {
      const ArchParams p = fg_arch.get();
      if (p.w == 0) throw Error("fabric-gen needs a concrete channel width (--w or w= in the arch file)");
      const Fabric f = build_fabric(p);
      const fs::path bench = out_path(common, fg_name + ".bench"), chain = out_path(common, fg_name + ".chain");
      write_file(bench, write_bench(f.netlist));
      write_file(chain, write_chain(f));
      emit(common,
           {{"fabric", p.name()}, {"bench", bench.string()}, {"chain", chain.string()}, {"config_bits", f.config_size()}},
           p.name() + ": " + std::to_string(f.config_size()) + " configuration bits -> " + bench.string() + "\n");
      return 0;
    }
    if (*size) {
      ss_opt.flow = flow_opt;
      const Netlist d = read_bench_file(ss_design);
      const SizeSearchResult r = size_search(d, ss_arch.get(), ss_opt);
      const fs::path arch = out_path(common, stem(ss_design) + ".arch");
      write_file(arch, write_arch(r.params));
      json j = {{"fabric", r.params.name()}, {"arch", arch_to_json(r.params)}, {"stats", stats_json(r.stats)},
                {"max_bles", r.max_bles}, {"candidates_tried", r.candidates_tried}, {"arch_file", arch.string()}};
      std::ostringstream h;
      h << r.params.name() << " io/tile=" << r.params.io_per_tile << " block=" << r.stats.block_utilization * 100
        << "% io=" << r.stats.io_utilization * 100 << "% bits=" << r.stats.bitstream_size
        << " W=" << r.stats.channel_width << "\n";
      emit(common, j, h.str());
      return 0;
    }
    if (*map) {
      const Netlist luts = lut_map(read_bench_file(map_design), map_k);
      const fs::path out = out_path(common, stem(map_design) + ".luts.bench");
      write_bench_file(luts, out.string());
      emit(common, {{"luts", luts.num_cells()}, {"out", out.string()}},
           std::to_string(luts.num_cells()) + " cells -> " + out.string() + "\n");
      return 0;
    }
    if (*route_cmd || *bitgen_cmd) {
      const bool full = bitgen_cmd->parsed();
      const std::string& design = full ? bg_design : rt_design;
      const FlowResult r = run_flow(read_bench_file(design), (full ? bg_arch : rt_arch).get(), flow_opt);
      std::string bit_path;
      if (full) {
        const std::string s = stem(design);
        bit_path = out_path(common, s + ".bit").string();
        write_file(bit_path, write_bitstream(r.bitstream));
        write_file(out_path(common, s + ".fabric.bench"), write_bench(r.keyed));
        write_file(out_path(common, s + ".fabric.chain"), write_chain(r.fabric));
        write_file(out_path(common, s + ".programmed.bench"), write_bench(r.programmed));
      }
      const json rep = impl_report(full ? "bitgen" : "route", r, bit_path);
      write_file(out_path(common, stem(design) + (full ? ".bitgen.json" : ".route.json")), rep.dump(2) + "\n");
      std::ostringstream h;
      h << rep["fabric"].get<std::string>() << " W=" << r.routing.width << " wirelength=" << rep["wirelength"]
        << (full ? " bits=" + std::to_string(r.bitstream.size()) + " -> " + bit_path : "") << "\n";
      emit(common, rep, h.str());
      return 0;
    }
    if (*program_cmd) {
      const Netlist p = program(read_bench_file(pg_fabric), parse_bitstream(read_file(pg_bits)));
      const fs::path out = pg_out.empty() ? out_path(common, "programmed.bench") : fs::path(pg_out);
      write_bench_file(p, out.string());
      emit(common, {{"out", out.string()}}, "programmed -> " + out.string() + "\n");
      return 0;
    }
    if (*verify_cmd) {
      const Netlist a = read_bench_file(vf_a), b = read_bench_file(vf_b);
      EquivalenceVerdict v;
      if (vf_method == "exhaustive") v = exhaustive_equiv(a, b, vf_max_inputs);
      else if (vf_method == "random") v = random_equiv(a, b, vf_vectors, common.seed);
      else if (vf_method == "sat") v = sat_equiv(a, b);
      else v = check_equiv(a, b, vf_max_inputs);
      json j = to_json(v);
      if (vf_loops) j["loops"] = to_json(b, loop_report(b));
      std::cout << j.dump(2) << "\n";
      return v.equivalent ? 0 : 1;
    }
    if (*attack_cmd) {
      std::string bench = at_fabric, chain = at_chain;
      if (fs::path(at_fabric).extension() != ".bench") {
        bench = at_fabric + ".bench";
        if (chain.empty()) chain = at_fabric + ".chain";
      }
      const Netlist keyed = read_bench_file(bench);
      if (!chain.empty()) {
        const auto bits = parse_chain(read_file(chain));
        if (bits.size() != keyed.key_inputs().size())
          throw Error("attack: chain lists " + std::to_string(bits.size()) + " bits but the fabric has " +
                      std::to_string(keyed.key_inputs().size()) + " key inputs");
      }
      at_cfg.seed = common.seed;
      at_cfg.strategy = at_strategy == "unroll_only" ? AttackStrategy::UnrollOnly : AttackStrategy::BreakThenUnroll;
      at_cfg.cancel = &g_interrupted;
      const AttackReport r = attack(keyed, read_bench_file(at_oracle), at_cfg, stem(bench));
      const json j = to_json(r);
      if (!at_report.empty()) write_file(at_report, j.dump(2) + "\n");
      if (r.recovered_key) write_file(at_key.empty() ? out_path(common, "recovered.bit") : fs::path(at_key),
                                      write_bitstream(*r.recovered_key));
      std::ostringstream h;
      h << r.fabric << ": " << r.status << " unroll=" << r.unroll << " clauses=" << r.clauses
        << " iterations=" << r.iterations << " time=" << r.time_s << "s key_reported=" << (r.key_reported ? "yes" : "no")
        << "\n";
      emit(common, j, h.str());
      return r.key_reported ? 0 : 1;
    }
    if (*metrics_cmd) {
      const Netlist original = read_bench_file(mt_original);
      const PpaProxy o = ppa_proxy(original, mt_vectors, common.seed);
      json j = {{"original", to_json(o)}, {"weights", to_json(AreaWeights{})}};
      std::string human = "original: area=" + std::to_string(o.area_units) + " delay=" + std::to_string(o.delay_levels) +
                          " power=" + std::to_string(o.power_units) + "\n";
      std::optional<PpaProxy> red;
      if (!mt_keyed.empty() || !mt_programmed.empty()) {
        if (mt_keyed.empty() || mt_programmed.empty()) throw Error("metrics: --keyed and --programmed go together");
        red = redacted_ppa(read_bench_file(mt_keyed), read_bench_file(mt_programmed), mt_vectors, common.seed);
      } else if (!mt_redacted.empty()) {
        red = ppa_proxy(read_bench_file(mt_redacted), mt_vectors, common.seed);
      }
      if (red) {
        const OverheadReport r = overhead_report(o, *red, stem(mt_original), mt_fabric_name);
        j["redacted"] = to_json(*red);
        j["overhead"] = to_json(r);
        human += overhead_csv_header() + "\n" + overhead_csv_row(r) + "\n";
      }
      emit(common, j, human);
      return 0;
    }
    if (*run_cmd) {
      const json bundle = run_experiment(fs::path(rn_manifest), fs::path(common.out_dir), rn_opt);
      std::ostringstream h;
      for (const json& e : bundle["experiments"]) {
        h << e["name"].get<std::string>() << ":";
        for (const auto& [stage, r] : e["stages"].items()) h << " " << stage << "=" << r["status"].get<std::string>();
        h << "\n";
      }
      h << "wrote " << (fs::path(common.out_dir) / "bundle.json").string() << "\n";
      emit(common, bundle, h.str());
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
