#include "redactor/experiment.hpp"

#include <atomic>
#include <chrono>
#include <fstream>
#include <map>
#include <regex>
#include <set>
#include <sstream>
#include <thread>

#include "redactor/attack.hpp"
#include "redactor/bench_io.hpp"
#include "redactor/cad.hpp"
#include "redactor/metrics.hpp"
#include "redactor/verify.hpp"

namespace redactor {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

[[noreturn]] void bad(const std::string& where, const std::string& what) {
  throw ManifestError("manifest: " + where + ": " + what);
}

void allow_keys(const json& j, const std::string& where, const std::set<std::string>& keys) {
  if (!j.is_object()) bad(where, "expected an object");
  for (const auto& [k, v] : j.items())
    if (!keys.count(k)) bad(where, "unknown field '" + k + "'");
}

template <class T>
T get(const json& j, const std::string& key, const std::string& where, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    bad(where + "." + key, "wrong type");
  }
}

int get_int(const json& j, const std::string& key, const std::string& where, int fallback) {
  if (j.contains(key) && !j.at(key).is_number_integer()) bad(where + "." + key, "expected an integer");
  return get<int>(j, key, where, fallback);
}

double get_num(const json& j, const std::string& key, const std::string& where, double fallback) {
  if (j.contains(key) && !j.at(key).is_number()) bad(where + "." + key, "expected a number");
  return get<double>(j, key, where, fallback);
}

bool get_bool(const json& j, const std::string& key, const std::string& where, bool fallback) {
  if (j.contains(key) && !j.at(key).is_boolean()) bad(where + "." + key, "expected true or false");
  return get<bool>(j, key, where, fallback);
}

bool non_negative_int(const json& j) { return j.is_number_unsigned() || (j.is_number_integer() && j.get<long long>() >= 0); }

std::string get_str(const json& j, const std::string& key, const std::string& where, std::string fallback) {
  if (j.contains(key) && !j.at(key).is_string()) bad(where + "." + key, "expected a string");
  return get<std::string>(j, key, where, std::move(fallback));
}

ArchParams arch_at(const json& j, const std::string& where) {
  try {
    return arch_from_json(j);
  } catch (const ManifestError& e) {
    bad(where, e.what());
  }
}

struct ExperimentSpec {
  std::string name;
  std::string benchmark;
  std::uint64_t seed = 1;
  bool sized = false;
  ArchParams arch;
  SizeSearchOptions search;
  FlowOptions flow;
  std::string verify_method = "auto";
  int verify_max_inputs = 16;
  std::uint64_t verify_vectors = 100000;
  bool metrics = true;
  std::size_t metric_vectors = 4096;
  bool attack = true;
  AttackConfig attack_cfg;
};

ExperimentSpec parse_experiment(const json& e, std::size_t index, std::uint64_t global_seed) {
  const std::string where = "experiments[" + std::to_string(index) + "]";
  allow_keys(e, where, {"name", "benchmark", "arch", "size_search", "flow", "verify", "metrics", "attack", "seed"});
  ExperimentSpec s;
  if (!e.contains("name")) bad(where, "missing 'name'");
  if (!e.contains("benchmark")) bad(where, "missing 'benchmark'");
  s.name = get_str(e, "name", where, "");
  if (!std::regex_match(s.name, std::regex("[A-Za-z0-9_.-]+"))) bad(where + ".name", "must match [A-Za-z0-9_.-]+");
  s.benchmark = get_str(e, "benchmark", where, "");
  if (e.contains("seed") && !non_negative_int(e["seed"])) bad(where + ".seed", "expected a non-negative integer");
  s.seed = get<std::uint64_t>(e, "seed", where, global_seed);
  if (e.contains("arch") == e.contains("size_search")) bad(where, "exactly one of 'arch' and 'size_search' is required");
  if (e.contains("arch")) s.arch = arch_at(e["arch"], where + ".arch");
  if (e.contains("size_search")) {
    const json& z = e["size_search"];
    const std::string w = where + ".size_search";
    allow_keys(z, w, {"arch", "max_grid", "max_n", "max_io_per_tile", "min_io_utilization", "relax_io"});
    s.sized = true;
    s.arch = z.contains("arch") ? arch_at(z["arch"], w + ".arch") : ArchParams{};
    s.search.max_grid = get_int(z, "max_grid", w, s.search.max_grid);
    s.search.max_n = get_int(z, "max_n", w, s.search.max_n);
    s.search.max_io_per_tile = get_int(z, "max_io_per_tile", w, s.search.max_io_per_tile);
    s.search.min_io_utilization = get_num(z, "min_io_utilization", w, s.search.min_io_utilization);
    s.search.relax_io = get_bool(z, "relax_io", w, false);
    if (s.search.max_grid < 1 || s.search.max_n < 1 || s.search.max_io_per_tile < 1)
      bad(w, "bounds must be at least 1");
  }
  if (e.contains("flow")) {
    const std::string w = where + ".flow";
    allow_keys(e["flow"], w, {"max_width", "max_bles"});
    s.flow.max_width = get_int(e["flow"], "max_width", w, s.flow.max_width);
    s.flow.max_bles = get_int(e["flow"], "max_bles", w, 0);
  }
  s.flow.seed = s.seed;
  s.search.flow = s.flow;
  if (e.contains("verify")) {
    const std::string w = where + ".verify";
    allow_keys(e["verify"], w, {"method", "max_inputs", "vectors"});
    s.verify_method = get_str(e["verify"], "method", w, "auto");
    if (!std::set<std::string>{"auto", "exhaustive", "random", "sat"}.count(s.verify_method))
      bad(w + ".method", "expected auto, exhaustive, random or sat");
    s.verify_max_inputs = get_int(e["verify"], "max_inputs", w, 16);
    s.verify_vectors = static_cast<std::uint64_t>(get_int(e["verify"], "vectors", w, 100000));
  }
  if (e.contains("metrics")) {
    const std::string w = where + ".metrics";
    if (e["metrics"].is_boolean()) {
      s.metrics = e["metrics"].get<bool>();
    } else {
      allow_keys(e["metrics"], w, {"vectors"});
      const int v = get_int(e["metrics"], "vectors", w, 4096);
      if (v < 1) bad(w + ".vectors", "must be at least 1");
      s.metric_vectors = static_cast<std::size_t>(v);
    }
  }
  if (e.contains("attack")) {
    const std::string w = where + ".attack";
    if (e["attack"].is_boolean()) {
      s.attack = e["attack"].get<bool>();
    } else {
      const json& a = e["attack"];
      allow_keys(a, w, {"timeout_s", "max_unroll", "initial_unroll", "strategy", "seed"});
      s.attack_cfg.timeout_s = get_num(a, "timeout_s", w, s.attack_cfg.timeout_s);
      s.attack_cfg.max_unroll = get_int(a, "max_unroll", w, s.attack_cfg.max_unroll);
      s.attack_cfg.initial_unroll = get_int(a, "initial_unroll", w, 0);
      const std::string strat = get_str(a, "strategy", w, "break_then_unroll");
      if (strat == "break_then_unroll") s.attack_cfg.strategy = AttackStrategy::BreakThenUnroll;
      else if (strat == "unroll_only") s.attack_cfg.strategy = AttackStrategy::UnrollOnly;
      else bad(w + ".strategy", "expected break_then_unroll or unroll_only");
      if (a.contains("seed") && !non_negative_int(a["seed"])) bad(w + ".seed", "expected a non-negative integer");
      s.attack_cfg.seed = get<std::uint64_t>(a, "seed", w, s.seed);
      if (s.attack_cfg.timeout_s <= 0) bad(w + ".timeout_s", "must be positive");
      if (s.attack_cfg.max_unroll < 1) bad(w + ".max_unroll", "must be at least 1");
      if (s.attack_cfg.initial_unroll < 0 || s.attack_cfg.initial_unroll > s.attack_cfg.max_unroll)
        bad(w + ".initial_unroll", "must be 0 (automatic) or between 1 and max_unroll");
    }
  } else {
    s.attack_cfg.seed = s.seed;
  }
  return s;
}

json stats_json(const FabricStats& s) {
  return {{"block_utilization", s.block_utilization},
          {"io_utilization", s.io_utilization},
          {"bitstream_size", s.bitstream_size},
          {"channel_width", s.channel_width},
          {"used_clbs", s.used_clbs},
          {"used_pads", s.used_pads}};
}

struct Outcome {
  json record;
  std::optional<Bitstream> bitstream;
};

Outcome run_one(const ExperimentSpec& s, const json& entry, const fs::path& base_dir) {
  Outcome out;
  json& rec = out.record;
  rec["name"] = s.name;
  rec["benchmark"] = s.benchmark;
  rec["spec"] = entry;
  rec["seed"] = s.seed;
  json stages = json::object();
  const char* order[] = {"load", "build", "verify", "metrics", "attack"};
  bool failed = false;
  auto stage = [&](const char* name, auto&& body) {
    if (failed) {
      stages[name] = {{"status", "skipped"}};
      return;
    }
    const auto t0 = std::chrono::steady_clock::now();
    json r;
    try {
      r = body();
      if (!r.contains("status")) r["status"] = "ok";
    } catch (const std::exception& e) {
      r = {{"status", "failed"}, {"error", e.what()}};
    }
    if (r["status"] == "failed") failed = true;
    r["time_s"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    stages[name] = std::move(r);
  };

  Netlist design;
  std::optional<FlowResult> flow;
  std::optional<PpaProxy> original;
  stage("load", [&] {
    design = read_bench_file((base_dir / s.benchmark).string());
    rec["ip"] = fs::path(s.benchmark).stem().string();
    const ScanPorts p = scan_ports(design);
    return json{{"inputs", design.data_inputs().size()},
                {"outputs", design.outputs().size()},
                {"flops", design.dffs().size()},
                {"cells", design.num_cells()},
                {"scan_inputs", p.input_nets.size()}};
  });
  if (!rec.contains("ip")) rec["ip"] = fs::path(s.benchmark).stem().string();
  stage("build", [&] {
    json r;
    if (s.sized) {
      SizeSearchResult z = size_search(design, s.arch, s.search);
      r["candidates_tried"] = z.candidates_tried;
      r["max_bles"] = z.max_bles;
      flow = std::move(z.flow);
    } else {
      flow = run_flow(design, s.arch, s.flow);
    }
    rec["fabric"] = flow->fabric.params.name();
    r["arch"] = arch_to_json(flow->fabric.params);
    r["fabric"] = flow->fabric.params.name();
    r["stats"] = stats_json(fabric_stats(*flow));
    r["luts"] = flow->luts.num_cells();
    r["width_trials"] = flow->width_trials;
    out.bitstream = flow->bitstream;
    return r;
  });
  stage("verify", [&] {
    EquivalenceVerdict v;
    if (s.verify_method == "exhaustive") v = exhaustive_equiv(design, flow->programmed, s.verify_max_inputs);
    else if (s.verify_method == "sat") v = sat_equiv(design, flow->programmed);
    else if (s.verify_method == "random") v = random_equiv(design, flow->programmed, s.verify_vectors, s.seed);
    else v = check_equiv(design, flow->programmed, s.verify_max_inputs);
    json r = to_json(v);
    if (!v.equivalent) {
      r["status"] = "failed";
      r["error"] = "programmed fabric differs from the benchmark";
    }
    return r;
  });
  stage("metrics", [&] {
    if (!s.metrics) return json{{"status", "disabled"}};
    const PpaProxy o = ppa_proxy(design, s.metric_vectors, s.seed);
    const PpaProxy r = redacted_ppa(flow->keyed, flow->programmed, s.metric_vectors, s.seed);
    const OverheadReport ov = overhead_report(o, r, rec["ip"].get<std::string>(), rec["fabric"].get<std::string>());
    return json{{"original", to_json(o)}, {"redacted", to_json(r)}, {"overhead", to_json(ov)}};
  });
  stage("attack", [&] {
    if (!s.attack) return json{{"status", "disabled"}};
    key_expose(flow->fabric);
    // The attacker sees the bound fabric: pads and flops named as in the design.
    const AttackReport a = attack(flow->keyed, design, s.attack_cfg, rec["fabric"].get<std::string>());
    json r = to_json(a);
    r["report_status"] = r["status"];
    r.erase("status");
    r["correct_key_preserved"] = key_satisfies_report(flow->keyed, a, flow->bitstream);
    return r;
  });
  for (const char* n : order) rec["stages"][n] = stages[n];
  return out;
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream f(p, std::ios::binary);
  if (!f) throw Error("cannot write " + p.string());
  f << text;
}

}  // namespace

ArchParams arch_from_json(const json& j) {
  if (!j.is_object()) throw ManifestError("arch: expected an object");
  static const std::set<std::string> keys = {"k",  "ble",    "n",      "grid_w", "grid_h", "io_per_tile",
                                             "w",  "fc_in",  "fc_out", "fs",     "l"};
  for (const auto& [k, v] : j.items())
    if (!keys.count(k)) throw ManifestError("arch: unknown field '" + k + "'");
  ArchParams p;
  const std::string w = "arch";
  p.k = get_int(j, "k", w, p.k);
  const std::string ble = get_str(j, "ble", w, "lut");
  if (ble == "lut") p.ble_kind = BleKind::Lut;
  else if (ble == "flut") p.ble_kind = BleKind::Flut;
  else throw ManifestError("arch.ble: expected lut or flut");
  p.n = get_int(j, "n", w, p.n);
  p.grid_w = get_int(j, "grid_w", w, p.grid_w);
  p.grid_h = get_int(j, "grid_h", w, p.grid_h);
  p.io_per_tile = get_int(j, "io_per_tile", w, p.io_per_tile);
  if (j.contains("w")) {
    if (j["w"].is_string()) {
      if (j["w"] != "auto") throw ManifestError("arch.w: expected an integer or \"auto\"");
      p.w = 0;
    } else {
      p.w = get_int(j, "w", w, 0);
    }
  }
  p.fc_in = get_num(j, "fc_in", w, p.fc_in);
  p.fc_out = get_num(j, "fc_out", w, p.fc_out);
  p.fs = get_int(j, "fs", w, p.fs);
  p.l = get_int(j, "l", w, p.l);
  try {
    validate(p);
  } catch (const Error& e) {
    throw ManifestError(std::string("arch: ") + e.what());
  }
  return p;
}

json arch_to_json(const ArchParams& p) {
  json j = {{"k", p.k},
            {"ble", p.ble_kind == BleKind::Flut ? "flut" : "lut"},
            {"n", p.n},
            {"grid_w", p.grid_w},
            {"grid_h", p.grid_h},
            {"io_per_tile", p.io_per_tile},
            {"fc_in", p.fc_in},
            {"fc_out", p.fc_out},
            {"fs", p.fs},
            {"l", p.l}};
  if (p.w == 0) j["w"] = "auto";
  else j["w"] = p.w;
  return j;
}

void validate_manifest(const json& m) {
  allow_keys(m, "top level", {"seed", "experiments", "description"});
  if (m.contains("seed") && !non_negative_int(m["seed"])) bad("seed", "expected a non-negative integer");
  if (!m.contains("experiments") || !m["experiments"].is_array() || m["experiments"].empty())
    bad("experiments", "expected a non-empty array");
  const auto seed = get<std::uint64_t>(m, "seed", "top level", 1);
  std::set<std::string> names;
  for (std::size_t i = 0; i < m["experiments"].size(); ++i) {
    const ExperimentSpec s = parse_experiment(m["experiments"][i], i, seed);
    if (!names.insert(s.name).second) bad("experiments[" + std::to_string(i) + "].name", "duplicate '" + s.name + "'");
  }
}

std::string table3_header() { return "fabric,block_utilization,io_utilization,bitstream_size,channel_width"; }
std::string table4_header() { return "fabric,unroll,clauses,time_s,key_reported"; }

json run_experiment(const json& manifest, const fs::path& base_dir, const fs::path& out_dir, const RunOptions& opt) {
  validate_manifest(manifest);
  const auto seed = get<std::uint64_t>(manifest, "seed", "top level", 1);
  const json& entries = manifest["experiments"];
  std::vector<ExperimentSpec> specs;
  for (std::size_t i = 0; i < entries.size(); ++i) specs.push_back(parse_experiment(entries[i], i, seed));

  fs::create_directories(out_dir / "bitstreams");
  std::map<std::string, json> previous;
  if (opt.resume && fs::exists(out_dir / "bundle.json")) {
    try {
      std::ifstream f(out_dir / "bundle.json");
      const json old = json::parse(f);
      for (const json& r : old.at("experiments")) previous[r.at("name").get<std::string>()] = r;
    } catch (const std::exception&) {
      previous.clear();  // unreadable bundle: run everything
    }
  }

  std::vector<Outcome> results(specs.size());
  std::vector<char> reused(specs.size(), 0);
  for (std::size_t i = 0; i < specs.size(); ++i) {
    auto it = previous.find(specs[i].name);
    if (it == previous.end() || it->second.value("spec", json()) != entries[i] ||
        it->second.value("seed", json()) != json(specs[i].seed))
      continue;
    const fs::path bit = out_dir / "bitstreams" / (specs[i].name + ".bit");
    const bool built = it->second["stages"]["build"]["status"] == "ok";
    if (built && !fs::exists(bit)) continue;
    results[i].record = it->second;
    reused[i] = 1;
  }

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < specs.size();)
      if (!reused[i]) results[i] = run_one(specs[i], entries[i], base_dir);
  };
  const int jobs = std::max(1, std::min<int>(opt.jobs, static_cast<int>(specs.size())));
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < jobs; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  std::string t3 = table3_header() + "\n", t4 = table4_header() + "\n", ov = overhead_csv_header() + "\n";
  json bundle;
  bundle["manifest"] = manifest;
  bundle["metadata"] = {
      {"area_weights", to_json(AreaWeights{})},
      {"overhead_denominator", "full original module"},
      {"redacted_area", "key-exposed fabric plus one DFF of configuration storage per bit"},
      {"unroll_factor", "global copies U of every combinational-loop net"},
      {"clauses", "raw Tseitin clauses of the final attack instance, before solver simplification"},
  };
  bundle["experiments"] = json::array();
  for (std::size_t i = 0; i < results.size(); ++i) {
    const json& r = results[i].record;
    const json& st = r["stages"];
    if (st["build"]["status"] == "ok") {
      const json& s = st["build"]["stats"];
      t3 += r["fabric"].get<std::string>() + "," + fmt(s["block_utilization"]) + "," + fmt(s["io_utilization"]) + "," +
            std::to_string(s["bitstream_size"].get<std::size_t>()) + "," + std::to_string(s["channel_width"].get<int>()) +
            "\n";
      if (results[i].bitstream)
        write_text(out_dir / "bitstreams" / (specs[i].name + ".bit"), write_bitstream(*results[i].bitstream));
    }
    if (st["attack"]["status"] == "ok") {
      const json& a = st["attack"];
      std::ostringstream time;
      time.setf(std::ios::fixed);
      time.precision(3);
      time << a["time_s"].get<double>();
      t4 += a["fabric"].get<std::string>() + "," + std::to_string(a["unroll"].get<int>()) + "," +
            std::to_string(a["clauses"].get<std::size_t>()) + "," + time.str() + "," +
            (a["key_reported"].get<bool>() ? "yes" : "no") + "\n";
    }
    if (st["metrics"]["status"] == "ok") {
      const json& o = st["metrics"]["overhead"];
      OverheadReport rep{o["ip"], o["fabric"], o["area_overhead"], o["power_overhead"], o["delay_overhead"]};
      ov += overhead_csv_row(rep) + "\n";
    }
    bundle["experiments"].push_back(r);
  }
  write_text(out_dir / "table3.csv", t3);
  write_text(out_dir / "table4.csv", t4);
  write_text(out_dir / "overhead.csv", ov);
  write_text(out_dir / "bundle.json", bundle.dump(2) + "\n");
  return bundle;
}

json run_experiment(const fs::path& manifest_file, const fs::path& out_dir, const RunOptions& opt) {
  std::ifstream f(manifest_file);
  if (!f) throw Error("cannot read " + manifest_file.string());
  json m;
  try {
    m = json::parse(f);
  } catch (const json::parse_error& e) {
    throw ManifestError(std::string("manifest: ") + e.what());
  }
  return run_experiment(m, manifest_file.parent_path(), out_dir, opt);
}

}  // namespace redactor
