// ep_gap: reflected entropy / entanglement-of-purification gap toolkit.
//
// Exit codes: 0 pass, 1 numeric-criterion failure, 2 input or parse error.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "epgap/io.hpp"
#include "epgap/mera.hpp"
#include "epgap/objective.hpp"
#include "epgap/optimizer.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace epgap;

namespace {

constexpr int kExitPass = 0;
constexpr int kExitNumeric = 1;
constexpr int kExitInput = 2;

struct SearchOptions {
  std::string dims = "3,3,2,2";
  double q = 1.0;
  std::size_t seeds = 64;
  std::uint64_t master_seed = 0;
  int steps = 5000;
  double lr = 0.01;
  bool penalty = false;
  double penalty_weight = 1.0;
  std::string log_base = "e";
  int parallelism = 1;
  std::string out = "out";
};

LogBase parse_base(const std::string& s) {
  if (s == "e") return LogBase::natural;
  if (s == "2") return LogBase::two;
  throw ParseError("--log-base must be e or 2");
}

void add_search_flags(CLI::App* cmd, SearchOptions& o, bool with_dims = true) {
  if (with_dims) cmd->add_option("--dims", o.dims, "Local dimensions of A,B,A',B'");
  cmd->add_option("--seeds", o.seeds, "Number of shots");
  cmd->add_option("--master-seed", o.master_seed, "Shot i uses master-seed XOR i");
  cmd->add_option("--steps", o.steps, "ADAM steps per shot");
  cmd->add_option("--lr", o.lr, "ADAM learning rate");
  cmd->add_flag("--penalty", o.penalty, "Add weight * max(Max(I3), 0) to the objective");
  cmd->add_option("--penalty-weight", o.penalty_weight, "Penalty weight");
  cmd->add_option("--log-base", o.log_base, "Logarithm base: e or 2");
  cmd->add_option("--parallelism", o.parallelism, "Worker threads");
  cmd->add_option("--out", o.out, "Output directory");
}

json search_json(const SearchOptions& o) {
  return {{"dims", o.dims},       {"q", o.q},
          {"seeds", o.seeds},     {"master_seed", o.master_seed},
          {"steps", o.steps},     {"lr", o.lr},
          {"adam", {{"beta1", 0.9}, {"beta2", 0.999}, {"epsilon", 1e-8}}},
          {"penalty", o.penalty}, {"penalty_weight", o.penalty_weight},
          {"log_base", o.log_base}, {"parallelism", o.parallelism}};
}

ObjectiveConfig objective_from(const SearchOptions& o, double q) {
  ObjectiveConfig cfg;
  cfg.dims = parse_dims(o.dims);
  if (cfg.dims.num_sites() != 4)
    throw ParseError("--dims must list exactly four sites (A, B, A', B')");
  cfg.q = q;
  cfg.penalty_enabled = o.penalty;
  cfg.penalty_weight = o.penalty_weight;
  cfg.entropy.log_base = parse_base(o.log_base);
  return cfg;
}

AdamConfig adam_from(const SearchOptions& o) {
  AdamConfig adam;
  adam.steps = o.steps;
  adam.learning_rate = o.lr;
  return adam;
}

std::vector<double> parse_q_list(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      out.push_back(std::stod(item));
    } catch (const std::logic_error&) {
      throw ParseError("bad q value \"" + item + "\"");
    }
  }
  if (out.empty()) throw ParseError("empty q list");
  return out;
}

void print_shot_summary(const std::vector<ShotRecord>& shots) {
  double best = std::numeric_limits<double>::infinity();
  std::size_t negative = 0, failed = 0;
  for (const auto& r : shots) {
    if (r.failed) ++failed;
    if (r.gap_at_best < 0.0) ++negative;
    best = std::min(best, r.best_gap);
    std::printf("seed %-6llu q=%-6s best=%-16s gap=%-16s max_I3=%-16s%s\n",
                static_cast<unsigned long long>(r.seed), format_number(r.q_trained).c_str(),
                format_number(r.best_gap).c_str(), format_number(r.gap_at_best).c_str(),
                format_number(r.max_tmi_at_best).c_str(), r.failed ? "  FAILED" : "");
  }
  std::printf("shots: %zu  negative-gap: %zu  failed: %zu  best objective: %s\n", shots.size(),
              negative, failed, format_number(best).c_str());
}

int cmd_verify(const std::string& path, const std::string& base_override) {
  const StateFile file = read_state_file(path);
  std::optional<LogBase> base;
  if (!base_override.empty()) base = parse_base(base_override);
  const VerifyReport rep = verify_state(file, {}, base);
  if (!file.note.empty()) std::printf("%s\n\n", file.note.c_str());
  std::printf("%s", rep.to_table().c_str());
  std::printf("%s\n", rep.pass() ? "PASS" : "FAIL");
  return rep.pass() ? kExitPass : kExitNumeric;
}

int cmd_optimize(const SearchOptions& o) {
  const ObjectiveConfig cfg = objective_from(o, o.q);
  const auto seeds = derive_seeds(o.master_seed, o.seeds);
  const auto shots = run_batch(cfg, adam_from(o), seeds, o.parallelism);
  const fs::path out(o.out);
  write_shots_jsonl(shots, out / "shots.jsonl");
  write_manifest(make_manifest("optimize", search_json(o)), out / "manifest.json");
  print_shot_summary(shots);
  return kExitPass;
}

std::vector<LabeledState> states_from_shots(const std::vector<ShotRecord>& shots) {
  std::vector<LabeledState> states;
  for (const auto& r : shots) {
    if (r.failed) continue;
    const std::string id = "q" + format_number(r.q_trained) + "-s" + std::to_string(r.seed);
    states.push_back({id, r.family == "mera" ? mera_shot_state(r) : shot_state(r)});
  }
  if (states.empty()) throw ParseError("no usable shots");
  return states;
}

int cmd_sweep(const SearchOptions& o, const std::string& q_list, const std::string& q_grid,
              const std::string& shots_in) {
  const fs::path out(o.out);
  std::vector<ShotRecord> shots;
  if (!shots_in.empty()) {
    shots = read_shots_jsonl(shots_in);
  } else {
    for (double q : parse_q_list(q_list)) {
      const auto batch = run_batch(objective_from(o, q), adam_from(o),
                                   derive_seeds(o.master_seed, o.seeds), o.parallelism);
      shots.insert(shots.end(), batch.begin(), batch.end());
    }
    write_shots_jsonl(shots, out / "shots.jsonl");
  }
  const auto states = states_from_shots(shots);
  EntropyConfig entropy;
  entropy.log_base = parse_base(o.log_base);
  const auto grid = parse_q_grid(q_grid);
  const auto sweep = sweep_min_gap(states, grid, shots.front().partition, entropy);
  write_sweep_csv(sweep, out / "sweep.csv");
  json cfg = search_json(o);
  cfg["q_batch"] = q_list;
  cfg["q_grid"] = q_grid;
  cfg["shots_in"] = shots_in;
  write_manifest(make_manifest("sweep", cfg), out / "manifest.json");
  std::printf("states: %zu  grid points: %zu  wrote %s\n", states.size(), grid.size(),
              (out / "sweep.csv").c_str());
  return kExitPass;
}

int cmd_curve(const std::string& state_in, const std::string& shots_in, const std::string& q_grid,
              const std::string& base, const std::string& out_dir) {
  if (state_in.empty() == shots_in.empty())
    throw ParseError("give exactly one of --state or --shots");
  EntropyConfig entropy;
  entropy.log_base = parse_base(base);
  const auto grid = parse_q_grid(q_grid);
  std::vector<CurveRow> rows;
  const auto add = [&](const std::string& id, const QuditState& psi, const PartitionSpec& part) {
    for (const auto& p : state_gap_curve(psi, grid, part, entropy)) rows.push_back({id, p.q, p.gap});
  };
  if (!state_in.empty()) {
    const StateFile f = read_state_file(state_in);
    add(fs::path(state_in).stem().string(), f.state, f.partition);
  } else {
    const auto shots = read_shots_jsonl(shots_in);
    const auto states = states_from_shots(shots);
    for (const auto& s : states) add(s.id, s.state, shots.front().partition);
  }
  const fs::path out(out_dir);
  write_curve_csv(rows, out / "curve.csv");
  write_manifest(make_manifest("curve", {{"state", state_in}, {"shots", shots_in},
                                         {"q_grid", q_grid}, {"log_base", base}}),
                 out / "manifest.json");
  std::printf("wrote %zu rows to %s\n", rows.size(), (out / "curve.csv").c_str());
  return kExitPass;
}

int cmd_tmi(const std::string& shots_in, bool all, const std::string& base,
            const std::string& out_dir) {
  EntropyConfig entropy;
  entropy.log_base = parse_base(base);
  std::vector<TmiRow> rows;
  std::size_t negative = 0, positive_tmi = 0;
  for (const auto& r : read_shots_jsonl(shots_in)) {
    if (r.failed) continue;
    const QuditState psi = r.family == "mera" ? mera_shot_state(r) : shot_state(r);
    const double g = gap(psi, r.partition, 1.0, entropy);
    if (!all && !(g < 0.0)) continue;
    const double t = max_tmi(psi, r.partition, entropy);
    if (g < 0.0) {
      ++negative;
      if (t > 0.0) ++positive_tmi;
    }
    rows.push_back({r.seed, r.q_trained, g, t});
  }
  if (rows.empty()) {
    std::printf("no negative-gap states at q = 1\n");
    return kExitPass;
  }
  const fs::path out(out_dir);
  write_tmi_csv(rows, out / "tmi.csv");
  write_manifest(make_manifest("tmi", {{"shots", shots_in}, {"all", all}, {"log_base", base}}),
                 out / "manifest.json");
  std::printf("negative-gap states at q=1: %zu, with Max(I3) > 0: %zu\n", negative, positive_tmi);
  return kExitPass;
}

int cmd_mera(SearchOptions o, int qubits, const std::string& gradient) {
  const MeraLayout layout = MeraLayout::binary(qubits);
  EntropyConfig entropy;
  entropy.log_base = parse_base(o.log_base);
  const ObjectiveConfig cfg = mera_objective(layout, o.q, o.penalty, o.penalty_weight, entropy);
  MeraGradient mode;
  if (gradient == "analytic") mode = MeraGradient::analytic;
  else if (gradient == "fd") mode = MeraGradient::finite_difference;
  else throw ParseError("--gradient must be analytic or fd");
  const auto shots = run_mera_search(layout, cfg, adam_from(o), derive_seeds(o.master_seed, o.seeds),
                                     o.parallelism, mode);
  const fs::path out(o.out);
  write_shots_jsonl(shots, out / "shots.jsonl");
  json j = search_json(o);
  j["family"] = "mera";
  j["qubits"] = qubits;
  j["gradient"] = gradient;
  write_manifest(make_manifest("mera", j), out / "manifest.json");
  print_shot_summary(shots);
  return kExitPass;
}

int cmd_bound_check(const std::string& dims_spec, std::size_t count, double q,
                    std::uint64_t master_seed, const std::string& base) {
  const Dims dims = parse_dims(dims_spec);
  if (dims.num_sites() != 4) throw ParseError("--dims must list exactly four sites");
  EntropyConfig entropy;
  entropy.log_base = parse_base(base);
  ShotRng rng(master_seed);
  double worst = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < count; ++i)
    worst = std::min(worst, gap(random_state(dims, rng), PartitionSpec::four_sites(), q, entropy));
  const bool ok = worst >= -1e-9;
  std::printf("dims %s  q=%s  states=%zu  min gap=%s  %s\n", dims.to_string().c_str(),
              format_number(q).c_str(), count, format_number(worst).c_str(), ok ? "PASS" : "FAIL");
  return ok ? kExitPass : kExitNumeric;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Reflected entropy and entanglement-of-purification gap toolkit"};
  app.require_subcommand(1);

  std::string verify_path, verify_base;
  auto* verify = app.add_subcommand("verify", "Recompute entropies of a state file");
  verify->add_option("file", verify_path, "State JSON file")->required();
  verify->add_option("--log-base", verify_base, "Force base e or 2 instead of auto-probing");

  SearchOptions opt;
  auto* optimize = app.add_subcommand("optimize", "Counter-example search");
  add_search_flags(optimize, opt);
  optimize->add_option("--q", opt.q, "Renyi index of the reflected entropy");

  std::string q_list = "0.1,0.5,0.9,0.99,1,1.02", q_grid = "0.01:1.2:0.001", shots_in;
  auto* sweep = app.add_subcommand("sweep", "Batch at several q, then min gap over a q grid");
  add_search_flags(sweep, opt);
  sweep->add_option("--q", q_list, "Comma-separated training q values");
  sweep->add_option("--q-grid", q_grid, "Evaluation grid start:stop:step");
  sweep->add_option("--shots", shots_in, "Reuse states from a shot log instead of optimizing");

  std::string curve_state, curve_shots, curve_grid = "0.01:2:0.001", curve_base = "e",
                                        curve_out = "out";
  auto* curve = app.add_subcommand("curve", "Gap versus q for individual states");
  curve->add_option("--state", curve_state, "State JSON file");
  curve->add_option("--shots", curve_shots, "Shot log (one curve per shot)");
  curve->add_option("--q-grid", curve_grid, "Evaluation grid start:stop:step");
  curve->add_option("--log-base", curve_base, "Logarithm base: e or 2");
  curve->add_option("--out", curve_out, "Output directory");

  std::string tmi_shots, tmi_base = "e", tmi_out = "out";
  bool tmi_all = false;
  auto* tmi_cmd = app.add_subcommand("tmi", "Max(I3) of negative-gap states at q = 1");
  tmi_cmd->add_option("--shots", tmi_shots, "Shot log")->required();
  tmi_cmd->add_flag("--all", tmi_all, "Include states with non-negative gap");
  tmi_cmd->add_option("--log-base", tmi_base, "Logarithm base: e or 2");
  tmi_cmd->add_option("--out", tmi_out, "Output directory");

  int qubits = 8;
  std::string gradient = "analytic";
  auto* mera = app.add_subcommand("mera", "Gap search over binary MERA states");
  add_search_flags(mera, opt, false);
  mera->add_option("--qubits", qubits, "8 or 16");
  mera->add_option("--q", opt.q, "Renyi index");
  mera->add_option("--gradient", gradient, "analytic or fd");

  std::string bc_dims = "2,2,2,2", bc_base = "e";
  std::size_t bc_count = 1000;
  double bc_q = 2.0;
  std::uint64_t bc_seed = 0;
  auto* bound = app.add_subcommand("bound-check", "Random-state check of gap >= 0 at q = 2");
  bound->add_option("--dims", bc_dims, "Local dimensions");
  bound->add_option("--count", bc_count, "Number of random states");
  bound->add_option("--q", bc_q, "Renyi index");
  bound->add_option("--master-seed", bc_seed, "Generator seed");
  bound->add_option("--log-base", bc_base, "Logarithm base: e or 2");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitPass : kExitInput;
  }

  try {
    if (*verify) return cmd_verify(verify_path, verify_base);
    if (*optimize) return cmd_optimize(opt);
    if (*sweep) return cmd_sweep(opt, q_list, q_grid, shots_in);
    if (*curve) return cmd_curve(curve_state, curve_shots, curve_grid, curve_base, curve_out);
    if (*tmi_cmd) return cmd_tmi(tmi_shots, tmi_all, tmi_base, tmi_out);
    if (*mera) return cmd_mera(opt, qubits, gradient);
    if (*bound) return cmd_bound_check(bc_dims, bc_count, bc_q, bc_seed, bc_base);
  } catch (const ParseError& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return kExitInput;
  } catch (const std::invalid_argument& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return kExitInput;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitNumeric;
  }
  return kExitPass;
}
