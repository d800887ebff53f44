#include "epgap/io.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <limits>
#include <sstream>

#include "epgap/objective.hpp"
#include "epgap/reflect.hpp"

namespace epgap {

using nlohmann::json;

namespace {

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

std::ofstream open_out(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

std::string format_with(const char* fmt, double x) {
  if (!std::isfinite(x)) return "null";
  char buf[64];
  std::snprintf(buf, sizeof buf, fmt, x);
  return buf;
}

std::string format_exact(double x) { return format_with("%.17g", x); }

double number_or_nan(const json& j) {
  if (j.is_null()) return std::numeric_limits<double>::quiet_NaN();
  return j.get<double>();
}

std::vector<int> int_list(const json& j, const char* what) {
  if (!j.is_array()) throw ParseError(std::string(what) + " must be an array of integers");
  std::vector<int> out;
  for (const auto& v : j) {
    if (!v.is_number_integer()) throw ParseError(std::string(what) + " must hold integers");
    out.push_back(v.get<int>());
  }
  return out;
}

const json& require(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key))
    throw ParseError(std::string("missing field \"") + key + "\"");
  return j.at(key);
}

PartitionSpec parse_parties(const json& j) {
  return {int_list(require(j, "A"), "parties.A"), int_list(require(j, "B"), "parties.B"),
          int_list(require(j, "Ap"), "parties.Ap"), int_list(require(j, "Bp"), "parties.Bp")};
}

std::string list_json(const std::vector<int>& v) {
  std::string s = "[";
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
  return s + "]";
}

std::string parties_json(const PartitionSpec& p) {
  return "{\"A\":" + list_json(p.a) + ",\"B\":" + list_json(p.b) + ",\"Ap\":" + list_json(p.ap) +
         ",\"Bp\":" + list_json(p.bp) + "}";
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(s);
  while (std::getline(is, cur, sep)) out.push_back(cur);
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

double parse_double(const std::string& s) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw ParseError("trailing characters in number \"" + s + "\"");
    return v;
  } catch (const std::logic_error&) {
    throw ParseError("not a number: \"" + s + "\"");
  }
}

std::vector<std::vector<std::string>> read_csv(const std::filesystem::path& path,
                                               const std::string& header) {
  std::istringstream in(read_text(path));
  std::string line;
  if (!std::getline(in, line) || line != header)
    throw ParseError(path.string() + ": expected header \"" + header + "\"");
  const std::size_t cols = split(header, ',').size();
  std::vector<std::vector<std::string>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto fields = split(line, ',');
    if (fields.size() != cols) throw ParseError(path.string() + ": wrong column count");
    rows.push_back(std::move(fields));
  }
  return rows;
}

}  // namespace

std::string format_number(double x) { return format_with("%.12g", x); }

std::string log_base_name(LogBase base) { return base == LogBase::two ? "2" : "e"; }

StateFile parse_state_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("invalid JSON: ") + e.what());
  }
  try {
    std::vector<int> dim_list = int_list(require(j, "dims"), "dims");
    Dims dims = [&] {
      try {
        return Dims(dim_list);
      } catch (const std::invalid_argument& e) {
        throw ParseError(e.what());
      }
    }();
    PartitionSpec partition = parse_parties(require(j, "parties"));
    try {
      partition.validate(dims.num_sites());
    } catch (const std::invalid_argument& e) {
      throw ParseError(std::string("invalid parties: ") + e.what());
    }

    const json& amps = require(j, "amplitudes");
    if (!amps.is_array()) throw ParseError("amplitudes must be an array");
    if (amps.size() != dims.total())
      throw ParseError("expected " + std::to_string(dims.total()) + " amplitudes for dims " +
                       dims.to_string() + ", got " + std::to_string(amps.size()));
    CVector v(dims.total());
    for (std::size_t i = 0; i < amps.size(); ++i) {
      const auto& a = amps[i];
      if (!a.is_array() || a.size() != 2 || !a[0].is_number() || !a[1].is_number())
        throw ParseError("amplitude " + std::to_string(i) + " must be [re, im]");
      v[i] = Complex(a[0].get<double>(), a[1].get<double>());
    }
    const double norm = v.norm();
    if (!std::isfinite(norm) || std::abs(norm - 1.0) > kStateNormSlack)
      throw ParseError("state norm " + std::to_string(norm) + " deviates from 1 by more than " +
                       std::to_string(kStateNormSlack));

    StateFile out{QuditState::normalized(dims, std::move(v)), std::move(partition), norm, {}, {}};
    if (j.contains("expected")) {
      const json& e = j.at("expected");
      out.expected = ExpectedValues{require(e, "S_AAp").get<double>(),
                                    require(e, "S_R").get<double>(),
                                    require(e, "gap").get<double>()};
    }
    if (j.contains("note") && j.at("note").is_string()) out.note = j.at("note").get<std::string>();
    return out;
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed state file: ") + e.what());
  }
}

StateFile read_state_file(const std::filesystem::path& path) {
  return parse_state_json(read_text(path));
}

std::string state_to_json(const QuditState& state, const PartitionSpec& partition) {
  std::vector<int> dims(state.dims().sites().begin(), state.dims().sites().end());
  std::string s = "{\n  \"dims\": " + list_json(dims) + ",\n  \"parties\": " +
                  parties_json(partition) + ",\n  \"amplitudes\": [\n";
  const auto& a = state.amplitudes();
  for (Eigen::Index i = 0; i < a.size(); ++i)
    s += "    [" + format_exact(a[i].real()) + ", " + format_exact(a[i].imag()) + "]" +
         (i + 1 < a.size() ? ",\n" : "\n");
  return s + "  ]\n}\n";
}

std::string shot_to_json_line(const ShotRecord& r) {
  std::vector<int> dims(r.dims.sites().begin(), r.dims.sites().end());
  std::string s = "{\"family\":" + json(r.family).dump() + ",\"seed\":" + std::to_string(r.seed) +
                  ",\"dims\":" + list_json(dims) + ",\"parties\":" + parties_json(r.partition) +
                  ",\"q_trained\":" + format_number(r.q_trained) +
                  ",\"penalty\":" + (r.penalty ? "true" : "false") +
                  ",\"penalty_weight\":" + format_number(r.penalty_weight) +
                  ",\"log_base\":\"" + log_base_name(r.log_base) + "\"" +
                  ",\"best_gap\":" + format_number(r.best_gap) +
                  ",\"gap_at_best\":" + format_number(r.gap_at_best) +
                  ",\"max_tmi_at_best\":" + format_number(r.max_tmi_at_best) +
                  ",\"steps_run\":" + std::to_string(r.steps_run) +
                  ",\"failed\":" + (r.failed ? "true" : "false") +
                  ",\"failure\":" + json(r.failure).dump() +
                  ",\"param_dim\":" + std::to_string(r.param_dim) + ",\"best_params\":[";
  for (std::size_t i = 0; i < r.best_params.size(); ++i)
    s += (i ? ",[" : "[") + format_exact(r.best_params[i].real()) + "," +
         format_exact(r.best_params[i].imag()) + "]";
  s += "],\"objective_trace\":[";
  for (std::size_t i = 0; i < r.objective_trace.size(); ++i)
    s += (i ? "," : "") + format_number(r.objective_trace[i]);
  return s + "]}";
}

ShotRecord parse_shot_line(const std::string& line) {
  try {
    const json j = json::parse(line);
    ShotRecord r;
    r.family = require(j, "family").get<std::string>();
    r.seed = require(j, "seed").get<std::uint64_t>();
    r.dims = Dims(int_list(require(j, "dims"), "dims"));
    r.partition = parse_parties(require(j, "parties"));
    r.q_trained = require(j, "q_trained").get<double>();
    r.penalty = require(j, "penalty").get<bool>();
    r.penalty_weight = require(j, "penalty_weight").get<double>();
    r.log_base = require(j, "log_base").get<std::string>() == "2" ? LogBase::two : LogBase::natural;
    r.best_gap = number_or_nan(require(j, "best_gap"));
    r.gap_at_best = number_or_nan(require(j, "gap_at_best"));
    r.max_tmi_at_best = number_or_nan(require(j, "max_tmi_at_best"));
    r.steps_run = require(j, "steps_run").get<int>();
    r.failed = require(j, "failed").get<bool>();
    r.failure = require(j, "failure").get<std::string>();
    r.param_dim = require(j, "param_dim").get<int>();
    for (const auto& p : require(j, "best_params"))
      r.best_params.emplace_back(p.at(0).get<double>(), p.at(1).get<double>());
    for (const auto& v : require(j, "objective_trace")) r.objective_trace.push_back(number_or_nan(v));
    return r;
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed shot record: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw ParseError(std::string("malformed shot record: ") + e.what());
  }
}

void write_shots_jsonl(std::vector<ShotRecord> records, const std::filesystem::path& path) {
  if (records.empty()) throw std::invalid_argument("no shot records to write");
  std::stable_sort(records.begin(), records.end(), [](const auto& l, const auto& r) {
    return l.q_trained != r.q_trained ? l.q_trained < r.q_trained : l.seed < r.seed;
  });
  auto out = open_out(path);
  for (const auto& r : records) out << shot_to_json_line(r) << '\n';
}

std::vector<ShotRecord> read_shots_jsonl(const std::filesystem::path& path) {
  std::istringstream in(read_text(path));
  std::vector<ShotRecord> out;
  std::string line;
  while (std::getline(in, line))
    if (!line.empty()) out.push_back(parse_shot_line(line));
  return out;
}

void write_sweep_csv(std::vector<SweepRecord> records, const std::filesystem::path& path) {
  if (records.empty()) throw std::invalid_argument("no sweep records to write");
  std::stable_sort(records.begin(), records.end(),
                   [](const auto& l, const auto& r) { return l.q < r.q; });
  auto out = open_out(path);
  out << "q,min_gap,state_id\n";
  for (const auto& r : records)
    out << format_number(r.q) << ',' << format_number(r.min_gap) << ',' << r.state_id << '\n';
}

std::vector<SweepRecord> read_sweep_csv(const std::filesystem::path& path) {
  std::vector<SweepRecord> out;
  for (const auto& f : read_csv(path, "q,min_gap,state_id"))
    out.push_back({parse_double(f[0]), parse_double(f[1]), f[2]});
  return out;
}

void write_curve_csv(std::vector<CurveRow> rows, const std::filesystem::path& path) {
  if (rows.empty()) throw std::invalid_argument("no curve rows to write");
  std::stable_sort(rows.begin(), rows.end(), [](const auto& l, const auto& r) {
    return l.state_id != r.state_id ? l.state_id < r.state_id : l.q < r.q;
  });
  auto out = open_out(path);
  out << "state_id,q,gap\n";
  for (const auto& r : rows)
    out << r.state_id << ',' << format_number(r.q) << ',' << format_number(r.gap) << '\n';
}

std::vector<CurveRow> read_curve_csv(const std::filesystem::path& path) {
  std::vector<CurveRow> out;
  for (const auto& f : read_csv(path, "state_id,q,gap"))
    out.push_back({f[0], parse_double(f[1]), parse_double(f[2])});
  return out;
}

void write_tmi_csv(std::vector<TmiRow> rows, const std::filesystem::path& path) {
  if (rows.empty()) throw std::invalid_argument("no TMI rows to write");
  std::stable_sort(rows.begin(), rows.end(), [](const auto& l, const auto& r) {
    return l.q_trained != r.q_trained ? l.q_trained < r.q_trained : l.seed < r.seed;
  });
  auto out = open_out(path);
  out << "seed,q_trained,gap,max_tmi\n";
  for (const auto& r : rows)
    out << r.seed << ',' << format_number(r.q_trained) << ',' << format_number(r.gap) << ','
        << format_number(r.max_tmi) << '\n';
}

std::vector<TmiRow> read_tmi_csv(const std::filesystem::path& path) {
  std::vector<TmiRow> out;
  for (const auto& f : read_csv(path, "seed,q_trained,gap,max_tmi")) {
    std::uint64_t seed = 0;
    try {
      seed = std::stoull(f[0]);
    } catch (const std::logic_error&) {
      throw ParseError("bad seed \"" + f[0] + "\"");
    }
    out.push_back({seed, parse_double(f[1]), parse_double(f[2]), parse_double(f[3])});
  }
  return out;
}

RunManifest make_manifest(std::string command, json config) {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm utc{};
  gmtime_r(&now, &utc);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &utc);
  return {std::move(command), std::move(config), kToolVersion, buf};
}

void write_manifest(const RunManifest& m, const std::filesystem::path& path) {
  const json j = {{"command", m.command},
                  {"config", m.config},
                  {"tool_version", m.tool_version},
                  {"timestamp", m.timestamp}};
  auto out = open_out(path);
  out << j.dump(2) << '\n';
}

std::vector<double> parse_q_grid(const std::string& spec) {
  const auto parts = split(spec, ':');
  if (parts.size() != 3) throw ParseError("q grid must look like start:stop:step");
  const double start = parse_double(parts[0]);
  const double stop = parse_double(parts[1]);
  const double step = parse_double(parts[2]);
  if (!(start > 0.0) || !(step > 0.0) || stop < start)
    throw ParseError("q grid needs 0 < start <= stop and step > 0");
  const auto n = static_cast<long>(std::floor((stop - start) / step + 1e-9));
  std::vector<double> out;
  for (long k = 0; k <= n; ++k) out.push_back(start + static_cast<double>(k) * step);
  return out;
}

Dims parse_dims(const std::string& spec) {
  std::string s = spec;
  s.erase(std::remove_if(s.begin(), s.end(), [](char c) { return c == '[' || c == ']' || c == ' '; }),
          s.end());
  std::vector<int> dims;
  for (const auto& f : split(s, ',')) {
    if (f.empty()) continue;
    try {
      dims.push_back(std::stoi(f));
    } catch (const std::logic_error&) {
      throw ParseError("bad dimension \"" + f + "\"");
    }
  }
  try {
    return Dims(std::move(dims));
  } catch (const std::invalid_argument& e) {
    throw ParseError(e.what());
  }
}

bool VerifyReport::pass() const {
  return std::all_of(rows.begin(), rows.end(), [](const auto& r) { return r.pass; });
}

std::string VerifyReport::to_table() const {
  std::string s;
  char buf[160];
  std::snprintf(buf, sizeof buf, "log base: %s%s   raw norm: %.6f\n",
                base == LogBase::two ? "2 (bits)" : "e (nats)",
                base_probed ? " [auto-probed]" : "", raw_norm);
  s += buf;
  std::snprintf(buf, sizeof buf, "%-26s %16s %12s %10s  %s\n", "quantity", "value", "expected",
                "tol", "status");
  s += buf;
  for (const auto& r : rows) {
    const std::string expected = r.expected ? format_number(*r.expected) : "-";
    std::snprintf(buf, sizeof buf, "%-26s %16.9f %12s %10.1e  %s\n", r.name.c_str(), r.value,
                  expected.c_str(), r.tolerance, r.pass ? "PASS" : "FAIL");
    s += buf;
  }
  return s;
}

namespace {

VerifyReport compute_report(const StateFile& file, const EntropyConfig& config,
                            const VerifyTolerances& tol) {
  const auto& psi = file.state;
  const auto& part = file.partition;
  VerifyReport rep;
  rep.raw_norm = file.raw_norm;
  rep.base = config.log_base;

  rep.gap = gap(psi, part, 1.0, config);
  rep.max_tmi = max_tmi(psi, part, config);

  // Independent route: explicit marginals through the core-state and
  // reflect modules.
  auto aap = join_sites({part.a, part.ap});
  std::sort(aap.begin(), aap.end());
  rep.s_aap = von_neumann(partial_trace(psi, aap), config);
  const auto ab = join_sites({part.a, part.b});
  const DensityMatrix rho_ab(psi.dims().select(ab), reduced_matrix(psi, ab));
  rep.s_r = reflected_entropy(rho_ab, static_cast<int>(psi.dims().total_of(part.a)),
                              static_cast<int>(psi.dims().total_of(part.b)), 1.0, config);
  rep.identity_residual = std::abs(rep.gap - (rep.s_aap - 0.5 * rep.s_r));

  const auto& e = file.expected;
  const auto row = [](std::string name, double value, std::optional<double> expected, double t) {
    const bool ok = expected ? std::abs(value - *expected) <= t : true;
    return VerifyRow{std::move(name), value, expected, t, ok};
  };
  rep.rows.push_back(row("S(AA')", rep.s_aap, e ? std::optional(e->s_aap) : std::nullopt, tol.entropy));
  rep.rows.push_back(row("S_R(A:B)", rep.s_r, e ? std::optional(e->s_r) : std::nullopt, tol.entropy));
  rep.rows.push_back(row("gap", rep.gap, e ? std::optional(e->gap) : std::nullopt, tol.gap));
  rep.rows.push_back(VerifyRow{"gap - (S(AA') - S_R/2)", rep.identity_residual, 0.0,
                               tol.identity, rep.identity_residual <= tol.identity});
  if (e) {
    const double printed = e->gap - (e->s_aap - 0.5 * e->s_r);
    rep.rows.push_back(VerifyRow{"expected-tuple identity", printed, 0.0, tol.printed_identity,
                                 std::abs(printed) <= tol.printed_identity});
  }
  rep.rows.push_back(VerifyRow{"Max(I3)", rep.max_tmi, std::nullopt, 0.0, true});
  return rep;
}

}  // namespace

VerifyReport verify_state(const StateFile& file, const VerifyTolerances& tol,
                          std::optional<LogBase> base) {
  if (base) {
    EntropyConfig fixed;
    fixed.log_base = *base;
    return compute_report(file, fixed, tol);
  }
  EntropyConfig nats;
  VerifyReport rep = compute_report(file, nats, tol);
  const bool identity_ok = rep.identity_residual <= tol.identity;
  if (file.expected && identity_ok && !rep.pass()) {
    EntropyConfig bits;
    bits.log_base = LogBase::two;
    VerifyReport alt = compute_report(file, bits, tol);
    alt.base_probed = true;
    if (alt.pass()) return alt;
  }
  return rep;
}

}  // namespace epgap
