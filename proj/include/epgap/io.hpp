// File formats and report emission.
//
// State file (JSON):
//   {"dims": [...], "parties": {"A": [...], "B": [...], "Ap": [...], "Bp": [...]},
//    "amplitudes": [[re, im], ...]}
// with amplitudes in big-endian mixed-radix order (site 0 most significant).
// Optional "expected": {"S_AAp", "S_R", "gap"} and "note" are carried along.
//
// Shot log: JSON lines, one ShotRecord per line, ordered by (q_trained, seed).
// Sweep CSV: q,min_gap,state_id (q ascending). Curve CSV: state_id,q,gap.
// TMI CSV: seed,q_trained,gap,max_tmi.
// Report numbers use 12 significant digits; shot parameters use 17 so states
// rebuild bit for bit.

#pragma once

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "epgap/entropy.hpp"
#include "epgap/optimizer.hpp"

namespace epgap {

/// Malformed or inconsistent input. The CLI maps it to exit code 2.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Rejected before renormalization when |norm - 1| exceeds this.
inline constexpr double kStateNormSlack = 0.05;

struct ExpectedValues {
  double s_aap = 0.0;
  double s_r = 0.0;
  double gap = 0.0;
};

struct StateFile {
  QuditState state;  // renormalized
  PartitionSpec partition;
  double raw_norm = 1.0;
  std::optional<ExpectedValues> expected;
  std::string note;
};

StateFile parse_state_json(const std::string& text);
StateFile read_state_file(const std::filesystem::path& path);
std::string state_to_json(const QuditState& state, const PartitionSpec& partition);

/// printf("%.12g") formatting.
std::string format_number(double x);

std::string shot_to_json_line(const ShotRecord& record);
ShotRecord parse_shot_line(const std::string& line);

void write_shots_jsonl(std::vector<ShotRecord> records, const std::filesystem::path& path);
std::vector<ShotRecord> read_shots_jsonl(const std::filesystem::path& path);

void write_sweep_csv(std::vector<SweepRecord> records, const std::filesystem::path& path);
std::vector<SweepRecord> read_sweep_csv(const std::filesystem::path& path);

struct CurveRow {
  std::string state_id;
  double q = 0.0;
  double gap = 0.0;
};
void write_curve_csv(std::vector<CurveRow> rows, const std::filesystem::path& path);
std::vector<CurveRow> read_curve_csv(const std::filesystem::path& path);

struct TmiRow {
  std::uint64_t seed = 0;
  double q_trained = 0.0;
  double gap = 0.0;
  double max_tmi = 0.0;
};
void write_tmi_csv(std::vector<TmiRow> rows, const std::filesystem::path& path);
std::vector<TmiRow> read_tmi_csv(const std::filesystem::path& path);

struct RunManifest {
  std::string command;
  nlohmann::json config;
  std::string tool_version;
  std::string timestamp;  // UTC, ISO 8601
};

inline constexpr const char* kToolVersion = "1.0.0";

RunManifest make_manifest(std::string command, nlohmann::json config);
void write_manifest(const RunManifest& manifest, const std::filesystem::path& path);

/// "start:stop:step", inclusive of stop up to rounding. Values are computed as
/// start + k * step.
std::vector<double> parse_q_grid(const std::string& spec);
/// "3,3,2,2" or "[3,3,2,2]".
Dims parse_dims(const std::string& spec);

std::string log_base_name(LogBase base);

struct VerifyTolerances {
  double entropy = 0.02;
  double gap = 0.01;
  double identity = 1e-12;
  /// Allowed rounding mismatch when checking the expected tuple itself
  /// against gap = S(AA') - S_R/2 (three 5-decimal roundings).
  double printed_identity = 1.5e-5;
};

struct VerifyRow {
  std::string name;
  double value = 0.0;
  std::optional<double> expected;
  double tolerance = 0.0;
  bool pass = true;
};

struct VerifyReport {
  double raw_norm = 1.0;
  LogBase base = LogBase::natural;
  bool base_probed = false;
  double s_aap = 0.0;
  double s_r = 0.0;
  double gap = 0.0;
  double max_tmi = 0.0;
  double identity_residual = 0.0;
  std::vector<VerifyRow> rows;

  bool pass() const;
  std::string to_table() const;
};

/// Computes S(AA'), S_R(A:B) at q = 1, the gap, Max(I3) and the identity
/// residual. When expected values are present and fail in nats while the
/// identity holds, recomputes in bits and reports that base. A given base
/// disables the probe.
VerifyReport verify_state(const StateFile& file, const VerifyTolerances& tol = {},
                          std::optional<LogBase> base = std::nullopt);

}  // namespace epgap
