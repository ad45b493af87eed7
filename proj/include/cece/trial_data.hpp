#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cece/parallel.hpp"

namespace cece {

enum class Arm : std::uint8_t { control = 0, vaccine = 1 };

constexpr std::size_t index_of(Arm a) noexcept { return static_cast<std::size_t>(a); }
constexpr Arm other(Arm a) noexcept { return a == Arm::control ? Arm::vaccine : Arm::control; }
inline constexpr std::array<Arm, 2> kArms{Arm::control, Arm::vaccine};

enum class AnalysisMode { binary_point, nonneg_point, time_to_event };

// Accepts the CLI spellings "point", "nonneg", "tte".
AnalysisMode parse_mode(std::string_view text);
std::string_view to_string(AnalysisMode mode) noexcept;

// Tuple of discrete covariate codes (L). Empty when no strata columns exist.
using StratumKey = std::vector<int>;
std::string format_stratum(const StratumKey& key);

struct SubjectRecord {
  std::string id;
  Arm arm = Arm::control;
  double outcome = 0.0;
  StratumKey strata;
  std::optional<int> exposure;
  std::optional<int> event_interval;
  std::optional<int> censor_interval;
  std::size_t source_line = 0;
};

struct SchemaFlags {
  bool exposure = false;
  std::size_t strata_columns = 0;
  bool event_interval = false;
  bool censor_interval = false;

  bool operator==(const SchemaFlags&) const = default;
};

struct TableOptions {
  AnalysisMode mode = AnalysisMode::binary_point;
  // K in time-to-event mode; inferred as the largest interval seen when unset.
  std::optional<int> interval_count;
  // Require outcome <= exposure when the exposure column is present.
  bool necessity_consistent = false;
  std::string source_name = "<input>";
};

// Validated, immutable subject-level trial data.
class SubjectTable {
 public:
  // Validates every record invariant; throws InputError naming the rule,
  // subject and source line on the first violation.
  static SubjectTable create(std::vector<SubjectRecord> records, SchemaFlags schema,
                             const TableOptions& options);

  std::span<const SubjectRecord> records() const noexcept { return records_; }
  std::size_t size() const noexcept { return records_.size(); }
  AnalysisMode mode() const noexcept { return mode_; }
  const SchemaFlags& schema() const noexcept { return schema_; }
  // 0 outside time-to-event mode.
  int interval_count() const noexcept { return interval_count_; }

  // Distinct stratum keys in ascending order and each record's index into them.
  const std::vector<StratumKey>& strata() const noexcept { return strata_; }
  std::span<const std::uint32_t> stratum_index() const noexcept { return stratum_index_; }

 private:
  SubjectTable() = default;

  std::vector<SubjectRecord> records_;
  AnalysisMode mode_ = AnalysisMode::binary_point;
  SchemaFlags schema_;
  int interval_count_ = 0;
  std::vector<StratumKey> strata_;
  std::vector<std::uint32_t> stratum_index_;
};

// CSV: header required, columns id, arm, y[, e][, l1..lm][, event_interval,
// censor_interval] in any order. Empty cell = absent optional value; lines
// starting with '#' are comments.
SubjectTable load_subject_table(std::istream& source, const TableOptions& options);
SubjectTable load_subject_table(const std::filesystem::path& path, TableOptions options);

// Writes the table in the same CSV schema; numbers use round-trip precision.
void write_subject_table(std::ostream& out, const SubjectTable& table);

// Per-arm moments of the outcome. `variance` is the n-denominator empirical
// variance, equal to p(1 - p) for a binary outcome.
struct ArmStats {
  std::size_t n = 0;
  double mean_outcome = 0.0;
  double variance = 0.0;
};

struct StratumSummary {
  StratumKey key;
  std::array<ArmStats, 2> arms{};
  double weight = 0.0;  // empirical P(L = l) over all subjects
};

struct ArmSummary {
  AnalysisMode mode = AnalysisMode::binary_point;
  std::array<ArmStats, 2> arms{};
  std::vector<StratumSummary> strata;  // empty when no strata columns

  const ArmStats& arm(Arm a) const noexcept { return arms[index_of(a)]; }
  double mean(Arm a) const noexcept { return arm(a).mean_outcome; }
  std::size_t total() const noexcept { return arms[0].n + arms[1].n; }
  bool has_strata() const noexcept { return !strata.empty(); }

  // Throws PreconditionError when the stratum is not present.
  const StratumSummary& stratum(const StratumKey& key) const;

  // Binary-outcome summary built from published arm risks and sizes.
  static ArmSummary from_aggregates(double mu1, std::size_t n1, double mu0, std::size_t n0);
};

// Pre: binary-point or nonneg-point mode. Throws PreconditionError when an arm
// has no subjects.
ArmSummary summarize_arms(const SubjectTable& table, Execution exec = Execution::parallel);

// Per arm, per interval k = 1..K. at_risk has K + 1 entries; at_risk[K] is
// the number still event-free and uncensored after interval K.
struct ArmEventCounts {
  std::vector<std::size_t> at_risk;
  std::vector<std::size_t> censored;
  std::vector<std::size_t> events;
};

struct DiscreteEventTable {
  int interval_count = 0;
  std::array<ArmEventCounts, 2> arms{};

  // 1-based interval accessors; k = K + 1 is valid for at_risk.
  std::size_t at_risk(Arm a, int k) const { return arms[index_of(a)].at_risk.at(static_cast<std::size_t>(k - 1)); }
  std::size_t censored(Arm a, int k) const { return arms[index_of(a)].censored.at(static_cast<std::size_t>(k - 1)); }
  std::size_t events(Arm a, int k) const { return arms[index_of(a)].events.at(static_cast<std::size_t>(k - 1)); }
};

// Within an interval the order is (C, E, Y): a subject censored in k leaves
// the risk set before events in k are counted. Subjects with neither event
// nor censoring stay at risk through K.
DiscreteEventTable build_event_table(const SubjectTable& table, Execution exec = Execution::parallel);

}  // namespace cece
