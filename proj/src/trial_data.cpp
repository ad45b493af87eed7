#include "cece/trial_data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include "cece/error.hpp"

namespace cece {

AnalysisMode parse_mode(std::string_view text) {
  if (text == "point" || text == "binary") return AnalysisMode::binary_point;
  if (text == "nonneg") return AnalysisMode::nonneg_point;
  if (text == "tte") return AnalysisMode::time_to_event;
  throw InputError("unknown-mode", "unknown analysis mode '" + std::string(text) + "' (expected point, nonneg or tte)");
}

std::string_view to_string(AnalysisMode mode) noexcept {
  switch (mode) {
    case AnalysisMode::binary_point: return "binary-point";
    case AnalysisMode::nonneg_point: return "nonneg-point";
    case AnalysisMode::time_to_event: return "time-to-event";
  }
  return "?";
}

std::string format_stratum(const StratumKey& key) {
  std::string out;
  for (std::size_t i = 0; i < key.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(key[i]);
  }
  return out;
}

namespace {

std::string locate(const std::string& source, std::size_t line) {
  return line == 0 ? source : source + ":" + std::to_string(line);
}

std::string subject_label(const SubjectRecord& r) { return "subject '" + r.id + "'"; }

void validate_record(const SubjectRecord& r, const TableOptions& opt) {
  const auto where = locate(opt.source_name, r.source_line);
  if (r.arm != Arm::control && r.arm != Arm::vaccine) {
    throw InputError("arm-range", "arm out of range for " + subject_label(r), where);
  }
  if (!std::isfinite(r.outcome) || r.outcome < 0.0) {
    throw InputError("outcome-range", "outcome must be a finite non-negative number for " + subject_label(r), where);
  }
  const bool binary_outcome = r.outcome == 0.0 || r.outcome == 1.0;
  if (opt.mode != AnalysisMode::nonneg_point && !binary_outcome) {
    throw InputError("outcome-binary", "outcome must be 0 or 1 in " + std::string(to_string(opt.mode)) +
                                           " mode for " + subject_label(r), where);
  }
  if (r.exposure && *r.exposure != 0 && *r.exposure != 1) {
    throw InputError("exposure-range", "exposure must be 0 or 1 for " + subject_label(r), where);
  }
  if (opt.necessity_consistent && r.exposure && opt.mode == AnalysisMode::binary_point &&
      r.outcome > static_cast<double>(*r.exposure)) {
    throw InputError("exposure-necessity", "outcome exceeds exposure in a necessity-consistent dataset for " +
                                               subject_label(r), where);
  }
  for (const auto* interval : {&r.event_interval, &r.censor_interval}) {
    if (*interval && **interval < 1) {
      throw InputError("interval-range", "interval index must be >= 1 for " + subject_label(r), where);
    }
  }
  if (opt.mode == AnalysisMode::time_to_event) {
    if (r.event_interval && r.censor_interval) {
      if (*r.censor_interval == *r.event_interval) {
        throw InputError("c-before-y",
                         "censored and event in the same interval for " + subject_label(r) +
                             "; censoring precedes the event within an interval (C, E, Y ordering)",
                         where);
      }
      if (*r.censor_interval < *r.event_interval) {
        throw InputError("c-before-y", "event recorded after censoring for " + subject_label(r), where);
      }
    }
    if ((r.outcome == 1.0) != r.event_interval.has_value()) {
      throw InputError("y-event-mismatch", "y must be 1 exactly when event_interval is present for " + subject_label(r),
                       where);
    }
  }
}

}  // namespace

SubjectTable SubjectTable::create(std::vector<SubjectRecord> records, SchemaFlags schema,
                                  const TableOptions& options) {
  if (records.empty()) throw InputError("empty-input", "empty input", options.source_name);

  SubjectTable table;
  table.mode_ = options.mode;
  table.schema_ = schema;

  for (const auto& r : records) {
    if (r.strata.size() != schema.strata_columns) {
      throw InputError("strata-width", "stratum tuple width does not match schema for " + subject_label(r),
                       locate(options.source_name, r.source_line));
    }
    validate_record(r, options);
  }

  if (options.mode == AnalysisMode::time_to_event) {
    int max_seen = 1;
    for (const auto& r : records) {
      max_seen = std::max({max_seen, r.event_interval.value_or(1), r.censor_interval.value_or(1)});
    }
    if (options.interval_count) {
      if (*options.interval_count < 1) {
        throw InputError("interval-count", "interval count K must be >= 1", options.source_name);
      }
      table.interval_count_ = *options.interval_count;
      for (const auto& r : records) {
        if (r.event_interval.value_or(0) > table.interval_count_ ||
            r.censor_interval.value_or(0) > table.interval_count_) {
          throw InputError("interval-range", "interval index exceeds K = " + std::to_string(table.interval_count_) +
                                                 " for " + subject_label(r),
                           locate(options.source_name, r.source_line));
        }
      }
    } else {
      table.interval_count_ = max_seen;
    }
  }

  std::map<StratumKey, std::uint32_t> codes;
  for (const auto& r : records) codes.emplace(r.strata, 0);
  std::uint32_t next = 0;
  for (auto& [key, code] : codes) {
    code = next++;
    table.strata_.push_back(key);
  }
  table.stratum_index_.reserve(records.size());
  for (const auto& r : records) table.stratum_index_.push_back(codes.at(r.strata));

  table.records_ = std::move(records);
  return table;
}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    fields.push_back(trim(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return fields;
}

template <class T>
std::optional<T> parse_number(std::string_view text) {
  T value{};
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc{} || ptr != end) return std::nullopt;
  return value;
}

enum class Column { id, arm, y, e, stratum, event_interval, censor_interval };

struct ColumnSpec {
  Column kind;
  std::size_t stratum_position = 0;  // 0-based, for l1..lm
};

// Lines starting with '#' carry provenance (run id, manifest) and are skipped.
bool is_blank_or_comment(std::string_view line) {
  const auto t = trim(line);
  return t.empty() || t.front() == '#';
}

}  // namespace

SubjectTable load_subject_table(std::istream& source, const TableOptions& options) {
  const std::string& name = options.source_name;
  std::string line;
  std::size_t line_no = 0;

  bool have_header = false;
  while (std::getline(source, line)) {
    ++line_no;
    if (is_blank_or_comment(line)) continue;
    have_header = true;
    break;
  }
  if (!have_header) throw InputError("empty-input", "empty input", name);

  std::vector<ColumnSpec> columns;
  SchemaFlags schema;
  std::map<std::size_t, std::size_t> stratum_numbers;  // l-number -> column
  bool seen[7] = {};
  const auto header = split_fields(line);
  for (std::size_t c = 0; c < header.size(); ++c) {
    const std::string_view h = header[c];
    ColumnSpec spec{Column::id};
    if (h == "id") spec.kind = Column::id;
    else if (h == "arm") spec.kind = Column::arm;
    else if (h == "y") spec.kind = Column::y;
    else if (h == "e") spec.kind = Column::e;
    else if (h == "event_interval") spec.kind = Column::event_interval;
    else if (h == "censor_interval") spec.kind = Column::censor_interval;
    else if (h.size() > 1 && h[0] == 'l' && parse_number<std::size_t>(h.substr(1)).value_or(0) >= 1) {
      const std::size_t number = *parse_number<std::size_t>(h.substr(1));
      if (!stratum_numbers.emplace(number, c).second) {
        throw InputError("duplicate-column", "duplicate column '" + std::string(h) + "'", locate(name, line_no));
      }
      spec.kind = Column::stratum;
    } else {
      throw InputError("unknown-column", "unknown column '" + std::string(h) + "'", locate(name, line_no));
    }
    if (spec.kind != Column::stratum) {
      auto& flag = seen[static_cast<int>(spec.kind)];
      if (flag) throw InputError("duplicate-column", "duplicate column '" + std::string(h) + "'", locate(name, line_no));
      flag = true;
    }
    columns.push_back(spec);
  }
  for (auto [kind, label] : {std::pair{Column::id, "id"}, std::pair{Column::arm, "arm"}, std::pair{Column::y, "y"}}) {
    if (!seen[static_cast<int>(kind)]) {
      throw InputError("missing-column", std::string("missing required column '") + label + "'", locate(name, line_no));
    }
  }
  if (options.mode == AnalysisMode::time_to_event && !seen[static_cast<int>(Column::event_interval)]) {
    throw InputError("missing-column", "time-to-event mode requires an 'event_interval' column", locate(name, line_no));
  }
  std::size_t position = 0;
  for (const auto& [number, column] : stratum_numbers) {
    if (number != position + 1) {
      throw InputError("strata-columns", "stratum columns must be l1..lm without gaps", locate(name, line_no));
    }
    columns[column].stratum_position = position++;
  }
  schema.strata_columns = stratum_numbers.size();
  schema.exposure = seen[static_cast<int>(Column::e)];
  schema.event_interval = seen[static_cast<int>(Column::event_interval)];
  schema.censor_interval = seen[static_cast<int>(Column::censor_interval)];

  std::vector<SubjectRecord> records;
  while (std::getline(source, line)) {
    ++line_no;
    if (is_blank_or_comment(line)) continue;
    const auto where = locate(name, line_no);
    const auto fields = split_fields(line);
    if (fields.size() != columns.size()) {
      throw InputError("malformed-row", "malformed row: expected " + std::to_string(columns.size()) +
                                            " fields, found " + std::to_string(fields.size()),
                       where);
    }
    SubjectRecord r;
    r.source_line = line_no;
    r.strata.assign(schema.strata_columns, 0);
    bool have_outcome = false;
    for (std::size_t c = 0; c < fields.size(); ++c) {
      const std::string_view f = fields[c];
      auto bad = [&](const char* what) {
        return InputError("malformed-row", "malformed row: cannot parse " + std::string(what) + " '" +
                                               std::string(f) + "'", where);
      };
      switch (columns[c].kind) {
        case Column::id:
          r.id = std::string(f);
          break;
        case Column::arm: {
          const auto v = parse_number<long>(f);
          if (!v) throw bad("arm");
          if (*v != 0 && *v != 1) throw InputError("arm-range", "arm out of range (" + std::string(f) + ")", where);
          r.arm = static_cast<Arm>(*v);
          break;
        }
        case Column::y: {
          if (f.empty()) throw InputError("missing-outcome", "missing outcome", where);
          const auto v = parse_number<double>(f);
          if (!v) throw bad("outcome");
          r.outcome = *v;
          have_outcome = true;
          break;
        }
        case Column::e: {
          if (f.empty()) break;
          const auto v = parse_number<int>(f);
          if (!v) throw bad("exposure");
          r.exposure = *v;
          break;
        }
        case Column::stratum: {
          const auto v = parse_number<int>(f);
          if (!v) throw bad("stratum code");
          r.strata[columns[c].stratum_position] = *v;
          break;
        }
        case Column::event_interval:
        case Column::censor_interval: {
          if (f.empty()) break;
          const auto v = parse_number<int>(f);
          if (!v) throw bad("interval");
          (columns[c].kind == Column::event_interval ? r.event_interval : r.censor_interval) = *v;
          break;
        }
      }
    }
    if (!have_outcome) throw InputError("missing-outcome", "missing outcome", where);
    records.push_back(std::move(r));
  }
  if (records.empty()) throw InputError("empty-input", "empty input", name);
  return SubjectTable::create(std::move(records), schema, options);
}

SubjectTable load_subject_table(const std::filesystem::path& path, TableOptions options) {
  std::ifstream in(path);
  if (!in) throw InputError("unreadable-input", "cannot open input file", path.string());
  if (options.source_name == "<input>") options.source_name = path.string();
  return load_subject_table(in, options);
}

void write_subject_table(std::ostream& out, const SubjectTable& table) {
  const auto& schema = table.schema();
  out << "id,arm,y";
  if (schema.exposure) out << ",e";
  for (std::size_t j = 0; j < schema.strata_columns; ++j) out << ",l" << j + 1;
  if (schema.event_interval) out << ",event_interval";
  if (schema.censor_interval) out << ",censor_interval";
  out << '\n';

  std::ostringstream row;
  row << std::setprecision(17);
  for (const auto& r : table.records()) {
    row.str({});
    row << r.id << ',' << index_of(r.arm) << ',' << r.outcome;
    if (schema.exposure) {
      row << ',';
      if (r.exposure) row << *r.exposure;
    }
    for (int code : r.strata) row << ',' << code;
    if (schema.event_interval) {
      row << ',';
      if (r.event_interval) row << *r.event_interval;
    }
    if (schema.censor_interval) {
      row << ',';
      if (r.censor_interval) row << *r.censor_interval;
    }
    out << row.str() << '\n';
  }
}

const StratumSummary& ArmSummary::stratum(const StratumKey& key) const {
  for (const auto& s : strata) {
    if (s.key == key) return s;
  }
  throw PreconditionError("stratum-missing", "stratum (" + format_stratum(key) + ") not present in the data");
}

ArmSummary ArmSummary::from_aggregates(double mu1, std::size_t n1, double mu0, std::size_t n0) {
  for (double mu : {mu1, mu0}) {
    if (!(mu >= 0.0 && mu <= 1.0)) throw InputError("outcome-range", "aggregate arm risks must lie in [0, 1]");
  }
  if (n1 == 0 || n0 == 0) {
    throw PreconditionError("positivity", n0 == 0 ? "positivity violated: no control subjects"
                                                  : "positivity violated: no vaccine subjects");
  }
  ArmSummary s;
  s.mode = AnalysisMode::binary_point;
  s.arms[index_of(Arm::vaccine)] = {n1, mu1, mu1 * (1.0 - mu1)};
  s.arms[index_of(Arm::control)] = {n0, mu0, mu0 * (1.0 - mu0)};
  return s;
}

namespace {

// Cell layout: cell = 2 * stratum + arm.
struct MomentAcc {
  std::vector<std::size_t> count;
  std::vector<double> sum;
};

}  // namespace

ArmSummary summarize_arms(const SubjectTable& table, Execution exec) {
  if (table.mode() == AnalysisMode::time_to_event) {
    throw PreconditionError("mode", "arm summaries require binary-point or nonneg-point mode");
  }
  const auto records = table.records();
  const auto stratum_of = table.stratum_index();
  const std::size_t cells = 2 * table.strata().size();
  const std::size_t n = records.size();

  const MomentAcc init{std::vector<std::size_t>(cells + 2, 0), std::vector<double>(cells + 2, 0.0)};
  auto merge = [](MomentAcc& into, const MomentAcc& p) {
    for (std::size_t c = 0; c < into.count.size(); ++c) {
      into.count[c] += p.count[c];
      into.sum[c] += p.sum[c];
    }
  };
  // Slots [0, cells) are stratum-arm cells; cells + arm is the arm total.
  const auto first = detail::blocked_reduce(
      n, init,
      [&](std::size_t begin, std::size_t end, MomentAcc& acc) {
        for (std::size_t i = begin; i < end; ++i) {
          const std::size_t arm = index_of(records[i].arm);
          const std::size_t cell = 2 * stratum_of[i] + arm;
          acc.count[cell] += 1;
          acc.sum[cell] += records[i].outcome;
          acc.count[cells + arm] += 1;
          acc.sum[cells + arm] += records[i].outcome;
        }
      },
      merge, exec);

  for (Arm a : kArms) {
    if (first.count[cells + index_of(a)] == 0) {
      throw PreconditionError("positivity", a == Arm::control ? "positivity violated: no control subjects"
                                                              : "positivity violated: no vaccine subjects");
    }
  }

  std::vector<double> mean(cells + 2, 0.0);
  for (std::size_t c = 0; c < mean.size(); ++c) {
    if (first.count[c] > 0) mean[c] = first.sum[c] / static_cast<double>(first.count[c]);
  }

  std::vector<double> variance(cells + 2, 0.0);
  if (table.mode() == AnalysisMode::binary_point) {
    for (std::size_t c = 0; c < mean.size(); ++c) variance[c] = mean[c] * (1.0 - mean[c]);
  } else {
    const auto second = detail::blocked_reduce(
        n, init,
        [&](std::size_t begin, std::size_t end, MomentAcc& acc) {
          for (std::size_t i = begin; i < end; ++i) {
            const std::size_t arm = index_of(records[i].arm);
            const std::size_t cell = 2 * stratum_of[i] + arm;
            const double dc = records[i].outcome - mean[cell];
            const double da = records[i].outcome - mean[cells + arm];
            acc.sum[cell] += dc * dc;
            acc.sum[cells + arm] += da * da;
          }
        },
        merge, exec);
    for (std::size_t c = 0; c < mean.size(); ++c) {
      if (first.count[c] > 0) variance[c] = second.sum[c] / static_cast<double>(first.count[c]);
    }
  }

  ArmSummary summary;
  summary.mode = table.mode();
  for (Arm a : kArms) {
    const std::size_t slot = cells + index_of(a);
    summary.arms[index_of(a)] = {first.count[slot], mean[slot], variance[slot]};
  }
  if (table.schema().strata_columns > 0) {
    for (std::size_t s = 0; s < table.strata().size(); ++s) {
      StratumSummary st;
      st.key = table.strata()[s];
      std::size_t stratum_n = 0;
      for (Arm a : kArms) {
        const std::size_t cell = 2 * s + index_of(a);
        st.arms[index_of(a)] = {first.count[cell], mean[cell], variance[cell]};
        stratum_n += first.count[cell];
      }
      st.weight = static_cast<double>(stratum_n) / static_cast<double>(n);
      summary.strata.push_back(std::move(st));
    }
  }
  return summary;
}

namespace {

struct EventAcc {
  // Layout: [arm][kind][k], kind 0 = censored, 1 = events; plus arm totals.
  std::vector<std::size_t> counts;
  std::array<std::size_t, 2> n{};
};

}  // namespace

DiscreteEventTable build_event_table(const SubjectTable& table, Execution exec) {
  if (table.mode() != AnalysisMode::time_to_event) {
    throw PreconditionError("mode", "event tables require time-to-event mode");
  }
  const int K = table.interval_count();
  const std::size_t width = static_cast<std::size_t>(K);
  const auto records = table.records();

  for (const auto& r : records) {
    for (const auto& interval : {r.event_interval, r.censor_interval}) {
      if (interval && (*interval < 1 || *interval > K)) {
        throw InputError("interval-range", "interval index outside 1.." + std::to_string(K) + " for subject '" + r.id + "'");
      }
    }
  }

  const EventAcc init{std::vector<std::size_t>(4 * width, 0), {}};
  const auto acc = detail::blocked_reduce(
      records.size(), init,
      [&](std::size_t begin, std::size_t end, EventAcc& a) {
        for (std::size_t i = begin; i < end; ++i) {
          const auto& r = records[i];
          const std::size_t arm = index_of(r.arm);
          a.n[arm] += 1;
          if (r.event_interval && (!r.censor_interval || *r.event_interval < *r.censor_interval)) {
            a.counts[(2 * arm + 1) * width + static_cast<std::size_t>(*r.event_interval - 1)] += 1;
          } else if (r.censor_interval) {
            a.counts[(2 * arm) * width + static_cast<std::size_t>(*r.censor_interval - 1)] += 1;
          }
        }
      },
      [](EventAcc& into, const EventAcc& p) {
        for (std::size_t c = 0; c < into.counts.size(); ++c) into.counts[c] += p.counts[c];
        into.n[0] += p.n[0];
        into.n[1] += p.n[1];
      },
      exec);

  DiscreteEventTable out;
  out.interval_count = K;
  for (std::size_t arm = 0; arm < 2; ++arm) {
    auto& counts = out.arms[arm];
    counts.censored.assign(acc.counts.begin() + static_cast<std::ptrdiff_t>((2 * arm) * width),
                           acc.counts.begin() + static_cast<std::ptrdiff_t>((2 * arm + 1) * width));
    counts.events.assign(acc.counts.begin() + static_cast<std::ptrdiff_t>((2 * arm + 1) * width),
                         acc.counts.begin() + static_cast<std::ptrdiff_t>((2 * arm + 2) * width));
    counts.at_risk.resize(width + 1);
    counts.at_risk[0] = acc.n[arm];
    for (std::size_t k = 0; k < width; ++k) {
      counts.at_risk[k + 1] = counts.at_risk[k] - counts.censored[k] - counts.events[k];
    }
  }
  return out;
}

}  // namespace cece
