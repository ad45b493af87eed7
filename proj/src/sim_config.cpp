#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <sstream>

#include "cece/error.hpp"
#include "cece/simulator.hpp"

namespace cece {

namespace {

std::string trim(std::string s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

struct RawEntry {
  std::string value;
  std::size_t line = 0;
};

class RawConfig {
 public:
  RawConfig(std::map<std::string, RawEntry> entries, std::string source)
      : entries_(std::move(entries)), source_(std::move(source)) {}

  bool has(const std::string& key) const { return entries_.count(key) > 0; }

  std::string where(const std::string& key) const {
    const auto it = entries_.find(key);
    return it == entries_.end() ? source_ : source_ + ":" + std::to_string(it->second.line);
  }

  std::vector<double> list(const std::string& key) const {
    std::vector<double> out;
    std::stringstream ss(entries_.at(key).value);
    std::string item;
    while (std::getline(ss, item, ',')) {
      item = trim(item);
      char* end = nullptr;
      const double v = std::strtod(item.c_str(), &end);
      if (item.empty() || end != item.c_str() + item.size()) {
        throw InputError("config-value", "cannot parse number '" + item + "' for key '" + key + "'", where(key));
      }
      out.push_back(v);
    }
    if (out.empty()) throw InputError("config-value", "empty value for key '" + key + "'", where(key));
    return out;
  }

  double scalar(const std::string& key) const {
    const auto values = list(key);
    if (values.size() != 1) throw InputError("config-value", "key '" + key + "' takes a single value", where(key));
    return values.front();
  }

  std::uint64_t unsigned_integer(const std::string& key) const {
    const std::string& text = entries_.at(key).value;
    std::size_t used = 0;
    std::uint64_t v = 0;
    try {
      if (!text.empty() && text.front() == '-') throw std::invalid_argument("negative");
      v = std::stoull(text, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != text.size() || text.empty()) {
      throw InputError("config-value", "key '" + key + "' must be a non-negative integer", where(key));
    }
    return v;
  }

  bool boolean(const std::string& key) const {
    const std::string& text = entries_.at(key).value;
    if (text == "true" || text == "on" || text == "1") return true;
    if (text == "false" || text == "off" || text == "0") return false;
    throw InputError("config-value", "key '" + key + "' must be true or false", where(key));
  }

  // "<base>" sets both arms, "<base>.arm0"/"<base>.arm1" override one arm.
  std::array<std::vector<double>, 2> per_arm(const std::string& base, std::size_t width,
                                             const std::vector<double>& fallback) const {
    std::array<std::vector<double>, 2> out;
    for (std::size_t a = 0; a < 2; ++a) {
      const std::string arm_key = base + ".arm" + std::to_string(a);
      std::vector<double> raw;
      std::string used_key;
      if (has(arm_key)) {
        raw = list(arm_key);
        used_key = arm_key;
      } else if (has(base)) {
        raw = list(base);
        used_key = base;
      } else {
        raw = fallback;
      }
      if (raw.size() == 1) raw.assign(width, raw.front());
      if (raw.size() != width) {
        throw InputError("config-width",
                         "key '" + used_key + "' needs 1 or " + std::to_string(width) + " values, got " +
                             std::to_string(raw.size()),
                         where(used_key));
      }
      out[a] = std::move(raw);
    }
    return out;
  }

  const std::map<std::string, RawEntry>& entries() const { return entries_; }

 private:
  std::map<std::string, RawEntry> entries_;
  std::string source_;
};

const std::vector<std::string>& known_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> k{"n", "seed", "covariate_dist", "treat_prob", "necessity", "intervals"};
    for (const char* base : {"exposure_prob", "outcome_prob", "leak_prob", "exposure_hazard", "outcome_hazard",
                             "censor_hazard", "informative_censoring", "leak_hazard"}) {
      k.emplace_back(base);
      k.push_back(std::string(base) + ".arm0");
      k.push_back(std::string(base) + ".arm1");
    }
    return k;
  }();
  return keys;
}

void check_probabilities(const std::vector<double>& values, const std::string& key) {
  for (double v : values) {
    if (!(v >= 0.0 && v <= 1.0)) {
      throw InputError("config-probability", "invalid probability " + std::to_string(v) + " for '" + key + "'");
    }
  }
}

std::string join(const std::vector<double>& values) {
  std::string out;
  char buf[40];
  for (std::size_t i = 0; i < values.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g", values[i]);
    if (i) out += ", ";
    out += buf;
  }
  return out;
}

}  // namespace

bool SimulationConfig::no_effect_on_exposure() const {
  if (exposure_prob[0] != exposure_prob[1]) return false;
  if (longitudinal && longitudinal->exposure_hazard[0] != longitudinal->exposure_hazard[1]) return false;
  return true;
}

void SimulationConfig::validate() const {
  if (n == 0) throw InputError("config-n", "cohort size n must be at least 1");
  if (covariate_dist.empty()) throw InputError("config-width", "covariate_dist needs at least one stratum");
  check_probabilities(covariate_dist, "covariate_dist");
  double total = 0.0;
  for (double p : covariate_dist) total += p;
  if (std::abs(total - 1.0) > 1e-9) throw InputError("config-probability", "covariate_dist must sum to 1");
  check_probabilities({treat_prob}, "treat_prob");
  const std::size_t m = strata_count();
  for (std::size_t a = 0; a < 2; ++a) {
    const std::string arm = ".arm" + std::to_string(a);
    for (const auto& [values, key] : {std::pair{&exposure_prob[a], "exposure_prob"},
                                      std::pair{&outcome_prob[a], "outcome_prob"},
                                      std::pair{&leak_prob[a], "leak_prob"}}) {
      if (values->size() != m) throw InputError("config-width", std::string(key) + arm + " needs one value per stratum");
      check_probabilities(*values, key + arm);
    }
  }
  if (longitudinal) {
    const auto& lon = *longitudinal;
    if (lon.intervals < 1 || lon.intervals > 65535) throw InputError("config-intervals", "intervals must be in 1..65535");
    const auto K = static_cast<std::size_t>(lon.intervals);
    for (std::size_t a = 0; a < 2; ++a) {
      const std::string arm = ".arm" + std::to_string(a);
      for (const auto& [values, key] : {std::pair{&lon.exposure_hazard[a], "exposure_hazard"},
                                        std::pair{&lon.outcome_hazard[a], "outcome_hazard"},
                                        std::pair{&lon.censor_hazard[a], "censor_hazard"}}) {
        if (values->size() != K) throw InputError("config-width", std::string(key) + arm + " needs one value per interval");
        check_probabilities(*values, key + arm);
      }
      check_probabilities({lon.informative_censoring[a], lon.leak_hazard[a]}, "informative_censoring/leak_hazard" + arm);
    }
  }
}

SimulationConfig parse_simulation_config(std::istream& in, const std::string& source_name) {
  std::map<std::string, RawEntry> entries;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    const std::string where = source_name + ":" + std::to_string(line_no);
    if (eq == std::string::npos) throw InputError("config-syntax", "expected 'key = value'", where);
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const auto& keys = known_keys();
    if (std::find(keys.begin(), keys.end(), key) == keys.end()) {
      throw InputError("config-key", "unknown config key '" + key + "'", where);
    }
    if (!entries.emplace(key, RawEntry{value, line_no}).second) {
      throw InputError("config-key", "duplicate config key '" + key + "'", where);
    }
  }
  const RawConfig raw(std::move(entries), source_name);

  SimulationConfig c;
  if (raw.has("n")) c.n = raw.unsigned_integer("n");
  if (raw.has("seed")) c.seed = raw.unsigned_integer("seed");
  if (raw.has("covariate_dist")) c.covariate_dist = raw.list("covariate_dist");
  if (raw.has("treat_prob")) c.treat_prob = raw.scalar("treat_prob");
  if (raw.has("necessity")) c.necessity = raw.boolean("necessity");
  const std::size_t m = c.strata_count();
  c.exposure_prob = raw.per_arm("exposure_prob", m, {1.0});
  c.outcome_prob = raw.per_arm("outcome_prob", m, {0.0});
  c.leak_prob = raw.per_arm("leak_prob", m, {0.0});
  if (c.necessity) c.leak_prob = {std::vector<double>(m, 0.0), std::vector<double>(m, 0.0)};

  if (raw.has("intervals")) {
    LongitudinalConfig lon;
    const auto K = raw.unsigned_integer("intervals");
    if (K < 1 || K > 65535) throw InputError("config-intervals", "intervals must be in 1..65535", raw.where("intervals"));
    lon.intervals = static_cast<int>(K);
    lon.exposure_hazard = raw.per_arm("exposure_hazard", K, {0.0});
    lon.outcome_hazard = raw.per_arm("outcome_hazard", K, {0.0});
    lon.censor_hazard = raw.per_arm("censor_hazard", K, {0.0});
    const auto informative = raw.per_arm("informative_censoring", 1, {0.0});
    lon.informative_censoring = {informative[0][0], informative[1][0]};
    const auto leak = raw.per_arm("leak_hazard", 1, {0.0});
    lon.leak_hazard = c.necessity ? std::array<double, 2>{0.0, 0.0} : std::array<double, 2>{leak[0][0], leak[1][0]};
    c.longitudinal = std::move(lon);
  } else {
    for (const auto& [key, entry] : raw.entries()) {
      if (key.rfind("exposure_hazard", 0) == 0 || key.rfind("outcome_hazard", 0) == 0 ||
          key.rfind("censor_hazard", 0) == 0 || key.rfind("informative_censoring", 0) == 0 ||
          key.rfind("leak_hazard", 0) == 0) {
        throw InputError("config-key", "key '" + key + "' requires 'intervals'", raw.where(key));
      }
    }
  }
  c.validate();
  return c;
}

SimulationConfig load_simulation_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("unreadable-input", "cannot open config file", path.string());
  return parse_simulation_config(in, path.string());
}

std::string format_simulation_config(const SimulationConfig& c) {
  std::ostringstream out;
  char buf[40];
  out << "n = " << c.n << '\n';
  out << "seed = " << c.seed << '\n';
  out << "covariate_dist = " << join(c.covariate_dist) << '\n';
  std::snprintf(buf, sizeof buf, "%.17g", c.treat_prob);
  out << "treat_prob = " << buf << '\n';
  out << "necessity = " << (c.necessity ? "true" : "false") << '\n';
  for (std::size_t a = 0; a < 2; ++a) {
    out << "exposure_prob.arm" << a << " = " << join(c.exposure_prob[a]) << '\n';
    out << "outcome_prob.arm" << a << " = " << join(c.outcome_prob[a]) << '\n';
    out << "leak_prob.arm" << a << " = " << join(c.leak_prob[a]) << '\n';
  }
  if (c.longitudinal) {
    const auto& lon = *c.longitudinal;
    out << "intervals = " << lon.intervals << '\n';
    for (std::size_t a = 0; a < 2; ++a) {
      out << "exposure_hazard.arm" << a << " = " << join(lon.exposure_hazard[a]) << '\n';
      out << "outcome_hazard.arm" << a << " = " << join(lon.outcome_hazard[a]) << '\n';
      out << "censor_hazard.arm" << a << " = " << join(lon.censor_hazard[a]) << '\n';
      out << "informative_censoring.arm" << a << " = " << join({lon.informative_censoring[a]}) << '\n';
      out << "leak_hazard.arm" << a << " = " << join({lon.leak_hazard[a]}) << '\n';
    }
  }
  return out.str();
}

SimulationConfig default_simulation_config() {
  SimulationConfig c;
  c.n = 100000;
  c.seed = 20210611;
  c.covariate_dist = {0.5, 0.5};
  c.treat_prob = 0.5;
  c.exposure_prob = {std::vector<double>{0.5, 0.7}, std::vector<double>{0.5, 0.7}};
  c.outcome_prob = {std::vector<double>{0.05, 0.08}, std::vector<double>{0.015, 0.024}};
  c.leak_prob = {std::vector<double>(2, 0.0), std::vector<double>(2, 0.0)};
  c.necessity = true;
  LongitudinalConfig lon;
  lon.intervals = 10;
  lon.exposure_hazard = {std::vector<double>(10, 0.06), std::vector<double>(10, 0.06)};
  lon.outcome_hazard = {std::vector<double>(10, 0.05), std::vector<double>(10, 0.015)};
  lon.censor_hazard = {std::vector<double>(10, 0.01), std::vector<double>(10, 0.01)};
  c.longitudinal = lon;
  return c;
}

}  // namespace cece
