#pragma once

// Experiment orchestration: configuration, mode dispatch and CSV/JSON reports.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "omega/errors.hpp"
#include "omega/heuristic.hpp"
#include "omega/pairing_space.hpp"
#include "omega/submodules.hpp"

#ifndef OMEGA_VERSION
#define OMEGA_VERSION "0.1.0"
#endif

namespace omega {

inline constexpr std::string_view kVersion = OMEGA_VERSION;
inline constexpr std::uint64_t kMaxTrials = 1'000'000'000;
/// Generator census in count mode walks all of Omega_n^2 up to this size.
inline constexpr std::uint64_t kMaxGeneratorCensus = 1'000'000;

enum class Mode { count, exhaustive, montecarlo, tower, isotropic };
enum class OutputFormat { csv, json, both };

[[nodiscard]] inline std::string to_string(Mode m) {
  switch (m) {
    case Mode::count: return "count";
    case Mode::exhaustive: return "exhaustive";
    case Mode::montecarlo: return "montecarlo";
    case Mode::tower: return "tower";
    case Mode::isotropic: return "isotropic";
  }
  return "unknown";
}

[[nodiscard]] inline std::string to_string(OutputFormat f) {
  switch (f) {
    case OutputFormat::csv: return "csv";
    case OutputFormat::json: return "json";
    case OutputFormat::both: return "both";
  }
  return "unknown";
}

struct ExperimentConfig {
  Mode mode = Mode::count;
  unsigned prime = 3;
  std::vector<int> levels;
  std::optional<std::uint64_t> trials;
  std::uint64_t seed = 0;
  std::vector<int> shape;  ///< torsion levels, isotropic mode
  std::string output = "omega_report";
  OutputFormat format = OutputFormat::csv;
  unsigned threads = 0;  ///< 0 = hardware concurrency; never affects results
  bool timing = false;   ///< also write runtime_ms into the CSV

  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

// ---------------------------------------------------------------------------
// Configuration parsing

using ConfigMap = std::map<std::string, std::string>;

inline const std::set<std::string>& config_keys() {
  static const std::set<std::string> keys{"mode", "prime", "levels", "trials", "seed", "shape",
                                          "output", "format", "threads", "timing"};
  return keys;
}

namespace detail {

inline std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(first, last - first + 1));
}

inline std::uint64_t parse_unsigned(const std::string& field, const std::string& text) {
  const auto t = trim(text);
  if (t.empty() || t.find_first_not_of("0123456789") != std::string::npos) {
    throw usage_error(field + ": expected a non-negative integer, got '" + text + "'");
  }
  try {
    return std::stoull(t);
  } catch (const std::out_of_range&) {
    throw usage_error(field + ": value out of range: '" + text + "'");
  }
}

inline std::vector<int> parse_int_list(const std::string& field, const std::string& text) {
  std::vector<int> out;
  if (trim(text).empty()) return out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto v = parse_unsigned(field, item);
    if (v > 1'000'000) throw usage_error(field + ": entry out of range: '" + item + "'");
    out.push_back(static_cast<int>(v));
  }
  return out;
}

inline bool parse_bool(const std::string& field, const std::string& text) {
  const auto t = trim(text);
  if (t == "1" || t == "true" || t == "yes" || t == "on") return true;
  if (t == "0" || t == "false" || t == "no" || t == "off") return false;
  throw usage_error(field + ": expected a boolean, got '" + text + "'");
}

}  // namespace detail

/// Reads `key = value` lines; blank lines and lines starting with '#' are ignored.
[[nodiscard]] inline ConfigMap read_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw usage_error("config: cannot read '" + path.string() + "'");
  ConfigMap out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto t = detail::trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw usage_error("config: line " + std::to_string(line_no) + " is not of the form key=value");
    }
    auto key = detail::trim(std::string_view(t).substr(0, eq));
    if (!config_keys().contains(key)) throw usage_error("config: unknown key '" + key + "'");
    out[key] = detail::trim(std::string_view(t).substr(eq + 1));
  }
  return out;
}

/// Checks every field and every resource bound before any computation runs.
inline void validate(const ExperimentConfig& c) {
  std::optional<PrimeParam> p;
  try {
    p.emplace(c.prime);
  } catch (const precondition_error& e) {
    throw usage_error(std::string("prime: ") + e.what());
  }
  if (c.levels.empty()) throw usage_error("levels: at least one level is required");
  if (c.threads > 1024) throw usage_error("threads: at most 1024 worker threads");

  const bool needs_trials = c.mode == Mode::montecarlo || c.mode == Mode::tower;
  if (needs_trials) {
    if (!c.trials) throw usage_error("trials: required for " + to_string(c.mode) + " mode");
    if (*c.trials == 0) throw usage_error("trials: must be at least 1");
    if (*c.trials > kMaxTrials) throw resource_error("trials: exceeds the bound of 10^9 trials");
  }
  if (c.mode != Mode::isotropic && !c.shape.empty()) throw usage_error("shape: only used in isotropic mode");

  for (int n : c.levels) {
    if (n < 1) throw usage_error("levels: every level must be positive");
    if (c.mode == Mode::isotropic) {
      try {
        const SpaceShape shape(*p, n, c.shape);
        if (shape.dimension() > kMaxIsotropicEnumerationDimension) {
          throw resource_error("levels/shape: space dimension " + std::to_string(shape.dimension()) +
                               " exceeds the isotropic enumeration bound " +
                               std::to_string(kMaxIsotropicEnumerationDimension));
        }
      } catch (const precondition_error& e) {
        throw usage_error(std::string("levels/shape: ") + e.what());
      }
      continue;
    }
    if (n > kMaxModuleLevel) {
      throw resource_error("levels: level " + std::to_string(n) + " exceeds the module level bound " +
                           std::to_string(kMaxModuleLevel));
    }
    try {
      (void)probability_model(*p, n);
      if (c.mode == Mode::count) (void)count_maximal_generators(*p, n);
    } catch (const resource_error& e) {
      throw resource_error("levels: level " + std::to_string(n) + ": " + e.what());
    }
  }
}

/// Builds a configuration from key/value pairs and validates it.
[[nodiscard]] inline ExperimentConfig config_from_map(const ConfigMap& values) {
  ExperimentConfig c;
  for (const auto& [key, value] : values) {
    if (!config_keys().contains(key)) throw usage_error("unknown field '" + key + "'");
  }
  auto get = [&](const std::string& key) -> std::optional<std::string> {
    auto it = values.find(key);
    if (it == values.end()) return std::nullopt;
    return it->second;
  };

  const auto mode = get("mode");
  if (!mode) throw usage_error("mode: required (count, exhaustive, montecarlo, tower, isotropic)");
  static const std::map<std::string, Mode> modes{{"count", Mode::count},
                                                 {"exhaustive", Mode::exhaustive},
                                                 {"montecarlo", Mode::montecarlo},
                                                 {"tower", Mode::tower},
                                                 {"isotropic", Mode::isotropic}};
  if (auto it = modes.find(detail::trim(*mode)); it != modes.end()) {
    c.mode = it->second;
  } else {
    throw usage_error("mode: unknown mode '" + *mode + "'");
  }

  if (auto v = get("prime")) {
    const auto prime = detail::parse_unsigned("prime", *v);
    if (prime > 1'000'000) throw usage_error("prime: out of range");
    c.prime = static_cast<unsigned>(prime);
  }
  if (auto v = get("levels")) c.levels = detail::parse_int_list("levels", *v);
  if (auto v = get("trials")) c.trials = detail::parse_unsigned("trials", *v);
  if (auto v = get("seed")) c.seed = detail::parse_unsigned("seed", *v);
  if (auto v = get("shape")) c.shape = detail::parse_int_list("shape", *v);
  if (auto v = get("output")) {
    if (detail::trim(*v).empty()) throw usage_error("output: path prefix must not be empty");
    c.output = detail::trim(*v);
  }
  if (auto v = get("format")) {
    const auto f = detail::trim(*v);
    if (f == "csv") {
      c.format = OutputFormat::csv;
    } else if (f == "json") {
      c.format = OutputFormat::json;
    } else if (f == "both") {
      c.format = OutputFormat::both;
    } else {
      throw usage_error("format: expected csv, json or both, got '" + *v + "'");
    }
  }
  if (auto v = get("threads")) {
    const auto t = detail::parse_unsigned("threads", *v);
    if (t > 1024) throw usage_error("threads: at most 1024 worker threads");
    c.threads = static_cast<unsigned>(t);
  }
  if (auto v = get("timing")) c.timing = detail::parse_bool("timing", *v);

  validate(c);
  return c;
}

// ---------------------------------------------------------------------------
// Reports

struct ReportRow {
  std::string mode;
  unsigned p = 0;
  int n = 0;
  std::uint64_t exact_num = 0;
  std::uint64_t exact_den = 1;
  std::string exact_decimal;
  std::optional<double> empirical;
  std::optional<double> standard_error;
  std::optional<std::uint64_t> trials;
  std::optional<std::uint64_t> seed;
  std::optional<double> runtime_ms;
  std::string extra;  ///< ';'-separated key=value diagnostics

  friend bool operator==(const ReportRow&, const ReportRow&) = default;
};

struct ExperimentReport {
  ExperimentConfig config;
  std::vector<ReportRow> rows;
  std::string version{kVersion};
  std::string timestamp;  ///< UTC ISO-8601
  std::string rng = "splitmix64; trial t draws from streams (seed, t, 0) and (seed, t, 1)";

  friend bool operator==(const ExperimentReport&, const ExperimentReport&) = default;
};

/// num/den to 12 significant digits with round-half-even, laid out like printf("%.12g").
[[nodiscard]] inline std::string exact_decimal(std::uint64_t num, std::uint64_t den, int significant = 12) {
  if (den == 0) throw precondition_error("zero denominator");
  if (num == 0) return "0";
  using u128 = unsigned __int128;

  std::string digits;
  int exponent = 0;
  u128 remainder = 0;
  std::uint64_t integer = num / den;
  remainder = num % den;
  std::string int_digits = integer > 0 ? std::to_string(integer) : std::string{};
  if (!int_digits.empty()) {
    exponent = static_cast<int>(int_digits.size()) - 1;
  } else {
    exponent = -1;
    while (remainder * 10 < den) {
      remainder *= 10;
      --exponent;
    }
  }
  // Digit stream: integer digits first, then the fraction.
  std::size_t int_pos = 0;
  auto next_digit = [&]() -> int {
    if (int_pos < int_digits.size()) return int_digits[int_pos++] - '0';
    remainder *= 10;
    const int d = static_cast<int>(remainder / den);
    remainder %= den;
    return d;
  };
  for (int i = 0; i < significant; ++i) digits.push_back(static_cast<char>('0' + next_digit()));
  const int round_digit = next_digit();
  bool sticky = remainder != 0;
  for (std::size_t i = int_pos; i < int_digits.size(); ++i) sticky = sticky || int_digits[i] != '0';

  const bool odd = (digits.back() - '0') % 2 == 1;
  if (round_digit > 5 || (round_digit == 5 && (sticky || odd))) {
    int i = significant - 1;
    while (i >= 0 && digits[static_cast<std::size_t>(i)] == '9') digits[static_cast<std::size_t>(i--)] = '0';
    if (i < 0) {
      digits.insert(digits.begin(), '1');
      digits.pop_back();
      ++exponent;
    } else {
      ++digits[static_cast<std::size_t>(i)];
    }
  }

  auto trim_zeros = [](std::string s) {
    if (s.find('.') == std::string::npos) return s;
    while (s.back() == '0') s.pop_back();
    if (s.back() == '.') s.pop_back();
    return s;
  };

  if (exponent < -4 || exponent >= significant) {
    std::string mantissa = digits.substr(0, 1) + "." + digits.substr(1);
    char buf[16];
    std::snprintf(buf, sizeof buf, "e%c%02d", exponent < 0 ? '-' : '+', std::abs(exponent));
    return trim_zeros(mantissa) + buf;
  }
  if (exponent < 0) return trim_zeros("0." + std::string(static_cast<std::size_t>(-exponent - 1), '0') + digits);
  const auto point = static_cast<std::size_t>(exponent) + 1;
  return trim_zeros(digits.substr(0, point) + "." + digits.substr(point));
}

[[nodiscard]] inline std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

namespace detail {

inline std::string rational_text(const Rational& r) {
  return std::to_string(r.numerator()) + "/" + std::to_string(r.denominator());
}

inline std::string histogram_text(const std::vector<std::uint64_t>& h, std::size_t first = 0) {
  std::string s;
  for (std::size_t i = first; i < h.size(); ++i) {
    if (!s.empty()) s += '|';
    s += std::to_string(i) + ":" + std::to_string(h[i]);
  }
  return s;
}

inline void set_exact(ReportRow& row, std::uint64_t num, std::uint64_t den) {
  row.exact_num = num;
  row.exact_den = den;
  row.exact_decimal = exact_decimal(num, den);
}

inline void set_exact(ReportRow& row, const Rational& r) {
  set_exact(row, static_cast<std::uint64_t>(r.numerator()), static_cast<std::uint64_t>(r.denominator()));
}

inline double elapsed_ms(std::chrono::steady_clock::time_point start) {
  const auto us = std::chrono::duration_cast<std::chrono::microseconds>(std::chrono::steady_clock::now() - start).count();
  return static_cast<double>(us) / 1000.0;
}

inline std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

inline ReportRow count_row(PrimeParam p, int n) {
  ReportRow row;
  const std::uint64_t count = count_maximal(p, n);
  set_exact(row, count, 1);

  std::set<std::pair<FormType, std::vector<residue>>> distinct;
  std::uint64_t enumerated = 0;
  for (const auto& m : enumerate_maximal(p, n)) {
    ++enumerated;
    distinct.emplace(m.type(), std::vector<residue>(m.parameter().coeffs().begin(), m.parameter().coeffs().end()));
  }

  std::ostringstream extra;
  extra << "type_a=" << detail::checked_pow(p.value(), n, "count") << ";type_b="
        << detail::checked_pow(p.value(), n - 1, "count") << ";enumerated=" << enumerated
        << ";distinct=" << distinct.size() << ";generators=" << count_maximal_generators(p, n);

  const std::uint64_t ambient = detail::checked_pow(p.value(), 2 * n, "generator census");
  if (ambient <= kMaxGeneratorCensus) {
    std::uint64_t generators = 0;
    std::set<std::uint64_t> modules;
    std::vector<residue> coords(static_cast<std::size_t>(2 * n), 0);
    for (std::uint64_t k = 0; k < ambient; ++k) {
      std::uint64_t digits = k;
      for (auto& c : coords) {
        c = static_cast<residue>(digits % p.value());
        digits /= p.value();
      }
      const auto v = ModuleVector::unflatten(p, n, coords);
      if (!is_maximal(v)) continue;
      ++generators;
      modules.insert(index_of(canonical_form(v)));
    }
    extra << ";census_generators=" << generators << ";census_modules=" << modules.size();
  } else {
    extra << ";census=skipped";
  }
  row.extra = extra.str();
  return row;
}

inline ReportRow exhaustive_row(PrimeParam p, int n) {
  ReportRow row;
  const auto check = collision_check(p, n);
  set_exact(row, check.closed_form);
  const auto model = probability_model(p, n);
  std::ostringstream extra;
  extra << "cross_check=" << to_string(check.status);
  if (check.enumerated) extra << ";enumerated=" << rational_text(*check.enumerated);
  extra << ";bound=" << rational_text(intersection_bound(p, n)) << ";modules=" << model.collision_pairs
        << ";pairs=" << model.total_pairs;
  row.extra = extra.str();
  return row;
}

inline ReportRow montecarlo_row(PrimeParam p, int n, std::uint64_t trials, RngSpec rng, unsigned threads) {
  ReportRow row;
  const auto mc = monte_carlo(p, n, trials, rng, threads);
  set_exact(row, mc.exact);
  row.empirical = mc.empirical;
  row.standard_error = mc.standard_error;
  row.trials = trials;
  row.seed = rng.seed;
  const auto law = intersection_exponent_distribution(p, n);
  Rational nontrivial(0);
  for (std::size_t k = 1; k < law.size(); ++k) nontrivial += law[k];
  std::ostringstream extra;
  extra << "collisions=" << mc.counts.collisions << ";delta=" << format_double(mc.delta())
        << ";within_4se=" << (mc.within_standard_errors(4.0) ? "true" : "false")
        << ";p_v_ge_1=" << format_double(mc.nontrivial_intersection_frequency())
        << ";p_v_ge_1_exact=" << rational_text(nontrivial) << ";v_hist=" << histogram_text(mc.counts.exponent_histogram)
        << ";quotient_hist=" << histogram_text(mc.counts.quotient_histogram)
        << ";representation_mismatches=" << mc.counts.representation_mismatches;
  row.extra = extra.str();
  return row;
}

inline ReportRow tower_row(PrimeParam p, int max_level, std::uint64_t trials, RngSpec rng, unsigned threads) {
  ReportRow row;
  const auto report = tower_experiment(p, max_level, trials, rng, threads);
  const Rational exact = collision_probability_exact(p, max_level);
  set_exact(row, exact);
  row.empirical = static_cast<double>(report.equal_pairs) / static_cast<double>(report.pairs);
  const double q = boost::rational_cast<double>(exact);
  row.standard_error = std::sqrt(q * (1.0 - q) / static_cast<double>(trials));
  row.trials = trials;
  row.seed = rng.seed;
  std::ostringstream extra;
  extra << "equal=" << report.equal_pairs << ";distinct=" << report.distinct_pairs << ";violations=" << report.violations
        << ";v_hist=" << histogram_text(report.exponent_histogram)
        << ";n0_hist=" << histogram_text(report.stabilization_histogram, 1);
  row.extra = extra.str();
  return row;
}

inline ReportRow isotropic_row(PrimeParam p, int rank_level, const std::vector<int>& torsion) {
  ReportRow row;
  const SpaceShape shape(p, rank_level, torsion);
  const auto found = enumerate_maximal_isotropic(shape);
  set_exact(row, found.size(), 1);

  const PairingOperator op(shape);
  std::size_t verified = 0;
  std::size_t decomposes = 0;
  std::string per_subspace;
  for (std::size_t i = 0; i < found.size(); ++i) {
    const auto& w = found[i];
    const auto perp = orthogonal_complement(w.subspace, op);
    if (perp == w.subspace && perp.is_t_stable()) ++verified;
    if (w.diagnostics.decomposes) ++decomposes;
    const auto& d = w.diagnostics;
    if (!per_subspace.empty()) per_subspace += '|';
    per_subspace += std::to_string(i) + ":" + std::to_string(d.rank_projection_dim) + "/" +
                    std::to_string(d.rank_intersection_dim) + "/" + std::to_string(d.torsion_intersection_dim) + "/" +
                    (d.decomposes ? "1" : "0");
  }
  std::ostringstream extra;
  extra << "dim=" << shape.dimension() << ";complement_verified=" << verified << ";decomposes=" << decomposes
        << ";not_decomposes=" << found.size() - decomposes
        << ";diagnostics(rank_proj/rank_cap/tors_cap/decomposes)=" << per_subspace;
  row.extra = extra.str();
  return row;
}

}  // namespace detail

/// Runs the configured experiment. Exact and empirical fields depend only on
/// the configuration (including the seed), never on the thread count.
[[nodiscard]] inline ExperimentReport run(const ExperimentConfig& config) {
  validate(config);
  const PrimeParam p(config.prime);
  const RngSpec rng{config.seed};
  ExperimentReport report;
  report.config = config;
  report.timestamp = detail::utc_timestamp();

  for (int n : config.levels) {
    const auto start = std::chrono::steady_clock::now();
    ReportRow row;
    switch (config.mode) {
      case Mode::count: row = detail::count_row(p, n); break;
      case Mode::exhaustive: row = detail::exhaustive_row(p, n); break;
      case Mode::montecarlo: row = detail::montecarlo_row(p, n, *config.trials, rng, config.threads); break;
      case Mode::tower: row = detail::tower_row(p, n, *config.trials, rng, config.threads); break;
      case Mode::isotropic: row = detail::isotropic_row(p, n, config.shape); break;
    }
    row.mode = to_string(config.mode);
    row.p = p.value();
    row.n = n;
    row.runtime_ms = detail::elapsed_ms(start);
    report.rows.push_back(std::move(row));
  }
  return report;
}

// ---------------------------------------------------------------------------
// Serialization

inline constexpr std::string_view kCsvHeader =
    "mode,p,n,exact_num,exact_den,exact_decimal,empirical,stderr,trials,seed,runtime_ms,extra";

namespace detail {

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

template <typename T>
std::string optional_text(const std::optional<T>& v) {
  if (!v) return {};
  if constexpr (std::is_floating_point_v<T>) {
    return format_double(*v);
  } else {
    return std::to_string(*v);
  }
}

}  // namespace detail

/// CSV text of the report. runtime_ms is left empty unless config.timing is set.
[[nodiscard]] inline std::string to_csv(const ExperimentReport& report) {
  std::ostringstream out;
  out << kCsvHeader << '\n';
  for (const auto& r : report.rows) {
    out << detail::csv_field(r.mode) << ',' << r.p << ',' << r.n << ',' << r.exact_num << ',' << r.exact_den << ','
        << r.exact_decimal << ',' << detail::optional_text(r.empirical) << ','
        << detail::optional_text(r.standard_error) << ',' << detail::optional_text(r.trials) << ','
        << detail::optional_text(r.seed) << ','
        << (report.config.timing ? detail::optional_text(r.runtime_ms) : std::string{}) << ','
        << detail::csv_field(r.extra) << '\n';
  }
  return out.str();
}

namespace detail {

template <typename T>
nlohmann::json optional_json(const std::optional<T>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

template <typename T>
std::optional<T> json_optional(const nlohmann::json& j, const char* key) {
  const auto& v = j.at(key);
  if (v.is_null()) return std::nullopt;
  return v.get<T>();
}

}  // namespace detail

[[nodiscard]] inline nlohmann::json to_json(const ExperimentReport& report) {
  const auto& c = report.config;
  nlohmann::json config{{"mode", to_string(c.mode)},
                        {"prime", c.prime},
                        {"levels", c.levels},
                        {"trials", detail::optional_json(c.trials)},
                        {"seed", c.seed},
                        {"shape", c.shape},
                        {"output", c.output},
                        {"format", to_string(c.format)},
                        {"threads", c.threads},
                        {"timing", c.timing}};
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : report.rows) {
    rows.push_back({{"mode", r.mode},
                    {"p", r.p},
                    {"n", r.n},
                    {"exact_num", r.exact_num},
                    {"exact_den", r.exact_den},
                    {"exact_decimal", r.exact_decimal},
                    {"empirical", detail::optional_json(r.empirical)},
                    {"stderr", detail::optional_json(r.standard_error)},
                    {"trials", detail::optional_json(r.trials)},
                    {"seed", detail::optional_json(r.seed)},
                    {"runtime_ms", detail::optional_json(r.runtime_ms)},
                    {"extra", r.extra}});
  }
  return {{"config", config},
          {"rows", rows},
          {"metadata", {{"version", report.version}, {"timestamp", report.timestamp}, {"rng", report.rng}}}};
}

/// Inverse of to_json.
[[nodiscard]] inline ExperimentReport report_from_json(const nlohmann::json& j) {
  ExperimentReport report;
  const auto& c = j.at("config");
  ConfigMap values{{"mode", c.at("mode").get<std::string>()}};
  auto& config = report.config;
  config = ExperimentConfig{};
  static const std::map<std::string, Mode> modes{{"count", Mode::count},
                                                 {"exhaustive", Mode::exhaustive},
                                                 {"montecarlo", Mode::montecarlo},
                                                 {"tower", Mode::tower},
                                                 {"isotropic", Mode::isotropic}};
  static const std::map<std::string, OutputFormat> formats{
      {"csv", OutputFormat::csv}, {"json", OutputFormat::json}, {"both", OutputFormat::both}};
  config.mode = modes.at(c.at("mode").get<std::string>());
  config.prime = c.at("prime").get<unsigned>();
  config.levels = c.at("levels").get<std::vector<int>>();
  config.trials = detail::json_optional<std::uint64_t>(c, "trials");
  config.seed = c.at("seed").get<std::uint64_t>();
  config.shape = c.at("shape").get<std::vector<int>>();
  config.output = c.at("output").get<std::string>();
  config.format = formats.at(c.at("format").get<std::string>());
  config.threads = c.at("threads").get<unsigned>();
  config.timing = c.at("timing").get<bool>();

  for (const auto& r : j.at("rows")) {
    ReportRow row;
    row.mode = r.at("mode").get<std::string>();
    row.p = r.at("p").get<unsigned>();
    row.n = r.at("n").get<int>();
    row.exact_num = r.at("exact_num").get<std::uint64_t>();
    row.exact_den = r.at("exact_den").get<std::uint64_t>();
    row.exact_decimal = r.at("exact_decimal").get<std::string>();
    row.empirical = detail::json_optional<double>(r, "empirical");
    row.standard_error = detail::json_optional<double>(r, "stderr");
    row.trials = detail::json_optional<std::uint64_t>(r, "trials");
    row.seed = detail::json_optional<std::uint64_t>(r, "seed");
    row.runtime_ms = detail::json_optional<double>(r, "runtime_ms");
    row.extra = r.at("extra").get<std::string>();
    report.rows.push_back(std::move(row));
  }
  const auto& meta = j.at("metadata");
  report.version = meta.at("version").get<std::string>();
  report.timestamp = meta.at("timestamp").get<std::string>();
  report.rng = meta.at("rng").get<std::string>();
  return report;
}

/// Writes `contents` to a sibling temporary file and renames it over `path`,
/// so readers never observe a partial file.
inline void write_file_atomically(const std::filesystem::path& path, const std::string& contents) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw io_error("cannot open '" + tmp.string() + "' for writing");
    out << contents;
    out.flush();
    if (!out) {
      std::error_code ignored;
      std::filesystem::remove(tmp, ignored);
      throw io_error("failed writing '" + tmp.string() + "'");
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::error_code ignored;
    std::filesystem::remove(tmp, ignored);
    throw io_error("cannot move report into place at '" + path.string() + "': " + ec.message());
  }
}

inline std::filesystem::path emit_csv(const ExperimentReport& report, const std::string& prefix) {
  std::filesystem::path path = prefix + ".csv";
  write_file_atomically(path, to_csv(report));
  return path;
}

inline std::filesystem::path emit_json(const ExperimentReport& report, const std::string& prefix) {
  std::filesystem::path path = prefix + ".json";
  write_file_atomically(path, to_json(report).dump(2) + "\n");
  return path;
}

/// Writes the files selected by config.format; returns the paths written.
inline std::vector<std::filesystem::path> emit(const ExperimentReport& report) {
  std::vector<std::filesystem::path> written;
  const auto& c = report.config;
  if (c.format == OutputFormat::csv || c.format == OutputFormat::both) written.push_back(emit_csv(report, c.output));
  if (c.format == OutputFormat::json || c.format == OutputFormat::both) written.push_back(emit_json(report, c.output));
  return written;
}

}  // namespace omega
