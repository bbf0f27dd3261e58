#pragma once

// Report records and their csv/json serialization.

#include <json.hpp>

#include <cstdint>
#include <cstdio>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "qlab/errors.hpp"
#include "qlab/rational.hpp"

namespace qlab::harness {

/// Marks a trial that raised instead of producing a value.
struct ErrorValue {
  friend bool operator==(const ErrorValue&, const ErrorValue&) = default;
};

using RecordValue = std::variant<double, Rational, ErrorValue>;

struct ReportRecord {
  std::string experiment;
  std::string rule;
  std::size_t dim = 0;
  std::int64_t trial = 0;  // -1 marks an aggregate row
  std::string metric;
  RecordValue value = 0.0;
  std::uint64_t seed = 0;  // per-trial derived seed
  std::string witness;     // ';'-separated key=value pairs, starts with master=<seed>

  friend bool operator==(const ReportRecord& a, const ReportRecord& b) {
    return a.experiment == b.experiment && a.rule == b.rule && a.dim == b.dim && a.trial == b.trial &&
           a.metric == b.metric && a.value == b.value && a.seed == b.seed && a.witness == b.witness;
  }
};

enum class OutputFormat { csv, json };

inline OutputFormat parse_format(const std::string& name) {
  if (name == "csv") return OutputFormat::csv;
  if (name == "json") return OutputFormat::json;
  throw ConfigError("unknown output format '" + name + "'");
}

/// 17 significant digits; round-trips every finite double.
inline std::string format_number(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline std::string render_value(const RecordValue& v) {
  if (const auto* d = std::get_if<double>(&v)) return format_number(*d);
  if (const auto* r = std::get_if<Rational>(&v)) return r->to_string();
  return "nan";
}

namespace detail {

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

inline std::string json_string(const std::string& s) { return nlohmann::json(s).dump(); }

}  // namespace detail

inline constexpr const char* kCsvHeader = "experiment,rule,dim,trial,metric,value,seed,witness";

inline std::string emit_report(const std::vector<ReportRecord>& records, OutputFormat format,
                               bool allow_empty = false) {
  if (records.empty() && !allow_empty) throw ConfigError("emit_report: no records (use --allow-empty)");
  std::ostringstream os;
  if (format == OutputFormat::csv) {
    os << kCsvHeader << '\n';
    for (const auto& r : records) {
      os << detail::csv_field(r.experiment) << ',' << detail::csv_field(r.rule) << ',' << r.dim << ','
         << r.trial << ',' << detail::csv_field(r.metric) << ',' << render_value(r.value) << ','
         << r.seed << ',' << detail::csv_field(r.witness) << '\n';
    }
    return os.str();
  }
  os << '[';
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    std::string value;
    if (const auto* d = std::get_if<double>(&r.value)) {
      value = std::isfinite(*d) ? format_number(*d) : "null";
    } else if (const auto* q = std::get_if<Rational>(&r.value)) {
      value = detail::json_string(q->to_string());
    } else {
      value = "null";
    }
    os << (i == 0 ? "\n  " : ",\n  ") << "{\"experiment\":" << detail::json_string(r.experiment)
       << ",\"rule\":" << detail::json_string(r.rule) << ",\"dim\":" << r.dim << ",\"trial\":" << r.trial
       << ",\"metric\":" << detail::json_string(r.metric) << ",\"value\":" << value
       << ",\"seed\":" << r.seed << ",\"witness\":" << detail::json_string(r.witness) << '}';
  }
  os << (records.empty() ? "]\n" : "\n]\n");
  return os.str();
}

/// Inverse of the json form of emit_report.
inline std::vector<ReportRecord> parse_json_report(const std::string& text) {
  const auto doc = nlohmann::json::parse(text);
  if (!doc.is_array()) throw ConfigError("report: expected a json array");
  std::vector<ReportRecord> out;
  for (const auto& o : doc) {
    ReportRecord r;
    r.experiment = o.at("experiment").get<std::string>();
    r.rule = o.at("rule").get<std::string>();
    r.dim = o.at("dim").get<std::size_t>();
    r.trial = o.at("trial").get<std::int64_t>();
    r.metric = o.at("metric").get<std::string>();
    const auto& v = o.at("value");
    if (v.is_null()) r.value = ErrorValue{};
    else if (v.is_string()) r.value = Rational::parse(v.get<std::string>());
    else r.value = v.get<double>();
    r.seed = o.at("seed").get<std::uint64_t>();
    r.witness = o.at("witness").get<std::string>();
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace qlab::harness
