#pragma once

// CSV ingestion of subjects/events files and CSV writers for datasets and
// coefficient paths. Numbers are written in shortest round-trip form with
// '.' as decimal separator and LF line endings.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <unordered_map>
#include <vector>

#include "recurq/errors.hpp"
#include "recurq/estimator.hpp"
#include "recurq/inference.hpp"
#include "recurq/model.hpp"

namespace recurq {

inline std::string format_double(double v) {
  if (std::isnan(v)) return "NA";
  if (std::isinf(v)) return v > 0 ? "Inf" : "-Inf";
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

struct CsvTable {
  std::string source;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> lines;  // 1-based line number of each row

  std::optional<std::size_t> column(std::string_view name) const {
    for (std::size_t c = 0; c < header.size(); ++c)
      if (header[c] == name) return c;
    return std::nullopt;
  }
};

namespace detail {

inline std::string trim(std::string_view s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string_view::npos) return {};
  const auto b = s.find_last_not_of(" \t\r");
  return std::string(s.substr(a, b - a + 1));
}

// One record; fields may be double-quoted with "" as an escaped quote.
inline std::vector<std::string> split_csv_line(const std::string& line, const std::string& where) {
  std::vector<std::string> out;
  std::string field;
  bool quoted = false;
  bool was_quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (quoted) {
      if (ch == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += ch;
      }
    } else if (ch == '"') {
      quoted = true;
      was_quoted = true;
    } else if (ch == ',') {
      out.push_back(was_quoted ? field : trim(field));
      field.clear();
      was_quoted = false;
    } else {
      field += ch;
    }
  }
  if (quoted) throw SchemaError(where + ": unterminated quoted field");
  out.push_back(was_quoted ? field : trim(field));
  return out;
}

inline std::optional<double> parse_number(const std::string& s) {
  if (s.empty()) return std::nullopt;
  double v = 0.0;
  const char* first = s.data();
  if (*first == '+') ++first;
  const auto res = std::from_chars(first, s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

inline bool is_missing(const std::string& s) { return s.empty() || s == "NA" || s == "NaN" || s == "nan" || s == "."; }

}  // namespace detail

inline CsvTable read_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SchemaError("cannot open '" + path + "'");
  CsvTable t;
  t.source = path;
  std::string line;
  std::size_t lineno = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (lineno == 1 && line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
    if (detail::trim(line).empty()) continue;
    const std::string where = path + ":" + std::to_string(lineno);
    auto fields = detail::split_csv_line(line, where);
    if (!have_header) {
      t.header = std::move(fields);
      have_header = true;
      continue;
    }
    if (fields.size() != t.header.size())
      throw SchemaError(where + ": expected " + std::to_string(t.header.size()) + " fields, found " +
                        std::to_string(fields.size()));
    t.rows.push_back(std::move(fields));
    t.lines.push_back(lineno);
  }
  if (!have_header) throw SchemaError("'" + path + "' is empty (a header row is required)");
  return t;
}

struct IngestOptions {
  std::optional<double> nu_star;
  std::vector<std::string> standardize;  // covariate names to center and scale
};

struct IngestResult {
  Dataset data;
  std::size_t excluded_missing = 0;  // subjects dropped for a missing covariate
  std::size_t events_of_excluded = 0;
};

// subjects: subject_id, censoring_time, then one column per covariate.
// events: subject_id, event_time (one row per event).
inline IngestResult ingest(const std::string& subjects_path, const std::string& events_path,
                           const IngestOptions& options = {}) {
  const CsvTable subj = read_csv(subjects_path);
  const auto id_col = subj.column("subject_id");
  const auto c_col = subj.column("censoring_time");
  if (!id_col || !c_col)
    throw SchemaError(subjects_path + ": header must contain 'subject_id' and 'censoring_time'");
  std::vector<std::size_t> cov_cols;
  std::vector<std::string> names;
  for (std::size_t c = 0; c < subj.header.size(); ++c)
    if (c != *id_col && c != *c_col) {
      if (subj.header[c].empty()) throw SchemaError(subjects_path + ": empty column name");
      cov_cols.push_back(c);
      names.push_back(subj.header[c]);
    }

  IngestResult out;
  std::vector<SubjectRecord> records;
  std::unordered_map<std::string, std::size_t> index;
  std::unordered_map<std::string, int> excluded;
  for (std::size_t r = 0; r < subj.rows.size(); ++r) {
    const auto& row = subj.rows[r];
    const std::string where = subjects_path + ":" + std::to_string(subj.lines[r]);
    const std::string& id = row[*id_col];
    if (id.empty()) throw ValidationError(where + ": empty subject_id");
    if (index.count(id) || excluded.count(id)) throw ValidationError(where + ": duplicate subject_id '" + id + "'");
    const auto c = detail::parse_number(row[*c_col]);
    if (!c) throw ValidationError(where + ": censoring_time '" + row[*c_col] + "' is not a number");
    if (!(*c > 0.0) || !std::isfinite(*c)) throw ValidationError(where + ": censoring_time must be positive");
    SubjectRecord rec;
    rec.id = id;
    rec.censoring_time = *c;
    bool missing = false;
    for (std::size_t k = 0; k < cov_cols.size(); ++k) {
      const std::string& cell = row[cov_cols[k]];
      if (detail::is_missing(cell)) {
        missing = true;
        break;
      }
      const auto v = detail::parse_number(cell);
      if (!v || !std::isfinite(*v))
        throw ValidationError(where + ": covariate '" + names[k] + "' value '" + cell + "' is not a number");
      rec.covariates.push_back(*v);
    }
    if (missing) {
      excluded[id] = 1;
      ++out.excluded_missing;
      continue;
    }
    index[id] = records.size();
    records.push_back(std::move(rec));
  }
  if (records.empty()) throw ValidationError(subjects_path + ": no usable subjects");

  const CsvTable ev = read_csv(events_path);
  const auto eid = ev.column("subject_id");
  const auto et = ev.column("event_time");
  if (!eid || !et) throw SchemaError(events_path + ": header must contain 'subject_id' and 'event_time'");
  for (std::size_t r = 0; r < ev.rows.size(); ++r) {
    const auto& row = ev.rows[r];
    const std::string where = events_path + ":" + std::to_string(ev.lines[r]);
    const std::string& id = row[*eid];
    const auto t = detail::parse_number(row[*et]);
    if (!t) throw ValidationError(where + ": event_time '" + row[*et] + "' is not a number");
    if (excluded.count(id)) {
      ++out.events_of_excluded;
      continue;
    }
    const auto it = index.find(id);
    if (it == index.end()) throw ValidationError(where + ": unknown subject_id '" + id + "'");
    auto& rec = records[it->second];
    if (!(*t > 0.0)) throw ValidationError(where + ": event_time must be positive");
    if (*t > rec.censoring_time)
      throw ValidationError(where + ": event_time " + row[*et] + " exceeds the censoring time of subject '" + id + "'");
    rec.event_times.push_back(*t);
  }
  for (auto& rec : records) {
    std::sort(rec.event_times.begin(), rec.event_times.end());
    if (std::adjacent_find(rec.event_times.begin(), rec.event_times.end()) != rec.event_times.end())
      throw ValidationError(events_path + ": subject '" + rec.id + "' has two events at the same time");
  }
  Dataset data(std::move(records), names, options.nu_star);
  if (!options.standardize.empty()) {
    std::vector<std::size_t> cols;
    for (const auto& s : options.standardize) {
      const auto it = std::find(names.begin(), names.end(), s);
      if (it == names.end()) throw SchemaError("cannot standardize unknown covariate '" + s + "'");
      cols.push_back(static_cast<std::size_t>(it - names.begin()));
    }
    data = data.standardized(cols);
  }
  out.data = std::move(data);
  return out;
}

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw SchemaError("cannot write '" + path + "'");
  out << text;
  if (!out) throw SchemaError("write to '" + path + "' failed");
}

inline std::string subjects_csv(const Dataset& data) {
  std::ostringstream os;
  os << "subject_id,censoring_time";
  for (const auto& n : data.covariate_names()) os << ',' << n;
  os << '\n';
  for (const auto& r : data.records()) {
    os << r.id << ',' << format_double(r.censoring_time);
    for (double v : r.covariates) os << ',' << format_double(v);
    os << '\n';
  }
  return os.str();
}

inline std::string events_csv(const Dataset& data) {
  std::ostringstream os;
  os << "subject_id,event_time\n";
  for (const auto& r : data.records())
    for (double t : r.event_times) os << r.id << ',' << format_double(t) << '\n';
  return os.str();
}

inline std::vector<std::string> coefficient_names(const Dataset& data) {
  std::vector<std::string> names{"intercept"};
  names.insert(names.end(), data.covariate_names().begin(), data.covariate_names().end());
  return names;
}

// tau, coef_name, estimate, naive_estimate, se, ci_lo, ci_hi; NA where no
// bootstrap was run.
inline std::string path_csv(const CoefficientPath& path, const CoefficientPath& naive,
                            const std::vector<std::string>& names, const BootstrapSummary* boot = nullptr,
                            bool percentile = false) {
  std::ostringstream os;
  os << "tau,coef_name,estimate,naive_estimate,se,ci_lo,ci_hi\n";
  const double na = std::numeric_limits<double>::quiet_NaN();
  for (std::size_t k = 0; k < path.knots(); ++k)
    for (std::size_t j = 0; j < path.dimension(); ++j) {
      const auto kk = static_cast<Eigen::Index>(k);
      const auto jj = static_cast<Eigen::Index>(j);
      double se = na, lo = na, hi = na;
      if (boot) {
        se = boot->se(kk, jj);
        lo = percentile ? boot->percentile_lo(kk, jj) : boot->normal_lo(kk, jj);
        hi = percentile ? boot->percentile_hi(kk, jj) : boot->normal_hi(kk, jj);
      }
      os << format_double(path.grid()[k]) << ',' << names[j] << ',' << format_double(path.theta()(kk, jj)) << ','
         << format_double(naive.theta()(kk, jj)) << ',' << format_double(se) << ',' << format_double(lo) << ','
         << format_double(hi) << '\n';
    }
  return os.str();
}

inline std::string replicates_csv(const BootstrapSummary& boot, const std::vector<std::string>& names) {
  std::ostringstream os;
  os << "replicate,tau,coef_name,estimate\n";
  for (std::size_t b = 0; b < boot.replicate_paths.size(); ++b) {
    const auto& rp = boot.replicate_paths[b];
    for (std::size_t k = 0; k < rp.knots(); ++k)
      for (std::size_t j = 0; j < rp.dimension(); ++j)
        os << boot.replicate_index[b] << ',' << format_double(rp.grid()[k]) << ',' << names[j] << ','
           << format_double(rp.theta()(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(j))) << '\n';
  }
  return os.str();
}

}  // namespace recurq
