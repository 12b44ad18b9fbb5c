#pragma once

// Observation and summary-statistic ingestion.
//
// Two CSV layouts are accepted (UTF-8, '.' decimal point, LF or CRLF):
//   group,value         one raw observation per line
//   group,n,mean,sd     one published summary per line
// Group order is preserved; the first group listed is "group A" whenever
// two groups are differenced.

#include <charconv>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "estprob/errors.hpp"

namespace estprob {

struct Observation {
  std::string group;
  double value = 0.0;
};

/// Sufficient statistics of one group. sd uses the n - 1 denominator.
struct SummaryStats {
  std::string label;
  std::uint64_t n = 0;
  double mean = 0.0;
  double sd = 0.0;
};

enum class Provenance { raw, summary };

inline std::string_view to_string(Provenance p) {
  return p == Provenance::raw ? "raw" : "summary";
}

/// Ordered, uniquely labelled collection of group summaries. Immutable after
/// construction.
class Dataset {
 public:
  Dataset(std::vector<SummaryStats> groups, Provenance provenance)
      : groups_(std::move(groups)), provenance_(provenance) {
    std::unordered_set<std::string> seen;
    for (const auto& g : groups_) {
      if (g.label.empty()) throw InputError("group label must not be empty");
      if (!seen.insert(g.label).second) {
        throw InputError("duplicate group label '" + g.label + "'");
      }
    }
  }

  const std::vector<SummaryStats>& groups() const { return groups_; }
  Provenance provenance() const { return provenance_; }
  std::size_t size() const { return groups_.size(); }

  bool contains(std::string_view label) const { return find(label) != nullptr; }

  const SummaryStats& group(std::string_view label) const {
    if (const auto* g = find(label)) return *g;
    throw InputError("unknown group '" + std::string(label) + "'");
  }

 private:
  const SummaryStats* find(std::string_view label) const {
    for (const auto& g : groups_) {
      if (g.label == label) return &g;
    }
    return nullptr;
  }

  std::vector<SummaryStats> groups_;
  Provenance provenance_;
};

/// Throws InputError unless the group supports inference (n >= 2).
inline void require_inferential(const SummaryStats& s) {
  if (s.n < 2) {
    throw InputError("group '" + s.label + "' has n=" + std::to_string(s.n) +
                     "; at least 2 observations are needed for inference");
  }
}

/// Mean and n - 1 standard deviation of at least two values.
inline SummaryStats summarize(std::span<const double> values, std::string label = {}) {
  if (values.size() < 2) {
    throw InputError("summarize needs at least 2 values, got " +
                     std::to_string(values.size()));
  }
  const double n = static_cast<double>(values.size());
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return {std::move(label), values.size(), mean, std::sqrt(ss / (n - 1.0))};
}

/// The summary of k concatenated copies of a sample: n scales by k, the mean
/// is unchanged and sd is rescaled by sqrt(k(n-1)/(kn-1)).
inline SummaryStats replicate(const SummaryStats& s, std::uint64_t k) {
  if (k == 0) throw InputError("replication factor must be >= 1");
  SummaryStats out = s;
  out.n = s.n * k;
  if (s.n >= 2) {
    const double n = static_cast<double>(s.n);
    const double kk = static_cast<double>(k);
    out.sd = s.sd * std::sqrt(kk * (n - 1.0) / (kk * n - 1.0));
  }
  return out;
}

inline Dataset replicate(const Dataset& d, std::uint64_t k) {
  if (k == 0) throw InputError("replication factor must be >= 1");
  std::vector<SummaryStats> groups;
  groups.reserve(d.size());
  for (const auto& g : d.groups()) groups.push_back(replicate(g, k));
  return Dataset(std::move(groups), d.provenance());
}

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

struct CsvLine {
  std::size_t number;  // 1-based
  std::vector<std::string_view> fields;
};

// Splits into lines (LF or CRLF), drops blank lines, splits fields on ','.
inline std::vector<CsvLine> split_csv(std::string_view text) {
  std::vector<CsvLine> lines;
  std::size_t number = 0;
  while (!text.empty()) {
    ++number;
    const auto eol = text.find('\n');
    std::string_view line = text.substr(0, eol);
    text = eol == std::string_view::npos ? std::string_view{} : text.substr(eol + 1);
    if (number == 1 && line.starts_with("\xEF\xBB\xBF")) line.remove_prefix(3);
    line = trim(line);
    if (line.empty()) continue;
    CsvLine parsed{number, {}};
    std::size_t start = 0;
    while (true) {
      const auto comma = line.find(',', start);
      parsed.fields.push_back(trim(line.substr(start, comma - start)));
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    lines.push_back(std::move(parsed));
  }
  return lines;
}

inline std::string at_line(std::size_t n) { return "line " + std::to_string(n) + ": "; }

inline double parse_real(std::string_view field, std::size_t line, std::string_view what) {
  double v = 0.0;
  const char* first = field.data();
  const char* last = field.data() + field.size();
  if (!field.empty() && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (field.empty() || ec != std::errc{} || ptr != last || !std::isfinite(v)) {
    throw InputError(at_line(line) + std::string(what) + " '" + std::string(field) +
                     "' is not a finite number");
  }
  return v;
}

inline std::uint64_t parse_count(std::string_view field, std::size_t line,
                                 std::string_view what) {
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (field.empty() || ec != std::errc{} || ptr != field.data() + field.size()) {
    throw InputError(at_line(line) + std::string(what) + " '" + std::string(field) +
                     "' is not a non-negative integer");
  }
  return v;
}

inline std::vector<CsvLine> split_with_header(std::string_view text,
                                              std::initializer_list<std::string_view> header) {
  auto lines = split_csv(text);
  if (lines.empty()) throw InputError("input is empty");
  const auto& head = lines.front();
  bool ok = head.fields.size() == header.size();
  if (ok) {
    std::size_t i = 0;
    for (auto h : header) ok = ok && head.fields[i++] == h;
  }
  if (!ok) {
    std::string expected;
    for (auto h : header) expected += (expected.empty() ? "" : ",") + std::string(h);
    throw InputError(at_line(head.number) + "expected header '" + expected + "'");
  }
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].fields.size() != header.size()) {
      throw InputError(at_line(lines[i].number) + "expected " +
                       std::to_string(header.size()) + " fields, got " +
                       std::to_string(lines[i].fields.size()));
    }
    if (lines[i].fields[0].empty()) {
      throw InputError(at_line(lines[i].number) + "empty group label");
    }
  }
  return lines;
}

}  // namespace detail

/// Raw observations from a `group,value` CSV.
inline std::vector<Observation> read_observations(std::string_view csv_text) {
  const auto lines = detail::split_with_header(csv_text, {"group", "value"});
  std::vector<Observation> out;
  out.reserve(lines.size() - 1);
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto& l = lines[i];
    out.push_back({std::string(l.fields[0]), detail::parse_real(l.fields[1], l.number, "value")});
  }
  return out;
}

/// Groups raw observations (first-appearance order) into a Dataset. Groups
/// with a single observation are kept with sd = 0; inference on them fails.
inline Dataset dataset_from_observations(std::span<const Observation> observations) {
  std::vector<std::string> order;
  std::unordered_map<std::string, std::vector<double>> values;
  for (const auto& o : observations) {
    if (o.group.empty()) throw InputError("empty group label");
    auto [it, inserted] = values.try_emplace(o.group);
    if (inserted) order.push_back(o.group);
    it->second.push_back(o.value);
  }
  std::vector<SummaryStats> groups;
  groups.reserve(order.size());
  for (const auto& label : order) {
    const auto& v = values.at(label);
    if (v.size() == 1) {
      groups.push_back({label, 1, v.front(), 0.0});
    } else {
      groups.push_back(summarize(v, label));
    }
  }
  return Dataset(std::move(groups), Provenance::raw);
}

inline Dataset parse_observations(std::string_view csv_text) {
  const auto obs = read_observations(csv_text);
  if (obs.empty()) throw InputError("no observations after header");
  return dataset_from_observations(obs);
}

/// Published summaries from a `group,n,mean,sd` CSV.
inline Dataset parse_summaries(std::string_view csv_text) {
  const auto lines = detail::split_with_header(csv_text, {"group", "n", "mean", "sd"});
  if (lines.size() < 2) throw InputError("no groups after header");
  std::vector<SummaryStats> groups;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto& l = lines[i];
    SummaryStats s{std::string(l.fields[0]), detail::parse_count(l.fields[1], l.number, "n"),
                   detail::parse_real(l.fields[2], l.number, "mean"),
                   detail::parse_real(l.fields[3], l.number, "sd")};
    if (s.n < 2) {
      throw InputError(detail::at_line(l.number) + "n must be >= 2, got " +
                       std::to_string(s.n));
    }
    if (s.sd < 0.0) throw InputError(detail::at_line(l.number) + "sd must be >= 0");
    groups.push_back(std::move(s));
  }
  try {
    return Dataset(std::move(groups), Provenance::summary);
  } catch (const InputError& e) {
    throw InputError(std::string("summary file: ") + e.what());
  }
}

/// Dispatches on the header line: `group,value` or `group,n,mean,sd`.
inline Dataset parse_dataset(std::string_view csv_text) {
  const auto lines = detail::split_csv(csv_text);
  if (lines.empty()) throw InputError("input is empty");
  if (lines.front().fields.size() == 4) return parse_summaries(csv_text);
  return parse_observations(csv_text);
}

}  // namespace estprob
