// Copyright 2026 The dpboost Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Tabular ingestion: CSV parsing, schema-driven encoding, normalization to
// [-1, 1], label balancing and train/test splitting.

#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <iostream>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "dpboost/error.hpp"
#include "dpboost/rng.hpp"
#include "json.hpp"

namespace dpboost {

using IndexSet = std::vector<Eigen::Index>;

struct RawTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::string label_column;

  std::size_t column_index(std::string_view name) const {
    auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) {
      throw Error("column '" + std::string(name) + "' not in header");
    }
    return static_cast<std::size_t>(it - header.begin());
  }
};

// kOrdinal is a categorical attribute coded as the rank of its level
// (declared order, or sorted order of observed values) in one column.
enum class ColumnKind { kNumeric, kCategorical, kOrdinal, kLabel };

struct ColumnSpec {
  std::string name;
  ColumnKind kind = ColumnKind::kNumeric;
  std::optional<double> min;
  std::optional<double> max;
  std::vector<std::string> levels;  // optional declared order for kOrdinal
};

struct LabelSpec {
  std::string name;
  std::string positive;
  std::string negative;
};

struct Schema {
  std::vector<ColumnSpec> columns;
  LabelSpec label;

  const ColumnSpec* find(std::string_view name) const {
    for (const auto& c : columns) {
      if (c.name == name) return &c;
    }
    return nullptr;
  }

  // Exactly one label column, label mapping a bijection, ranges ordered.
  void validate() const {
    if (label.name.empty()) throw Error("schema: label name missing");
    if (label.positive == label.negative) {
      throw Error("schema: label mapping must be a bijection onto {-1,+1}");
    }
    int label_columns = 0;
    std::set<std::string> seen;
    for (const auto& c : columns) {
      if (!seen.insert(c.name).second) {
        throw Error("schema: duplicate column '" + c.name + "'");
      }
      if (c.kind == ColumnKind::kLabel) {
        ++label_columns;
        if (c.name != label.name) {
          throw Error("schema: label column '" + c.name +
                      "' does not match label.name");
        }
      }
      if (c.min.has_value() != c.max.has_value()) {
        throw Error("schema: column '" + c.name + "' declares only one bound");
      }
      if (c.min && !(*c.min < *c.max)) {
        throw Error("schema: column '" + c.name + "' needs min < max");
      }
    }
    if (label_columns > 1) throw Error("schema: more than one label column");
  }
};

inline ColumnKind parse_column_kind(std::string_view s) {
  if (s == "numeric") return ColumnKind::kNumeric;
  if (s == "categorical") return ColumnKind::kCategorical;
  if (s == "ordinal") return ColumnKind::kOrdinal;
  if (s == "label") return ColumnKind::kLabel;
  throw Error("schema: unknown column kind '" + std::string(s) + "'");
}

inline Schema schema_from_json(const nlohmann::json& j) {
  Schema s;
  try {
    for (const auto& c : j.at("columns")) {
      ColumnSpec spec;
      spec.name = c.at("name").get<std::string>();
      spec.kind = parse_column_kind(c.value("kind", std::string("numeric")));
      if (c.contains("min")) spec.min = c.at("min").get<double>();
      if (c.contains("max")) spec.max = c.at("max").get<double>();
      if (c.contains("levels")) {
        spec.levels = c.at("levels").get<std::vector<std::string>>();
      }
      s.columns.push_back(std::move(spec));
    }
    const auto& l = j.at("label");
    s.label.name = l.at("name").get<std::string>();
    s.label.positive = l.at("positive").get<std::string>();
    s.label.negative = l.at("negative").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("schema: ") + e.what());
  }
  s.validate();
  return s;
}

inline Schema load_schema(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open schema '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw Error("schema '" + path + "': " + e.what());
  }
  return schema_from_json(j);
}

namespace detail {

// Splits one logical CSV record starting at `pos`. Handles quoted fields with
// doubled quotes and embedded newlines. Returns false at end of input.
inline bool next_csv_record(std::string_view text, std::size_t& pos,
                            std::vector<std::string>& fields) {
  fields.clear();
  if (pos >= text.size()) return false;
  std::string field;
  bool quoted = false;
  while (pos < text.size()) {
    const char c = text[pos];
    if (quoted) {
      if (c == '"') {
        if (pos + 1 < text.size() && text[pos + 1] == '"') {
          field.push_back('"');
          pos += 2;
          continue;
        }
        quoted = false;
      } else {
        field.push_back(c);
      }
      ++pos;
      continue;
    }
    if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(field));
      field.clear();
    } else if (c == '\n' || c == '\r') {
      if (c == '\r' && pos + 1 < text.size() && text[pos + 1] == '\n') ++pos;
      ++pos;
      fields.push_back(std::move(field));
      return true;
    } else {
      field.push_back(c);
    }
    ++pos;
  }
  if (quoted) throw Error("csv: unterminated quoted field");
  fields.push_back(std::move(field));
  return true;
}

inline bool is_blank_record(const std::vector<std::string>& fields) {
  return fields.size() == 1 && fields[0].empty();
}

}  // namespace detail

inline RawTable parse_csv(std::string_view text, const Schema& schema) {
  RawTable t;
  t.label_column = schema.label.name;
  std::size_t pos = 0;
  std::vector<std::string> fields;
  // Strip a UTF-8 byte order mark.
  if (text.substr(0, 3) == "\xEF\xBB\xBF") pos = 3;
  while (detail::next_csv_record(text, pos, fields)) {
    if (!detail::is_blank_record(fields)) break;
  }
  if (fields.empty() || detail::is_blank_record(fields)) {
    throw Error("missing header");
  }
  t.header = fields;
  while (detail::next_csv_record(text, pos, fields)) {
    if (detail::is_blank_record(fields)) continue;
    if (fields.size() != t.header.size()) {
      throw Error("ragged row at index " + std::to_string(t.rows.size()));
    }
    t.rows.push_back(fields);
  }
  if (std::find(t.header.begin(), t.header.end(), t.label_column) ==
      t.header.end()) {
    throw Error("missing label column '" + t.label_column + "'");
  }
  return t;
}

inline RawTable load_csv(const std::string& path, const Schema& schema) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw Error("read failure on '" + path + "'");
  return parse_csv(buf.str(), schema);
}

// One encoded column: where it came from and how it was produced.
struct EncodedColumn {
  std::string source;
  ColumnKind kind = ColumnKind::kNumeric;
  std::string level;  // one-hot level; empty otherwise
  std::size_t level_count = 0;  // ordinal only

  std::string tag() const {
    switch (kind) {
      case ColumnKind::kCategorical: return source + "=" + level;
      case ColumnKind::kOrdinal: return source + ":ordinal";
      default: return source;
    }
  }
};

struct Dataset {
  Eigen::MatrixXd X;  // n x d
  Eigen::VectorXd y;  // entries in {-1, +1}
  std::vector<EncodedColumn> columns;
  std::size_t dropped_rows = 0;
  bool normalized = false;

  Eigen::Index n() const { return X.rows(); }
  Eigen::Index d() const { return X.cols(); }

  void check_invariants() const {
    if (X.rows() < 1) throw Error("dataset: n must be at least 1");
    if (static_cast<std::size_t>(X.cols()) != columns.size()) {
      throw Error("dataset: column manifest does not match d");
    }
    if (y.size() != X.rows()) throw Error("dataset: label count mismatch");
    for (Eigen::Index i = 0; i < y.size(); ++i) {
      if (y[i] != 1.0 && y[i] != -1.0) throw Error("dataset: label not +-1");
    }
    if (normalized && X.size() > 0 && X.cwiseAbs().maxCoeff() > 1.0) {
      throw Error("dataset: entry outside [-1, 1]");
    }
  }

  // Indices of encoded columns whose source attribute is in `names`.
  IndexSet columns_from(const std::vector<std::string>& names) const {
    IndexSet out;
    for (std::size_t j = 0; j < columns.size(); ++j) {
      if (std::find(names.begin(), names.end(), columns[j].source) !=
          names.end()) {
        out.push_back(static_cast<Eigen::Index>(j));
      }
    }
    return out;
  }

  IndexSet all_columns() const {
    IndexSet out(static_cast<std::size_t>(d()));
    std::iota(out.begin(), out.end(), Eigen::Index{0});
    return out;
  }
};

// Rows `rows` of `ds`, in the given order.
inline Dataset subset(const Dataset& ds, std::span<const Eigen::Index> rows) {
  Dataset out;
  out.columns = ds.columns;
  out.normalized = ds.normalized;
  out.X.resize(static_cast<Eigen::Index>(rows.size()), ds.d());
  out.y.resize(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const auto i = static_cast<Eigen::Index>(r);
    out.X.row(i) = ds.X.row(rows[r]);
    out.y[i] = ds.y[rows[r]];
  }
  return out;
}

struct FeatureSplit {
  IndexSet public_cols;
  IndexSet private_cols;

  // Disjoint, covering {0..d-1}; private part non-empty when required.
  void validate(Eigen::Index d, bool require_private = true) const {
    std::vector<int> seen(static_cast<std::size_t>(d), 0);
    for (const auto* part : {&public_cols, &private_cols}) {
      for (Eigen::Index j : *part) {
        if (j < 0 || j >= d) throw Error("feature split: column out of range");
        if (seen[static_cast<std::size_t>(j)]++) {
          throw Error("feature split: public and private columns overlap");
        }
      }
    }
    if (std::find(seen.begin(), seen.end(), 0) != seen.end()) {
      throw Error("feature split: columns do not cover the dataset");
    }
    if (require_private && private_cols.empty()) {
      throw Error("feature split: private column set is empty");
    }
  }
};

// Public columns are the encodings of the named source attributes; every
// other column is private.
inline FeatureSplit make_split(const Dataset& ds,
                               const std::vector<std::string>& public_sources) {
  for (const auto& name : public_sources) {
    bool found = false;
    for (const auto& c : ds.columns) found = found || c.source == name;
    if (!found) throw Error("feature split: unknown column '" + name + "'");
  }
  FeatureSplit split;
  split.public_cols = ds.columns_from(public_sources);
  for (Eigen::Index j = 0; j < ds.d(); ++j) {
    if (std::find(split.public_cols.begin(), split.public_cols.end(), j) ==
        split.public_cols.end()) {
      split.private_cols.push_back(j);
    }
  }
  return split;
}

namespace detail {

inline bool is_missing(std::string_view field) {
  while (!field.empty() && field.front() == ' ') field.remove_prefix(1);
  while (!field.empty() && field.back() == ' ') field.remove_suffix(1);
  return field.empty() || field == "?" || field == "NA";
}

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

inline double parse_number(std::string_view token, const std::string& column,
                           std::size_t row) {
  token = trim(token);
  if (!token.empty() && token.front() == '+') token.remove_prefix(1);
  double v = 0.0;
  auto [p, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
  if (ec != std::errc() || p != token.data() + token.size() ||
      !std::isfinite(v)) {
    throw Error("non-numeric token '" + std::string(token) + "' in column '" +
                column + "' at row " + std::to_string(row));
  }
  return v;
}

}  // namespace detail

// Expands categoricals to one-hot {0,1} columns, codes ordinals by level
// rank, passes numerics through and maps labels to +-1. Rows with a missing
// field in any used column are dropped and counted.
inline Dataset encode(const RawTable& raw, const Schema& schema) {
  schema.validate();
  const std::size_t label_idx = raw.column_index(schema.label.name);

  struct Plan {
    const ColumnSpec* spec;
    std::size_t src;
    std::vector<std::string> levels;
  };
  std::vector<Plan> plans;
  for (const auto& c : schema.columns) {
    if (c.kind == ColumnKind::kLabel) continue;
    plans.push_back({&c, raw.column_index(c.name), {}});
  }

  std::vector<std::size_t> kept;
  kept.reserve(raw.rows.size());
  for (std::size_t r = 0; r < raw.rows.size(); ++r) {
    const auto& row = raw.rows[r];
    bool missing = detail::is_missing(row[label_idx]);
    for (const auto& p : plans) missing = missing || detail::is_missing(row[p.src]);
    if (!missing) kept.push_back(r);
  }

  for (auto& p : plans) {
    if (p.spec->kind == ColumnKind::kCategorical ||
        p.spec->kind == ColumnKind::kOrdinal) {
      if (p.spec->kind == ColumnKind::kOrdinal && !p.spec->levels.empty()) {
        p.levels = p.spec->levels;
      } else {
        std::set<std::string> observed;
        for (std::size_t r : kept) {
          observed.emplace(detail::trim(raw.rows[r][p.src]));
        }
        p.levels.assign(observed.begin(), observed.end());
      }
    }
  }

  Dataset ds;
  ds.dropped_rows = raw.rows.size() - kept.size();
  for (const auto& p : plans) {
    switch (p.spec->kind) {
      case ColumnKind::kCategorical:
        for (const auto& level : p.levels) {
          ds.columns.push_back({p.spec->name, ColumnKind::kCategorical, level, 0});
        }
        break;
      case ColumnKind::kOrdinal:
        ds.columns.push_back(
            {p.spec->name, ColumnKind::kOrdinal, "", p.levels.size()});
        break;
      default:
        ds.columns.push_back({p.spec->name, ColumnKind::kNumeric, "", 0});
    }
  }

  const auto n = static_cast<Eigen::Index>(kept.size());
  ds.X.setZero(n, static_cast<Eigen::Index>(ds.columns.size()));
  ds.y.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const std::size_t r = kept[static_cast<std::size_t>(i)];
    const auto& row = raw.rows[r];
    const std::string_view label = detail::trim(row[label_idx]);
    if (label == schema.label.positive) {
      ds.y[i] = 1.0;
    } else if (label == schema.label.negative) {
      ds.y[i] = -1.0;
    } else {
      throw Error("unseen label value '" + std::string(label) + "' at row " +
                  std::to_string(r));
    }
    Eigen::Index j = 0;
    for (const auto& p : plans) {
      const std::string_view value = detail::trim(row[p.src]);
      switch (p.spec->kind) {
        case ColumnKind::kCategorical:
          for (const auto& level : p.levels) ds.X(i, j++) = value == level ? 1.0 : 0.0;
          break;
        case ColumnKind::kOrdinal: {
          auto it = std::find(p.levels.begin(), p.levels.end(), value);
          if (it == p.levels.end()) {
            throw Error("undeclared level '" + std::string(value) +
                        "' in column '" + p.spec->name + "'");
          }
          ds.X(i, j++) = static_cast<double>(it - p.levels.begin());
          break;
        }
        default:
          ds.X(i, j++) = detail::parse_number(value, p.spec->name, r);
      }
    }
  }
  return ds;
}

struct NormalizeOptions {
  // Use train-set min/max for numeric columns without a declared range.
  // This reveals private feature ranges, so a warning is written.
  bool ranges_from_data = false;
  std::ostream* warnings = &std::cerr;
};

struct Range {
  double min = 0.0;
  double max = 1.0;
};

// Per-column affine ranges implied by the schema (and, when enabled, by the
// data in `ds`). Index-aligned with ds.columns.
inline std::vector<Range> resolve_ranges(const Dataset& ds, const Schema& schema,
                                         const NormalizeOptions& opts = {}) {
  std::vector<Range> ranges(ds.columns.size());
  bool warned = false;
  for (std::size_t j = 0; j < ds.columns.size(); ++j) {
    const auto& col = ds.columns[j];
    switch (col.kind) {
      case ColumnKind::kCategorical:
        ranges[j] = {0.0, 1.0};
        break;
      case ColumnKind::kOrdinal:
        if (col.level_count < 2) {
          throw Error("degenerate range for ordinal column '" + col.source + "'");
        }
        ranges[j] = {0.0, static_cast<double>(col.level_count - 1)};
        break;
      default: {
        const ColumnSpec* spec = schema.find(col.source);
        if (spec && spec->min) {
          ranges[j] = {*spec->min, *spec->max};
        } else if (opts.ranges_from_data) {
          if (!warned && opts.warnings) {
            *opts.warnings
                << "warning: numeric ranges computed from training data; this "
                   "leaks private feature ranges and voids the privacy "
                   "guarantee for those columns\n";
            warned = true;
          }
          const auto c = ds.X.col(static_cast<Eigen::Index>(j));
          ranges[j] = {c.minCoeff(), c.maxCoeff()};
        } else {
          throw Error("missing range for numeric column '" + col.source + "'");
        }
        if (!(ranges[j].min < ranges[j].max)) {
          throw Error("degenerate range for column '" + col.source + "'");
        }
      }
    }
  }
  return ranges;
}

// v -> 2 (v - min) / (max - min) - 1, clamped to [-1, 1].
inline Dataset apply_ranges(const Dataset& ds, const std::vector<Range>& ranges) {
  if (ranges.size() != ds.columns.size()) throw Error("range count mismatch");
  Dataset out = ds;
  for (std::size_t j = 0; j < ranges.size(); ++j) {
    const Range r = ranges[j];
    auto c = out.X.col(static_cast<Eigen::Index>(j));
    for (Eigen::Index i = 0; i < c.size(); ++i) {
      c[i] = std::clamp(2.0 * (c[i] - r.min) / (r.max - r.min) - 1.0, -1.0, 1.0);
    }
  }
  out.normalized = true;
  out.check_invariants();
  return out;
}

inline Dataset normalize(const Dataset& ds, const Schema& schema,
                         const NormalizeOptions& opts = {}) {
  return apply_ranges(ds, resolve_ranges(ds, schema, opts));
}

// Equal numbers of +1 and -1 rows: the minority class is kept whole, the
// majority class is subsampled without replacement, and the result is
// shuffled.
inline Dataset balance(const Dataset& ds, SeededRng& rng) {
  IndexSet pos, neg;
  for (Eigen::Index i = 0; i < ds.n(); ++i) (ds.y[i] > 0 ? pos : neg).push_back(i);
  if (pos.empty() || neg.empty()) throw Error("balance: one class is absent");
  IndexSet& major = pos.size() >= neg.size() ? pos : neg;
  IndexSet& minor = pos.size() >= neg.size() ? neg : pos;
  // Partial Fisher-Yates: the first k slots become a uniform k-subset.
  const std::size_t k = minor.size();
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t j = i + rng.uniform_index(major.size() - i);
    std::swap(major[i], major[j]);
  }
  IndexSet rows(minor.begin(), minor.end());
  rows.insert(rows.end(), major.begin(), major.begin() + static_cast<std::ptrdiff_t>(k));
  rng.shuffle(std::span<Eigen::Index>(rows));
  return subset(ds, rows);
}

struct TrainTest {
  Dataset train;
  Dataset test;
};

// Uniformly random partition with |test| = round(test_frac * n).
inline TrainTest split(const Dataset& ds, double test_frac, SeededRng& rng) {
  if (!(test_frac > 0.0 && test_frac < 1.0)) {
    throw Error("split: test fraction must lie in (0, 1)");
  }
  const auto n = ds.n();
  const auto n_test = static_cast<Eigen::Index>(std::llround(test_frac * static_cast<double>(n)));
  if (n_test < 1 || n - n_test < 1) {
    throw Error("split: both parts must be non-empty");
  }
  IndexSet rows(static_cast<std::size_t>(n));
  std::iota(rows.begin(), rows.end(), Eigen::Index{0});
  rng.shuffle(std::span<Eigen::Index>(rows));
  const auto mid = rows.begin() + n_test;
  IndexSet test_rows(rows.begin(), mid);
  IndexSet train_rows(mid, rows.end());
  return {subset(ds, train_rows), subset(ds, test_rows)};
}

}  // namespace dpboost
