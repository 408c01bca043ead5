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

// Config-driven epsilon sweeps.
//
// For every repeat r the encoded dataset is balanced and split with the
// shuffle stream of repeat r; every (algorithm, epsilon) cell of that
// repeat then fits on the same train/test pair using its own streams.
// Cells run on a small thread pool and records are returned in
// (algorithm, epsilon, repeat) order whatever the completion order.

#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "dpboost/boosting.hpp"
#include "dpboost/data.hpp"
#include "dpboost/error.hpp"
#include "dpboost/logreg.hpp"
#include "dpboost/model.hpp"
#include "dpboost/noise.hpp"
#include "dpboost/pate.hpp"
#include "dpboost/rng.hpp"
#include "dpboost/toy.hpp"
#include "json.hpp"

namespace dpboost {

enum class Algorithm { kBrc, kBrcAllPrivate, kLogReg, kDpLogReg, kPate, kPublicOnly };

inline std::string_view to_string(Algorithm a) {
  switch (a) {
    case Algorithm::kBrc: return "brc";
    case Algorithm::kBrcAllPrivate: return "brc-all-private";
    case Algorithm::kLogReg: return "logreg";
    case Algorithm::kDpLogReg: return "dp-logreg";
    case Algorithm::kPate: return "pate";
    default: return "public-only";
  }
}

inline Algorithm parse_algorithm(std::string_view s) {
  for (Algorithm a : {Algorithm::kBrc, Algorithm::kBrcAllPrivate, Algorithm::kLogReg,
                      Algorithm::kDpLogReg, Algorithm::kPate, Algorithm::kPublicOnly}) {
    if (to_string(a) == s) return a;
  }
  throw Error("unknown algorithm '" + std::string(s) + "'");
}

// Non-private algorithms ignore epsilon and run once per repeat.
inline bool is_private(Algorithm a) {
  return a != Algorithm::kLogReg && a != Algorithm::kPublicOnly;
}

inline bool is_boosting(Algorithm a) {
  return a == Algorithm::kBrc || a == Algorithm::kBrcAllPrivate;
}

struct ExperimentConfig {
  std::string dataset;
  std::string schema;
  std::vector<std::string> public_columns;
  std::vector<Algorithm> algorithms;
  std::vector<double> epsilons;
  int T = 25;
  double c1 = std::sqrt(2.0);
  double c2 = std::sqrt(2.0);
  int repeats = 10;
  std::uint64_t seed = 1;
  double test_frac = 0.1;
  std::string output_dir = "out";
  bool ranges_from_data = false;
  bool trace = false;  // per-round test accuracy for boosting cells
  LogRegHyper hyper;
  int pate_teachers = 25;

  void validate() const {
    if (algorithms.empty()) throw Error("config: no algorithm");
    if (repeats < 1) throw Error("config: repeats must be >= 1");
    if (T < 1) throw Error("config: T must be >= 1");
    if (!(test_frac > 0.0 && test_frac < 1.0)) throw Error("config: test_frac must lie in (0, 1)");
    hyper.validate();
    const bool any_private = std::any_of(algorithms.begin(), algorithms.end(), is_private);
    if (any_private && epsilons.empty()) throw Error("config: empty epsilon list");
    for (double e : epsilons) {
      if (!(e > 0.0)) throw Error("config: epsilon values must be positive");
    }
  }
};

inline ExperimentConfig experiment_config_from_json(const nlohmann::json& j,
                                                    const std::filesystem::path& base = {}) {
  ExperimentConfig c;
  auto path_of = [&](const std::string& key) {
    std::filesystem::path p = j.at(key).get<std::string>();
    if (p.is_relative() && !base.empty()) p = base / p;
    return p.string();
  };
  try {
    c.dataset = path_of("dataset");
    c.schema = path_of("schema");
    c.public_columns = j.value("public_columns", std::vector<std::string>{});
    if (j.contains("algorithms")) {
      for (const auto& a : j.at("algorithms")) c.algorithms.push_back(parse_algorithm(a.get<std::string>()));
    } else {
      c.algorithms.push_back(parse_algorithm(j.at("algorithm").get<std::string>()));
    }
    c.epsilons = j.value("epsilons", std::vector<double>{});
    c.T = j.value("T", c.T);
    c.c1 = j.value("c1", c.c1);
    c.c2 = j.value("c2", c.c2);
    c.repeats = j.value("repeats", c.repeats);
    c.seed = j.value("seed", c.seed);
    c.test_frac = j.value("test_frac", c.test_frac);
    c.output_dir = j.value("output_dir", c.output_dir);
    if (std::filesystem::path(c.output_dir).is_relative() && !base.empty()) {
      c.output_dir = (base / c.output_dir).string();
    }
    c.ranges_from_data = j.value("ranges_from_data", false);
    c.trace = j.value("trace", false);
    c.hyper.lambda = j.value("lambda", c.hyper.lambda);
    c.hyper.max_iters = j.value("max_iters", c.hyper.max_iters);
    c.hyper.step = j.value("step", c.hyper.step);
    c.hyper.tol = j.value("tol", c.hyper.tol);
    c.pate_teachers = j.value("pate_teachers", c.pate_teachers);
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("config: ") + e.what());
  }
  c.validate();
  return c;
}

inline ExperimentConfig load_experiment_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open config '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw Error("config '" + path + "': " + e.what());
  }
  return experiment_config_from_json(j, std::filesystem::path(path).parent_path());
}

struct ResultRecord {
  Algorithm algorithm = Algorithm::kBrc;
  std::optional<double> epsilon;  // empty for non-private algorithms
  int repeat = 0;
  std::uint64_t seed = 0;
  std::map<std::string, std::uint64_t> streams;
  double test_accuracy = std::numeric_limits<double>::quiet_NaN();
  double train_accuracy = std::numeric_limits<double>::quiet_NaN();
  double wall_seconds = 0.0;
  std::vector<RoundRecord> rounds;
  std::vector<double> trace;  // test accuracy of H_1 .. H_T
  std::string error;          // non-empty when the cell failed

  bool ok() const { return error.empty(); }
};

// Wall time is left out so that records from identical runs are identical.
inline nlohmann::json to_json(const ResultRecord& r) {
  nlohmann::json j;
  j["algorithm"] = std::string(to_string(r.algorithm));
  j["epsilon"] = r.epsilon ? nlohmann::json(*r.epsilon) : nlohmann::json(nullptr);
  j["repeat"] = r.repeat;
  j["seed"] = r.seed;
  j["streams"] = r.streams;
  if (r.ok()) {
    j["test_accuracy"] = r.test_accuracy;
    j["train_accuracy"] = r.train_accuracy;
  } else {
    j["error"] = r.error;
  }
  if (!r.rounds.empty()) {
    nlohmann::json rounds = nlohmann::json::array();
    for (const auto& rec : r.rounds) rounds.push_back(to_json(rec));
    j["rounds"] = std::move(rounds);
  }
  if (!r.trace.empty()) j["trace"] = r.trace;
  return j;
}

// Worker count: `requested` if positive, else DPBOOST_WORKERS, else the
// hardware concurrency.
inline unsigned resolve_workers(int requested = 0) {
  if (requested > 0) return static_cast<unsigned>(requested);
  if (const char* env = std::getenv("DPBOOST_WORKERS")) {
    const int v = std::atoi(env);
    if (v > 0) return static_cast<unsigned>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

// Runs job(i) for i in [0, count) on up to `workers` threads.
template <typename Job>
void parallel_for(std::size_t count, unsigned workers, Job&& job) {
  workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(count)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) job(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) job(i);
    });
  }
  for (auto& t : pool) t.join();
}

struct PreparedRepeat {
  TrainTest data;
  FeatureSplit split;
  std::string error;
};

// Balance, split and normalize one repeat.
inline PreparedRepeat prepare_repeat(const Dataset& encoded, const Schema& schema,
                                     const ExperimentConfig& cfg, int repeat) {
  PreparedRepeat out;
  try {
    SeededRng rng(cfg.seed, stream_id(0, static_cast<std::uint64_t>(repeat), Purpose::kShuffle));
    const Dataset balanced = balance(encoded, rng);
    TrainTest tt = split(balanced, cfg.test_frac, rng);
    NormalizeOptions nopts;
    nopts.ranges_from_data = cfg.ranges_from_data;
    nopts.warnings = repeat == 0 ? &std::cerr : nullptr;
    const auto ranges = resolve_ranges(tt.train, schema, nopts);
    out.data.train = apply_ranges(tt.train, ranges);
    out.data.test = apply_ranges(tt.test, ranges);
    out.split = make_split(out.data.train, cfg.public_columns);
  } catch (const std::exception& e) {
    out.error = e.what();
  }
  return out;
}

struct CellSpec {
  Algorithm algorithm;
  std::optional<double> epsilon;
  std::size_t eps_index = 0;
  int repeat = 0;
};

inline ResultRecord run_cell(const CellSpec& cell, const PreparedRepeat& prep,
                             const ExperimentConfig& cfg) {
  ResultRecord rec;
  rec.algorithm = cell.algorithm;
  rec.epsilon = cell.epsilon;
  rec.repeat = cell.repeat;
  rec.seed = cfg.seed;
  const auto r = static_cast<std::uint64_t>(cell.repeat);
  const std::uint64_t cell_id = cell.epsilon ? cell.eps_index + 1 : 0;
  rec.streams["shuffle"] = stream_id(0, r, Purpose::kShuffle);
  const auto start = std::chrono::steady_clock::now();
  try {
    if (!prep.error.empty()) throw Error(prep.error);
    const Dataset& train = prep.data.train;
    const Dataset& test = prep.data.test;
    auto fit_boosting = [&](bool all_private) {
      const auto cs = stream_id(cell_id, r, Purpose::kPrivateClassifiers);
      const auto ls = stream_id(cell_id, r, Purpose::kLaplace);
      rec.streams["private_classifiers"] = cs;
      rec.streams["laplace"] = ls;
      SeededRng clf_rng(cfg.seed, cs), lap_rng(cfg.seed, ls);
      const PrivacyParams p{*cell.epsilon, cfg.T, cfg.c1, cfg.c2, train.n()};
      FitResult fit = all_private
          ? brc_fit_all_private(train, p, {clf_rng, lap_rng})
          : brc_fit(train, prep.split, p, CachedLogRegLearner{cfg.hyper}, {clf_rng, lap_rng});
      rec.train_accuracy = accuracy_of(fit.ensemble.predict_all(train.X), train.y);
      rec.test_accuracy = accuracy_of(fit.ensemble.predict_all(test.X), test.y);
      if (cfg.trace) {
        for (std::size_t t = 1; t <= fit.ensemble.members.size(); ++t) {
          rec.trace.push_back(accuracy_of(fit.ensemble.predict_prefix(test.X, t), test.y));
        }
      }
      rec.rounds = std::move(fit.rounds);
    };
    auto score_linear = [&](const LinearClassifier& c) {
      rec.train_accuracy = accuracy_of(c.predict_all(train.X), train.y);
      rec.test_accuracy = accuracy_of(c.predict_all(test.X), test.y);
    };
    switch (cell.algorithm) {
      case Algorithm::kBrc: fit_boosting(false); break;
      case Algorithm::kBrcAllPrivate: fit_boosting(true); break;
      case Algorithm::kLogReg: score_linear(fit_logreg(train, train.all_columns(), cfg.hyper)); break;
      case Algorithm::kPublicOnly: {
        if (prep.split.public_cols.empty()) throw Error("public-only: no public columns");
        score_linear(fit_logreg(train, prep.split.public_cols, cfg.hyper));
        break;
      }
      case Algorithm::kDpLogReg: {
        const auto bs = stream_id(cell_id, r, Purpose::kBaselineNoise);
        rec.streams["baseline_noise"] = bs;
        SeededRng rng(cfg.seed, bs);
        score_linear(fit_dp_logreg(train, train.all_columns(), *cell.epsilon, cfg.hyper, rng));
        break;
      }
      case Algorithm::kPate: {
        const auto bs = stream_id(cell_id, r, Purpose::kBaselineNoise);
        rec.streams["baseline_noise"] = bs;
        SeededRng rng(cfg.seed, bs);
        PateConfig pc;
        pc.k_teachers = cfg.pate_teachers;
        pc.test_queries = test.n();
        pc.teacher_hyper = cfg.hyper;
        pc.student_hyper = cfg.hyper;
        const PateModel m = fit_pate(train, prep.split, *cell.epsilon, pc, rng);
        rec.train_accuracy = accuracy_of(
            m.student.predict_all(m.student_features(train.X, m.train_votes)), train.y);
        rec.test_accuracy = accuracy_of(m.predict_all(test.X, rng), test.y);
        break;
      }
    }
  } catch (const std::exception& e) {
    rec.error = e.what();
    rec.rounds.clear();
    rec.trace.clear();
  }
  rec.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return rec;
}

// Cells in output order: algorithm-major, then epsilon, then repeat.
inline std::vector<CellSpec> plan_cells(const ExperimentConfig& cfg) {
  std::vector<CellSpec> cells;
  for (Algorithm a : cfg.algorithms) {
    if (is_private(a)) {
      for (std::size_t e = 0; e < cfg.epsilons.size(); ++e) {
        for (int r = 0; r < cfg.repeats; ++r) cells.push_back({a, cfg.epsilons[e], e, r});
      }
    } else {
      for (int r = 0; r < cfg.repeats; ++r) cells.push_back({a, std::nullopt, 0, r});
    }
  }
  return cells;
}

inline std::vector<ResultRecord> run_experiment(const ExperimentConfig& cfg, const Dataset& encoded,
                                                const Schema& schema, int workers = 0) {
  cfg.validate();
  const unsigned nw = resolve_workers(workers);
  std::vector<PreparedRepeat> preps(static_cast<std::size_t>(cfg.repeats));
  parallel_for(preps.size(), nw, [&](std::size_t r) {
    preps[r] = prepare_repeat(encoded, schema, cfg, static_cast<int>(r));
  });
  const auto cells = plan_cells(cfg);
  std::vector<ResultRecord> records(cells.size());
  parallel_for(cells.size(), nw, [&](std::size_t i) {
    records[i] = run_cell(cells[i], preps[static_cast<std::size_t>(cells[i].repeat)], cfg);
  });
  return records;
}

inline std::vector<ResultRecord> run_experiment(const ExperimentConfig& cfg, int workers = 0) {
  const Schema schema = load_schema(cfg.schema);
  const Dataset encoded = encode(load_csv(cfg.dataset, schema), schema);
  return run_experiment(cfg, encoded, schema, workers);
}

struct SummaryRow {
  std::string algorithm;
  double epsilon = std::numeric_limits<double>::infinity();  // inf: non-private
  double mean = 0.0;
  double std = 0.0;  // sample std; 0 when count is 1
  std::size_t count = 0;
};

// Mean and n-1 std of test accuracy per (algorithm, epsilon), in order of
// first appearance. Failed cells are skipped.
inline std::vector<SummaryRow> aggregate(const std::vector<ResultRecord>& records) {
  if (records.empty()) throw Error("aggregate: no records");
  std::vector<SummaryRow> rows;
  std::vector<std::vector<double>> values;
  for (const auto& r : records) {
    if (!r.ok()) continue;
    const std::string alg(to_string(r.algorithm));
    const double eps = r.epsilon.value_or(std::numeric_limits<double>::infinity());
    std::size_t k = 0;
    while (k < rows.size() && !(rows[k].algorithm == alg && rows[k].epsilon == eps)) ++k;
    if (k == rows.size()) {
      rows.push_back({alg, eps, 0.0, 0.0, 0});
      values.emplace_back();
    }
    values[k].push_back(r.test_accuracy);
  }
  if (rows.empty()) throw Error("aggregate: every cell failed");
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const auto& v = values[k];
    double sum = 0.0;
    for (double x : v) sum += x;
    const double mean = sum / static_cast<double>(v.size());
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    rows[k].mean = mean;
    rows[k].count = v.size();
    rows[k].std = v.size() > 1 ? std::sqrt(ss / static_cast<double>(v.size() - 1)) : 0.0;
  }
  return rows;
}

inline std::string format_double(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline void write_summary_csv(const std::vector<SummaryRow>& rows, std::ostream& out) {
  if (rows.empty()) throw Error("emit_csv: empty summary");
  out << "algorithm,epsilon,mean_accuracy,std,count\n";
  for (const auto& r : rows) {
    out << r.algorithm << ',' << format_double(r.epsilon) << ',' << format_double(r.mean) << ','
        << format_double(r.std) << ',' << r.count << '\n';
  }
}

inline void emit_csv(const std::vector<SummaryRow>& rows, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path + "'");
  write_summary_csv(rows, out);
  if (!out) throw Error("write failed for '" + path + "'");
}

inline std::vector<SummaryRow> parse_summary_csv(std::string_view text) {
  std::vector<SummaryRow> rows;
  std::size_t pos = 0;
  std::vector<std::string> f;
  if (!detail::next_csv_record(text, pos, f) || f.size() != 5 || f[0] != "algorithm") {
    throw Error("summary csv: bad header");
  }
  while (detail::next_csv_record(text, pos, f)) {
    if (detail::is_blank_record(f)) continue;
    if (f.size() != 5) throw Error("summary csv: ragged row");
    SummaryRow r;
    r.algorithm = f[0];
    r.epsilon = std::strtod(f[1].c_str(), nullptr);
    r.mean = std::strtod(f[2].c_str(), nullptr);
    r.std = std::strtod(f[3].c_str(), nullptr);
    r.count = static_cast<std::size_t>(std::strtoull(f[4].c_str(), nullptr, 10));
    rows.push_back(std::move(r));
  }
  return rows;
}

inline std::vector<SummaryRow> read_summary_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_summary_csv(buf.str());
}

namespace detail {

inline std::string xml_escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

inline std::string fixed(double v, int digits = 2) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

}  // namespace detail

// Line chart of mean accuracy against log10(epsilon) with +-1 std bars.
// Non-private rows are drawn as dashed horizontal reference lines.
inline void write_svg(const std::vector<SummaryRow>& rows, std::ostream& out) {
  if (rows.empty()) throw Error("emit_svg: empty summary");
  constexpr double W = 640, H = 420, L = 70, R = 170, Tm = 30, B = 60;
  std::vector<std::string> algs;
  for (const auto& r : rows) {
    if (std::find(algs.begin(), algs.end(), r.algorithm) == algs.end()) algs.push_back(r.algorithm);
  }
  double emin = std::numeric_limits<double>::infinity(), emax = -emin;
  double amin = 1.0, amax = 0.0;
  for (const auto& r : rows) {
    if (std::isfinite(r.epsilon) && r.epsilon > 0) {
      emin = std::min(emin, std::log10(r.epsilon));
      emax = std::max(emax, std::log10(r.epsilon));
    }
    amin = std::min(amin, r.mean - r.std);
    amax = std::max(amax, r.mean + r.std);
  }
  if (!std::isfinite(emin)) emin = -2, emax = 0;
  if (emax - emin < 1e-9) emin -= 0.5, emax += 0.5;
  amin = std::max(0.0, std::floor(amin * 20.0) / 20.0);
  amax = std::min(1.0, std::ceil(amax * 20.0) / 20.0);
  if (amax - amin < 0.05) amax = std::min(1.0, amin + 0.1), amin = amax - 0.1;
  const double pw = W - L - R, ph = H - Tm - B;
  auto sx = [&](double le) { return L + (le - emin) / (emax - emin) * pw; };
  auto sy = [&](double a) { return Tm + (amax - a) / (amax - amin) * ph; };
  static const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                  "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};
  using detail::fixed;

  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
      << "\" viewBox=\"0 0 " << W << ' ' << H << "\" font-family=\"sans-serif\" font-size=\"12\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<line x1=\"" << L << "\" y1=\"" << Tm + ph << "\" x2=\"" << L + pw << "\" y2=\""
      << Tm + ph << "\" stroke=\"black\"/>\n"
      << "<line x1=\"" << L << "\" y1=\"" << Tm << "\" x2=\"" << L << "\" y2=\"" << Tm + ph
      << "\" stroke=\"black\"/>\n";
  for (int k = static_cast<int>(std::ceil(emin - 1e-9)); k <= static_cast<int>(std::floor(emax + 1e-9)); ++k) {
    const double x = sx(k);
    out << "<line x1=\"" << fixed(x) << "\" y1=\"" << Tm + ph << "\" x2=\"" << fixed(x) << "\" y2=\""
        << Tm + ph + 5 << "\" stroke=\"black\"/>\n"
        << "<text x=\"" << fixed(x) << "\" y=\"" << Tm + ph + 18 << "\" text-anchor=\"middle\">1e"
        << k << "</text>\n";
  }
  for (double a = amin; a <= amax + 1e-9; a += 0.05) {
    out << "<text x=\"" << L - 8 << "\" y=\"" << fixed(sy(a) + 4) << "\" text-anchor=\"end\">"
        << fixed(a) << "</text>\n";
  }
  out << "<text x=\"" << L + pw / 2 << "\" y=\"" << H - 15
      << "\" text-anchor=\"middle\">epsilon (log scale)</text>\n"
      << "<text x=\"18\" y=\"" << Tm + ph / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 18 "
      << Tm + ph / 2 << ")\">test accuracy</text>\n";

  for (std::size_t k = 0; k < algs.size(); ++k) {
    const std::string color = kColors[k % 8];
    std::vector<const SummaryRow*> pts;
    for (const auto& r : rows) {
      if (r.algorithm == algs[k]) pts.push_back(&r);
    }
    std::ostringstream poly;
    const bool flat = pts.size() == 1 && !std::isfinite(pts[0]->epsilon);
    if (flat) {
      poly << fixed(L) << ',' << fixed(sy(pts[0]->mean)) << ' ' << fixed(L + pw) << ','
           << fixed(sy(pts[0]->mean));
    } else {
      std::sort(pts.begin(), pts.end(),
                [](const SummaryRow* a, const SummaryRow* b) { return a->epsilon < b->epsilon; });
      for (const auto* p : pts) {
        if (!std::isfinite(p->epsilon)) continue;
        poly << fixed(sx(std::log10(p->epsilon))) << ',' << fixed(sy(p->mean)) << ' ';
      }
    }
    out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\""
        << (flat ? " stroke-dasharray=\"6 4\"" : "") << " points=\"" << poly.str() << "\"/>\n";
    for (const auto* p : pts) {
      if (!std::isfinite(p->epsilon)) continue;
      const double x = sx(std::log10(p->epsilon));
      out << "<line x1=\"" << fixed(x) << "\" y1=\"" << fixed(sy(p->mean - p->std)) << "\" x2=\""
          << fixed(x) << "\" y2=\"" << fixed(sy(p->mean + p->std)) << "\" stroke=\"" << color
          << "\"/>\n"
          << "<circle cx=\"" << fixed(x) << "\" cy=\"" << fixed(sy(p->mean)) << "\" r=\"3\" fill=\""
          << color << "\"/>\n";
    }
    const double ly = Tm + 10 + 20.0 * static_cast<double>(k);
    out << "<line x1=\"" << L + pw + 15 << "\" y1=\"" << ly << "\" x2=\"" << L + pw + 40
        << "\" y2=\"" << ly << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n"
        << "<text x=\"" << L + pw + 46 << "\" y=\"" << ly + 4 << "\">"
        << detail::xml_escape(algs[k]) << "</text>\n";
  }
  out << "</svg>\n";
}

inline void emit_svg(const std::vector<SummaryRow>& rows, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path + "'");
  write_svg(rows, out);
  if (!out) throw Error("write failed for '" + path + "'");
}

inline void write_records_jsonl(const std::vector<ResultRecord>& records, std::ostream& out) {
  for (const auto& r : records) out << to_json(r).dump() << '\n';
}

inline void write_timings_csv(const std::vector<ResultRecord>& records, std::ostream& out) {
  out << "algorithm,epsilon,repeat,wall_seconds\n";
  for (const auto& r : records) {
    out << to_string(r.algorithm) << ','
        << format_double(r.epsilon.value_or(std::numeric_limits<double>::infinity())) << ','
        << r.repeat << ',' << detail::fixed(r.wall_seconds, 3) << '\n';
  }
}

// Mean per-round test accuracy over successful boosting records of one
// (algorithm, epsilon) group.
inline std::vector<double> mean_trace(const std::vector<ResultRecord>& records, Algorithm a,
                                      double epsilon) {
  std::vector<double> sum;
  std::size_t count = 0;
  for (const auto& r : records) {
    if (!r.ok() || r.algorithm != a || !r.epsilon || *r.epsilon != epsilon || r.trace.empty()) continue;
    if (sum.empty()) sum.assign(r.trace.size(), 0.0);
    if (r.trace.size() != sum.size()) throw Error("trace: length mismatch");
    for (std::size_t t = 0; t < sum.size(); ++t) sum[t] += r.trace[t];
    ++count;
  }
  if (count == 0) throw Error("trace: no traced records");
  for (double& v : sum) v /= static_cast<double>(count);
  return sum;
}

// Writes records.jsonl, summary.csv, summary.svg and timings.csv (and
// traces.csv when tracing) to cfg.output_dir.
inline void write_outputs(const ExperimentConfig& cfg, const std::vector<ResultRecord>& records) {
  namespace fs = std::filesystem;
  fs::create_directories(cfg.output_dir);
  const fs::path dir(cfg.output_dir);
  {
    std::ofstream out(dir / "records.jsonl", std::ios::binary);
    if (!out) throw Error("cannot write records.jsonl");
    write_records_jsonl(records, out);
  }
  {
    std::ofstream out(dir / "timings.csv", std::ios::binary);
    write_timings_csv(records, out);
  }
  const auto summary = aggregate(records);
  emit_csv(summary, (dir / "summary.csv").string());
  emit_svg(summary, (dir / "summary.svg").string());
  if (cfg.trace) {
    std::ofstream out(dir / "traces.csv", std::ios::binary);
    out << "algorithm,epsilon,round,mean_accuracy\n";
    for (Algorithm a : cfg.algorithms) {
      if (!is_boosting(a)) continue;
      for (double e : cfg.epsilons) {
        std::vector<double> tr;
        try {
          tr = mean_trace(records, a, e);
        } catch (const Error&) {
          continue;
        }
        for (std::size_t t = 0; t < tr.size(); ++t) {
          out << to_string(a) << ',' << format_double(e) << ',' << t + 1 << ','
              << format_double(tr[t]) << '\n';
        }
      }
    }
  }
}

inline ToyConfig toy_config_from_json(const nlohmann::json& j, std::vector<double>* epsilons) {
  ToyConfig c;
  try {
    c.n = j.value("n", c.n);
    c.p = j.value("p", c.p);
    c.T = j.value("T", c.T);
    c.c1 = j.value("c1", c.c1);
    c.c2 = j.value("c2", c.c2);
    c.repeats = j.value("repeats", c.repeats);
    c.seed = j.value("seed", c.seed);
    if (epsilons) *epsilons = j.at("epsilons").get<std::vector<double>>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("toy config: ") + e.what());
  }
  c.validate();
  return c;
}

}  // namespace dpboost
