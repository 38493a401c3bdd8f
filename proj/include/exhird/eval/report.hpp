#pragma once

#include <nlohmann/json.hpp>

#include <cstdio>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "exhird/errors.hpp"
#include "exhird/eval/metrics.hpp"
#include "exhird/text/corpus_io.hpp"

namespace exhird::eval {

/// One line of a predictions file. Phrases are space-joined words;
/// raw_sequence keeps generation order and repeats.
struct PredictionRecord {
  std::vector<std::string> present;
  std::vector<std::string> absent;
  std::vector<std::string> raw_sequence;
};

inline void write_predictions(const std::string& path, const std::vector<PredictionRecord>& records) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write predictions " + path);
  for (const auto& r : records) {
    nlohmann::json j{{"present", r.present}, {"absent", r.absent}, {"raw_sequence", r.raw_sequence}};
    out << j.dump() << '\n';
  }
}

inline std::vector<PredictionRecord> read_predictions(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open predictions " + path);
  std::vector<PredictionRecord> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      auto j = nlohmann::json::parse(line);
      PredictionRecord r;
      r.present = j.value("present", std::vector<std::string>{});
      r.absent = j.value("absent", std::vector<std::string>{});
      r.raw_sequence = j.at("raw_sequence").get<std::vector<std::string>>();
      out.push_back(std::move(r));
    } catch (const nlohmann::json::exception& e) {
      throw DataError(path + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

struct SplitScores {
  double f1_at_m = 0.0;
  double f1_at_5 = 0.0;
  std::size_t documents = 0;  // documents with a non-empty gold split
};

struct DocumentMetrics {
  std::optional<Score> present_m, present_5, absent_m, absent_5;  // empty when the gold split is empty
  double dup_ratio = 0.0;
  std::size_t predictions = 0;
  std::size_t unique_present = 0;
  std::size_t unique_absent = 0;
  std::size_t gold_present = 0;
  std::size_t gold_absent = 0;
};

struct MetricsReport {
  SplitScores present;
  SplitScores absent;
  double dup_ratio = 0.0;    // mean per document
  double avg_present = 0.0;  // #PK, unique present predictions per document
  double avg_absent = 0.0;   // #AK
  std::size_t documents = 0;
  std::vector<DocumentMetrics> per_document;
};

/// Stemmed gold phrases of a sample, deduplicated, split by presence.
inline std::pair<std::vector<Phrase>, std::vector<Phrase>> gold_split(const text::RawSample& sample,
                                                                     const std::vector<std::string>& stemmed_doc) {
  std::vector<Phrase> gold;
  for (const auto& kp : sample.keyphrases) {
    auto w = text::preprocess_phrase(kp);
    if (!w.empty()) gold.push_back(std::move(w));
  }
  std::vector<Phrase> present, absent;
  for (auto& g : unique_stemmed(gold)) (occurs_in(stemmed_doc, g) ? present : absent).push_back(std::move(g));
  return {std::move(present), std::move(absent)};
}

inline std::vector<std::string> stemmed_document(const text::RawSample& sample) {
  return text::stem_phrase(text::tokenize(sample.title + " " + sample.abstract));
}

inline Phrase split_words(const std::string& phrase) {
  Phrase out;
  std::istringstream is(phrase);
  for (std::string w; is >> w;) out.push_back(w);
  return out;
}

inline DocumentMetrics document_metrics(const std::vector<Phrase>& raw_predictions, const text::RawSample& sample) {
  const auto stemmed_doc = stemmed_document(sample);
  const auto preds = make_prediction_set(raw_predictions, stemmed_doc);
  const auto [gold_present, gold_absent] = gold_split(sample, stemmed_doc);
  DocumentMetrics d;
  d.dup_ratio = dup_ratio(preds.raw_ordered);
  d.predictions = preds.raw_ordered.size();
  d.unique_present = preds.present.size();
  d.unique_absent = preds.absent.size();
  d.gold_present = gold_present.size();
  d.gold_absent = gold_absent.size();
  if (!gold_present.empty()) {
    d.present_m = f1_at_m(preds.present, gold_present);
    d.present_5 = f1_at_5(preds.present, gold_present);
  }
  if (!gold_absent.empty()) {
    d.absent_m = f1_at_m(preds.absent, gold_absent);
    d.absent_5 = f1_at_5(preds.absent, gold_absent);
  }
  return d;
}

/// Macro-averaged metrics. Documents with an empty gold split are left out
/// of that split's F1 averages; DupRatio, #PK and #AK average over all
/// documents.
inline MetricsReport corpus_report(const std::vector<std::vector<Phrase>>& predictions,
                                   const std::vector<text::RawSample>& gold) {
  if (predictions.size() != gold.size())
    throw DataError("predictions cover " + std::to_string(predictions.size()) + " documents but the gold corpus has " +
                    std::to_string(gold.size()));
  MetricsReport r;
  r.documents = gold.size();
  for (std::size_t i = 0; i < gold.size(); ++i) {
    auto d = document_metrics(predictions[i], gold[i]);
    if (d.present_m) {
      r.present.f1_at_m += d.present_m->f1;
      r.present.f1_at_5 += d.present_5->f1;
      ++r.present.documents;
    }
    if (d.absent_m) {
      r.absent.f1_at_m += d.absent_m->f1;
      r.absent.f1_at_5 += d.absent_5->f1;
      ++r.absent.documents;
    }
    r.dup_ratio += d.dup_ratio;
    r.avg_present += static_cast<double>(d.unique_present);
    r.avg_absent += static_cast<double>(d.unique_absent);
    r.per_document.push_back(std::move(d));
  }
  auto mean = [](double& v, std::size_t n) { v = n ? v / static_cast<double>(n) : 0.0; };
  mean(r.present.f1_at_m, r.present.documents);
  mean(r.present.f1_at_5, r.present.documents);
  mean(r.absent.f1_at_m, r.absent.documents);
  mean(r.absent.f1_at_5, r.absent.documents);
  mean(r.dup_ratio, r.documents);
  mean(r.avg_present, r.documents);
  mean(r.avg_absent, r.documents);
  return r;
}

inline std::vector<std::vector<Phrase>> raw_phrases(const std::vector<PredictionRecord>& records) {
  std::vector<std::vector<Phrase>> out;
  for (const auto& r : records) {
    std::vector<Phrase> doc;
    for (const auto& p : r.raw_sequence) {
      auto w = split_words(p);
      if (!w.empty()) doc.push_back(std::move(w));
    }
    out.push_back(std::move(doc));
  }
  return out;
}

inline MetricsReport corpus_report(const std::vector<PredictionRecord>& records, const std::vector<text::RawSample>& gold) {
  return corpus_report(raw_phrases(records), gold);
}

namespace detail {
inline nlohmann::json score_json(const std::optional<Score>& s) {
  if (!s) return nullptr;
  return {{"precision", s->precision}, {"recall", s->recall}, {"f1", s->f1}};
}
}  // namespace detail

inline nlohmann::json to_json(const MetricsReport& r, bool per_document = true) {
  nlohmann::json j{
      {"present", {{"F1@M", r.present.f1_at_m}, {"F1@5", r.present.f1_at_5}, {"documents", r.present.documents}}},
      {"absent", {{"F1@M", r.absent.f1_at_m}, {"F1@5", r.absent.f1_at_5}, {"documents", r.absent.documents}}},
      {"DupRatio", r.dup_ratio},
      {"avg_PK", r.avg_present},
      {"avg_AK", r.avg_absent},
      {"documents", r.documents}};
  if (per_document) {
    auto docs = nlohmann::json::array();
    for (const auto& d : r.per_document) {
      docs.push_back({{"present_F1@M", detail::score_json(d.present_m)},
                      {"present_F1@5", detail::score_json(d.present_5)},
                      {"absent_F1@M", detail::score_json(d.absent_m)},
                      {"absent_F1@5", detail::score_json(d.absent_5)},
                      {"DupRatio", d.dup_ratio},
                      {"predictions", d.predictions},
                      {"PK", d.unique_present},
                      {"AK", d.unique_absent},
                      {"gold_present", d.gold_present},
                      {"gold_absent", d.gold_absent}});
    }
    j["per_document"] = std::move(docs);
  }
  return j;
}

inline void write_report(const std::string& path, const nlohmann::json& j) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write report " + path);
  out << j.dump(2) << '\n';
}

inline std::string format_cell(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

/// Table rows: model name, present F1@M, F1@5, absent F1@M, F1@5, DupRatio,
/// #PK, #AK.
inline void print_table(std::ostream& os, const std::vector<std::pair<std::string, MetricsReport>>& rows) {
  std::size_t name_width = 5;
  for (const auto& [name, r] : rows) name_width = std::max(name_width, name.size());
  os << std::left << std::setw(static_cast<int>(name_width)) << "Model"
     << " | Present F1@M  F1@5 | Absent F1@M  F1@5 | DupRatio |   #PK    #AK\n";
  for (const auto& [name, r] : rows) {
    os << std::left << std::setw(static_cast<int>(name_width)) << name << " | " << std::right << std::setw(12)
       << format_cell(r.present.f1_at_m) << ' ' << std::setw(5) << format_cell(r.present.f1_at_5) << " | "
       << std::setw(11) << format_cell(r.absent.f1_at_m) << ' ' << std::setw(5) << format_cell(r.absent.f1_at_5)
       << " | " << std::setw(8) << format_cell(r.dup_ratio) << " | " << std::setw(5) << format_cell(r.avg_present)
       << "  " << std::setw(5) << format_cell(r.avg_absent) << '\n';
  }
}

}  // namespace exhird::eval
