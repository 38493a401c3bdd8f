#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <set>

#include "exhird/eval/report.hpp"
#include "exhird/nn/random.hpp"

namespace exhird::eval {
namespace {

Phrase P(const std::string& s) { return split_words(s); }

std::vector<Phrase> Ps(std::initializer_list<const char*> list) {
  std::vector<Phrase> out;
  for (auto s : list) out.push_back(P(s));
  return out;
}

TEST(DupRatio, CountsRepeatsAfterStemming) {
  EXPECT_DOUBLE_EQ(dup_ratio(Ps({"a", "a", "b", "b", "a", "c"})), 0.5);
  EXPECT_DOUBLE_EQ(dup_ratio({}), 0.0);
  EXPECT_DOUBLE_EQ(dup_ratio(Ps({"neural networks", "neural network"})), 0.5);
  EXPECT_DOUBLE_EQ(dup_ratio(Ps({"x", "y"})), 0.0);
}

TEST(Match, UsesStemmedExactSequences) {
  EXPECT_TRUE(match(P("neural networks"), P("neural network")));
  EXPECT_FALSE(match(P("neural network"), P("network")));
  EXPECT_FALSE(match(P("network neural"), P("neural network")));
}

TEST(F1, ReferenceValues) {
  // 2 of 3 predictions correct, 4 gold: P = 2/3, R = 1/2, F1 = 4/7
  const auto gold = unique_stemmed(Ps({"a", "b", "c", "d"}));
  EXPECT_NEAR(f1_at_m(unique_stemmed(Ps({"a", "b", "x"})), gold).f1, 4.0 / 7.0, 1e-12);
  // same predictions at top 5 with placeholders: P = 2/5, R = 1/2, F1 = 4/9
  EXPECT_NEAR(f1_at_5(unique_stemmed(Ps({"a", "b", "x"})), gold).f1, 4.0 / 9.0, 1e-12);
  EXPECT_EQ(f1_at_m({}, gold).f1, 0.0);
}

TEST(F1, TopFiveTruncatesInGenerationOrder) {
  const auto gold = unique_stemmed(Ps({"f", "g"}));
  const auto preds = unique_stemmed(Ps({"a", "b", "c", "d", "e", "f", "g"}));
  EXPECT_EQ(f1_at_5(preds, gold).f1, 0.0);
  EXPECT_NEAR(f1_at_m(preds, gold).f1, 2 * (2.0 / 7) * 1.0 / (2.0 / 7 + 1.0), 1e-12);
}

TEST(F1, PlaceholdersNeverMatch) {
  const auto ph = placeholder_phrase(0);
  EXPECT_EQ(text::stem_phrase(ph), ph);
  EXPECT_TRUE(text::tokenize(ph.front()).size() > 1);
}

// Brute-force scorer on strings, used as an independent check.
struct Oracle {
  static std::string key(const Phrase& p) {
    std::string k;
    for (const auto& w : p) k += text::stem_word(w) + " ";
    return k;
  }
  static double f1(const std::vector<Phrase>& raw_preds, const std::vector<Phrase>& gold_raw, std::size_t k) {
    std::vector<std::string> preds, gold;
    for (const auto& p : raw_preds)
      if (std::find(preds.begin(), preds.end(), key(p)) == preds.end()) preds.push_back(key(p));
    for (const auto& g : gold_raw)
      if (std::find(gold.begin(), gold.end(), key(g)) == gold.end()) gold.push_back(key(g));
    if (k) {
      if (preds.size() > k) preds.resize(k);
      while (preds.size() < k) preds.push_back("#");
    }
    double hit = 0;
    for (const auto& p : preds) hit += std::count(gold.begin(), gold.end(), p);
    if (hit == 0) return 0.0;
    const double pr = hit / preds.size(), rc = hit / gold.size();
    return 2 * pr * rc / (pr + rc);
  }
};

TEST(F1, AgreesWithBruteForceOnConstructedCases) {
  const char* pool[] = {"graph", "graphs", "slam", "loop closure", "loop closures", "map", "mapping",
                        "pose graph", "pose graphs", "kalman filter", "octree", "kalman filters"};
  nn::Rng rng(2024);
  for (int trial = 0; trial < 60; ++trial) {
    std::vector<Phrase> preds, gold;
    for (std::size_t k = 0, n = rng.below(9); k < n; ++k) preds.push_back(P(pool[rng.below(12)]));
    for (std::size_t k = 0, n = 1 + rng.below(5); k < n; ++k) gold.push_back(P(pool[rng.below(12)]));
    const auto up = unique_stemmed(preds), ug = unique_stemmed(gold);
    EXPECT_NEAR(f1_at_m(up, ug).f1, Oracle::f1(preds, gold, 0), 1e-12) << trial;
    EXPECT_NEAR(f1_at_5(up, ug).f1, Oracle::f1(preds, gold, 5), 1e-12) << trial;
  }
}

TEST(PredictionSet, SplitsByOccurrenceInTheDocument) {
  text::RawSample s{"Loop closures in graph SLAM", "", {}};
  const auto doc = stemmed_document(s);
  auto set = make_prediction_set(Ps({"loop closure", "octree", "graph slam", "loop closures", "slam graph"}), doc);
  EXPECT_EQ(set.unique_stemmed.size(), 4u);
  EXPECT_EQ(set.present, unique_stemmed(Ps({"loop closure", "graph slam"})));
  EXPECT_EQ(set.absent, unique_stemmed(Ps({"octree", "slam graph"})));
}

TEST(Report, EmptyGoldSplitsAreLeftOutOfTheAverage) {
  std::vector<text::RawSample> gold{
      {"graph slam", "loop closure", {"graph slam", "octree"}},
      {"kalman filter", "", {"kalman filter"}},  // no absent gold
  };
  std::vector<std::vector<Phrase>> preds{Ps({"graph slam", "graph slam", "octree", "loop"}), Ps({"filter"})};
  auto r = corpus_report(preds, gold);
  EXPECT_EQ(r.present.documents, 2u);
  EXPECT_EQ(r.absent.documents, 1u);
  // doc 1 present: {graph slam, loop} vs {graph slam} -> P 1/2, R 1 -> 2/3, doc 2: 0
  EXPECT_NEAR(r.present.f1_at_m, (2.0 / 3.0 + 0.0) / 2, 1e-12);
  // doc 1 absent: {octree} vs {octree} -> 1
  EXPECT_NEAR(r.absent.f1_at_m, 1.0, 1e-12);
  EXPECT_NEAR(r.absent.f1_at_5, 2 * 0.2 / 1.2, 1e-12);
  EXPECT_NEAR(r.dup_ratio, (0.25 + 0.0) / 2, 1e-12);
  EXPECT_NEAR(r.avg_present, (2 + 1) / 2.0, 1e-12);
  EXPECT_NEAR(r.avg_absent, 0.5, 1e-12);
  EXPECT_FALSE(r.per_document[1].absent_m.has_value());
  EXPECT_THROW(corpus_report(std::vector<std::vector<Phrase>>{}, gold), DataError);
}

TEST(Report, PredictionFilesRoundTrip) {
  const auto path = std::filesystem::temp_directory_path() / "exhird_preds.jsonl";
  std::vector<PredictionRecord> recs{{{"graph slam"}, {"octree"}, {"graph slam", "octree", "graph slam"}}, {}};
  write_predictions(path.string(), recs);
  auto back = read_predictions(path.string());
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[0].raw_sequence, recs[0].raw_sequence);
  EXPECT_EQ(back[0].present, recs[0].present);
  EXPECT_TRUE(back[1].raw_sequence.empty());
  auto phrases = raw_phrases(back);
  EXPECT_EQ(phrases[0].size(), 3u);
  std::filesystem::remove(path);
}

TEST(Report, JsonCarriesHeadlineNumbers) {
  MetricsReport r;
  r.present.f1_at_m = 0.25;
  r.dup_ratio = 0.1;
  auto j = to_json(r, false);
  EXPECT_EQ(j.at("present").at("F1@M"), 0.25);
  EXPECT_EQ(j.at("DupRatio"), 0.1);
  EXPECT_FALSE(j.contains("per_document"));
  std::ostringstream os;
  print_table(os, {{"ExHiRD-h", r}});
  EXPECT_NE(os.str().find("0.250"), std::string::npos);
}

}  // namespace
}  // namespace exhird::eval
