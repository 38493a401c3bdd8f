#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "exhird/text/corpus_io.hpp"
#include "exhird/text/document.hpp"

namespace exhird::text {
namespace {

using Words = std::vector<std::string>;

TEST(Tokenizer, LowercasesAndCollapsesDigits) {
  EXPECT_EQ(tokenize("Graph SLAM 2019"), (Words{"graph", "slam", "<digit>"}));
  EXPECT_EQ(tokenize("mp3-based, v2.0"), (Words{"mp", "<digit>", "-", "based", ",", "v", "<digit>", ".", "<digit>"}));
  EXPECT_TRUE(tokenize(" \t\n").empty());
}

TEST(Tokenizer, SplitsKeyphrasesOnSemicolons) {
  EXPECT_EQ(split_keyphrases(" graph slam ;loop closure;; x "), (Words{"graph slam", "loop closure", "", "x"}));
}

// Expected stems come from NLTK 3.10's PorterStemmer in MARTIN_EXTENSIONS
// mode, which reproduces the reference C implementation.
TEST(PorterStemmer, MatchesReferenceImplementation) {
  const std::vector<std::pair<std::string, std::string>> cases = {
    {"a", "a"}, {"activate", "activ"}, {"adaptive", "adapt"}, {"adjustable", "adjust"},
    {"adjustment", "adjust"}, {"adoption", "adopt"}, {"agreed", "agre"}, {"aims", "aim"},
    {"airliner", "airlin"}, {"allowance", "allow"}, {"analogousli", "analog"}, {"angulariti", "angular"},
    {"anticipated", "anticip"}, {"app", "app"}, {"applied", "appli"}, {"applying", "appli"},
    {"appropriate", "appropri"}, {"as", "as"}, {"aspect", "aspect"}, {"aspects", "aspect"},
    {"attend", "attend"}, {"attention", "attent"}, {"attentional", "attent"}, {"automatic", "automat"},
    {"available", "avail"}, {"avoiding", "avoid"}, {"aware", "awar"}, {"based", "base"}, {"be", "be"},
    {"because", "becaus"}, {"begin", "begin"}, {"benchmark", "benchmark"}, {"benchmarks", "benchmark"},
    {"besides", "besid"}, {"between", "between"}, {"bidirectional", "bidirect"}, {"bigru", "bigru"},
    {"bled", "bled"}, {"bli", "bli"}, {"boldsymbol", "boldsymbol"}, {"bowdlerize", "bowdler"},
    {"calligraphy", "calligraphi"}, {"callousness", "callous"}, {"caress", "caress"}, {"caresses", "caress"},
    {"cats", "cat"}, {"cdot", "cdot"}, {"cease", "ceas"}, {"centering", "center"}, {"choose", "choos"},
    {"clustering", "cluster"}, {"collect", "collect"}, {"comments", "comment"}, {"communism", "commun"},
    {"comprehensive", "comprehens"}, {"conditional", "condit"}, {"conduct", "conduct"},
    {"conducted", "conduct"}, {"conflated", "conflat"}, {"conformabli", "conform"}, {"controll", "control"},
    {"copying", "copi"}, {"core", "core"}, {"correct", "correct"}, {"cutoff", "cutoff"}, {"dblp", "dblp"},
    {"debugging", "debug"}, {"decisiveness", "decis"}, {"decreasing", "decreas"}, {"defensible", "defens"},
    {"dependent", "depend"}, {"dialogue", "dialogu"}, {"differentli", "differ"}, {"digitizer", "digit"},
    {"distribution", "distribut"}, {"doc", "doc"}, {"does", "doe"}, {"dots", "dot"},
    {"dupratios", "dupratio"}, {"dysfunction", "dysfunct"}, {"each", "each"}, {"effective", "effect"},
    {"electrical", "electr"}, {"electriciti", "electr"}, {"else", "els"}, {"empirical", "empir"},
    {"employs", "emploi"}, {"encode", "encod"}, {"examine", "examin"}, {"exp", "exp"},
    {"expected", "expect"}, {"explored", "explor"}, {"extension", "extens"}, {"extensive", "extens"},
    {"failing", "fail"}, {"falling", "fall"}, {"feed", "feed"}, {"feudalism", "feudal"}, {"filing", "file"},
    {"finally", "final"}, {"find", "find"}, {"five", "five"}, {"fizzed", "fizz"}, {"focus", "focu"},
    {"following", "follow"}, {"formaliti", "formal"}, {"formalize", "formal"}, {"formative", "form"},
    {"framework", "framework"}, {"generalization", "gener"}, {"generously", "gener"}, {"github", "github"},
    {"gold", "gold"}, {"gollapalli", "gollap"}, {"goodness", "good"}, {"ground", "ground"},
    {"guidance", "guidanc"}, {"gyroscopic", "gyroscop"}, {"happy", "happi"}, {"has", "ha"}, {"here", "here"},
    {"hesitanci", "hesit"}, {"hissing", "hiss"}, {"hline", "hline"}, {"homologou", "homolog"},
    {"homologous", "homolog"}, {"hopeful", "hope"}, {"hopefulness", "hope"}, {"hopping", "hop"},
    {"hrdv", "hrdv"}, {"ideas", "idea"}, {"includegraphics", "includegraph"}, {"incorporating", "incorpor"},
    {"indicates", "indic"}, {"inference", "infer"}, {"initial", "initi"}, {"initialized", "initi"},
    {"innovatively", "innov"}, {"instead", "instead"}, {"irritant", "irrit"}, {"is", "is"}, {"kea", "kea"},
    {"keyphrase", "keyphras"}, {"keyphrases", "keyphras"}, {"kim", "kim"}, {"kingma", "kingma"},
    {"kong", "kong"}, {"labeling", "label"}, {"largest", "largest"}, {"leftmargin", "leftmargin"},
    {"level", "level"}, {"linguistic", "linguist"}, {"logi", "logi"}, {"loss", "loss"}, {"luan", "luan"},
    {"mainly", "mainli"}, {"matrix", "matrix"}, {"method", "method"}, {"metrics", "metric"},
    {"model", "model"}, {"models", "model"}, {"moreover", "moreov"}, {"motoring", "motor"}, {"net", "net"},
    {"nips", "nip"}, {"obtained", "obtain"}, {"only", "onli"}, {"operator", "oper"}, {"opinion", "opinion"},
    {"orders", "order"}, {"oscillators", "oscil"}, {"outperforms", "outperform"}, {"over", "over"},
    {"overcome", "overcom"}, {"overleftarrow", "overleftarrow"}, {"part", "part"}, {"partially", "partial"},
    {"per", "per"}, {"phrases", "phrase"}, {"plastered", "plaster"}, {"plenty", "plenti"},
    {"ponies", "poni"}, {"pre", "pre"}, {"predication", "predic"}, {"predict", "predict"},
    {"predicting", "predict"}, {"predictions", "predict"}, {"present", "present"},
    {"previously", "previous"}, {"probate", "probat"}, {"probe", "probe"}, {"problem", "problem"},
    {"produce", "produc"}, {"propose", "propos"}, {"put", "put"}, {"radicalli", "radic"}, {"rate", "rate"},
    {"rational", "ration"}, {"recognizing", "recogn"}, {"ref", "ref"}, {"relational", "relat"},
    {"removed", "remov"}, {"replacement", "replac"}, {"representation", "represent"}, {"rescale", "rescal"},
    {"return", "return"}, {"revival", "reviv"}, {"roll", "roll"}, {"scientific", "scientif"},
    {"second", "second"}, {"semeval", "semev"}, {"sensibiliti", "sensibl"}, {"sensitiviti", "sensit"},
    {"seqe", "seqe"}, {"sequential", "sequenti"}, {"significantly", "significantli"}, {"similar", "similar"},
    {"simple", "simpl"}, {"simultaneously", "simultan"}, {"sing", "sing"}, {"sized", "size"}, {"sky", "sky"},
    {"softmax", "softmax"}, {"sota", "sota"}, {"specific", "specif"}, {"stage", "stage"}, {"state", "state"},
    {"stop", "stop"}, {"study", "studi"}, {"supervised", "supervis"}, {"system", "system"},
    {"tanned", "tan"}, {"tends", "tend"}, {"textsubscript", "textsubscript"}, {"they", "thei"},
    {"this", "thi"}, {"ties", "ti"}, {"train", "train"}, {"transformer", "transform"},
    {"triplicate", "triplic"}, {"troubled", "troubl"}, {"twitter", "twitter"}, {"using", "us"},
    {"usually", "usual"}, {"valenci", "valenc"}, {"vectors", "vector"}, {"vietnamization", "vietnam"},
    {"vileli", "vile"}, {"was", "wa"}, {"weight", "weight"}, {"whether", "whether"}, {"wilson", "wilson"},
    {"words", "word"}, {"yet", "yet"}, {"zhang", "zhang"}
  };
  for (const auto& [word, stem] : cases) EXPECT_EQ(stem_word(word), stem) << word;
}

TEST(PorterStemmer, LeavesNonAlphabeticTokensAlone) {
  EXPECT_EQ(stem_word("<digit>"), "<digit>");
  EXPECT_EQ(stem_word("-"), "-");
  EXPECT_EQ(stem_word("café"), "café");
  EXPECT_EQ(stem_phrase({"neural", "networks"}), (Words{"neural", "network"}));
}

TEST(Vocabulary, SpecialsComeFirst) {
  Vocabulary v;
  ASSERT_EQ(v.size(), 6u);
  EXPECT_EQ(v.id("<pad>"), kPadId);
  EXPECT_EQ(v.id("<unk>"), kUnkId);
  EXPECT_EQ(v.id("<p_start>"), kPresentStartId);
  EXPECT_EQ(v.id("<a_start>"), kAbsentStartId);
  EXPECT_EQ(v.id(";"), kEndOfPhraseId);
  EXPECT_EQ(v.id("</s>"), kEndOfProgramId);
  EXPECT_EQ(v.id("never-seen"), kUnkId);
}

TEST(Vocabulary, FrequencyThenLexicographicOrder) {
  auto v = vocabulary_from_counts({{"beta", 3}, {"alpha", 3}, {"gamma", 5}, {"delta", 1}, {";", 100}}, 9);
  ASSERT_EQ(v.size(), 9u);
  EXPECT_EQ(v.word(6), "gamma");
  EXPECT_EQ(v.word(7), "alpha");
  EXPECT_EQ(v.word(8), "beta");
  EXPECT_FALSE(v.contains("delta"));
  EXPECT_THROW(vocabulary_from_counts({}, 5), ConfigError);
}

TEST(Vocabulary, SaveLoadRoundTrip) {
  const auto path = std::filesystem::temp_directory_path() / "exhird_vocab_test.txt";
  Vocabulary v(Words{"graph", "slam", "loop"});
  v.save(path.string());
  auto w = Vocabulary::load(path.string());
  EXPECT_EQ(v, w);
  EXPECT_EQ(v.fingerprint(), w.fingerprint());
  std::ofstream(path) << "graph\n";
  EXPECT_THROW(Vocabulary::load(path.string()), DataError);
  std::filesystem::remove(path);
}

TEST(Document, CopyIdsFollowFirstOccurrence) {
  Vocabulary v(Words{"a"});
  auto doc = preprocess({"a b", "a", {}}, v);
  EXPECT_EQ(doc.copy_ids, (std::vector<std::size_t>{0, 1, 0}));
  EXPECT_EQ(doc.copy_words, (Words{"a", "b"}));
  EXPECT_EQ(doc.oov_words, (Words{"b"}));
  EXPECT_EQ(doc.token_ids, (std::vector<TokenId>{6, kUnkId, 6}));
  EXPECT_EQ(doc.merged_ids, (std::vector<TokenId>{6, 7, 6}));
  EXPECT_EQ(doc.merged_word(7, v), "b");
  EXPECT_EQ(Document::input_id(7, v.size()), kUnkId);
}

TEST(Document, EmptyDocumentIsRejected) {
  EXPECT_THROW(preprocess({"", "   ", {}}, Vocabulary{}), EmptyDocumentError);
}

TEST(TargetProgram, PresentByPositionThenAbsentInInputOrder) {
  Vocabulary v(Words{"graph", "neural", "networks", "for", "node", "classification"});
  RawSample s{"Graph neural networks for node classification", "",
              {"node classification", "deep learning", "graph neural network", "", "survey"}};
  auto ex = make_example(s, v);
  const auto& ph = ex.program.phrases;
  ASSERT_EQ(ph.size(), 4u);
  EXPECT_EQ(ph[0].words, (Words{"graph", "neural", "network"}));
  EXPECT_EQ(ph[0].kind, PhraseKind::present);
  EXPECT_EQ(ph[1].words, (Words{"node", "classification"}));
  EXPECT_EQ(ph[2].words, (Words{"deep", "learning"}));
  EXPECT_EQ(ph[2].kind, PhraseKind::absent);
  EXPECT_EQ(ph[2].control_token, kAbsentStartId);
  EXPECT_EQ(ph[3].words, (Words{"survey"}));
  EXPECT_EQ(ex.program.dropped_empty, 1u);

  auto flat = ex.program.flatten();
  EXPECT_EQ(flat.back(), kEndOfProgramId);
  EXPECT_EQ(flat.size(), ex.program.token_count());
  EXPECT_EQ(flat.front(), kPresentStartId);
  // "network" is unseen, so it becomes <unk> in both spaces
  EXPECT_EQ(ph[0].copy_word_ids, (std::vector<TokenId>{6, 7, kUnkId}));
}

TEST(TargetProgram, OrderingIsStableForRepeats) {
  Vocabulary v;
  RawSample s{"x y x y", "", {"y", "x y", "x"}};
  auto ex = make_example(s, v);
  ASSERT_EQ(ex.program.phrases.size(), 3u);
  EXPECT_EQ(ex.program.phrases[0].words, (Words{"x", "y"}));
  EXPECT_EQ(ex.program.phrases[1].words, (Words{"x"}));
  EXPECT_EQ(ex.program.phrases[2].words, (Words{"y"}));
}

TEST(CorpusIo, ReadsStringAndArrayKeyphrases) {
  const auto path = std::filesystem::temp_directory_path() / "exhird_corpus_test.jsonl";
  {
    std::ofstream out(path);
    out << R"({"title":"A","abstract":"b c","keyphrases":"b; c d"})" << '\n'
        << '\n'
        << R"({"title":"E","abstract":"f","keyphrases":["f","g"]})" << '\n';
  }
  auto corpus = read_corpus(path.string());
  ASSERT_EQ(corpus.size(), 2u);
  EXPECT_EQ(corpus[0].keyphrases, (Words{"b", "c d"}));
  EXPECT_EQ(corpus[1].keyphrases, (Words{"f", "g"}));

  write_corpus(path.string(), corpus);
  auto again = read_corpus(path.string());
  EXPECT_EQ(again[1].title, "E");
  EXPECT_EQ(again[0].keyphrases, corpus[0].keyphrases);

  std::ofstream(path) << "{\"title\": 3\n";
  try {
    read_corpus(path.string());
    FAIL() << "malformed line accepted";
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find(":1"), std::string::npos) << e.what();
  }
  std::filesystem::remove(path);
}

}  // namespace
}  // namespace exhird::text
