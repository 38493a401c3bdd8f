#pragma once

#include <nlohmann/json.hpp>

#include <array>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "exhird/errors.hpp"
#include "exhird/eval/report.hpp"
#include "exhird/model/decode.hpp"
#include "exhird/text/corpus_io.hpp"
#include "exhird/train/checkpoint.hpp"
#include "exhird/train/trainer.hpp"

namespace exhird::pipeline {

namespace fs = std::filesystem;

using Scalar = float;

/// Default exclusive-search window per benchmark.
inline std::size_t default_search_window(const std::string& dataset) {
  if (dataset == "inspec") return 4;
  if (dataset == "krapivin" || dataset == "semeval" || dataset == "kp20k" || dataset == "toy") return 1;
  throw ConfigError("unknown dataset '" + dataset + "' (expected inspec, krapivin, semeval, kp20k or toy)");
}

/// Everything a subcommand needs. Relative corpus paths resolve against
/// data_dir (overridden by EXHIRD_DATA_DIR); artifact paths default to files
/// inside out_dir.
struct RunConfig {
  std::string data_dir = "data/toy";
  std::string train_file = "train.jsonl";
  std::string valid_file = "valid.jsonl";
  std::string test_file = "test.jsonl";
  std::string out_dir = "runs/default";
  std::string vocab_path, checkpoint_path, log_path, predictions_path, report_path;
  std::string dataset = "kp20k";
  std::string device = "none";

  std::size_t vocab_size = 50000;
  model::ModelConfig model;
  train::TrainConfig train;
  exclusion::Mode predict_exclusion = exclusion::Mode::hard;
  std::optional<std::size_t> search_window;  // K_ES; dataset default when unset
  model::DecodeLimits limits;

  RunConfig() { train.exclusion = exclusion::Mode::soft; }

  std::size_t effective_search_window() const {
    return search_window ? *search_window : default_search_window(dataset);
  }

  std::string path_in_out(const std::string& explicit_path, const char* name) const {
    return explicit_path.empty() ? (fs::path(out_dir) / name).string() : explicit_path;
  }
  std::string vocab() const { return path_in_out(vocab_path, "vocab.txt"); }
  std::string checkpoint() const { return path_in_out(checkpoint_path, "model.ckpt"); }
  std::string log() const { return path_in_out(log_path, "train_log.csv"); }
  std::string predictions() const { return path_in_out(predictions_path, "predictions.jsonl"); }
  std::string report() const { return path_in_out(report_path, "report.json"); }

  std::string corpus(const std::string& file) const {
    if (fs::path(file).is_absolute()) return file;
    const char* env = std::getenv("EXHIRD_DATA_DIR");
    const std::string root = env && *env ? env : data_dir;
    return (fs::path(root) / file).string();
  }

  void validate() const {
    auto m = model;
    m.vocab_size = vocab_size;
    m.validate();
    train.validate();
    if (vocab_size < text::kSpecialTokens.size()) throw ConfigError("vocab_size must cover the special tokens");
    if (device != "none" && device != "cpu") throw ConfigError("only --device none (CPU) is supported");
    if (limits.max_pd_steps == 0 || limits.max_wd_words == 0 || limits.max_seq_tokens == 0)
      throw ConfigError("decoding limits must be positive");
    effective_search_window();
  }
};

namespace detail {

inline std::size_t to_size(const std::string& key, const std::string& v) {
  std::size_t pos = 0;
  unsigned long long out = 0;
  try {
    if (!v.empty() && v[0] == '-') throw std::invalid_argument(v);
    out = std::stoull(v, &pos);
  } catch (const std::exception&) {
    throw ConfigError(key + ": expected a non-negative integer, got '" + v + "'");
  }
  if (pos != v.size()) throw ConfigError(key + ": expected a non-negative integer, got '" + v + "'");
  return static_cast<std::size_t>(out);
}

inline double to_double(const std::string& key, const std::string& v) {
  std::size_t pos = 0;
  double out = 0;
  try {
    out = std::stod(v, &pos);
  } catch (const std::exception&) {
    throw ConfigError(key + ": expected a number, got '" + v + "'");
  }
  if (pos != v.size()) throw ConfigError(key + ": expected a number, got '" + v + "'");
  return out;
}

inline bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError(key + ": expected true or false, got '" + v + "'");
}

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

inline void flatten_json(const nlohmann::json& j, const std::string& prefix, std::map<std::string, std::string>& out) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string key = prefix.empty() ? it.key() : prefix + "." + it.key();
    if (it->is_object())
      flatten_json(*it, key, out);
    else if (it->is_string())
      out[key] = it->get<std::string>();
    else
      out[key] = it->dump();
  }
}

}  // namespace detail

/// Applies one `key = value` setting.
inline void apply_setting(RunConfig& c, const std::string& key, const std::string& value) {
  using detail::to_bool;
  using detail::to_double;
  using detail::to_size;
  static const std::map<std::string, std::string RunConfig::*> strings = {
      {"data_dir", &RunConfig::data_dir},       {"train_file", &RunConfig::train_file},
      {"valid_file", &RunConfig::valid_file},   {"test_file", &RunConfig::test_file},
      {"out_dir", &RunConfig::out_dir},         {"vocab", &RunConfig::vocab_path},
      {"checkpoint", &RunConfig::checkpoint_path}, {"log", &RunConfig::log_path},
      {"predictions", &RunConfig::predictions_path}, {"report", &RunConfig::report_path},
      {"dataset", &RunConfig::dataset},         {"device", &RunConfig::device}};
  if (auto it = strings.find(key); it != strings.end()) {
    c.*(it->second) = value;
    return;
  }
  if (key == "vocab_size") c.vocab_size = to_size(key, value);
  else if (key == "model.embed_dim") c.model.embed_dim = to_size(key, value);
  else if (key == "model.hidden_dim") c.model.hidden_dim = to_size(key, value);
  else if (key == "model.encoder_layers") c.model.encoder_layers = to_size(key, value);
  else if (key == "model.share_embeddings") c.model.share_embeddings = to_bool(key, value);
  else if (key == "decoder" || key == "model.decoder") c.model.decoder = model::parse_decoder_kind(value);
  else if (key == "seed") c.train.seed = to_size(key, value);
  else if (key == "train.batch_size") c.train.batch_size = to_size(key, value);
  else if (key == "train.lr") c.train.lr = to_double(key, value);
  else if (key == "train.lr_decay") c.train.lr_decay = to_double(key, value);
  else if (key == "train.max_epochs") c.train.max_epochs = to_size(key, value);
  else if (key == "train.patience") c.train.patience = to_size(key, value);
  else if (key == "train.max_grad_norm") c.train.max_grad_norm = to_double(key, value);
  else if (key == "train.init_bound") c.train.init_bound = to_double(key, value);
  else if (key == "train.restore_best") c.train.restore_best = to_bool(key, value);
  else if (key == "train.exclusion") c.train.exclusion = exclusion::parse_mode(value);
  else if (key == "exclusion.el_window") c.train.exclusive_window = exclusion::parse_window(value);
  else if (key == "predict.exclusion" || key == "exclusion.mode") c.predict_exclusion = exclusion::parse_mode(value);
  else if (key == "exclusion.window") c.search_window = exclusion::parse_window(value);
  else if (key == "limits.max_pd_steps") c.limits.max_pd_steps = to_size(key, value);
  else if (key == "limits.max_wd_words") c.limits.max_wd_words = to_size(key, value);
  else if (key == "limits.max_seq_tokens") c.limits.max_seq_tokens = to_size(key, value);
  else if (key == "limits.mask_start_tokens") c.limits.mask_start_tokens = to_bool(key, value);
  else if (key == "limits.mask_control_in_words") c.limits.mask_control_in_words = to_bool(key, value);
  else if (key == "limits.mask_unk") c.limits.mask_unk = to_bool(key, value);
  else throw ConfigError("unknown config key '" + key + "'");
}

/// Reads a JSON object (nested objects become dotted keys) or `key = value`
/// lines with '#' comments.
inline std::map<std::string, std::string> read_settings(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  const std::string text = ss.str();
  std::map<std::string, std::string> out;
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '{') {
    try {
      detail::flatten_json(nlohmann::json::parse(text), "", out);
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError(path + ": " + e.what());
    }
    return out;
  }
  std::istringstream lines(text);
  std::string line;
  for (std::size_t n = 1; std::getline(lines, line); ++n) {
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(path + ":" + std::to_string(n) + ": expected key = value");
    out[detail::trim(line.substr(0, eq))] = detail::trim(line.substr(eq + 1));
  }
  return out;
}

/// Config file (optional) first, then overrides in order.
inline RunConfig load_run_config(const std::string& config_path,
                                 const std::vector<std::pair<std::string, std::string>>& overrides) {
  RunConfig c;
  if (!config_path.empty())
    for (const auto& [k, v] : read_settings(config_path)) apply_setting(c, k, v);
  for (const auto& [k, v] : overrides) apply_setting(c, k, v);
  c.validate();
  return c;
}

inline nlohmann::json to_json(const RunConfig& c) {
  return {{"data_dir", c.data_dir},
          {"train_file", c.train_file},
          {"valid_file", c.valid_file},
          {"test_file", c.test_file},
          {"out_dir", c.out_dir},
          {"vocab", c.vocab()},
          {"checkpoint", c.checkpoint()},
          {"log", c.log()},
          {"predictions", c.predictions()},
          {"report", c.report()},
          {"dataset", c.dataset},
          {"device", c.device},
          {"vocab_size", c.vocab_size},
          {"model", train::to_json(c.model)},
          {"seed", c.train.seed},
          {"train",
           {{"batch_size", c.train.batch_size},
            {"lr", c.train.lr},
            {"lr_decay", c.train.lr_decay},
            {"max_epochs", c.train.max_epochs},
            {"patience", c.train.patience},
            {"max_grad_norm", c.train.max_grad_norm},
            {"init_bound", c.train.init_bound},
            {"restore_best", c.train.restore_best},
            {"exclusion", exclusion::to_string(c.train.exclusion)}}},
          {"exclusion",
           {{"el_window", exclusion::window_to_string(c.train.exclusive_window)},
            {"mode", exclusion::to_string(c.predict_exclusion)},
            {"window", exclusion::window_to_string(c.effective_search_window())}}},
          {"limits",
           {{"max_pd_steps", c.limits.max_pd_steps},
            {"max_wd_words", c.limits.max_wd_words},
            {"max_seq_tokens", c.limits.max_seq_tokens},
            {"mask_start_tokens", c.limits.mask_start_tokens},
            {"mask_control_in_words", c.limits.mask_control_in_words},
            {"mask_unk", c.limits.mask_unk}}}};
}

inline std::string git_describe() {
#ifdef EXHIRD_SOURCE_DIR
  const std::string cmd = std::string("git -C \"") + EXHIRD_SOURCE_DIR + "\" describe --always --dirty 2>/dev/null";
  if (FILE* pipe = popen(cmd.c_str(), "r")) {
    std::array<char, 128> buf{};
    std::string out;
    while (fgets(buf.data(), buf.size(), pipe)) out += buf.data();
    pclose(pipe);
    out = detail::trim(out);
    if (!out.empty()) return out;
  }
#endif
  return "unknown";
}

/// Wall-clock timer that writes `<out_dir>/manifest-<command>.json` on finish.
class Manifest {
 public:
  Manifest(std::string command, const RunConfig& config)
      : command_(std::move(command)), config_(config), start_(std::chrono::steady_clock::now()) {}

  nlohmann::json& extra() { return extra_; }

  void write() const {
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    nlohmann::json j{{"command", command_},
                     {"config", to_json(config_)},
                     {"seed", config_.train.seed},
                     {"git", git_describe()},
                     {"wall_time_seconds", seconds}};
    if (!extra_.is_null()) j["results"] = extra_;
    fs::create_directories(config_.out_dir);
    std::ofstream out(fs::path(config_.out_dir) / ("manifest-" + command_ + ".json"), std::ios::binary);
    if (!out) throw DataError("cannot write manifest in " + config_.out_dir);
    out << j.dump(2) << '\n';
  }

 private:
  std::string command_;
  RunConfig config_;
  std::chrono::steady_clock::time_point start_;
  nlohmann::json extra_;
};

inline void ensure_parent(const std::string& path) {
  const auto parent = fs::path(path).parent_path();
  if (!parent.empty()) fs::create_directories(parent);
}

/// Examples of a corpus; documents that are empty after tokenization are
/// skipped and counted.
inline std::vector<text::Example> make_examples(const std::vector<text::RawSample>& corpus,
                                                const text::Vocabulary& vocab, std::size_t* skipped = nullptr) {
  std::vector<text::Example> out;
  std::size_t n = 0;
  for (const auto& s : corpus) {
    try {
      out.push_back(text::make_example(s, vocab));
    } catch (const EmptyDocumentError&) {
      ++n;
    }
  }
  if (skipped) *skipped = n;
  return out;
}

inline text::Vocabulary build_and_save_vocabulary(const RunConfig& c) {
  const auto train = text::read_corpus(c.corpus(c.train_file));
  auto vocab = text::build_vocabulary(train, c.vocab_size);
  ensure_parent(c.vocab());
  vocab.save(c.vocab());
  return vocab;
}

inline text::Vocabulary load_or_build_vocabulary(const RunConfig& c) {
  if (fs::exists(c.vocab())) return text::Vocabulary::load(c.vocab());
  return build_and_save_vocabulary(c);
}

/// Builds the vocabulary from the training split and caches every split's
/// token ids and flattened target programs as JSONL under out_dir/cache.
inline void cmd_preprocess(const RunConfig& c, std::ostream& log = std::cerr) {
  Manifest manifest("preprocess", c);
  const auto vocab = build_and_save_vocabulary(c);
  fs::create_directories(fs::path(c.out_dir) / "cache");
  nlohmann::json stats;
  const std::array<std::pair<std::string, std::string>, 3> splits{
      {{"train", c.train_file}, {"valid", c.valid_file}, {"test", c.test_file}}};
  for (const auto& [name, file] : splits) {
    const auto path = c.corpus(file);
    if (!fs::exists(path)) continue;
    const auto corpus = text::read_corpus(path);
    std::ofstream out(fs::path(c.out_dir) / "cache" / (name + ".jsonl"), std::ios::binary);
    std::size_t skipped = 0;
    for (const auto& ex : make_examples(corpus, vocab, &skipped)) {
      nlohmann::json j{{"token_ids", ex.doc.token_ids},
                       {"merged_ids", ex.doc.merged_ids},
                       {"oov_words", ex.doc.oov_words},
                       {"target", ex.program.flatten()}};
      out << j.dump() << '\n';
    }
    stats[name] = {{"documents", corpus.size()}, {"skipped_empty", skipped}};
    log << name << ": " << corpus.size() << " documents, " << skipped << " empty\n";
  }
  log << "vocabulary: " << vocab.size() << " tokens -> " << c.vocab() << '\n';
  stats["vocab_size"] = vocab.size();
  manifest.extra() = stats;
  manifest.write();
}

struct TrainOutcome {
  train::FitResult<Scalar> fit;
  std::size_t skipped_empty = 0;
};

/// Trains a model and writes the checkpoint and the CSV training log.
inline TrainOutcome cmd_train(const RunConfig& c, std::ostream& log = std::cerr) {
  Manifest manifest("train", c);
  const auto vocab = load_or_build_vocabulary(c);
  TrainOutcome outcome;
  const auto train_set = make_examples(text::read_corpus(c.corpus(c.train_file)), vocab, &outcome.skipped_empty);
  std::vector<text::Example> valid_set;
  if (fs::exists(c.corpus(c.valid_file))) valid_set = make_examples(text::read_corpus(c.corpus(c.valid_file)), vocab);

  auto mc = c.model;
  mc.vocab_size = vocab.size();
  model::Model<Scalar> m(mc);
  outcome.fit = train::fit(m, train_set, valid_set, c.train, [&](const train::EpochRecord& r) {
    log << "epoch " << r.epoch << " loss " << r.train_loss << " L_g " << r.generation_loss << " L_EL "
        << r.exclusive_loss << " ppl " << r.perplexity << " lr " << r.lr << '\n';
    return true;
  });

  ensure_parent(c.checkpoint());
  train::save_checkpoint(c.checkpoint(), m,
                         {{"vocab_fingerprint", std::to_string(vocab.fingerprint())},
                          {"config", to_json(c)},
                          {"best_perplexity", outcome.fit.best_perplexity},
                          {"best_epoch", outcome.fit.best_epoch},
                          {"epochs", outcome.fit.history.size()}});
  ensure_parent(c.log());
  train::write_training_log(c.log(), outcome.fit.history);
  manifest.extra() = {{"best_perplexity", outcome.fit.best_perplexity},
                      {"best_epoch", outcome.fit.best_epoch},
                      {"epochs", outcome.fit.history.size()},
                      {"early_stopped", outcome.fit.early_stopped},
                      {"skipped_empty", outcome.skipped_empty}};
  manifest.write();
  return outcome;
}

inline model::InferenceOptions inference_options(const RunConfig& c) {
  model::InferenceOptions opt;
  opt.limits = c.limits;
  opt.exclusion = c.predict_exclusion;
  opt.window = c.effective_search_window();
  return opt;
}

/// Greedy predictions for every document of a corpus; empty documents get an
/// empty record so lines stay aligned with the corpus.
template <class T>
std::vector<eval::PredictionRecord> predict_corpus(model::Model<T>& m, const text::Vocabulary& vocab,
                                                   const std::vector<text::RawSample>& corpus,
                                                   const model::InferenceOptions& opt,
                                                   model::DecodeStats* total = nullptr) {
  std::vector<eval::PredictionRecord> out;
  for (const auto& s : corpus) {
    eval::PredictionRecord rec;
    text::Document doc;
    try {
      doc = text::preprocess(s, vocab);
    } catch (const EmptyDocumentError&) {
      out.push_back(std::move(rec));
      continue;
    }
    model::DecodeStats stats;
    for (const auto& p : model::predict(m, doc, vocab, opt, &stats)) {
      if (p.words.empty()) continue;
      const auto phrase = text::join(p.words);
      (p.kind == text::PhraseKind::present ? rec.present : rec.absent).push_back(phrase);
      rec.raw_sequence.push_back(phrase);
    }
    if (total) {
      total->exclusion_fallbacks += stats.exclusion_fallbacks;
      total->steps += stats.steps;
    }
    out.push_back(std::move(rec));
  }
  return out;
}

inline model::Model<Scalar> load_model(const RunConfig& c, const text::Vocabulary& vocab) {
  auto ck = train::load_checkpoint<Scalar>(c.checkpoint());
  if (ck.metadata.contains("vocab_fingerprint") &&
      ck.metadata.at("vocab_fingerprint").get<std::string>() != std::to_string(vocab.fingerprint()))
    throw DataError("checkpoint " + c.checkpoint() + " was trained with a different vocabulary than " + c.vocab());
  if (ck.model.config().vocab_size != vocab.size())
    throw DataError("checkpoint vocabulary size does not match " + c.vocab());
  return std::move(ck.model);
}

inline void cmd_predict(const RunConfig& c, std::ostream& log = std::cerr) {
  Manifest manifest("predict", c);
  const auto vocab = text::Vocabulary::load(c.vocab());
  auto m = load_model(c, vocab);
  const auto corpus = text::read_corpus(c.corpus(c.test_file));
  model::DecodeStats stats;
  const auto records = predict_corpus(m, vocab, corpus, inference_options(c), &stats);
  ensure_parent(c.predictions());
  eval::write_predictions(c.predictions(), records);
  log << records.size() << " documents -> " << c.predictions() << '\n';
  manifest.extra() = {{"documents", records.size()}, {"exclusion_fallbacks", stats.exclusion_fallbacks}};
  manifest.write();
}

inline eval::MetricsReport cmd_evaluate(const RunConfig& c, std::ostream& out = std::cout) {
  Manifest manifest("evaluate", c);
  const auto records = eval::read_predictions(c.predictions());
  const auto gold = text::read_corpus(c.corpus(c.test_file));
  auto report = eval::corpus_report(records, gold);
  ensure_parent(c.report());
  eval::write_report(c.report(), eval::to_json(report));
  eval::print_table(out, {{"model", report}});
  manifest.extra() = eval::to_json(report, false);
  manifest.write();
  return report;
}

struct AblationRow {
  std::string name;
  model::DecoderKind decoder;
  exclusion::Mode search;
  eval::MetricsReport report;
};

/// Trains the hierarchical and the sequential model (both with the exclusive
/// loss) and compares: the full model with exclusive search ("ExHiRD-h"),
/// the sequential decoder with exclusive search ("w/o HRD") and the
/// hierarchical model decoded without exclusive search ("w/o ES").
inline std::vector<AblationRow> cmd_ablate(const RunConfig& c, std::ostream& out = std::cout,
                                           std::ostream& log = std::cerr) {
  Manifest manifest("ablate", c);
  const auto vocab = load_or_build_vocabulary(c);
  const auto gold = text::read_corpus(c.corpus(c.test_file));

  std::vector<AblationRow> rows{{"ExHiRD-h", model::DecoderKind::hierarchical, exclusion::Mode::hard, {}},
                                {"w/o HRD", model::DecoderKind::sequential, exclusion::Mode::hard, {}},
                                {"w/o ES", model::DecoderKind::hierarchical, exclusion::Mode::none, {}}};
  std::map<model::DecoderKind, std::string> checkpoints;
  for (auto kind : {model::DecoderKind::hierarchical, model::DecoderKind::sequential}) {
    RunConfig sub = c;
    sub.model.decoder = kind;
    sub.train.exclusion = exclusion::Mode::soft;
    sub.checkpoint_path = (fs::path(c.out_dir) / (std::string("ablate-") + model::to_string(kind) + ".ckpt")).string();
    sub.log_path = (fs::path(c.out_dir) / (std::string("ablate-") + model::to_string(kind) + "-log.csv")).string();
    sub.vocab_path = c.vocab();
    log << "training " << model::to_string(kind) << " model\n";
    cmd_train(sub, log);
    checkpoints[kind] = sub.checkpoint();
  }

  nlohmann::json j = nlohmann::json::object();
  std::vector<std::pair<std::string, eval::MetricsReport>> table;
  for (auto& row : rows) {
    RunConfig sub = c;
    sub.checkpoint_path = checkpoints[row.decoder];
    sub.predict_exclusion = row.search;
    auto m = load_model(sub, vocab);
    const auto records = predict_corpus(m, vocab, gold, inference_options(sub));
    std::string file = row.name;
    for (auto& ch : file)
      if (ch == '/' || ch == ' ') ch = '_';
    eval::write_predictions((fs::path(c.out_dir) / ("ablate-" + file + ".jsonl")).string(), records);
    row.report = eval::corpus_report(records, gold);
    j[row.name] = eval::to_json(row.report, false);
    table.emplace_back(row.name, row.report);
  }
  const auto path = (fs::path(c.out_dir) / "ablation.json").string();
  eval::write_report(path, {{"rows", j}, {"order", {"ExHiRD-h", "w/o HRD", "w/o ES"}}});
  eval::print_table(out, table);
  manifest.extra() = j;
  manifest.write();
  return rows;
}

}  // namespace exhird::pipeline
