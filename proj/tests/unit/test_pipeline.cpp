#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "exhird/pipeline.hpp"

namespace exhird::pipeline {
namespace {

namespace fs = std::filesystem;

fs::path write_file(const std::string& name, const std::string& text) {
  const auto path = fs::temp_directory_path() / name;
  std::ofstream(path) << text;
  return path;
}

TEST(Config, KeyValueFileWithComments) {
  const auto path = write_file("exhird_cfg.conf",
                               "# toy\n"
                               "dataset = inspec\n"
                               "model.hidden_dim = 16   # small\n"
                               "train.lr=0.5\n\n");
  const auto c = load_run_config(path.string(), {});
  EXPECT_EQ(c.dataset, "inspec");
  EXPECT_EQ(c.model.hidden_dim, 16u);
  EXPECT_DOUBLE_EQ(c.train.lr, 0.5);
  EXPECT_EQ(c.effective_search_window(), 4u);
  fs::remove(path);
}

TEST(Config, JsonFileFlattensNestedKeys) {
  const auto path = write_file("exhird_cfg.json",
                               R"({"dataset": "krapivin", "model": {"embed_dim": 8, "share_embeddings": false},
                                   "train": {"max_epochs": 3}, "exclusion": {"window": "all"}})");
  const auto c = load_run_config(path.string(), {});
  EXPECT_EQ(c.model.embed_dim, 8u);
  EXPECT_FALSE(c.model.share_embeddings);
  EXPECT_EQ(c.train.max_epochs, 3u);
  EXPECT_EQ(c.effective_search_window(), exclusion::kAll);
  fs::remove(path);
}

TEST(Config, OverridesWinOverTheFile) {
  const auto path = write_file("exhird_cfg2.conf", "seed = 3\ndecoder = hierarchical\n");
  const auto c = load_run_config(path.string(), {{"seed", "9"}, {"decoder", "sequential"}});
  EXPECT_EQ(c.train.seed, 9u);
  EXPECT_EQ(c.model.decoder, model::DecoderKind::sequential);
  fs::remove(path);
}

TEST(Config, DefaultsDependOnDataset) {
  EXPECT_EQ(default_search_window("inspec"), 4u);
  EXPECT_EQ(default_search_window("kp20k"), 1u);
  EXPECT_EQ(default_search_window("semeval"), 1u);
  RunConfig c;
  c.out_dir = "runs/x";
  EXPECT_EQ(fs::path(c.checkpoint()), fs::path("runs/x") / "model.ckpt");
  c.checkpoint_path = "elsewhere.ckpt";
  EXPECT_EQ(c.checkpoint(), "elsewhere.ckpt");
}

TEST(Config, RejectsBadInput) {
  EXPECT_THROW(load_run_config("", {{"no.such.key", "1"}}), ConfigError);
  EXPECT_THROW(load_run_config("", {{"train.batch_size", "-4"}}), ConfigError);
  EXPECT_THROW(load_run_config("", {{"train.lr", "fast"}}), ConfigError);
  EXPECT_THROW(load_run_config("", {{"device", "cuda"}}), ConfigError);
  EXPECT_THROW(load_run_config("", {{"model.share_embeddings", "maybe"}}), ConfigError);
  EXPECT_THROW(load_run_config("/nonexistent/exhird.conf", {}), ConfigError);
  const auto path = write_file("exhird_bad.conf", "dataset inspec\n");
  EXPECT_THROW(load_run_config(path.string(), {}), ConfigError);
  fs::remove(path);
}

TEST(Config, DataDirectoryFromEnvironment) {
  RunConfig c;
  c.data_dir = "data/toy";
  ::unsetenv("EXHIRD_DATA_DIR");
  EXPECT_EQ(fs::path(c.corpus("train.jsonl")), fs::path("data/toy") / "train.jsonl");
  ::setenv("EXHIRD_DATA_DIR", "/mnt/corpora", 1);
  EXPECT_EQ(fs::path(c.corpus("train.jsonl")), fs::path("/mnt/corpora") / "train.jsonl");
  EXPECT_EQ(c.corpus("/abs/test.jsonl"), "/abs/test.jsonl");
  ::unsetenv("EXHIRD_DATA_DIR");
}

TEST(Config, JsonSnapshotRecordsResolvedPaths) {
  const auto c = load_run_config("", {{"out_dir", "runs/snap"}});
  const auto j = to_json(c);
  EXPECT_EQ(fs::path(j.at("vocab").get<std::string>()), fs::path("runs/snap") / "vocab.txt");
}

}  // namespace
}  // namespace exhird::pipeline
