#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "exhird/pipeline.hpp"

namespace {

using namespace exhird;

struct Flags {
  std::string config;
  std::optional<std::size_t> seed;
  std::optional<std::string> decoder, exclusion, window, out_dir, data_dir;
  std::optional<std::size_t> max_pd_steps;
  std::string device = "none";
  std::vector<std::string> settings;
};

void add_flags(CLI::App* cmd, Flags& f) {
  cmd->add_option("--config", f.config, "config file (JSON or key = value lines)");
  cmd->add_option("--seed", f.seed, "random seed");
  cmd->add_option("--decoder", f.decoder, "hierarchical or sequential")->check(CLI::IsMember({"hierarchical", "sequential"}));
  cmd->add_option("--exclusion", f.exclusion, "none, soft or hard")->check(CLI::IsMember({"none", "soft", "hard"}));
  cmd->add_option("--window", f.window, "exclusion window size or 'all'");
  cmd->add_option("--max-pd-steps", f.max_pd_steps, "maximum number of generated phrases");
  cmd->add_option("--device", f.device, "compute device (only 'none', meaning CPU)");
  cmd->add_option("--out-dir", f.out_dir, "directory for artifacts");
  cmd->add_option("--data-dir", f.data_dir, "corpus directory");
  cmd->add_option("--set", f.settings, "extra key=value setting (repeatable)");
}

pipeline::RunConfig resolve(const std::string& command, const Flags& f) {
  std::vector<std::pair<std::string, std::string>> o;
  for (const auto& s : f.settings) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + s + "'");
    o.emplace_back(s.substr(0, eq), s.substr(eq + 1));
  }
  const bool training = command == "train" || command == "ablate";
  if (f.seed) o.emplace_back("seed", std::to_string(*f.seed));
  if (f.decoder) o.emplace_back("decoder", *f.decoder);
  if (f.exclusion) o.emplace_back(training ? "train.exclusion" : "predict.exclusion", *f.exclusion);
  if (f.window) o.emplace_back(training ? "exclusion.el_window" : "exclusion.window", *f.window);
  if (f.max_pd_steps) o.emplace_back("limits.max_pd_steps", std::to_string(*f.max_pd_steps));
  if (f.out_dir) o.emplace_back("out_dir", *f.out_dir);
  if (f.data_dir) o.emplace_back("data_dir", *f.data_dir);
  o.emplace_back("device", f.device);
  return pipeline::load_run_config(f.config, o);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Keyphrase generation with exclusive hierarchical decoding"};
  app.require_subcommand(1);
  Flags flags;
  const std::vector<std::pair<const char*, const char*>> commands = {
      {"preprocess", "build the vocabulary and cache preprocessed splits"},
      {"train", "train a model and write a checkpoint and training log"},
      {"predict", "decode keyphrases for the test split"},
      {"evaluate", "score predictions against the test split"},
      {"ablate", "train and compare the full model, w/o HRD and w/o ES"}};
  for (const auto& [name, help] : commands) add_flags(app.add_subcommand(name, help), flags);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  const std::string command = app.get_subcommands().front()->get_name();
  try {
    const auto config = resolve(command, flags);
    if (command == "preprocess") pipeline::cmd_preprocess(config);
    else if (command == "train") pipeline::cmd_train(config);
    else if (command == "predict") pipeline::cmd_predict(config);
    else if (command == "evaluate") pipeline::cmd_evaluate(config);
    else pipeline::cmd_ablate(config);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const DivergenceError& e) {
    std::cerr << "training diverged at batch " << e.batch_index << ": " << e.what() << '\n';
    return 4;
  } catch (const nn::NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << '\n';
    return 4;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return 3;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return 3;
  }
  return 0;
}
