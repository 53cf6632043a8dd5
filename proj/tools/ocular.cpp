// Command-line front end for the batch pipelines.

#include <CLI11.hpp>
#include <iostream>

#include "ocular/error.hpp"
#include "ocular/pipeline.hpp"

namespace {

struct Common {
  std::string dataset;
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> sets;
  std::string mode;
};

void add_common(CLI::App* sub, Common& c, bool needs_dataset = true) {
  auto* d = sub->add_option("--dataset", c.dataset, "dataset directory (score CSV for roc)");
  if (needs_dataset) d->required();
  sub->add_option("--config", c.config, "key=value configuration file");
  sub->add_option("--out", c.out, "output directory")->required();
  sub->add_option("--seed", c.seed, "random seed");
  sub->add_option("--set", c.sets, "override one option, key=value (repeatable)");
}

ocular::pipeline::RunConfig build_config(const Common& c) {
  ocular::pipeline::RunConfig cfg;
  if (!c.config.empty()) cfg = ocular::pipeline::load_config(c.config);
  for (const auto& s : c.sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw ocular::Error(ocular::ErrorCode::parameter, "--set expects key=value, got " + s);
    ocular::pipeline::set_option(cfg, s.substr(0, eq), s.substr(eq + 1));
  }
  if (!c.mode.empty()) ocular::pipeline::set_option(cfg, "train_mode", c.mode);
  if (c.seed) cfg.seed = *c.seed;
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Driver-drowsiness and eye-movement analysis pipelines"};
  app.require_subcommand(1);
  Common c;
  auto* perclos = app.add_subcommand("perclos", "eye-closure percentage over sliding windows");
  auto* saccade = app.add_subcommand("saccade", "iris tracking and saccadic parameters");
  auto* spect = app.add_subcommand("spectacles", "spectacle presence per face crop");
  auto* roc = app.add_subcommand("roc", "ROC points and AUC from a score,label CSV");
  auto* train = app.add_subcommand("train", "train detection and eye-state models");
  for (auto* s : {perclos, saccade, spect, roc, train}) add_common(s, c);
  train->add_option("--mode", c.mode, "cascade | subspace | lbp | svm | all");
  CLI11_PARSE(app, argc, argv);

  try {
    const auto cfg = build_config(c);
    if (perclos->parsed()) ocular::pipeline::run_perclos(c.dataset, cfg, c.out, std::cout);
    else if (saccade->parsed()) ocular::pipeline::run_saccade(c.dataset, cfg, c.out, std::cout);
    else if (spect->parsed()) ocular::pipeline::run_spectacles(c.dataset, cfg, c.out, std::cout);
    else if (roc->parsed()) ocular::pipeline::run_roc(c.dataset, c.out, std::cout);
    else if (train->parsed()) ocular::pipeline::run_train(c.dataset, cfg, c.out, std::cout);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
