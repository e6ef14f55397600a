// SPDX-License-Identifier: Apache-2.0
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "commands.hpp"
#include "dmqca/gradcheck_suite.hpp"
#include "dmqca/model.hpp"

namespace dmqca::cli {

int run(int argc, char** argv, Streams io) {
  CLI::App app{"Direct multiview quantification of coronary stenosis: phantom generation, "
               "training, evaluation and gradient checks."};
  app.name("dmqca");
  app.require_subcommand(1);

  GenerateArgs gen;
  auto* generate = app.add_subcommand("generate", "Write a phantom dataset");
  generate->add_option("--n", gen.n, "Number of samples")->required();
  generate->add_option("--seed", gen.seed, "Global seed")->required();
  generate->add_option("--out", gen.out, "Output directory")->required();
  generate->add_option("--size", gen.size, "desk (T=4, 64x64) or paper (T=10, 256x256)")
      ->check(CLI::IsMember({"desk", "paper"}));
  generate->add_option("--config", gen.config, "Run config (phantom ranges)")->check(CLI::ExistingFile);

  std::string names;
  for (const auto& n : AblationConfig::names()) names += (names.empty() ? "" : ", ") + n;

  TrainArgs tr;
  auto* train = app.add_subcommand("train", "Train one configuration on a dataset");
  train->add_option("--config", tr.config, "Run config")->check(CLI::ExistingFile);
  train->add_option("--ablation", tr.ablation, "One of: " + names);
  train->add_option("--out", tr.out, "Checkpoint path")->required();
  train->add_option("--data", tr.data, "Dataset directory (default: data.dir)");
  train->add_option("--log", tr.log, "Per-epoch loss CSV (default: <out>.loss.csv)");

  EvalArgs ev;
  auto* eval = app.add_subcommand("eval", "Score a checkpoint on a dataset");
  eval->add_option("--config", ev.config, "Run config")->check(CLI::ExistingFile);
  eval->add_option("--ablation", ev.ablation, "One of: " + names);
  eval->add_option("--ckpt", ev.ckpt, "Checkpoint");
  eval->add_option("--data", ev.data, "Dataset directory")->required();
  eval->add_option("--predictor", ev.predictor, "model or oracle");
  eval->add_option("--out", ev.out, "Report directory");

  CrossvalArgs cv;
  auto* crossval = app.add_subcommand("crossval", "k-fold cross-validation of every configured method");
  crossval->add_option("--config", cv.config, "Run config")->check(CLI::ExistingFile);
  crossval->add_option("--out", cv.out, "Report directory (default: crossval.out)");

  GradcheckArgs gc;
  std::string gc_names;
  for (const auto& n : gradcheck_suite_names()) gc_names += (gc_names.empty() ? "" : ", ") + n;
  auto* gradcheck = app.add_subcommand("gradcheck", "Finite-difference gradient checks");
  gradcheck->add_option("--seed", gc.seed, "Seed");
  gradcheck->add_option("--configs", gc.configurations, "Random configurations per check")
      ->check(CLI::PositiveNumber);
  gradcheck->add_option("--only", gc.only, "Subset of: " + gc_names);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, io.out, io.err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  if (*generate) return cmd_generate(gen, io);
  if (*train) return cmd_train(tr, io);
  if (*eval) return cmd_eval(ev, io);
  if (*crossval) return cmd_crossval(cv, io);
  return cmd_gradcheck(gc, io);
}

}  // namespace dmqca::cli
