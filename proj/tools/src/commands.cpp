// SPDX-License-Identifier: Apache-2.0
#include "commands.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <ostream>

#include "dmqca/checkpoint.hpp"
#include "dmqca/dataset.hpp"
#include "dmqca/errors.hpp"
#include "dmqca/evalkit.hpp"
#include "dmqca/gradcheck_suite.hpp"
#include "dmqca/report.hpp"
#include "run_config.hpp"

namespace dmqca::cli {
namespace {

namespace fs = std::filesystem;

RunConfig config_or_default(const std::optional<fs::path>& path) {
  return path ? load_run_config(*path) : parse_run_config(nlohmann::json::object());
}

void apply_ablation(RunConfig& cfg, const std::optional<std::string>& name) {
  if (!name) return;
  cfg.ablation = AblationConfig::from_name(*name);
  cfg.ablation_name = *name;
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  out.close();
  if (!out) throw IoError("cannot write " + path.string());
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
}

Dataset load_checked(const fs::path& dir, const ModelConfig& model) {
  if (!fs::exists(dir / "manifest.json")) throw IoError("no dataset at " + dir.string());
  Dataset ds = load_dataset(dir);
  const PhantomSize& s = ds.manifest.size;
  if (s.frames != model.view.frames || s.height != model.view.height || s.width != model.view.width)
    throw DimensionError("dataset " + dir.string() + " has frames " + std::to_string(s.frames) + "x" +
                         std::to_string(s.height) + "x" + std::to_string(s.width) +
                         " but the model expects " + std::to_string(model.view.frames) + "x" +
                         std::to_string(model.view.height) + "x" + std::to_string(model.view.width));
  if (ds.samples.empty()) throw ArgumentError("dataset " + dir.string() + " is empty");
  return ds;
}

std::string file_safe(const std::string& name) {
  std::string out;
  for (char c : name)
    if (c == '+') out += "_plus_";
    else if (c == '-') out += "_minus_";
    else out += c;
  return out;
}

void write_reports(const fs::path& dir, std::span<const EvalReport> reports) {
  ensure_dir(dir);
  write_text(dir / "report.txt", format_table(reports));
  write_text(dir / "report.json", reports_json(reports).dump(2) + "\n");
  for (const auto& r : reports)
    for (std::size_t k = 0; k < kNumIndices; ++k)
      write_text(dir / ("bland_altman_" + file_safe(r.method) + "_" + kIndexNames[k] + ".csv"),
                 bland_altman_csv(r.bland_altman[k]));
}

}  // namespace

int guarded(const std::function<int()>& body, Streams io) {
  try {
    return body();
  } catch (const TrainingError& e) {
    io.err << "error: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const NumericError& e) {
    io.err << "error: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const IoError& e) {
    io.err << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const IntegrityError& e) {
    io.err << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const Error& e) {
    // ConfigError, ArgumentError, DimensionError, FingerprintError, GenerationError
    io.err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const fs::filesystem_error& e) {
    io.err << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::exception& e) {
    io.err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
}

int cmd_generate(const GenerateArgs& args, Streams io) {
  return guarded(
      [&] {
        if (args.n < 1) throw ArgumentError("--n must be >= 1");
        RunConfig cfg = config_or_default(args.config);
        const PhantomSize size = size_from_name(args.size);
        const Manifest m = generate_dataset(args.n, args.seed, cfg.phantom, size, args.out);
        io.out << "wrote " << m.samples.size() << " samples to " << args.out.string() << "\n"
               << "  seed " << m.seed << ", frames " << size.frames << ", " << size.height << "x"
               << size.width << ", " << size.mm_per_pixel() << " mm/pixel\n";
        IndexVector lo, hi;
        lo.fill(INFINITY);
        hi.fill(-INFINITY);
        for (const auto& e : m.samples)
          for (std::size_t k = 0; k < kNumIndices; ++k) {
            lo[k] = std::min(lo[k], e.label[k]);
            hi[k] = std::max(hi[k], e.label[k]);
          }
        for (std::size_t k = 0; k < kNumIndices; ++k)
          io.out << "  " << std::left << std::setw(5) << kIndexNames[k] << std::fixed
                 << std::setprecision(3) << lo[k] << " .. " << hi[k] << " mm\n";
        io.out << std::defaultfloat;
        return kExitOk;
      },
      io);
}

int cmd_train(const TrainArgs& args, Streams io) {
  return guarded(
      [&] {
        RunConfig cfg = config_or_default(args.config);
        apply_ablation(cfg, args.ablation);
        const ModelConfig model = cfg.model.resolved();
        const Dataset ds = load_checked(args.data.value_or(cfg.data.dir), model);
        std::vector<const Sample*> train;
        for (const auto& s : ds.samples) train.push_back(&s);

        const fs::path log_path = args.log.value_or(fs::path(args.out.string() + ".loss.csv"));
        if (log_path.has_parent_path()) ensure_dir(log_path.parent_path());
        if (args.out.has_parent_path()) ensure_dir(args.out.parent_path());
        std::ofstream log(log_path, std::ios::binary);
        if (!log) throw IoError("cannot write " + log_path.string());
        log << "epoch,learning_rate,mean_loss,steps\n";

        io.out << "training " << cfg.ablation_name << " on " << train.size() << " samples for "
               << cfg.train.epochs << " epochs\n";
        const TrainResult result =
            train_model(train, model, cfg.ablation, cfg.train, [&](const EpochRecord& r) {
              log << r.epoch << "," << format_double(r.learning_rate) << ","
                  << format_double(r.mean_loss) << "," << r.steps << "\n";
              log.flush();
              io.out << "  epoch " << r.epoch << "  loss " << r.mean_loss << "\n";
            });
        log.close();
        if (!log) throw IoError("cannot write " + log_path.string());
        save_checkpoint(result.params, model, cfg.ablation, args.out);
        io.out << "checkpoint " << args.out.string() << ", loss log " << log_path.string() << "\n";
        return kExitOk;
      },
      io);
}

int cmd_eval(const EvalArgs& args, Streams io) {
  return guarded(
      [&] {
        RunConfig cfg = config_or_default(args.config);
        apply_ablation(cfg, args.ablation);
        const ModelConfig model = cfg.model.resolved();
        const Dataset ds = load_checked(args.data, model);

        std::unique_ptr<Predictor> predictor;
        std::string method;
        if (args.predictor == "model") {
          if (!args.ckpt) throw ArgumentError("--ckpt is required with --predictor model");
          if (!fs::exists(*args.ckpt)) throw IoError("no checkpoint at " + args.ckpt->string());
          predictor = std::make_unique<ModelPredictor>(load_checkpoint(*args.ckpt, model, cfg.ablation),
                                                       model, cfg.ablation);
          method = cfg.ablation_name;
        } else if (args.predictor == "oracle") {
          predictor = OracleLearner().fit({});
          method = "Oracle";
        } else {
          throw ArgumentError("unknown predictor '" + args.predictor + "'; expected model or oracle");
        }
        const EvalReport report = evaluate_predictor(method, ds.samples, *predictor);
        write_reports(args.out, std::span(&report, 1));
        io.out << format_table(std::span(&report, 1));
        return kExitOk;
      },
      io);
}

int cmd_crossval(const CrossvalArgs& args, Streams io) {
  return guarded(
      [&] {
        RunConfig cfg = config_or_default(args.config);
        const ModelConfig model = cfg.model.resolved();
        if (!fs::exists(cfg.data.dir / "manifest.json")) {
          io.out << "generating " << cfg.data.n << " samples into " << cfg.data.dir.string() << "\n";
          generate_dataset(cfg.data.n, cfg.data.seed, cfg.phantom, cfg.phantom_size(), cfg.data.dir);
        }
        const Dataset ds = load_checked(cfg.data.dir, model);
        const auto folds = kfold(ds.samples.size(), cfg.crossval.folds, cfg.crossval.seed);

        std::vector<EvalReport> reports;
        for (const auto& name : cfg.crossval.methods) {
          if (name == "Mean") continue;
          io.out << "cross-validating " << name << " (" << folds.size() << " folds)\n" << std::flush;
          ModelLearner learner(name, model, AblationConfig::from_name(name), cfg.train);
          reports.push_back(run_protocol(ds.samples, learner, folds));
        }
        MeanLearner mean;
        reports.push_back(run_protocol(ds.samples, mean, folds));

        const fs::path out = args.out.value_or(cfg.crossval.out);
        write_reports(out, reports);
        io.out << format_table(reports);
        io.out << "reports in " << out.string() << "\n";
        return kExitOk;
      },
      io);
}

int cmd_gradcheck(const GradcheckArgs& args, Streams io) {
  return guarded(
      [&] {
        GradSuiteOptions options;
        options.seed = args.seed;
        options.configurations = args.configurations;
        const auto results = run_gradcheck_suite(options, args.only);
        bool ok = true;
        for (const auto& r : results) {
          char line[160];
          std::snprintf(line, sizeof line, "%-4s %-24s configs %-3zu max rel err %.3e\n",
                        r.passed ? "PASS" : "FAIL", r.name.c_str(), r.configurations,
                        r.max_relative_error);
          io.out << line;
          ok = ok && r.passed;
        }
        return ok ? kExitOk : kExitNumeric;
      },
      io);
}

}  // namespace dmqca::cli
