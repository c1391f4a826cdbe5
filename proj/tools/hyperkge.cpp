#include <iostream>
#include <map>
#include <string>

#include <CLI11.hpp>

#include "hyperkge/commands.hpp"

namespace {

using hyperkge::Settings;

// Registers one --flag per training tunable; values land in `holders` and
// only flags the user actually passed are copied into the override set.
struct TrainFlagSet {
  std::map<std::string, std::string> holders;
  std::map<std::string, CLI::Option*> options;

  void attach(CLI::App& app) {
    static const std::pair<const char*, const char*> kFlags[] = {
        {"variant", "scoring variant (quate, quate-raw, weighted-product, "
                    "dual-rotation, complex, distmult, octonione)"},
        {"k", "embedding dimension"},
        {"lambda1", "entity L2 rate"},
        {"lambda2", "relation L2 rate"},
        {"n3", "cubed-modulus penalty rate"},
        {"neg", "negatives per positive"},
        {"lr", "learning rate"},
        {"epochs", "training epochs"},
        {"batches", "batches per epoch"},
        {"sampler", "corruption sampler (uniform, bernoulli)"},
        {"reciprocal", "train reversed triples on a second relation block"},
        {"type_constraints", "constrain corruptions and candidates to "
                             "observed slot fillers"},
        {"strict_negatives", "resample corruptions that hit observed triples"},
        {"seed", "RNG seed"},
        {"eval_every", "epochs between validation evaluations (0 is off)"},
        {"patience", "stagnant evaluations before stopping (0 is off)"},
        {"workers", "worker threads (1 is deterministic)"},
        {"init", "initializer (auto, rotation, uniform)"},
    };
    for (const auto& [key, help] : kFlags) {
      options[key] =
          app.add_option("--" + std::string(key), holders[key], help);
    }
  }

  Settings overrides() const {
    Settings set;
    for (const auto& [key, opt] : options) {
      if (opt->count() > 0) {
        set[key] = holders.at(key);
      }
    }
    return set;
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"quaternion and octonion knowledge graph embeddings"};
  app.require_subcommand(1);

  hyperkge::TrainCommand train_cmd;
  TrainFlagSet train_flags;
  std::string train_preset;
  std::string train_log;
  bool train_octonion = false;
  CLI::App* train = app.add_subcommand("train", "train a model");
  train->add_option("--data", train_cmd.data, "dataset directory or name")
      ->required();
  train->add_option("--preset", train_preset, "config preset name or path");
  train->add_option("--output", train_cmd.output, "checkpoint output path");
  train->add_option("--log", train_log, "training log path");
  train->add_flag("--octonion", train_octonion,
                  "shorthand for --variant octonione");
  train->add_flag("--dump-dictionaries", train_cmd.dump_dictionaries,
                  "write entities.dict and relations.dict next to the "
                  "checkpoint");
  train->add_flag("--keep-normalization", train_cmd.keep_normalization,
                  "keep relation normalization under the cubed-modulus "
                  "penalty");
  train->add_flag("--quiet", train_cmd.quiet, "no per-epoch stderr output");
  train_flags.attach(*train);

  hyperkge::EvalCommand eval_cmd;
  std::string eval_split = "test";
  std::string eval_ties = "average";
  CLI::App* eval = app.add_subcommand("eval", "evaluate a checkpoint");
  eval->add_option("--checkpoint", eval_cmd.checkpoint, "checkpoint path")
      ->required();
  eval->add_option("--data", eval_cmd.data, "dataset directory or name")
      ->required();
  eval->add_option("--split", eval_split, "split to evaluate (valid, test)");
  eval->add_option("--ties", eval_ties,
                   "tie convention (average, optimistic, pessimistic)");
  eval->add_flag("--type-constraints", eval_cmd.type_constraints,
                 "restrict candidates to observed slot fillers");
  eval->add_flag("--per-relation", eval_cmd.per_relation,
                 "include per-relation MRR");
  eval->add_option("--workers", eval_cmd.workers, "worker threads");

  hyperkge::ExportCommand export_cmd;
  std::string export_data;
  std::string export_output;
  CLI::App* exp = app.add_subcommand("export", "dump a checkpoint as TSV");
  exp->add_option("--checkpoint", export_cmd.checkpoint, "checkpoint path")
      ->required();
  exp->add_option("--data", export_data,
                  "dataset supplying entity and relation names");
  exp->add_option("--output", export_output, "output file (default stdout)");

  hyperkge::ParamsCommand params_cmd;
  std::string params_variant = "quate";
  bool params_octonion = false;
  CLI::App* params =
      app.add_subcommand("params", "count a model's free parameters");
  params->add_option("--data", params_cmd.data, "dataset directory or name")
      ->required();
  params->add_option("--k", params_cmd.k, "embedding dimension");
  params->add_option("--variant", params_variant, "scoring variant");
  params->add_flag("--octonion", params_octonion,
                   "shorthand for --variant octonione");
  params->add_flag("--reciprocal", params_cmd.reciprocal,
                   "count the reciprocal relation block");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (train->parsed()) {
      train_cmd.overrides = train_flags.overrides();
      if (train_octonion) {
        const auto it = train_cmd.overrides.find("variant");
        if (it != train_cmd.overrides.end() && it->second != "octonione") {
          throw hyperkge::UsageError(
              "--octonion conflicts with --variant " + it->second);
        }
        train_cmd.overrides["variant"] = "octonione";
      }
      if (!train_preset.empty()) {
        train_cmd.preset = train_preset;
      }
      if (!train_log.empty()) {
        train_cmd.log_path = train_log;
      }
      hyperkge::cmd_train(train_cmd, std::cout, std::cerr);
    } else if (eval->parsed()) {
      const auto split = hyperkge::split_from_name(eval_split);
      if (!split.has_value()) {
        throw hyperkge::UsageError("unknown split: " + eval_split);
      }
      eval_cmd.split = *split;
      const auto ties = hyperkge::tiebreak_from_name(eval_ties);
      if (!ties.has_value()) {
        throw hyperkge::UsageError("unknown tie convention: " + eval_ties);
      }
      eval_cmd.ties = *ties;
      hyperkge::cmd_eval(eval_cmd, std::cout);
    } else if (exp->parsed()) {
      if (!export_data.empty()) {
        export_cmd.data = export_data;
      }
      if (!export_output.empty()) {
        export_cmd.output = export_output;
      }
      hyperkge::cmd_export(export_cmd, std::cout);
    } else if (params->parsed()) {
      if (params_octonion) {
        if (params->count("--variant") > 0 && params_variant != "octonione") {
          throw hyperkge::UsageError("--octonion conflicts with --variant " +
                                     params_variant);
        }
        params_variant = "octonione";
      }
      const auto variant = hyperkge::variant_from_name(params_variant);
      if (!variant.has_value()) {
        throw hyperkge::UsageError("unknown variant: " + params_variant);
      }
      params_cmd.variant = *variant;
      hyperkge::cmd_params(params_cmd, std::cout);
    }
  } catch (const hyperkge::UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const hyperkge::DataError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const hyperkge::NumericError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
  return 0;
}
