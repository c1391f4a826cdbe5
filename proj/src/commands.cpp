#include "hyperkge/commands.hpp"

#include <cstdlib>
#include <fstream>
#include <iostream>

#include "hyperkge/io.hpp"

namespace hyperkge {

namespace fs = std::filesystem;

std::filesystem::path resolve_data_dir(const std::string& name_or_path) {
  if (name_or_path.empty()) {
    throw UsageError("no dataset given");
  }
  const fs::path direct(name_or_path);
  if (fs::is_directory(direct)) {
    return direct;
  }
  if (const char* env = std::getenv("HYPERKGE_DATA")) {
    const fs::path candidate = fs::path(env) / name_or_path;
    if (fs::is_directory(candidate)) {
      return candidate;
    }
  }
  throw DataError("dataset directory not found: " + name_or_path);
}

void cmd_train(const TrainCommand& cmd, std::ostream& out, std::ostream& err) {
  TrainConfig config;
  if (cmd.preset.has_value()) {
    apply_settings(config, parse_settings_file(resolve_preset(*cmd.preset)));
  }
  apply_settings(config, cmd.overrides);

  if (config.n3_weight > 0.0 && normalizes_relations(config.variant) &&
      !cmd.keep_normalization) {
    if (config.variant == ModelVariant::kQuatE) {
      err << "note: cubed-modulus penalty is on; switching to the"
             " unnormalized scoring variant (pass --keep-normalization to"
             " override)\n";
      config.variant = ModelVariant::kQuatERaw;
    } else {
      err << "warning: cubed-modulus penalty combined with relation"
             " normalization; no unnormalized twin exists for variant '"
          << variant_name(config.variant) << "'\n";
    }
  }

  Dataset dataset = load_dir(resolve_data_dir(cmd.data));
  err << dataset.summary.to_text();
  if (config.reciprocal) {
    add_reciprocals(dataset);
  }

  out << config_text(config);
  out.flush();

  const fs::path log_path =
      cmd.log_path.value_or(fs::path(cmd.output.string() + ".log"));
  std::ofstream log(log_path, std::ios::trunc);
  if (!log) {
    throw DataError("cannot open training log for writing: " +
                    log_path.string());
  }

  const auto on_epoch = [&](const EpochRecord& record) {
    const std::string line = format_log_line(record);
    log << line << '\n';
    log.flush();
    if (!cmd.quiet) {
      err << line << '\n';
    }
  };
  TrainResult result = train(dataset.store, config, on_epoch);

  save_checkpoint(cmd.output, result.table, config.reciprocal);
  out << "checkpoint " << cmd.output.string() << '\n';
  if (result.best_epoch >= 0) {
    out << "best_epoch " << result.best_epoch << '\n'
        << "best_valid_mrr " << result.best_mrr << '\n';
  }
  if (cmd.dump_dictionaries) {
    write_dictionaries(dataset.vocab, cmd.output.parent_path());
  }
}

void cmd_eval(const EvalCommand& cmd, std::ostream& out) {
  Checkpoint ckpt = load_checkpoint(cmd.checkpoint);
  Dataset dataset = load_dir(resolve_data_dir(cmd.data));
  if (ckpt.reciprocal) {
    add_reciprocals(dataset);
  }
  if (ckpt.table.num_entities() != dataset.store.num_entities()) {
    throw DataError("checkpoint has " +
                    std::to_string(ckpt.table.num_entities()) +
                    " entities but the dataset has " +
                    std::to_string(dataset.store.num_entities()));
  }
  if (ckpt.table.num_relations() != dataset.store.num_relations()) {
    throw DataError("checkpoint has " +
                    std::to_string(ckpt.table.num_relations()) +
                    " relations but the dataset has " +
                    std::to_string(dataset.store.num_relations()));
  }

  EvalOptions options;
  options.split = cmd.split;
  options.ties = cmd.ties;
  options.reciprocal = ckpt.reciprocal;
  options.type_constraints = cmd.type_constraints;
  options.workers = cmd.workers;
  const RankReport report = evaluate(ckpt.table, dataset.store, options);
  out << report.to_text(cmd.per_relation, &dataset.vocab);
}

void cmd_export(const ExportCommand& cmd, std::ostream& out) {
  Checkpoint ckpt = load_checkpoint(cmd.checkpoint);
  std::optional<Dataset> dataset;
  if (cmd.data.has_value()) {
    dataset = load_dir(resolve_data_dir(*cmd.data));
    if (ckpt.reciprocal) {
      add_reciprocals(*dataset);
    }
  }
  const Vocabulary* vocab =
      dataset.has_value() ? &dataset->vocab : nullptr;
  if (cmd.output.has_value()) {
    std::ofstream file(*cmd.output, std::ios::trunc);
    if (!file) {
      throw DataError("cannot open output file: " + cmd.output->string());
    }
    export_tsv(file, ckpt.table, ckpt.reciprocal, vocab);
  } else {
    export_tsv(out, ckpt.table, ckpt.reciprocal, vocab);
  }
}

void cmd_params(const ParamsCommand& cmd, std::ostream& out) {
  const Dataset dataset = load_dir(resolve_data_dir(cmd.data));
  out << parameter_count(dataset.store.num_entities(),
                         dataset.store.num_relations(), cmd.k, cmd.variant,
                         cmd.reciprocal)
      << '\n';
}

}  // namespace hyperkge
