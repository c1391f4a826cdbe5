#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

#include "hyperkge/config.hpp"
#include "hyperkge/eval.hpp"

namespace hyperkge {

// Resolves a dataset argument: an existing directory is used as-is,
// otherwise the name is looked up under $HYPERKGE_DATA.
std::filesystem::path resolve_data_dir(const std::string& name_or_path);

struct TrainCommand {
  std::string data;
  std::optional<std::string> preset;
  Settings overrides;  // flag-level settings, applied after the preset
  std::filesystem::path output = "model.ckpt";
  std::optional<std::filesystem::path> log_path;  // default: output + ".log"
  bool dump_dictionaries = false;
  // Keep relation normalization even when the cubed-modulus penalty is on.
  bool keep_normalization = false;
  bool quiet = false;
};

// Trains per the resolved config, writes the best checkpoint and the
// training log, echoes the resolved config to `out`.
void cmd_train(const TrainCommand& cmd, std::ostream& out, std::ostream& err);

struct EvalCommand {
  std::filesystem::path checkpoint;
  std::string data;
  Split split = Split::kTest;
  TieBreak ties = TieBreak::kAverage;
  bool type_constraints = false;
  bool per_relation = false;
  int workers = 1;
};

void cmd_eval(const EvalCommand& cmd, std::ostream& out);

struct ExportCommand {
  std::filesystem::path checkpoint;
  std::optional<std::string> data;  // names come from here when given
  std::optional<std::filesystem::path> output;  // default: stdout
};

void cmd_export(const ExportCommand& cmd, std::ostream& out);

struct ParamsCommand {
  std::string data;
  std::size_t k = 100;
  ModelVariant variant = ModelVariant::kQuatE;
  bool reciprocal = false;
};

void cmd_params(const ParamsCommand& cmd, std::ostream& out);

}  // namespace hyperkge
