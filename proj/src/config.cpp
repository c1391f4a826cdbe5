#include "hyperkge/config.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

namespace hyperkge {
namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) {
    return "";
  }
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value) {
  throw UsageError("config: bad value '" + value + "' for key '" + key + "'");
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "yes" || value == "1") {
    return true;
  }
  if (value == "false" || value == "no" || value == "0") {
    return false;
  }
  bad_value(key, value);
}

double parse_double(const std::string& key, const std::string& value) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(value, &used);
  } catch (const std::exception&) {
    bad_value(key, value);
  }
  if (used != value.size()) {
    bad_value(key, value);
  }
  return v;
}

long long parse_int(const std::string& key, const std::string& value) {
  std::size_t used = 0;
  long long v = 0;
  try {
    v = std::stoll(value, &used);
  } catch (const std::exception&) {
    bad_value(key, value);
  }
  if (used != value.size()) {
    bad_value(key, value);
  }
  return v;
}

}  // namespace

Settings parse_settings(std::istream& in, const std::string& origin) {
  Settings settings;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) {
      line.resize(hash);
    }
    line = trim(line);
    if (line.empty()) {
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw UsageError(origin + ":" + std::to_string(line_no) +
                       ": expected 'key = value'");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) {
      throw UsageError(origin + ":" + std::to_string(line_no) +
                       ": empty key");
    }
    settings[key] = value;
  }
  return settings;
}

Settings parse_settings_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw DataError("cannot open config file: " + path.string());
  }
  return parse_settings(in, path.string());
}

void apply_settings(TrainConfig& config, const Settings& settings) {
  for (const auto& [key, value] : settings) {
    if (key == "variant") {
      const auto v = variant_from_name(value);
      if (!v.has_value()) {
        bad_value(key, value);
      }
      config.variant = *v;
    } else if (key == "k") {
      const long long v = parse_int(key, value);
      if (v < 1) {
        bad_value(key, value);
      }
      config.k = static_cast<std::size_t>(v);
    } else if (key == "lambda1") {
      config.lambda1 = parse_double(key, value);
    } else if (key == "lambda2") {
      config.lambda2 = parse_double(key, value);
    } else if (key == "n3") {
      config.n3_weight = parse_double(key, value);
    } else if (key == "neg") {
      config.neg_per_pos = static_cast<int>(parse_int(key, value));
    } else if (key == "lr") {
      config.lr = parse_double(key, value);
    } else if (key == "epochs") {
      config.epochs = static_cast<int>(parse_int(key, value));
    } else if (key == "batches") {
      config.batch_count = static_cast<int>(parse_int(key, value));
    } else if (key == "sampler") {
      const auto s = sampler_from_name(value);
      if (!s.has_value()) {
        bad_value(key, value);
      }
      config.sampler = *s;
    } else if (key == "reciprocal") {
      config.reciprocal = parse_bool(key, value);
    } else if (key == "type_constraints") {
      const bool v = parse_bool(key, value);
      config.type_constrained_sampling = v;
      config.type_constrained_eval = v;
    } else if (key == "strict_negatives") {
      config.strict_negatives = parse_bool(key, value);
    } else if (key == "seed") {
      config.seed = static_cast<std::uint64_t>(parse_int(key, value));
    } else if (key == "eval_every") {
      config.eval_every = static_cast<int>(parse_int(key, value));
    } else if (key == "patience") {
      config.patience = static_cast<int>(parse_int(key, value));
    } else if (key == "workers") {
      config.workers = static_cast<int>(parse_int(key, value));
    } else if (key == "init") {
      const auto s = init_from_name(value);
      if (!s.has_value()) {
        bad_value(key, value);
      }
      config.init = *s;
    } else {
      throw UsageError("config: unknown key '" + key + "'");
    }
  }
  config.validate();
}

std::string config_text(const TrainConfig& config) {
  std::ostringstream out;
  out << "variant = " << variant_name(config.variant) << '\n'
      << "k = " << config.k << '\n'
      << "lambda1 = " << config.lambda1 << '\n'
      << "lambda2 = " << config.lambda2 << '\n'
      << "n3 = " << config.n3_weight << '\n'
      << "neg = " << config.neg_per_pos << '\n'
      << "lr = " << config.lr << '\n'
      << "epochs = " << config.epochs << '\n'
      << "batches = " << config.batch_count << '\n'
      << "sampler = " << sampler_name(config.sampler) << '\n'
      << "reciprocal = " << (config.reciprocal ? "true" : "false") << '\n'
      << "type_constraints = "
      << (config.type_constrained_sampling && config.type_constrained_eval
              ? "true"
              : "false")
      << '\n'
      << "strict_negatives = "
      << (config.strict_negatives ? "true" : "false") << '\n'
      << "seed = " << config.seed << '\n'
      << "eval_every = " << config.eval_every << '\n'
      << "patience = " << config.patience << '\n'
      << "workers = " << config.workers << '\n'
      << "init = " << init_name(config.init) << '\n';
  return out.str();
}

std::filesystem::path resolve_preset(const std::string& name_or_path) {
  namespace fs = std::filesystem;
  const fs::path direct(name_or_path);
  if (fs::is_regular_file(direct)) {
    return direct;
  }
  const std::string filename = name_or_path + ".conf";
  if (const char* env = std::getenv("HYPERKGE_PRESETS")) {
    const fs::path candidate = fs::path(env) / filename;
    if (fs::is_regular_file(candidate)) {
      return candidate;
    }
  }
#ifdef HYPERKGE_PRESET_DIR
  {
    const fs::path candidate = fs::path(HYPERKGE_PRESET_DIR) / filename;
    if (fs::is_regular_file(candidate)) {
      return candidate;
    }
  }
#endif
  throw UsageError("preset not found: " + name_or_path);
}

}  // namespace hyperkge
