#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

#include "hyperkge/eval.hpp"
#include "hyperkge/io.hpp"
#include "hyperkge/train.hpp"

using namespace hyperkge;
namespace fs = std::filesystem;

namespace {

struct RunResult {
  int code = -1;
  std::string out;
  std::string err;
};

struct TempDir {
  fs::path path;

  TempDir() {
    static std::atomic<int> counter{0};
    path = fs::temp_directory_path() /
           ("hyperkge-cli-" + std::to_string(::getpid()) + "-" +
            std::to_string(counter.fetch_add(1)));
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
};

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

const char* cli_path() {
#ifdef HYPERKGE_CLI_PATH
  return HYPERKGE_CLI_PATH;
#else
  const char* path = std::getenv("HYPERKGE_CLI_PATH");
  REQUIRE_MESSAGE(path != nullptr, "HYPERKGE_CLI_PATH must point at the CLI");
  return path;
#endif
}

// Runs the CLI with `args`, capturing exit code, stdout and stderr.
// `env_prefix` may hold VAR=value assignments.
RunResult run_cli(const std::string& args, const std::string& env_prefix = "") {
  const TempDir scratch;
  const fs::path out_path = scratch.path / "out";
  const fs::path err_path = scratch.path / "err";
  std::string command = env_prefix.empty() ? "" : env_prefix + " ";
  command += std::string("'") + cli_path() + "' " + args + " > '" +
             out_path.string() + "' 2> '" + err_path.string() + "'";
  const int status = std::system(command.c_str());
  RunResult result;
  result.out = slurp(out_path);
  result.err = slurp(err_path);
  if (status == -1) {
    return result;
  }
  result.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return result;
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
}

// 8 entities, 2 relations; enough structure for a few epochs to run.
void write_dataset(const fs::path& dir) {
  fs::create_directories(dir);
  write_file(dir / "train.txt",
             "a\tr0\tb\nb\tr0\tc\nc\tr0\td\nd\tr0\te\n"
             "e\tr0\tf\nf\tr0\tg\ng\tr0\th\nh\tr0\ta\n"
             "a\tr1\tc\nb\tr1\td\nc\tr1\te\nd\tr1\tf\n");
  write_file(dir / "valid.txt", "e\tr1\tg\nf\tr1\th\n");
  write_file(dir / "test.txt", "g\tr1\ta\n");
}

bool contains(const std::string& haystack, const std::string& needle) {
  return haystack.find(needle) != std::string::npos;
}

}  // namespace

TEST_CASE("a subcommand is required") {
  CHECK(run_cli("").code == 1);
  CHECK(run_cli("frobnicate").code == 1);
}

TEST_CASE("unknown flags fail fast") {
  const TempDir dir;
  write_dataset(dir.path / "data");
  const RunResult result =
      run_cli("train --data '" + (dir.path / "data").string() + "' --bogus 1");
  CHECK(result.code == 1);
}

TEST_CASE("train writes a checkpoint, a log and echoes its config") {
  const TempDir dir;
  write_dataset(dir.path / "data");
  const fs::path ckpt = dir.path / "model.ckpt";
  const RunResult result = run_cli(
      "train --data '" + (dir.path / "data").string() + "' --output '" +
      ckpt.string() + "' --k 4 --epochs 3 --neg 2 --seed 7 --quiet");
  CAPTURE(result.err);
  REQUIRE(result.code == 0);
  CHECK(contains(result.out, "variant = quate"));
  CHECK(contains(result.out, "k = 4"));
  CHECK(contains(result.out, "epochs = 3"));
  CHECK(contains(result.out, "checkpoint " + ckpt.string()));
  REQUIRE(fs::exists(ckpt));

  const Checkpoint loaded = load_checkpoint(ckpt);
  CHECK(loaded.table.num_entities() == 8);
  CHECK(loaded.table.num_relations() == 2);
  CHECK(loaded.table.dim() == 4);

  // Log: one line per epoch.
  const std::string log = slurp(fs::path(ckpt.string() + ".log"));
  CHECK(std::count(log.begin(), log.end(), '\n') == 3);

  // Dataset summary goes to stderr even in quiet mode.
  CHECK(contains(result.err, "triples: train=12"));
}

TEST_CASE("train with zero epochs persists the seeded initialization") {
  const TempDir dir;
  write_dataset(dir.path / "data");
  const fs::path ckpt = dir.path / "init.ckpt";
  const RunResult result = run_cli(
      "train --data '" + (dir.path / "data").string() + "' --output '" +
      ckpt.string() + "' --k 6 --epochs 0 --seed 21 --quiet");
  REQUIRE(result.code == 0);

  TrainConfig config;
  config.k = 6;
  config.seed = 21;
  std::mt19937_64 rng(config.seed);
  const EmbeddingTable expect = init_embeddings(config, 8, 2, rng);
  const Checkpoint loaded = load_checkpoint(ckpt);
  REQUIRE(loaded.table.entity_data().size() == expect.entity_data().size());
  for (std::size_t i = 0; i < expect.entity_data().size(); ++i) {
    REQUIRE(loaded.table.entity_data()[i] ==
            static_cast<double>(static_cast<float>(expect.entity_data()[i])));
  }
}

TEST_CASE("identical train invocations produce identical checkpoints") {
  const TempDir dir;
  write_dataset(dir.path / "data");
  const std::string base = "train --data '" + (dir.path / "data").string() +
                           "' --k 4 --epochs 2 --seed 3 --quiet --output '";
  REQUIRE(run_cli(base + (dir.path / "a.ckpt").string() + "'").code == 0);
  REQUIRE(run_cli(base + (dir.path / "b.ckpt").string() + "'").code == 0);
  CHECK(slurp(dir.path / "a.ckpt") == slurp(dir.path / "b.ckpt"));
}

TEST_CASE("presets resolve by name and flags override them") {
  const TempDir dir;
  write_dataset(dir.path / "data");
  const RunResult result = run_cli(
      "train --data '" + (dir.path / "data").string() + "' --output '" +
      (dir.path / "m.ckpt").string() +
      "' --preset quate1-wn18rr --epochs 1 --eval_every 0 --patience 0 --quiet");
  CAPTURE(result.err);
  REQUIRE(result.code == 0);
  CHECK(contains(result.out, "k = 100"));
  CHECK(contains(result.out, "lambda1 = 0.1"));
  CHECK(contains(result.out, "lambda2 = 0.1"));
  CHECK(contains(result.out, "neg = 1"));
  CHECK(contains(result.out, "epochs = 1"));  // flag wins over preset
}

TEST_CASE("preset files can come from an environment directory") {
  const TempDir dir;
  write_dataset(dir.path / "data");
  fs::create_directories(dir.path / "presets");
  write_file(dir.path / "presets" / "tiny.conf",
             "k = 5\nepochs = 1\nneg = 2\n");
  const RunResult result = run_cli(
      "train --data '" + (dir.path / "data").string() + "' --output '" +
      (dir.path / "m.ckpt").string() + "' --preset tiny --quiet",
      "HYPERKGE_PRESETS='" + (dir.path / "presets").string() + "'");
  CAPTURE(result.err);
  REQUIRE(result.code == 0);
  CHECK(contains(result.out, "k = 5"));
  CHECK(contains(result.out, "neg = 2"));
}

TEST_CASE("config mistakes exit with usage errors") {
  const TempDir dir;
  write_dataset(dir.path / "data");
  const std::string data = (dir.path / "data").string();

  SUBCASE("bad flag value") {
    const RunResult result =
        run_cli("train --data '" + data + "' --sampler nope --quiet");
    CHECK(result.code == 1);
  }
  SUBCASE("out-of-range value") {
    const RunResult result =
        run_cli("train --data '" + data + "' --k 0 --quiet");
    CHECK(result.code == 1);
    CHECK(contains(result.err, "error: "));
  }
  SUBCASE("unknown preset") {
    const RunResult result =
        run_cli("train --data '" + data + "' --preset never-heard-of-it");
    CHECK(result.code == 1);
  }
  SUBCASE("unknown key in a preset file") {
    write_file(dir.path / "bad.conf", "k = 4\nmomentum = 0.9\n");
    const RunResult result = run_cli("train --data '" + data +
                                     "' --preset '" +
                                     (dir.path / "bad.conf").string() + "'");
    CHECK(result.code == 1);
    CHECK(contains(result.err, "unknown key"));
  }
  SUBCASE("octonion shorthand conflicts with another variant") {
    const RunResult result = run_cli("train --data '" + data +
                                     "' --variant distmult --octonion");
    CHECK(result.code == 1);
  }
}

TEST_CASE("missing datasets exit with a data error") {
  const RunResult result = run_cli("train --data /nonexistent/dataset");
  CHECK(result.code == 2);
  CHECK(contains(result.err, "error: "));
}

TEST_CASE("the data flag accepts names under HYPERKGE_DATA") {
  const TempDir dir;
  write_dataset(dir.path / "root" / "toy");
  const RunResult result = run_cli(
      "params --data toy --k 3",
      "HYPERKGE_DATA='" + (dir.path / "root").string() + "'");
  REQUIRE(result.code == 0);
  CHECK(result.out ==
        std::to_string(parameter_count(8, 2, 3, ModelVariant::kQuatE, false)) +
            "\n");
}

TEST_CASE("eval reports metrics for both splits") {
  const TempDir dir;
  write_dataset(dir.path / "data");
  const std::string data = (dir.path / "data").string();
  const fs::path ckpt = dir.path / "model.ckpt";
  REQUIRE(run_cli("train --data '" + data + "' --output '" + ckpt.string() +
                  "' --k 4 --epochs 2 --quiet")
              .code == 0);

  const RunResult test_run =
      run_cli("eval --checkpoint '" + ckpt.string() + "' --data '" + data + "'");
  CAPTURE(test_run.err);
  REQUIRE(test_run.code == 0);
  CHECK(contains(test_run.out, "queries\t2"));  // 1 test triple
  CHECK(contains(test_run.out, "MRR\t"));

  const RunResult valid_run = run_cli("eval --checkpoint '" + ckpt.string() +
                                      "' --data '" + data + "' --split valid");
  REQUIRE(valid_run.code == 0);
  CHECK(contains(valid_run.out, "queries\t4"));  // 2 valid triples

  const RunResult rel_run =
      run_cli("eval --checkpoint '" + ckpt.string() + "' --data '" + data +
              "' --per-relation --ties pessimistic --type-constraints");
  REQUIRE(rel_run.code == 0);
  CHECK(contains(rel_run.out, "per-relation MRR"));
  CHECK(contains(rel_run.out, "r1"));

  SUBCASE("bad split name") {
    CHECK(run_cli("eval --checkpoint '" + ckpt.string() + "' --data '" + data +
                  "' --split dev")
              .code == 1);
  }
  SUBCASE("mismatched dataset") {
    const TempDir other;
    write_file(other.path / "train.txt", "x\tq\ty\n");
    write_file(other.path / "valid.txt", "");
    write_file(other.path / "test.txt", "x\tq\ty\n");
    CHECK(run_cli("eval --checkpoint '" + ckpt.string() + "' --data '" +
                  other.path.string() + "'")
              .code == 2);
  }
  SUBCASE("corrupted checkpoint") {
    std::string bytes = slurp(ckpt);
    bytes[bytes.size() / 2] = static_cast<char>(bytes[bytes.size() / 2] ^ 0x20);
    write_file(dir.path / "bad.ckpt", bytes);
    CHECK(run_cli("eval --checkpoint '" + (dir.path / "bad.ckpt").string() +
                  "' --data '" + data + "'")
              .code == 2);
  }
}

TEST_CASE("reciprocal training carries through to evaluation") {
  const TempDir dir;
  write_dataset(dir.path / "data");
  const std::string data = (dir.path / "data").string();
  const fs::path ckpt = dir.path / "recip.ckpt";
  const RunResult trained =
      run_cli("train --data '" + data + "' --output '" + ckpt.string() +
              "' --k 4 --epochs 2 --reciprocal true --quiet");
  CAPTURE(trained.err);
  REQUIRE(trained.code == 0);
  const Checkpoint loaded = load_checkpoint(ckpt);
  CHECK(loaded.reciprocal);
  CHECK(loaded.table.num_relations() == 4);

  const RunResult evaled =
      run_cli("eval --checkpoint '" + ckpt.string() + "' --data '" + data + "'");
  CAPTURE(evaled.err);
  REQUIRE(evaled.code == 0);
  CHECK(contains(evaled.out, "MRR\t"));
}

TEST_CASE("export prints sections and respects --output") {
  const TempDir dir;
  write_dataset(dir.path / "data");
  const std::string data = (dir.path / "data").string();
  const fs::path ckpt = dir.path / "model.ckpt";
  REQUIRE(run_cli("train --data '" + data + "' --output '" + ckpt.string() +
                  "' --k 3 --epochs 1 --quiet")
              .code == 0);

  const RunResult to_stdout =
      run_cli("export --checkpoint '" + ckpt.string() + "' --data '" + data + "'");
  REQUIRE(to_stdout.code == 0);
  CHECK(contains(to_stdout.out, "# section entities"));
  CHECK(contains(to_stdout.out, "a\t"));  // vocab names present

  const fs::path tsv = dir.path / "dump.tsv";
  const RunResult to_file = run_cli("export --checkpoint '" + ckpt.string() +
                                    "' --output '" + tsv.string() + "'");
  REQUIRE(to_file.code == 0);
  const std::string dumped = slurp(tsv);
  CHECK(contains(dumped, "# section entities"));
  CHECK(contains(dumped, "e0\t"));  // no names without --data

  // Same checkpoint, same bytes.
  const RunResult again = run_cli("export --checkpoint '" + ckpt.string() +
                                  "' --output '" + tsv.string() + ".2'");
  REQUIRE(again.code == 0);
  CHECK(slurp(tsv) == slurp(fs::path(tsv.string() + ".2")));
}

TEST_CASE("params reports embedding sizes without training") {
  const TempDir dir;
  write_dataset(dir.path / "data");
  const std::string data = (dir.path / "data").string();

  const RunResult plain = run_cli("params --data '" + data + "' --k 10");
  REQUIRE(plain.code == 0);
  CHECK(plain.out == std::to_string(parameter_count(
                         8, 2, 10, ModelVariant::kQuatE, false)) +
                         "\n");

  const RunResult reciprocal =
      run_cli("params --data '" + data + "' --k 10 --reciprocal");
  REQUIRE(reciprocal.code == 0);
  CHECK(reciprocal.out ==
        std::to_string(parameter_count(8, 2, 10, ModelVariant::kQuatE, true)) +
            "\n");

  const RunResult octonion =
      run_cli("params --data '" + data + "' --k 10 --octonion");
  REQUIRE(octonion.code == 0);
  CHECK(octonion.out ==
        std::to_string(parameter_count(8, 2, 10, ModelVariant::kOctonionE,
                                       false)) +
            "\n");
}

TEST_CASE("dictionaries are dumped next to the checkpoint on request") {
  const TempDir dir;
  write_dataset(dir.path / "data");
  const fs::path ckpt = dir.path / "out" / "model.ckpt";
  fs::create_directories(ckpt.parent_path());
  const RunResult result = run_cli(
      "train --data '" + (dir.path / "data").string() + "' --output '" +
      ckpt.string() + "' --k 3 --epochs 1 --dump-dictionaries --quiet");
  CAPTURE(result.err);
  REQUIRE(result.code == 0);
  CHECK(fs::exists(ckpt.parent_path() / "entities.dict"));
  CHECK(fs::exists(ckpt.parent_path() / "relations.dict"));
  CHECK(contains(slurp(ckpt.parent_path() / "entities.dict"), "0\ta"));
}

TEST_CASE("the cubed-modulus penalty switches off normalization by default") {
  const TempDir dir;
  write_dataset(dir.path / "data");
  const std::string base =
      "train --data '" + (dir.path / "data").string() + "' --output '" +
      (dir.path / "m.ckpt").string() + "' --k 3 --epochs 1 --n3 0.1 --quiet";

  const RunResult switched = run_cli(base);
  CAPTURE(switched.err);
  REQUIRE(switched.code == 0);
  CHECK(contains(switched.out, "variant = quate-raw"));
  CHECK(contains(switched.err, "switching"));

  const RunResult kept = run_cli(base + " --keep-normalization");
  REQUIRE(kept.code == 0);
  CHECK(contains(kept.out, "variant = quate"));
}
