// ifstail <kind> --config <path> [--seed S] [--out DIR] [--threads T]

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "ifstail/config.hpp"
#include "ifstail/experiment.hpp"

namespace {

std::string read_file(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  ifstail::require(static_cast<bool>(in), ifstail::ErrorCode::IoError,
                   "cannot open " + path);
  std::ostringstream text;
  text << in.rdbuf();
  return text.str();
}

}  // namespace

int main(int argc, char **argv) {
  CLI::App app{"Stationary measures of random Lipschitz maps: sampling, tails, "
               "large deviations, entropy"};
  std::string kind;
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_dir;
  unsigned threads = 0;

  std::vector<std::string> kinds(std::begin(ifstail::kExperimentNames),
                                 std::end(ifstail::kExperimentNames));
  app.add_option("kind", kind, "Experiment to run")
      ->required()
      ->check(CLI::IsMember(kinds));
  app.add_option("--config", config_path, "JSON configuration file")
      ->required();
  app.add_option("--seed", seed, "Override the configured seed");
  app.add_option("--out", out_dir,
                 "Output directory (default $IFSTAIL_OUT_DIR or ./out)");
  app.add_option("--threads", threads, "Worker threads, 0 = all cores");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    const int code = app.exit(e);
    return code == 0 ? ifstail::kExitOk : ifstail::kExitError;
  }

  if (out_dir.empty()) {
    const char *env = std::getenv("IFSTAIL_OUT_DIR");
    out_dir = env != nullptr && *env != '\0' ? env : "out";
  }

  try {
    auto config = ifstail::parse_config(read_file(config_path),
                                        ifstail::parse_experiment_kind(kind));
    if (seed) config.seed = *seed;
    const auto result = ifstail::run_experiment(config, {out_dir, threads});
    for (const auto &line : result.lines) std::cout << line << '\n';
    return result.exit_code;
  } catch (const ifstail::Error &e) {
    std::cerr << "error: " << e.what() << '\n';
    return ifstail::kExitError;
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << '\n';
    return ifstail::kExitError;
  }
}
