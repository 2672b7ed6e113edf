// ergc: command-line front end for the coupling experiments.

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "ergc/error.hpp"
#include "ergc/experiment/experiment.hpp"

namespace {

struct Options {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<int> replicas;
  std::optional<std::string> output;
  std::vector<std::string> overrides;
  std::string manifest_path;
};

ergc::Json load_raw(const Options& o) {
  std::ifstream in(o.config_path, std::ios::binary);
  if (!in) throw ergc::ConfigError("", "cannot open config file " + o.config_path);
  std::stringstream ss;
  ss << in.rdbuf();
  ergc::Json raw;
  try {
    raw = ergc::Json::parse(ss.str());
  } catch (const ergc::Json::parse_error& e) {
    throw ergc::ConfigError("", o.config_path + " is not valid JSON: " + e.what());
  }
  for (const std::string& a : o.overrides) ergc::apply_override(raw, a);
  if (o.seed) ergc::apply_override(raw, "ensemble.seed=" + std::to_string(*o.seed));
  if (o.replicas) ergc::apply_override(raw, "ensemble.replicas=" + std::to_string(*o.replicas));
  return raw;
}

int run(const std::string& sub, const Options& o) {
  const ergc::ExperimentConfig config = ergc::parse_config(load_raw(o));
  const auto dir = ergc::resolve_output_dir(config, o.output);
  const ergc::RunOutcome r = ergc::run_command(ergc::command_from_string(sub), config, dir, std::cerr);
  std::cerr << sub << ": wrote " << r.outputs.size() << " outputs and manifest.json to " << dir.string() << "\n";
  return r.exit_status;
}

int replay(const Options& o) {
  const ergc::Json original = ergc::read_manifest(o.manifest_path);
  std::filesystem::path dir;
  if (o.output && !o.output->empty()) {
    dir = *o.output;
  } else {
    dir = std::filesystem::path(o.manifest_path).parent_path();
    dir = dir.empty() ? std::filesystem::path("replay") : dir.parent_path() / (dir.filename().string() + "_replay");
  }
  const ergc::RunOutcome r = ergc::replay(original, dir, std::cerr);
  const ergc::Json fresh = ergc::read_manifest(dir / "manifest.json");
  const std::vector<std::string> diff = ergc::compare_outputs(original, fresh);
  if (!diff.empty()) {
    for (const std::string& p : diff) std::cerr << "replay: output differs: " << p << "\n";
    return ergc::kExitFailure;
  }
  std::cerr << "replay: " << r.outputs.size() << " outputs byte-identical in " << dir.string() << "\n";
  return r.exit_status;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stochastic coupling and ergodicity experiments on spectral fluid and wave models"};
  app.set_version_flag("--version", std::string(ERGC_VERSION) + " (" + ERGC_GIT_DESCRIBE + ")");
  app.require_subcommand(1);

  Options o;
  for (const char* name : {"simulate", "couple", "ergodic", "inviscid-limit"}) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("--config,-c", o.config_path, "JSON config file")->required()->check(CLI::ExistingFile);
    sub->add_option("--seed", o.seed, "overrides ensemble.seed");
    sub->add_option("--replicas", o.replicas, "overrides ensemble.replicas");
    sub->add_option("--output,-o", o.output, "output directory");
    sub->add_option("--set", o.overrides, "key.path=value override, repeatable")->take_all();
  }
  CLI::App* rp = app.add_subcommand("replay", "rerun a manifest and compare outputs byte for byte");
  rp->add_option("--manifest,-m", o.manifest_path, "manifest.json of the run to replay")->required()->check(CLI::ExistingFile);
  rp->add_option("--output,-o", o.output, "output directory (default: <run>_replay)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : ergc::kExitValidation;
  }

  const std::string sub = app.get_subcommands().front()->get_name();
  try {
    return sub == "replay" ? replay(o) : run(sub, o);
  } catch (const ergc::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return ergc::kExitValidation;
  } catch (const ergc::InvalidArgument& e) {
    std::cerr << "invalid argument: " << e.what() << "\n";
    return ergc::kExitValidation;
  } catch (const ergc::DivergedTrajectory& e) {
    std::cerr << "diverged: " << e.what() << "\n";
    return ergc::kExitDiverged;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return ergc::kExitFailure;
  }
}
