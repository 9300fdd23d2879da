// Command-line runner for the registered experiments.
//
//   rmps run <config.json> [--override key=value ...] [--workers n] [--seed u64] [--out dir]
//   rmps list
//   rmps validate <config.json> [--override key=value ...]
//
// Exit codes: 0 success, 2 invalid config, 3 resource cap, 4 I/O failure.

#include <cstdint>
#include <iomanip>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "rmps/errors.hpp"
#include "rmps/experiments.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitResource = 3;
constexpr int kExitIo = 4;

nlohmann::json collect_overrides(const std::vector<std::string>& assignments) {
  nlohmann::json o = nlohmann::json::object();
  for (const auto& a : assignments) rmps::apply_override(o, a);
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Random matrix product state ensembles: experiment runner"};
  app.require_subcommand(1);

  std::string config_path;
  std::vector<std::string> overrides;
  int workers = 1;
  std::uint64_t seed = 0;
  std::string out_dir;

  auto* run = app.add_subcommand("run", "run an experiment and write its tables and manifest");
  run->add_option("config", config_path, "JSON config file")->required();
  run->add_option("--override", overrides, "key=value, applied after the config file");
  run->add_option("--workers", workers, "worker threads (does not change outputs)")->check(CLI::PositiveNumber);
  auto* seed_opt = run->add_option("--seed", seed, "master seed");
  auto* out_opt = run->add_option("--out", out_dir, "output directory");

  app.add_subcommand("list", "list registered experiments");

  auto* val = app.add_subcommand("validate", "check a config and estimate its cost without running it");
  val->add_option("config", config_path, "JSON config file")->required();
  val->add_option("--override", overrides, "key=value, applied after the config file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (app.got_subcommand("list")) {
      for (const auto& e : rmps::list_experiments())
        std::cout << std::left << std::setw(24) << e.id << std::setw(24) << e.analog << e.description << '\n';
      return 0;
    }

    nlohmann::json o = collect_overrides(overrides);
    if (*seed_opt) o["seed"] = seed;
    if (*out_opt) o["out"] = out_dir;
    const rmps::RunConfig config = rmps::make_config(rmps::read_config_file(config_path), o);

    if (app.got_subcommand("validate")) {
      const rmps::Diagnostics d = rmps::validate(config);
      for (const auto& err : d.errors) std::cout << "error: " << err << '\n';
      if (!d.ok) return d.resource_only ? kExitResource : kExitConfig;
      for (const auto& note : d.notes) std::cout << "note: " << note << '\n';
      std::cout << "ok: " << config.experiment << ", estimated " << d.estimated_seconds << " s (bound "
                << d.time_bound_seconds() << " s), " << d.estimated_bytes / (1 << 20) << " MiB\n";
      return 0;
    }

    const rmps::RunManifest m = rmps::run(config, workers);
    for (const auto& f : m.outputs) std::cout << config.out << '/' << f.path << "  " << f.rows << " rows  " << f.sha256 << '\n';
    std::cout << config.out << "/manifest.json  " << m.wall_time << " s\n";
    return 0;
  } catch (const rmps::ConfigError& e) {
    std::cerr << "invalid config: " << e.what() << '\n';
    return kExitConfig;
  } catch (const rmps::ResourceError& e) {
    std::cerr << "resource cap: " << e.what() << '\n';
    return kExitResource;
  } catch (const rmps::IoError& e) {
    std::cerr << "i/o failure: " << e.what() << '\n';
    return kExitIo;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid config: " << e.what() << '\n';
    return kExitConfig;
  }
}
