#include "geoflow/runner.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
  CLI::App app{"geoflow: geodesic-flow identity, Beurling, Riccati and ray-transform experiments"};
  app.require_subcommand(1);
  std::string config_path, out_dir = "out";
  std::uint64_t seed = 0;
  bool quiet = false;
  for (const auto& name : geoflow::subcommands()) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("--config,-c", config_path, "key = value configuration file")->required();
    sub->add_option("--out,-o", out_dir, "output directory");
    sub->add_option("--seed", seed, "overrides the config seed");
    sub->add_flag("--quiet,-q", quiet, "print nothing on success");
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }
  const auto* sub = app.get_subcommands().front();
  geoflow::RunOptions opt;
  opt.out_dir = out_dir;
  if (sub->count("--seed")) opt.seed = seed;

  geoflow::Config cfg;
  try {
    cfg = geoflow::Config::from_file(config_path);
  } catch (const geoflow::ConfigError& e) {
    std::cerr << "geoflow: " << e.what() << "\n";
    return 2;
  }
  const auto res = geoflow::run(sub->get_name(), std::move(cfg), opt);
  if (res.exit_code == 2) {
    std::cerr << "geoflow: " << res.error_message << "\n";
  } else if (res.exit_code == 3) {
    std::cerr << "geoflow: " << res.error_kind << ": " << res.error_message << "\n";
  } else if (!quiet || res.exit_code != 0) {
    for (const auto& v : res.report.verdicts)
      std::cout << (v.pass ? "PASS " : "FAIL ") << v.name << " = " << v.value << " " << v.relation << " "
                << v.threshold << "\n";
    std::cout << "report: " << (opt.out_dir / "report.json").string() << "\n";
  }
  return res.exit_code;
}
