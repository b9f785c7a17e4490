// sprident: SPR transfer-function identification from frequency or time-domain data.

#include <cstdio>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "sprid/error.hpp"
#include "sprid/io.hpp"
#include "sprid/pipeline.hpp"

namespace {

/// "--key value" and "--key=value" pairs left over after CLI11 parsing.
std::vector<std::pair<std::string, std::string>> override_pairs(const std::vector<std::string>& extras) {
  std::vector<std::pair<std::string, std::string>> out;
  for (std::size_t i = 0; i < extras.size(); ++i) {
    const std::string& arg = extras[i];
    if (arg.rfind("--", 0) != 0 || arg.size() == 2) {
      throw sprid::ConfigError(fmt::format("unexpected argument '{}'", arg));
    }
    const auto eq = arg.find('=');
    if (eq != std::string::npos) {
      out.emplace_back(arg.substr(2, eq - 2), arg.substr(eq + 1));
    } else if (i + 1 < extras.size()) {
      out.emplace_back(arg.substr(2), extras[++i]);
    } else {
      throw sprid::ConfigError(fmt::format("option '{}' needs a value", arg));
    }
  }
  return out;
}

int run_fit(const std::string& config_path, const std::vector<std::string>& extras) {
  const auto cfg = sprid::load_config(config_path, override_pairs(extras));
  const auto report = sprid::run_pipeline(cfg);
  const auto& fit = *report.fit;
  fmt::print("model        {}\n", report.model_path.string());
  fmt::print("epsilon      {}\n", sprid::format_number(fit.epsilon));
  fmt::print("min Re(Ghat) {} (dense grid {})\n", sprid::format_number(fit.min_real_part),
             sprid::format_number(fit.dense_min_real_part));
  fmt::print("rel. error   {}\n", sprid::format_number(fit.relative_error));
  fmt::print("active       {}\n", fit.active_set.size());
  for (const auto& w : fit.warnings) fmt::print(stderr, "warning: {}\n", w);
  return 0;
}

int run_check(const std::string& model_path, const std::string& frf_path, int grid_mult) {
  const auto r = sprid::check_model(model_path, frf_path, grid_mult);
  const auto num = [](double v) { return sprid::format_number(v); };
  fmt::print("epsilon={}\n", num(r.epsilon));
  fmt::print("schur={}\n", r.schur);
  fmt::print("min_real_part={}\n", num(r.min_real_part));
  fmt::print("min_real_omega={}\n", num(r.min_real_omega));
  fmt::print("dense_min_real_part={}\n", num(r.dense_min_real_part));
  fmt::print("dense_min_omega={}\n", num(r.dense_min_omega));
  fmt::print("worst_case_error={}\n", num(r.worst_case_error));
  fmt::print("relative_error={}\n", num(r.relative_error));
  fmt::print("spr_on_grid={}\n", r.spr_on_grid);
  fmt::print("spr_on_dense_grid={}\n", r.spr_on_dense_grid);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"SPR transfer-function identification"};
  app.require_subcommand(1);

  auto* fit = app.add_subcommand("fit", "run the identification pipeline");
  std::string config_path;
  fit->add_option("--config", config_path, "pipeline config file")->required();
  fit->allow_extras();

  auto* check = app.add_subcommand("check", "recompute SPR margin and fit error of a saved model");
  std::string model_path;
  std::string frf_path;
  int grid_mult = 4;
  check->add_option("model", model_path, "model file")->required();
  check->add_option("--frf", frf_path, "frequency-response file")->required();
  check->add_option("--grid-mult", grid_mult, "verification grid refinement factor");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return static_cast<int>(sprid::ExitCode::kConfig);
  }

  try {
    if (fit->parsed()) return run_fit(config_path, fit->remaining());
    return run_check(model_path, frf_path, grid_mult);
  } catch (const sprid::Error& e) {
    fmt::print(stderr, "sprident: {}\n", e.what());
    return static_cast<int>(e.code());
  } catch (const std::exception& e) {
    fmt::print(stderr, "sprident: {}\n", e.what());
    return static_cast<int>(sprid::ExitCode::kNumerical);
  }
}
