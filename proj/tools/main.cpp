#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "acmech/format.hpp"
#include "acmech/sweep.hpp"

namespace {

using acmech::sweep::json;

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"three-mode magnetomechanical cooling toolkit"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_path;
  std::vector<std::string> overrides;
  int workers = acmech::sweep::worker_count_from_env();
  bool strict = false;
  app.add_option("--config", config_path, "JSON config file merged over built-in defaults");
  app.add_option("--set", overrides, "override a config key, e.g. --set bath.Q_p=1e8")
      ->take_all();
  app.add_option("--out", out_path, "output file path");
  app.add_option("--workers", workers, "worker threads for sweeps");
  app.add_flag("--strict", strict, "exit nonzero if any operating-regime condition fails");

  auto* sweep_cmd = app.add_subcommand("sweep", "grid sweep over one or two config keys");
  auto* cool_cmd = app.add_subcommand("cool", "steady-state occupation vs Q_p and gradient");
  auto* psd_cmd = app.add_subcommand("psd", "displacement spectral density near omega_x");
  auto* tune_cmd = app.add_subcommand("tune", "bias field and drive frequency for target chi");
  auto* modes_cmd = app.add_subcommand("modes", "spheroidal acoustic mode table");
  auto* report_cmd = app.add_subcommand("report", "resolved parameters and regime check");
  for (auto* sub : {sweep_cmd, cool_cmd, psd_cmd, tune_cmd, modes_cmd, report_cmd})
    sub->fallthrough();

  CLI11_PARSE(app, argc, argv);

  try {
    json config = acmech::sweep::default_config();
    if (cool_cmd->parsed()) {
      // cooling-map defaults; file and --set still override
      config["sweep"]["axis1"] = {{"key", "bath.Q_p"}, {"from", 1e4},    {"to", 1e10},
                                  {"points", 200},     {"spacing", "log"}};
      config["sweep"]["axis2"] = {{"key", "field.b_g_T_m"}, {"from", 2e2},     {"to", 2e4},
                                  {"points", 3},            {"spacing", "log"}};
      config["sweep"]["observables"] = json::array({"occupation_ss", "T_x"});
    }
    if (!config_path.empty())
      acmech::sweep::merge_config(config, acmech::sweep::load_config_file(config_path));
    for (const auto& kv : overrides) acmech::sweep::apply_override(config, kv);
    if (!out_path.empty()) config["output"]["path"] = out_path;
    const std::string out = config["output"]["path"].get<std::string>();
    const bool plot = config["output"]["emit_plot_script"].get<bool>();

    if (strict && !modes_cmd->parsed()) {
      const auto r = acmech::sweep::resolve_config(config);
      const auto rep = acmech::validate_regime(r.magnet, r.drive, r.baths);
      if (!rep.all_pass()) {
        std::cerr << rep.summary();
        return 3;
      }
    }

    if (sweep_cmd->parsed() || cool_cmd->parsed()) {
      const auto spec = acmech::sweep::sweep_spec_from_config(config);
      const auto table = acmech::sweep::run_sweep(spec, workers);
      const std::string path = out.empty() ? "sweep.csv" : out;
      write_text(path, table.to_csv());
      if (plot) acmech::sweep::write_plot_script(path, table, false);
      std::cout << "wrote " << table.rows.size() << " rows to " << path << '\n';
    } else if (psd_cmd->parsed()) {
      const auto res = acmech::sweep::run_psd(config, workers);
      const std::string path = out.empty() ? "psd.csv" : out;
      write_text(path, res.table.to_csv());
      if (plot) acmech::sweep::write_plot_script(path, res.table, true);
      std::cout << "wrote " << res.table.rows.size() << " rows to " << path << '\n';
      for (const auto& pk : res.peaks) {
        std::cout << "b_g " << acmech::format_g9(pk.b_g) << ": ";
        if (!pk.stable)
          std::cout << "unstable (drift not Hurwitz)\n";
        else
          std::cout << pk.count << " peak(s), fwhm " << acmech::format_g9(pk.fwhm)
                    << " rad/s, splitting " << acmech::format_g9(pk.splitting) << " rad/s\n";
      }
    } else if (tune_cmd->parsed()) {
      const std::string text = acmech::sweep::cmd_tune(config);
      if (!out.empty()) write_text(out, text);
      std::cout << text;
    } else if (modes_cmd->parsed()) {
      std::cout << acmech::sweep::cmd_modes(config, out);
    } else if (report_cmd->parsed()) {
      const std::string text = acmech::sweep::cmd_report(config);
      if (!out.empty()) write_text(out, text);
      std::cout << text;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
