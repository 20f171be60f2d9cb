#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "wlab/errors.hpp"
#include "wlab/mesh_io.hpp"
#include "wlab/scenario.hpp"

namespace {

void print_table(const std::vector<wlab::ScenarioResult>& results) {
  for (const auto& r : results) {
    for (const auto& c : r.checks) {
      std::printf("%-28s %-26s %-17s lhs=%-14.8g rhs=%-14.8g rel_gap=%-11.3e%s\n", r.scenario.name.c_str(),
                  c.check.c_str(), wlab::to_string(c.status), c.lhs, c.rhs, c.relative_gap,
                  c.equality ? " equality" : "");
    }
  }
}

int run(const std::string& config, const std::string& out, int jobs, const std::string& dump, bool convergence) {
  std::vector<wlab::Scenario> scenarios;
  try {
    scenarios = wlab::load_config(config);
  } catch (const wlab::Error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  }
  wlab::RunOptions opts;
  opts.dump_operators = dump;
  const auto results = wlab::run_all(scenarios, opts, jobs);
  wlab::write_reports(results, out);
  if (convergence) {
    const std::string csv = wlab::convergence_csv(results);
    std::ofstream(std::filesystem::path(out) / "convergence.csv", std::ios::binary) << csv;
    std::cout << csv;
  } else {
    print_table(results);
  }
  return wlab::exit_code(results);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Numerical checks of weighted Ros, Heintze-Karcher and eigenvalue inequalities"};
  app.require_subcommand(1);

  std::string config, out = "lab-out", dump;
  int jobs = 1;
  auto* run_cmd = app.add_subcommand("run", "Run every scenario of a config");
  run_cmd->add_option("config", config, "Scenario config (JSON)")->required();
  run_cmd->add_option("--out", out, "Report directory");
  run_cmd->add_option("--jobs", jobs, "Worker threads")->check(CLI::PositiveNumber);
  run_cmd->add_option("--dump-operators", dump, "Write stiffness and mass matrices here (MatrixMarket)");

  auto* conv_cmd = app.add_subcommand("convergence", "Run the refinement ladders and write convergence.csv");
  conv_cmd->add_option("config", config, "Scenario config (JSON)")->required();
  conv_cmd->add_option("--out", out, "Report directory");
  conv_cmd->add_option("--jobs", jobs, "Worker threads")->check(CLI::PositiveNumber);

  std::string spec, mesh_out, format;
  auto* mesh_cmd = app.add_subcommand("mesh", "Mesh utilities");
  mesh_cmd->require_subcommand(1);
  auto* gen_cmd = mesh_cmd->add_subcommand("gen", "Generate a mesh, e.g. disk:radius=1,rings=16");
  gen_cmd->add_option("spec", spec, "generator:key=value,...")->required();
  gen_cmd->add_option("--out", mesh_out, "Output file (.off or .obj)")->required();
  gen_cmd->add_option("--format", format, "off or obj (default from the extension)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  if (*run_cmd) return run(config, out, jobs, dump, false);
  if (*conv_cmd) return run(config, out, jobs, "", true);
  try {
    const wlab::SimplicialMesh mesh = wlab::generate_mesh(spec);
    const wlab::MeshFormat fmt = format.empty() ? wlab::format_from_path(mesh_out) : wlab::parse_mesh_format(format);
    wlab::save_mesh(mesh, mesh_out, fmt);
    std::printf("%d vertices, %d cells, h = %.6g\n", mesh.vertex_count(), mesh.cell_count(), mesh.max_edge_length());
  } catch (const wlab::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const wlab::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
