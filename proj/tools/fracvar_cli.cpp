#include "fracvar/cli.hpp"
#include "fracvar/mesh.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

namespace fc = fracvar::cli;

namespace {

struct Overrides {
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> threads;
  bool no_interpenetration = false;
};

void add_run_flags(CLI::App *cmd, std::string &config, Overrides &ov, bool minimize) {
  cmd->add_option("--config", config, "run configuration (JSON)")->required();
  cmd->add_option("--out", ov.out, "output directory (overrides the config)");
  cmd->add_option("--seed", ov.seed, "random seed (overrides the config)");
  if (minimize) {
    cmd->add_option("--threads", ov.threads, "worker threads for candidate evaluation");
    cmd->add_flag("--no-interpenetration-check", ov.no_interpenetration, "skip the non-interpenetration test");
  }
}

fc::RunConfig load_config(const std::string &path, const Overrides &ov) {
  auto cfg = fc::RunConfig::load(path);
  if (!ov.out.empty())
    cfg.output_dir = ov.out;
  if (ov.seed) {
    cfg.seed = *ov.seed;
    cfg.minimizer.seed = *ov.seed;
  }
  if (ov.threads) {
    cfg.minimizer.threads = *ov.threads;
  } else if (const char *env = std::getenv("FRACVAR_THREADS")) {
    try {
      cfg.minimizer.threads = static_cast<unsigned>(std::stoul(env));
    } catch (const std::exception &) {
      throw fracvar::ValueError("FRACVAR_THREADS must be a non-negative integer");
    }
  }
  if (ov.no_interpenetration)
    cfg.minimizer.noninterpenetration = false;
  return cfg;
}

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"Fracture energy minimisation with curvature-varifold cracks"};
  app.require_subcommand(1);

  std::string mesh_path;
  auto *validate = app.add_subcommand("validate", "load and validate a tetmesh file");
  validate->add_option("mesh", mesh_path, "mesh file")->required();

  std::string config;
  Overrides ov;
  auto *check = app.add_subcommand("check-density", "verify exponent, coercivity and convexity hypotheses");
  add_run_flags(check, config, ov, false);

  std::string surface_path, varifold_config;
  auto *varifold = app.add_subcommand("varifold", "analyse a trisurf file as a curvature varifold");
  varifold->add_option("surface", surface_path, "surface file")->required();
  varifold->add_option("--config", varifold_config, "run configuration supplying the energy parameters");

  auto *minimize = app.add_subcommand("minimize", "minimise the total energy over the crack candidates");
  add_run_flags(minimize, config, ov, true);

  fracvar::BoxSpec box;
  std::string box_out;
  std::vector<double> size{1.0, 1.0, 1.0};
  std::vector<int> cells{1, 1, 1};
  double stretch = 1.0;
  bool both_ends = false;
  auto *gen = app.add_subcommand("gen-box", "write a structured box mesh");
  gen->add_option("--out", box_out, "output mesh file")->required();
  gen->add_option("--size", size, "edge lengths Lx Ly Lz")->expected(3);
  gen->add_option("--cells", cells, "cells per axis nx ny nz")->expected(3);
  gen->add_option("--crack-layer", box.crack_layer, "cell layer index of the candidate plane x = const");
  gen->add_option("--stretch", stretch, "axial stretch prescribed on the x = Lx end");
  gen->add_flag("--both-ends", both_ends, "clamp both x ends (otherwise only x = 0)");

  CLI11_PARSE(app, argc, argv);

  return fc::guarded(
      [&]() -> int {
        if (*validate)
          return fc::cmd_validate(mesh_path, std::cout);
        if (*check)
          return fc::cmd_check_density(load_config(config, ov), std::cout);
        if (*varifold) {
          fracvar::EnergyParams params;
          if (!varifold_config.empty())
            params = fc::RunConfig::load(varifold_config).params;
          return fc::cmd_varifold(surface_path, params, std::cout);
        }
        if (*minimize) {
          const auto cfg = load_config(config, ov);
          if (cfg.varifold_only) {
            cfg.check_files();
            return fc::cmd_varifold(cfg.surface_path, cfg.params, std::cout);
          }
          return fc::cmd_minimize(cfg, std::cout).exit_code;
        }
        box.hi = fracvar::Vec3(size[0], size[1], size[2]);
        box.cells = {cells[0], cells[1], cells[2]};
        box.gamma0_high_x = both_ends;
        box.dirichlet_matrix(0, 0) = stretch;
        fracvar::save_mesh(box_out, fracvar::structured_box(box));
        return fc::kOk;
      },
      std::cerr);
}
