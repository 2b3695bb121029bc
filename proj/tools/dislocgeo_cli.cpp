// Command line front end. Uses only the public C interface.
#include <cstdio>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "dislocgeo/dislocgeo.h"

namespace {

struct Common {
  std::string config_path;
  std::vector<std::string> overrides;
  std::string preset;
  double burgers = 0.0;
  std::vector<int> grid;
};

int exit_code(dg_status s) {
  switch (s) {
    case DG_OK:
      return 0;
    case DG_ERR_VALIDATION:
    case DG_ERR_INVALID_ARGUMENT:
      return 2;
    case DG_ERR_NON_CONVERGENCE:
      return 3;
    default:
      return 1;
  }
}

int report(dg_status s) {
  if (s != DG_OK) std::fprintf(stderr, "error (%s): %s\n", dg_status_string(s), dg_last_error());
  return exit_code(s);
}

void add_common(CLI::App* app, Common& c) {
  app->add_option("-c,--config", c.config_path, "JSON run configuration");
  app->add_option("--set", c.overrides, "override a config key, section.key=value (repeatable)")
      ->check(CLI::Validator(
          [](std::string& v) { return v.find('=') == std::string::npos ? "expected key=value, got '" + v + "'" : ""; },
          "KEY=VALUE"));
  app->add_option("--preset", c.preset, "dislocation preset")->check(CLI::IsMember({"screw", "edge"}));
  app->add_option("--burgers", c.burgers, "Burgers vector magnitude");
  app->add_option("--grid", c.grid, "basis counts n1 n2 n3")->expected(3);
}

dg_status build_config(const Common& c, dg_config** out) {
  dg_status s = c.config_path.empty() ? dg_config_create(out) : dg_config_load(c.config_path.c_str(), out);
  if (s != DG_OK) return s;
  auto set = [&](const std::string& k, const std::string& v) {
    return s == DG_OK ? (s = dg_config_set(*out, k.c_str(), v.c_str())) : s;
  };
  if (!c.preset.empty()) set("dislocation.preset", c.preset);
  if (c.burgers != 0.0) set("dislocation.burgers", std::to_string(c.burgers));
  if (!c.grid.empty())
    set("grid.counts", std::to_string(c.grid[0]) + " " + std::to_string(c.grid[1]) + " " + std::to_string(c.grid[2]));
  for (const auto& o : c.overrides) {
    const auto eq = o.find('=');
    set(o.substr(0, eq), o.substr(eq + 1));
  }
  if (s != DG_OK) {
    dg_config_destroy(*out);
    *out = nullptr;
  }
  return s;
}

int run(const Common& c, const std::string& out_dir, dg_mode mode, const std::string& plastic_file) {
  dg_config* cfg = nullptr;
  dg_status s = build_config(c, &cfg);
  if (s != DG_OK) return report(s);
  dg_run_summary sum{};
  s = dg_run(cfg, out_dir.c_str(), mode, plastic_file.empty() ? nullptr : plastic_file.c_str(), &sum);
  dg_config_destroy(cfg);
  if (s != DG_OK) return report(s);
  if (mode != DG_MODE_ELASTIC_ONLY)
    std::printf("plastic: minres_iterations=%d minres_residual=%.3e structure=%.3e divergence=%.3e\n",
                sum.minres_iterations, sum.minres_residual, sum.structure_residual, sum.divergence_residual);
  if (mode != DG_MODE_PLASTIC_ONLY)
    std::printf("elastic: newton_iterations=%d residual=%.3e -> %.3e energy=%.9e\n", sum.newton_iterations,
                sum.newton_initial_residual, sum.newton_final_residual, sum.strain_energy);
  std::printf("output: %s\n", out_dir.c_str());
  return 0;
}

int open_fields(const Common& c, const std::string& plastic, const std::string& elastic, dg_fields** f) {
  dg_config* cfg = nullptr;
  dg_status s = build_config(c, &cfg);
  if (s != DG_OK) return report(s);
  s = dg_fields_open(cfg, plastic.c_str(), elastic.empty() ? nullptr : elastic.c_str(), f);
  dg_config_destroy(cfg);
  return report(s);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dislocation fields on a spline patch"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(dg_version()) + " (" + dg_git_revision() + ")");

  Common common;
  std::string out_dir = "out", plastic_file, elastic_file, output;

  auto* solve = app.add_subcommand("solve", "plastic and elastic solve");
  add_common(solve, common);
  solve->add_option("-o,--out", out_dir, "output directory");

  auto* plastic = app.add_subcommand("plastic-only", "plastic distortion only");
  add_common(plastic, common);
  plastic->add_option("-o,--out", out_dir, "output directory");

  auto* elastic = app.add_subcommand("elastic-only", "elastic solve from a saved plastic field");
  add_common(elastic, common);
  elastic->add_option("-o,--out", out_dir, "output directory");
  elastic->add_option("--plastic-file", plastic_file, "plastic_field.txt from an earlier run")->required();

  std::string axis = "x1";
  std::vector<double> at{0.0, 0.0, 0.0};
  double from = -15.0, to = 15.0;
  int samples = 161;
  std::string components;
  auto* profile = app.add_subcommand("profile", "sample fields along an axis-parallel line");
  add_common(profile, common);
  profile->add_option("--plastic-file", plastic_file)->required();
  profile->add_option("--elastic-file", elastic_file);
  profile->add_option("--axis", axis)->check(CLI::IsMember({"x1", "x2", "x3"}));
  profile->add_option("--at", at, "point fixing the other two coordinates")->expected(3);
  profile->add_option("--from", from);
  profile->add_option("--to", to);
  profile->add_option("--samples", samples)->check(CLI::PositiveNumber);
  profile->add_option("--components", components, "comma separated, e.g. Theta_31,S_23")->required();
  profile->add_option("-o,--output", output)->required();

  std::vector<int> vtk_samples{41, 41, 9};
  auto* vtk = app.add_subcommand("export-vtk", "write a structured-grid VTK file");
  add_common(vtk, common);
  vtk->add_option("--plastic-file", plastic_file)->required();
  vtk->add_option("--elastic-file", elastic_file);
  vtk->add_option("--samples", vtk_samples)->expected(3);
  vtk->add_option("-o,--output", output)->required();

  auto* show = app.add_subcommand("show-config", "print the resolved configuration as JSON");
  add_common(show, common);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  if (solve->parsed()) return run(common, out_dir, DG_MODE_FULL, "");
  if (plastic->parsed()) return run(common, out_dir, DG_MODE_PLASTIC_ONLY, "");
  if (elastic->parsed()) return run(common, out_dir, DG_MODE_ELASTIC_ONLY, plastic_file);

  if (show->parsed()) {
    dg_config* cfg = nullptr;
    dg_status s = build_config(common, &cfg);
    if (s != DG_OK) return report(s);
    size_t need = 0;
    dg_config_to_json(cfg, nullptr, 0, &need);
    std::string text(need, '\0');
    s = dg_config_to_json(cfg, text.data(), text.size(), nullptr);
    dg_config_destroy(cfg);
    if (s == DG_OK) std::printf("%s\n", text.c_str());
    return report(s);
  }

  dg_fields* f = nullptr;
  if (int rc = open_fields(common, plastic_file, elastic_file, &f); rc != 0) return rc;
  dg_status s = DG_OK;
  if (profile->parsed()) {
    const int ax = axis[1] - '1';
    s = dg_fields_export_profile(f, ax, at.data(), from, to, samples, components.c_str(), output.c_str());
  } else {
    s = dg_fields_export_vtk(f, vtk_samples.data(), output.c_str());
  }
  dg_fields_destroy(f);
  if (s == DG_OK) std::printf("wrote %s\n", output.c_str());
  return report(s);
}
