#include "dislocgeo/dislocgeo.h"

#include <cstring>
#include <memory>
#include <new>
#include <sstream>
#include <string>

#include "cli_io.hpp"

struct dg_config {
  dislocgeo::RunConfig cfg;
};

struct dg_fields {
  dislocgeo::RunConfig cfg;
  dislocgeo::PlasticField plastic;
  std::unique_ptr<dislocgeo::ElasticProblem> problem;
  std::unique_ptr<dislocgeo::ElasticState> state;
  std::unique_ptr<dislocgeo::TorsionField> torsion;
  std::unique_ptr<dislocgeo::FieldSampler> sampler;
};

namespace {

thread_local std::string last_error;

dg_status fail(dg_status s, const std::string& msg) {
  last_error = msg;
  return s;
}

template <class F>
dg_status guard(F&& f) {
  try {
    f();
    return DG_OK;
  } catch (const dislocgeo::Error& e) {
    return fail(static_cast<dg_status>(static_cast<int>(e.code())), e.what());
  } catch (const std::bad_alloc&) {
    return fail(DG_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(DG_ERR_INTERNAL, e.what());
  }
}

#define DG_REQUIRE(p)                                                  \
  do {                                                                 \
    if (!(p)) return fail(DG_ERR_INVALID_ARGUMENT, #p " must not be NULL"); \
  } while (0)

}  // namespace

extern "C" {

const char* dg_version(void) { return "1.0.0"; }

const char* dg_git_revision(void) { return dislocgeo::git_revision(); }

const char* dg_status_string(dg_status status) {
  if (status == DG_OK) return "ok";
  if (status < DG_ERR_INVALID_ARGUMENT || status > DG_ERR_INTERNAL) return "unknown";
  return dislocgeo::error_code_name(static_cast<dislocgeo::ErrorCode>(static_cast<int>(status)));
}

const char* dg_last_error(void) { return last_error.c_str(); }

dg_status dg_config_create(dg_config** out) {
  DG_REQUIRE(out);
  return guard([&] { *out = new dg_config(); });
}

dg_status dg_config_load(const char* path, dg_config** out) {
  DG_REQUIRE(path);
  DG_REQUIRE(out);
  return guard([&] { *out = new dg_config{dislocgeo::RunConfig::load(path)}; });
}

dg_status dg_config_parse(const char* json_text, dg_config** out) {
  DG_REQUIRE(json_text);
  DG_REQUIRE(out);
  return guard([&] { *out = new dg_config{dislocgeo::RunConfig::from_json(json_text)}; });
}

dg_status dg_config_set(dg_config* config, const char* key, const char* value) {
  DG_REQUIRE(config);
  DG_REQUIRE(key);
  DG_REQUIRE(value);
  return guard([&] { config->cfg.set(key, value); });
}

dg_status dg_config_to_json(const dg_config* config, char* buf, size_t len, size_t* needed) {
  DG_REQUIRE(config);
  return guard([&] {
    const std::string s = config->cfg.to_json();
    if (needed) *needed = s.size() + 1;
    if (!buf) return;
    if (len < s.size() + 1) throw dislocgeo::Error(dislocgeo::ErrorCode::InvalidArgument, "buffer too small");
    std::memcpy(buf, s.c_str(), s.size() + 1);
  });
}

void dg_config_destroy(dg_config* config) { delete config; }

dg_status dg_run(const dg_config* config, const char* out_dir, dg_mode mode, const char* plastic_file,
                 dg_run_summary* summary) {
  DG_REQUIRE(config);
  DG_REQUIRE(out_dir);
  return guard([&] {
    dislocgeo::PipelineMode m = dislocgeo::PipelineMode::Full;
    if (mode == DG_MODE_PLASTIC_ONLY)
      m = dislocgeo::PipelineMode::PlasticOnly;
    else if (mode == DG_MODE_ELASTIC_ONLY)
      m = dislocgeo::PipelineMode::ElasticOnly;
    else if (mode != DG_MODE_FULL)
      throw dislocgeo::Error(dislocgeo::ErrorCode::InvalidArgument, "unknown mode");
    const auto s = dislocgeo::run_pipeline(config->cfg, out_dir, m, plastic_file ? plastic_file : "");
    if (summary) {
      summary->minres_residual = s.plastic.minres_residual;
      summary->minres_iterations = s.plastic.minres_iterations;
      summary->structure_residual = s.plastic.structure_residual;
      summary->divergence_residual = s.plastic.divergence_residual;
      summary->theta_norm = s.plastic.theta_norm;
      summary->newton_iterations = s.newton_iterations;
      summary->newton_initial_residual = s.newton_initial_residual;
      summary->newton_final_residual = s.newton_final_residual;
      summary->strain_energy = s.strain_energy;
    }
  });
}

dg_status dg_fields_open(const dg_config* config, const char* plastic_file, const char* elastic_file,
                         dg_fields** out) {
  DG_REQUIRE(config);
  DG_REQUIRE(plastic_file);
  DG_REQUIRE(out);
  return guard([&] {
    auto f = std::make_unique<dg_fields>();
    f->cfg = config->cfg;
    f->plastic = dislocgeo::load_plastic_field(plastic_file);
    f->torsion = std::make_unique<dislocgeo::TorsionField>(f->cfg.dislocation());
    if (elastic_file) {
      f->problem = std::make_unique<dislocgeo::ElasticProblem>(dislocgeo::ElasticProblem{
          &f->plastic, f->cfg.material, dislocgeo::corner_pinning(f->plastic.patch), f->cfg.elastic_preconditioner});
      f->state = std::make_unique<dislocgeo::ElasticState>(
          dislocgeo::load_elastic_state(elastic_file, 3 * f->plastic.patch.control_points.size()));
    }
    f->sampler = std::make_unique<dislocgeo::FieldSampler>(f->plastic, f->problem.get(), f->state.get());
    *out = f.release();
  });
}

dg_status dg_fields_sample(const dg_fields* fields, const double x[3], double theta[9], double stress[9],
                           double* det_theta) {
  DG_REQUIRE(fields);
  DG_REQUIRE(x);
  return guard([&] {
    const dislocgeo::FieldSample s = fields->sampler->at({x[0], x[1], x[2]});
    for (int i = 0; i < 9; ++i) {
      if (theta) theta[i] = s.theta[i / 3][i % 3];
      if (stress) stress[i] = s.S[i / 3][i % 3];
    }
    if (det_theta) *det_theta = s.det_theta;
  });
}

dg_status dg_fields_burgers_square(const dg_fields* fields, double cx, double cy, double h, double z,
                                   double burgers[3]) {
  DG_REQUIRE(fields);
  DG_REQUIRE(burgers);
  return guard([&] {
    const auto b = dislocgeo::burgers_circuit(fields->plastic, dislocgeo::square_loop(fields->plastic.patch, cx, cy, h, z));
    for (int i = 0; i < 3; ++i) burgers[i] = b[i];
  });
}

dg_status dg_fields_export_vtk(const dg_fields* fields, const int samples[3], const char* path) {
  DG_REQUIRE(fields);
  DG_REQUIRE(samples);
  DG_REQUIRE(path);
  return guard([&] {
    dislocgeo::SamplingGrid g{fields->plastic.patch.box_lo, fields->plastic.patch.box_hi,
                              {samples[0], samples[1], samples[2]}};
    dislocgeo::export_vtk(*fields->sampler, g, path);
  });
}

dg_status dg_fields_export_profile(const dg_fields* fields, int axis, const double point[3], double from, double to,
                                   int samples, const char* components, const char* path) {
  DG_REQUIRE(fields);
  DG_REQUIRE(point);
  DG_REQUIRE(components);
  DG_REQUIRE(path);
  return guard([&] {
    std::vector<std::string> comps;
    std::stringstream ss(components);
    std::string c;
    while (std::getline(ss, c, ','))
      if (!c.empty()) comps.push_back(c);
    dislocgeo::LineSpec line{axis, {point[0], point[1], point[2]}, from, to, samples};
    const auto& cfg = fields->cfg;
    dislocgeo::ProfileOracles o;
    o.preset = cfg.preset;
    o.volterra = {cfg.material.mu, cfg.material.nu, cfg.burgers, cfg.core_radius};
    o.torsion = fields->torsion.get();
    o.basepoint = cfg.center;
    o.stress_scale = cfg.stress_scale() != 0.0 ? cfg.stress_scale() : 1.0;
    dislocgeo::export_profile(*fields->sampler, line, comps, o, cfg.core_radius, path);
  });
}

void dg_fields_destroy(dg_fields* fields) { delete fields; }

}  // extern "C"
