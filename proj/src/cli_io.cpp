#include "cli_io.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"

#ifndef DG_GIT_REVISION
#define DG_GIT_REVISION "unknown"
#endif

namespace dislocgeo {

using json = nlohmann::ordered_json;

const char* preset_name(Preset p) { return p == Preset::Screw ? "screw" : "edge"; }

const char* git_revision() { return DG_GIT_REVISION; }

namespace {

[[noreturn]] void invalid(const std::string& key, const std::string& msg) {
  throw Error(ErrorCode::Validation, key + ": " + msg);
}

const char* plastic_prec_name(PlasticPreconditioner p) {
  switch (p) {
    case PlasticPreconditioner::None: return "none";
    case PlasticPreconditioner::Diagonal: return "diagonal";
    case PlasticPreconditioner::Tensor: return "tensor";
  }
  return "tensor";
}

const char* elastic_prec_name(ElasticPreconditioner p) {
  return p == ElasticPreconditioner::Jacobi ? "jacobi" : "tensor";
}

template <class T>
T read(const json& j, const std::string& section, const char* key, T fallback) {
  const std::string name = section + "." + key;
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    invalid(name, "wrong type");
  }
}

}  // namespace

void RunConfig::validate() const {
  for (int d = 0; d < 3; ++d)
    if (!(extents[d] > 0.0) || !std::isfinite(extents[d])) invalid("domain.extents", "must be positive");
  for (int d = 0; d < 3; ++d) {
    if (degrees[d] < 1 || degrees[d] > 9) invalid("grid.degrees", "must lie in [1, 9]");
    if (grid[d] < degrees[d] + 1) invalid("grid.counts", "need at least degree + 1 functions per direction");
  }
  if (!(grading >= 1.0) || !std::isfinite(grading)) invalid("grid.grading", "must be >= 1");
  if (!std::isfinite(burgers)) invalid("dislocation.burgers", "must be finite");
  if (!(core_radius > 0.0) || !std::isfinite(core_radius)) invalid("dislocation.core_radius", "must be positive");
  for (int d = 0; d < 3; ++d)
    if (!(std::abs(center[d]) < 0.5 * extents[d])) invalid("dislocation.center", "must lie inside the box");
  if (!(material.mu > 0.0) || !std::isfinite(material.mu)) invalid("material.mu", "must be positive");
  if (material.nu == 0.5) invalid("material.nu", "0.5 is the incompressible limit");
  if (!(material.nu > -1.0 && material.nu < 0.5)) invalid("material.nu", "must lie in (-1, 0.5)");
  if (!(solver.minres_tol > 0.0)) invalid("solver.minres_tol", "must be positive");
  if (!(solver.pcg_tol > 0.0)) invalid("solver.pcg_tol", "must be positive");
  if (!(solver.newton_tol > 0.0)) invalid("solver.newton_tol", "must be positive");
  if (solver.minres_max_iter <= 0) invalid("solver.minres_max_iter", "must be positive");
  if (solver.pcg_max_iter <= 0) invalid("solver.pcg_max_iter", "must be positive");
  if (solver.newton_max_iter <= 0) invalid("solver.newton_max_iter", "must be positive");
  if (solver.max_backtracks < 0) invalid("solver.max_backtracks", "must be non-negative");
  for (int d = 0; d < 3; ++d)
    if (vtk_samples[d] < 2) invalid("output.vtk_samples", "need at least 2 samples per direction");
  if (profile_samples < 2) invalid("output.profile_samples", "need at least 2 samples");
  if (!(profile_half_length > 0.0)) invalid("output.profile_half_length", "must be positive");
}

std::string RunConfig::to_json() const {
  json j;
  j["domain"]["extents"] = extents;
  j["grid"]["counts"] = grid;
  j["grid"]["degrees"] = degrees;
  j["grid"]["grading"] = grading;
  j["dislocation"]["preset"] = preset_name(preset);
  j["dislocation"]["burgers"] = burgers;
  j["dislocation"]["core_radius"] = core_radius;
  j["dislocation"]["center"] = center;
  j["material"]["mu"] = material.mu;
  j["material"]["nu"] = material.nu;
  j["solver"]["minres_tol"] = solver.minres_tol;
  j["solver"]["minres_max_iter"] = solver.minres_max_iter;
  j["solver"]["pcg_tol"] = solver.pcg_tol;
  j["solver"]["pcg_max_iter"] = solver.pcg_max_iter;
  j["solver"]["newton_tol"] = solver.newton_tol;
  j["solver"]["newton_max_iter"] = solver.newton_max_iter;
  j["solver"]["max_backtracks"] = solver.max_backtracks;
  j["solver"]["plastic_preconditioner"] = plastic_prec_name(plastic_preconditioner);
  j["solver"]["elastic_preconditioner"] = elastic_prec_name(elastic_preconditioner);
  j["output"]["vtk"] = write_vtk;
  j["output"]["vtk_samples"] = vtk_samples;
  j["output"]["profiles"] = write_profiles;
  j["output"]["profile_samples"] = profile_samples;
  j["output"]["profile_half_length"] = profile_half_length;
  return j.dump(2);
}

RunConfig RunConfig::from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Validation, std::string("config: not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw Error(ErrorCode::Validation, "config: top level must be an object");
  const json defaults = json::parse(RunConfig{}.to_json());
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!defaults.contains(it.key())) invalid(it.key(), "unknown section");
    if (!it.value().is_object()) invalid(it.key(), "must be an object");
    for (auto k = it.value().begin(); k != it.value().end(); ++k)
      if (!defaults[it.key()].contains(k.key())) invalid(it.key() + "." + k.key(), "unknown key");
  }
  auto sec = [&](const char* name) { return j.contains(name) ? j[name] : json::object(); };

  RunConfig c;
  const json dom = sec("domain"), grid = sec("grid"), dis = sec("dislocation"), mat = sec("material"),
             sol = sec("solver"), out = sec("output");
  c.extents = read(dom, "domain", "extents", c.extents);
  c.grid = read(grid, "grid", "counts", c.grid);
  c.degrees = read(grid, "grid", "degrees", c.degrees);
  c.grading = read(grid, "grid", "grading", c.grading);
  const std::string preset = read(dis, "dislocation", "preset", std::string(preset_name(c.preset)));
  if (preset == "screw")
    c.preset = Preset::Screw;
  else if (preset == "edge")
    c.preset = Preset::Edge;
  else
    invalid("dislocation.preset", "expected screw or edge");
  c.burgers = read(dis, "dislocation", "burgers", c.burgers);
  c.core_radius = read(dis, "dislocation", "core_radius", c.core_radius);
  c.center = read(dis, "dislocation", "center", c.center);
  c.material.mu = read(mat, "material", "mu", c.material.mu);
  c.material.nu = read(mat, "material", "nu", c.material.nu);
  c.solver.minres_tol = read(sol, "solver", "minres_tol", c.solver.minres_tol);
  c.solver.minres_max_iter = read(sol, "solver", "minres_max_iter", c.solver.minres_max_iter);
  c.solver.pcg_tol = read(sol, "solver", "pcg_tol", c.solver.pcg_tol);
  c.solver.pcg_max_iter = read(sol, "solver", "pcg_max_iter", c.solver.pcg_max_iter);
  c.solver.newton_tol = read(sol, "solver", "newton_tol", c.solver.newton_tol);
  c.solver.newton_max_iter = read(sol, "solver", "newton_max_iter", c.solver.newton_max_iter);
  c.solver.max_backtracks = read(sol, "solver", "max_backtracks", c.solver.max_backtracks);
  const std::string pp = read(sol, "solver", "plastic_preconditioner", std::string("tensor"));
  if (pp == "tensor")
    c.plastic_preconditioner = PlasticPreconditioner::Tensor;
  else if (pp == "diagonal")
    c.plastic_preconditioner = PlasticPreconditioner::Diagonal;
  else if (pp == "none")
    c.plastic_preconditioner = PlasticPreconditioner::None;
  else
    invalid("solver.plastic_preconditioner", "expected tensor, diagonal or none");
  const std::string ep = read(sol, "solver", "elastic_preconditioner", std::string("tensor"));
  if (ep == "tensor")
    c.elastic_preconditioner = ElasticPreconditioner::TensorLaplace;
  else if (ep == "jacobi")
    c.elastic_preconditioner = ElasticPreconditioner::Jacobi;
  else
    invalid("solver.elastic_preconditioner", "expected tensor or jacobi");
  c.write_vtk = read(out, "output", "vtk", c.write_vtk);
  c.vtk_samples = read(out, "output", "vtk_samples", c.vtk_samples);
  c.write_profiles = read(out, "output", "profiles", c.write_profiles);
  c.profile_samples = read(out, "output", "profile_samples", c.profile_samples);
  c.profile_half_length = read(out, "output", "profile_half_length", c.profile_half_length);
  c.validate();
  return c;
}

RunConfig RunConfig::load(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw Error(ErrorCode::Io, "cannot open config " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return from_json(ss.str());
}

void RunConfig::set(const std::string& key, const std::string& value) {
  const auto dot = key.find('.');
  if (dot == std::string::npos) invalid(key, "expected section.key");
  const std::string section = key.substr(0, dot), name = key.substr(dot + 1);
  json j = json::parse(to_json());
  if (!j.contains(section) || !j[section].contains(name)) invalid(key, "unknown key");
  json v;
  const json& current = j[section][name];
  if (current.is_string()) {
    v = value;
  } else if (current.is_array()) {
    std::string s = value;
    for (char& ch : s)
      if (ch == ',') ch = ' ';
    std::istringstream in(s);
    json arr = json::array();
    std::string tok;
    while (in >> tok) {
      try {
        arr.push_back(json::parse(tok));
      } catch (const json::exception&) {
        invalid(key, "expected numbers");
      }
    }
    if (arr.size() != current.size()) invalid(key, "expected " + std::to_string(current.size()) + " values");
    v = arr;
  } else {
    try {
      v = json::parse(value);
    } catch (const json::exception&) {
      invalid(key, "cannot parse '" + value + "'");
    }
  }
  j[section][name] = v;
  *this = from_json(j.dump());
}

std::uint64_t RunConfig::hash() const { return fnv1a(to_json()); }

DislocationSpec RunConfig::dislocation() const {
  DislocationSpec s = preset == Preset::Screw ? DislocationSpec::screw(burgers, core_radius)
                                              : DislocationSpec::edge(burgers, core_radius);
  s.center = center;
  return s;
}

Patch RunConfig::make_patch() const {
  validate();
  const KnotVector k1 = make_graded_knot_vector(grid[0], degrees[0], {grading});
  const KnotVector k2 = make_graded_knot_vector(grid[1], degrees[1], {grading});
  const KnotVector k3 = make_graded_knot_vector(grid[2], degrees[2], {1.0});
  return make_box_patch(TensorBasis3D({k1, k2, k3}), extents);
}

double RunConfig::stress_scale() const {
  const double s = material.mu * burgers / (2.0 * kPi * core_radius);
  return preset == Preset::Screw ? s : s / (1.0 - material.nu);
}

FieldSampler::FieldSampler(const PlasticField& plastic, const ElasticProblem* problem, const ElasticState* state)
    : plastic_(plastic), problem_(problem), state_(state) {
  if ((problem == nullptr) != (state == nullptr))
    throw Error(ErrorCode::InvalidArgument, "sampler: elastic problem and state go together");
}

FieldSample FieldSampler::at(const Vec3& x) const {
  const Vec3 t = inverse_map(plastic_.patch, x);
  const ThetaEval te = theta_at(plastic_, t);
  FieldSample s;
  s.theta = te.theta;
  s.det_theta = te.det;
  if (problem_) s.S = stress_at(*problem_, *state_, t).S;
  return s;
}

namespace {

void put(std::ostream& out, double v) {
  if (v == 0.0) v = 0.0;  // drop the sign of negative zero
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9e", v);
  out << buf;
}

Vec3 grid_point(const SamplingGrid& g, int i, int j, int k) {
  const int idx[3] = {i, j, k};
  Vec3 x;
  for (int d = 0; d < 3; ++d) {
    const double s = static_cast<double>(idx[d]) / (g.samples[d] - 1);
    x[d] = g.lo[d] + s * (g.hi[d] - g.lo[d]);
  }
  return x;
}

}  // namespace

void export_vtk(const FieldSampler& sampler, const SamplingGrid& grid, const std::string& path) {
  for (int d = 0; d < 3; ++d)
    if (grid.samples[d] < 2) throw Error(ErrorCode::InvalidArgument, "export_vtk: need at least 2 samples");
  const auto [nx, ny, nz] = grid.samples;
  const std::size_t n = static_cast<std::size_t>(nx) * ny * nz;
  std::vector<Vec3> pts;
  std::vector<FieldSample> vals;
  pts.reserve(n);
  vals.reserve(n);
  for (int k = 0; k < nz; ++k)
    for (int j = 0; j < ny; ++j)
      for (int i = 0; i < nx; ++i) {
        pts.push_back(grid_point(grid, i, j, k));
        vals.push_back(sampler.at(pts.back()));
      }

  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot open " + path + " for writing");
  out << "# vtk DataFile Version 3.0\n"
      << "dislocgeo plastic and elastic fields\n"
      << "ASCII\n"
      << "DATASET STRUCTURED_GRID\n"
      << "DIMENSIONS " << nx << ' ' << ny << ' ' << nz << '\n'
      << "POINTS " << n << " double\n";
  for (const Vec3& p : pts) {
    put(out, p[0]);
    out << ' ';
    put(out, p[1]);
    out << ' ';
    put(out, p[2]);
    out << '\n';
  }
  out << "POINT_DATA " << n << '\n';
  auto array = [&](const std::string& name, auto get) {
    out << "SCALARS " << name << " double 1\nLOOKUP_TABLE default\n";
    for (const FieldSample& s : vals) {
      put(out, get(s));
      out << '\n';
    }
  };
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      array("Theta_" + std::to_string(i + 1) + std::to_string(j + 1), [i, j](const FieldSample& s) { return s.theta[i][j]; });
  for (int i = 0; i < 3; ++i)
    for (int j = i; j < 3; ++j)
      array("S_" + std::to_string(i + 1) + std::to_string(j + 1), [i, j](const FieldSample& s) { return s.S[i][j]; });
  array("detTheta", [](const FieldSample& s) { return s.det_theta; });
  if (!out) throw Error(ErrorCode::Io, "write failed: " + path);
}

namespace {

struct Component {
  enum Kind { Theta, Stress, Det } kind = Theta;
  int i = 0;
  int j = 0;
  std::string name;
};

Component parse_component(const std::string& s) {
  Component c;
  c.name = s;
  auto idx = [&](const std::string& digits) {
    if (digits.size() != 2 || digits[0] < '1' || digits[0] > '3' || digits[1] < '1' || digits[1] > '3')
      throw Error(ErrorCode::InvalidArgument, "profile: bad component " + s);
    c.i = digits[0] - '1';
    c.j = digits[1] - '1';
  };
  if (s == "detTheta") {
    c.kind = Component::Det;
  } else if (s.rfind("Theta_", 0) == 0) {
    c.kind = Component::Theta;
    idx(s.substr(6));
  } else if (s.rfind("S_", 0) == 0) {
    c.kind = Component::Stress;
    idx(s.substr(2));
  } else {
    throw Error(ErrorCode::InvalidArgument, "profile: bad component " + s);
  }
  return c;
}

// Volterra stress S^{ij} relative to the line position, or NaN on the line.
double volterra_component(Preset p, const VolterraParams& v, double x1, double x2, int i, int j) {
  if (x1 == 0.0 && x2 == 0.0) return std::nan("");
  if (i > j) std::swap(i, j);
  if (p == Preset::Screw) {
    const ScrewStress s = volterra_screw_stress(x1, x2, v);
    if (i == 1 && j == 2) return s.s23;
    if (i == 0 && j == 2) return s.s31;
    return 0.0;
  }
  const EdgeStress s = volterra_edge_stress(x1, x2, v);
  if (i == 0 && j == 0) return s.s11;
  if (i == 1 && j == 1) return s.s22;
  if (i == 2 && j == 2) return s.s33;
  if (i == 0 && j == 1) return s.s12;
  return 0.0;
}

}  // namespace

void export_profile(const FieldSampler& sampler, const LineSpec& line, const std::vector<std::string>& components,
                    const ProfileOracles& oracles, double core_radius, const std::string& path) {
  if (line.axis < 0 || line.axis > 2) throw Error(ErrorCode::InvalidArgument, "profile: axis must be 0, 1 or 2");
  if (line.samples < 2) throw Error(ErrorCode::InvalidArgument, "profile: need at least 2 samples");
  if (!(core_radius > 0.0)) throw Error(ErrorCode::InvalidArgument, "profile: core radius must be positive");
  const Patch& patch = sampler.patch();
  const double eps = 1e-12 * std::max({patch.extents()[0], patch.extents()[1], patch.extents()[2]});
  for (int d = 0; d < 3; ++d) {
    const double lo = d == line.axis ? std::min(line.from, line.to) : line.point[d];
    const double hi = d == line.axis ? std::max(line.from, line.to) : line.point[d];
    if (lo < patch.box_lo[d] - eps || hi > patch.box_hi[d] + eps)
      throw Error(ErrorCode::InvalidArgument, "profile: line leaves the domain");
  }
  std::vector<Component> comps;
  for (const auto& s : components) {
    comps.push_back(parse_component(s));
    if (comps.back().kind == Component::Stress && !sampler.has_stress())
      throw Error(ErrorCode::InvalidArgument, "profile: stress requested without an elastic state");
  }

  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot open " + path + " for writing");
  out << "x" << (line.axis + 1) << "_over_R";
  for (const Component& c : comps) {
    if (c.kind == Component::Stress)
      out << ',' << c.name << "_over_DS,volterra_" << c.name << "_over_DS";
    else if (c.kind == Component::Theta)
      out << ',' << c.name << ",homotopy_" << c.name;
    else
      out << ',' << c.name;
  }
  out << '\n';
  const Vec3 base = oracles.basepoint;
  for (int k = 0; k < line.samples; ++k) {
    Vec3 x = line.point;
    x[line.axis] = line.from + (line.to - line.from) * k / (line.samples - 1);
    const FieldSample s = sampler.at(x);
    put(out, x[line.axis] / core_radius);
    std::optional<Mat3> hom;
    for (const Component& c : comps) {
      out << ',';
      if (c.kind == Component::Det) {
        put(out, s.det_theta);
        continue;
      }
      if (c.kind == Component::Theta) {
        put(out, s.theta[c.i][c.j]);
        out << ',';
        if (oracles.torsion) {
          if (!hom) hom = homotopy_theta(*oracles.torsion, x, base);
          put(out, (*hom)[c.i][c.j]);
        } else {
          out << "nan";
        }
        continue;
      }
      put(out, s.S[c.i][c.j] / oracles.stress_scale);
      out << ',';
      if (oracles.preset) {
        const double v =
            volterra_component(*oracles.preset, oracles.volterra, x[0] - base[0], x[1] - base[1], c.i, c.j);
        if (std::isnan(v))
          out << "nan";
        else
          put(out, v / oracles.stress_scale);
      } else {
        out << "nan";
      }
    }
    out << '\n';
  }
  if (!out) throw Error(ErrorCode::Io, "write failed: " + path);
}

namespace {

template <class F>
auto stage(const char* name, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const Error& e) {
    throw Error(e.code(), std::string("stage ") + name + ": " + e.what());
  }
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::Io, "cannot open " + path + " for writing");
  f << text;
  if (!f) throw Error(ErrorCode::Io, "write failed: " + path);
}

void write_minres_csv(const std::string& path, const std::array<std::vector<double>, 3>& h) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::Io, "cannot open " + path + " for writing");
  f << "component,iteration,residual\n";
  char buf[64];
  for (int i = 0; i < 3; ++i)
    for (std::size_t k = 0; k < h[i].size(); ++k) {
      std::snprintf(buf, sizeof buf, "%d,%zu,%.10e\n", i + 1, k, h[i][k]);
      f << buf;
    }
}

std::string hex64(std::uint64_t v) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

}  // namespace

std::string pipeline_metadata(const RunConfig& config, const PipelineSummary* summary) {
  json j;
  j["format"] = "dislocgeo-run 1";
  j["git_revision"] = git_revision();
  j["config_hash"] = hex64(config.hash());
  j["config"] = json::parse(config.to_json());
  j["tolerances"] = {{"minres_absolute", config.solver.minres_tol},
                     {"pcg_relative", config.solver.pcg_tol},
                     {"newton_relative", config.solver.newton_tol}};
  j["grading"] = {{"gamma", config.grading},
                  {"directions", "x1 x2"},
                  {"map", "s -> 0.5 + 0.5 sign(2s-1) |2s-1|^gamma on uniform interior knots"}};
  const Patch patch = config.make_patch();
  j["pinning"] = corner_pinning(patch).description;
  j["stress_scale_DS"] = config.stress_scale();
  if (summary) {
    j["results"]["plastic"] = {{"minres_residual", summary->plastic.minres_residual},
                               {"minres_iterations", summary->plastic.minres_iterations},
                               {"structure_residual", summary->plastic.structure_residual},
                               {"divergence_residual", summary->plastic.divergence_residual},
                               {"theta_norm", summary->plastic.theta_norm},
                               {"torsion_norm", summary->plastic.torsion_norm}};
    j["results"]["elastic"] = {{"newton_iterations", summary->newton_iterations},
                               {"initial_residual", summary->newton_initial_residual},
                               {"final_residual", summary->newton_final_residual},
                               {"strain_energy", summary->strain_energy}};
    j["files"] = summary->files;
  }
  return j.dump(2) + "\n";
}

PipelineSummary run_pipeline(const RunConfig& config, const std::string& out_dir, PipelineMode mode,
                             const std::string& plastic_file) {
  stage("config", [&] { config.validate(); });
  namespace fs = std::filesystem;
  stage("output", [&] {
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) throw Error(ErrorCode::Io, "cannot create " + out_dir + ": " + ec.message());
  });
  auto file = [&](const char* name) { return (fs::path(out_dir) / name).string(); };

  PipelineSummary sum;
  const TorsionField torsion(config.dislocation());
  PlasticField plastic;
  if (mode == PipelineMode::ElasticOnly) {
    plastic = stage("plastic", [&] {
      if (plastic_file.empty()) throw Error(ErrorCode::Validation, "plastic_file: required for elastic-only runs");
      PlasticField f = load_plastic_field(plastic_file);
      if (f.spec_hash != torsion_hash(torsion))
        throw Error(ErrorCode::Validation, "plastic_file: dislocation does not match the config");
      if (f.patch.basis.counts() != config.grid) throw Error(ErrorCode::Validation, "plastic_file: grid does not match the config");
      sum.plastic = residual_norms(f, torsion);
      return f;
    });
  } else {
    plastic = stage("plastic", [&] {
      PlasticOptions opt;
      opt.preconditioner = config.plastic_preconditioner;
      PlasticSolution s = solve_plastic(config.make_patch(), torsion, config.solver, opt);
      sum.plastic = s.report;
      save_plastic_field(s.field, file("plastic_field.txt"));
      write_minres_csv(file("plastic_minres.csv"), s.histories);
      sum.files.push_back("plastic_field.txt");
      sum.files.push_back("plastic_minres.csv");
      return std::move(s.field);
    });
  }

  ElasticProblem problem{&plastic, config.material, corner_pinning(plastic.patch), config.elastic_preconditioner};
  ElasticState state;
  const bool elastic = mode != PipelineMode::PlasticOnly;
  if (elastic) {
    stage("elastic", [&] {
      NewtonResult r = newton_solve(problem, config.solver);
      sum.newton_iterations = r.iterations;
      sum.newton_initial_residual = r.initial_residual;
      sum.newton_final_residual = r.final_residual;
      sum.strain_energy = r.history.back().energy;
      state = std::move(r.state);
      save_elastic_state(state, file("elastic_state.txt"));
      write_newton_history_csv(file("newton_history.csv"), r.history);
      sum.files.push_back("elastic_state.txt");
      sum.files.push_back("newton_history.csv");
    });
  }

  stage("export", [&] {
    const FieldSampler sampler(plastic, elastic ? &problem : nullptr, elastic ? &state : nullptr);
    if (config.write_vtk) {
      SamplingGrid g{plastic.patch.box_lo, plastic.patch.box_hi, config.vtk_samples};
      export_vtk(sampler, g, file("fields.vtk"));
      sum.files.push_back("fields.vtk");
    }
    if (config.write_profiles) {
      ProfileOracles o;
      o.preset = config.preset;
      o.volterra = {config.material.mu, config.material.nu, config.burgers, config.core_radius};
      o.torsion = &torsion;
      o.basepoint = config.center;
      o.stress_scale = config.stress_scale() != 0.0 ? config.stress_scale() : 1.0;
      std::vector<std::string> comps;
      if (config.preset == Preset::Screw)
        comps = {"Theta_31", "Theta_32", "Theta_33"};
      else
        comps = {"Theta_11", "Theta_12", "Theta_22"};
      if (elastic) {
        if (config.preset == Preset::Screw)
          comps.insert(comps.end(), {"S_23", "S_31"});
        else
          comps.insert(comps.end(), {"S_11", "S_22", "S_33", "S_12"});
      }
      const double h = config.profile_half_length;
      for (int axis = 0; axis < 2; ++axis) {
        LineSpec line;
        line.axis = axis;
        line.point = config.center;
        const double lo = std::max(plastic.patch.box_lo[axis], config.center[axis] - h);
        const double hi = std::min(plastic.patch.box_hi[axis], config.center[axis] + h);
        line.from = lo;
        line.to = hi;
        line.samples = config.profile_samples;
        const std::string name = axis == 0 ? "profile_x1.csv" : "profile_x2.csv";
        export_profile(sampler, line, comps, o, config.core_radius, file(name.c_str()));
        sum.files.push_back(name);
      }
    }
    sum.files.push_back("metadata.json");
    write_text(file("metadata.json"), pipeline_metadata(config, &sum));
  });
  return sum;
}

}  // namespace dislocgeo
