#pragma once

#include <array>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "elastic_solver.hpp"
#include "oracles.hpp"
#include "plastic_solver.hpp"

namespace dislocgeo {

enum class Preset { Screw, Edge };

/// Everything a run needs. Lengths are in units of the core radius scale
/// used by the dislocation (R = b = 1 by default).
struct RunConfig {
  Vec3 extents{40.0, 40.0, 40.0};
  std::array<int, 3> grid{48, 48, 12};
  std::array<int, 3> degrees{2, 2, 2};
  double grading = 2.0;  // knot grading exponent in x1 and x2; x3 stays uniform

  Preset preset = Preset::Screw;
  double burgers = 1.0;
  double core_radius = 1.0;
  Vec3 center{0.0, 0.0, 0.0};

  Material material;
  SolverConfig solver;
  PlasticPreconditioner plastic_preconditioner = PlasticPreconditioner::Tensor;
  ElasticPreconditioner elastic_preconditioner = ElasticPreconditioner::TensorLaplace;

  bool write_vtk = true;
  std::array<int, 3> vtk_samples{41, 41, 9};
  bool write_profiles = true;
  int profile_samples = 161;
  double profile_half_length = 15.0;

  /// Throws Validation with the offending key in the message.
  void validate() const;

  /// Canonical JSON form with every key present.
  std::string to_json() const;
  /// Missing keys keep their defaults; unknown keys are rejected.
  static RunConfig from_json(const std::string& text);
  static RunConfig load(const std::string& path);
  /// Override one key, e.g. set("material.nu", "0.25").
  void set(const std::string& key, const std::string& value);
  std::uint64_t hash() const;

  DislocationSpec dislocation() const;
  Patch make_patch() const;
  /// mu b / (2 pi R), divided by (1 - nu) for the edge preset.
  double stress_scale() const;
};

const char* preset_name(Preset p);
const char* git_revision();

/// Point values exported to VTK and profiles.
struct FieldSample {
  Mat3 theta{};
  Mat3 S{};
  double det_theta = 1.0;
};

/// Evaluates the solved fields at physical points. The elastic part is
/// optional; without it S is reported as zero.
class FieldSampler {
 public:
  FieldSampler(const PlasticField& plastic, const ElasticProblem* problem = nullptr,
               const ElasticState* state = nullptr);
  FieldSample at(const Vec3& x) const;
  const Patch& patch() const { return plastic_.patch; }
  bool has_stress() const { return problem_ != nullptr; }

 private:
  const PlasticField& plastic_;
  const ElasticProblem* problem_;
  const ElasticState* state_;
};

/// Uniform sampling grid over the closed box [lo, hi].
struct SamplingGrid {
  Vec3 lo{};
  Vec3 hi{};
  std::array<int, 3> samples{2, 2, 2};
};

/// Legacy ASCII VTK STRUCTURED_GRID with the point arrays Theta_11..Theta_33,
/// S_11, S_12, S_13, S_22, S_23, S_33 and detTheta.
void export_vtk(const FieldSampler& sampler, const SamplingGrid& grid, const std::string& path);

/// Straight sampling line parallel to a coordinate axis.
struct LineSpec {
  int axis = 0;            // 0, 1, 2
  Vec3 point{};            // the other two coordinates are taken from here
  double from = -1.0;
  double to = 1.0;
  int samples = 101;
};

/// Reference columns for profiles. Stress columns are divided by stress_scale.
struct ProfileOracles {
  std::optional<Preset> preset;  // Volterra field to overlay
  VolterraParams volterra;
  const TorsionField* torsion = nullptr;  // homotopy overlay for Theta columns
  Vec3 basepoint{};
  double stress_scale = 1.0;
};

/// CSV with columns x (units of R), then for every requested component the
/// numeric value and its oracle. Components are named Theta_ij, S_ij or
/// detTheta. Throws InvalidArgument when the line leaves the patch.
void export_profile(const FieldSampler& sampler, const LineSpec& line, const std::vector<std::string>& components,
                    const ProfileOracles& oracles, double core_radius, const std::string& path);

enum class PipelineMode { Full, PlasticOnly, ElasticOnly };

struct PipelineSummary {
  ResidualReport plastic;
  int newton_iterations = 0;
  double newton_initial_residual = 0.0;
  double newton_final_residual = 0.0;
  double strain_energy = 0.0;
  std::vector<std::string> files;
};

/// Runs the requested stages and writes their artifacts into out_dir. Errors
/// are rethrown with the failing stage prefixed to the message.
PipelineSummary run_pipeline(const RunConfig& config, const std::string& out_dir, PipelineMode mode = PipelineMode::Full,
                             const std::string& plastic_file = "");

/// Metadata block written as metadata.json by run_pipeline.
std::string pipeline_metadata(const RunConfig& config, const PipelineSummary* summary);

}  // namespace dislocgeo
