/* dislocgeo C interface.
 *
 * Every function returns a dg_status. On failure a message is available from
 * dg_last_error() on the calling thread until the next failing call there.
 * Handles are opaque and owned by the caller; release them with the matching
 * destroy function (passing NULL is allowed).
 */
#ifndef DISLOCGEO_H
#define DISLOCGEO_H

#include <stddef.h>

#if defined(_WIN32)
#define DG_API __declspec(dllexport)
#else
#define DG_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum dg_status {
  DG_OK = 0,
  DG_ERR_INVALID_ARGUMENT = 1,
  DG_ERR_VALIDATION = 2,
  DG_ERR_DOMAIN = 3,
  DG_ERR_NON_CONVERGENCE = 4,
  DG_ERR_SINGULAR_GEOMETRY = 5,
  DG_ERR_DEGENERATE_PLASTICITY = 6,
  DG_ERR_INVERTED_ELEMENT = 7,
  DG_ERR_INDEFINITE = 8,
  DG_ERR_INVALID_MATRIX = 9,
  DG_ERR_UNSUPPORTED_GEOMETRY = 10,
  DG_ERR_INVALID_LOOP = 11,
  DG_ERR_SINGULARITY = 12,
  DG_ERR_IO = 13,
  DG_ERR_INTERNAL = 14
} dg_status;

typedef enum dg_mode {
  DG_MODE_FULL = 0,
  DG_MODE_PLASTIC_ONLY = 1,
  DG_MODE_ELASTIC_ONLY = 2
} dg_mode;

typedef struct dg_config dg_config;
typedef struct dg_fields dg_fields;

typedef struct dg_run_summary {
  double minres_residual;
  int minres_iterations;
  double structure_residual;
  double divergence_residual;
  double theta_norm;
  int newton_iterations;
  double newton_initial_residual;
  double newton_final_residual;
  double strain_energy;
} dg_run_summary;

DG_API const char* dg_version(void);
DG_API const char* dg_git_revision(void);
DG_API const char* dg_status_string(dg_status status);
DG_API const char* dg_last_error(void);

/* Run configuration (JSON with sections domain, grid, dislocation, material,
 * solver, output). */
DG_API dg_status dg_config_create(dg_config** out);
DG_API dg_status dg_config_load(const char* path, dg_config** out);
DG_API dg_status dg_config_parse(const char* json_text, dg_config** out);
/* key is "section.key"; arrays take space or comma separated values. */
DG_API dg_status dg_config_set(dg_config* config, const char* key, const char* value);
/* Copies the canonical JSON into buf (NUL terminated). *needed receives the
 * required size including the terminator; buf may be NULL to query it. */
DG_API dg_status dg_config_to_json(const dg_config* config, char* buf, size_t len, size_t* needed);
DG_API void dg_config_destroy(dg_config* config);

/* Runs the pipeline into out_dir. plastic_file is required for
 * DG_MODE_ELASTIC_ONLY and ignored otherwise. summary may be NULL. */
DG_API dg_status dg_run(const dg_config* config, const char* out_dir, dg_mode mode, const char* plastic_file,
                        dg_run_summary* summary);

/* Solved fields loaded from disk. elastic_file may be NULL (no stress). */
DG_API dg_status dg_fields_open(const dg_config* config, const char* plastic_file, const char* elastic_file,
                                dg_fields** out);
/* theta[9] and stress[9] row-major; any output pointer may be NULL. */
DG_API dg_status dg_fields_sample(const dg_fields* fields, const double x[3], double theta[9], double stress[9],
                                  double* det_theta);
/* Counter-clockwise square loop of half-width h around (cx, cy) at height z. */
DG_API dg_status dg_fields_burgers_square(const dg_fields* fields, double cx, double cy, double h, double z,
                                          double burgers[3]);
DG_API dg_status dg_fields_export_vtk(const dg_fields* fields, const int samples[3], const char* path);
/* components: comma separated list such as "Theta_11,S_23,detTheta". */
DG_API dg_status dg_fields_export_profile(const dg_fields* fields, int axis, const double point[3], double from,
                                          double to, int samples, const char* components, const char* path);
DG_API void dg_fields_destroy(dg_fields* fields);

#ifdef __cplusplus
}
#endif

#endif
