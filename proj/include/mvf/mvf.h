#ifndef MVF_MVF_H
#define MVF_MVF_H

/* C interface to the magneto-viscoelastic flow library.
 *
 * Every function returns an mvf_status. On failure a description of the last
 * error on the calling thread is available from mvf_last_error(). Handles are
 * opaque and must be released with the matching destroy function. */

#include <stddef.h>
#include <stdint.h>

#if defined(MVF_BUILDING_LIBRARY)
#define MVF_API __attribute__((visibility("default")))
#else
#define MVF_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum mvf_status {
  MVF_OK = 0,
  MVF_ERR_STRUCTURAL = 1,
  MVF_ERR_USAGE = 2,
  MVF_ERR_COMPATIBILITY = 3,
  MVF_ERR_CONVERGENCE = 4,
  MVF_ERR_STEP = 5,
  MVF_ERR_STAGNATION = 6,
  MVF_ERR_CONFIG = 7,
  MVF_ERR_IO = 8,
  MVF_ERR_CHECK = 9,
  MVF_ERR_INVALID_ARGUMENT = 10,
  MVF_ERR_INTERNAL = 11
} mvf_status;

typedef enum mvf_bc { MVF_BC_DIRICHLET_ZERO = 0, MVF_BC_NEUMANN_ZERO = 1, MVF_BC_NONE = 2 } mvf_bc;

typedef struct mvf_grid mvf_grid;
typedef struct mvf_field mvf_field;

MVF_API const char* mvf_version(void);
MVF_API const char* mvf_last_error(void);
MVF_API const char* mvf_status_name(mvf_status status);

/* Grid */
MVF_API mvf_status mvf_grid_create(int nx, int ny, double lx, double ly, mvf_grid** out);
MVF_API void mvf_grid_destroy(mvf_grid* grid);
MVF_API mvf_status mvf_grid_shape(const mvf_grid* grid, int* nx, int* ny, double* lx, double* ly);
MVF_API size_t mvf_grid_nodes(const mvf_grid* grid);

/* Fields: components in {1, 2, 3, 4}; values stored node-major with components
 * interleaved, node index = j * (nx + 1) + i. */
MVF_API mvf_status mvf_field_create(const mvf_grid* grid, int components, mvf_bc bc,
                                    mvf_field** out);
MVF_API void mvf_field_destroy(mvf_field* field);
MVF_API int mvf_field_components(const mvf_field* field);
MVF_API mvf_status mvf_field_get(const mvf_field* field, double* values, size_t count);
MVF_API mvf_status mvf_field_set(mvf_field* field, const double* values, size_t count);
MVF_API mvf_status mvf_field_write(const mvf_field* field, const char* path, double time);
MVF_API mvf_status mvf_field_read(const char* path, mvf_field** out, double* time);

/* Operators */
MVF_API mvf_status mvf_gradient(const mvf_field* scalar, mvf_field** out);
MVF_API mvf_status mvf_divergence(const mvf_field* vector2, mvf_field** out);
MVF_API mvf_status mvf_laplacian(const mvf_field* field, mvf_field** out);
MVF_API mvf_status mvf_norm_l2(const mvf_field* field, double* out);
MVF_API mvf_status mvf_inner_l2(const mvf_field* a, const mvf_field* b, double* out);
MVF_API mvf_status mvf_leray_project(const mvf_field* f, double tolerance, mvf_field** u,
                                     mvf_field** p);

/* Command runner used by the command-line tool. */
typedef struct mvf_run_options {
  const char* config_path; /* NULL or "" for defaults */
  const char* output_dir;  /* NULL or "" to keep output.directory */
  uint64_t seed;
  int has_seed;
  int quiet;
  double corrupt_adjoint; /* 1.0 for normal runs */
} mvf_run_options;

MVF_API void mvf_run_options_init(mvf_run_options* opts);

/* Runs a subcommand and stores its process exit status (0 success, 2 config
 * error, 3 solver nonconvergence, 4 check failure, 1 other). */
MVF_API mvf_status mvf_run_command(const char* command, const mvf_run_options* opts,
                                   int* exit_code);

#ifdef __cplusplus
}
#endif

#endif
