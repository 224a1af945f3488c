/* C interface to the dynamic constraint annealing library.
 *
 * All functions return a dca_status. On failure, dca_last_error() returns a
 * thread-local message describing the most recent error on the calling
 * thread. Strings returned through `char **` out-parameters are owned by the
 * caller and must be released with dca_string_free().
 */
#ifndef DCA_DCA_H
#define DCA_DCA_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  define DCA_API __declspec(dllexport)
#else
#  define DCA_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum dca_status {
  DCA_OK = 0,
  DCA_ERR_INVALID_ARGUMENT = 1,
  DCA_ERR_ELEMENT_NOT_FOUND = 2,
  DCA_ERR_INVALID_RANK = 3,
  DCA_ERR_INCOMPATIBLE = 4,
  DCA_ERR_INVALID_CONSTRAINT = 5,
  DCA_ERR_EMPTY_BATCH = 6,
  DCA_ERR_CONFIG = 7,
  DCA_ERR_REPLAY_MISS = 8,
  DCA_ERR_ORACLE_IO = 9,
  DCA_ERR_INVALID_TEMPERATURE = 10,
  DCA_ERR_OUT_OF_RANGE = 11,
  DCA_ERR_TOO_LARGE = 12,
  DCA_ERR_IO = 13,
  DCA_ERR_INTERNAL = 99
} dca_status;

typedef enum dca_add_outcome {
  DCA_ADDED = 0,
  DCA_DUPLICATE = 1,
  DCA_REDUNDANT = 2,
  DCA_CYCLE_REJECTED = 3
} dca_add_outcome;

typedef enum dca_run_mode {
  DCA_MODE_BOTH = 0,
  DCA_MODE_PHASE1 = 1,
  DCA_MODE_PHASE2 = 2
} dca_run_mode;

DCA_API const char *dca_version(void);
DCA_API const char *dca_status_name(dca_status status);
DCA_API const char *dca_last_error(void);
DCA_API void dca_string_free(char *s);

/* Boltzmann acceptance probability of a candidate when maximising. */
DCA_API dca_status dca_acceptance_probability(double f_current, double f_candidate,
                                              double temperature, double *out);

/* Constraint graphs ----------------------------------------------------- */

typedef struct dca_graph dca_graph;

DCA_API dca_status dca_graph_create(dca_graph **out);
/* Reads the `i < j # ...` edge-list format. */
DCA_API dca_status dca_graph_load_edge_list(const char *path, dca_graph **out);
DCA_API void dca_graph_destroy(dca_graph *graph);
DCA_API dca_status dca_graph_add(dca_graph *graph, int before, int after,
                                 dca_add_outcome *outcome);
DCA_API dca_status dca_graph_edge_count(const dca_graph *graph, size_t *out);
DCA_API dca_status dca_graph_violations(const dca_graph *graph, const int *order, size_t n,
                                        size_t *out);
/* DOT rendering of the transitive reduction. */
DCA_API dca_status dca_graph_write_dot(const dca_graph *graph, const char *path);
DCA_API dca_status dca_graph_write_edge_list(const dca_graph *graph, const char *path);

/* Experiments ----------------------------------------------------------- */

typedef struct dca_run dca_run;

typedef struct dca_run_options {
  dca_run_mode mode;
  int has_seed;            /* nonzero: `seed` overrides the config's seed */
  uint64_t seed;
  const char *out_dir;     /* NULL: use the config's out_dir, if any */
  const char *start;       /* phase 2 alone: space-separated assignment */
  const char *graph_path;  /* phase 2 alone: edge-list file */
} dca_run_options;

/* Runs the configured experiment. `config_json` is the run config document;
 * relative paths inside it resolve against `base_dir` (may be NULL). */
DCA_API dca_status dca_run_experiment(const char *config_json, const char *base_dir,
                                      const dca_run_options *options, dca_run **out);
DCA_API void dca_run_destroy(dca_run *run);
/* Copies up to `capacity` ids of the best assignment; *len gets its length. */
DCA_API dca_status dca_run_best(const dca_run *run, int *buffer, size_t capacity, size_t *len,
                                double *mean, double *se);
DCA_API dca_status dca_run_summary_json(const dca_run *run, char **out);
/* Constraint graph induced (or supplied) during the run; caller destroys it. */
DCA_API dca_status dca_run_graph(const dca_run *run, dca_graph **out);

/* Replays the published traces from `fixture_dir`. *all_match is 1 iff both
 * the constraint set and all values match. */
DCA_API dca_status dca_replay_verify(const char *fixture_dir, char **report_json,
                                     int *all_match);

/* Exhaustive optimum of a landscape document, optionally restricted to the
 * linear extensions of `graph` (may be NULL). Result is a JSON object. */
DCA_API dca_status dca_brute_force(const char *landscape_json, const dca_graph *graph,
                                   char **result_json);

/* Rebuilds the constraint graph from a JSONL trace and writes its reduced DOT. */
DCA_API dca_status dca_export_dag_from_trace(const char *trace_path, const char *dot_path);

#ifdef __cplusplus
}
#endif

#endif /* DCA_DCA_H */
