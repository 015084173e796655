#ifndef GASP_H
#define GASP_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

typedef enum GaspRule {
  GASP_RULE_SUM = 0,
  GASP_RULE_ABS_MAX = 1,
  GASP_RULE_AVERAGE = 2,
  GASP_RULE_MAX = 3,
  GASP_RULE_MIN = 4,
} GaspRule;

typedef enum GaspStatus {
  GASP_STATUS_OK = 0,
  GASP_STATUS_NULL_POINTER = 1,
  GASP_STATUS_INVALID_ARGUMENT = 2,
  GASP_STATUS_INVALID_GRAPH = 3,
  GASP_STATUS_IO = 4,
  GASP_STATUS_FORMAT = 5,
  GASP_STATUS_BUFFER_TOO_SMALL = 6,
  GASP_STATUS_PANIC = 7,
} GaspStatus;

// Opaque graph handle.
typedef struct GaspGraph GaspGraph;

// Opaque clustering result.
typedef struct GaspResult GaspResult;

typedef struct GaspRunOptions {
  // One of the `GaspRule` values.
  uint32_t rule;
  bool cannot_link_constraints;
  bool enforce_local_merge;
} GaspRunOptions;

typedef struct GaspScores {
  double vi_split;
  double vi_merge;
  double adapted_rand;
  double combined;
} GaspScores;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Why the previous call on this thread failed, or NULL if it succeeded. Valid until the next call.
const char *gasp_last_error_message(void);

// Library version as a static NUL-terminated string.
const char *gasp_version(void);

// Graph from attractive and repulsive weight arrays of length `edge_count`.
// `is_local` may be NULL (all edges local).
enum GaspStatus gasp_graph_new(size_t node_count,
                               size_t edge_count,
                               const uint64_t *us,
                               const uint64_t *vs,
                               const double *w_plus,
                               const double *w_minus,
                               const uint8_t *is_local,
                               struct GaspGraph **out);

// Graph from signed weights `w = w_plus - w_minus`.
enum GaspStatus gasp_graph_new_signed(size_t node_count,
                                      size_t edge_count,
                                      const uint64_t *us,
                                      const uint64_t *vs,
                                      const double *weights,
                                      const uint8_t *is_local,
                                      struct GaspGraph **out);

// Loads a graph file (JSON header at `path`, payload at `path.bin`).
enum GaspStatus gasp_graph_load(const char *path, struct GaspGraph **out);

// Number of nodes, or 0 for NULL.
size_t gasp_graph_node_count(const struct GaspGraph *graph);

// Number of edges, or 0 for NULL.
size_t gasp_graph_edge_count(const struct GaspGraph *graph);

void gasp_graph_free(struct GaspGraph *graph);

// Partitions `graph`. `options` may be NULL (average linkage, no constraints).
enum GaspStatus gasp_run(const struct GaspGraph *graph,
                         const struct GaspRunOptions *options,
                         struct GaspResult **out);

// Mutex Watershed; same partition as absolute-maximum linkage.
enum GaspStatus gasp_run_mws(const struct GaspGraph *graph, struct GaspResult **out);

// Number of labels (graph nodes), or 0 for NULL.
size_t gasp_result_len(const struct GaspResult *result);

size_t gasp_result_cluster_count(const struct GaspResult *result);

size_t gasp_result_merge_count(const struct GaspResult *result);

// Copies the dense labels (0..cluster_count) into `buf`, which must hold `gasp_result_len` entries.
enum GaspStatus gasp_result_labels(const struct GaspResult *result, uint32_t *buf, size_t len);

void gasp_result_free(struct GaspResult *result);

// Scores `seg` against `gt` (both `len` labels). Ground-truth voxels equal to
// `ignore_label` are skipped unless `ignore_label` is negative.
enum GaspStatus gasp_eval(const uint32_t *seg,
                          const uint32_t *gt,
                          size_t len,
                          int64_t ignore_label,
                          struct GaspScores *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* GASP_H */
