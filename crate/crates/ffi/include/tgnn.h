#ifndef TGNN_H
#define TGNN_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Pass as a `bound` argument for unbounded counting.
 */
#define TGNN_UNBOUNDED 0

/**
 * Result code of every fallible call.
 */
typedef enum TgnnStatus {
  TGNN_STATUS_OK = 0,
  TGNN_STATUS_NULL_POINTER = 1,
  TGNN_STATUS_INVALID_UTF8 = 2,
  /**
   * Malformed graph, template, model or configuration.
   */
  TGNN_STATUS_INVALID_INPUT = 3,
  /**
   * Unknown template name or node id.
   */
  TGNN_STATUS_NOT_FOUND = 4,
  /**
   * Formula syntax or proposition error.
   */
  TGNN_STATUS_PARSE_ERROR = 5,
  /**
   * The exhaustive oracle's resource guard tripped.
   */
  TGNN_STATUS_RESOURCE_LIMIT = 6,
  /**
   * Caller-provided buffer has the wrong length.
   */
  TGNN_STATUS_BUFFER_SIZE = 7,
  TGNN_STATUS_IO = 8,
  /**
   * A Rust panic was caught at the boundary.
   */
  TGNN_STATUS_PANIC = 99,
} TgnnStatus;

/**
 * Bisimilarity decision procedure for [`tgnn_bisimilar`].
 */
typedef enum TgnnMethod {
  TGNN_METHOD_TWL = 0,
  TGNN_METHOD_ORACLE = 1,
} TgnnMethod;

/**
 * Opaque labelled directed graph.
 */
typedef struct TgnnGraph TgnnGraph;

/**
 * Opaque template GNN.
 */
typedef struct TgnnModel TgnnModel;

/**
 * Opaque template registry.
 */
typedef struct TgnnRegistry TgnnRegistry;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message describing the last failure on this thread, or an empty string.
 * The pointer stays valid until the next tgnn call on the same thread.
 */
const char *tgnn_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *tgnn_version(void);

/**
 * Releases a string returned by this library. Null is ignored.
 *
 * # Safety
 * `s` must come from this library and must not be used afterwards.
 */
void tgnn_string_free(char *s);

/**
 * Parses a graph file (JSON text).
 *
 * # Safety
 * `json` must be a NUL-terminated string; `out` must be writable.
 */
enum TgnnStatus tgnn_graph_from_json(const char *json, struct TgnnGraph **out);

/**
 * Releases a graph. Null is ignored.
 *
 * # Safety
 * `g` must come from [`tgnn_graph_from_json`] and must not be used afterwards.
 */
void tgnn_graph_free(struct TgnnGraph *g);

/**
 * # Safety
 * `g` must be a live graph handle; `out` must be writable.
 */
enum TgnnStatus tgnn_graph_node_count(const struct TgnnGraph *g, size_t *out);

/**
 * Index of the node whose file id is `id`.
 *
 * # Safety
 * `g` must be a live graph handle, `id` NUL-terminated, `out` writable.
 */
enum TgnnStatus tgnn_graph_node_index(const struct TgnnGraph *g, const char *id, size_t *out);

/**
 * Registry holding the builtin templates `T1`, `T2`, `T△` (alias `Ttri`)
 * and `Tp`.
 *
 * # Safety
 * `out` must be writable.
 */
enum TgnnStatus tgnn_registry_builtin(struct TgnnRegistry **out);

/**
 * Parses a registry file (JSON text). Builtin templates whose names are not
 * taken by the file are added.
 *
 * # Safety
 * `json` must be NUL-terminated; `out` must be writable.
 */
enum TgnnStatus tgnn_registry_from_json(const char *json, struct TgnnRegistry **out);

/**
 * Releases a registry. Null is ignored.
 *
 * # Safety
 * `reg` must come from this library and must not be used afterwards.
 */
void tgnn_registry_free(struct TgnnRegistry *reg);

/**
 * Number of embeddings of the named template rooted at `node`.
 *
 * # Safety
 * Handles must be live, `template` NUL-terminated, `out` writable.
 */
enum TgnnStatus tgnn_count_embeddings(const struct TgnnRegistry *reg,
                                      const char *template_,
                                      const struct TgnnGraph *g,
                                      size_t node,
                                      size_t *out);

/**
 * Whether `rounds` rounds of T-WL over the comma-separated `templates`
 * give `(g1, v1)` and `(g2, v2)` different colours. `bound` is the
 * multiplicity cap, or [`TGNN_UNBOUNDED`].
 *
 * # Safety
 * Handles must be live, `templates` NUL-terminated, `out` writable.
 */
enum TgnnStatus tgnn_distinguishes(const struct TgnnRegistry *reg,
                                   const char *templates_csv,
                                   const struct TgnnGraph *g1,
                                   size_t v1,
                                   const struct TgnnGraph *g2,
                                   size_t v2,
                                   size_t rounds,
                                   size_t bound_c,
                                   bool *out);

/**
 * Whether `(g1, v1)` and `(g2, v2)` are `(level, bound)`-bisimilar.
 *
 * # Safety
 * Handles must be live, `templates` NUL-terminated, `out` writable.
 */
enum TgnnStatus tgnn_bisimilar(const struct TgnnRegistry *reg,
                               const char *templates_csv,
                               const struct TgnnGraph *g1,
                               size_t v1,
                               const struct TgnnGraph *g2,
                               size_t v2,
                               size_t level,
                               size_t bound_c,
                               enum TgnnMethod method,
                               bool *out);

/**
 * Evaluates a formula at `node`. Propositions are the registry's list, or
 * `p, q, r, s` (then `p1 … pd`) by label dimension.
 *
 * # Safety
 * Handles must be live, `formula` NUL-terminated, `out` writable.
 */
enum TgnnStatus tgnn_modelcheck(const struct TgnnRegistry *reg,
                                const struct TgnnGraph *g,
                                const char *formula,
                                size_t node,
                                bool *out);

/**
 * Compiles a formula over `propositions` input components into a model.
 *
 * # Safety
 * `reg` must be live, `formula` NUL-terminated, `out` writable.
 */
enum TgnnStatus tgnn_compile_formula(const struct TgnnRegistry *reg,
                                     const char *formula,
                                     size_t propositions_count,
                                     struct TgnnModel **out);

/**
 * Parses a model file; template names resolve against the model's own
 * template list first, then `reg`.
 *
 * # Safety
 * `json` must be NUL-terminated, `reg` live, `out` writable.
 */
enum TgnnStatus tgnn_model_from_json(const char *json,
                                     const struct TgnnRegistry *reg,
                                     struct TgnnModel **out);

/**
 * Serialises a model; release the string with [`tgnn_string_free`].
 *
 * # Safety
 * `model` must be live; `out` writable.
 */
enum TgnnStatus tgnn_model_to_json(const struct TgnnModel *model, char **out);

/**
 * Releases a model. Null is ignored.
 *
 * # Safety
 * `model` must come from this library and must not be used afterwards.
 */
void tgnn_model_free(struct TgnnModel *model);

/**
 * Runs a model and writes one class (0 or 1) per node into `classes`,
 * which must hold exactly the graph's node count.
 *
 * # Safety
 * Handles must be live; `classes` must point to `len` writable bytes.
 */
enum TgnnStatus tgnn_run_gnn(const struct TgnnModel *model,
                             const struct TgnnGraph *g,
                             uint8_t *classes,
                             size_t len);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* TGNN_H */
