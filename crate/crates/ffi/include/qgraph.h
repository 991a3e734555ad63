#ifndef QGRAPH_H
#define QGRAPH_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes returned by every fallible call.
 */
typedef enum QgStatus {
  QG_STATUS_OK = 0,
  QG_STATUS_NULL_POINTER = 1,
  QG_STATUS_INVALID_ARGUMENT = 2,
  QG_STATUS_REFUSED = 3,
  QG_STATUS_OVERFLOW = 4,
  QG_STATUS_INTERNAL = 5,
} QgStatus;

typedef enum QgModelKind {
  QG_MODEL_KIND_FREE = 0,
  QG_MODEL_KIND_ISING = 1,
} QgModelKind;

typedef enum QgEnsemble {
  QG_ENSEMBLE_LABELED = 0,
  QG_ENSEMBLE_UNLABELED = 1,
} QgEnsemble;

typedef enum QgStart {
  QG_START_HOT = 0,
  QG_START_COLD = 1,
  QG_START_AUTO = 2,
} QgStart;

/**
 * Metropolis chain.
 */
typedef struct QgChain QgChain;

/**
 * Graph state over the edge slots of K_n.
 */
typedef struct QgGraph QgGraph;

/**
 * Hamiltonian parameters.
 */
typedef struct QgModel QgModel;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread. Valid until the next
 * failing call on the same thread; never null.
 */
const char *qg_last_error(void);

/**
 * Library version, static storage.
 */
const char *qg_version(void);

/**
 * Empty graph on n vertices.
 *
 * # Safety
 * `out` must be valid for a pointer write.
 */
enum QgStatus qg_graph_new(size_t n, struct QgGraph **out);

/**
 * Graph from `len` slot levels in lexicographic pair order.
 *
 * # Safety
 * `levels` must point to `len` bytes; `out` must be valid for a pointer write.
 */
enum QgStatus qg_graph_from_levels(size_t n,
                                   const uint8_t *levels,
                                   size_t len,
                                   struct QgGraph **out);

/**
 * # Safety
 * `g` must be null or a handle from this library, not yet freed.
 */
void qg_graph_free(struct QgGraph *g);

/**
 * # Safety
 * `g` must be a live handle; `out` valid for a write.
 */
enum QgStatus qg_graph_clone(const struct QgGraph *g, struct QgGraph **out);

/**
 * # Safety
 * `g` must be a live handle; `out` valid for a write.
 */
enum QgStatus qg_graph_vertex_count(const struct QgGraph *g, size_t *out);

/**
 * Number of slots at level 1.
 *
 * # Safety
 * `g` must be a live handle; `out` valid for a write.
 */
enum QgStatus qg_graph_n1(const struct QgGraph *g, size_t *out);

/**
 * # Safety
 * `g` must be a live handle; `out` valid for a write.
 */
enum QgStatus qg_graph_has_edge(const struct QgGraph *g, size_t i, size_t j, bool *out);

/**
 * Toggles the level of slot {i, j}.
 *
 * # Safety
 * `g` must be a live handle.
 */
enum QgStatus qg_graph_flip(struct QgGraph *g, size_t i, size_t j);

/**
 * |Γ|; `Overflow` when it does not fit in 64 bits.
 *
 * # Safety
 * `g` must be a live handle; `out` valid for a write.
 */
enum QgStatus qg_graph_automorphism_count(const struct QgGraph *g, uint64_t *out);

/**
 * Canonical representative of the isomorphism class, as a new handle.
 *
 * # Safety
 * `g` must be a live handle; `out` valid for a write.
 */
enum QgStatus qg_graph_canonical(const struct QgGraph *g, struct QgGraph **out);

/**
 * Whether two graphs hold the same levels.
 *
 * # Safety
 * `a` and `b` must be live handles; `out` valid for a write.
 */
enum QgStatus qg_graph_equal(const struct QgGraph *a, const struct QgGraph *b, bool *out);

/**
 * Model parameters; pass NaN for `j` to use the default coupling.
 *
 * # Safety
 * `out` must be valid for a pointer write.
 */
enum QgStatus qg_model_new(enum QgModelKind kind,
                           size_t n,
                           double e0,
                           double e1,
                           double j,
                           struct QgModel **out);

/**
 * # Safety
 * `m` must be null or a handle from this library, not yet freed.
 */
void qg_model_free(struct QgModel *m);

/**
 * Coupling in use.
 *
 * # Safety
 * `m` must be a live handle; `out` valid for a write.
 */
enum QgStatus qg_model_coupling(const struct QgModel *m, double *out);

/**
 * # Safety
 * `m` and `g` must be live handles; `out` valid for a write.
 */
enum QgStatus qg_energy(const struct QgModel *m, const struct QgGraph *g, double *out);

/**
 * Chain at inverse temperature `beta` on stream `stream` of `seed`.
 *
 * # Safety
 * `m` must be a live handle; `out` valid for a pointer write.
 */
enum QgStatus qg_chain_new(const struct QgModel *m,
                           double beta,
                           enum QgEnsemble ensemble,
                           uint64_t seed,
                           uint64_t stream,
                           enum QgStart start,
                           struct QgChain **out);

/**
 * # Safety
 * `c` must be null or a handle from this library, not yet freed.
 */
void qg_chain_free(struct QgChain *c);

/**
 * Runs `count` sweeps of C(n,2) proposals each.
 *
 * # Safety
 * `c` must be a live handle.
 */
enum QgStatus qg_chain_sweep(struct QgChain *c, uint64_t count);

/**
 * # Safety
 * `c` must be a live handle; `out` valid for a write.
 */
enum QgStatus qg_chain_energy(const struct QgChain *c, double *out);

/**
 * # Safety
 * `c` must be a live handle; `out` valid for a write.
 */
enum QgStatus qg_chain_acceptance_rate(const struct QgChain *c, double *out);

/**
 * Copy of the current state as a new graph handle.
 *
 * # Safety
 * `c` must be a live handle; `out` valid for a pointer write.
 */
enum QgStatus qg_chain_state(const struct QgChain *c, struct QgGraph **out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* QGRAPH_H */
