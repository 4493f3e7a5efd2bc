#ifndef BRANCHSPACE_H
#define BRANCHSPACE_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes. The nonzero library codes match the CLI exit codes.
 */
typedef enum {
  BS_STATUS_OK = 0,
  /**
   * Malformed or invalid input.
   */
  BS_STATUS_INPUT = 2,
  /**
   * Valid input outside the hypotheses of the computation.
   */
  BS_STATUS_HYPOTHESIS = 3,
  /**
   * Two independent computations disagreed.
   */
  BS_STATUS_CROSS_CHECK = 4,
  BS_STATUS_NULL_POINTER = 10,
  BS_STATUS_INVALID_UTF8 = 11,
  BS_STATUS_PANIC = 12,
} BsStatus;

/**
 * A parsed graph. The intersection lattice is computed on first use.
 */
typedef struct BsGraph BsGraph;

/**
 * Library version as a static NUL-terminated string.
 */
const char *bs_version(void);

/**
 * Message for the last failed call on this thread, or NULL. The pointer
 * stays valid until the next failing call on the same thread.
 */
const char *bs_last_error(void);

/**
 * Parses a graph file. On success `*out` receives a new handle.
 *
 * # Safety
 * `text` must be a NUL-terminated string and `out` valid for a write.
 */
BsStatus bs_graph_parse(const char *text, BsGraph **out);

/**
 * Releases a handle. NULL is ignored.
 *
 * # Safety
 * `g` must be NULL or a handle from [`bs_graph_parse`] not yet freed.
 */
void bs_graph_free(BsGraph *g);

/**
 * Releases a string returned by this library. NULL is ignored.
 *
 * # Safety
 * `s` must be NULL or a string from this library not yet freed.
 */
void bs_string_free(char *s);

/**
 * # Safety
 * `g` must be a live handle and `out` valid for a write.
 */
BsStatus bs_graph_vertex_count(const BsGraph *g, size_t *out);

/**
 * # Safety
 * `g` must be a live handle and `out` valid for a write.
 */
BsStatus bs_graph_is_arborescent(const BsGraph *g, bool *out);

/**
 * `det(S)` as a decimal string. Fails with `Input` unless the form is
 * negative definite.
 *
 * # Safety
 * `g` must be a live handle and `out` valid for a write.
 */
BsStatus bs_graph_det_s(const BsGraph *g, char **out);

/**
 * `E_u*·E_v*` as `"p/q"`.
 *
 * # Safety
 * `g` must be a live handle, `u` and `v` NUL-terminated strings and `out`
 * valid for a write.
 */
BsStatus bs_graph_dual_pairing(const BsGraph *g, const char *u, const char *v, char **out);

/**
 * Intersection number `A·B` of two distinct branches as `"p/q"`.
 *
 * # Safety
 * As [`bs_graph_dual_pairing`].
 */
BsStatus bs_graph_mumford(const BsGraph *g, const char *a, const char *b, char **out);

/**
 * `U_L` over all branches other than `base`, as JSON
 * `{"labels": [...], "dist": [["p/q", ...], ...], "classification": ...}`.
 *
 * # Safety
 * `g` must be a live handle, `base` a NUL-terminated string and `out`
 * valid for a write.
 */
BsStatus bs_graph_ultrametric_json(const BsGraph *g, const char *base, char **out);

/**
 * Determinant products of a tree as JSON `{"labels", "detS", "p"}`,
 * checked against the adjugate.
 *
 * # Safety
 * `g` must be a live handle and `out` valid for a write.
 */
BsStatus bs_graph_detprod_json(const BsGraph *g, char **out);

/**
 * Graphviz rendering of the end-rooted tree of `U_L` over all branches
 * other than `base`. Fails with `Hypothesis` when `U_L` is not an
 * ultrametric.
 *
 * # Safety
 * As [`bs_graph_ultrametric_json`].
 */
BsStatus bs_graph_tree_dot(const BsGraph *g, const char *base, char **out);

#endif  /* BRANCHSPACE_H */
