#ifndef BLAB_H
#define BLAB_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum BlabStatus {
  BLAB_STATUS_OK = 0,
  BLAB_STATUS_NULL_POINTER = 1,
  BLAB_STATUS_INVALID_ARGUMENT = 2,
  BLAB_STATUS_SAMPLING_FAILED = 3,
  BLAB_STATUS_NO_CONVERGENCE = 4,
  BLAB_STATUS_NUMERICAL = 5,
  BLAB_STATUS_PANIC = 6,
} BlabStatus;

typedef enum BlabModelKind {
  BLAB_MODEL_KIND_LINEAR = 0,
  BLAB_MODEL_KIND_TRUNCATED_POWER = 1,
  BLAB_MODEL_KIND_EXP_TANGENTIAL = 2,
} BlabModelKind;

typedef struct BlabBoundarySet BlabBoundarySet;

typedef struct BlabCriticalSet BlabCriticalSet;

typedef struct BlabProduct BlabProduct;

typedef struct BlabComplex {
  double re;
  double im;
} BlabComplex;

/**
 * Model function; `param` is `gamma` or `rho` and ignored for `Linear`.
 */
typedef struct BlabModel {
  enum BlabModelKind kind;
  double param;
} BlabModel;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. The pointer stays
 * valid until the next failing call on the same thread.
 */
const char *blab_last_error_message(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *blab_version(void);

/**
 * Product with the `n` zeros at `zeros`.
 */
enum BlabStatus blab_product_new(const struct BlabComplex *zeros,
                                 size_t n,
                                 struct BlabProduct **out);

/**
 * Product from the zero-set text format (`re im` or `r@theta` per line).
 */
enum BlabStatus blab_product_parse(const char *text, struct BlabProduct **out);

void blab_product_free(struct BlabProduct *product);

/**
 * Number of zeros; 0 for a null handle.
 */
size_t blab_product_degree(const struct BlabProduct *product);

/**
 * `sum (1 - |z_n|)`.
 */
enum BlabStatus blab_product_alpha(const struct BlabProduct *product, double *out);

enum BlabStatus blab_product_eval(const struct BlabProduct *product,
                                  struct BlabComplex z,
                                  struct BlabComplex *out);

enum BlabStatus blab_product_derivative(const struct BlabProduct *product,
                                        struct BlabComplex z,
                                        struct BlabComplex *out);

/**
 * Finite set of `n` points `e^{i angle}`.
 */
enum BlabStatus blab_boundary_points(const double *angles, size_t n, struct BlabBoundarySet **out);

/**
 * Closed arc from `start` to `end` (radians, `end >= start`).
 */
enum BlabStatus blab_boundary_arc(double start, double end, struct BlabBoundarySet **out);

/**
 * Boundary set from its JSON description.
 */
enum BlabStatus blab_boundary_from_json(const char *json, struct BlabBoundarySet **out);

void blab_boundary_free(struct BlabBoundarySet *set);

/**
 * Euclidean distance from `z` to the set.
 */
enum BlabStatus blab_boundary_distance(const struct BlabBoundarySet *set,
                                       struct BlabComplex z,
                                       double *out);

/**
 * Type of the set on the default grid `x = 2^-4 .. 2^-14`.
 */
enum BlabStatus blab_boundary_type(const struct BlabBoundarySet *set, double *out);

/**
 * `|B'(z)|` and its bound `2(2C + K)^2 sum(1 - |z_n|) / phi(d(z, E)/6)^2`;
 * `rhs` is infinite where `phi(d/6)` vanishes.
 */
enum BlabStatus blab_theorem_bound(const struct BlabProduct *product,
                                   struct BlabModel model,
                                   const struct BlabBoundarySet *set,
                                   double k,
                                   struct BlabComplex z,
                                   double *lhs,
                                   double *rhs);

/**
 * Seeded lemma suite at the vertex `e^{i vertex_angle}`.
 */
enum BlabStatus blab_lemma_check(struct BlabModel model,
                                 double vertex_angle,
                                 double k,
                                 uint64_t samples,
                                 uint64_t seed,
                                 uint64_t *violations,
                                 double *worst_ratio);

/**
 * Critical points of the product (degree - 1 of them, with multiplicity).
 */
enum BlabStatus blab_critical_points(const struct BlabProduct *product,
                                     struct BlabCriticalSet **out);

size_t blab_critical_set_len(const struct BlabCriticalSet *set);

/**
 * Point `index` and its residual `|B'|`.
 */
enum BlabStatus blab_critical_set_get(const struct BlabCriticalSet *set,
                                      size_t index,
                                      struct BlabComplex *point,
                                      double *residual);

void blab_critical_set_free(struct BlabCriticalSet *set);

/**
 * `((1/2pi) int |B'(r e^{i theta})|^p d theta)^(1/p)`, starting from `nodes` nodes.
 */
enum BlabStatus blab_hardy_mean(const struct BlabProduct *product,
                                double p,
                                double r,
                                size_t nodes,
                                double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* BLAB_H */
