#ifndef SECTKIT_H
#define SECTKIT_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum SectkitMethod {
  SECTKIT_METHOD_CHI2 = 0,
  SECTKIT_METHOD_PERMUTATION = 1,
  SECTKIT_METHOD_NHST = 2,
} SectkitMethod;

// Result code of every fallible call.
typedef enum SectkitStatus {
  SECTKIT_STATUS_OK = 0,
  SECTKIT_STATUS_NULL_POINTER = 1,
  SECTKIT_STATUS_INVALID_ARGUMENT = 2,
  SECTKIT_STATUS_PARSE = 3,
  SECTKIT_STATUS_VALIDATION = 4,
  SECTKIT_STATUS_CONTAINMENT = 5,
  SECTKIT_STATUS_RESOURCE = 6,
  SECTKIT_STATUS_GRID_MISMATCH = 7,
  SECTKIT_STATUS_NUMERICAL_RANK = 8,
  SECTKIT_STATUS_IO = 9,
  SECTKIT_STATUS_PANIC = 10,
} SectkitStatus;

// The SECT and ECT of one shape on a shared grid.
typedef struct SectkitFields SectkitFields;

// A growing collection of field pairs.
typedef struct SectkitGroup SectkitGroup;

// A shape to be filtered.
typedef struct SectkitShape SectkitShape;

// Outcome of a two-sample test. Optional integers are -1 when absent.
typedef struct SectkitReport {
  double statistic;
  double threshold;
  double p_value;
  // 1 for Reject, 0 for Accept.
  int32_t reject;
  int64_t l_hat;
  // 0-based.
  int64_t direction_index;
  int64_t k_star;
  double r_f;
  double r_inf;
} SectkitReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failing call on this thread, or null. The pointer
// stays valid until the next failing call on the same thread.
const char *sectkit_last_error(void);

// One of the deterministic two-arc shapes: `which` is 1 for K1, 2 for K2.
//
// # Safety
// `out` must be a valid pointer to writable storage for a handle.
enum SectkitStatus sectkit_shape_builtin(uint32_t which,
                                         size_t curve_points,
                                         struct SectkitShape **out);

// A random member of the perturbed two-arc family, drawn from `seed`.
//
// # Safety
// `out` must be a valid pointer to writable storage for a handle.
enum SectkitStatus sectkit_shape_family(double epsilon,
                                        uint64_t seed,
                                        size_t curve_points,
                                        struct SectkitShape **out);

// A triangle mesh read from an OFF file.
//
// # Safety
// `path` must be a NUL-terminated string and `out` a valid pointer.
enum SectkitStatus sectkit_shape_from_off(const char *path, struct SectkitShape **out);

// # Safety
// `shape` must be null or a handle not yet freed.
void sectkit_shape_free(struct SectkitShape *shape);

// SECT and ECT of a planar shape on `gamma` directions and `delta` levels.
// Directions are `(p − 1)π/Γ` when `half_circle` is nonzero and
// `(p − 1)2π/Γ` otherwise.
//
// # Safety
// `shape` must be a live handle and `out` a valid pointer.
enum SectkitStatus sectkit_compute_fields(const struct SectkitShape *shape,
                                          size_t gamma,
                                          int32_t half_circle,
                                          size_t delta,
                                          struct SectkitFields **out);

// # Safety
// `fields` must be a live handle; `gamma` and `delta` valid pointers.
enum SectkitStatus sectkit_fields_dims(const struct SectkitFields *fields,
                                       size_t *gamma,
                                       size_t *delta);

// Copies the Γ×Δ SECT values, row by direction, into `buf`.
//
// # Safety
// `buf` must point to at least `len` writable doubles.
enum SectkitStatus sectkit_fields_sect(const struct SectkitFields *fields, double *buf, size_t len);

// Copies the Γ×Δ ECT values, row by direction, into `buf`.
//
// # Safety
// `buf` must point to at least `len` writable integers.
enum SectkitStatus sectkit_fields_ect(const struct SectkitFields *fields, int64_t *buf, size_t len);

// Discrete ρ distance between the ECTs of two field pairs.
//
// # Safety
// `a` and `b` must be live handles and `out` a valid pointer.
enum SectkitStatus sectkit_fields_distance(const struct SectkitFields *a,
                                           const struct SectkitFields *b,
                                           double *out);

// # Safety
// `fields` must be null or a handle not yet freed.
void sectkit_fields_free(struct SectkitFields *fields);

// # Safety
// `out` must be a valid pointer.
enum SectkitStatus sectkit_group_new(struct SectkitGroup **out);

// Appends a copy of `fields`; the caller keeps ownership of `fields`.
//
// # Safety
// Both handles must be live.
enum SectkitStatus sectkit_group_push(struct SectkitGroup *group,
                                      const struct SectkitFields *fields);

// # Safety
// `group` must be a live handle and `len` a valid pointer.
enum SectkitStatus sectkit_group_len(const struct SectkitGroup *group, size_t *len);

// # Safety
// `group` must be null or a handle not yet freed.
void sectkit_group_free(struct SectkitGroup *group);

// Two-sample test between two groups. `permutations` and `seed` are
// ignored by the χ² method.
//
// # Safety
// Both groups must be live handles and `out` a valid pointer.
enum SectkitStatus sectkit_test(const struct SectkitGroup *group1,
                                const struct SectkitGroup *group2,
                                enum SectkitMethod method,
                                double alpha,
                                size_t permutations,
                                uint64_t seed,
                                struct SectkitReport *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SECTKIT_H */
