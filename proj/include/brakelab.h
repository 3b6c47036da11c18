#ifndef BRAKELAB_H
#define BRAKELAB_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define BRK_API __declspec(dllexport)
#else
#define BRK_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum brk_status {
    BRK_OK = 0,
    BRK_E_INVALID_ARGUMENT = 1,
    BRK_E_DOMAIN = 2,
    BRK_E_SINGULARITY = 3,
    BRK_E_TRIPLE_COLLISION = 4,
    BRK_E_NO_SYZYGY = 5,
    BRK_E_STEP_UNDERFLOW = 6,
    BRK_E_NOT_CONVERGED = 7,
    BRK_E_NO_BRACKET = 8,
    BRK_E_INTERNAL = 9,
    BRK_E_NULL_POINTER = 10
} brk_status;

BRK_API const char* brk_version(void);
BRK_API const char* brk_status_name(brk_status s);
/* message of the last failed call on this thread; empty after a successful call */
BRK_API const char* brk_last_error(void);

typedef struct brk_masses brk_masses;

typedef struct brk_mass_params {
    double m1, m2, m3, m;
    double mu1, mu2, nu1, nu2;
    double a1, a2, a3;
} brk_mass_params;

BRK_API brk_status brk_masses_create(double m1, double m2, double m3, brk_masses** out);
BRK_API void brk_masses_free(brk_masses* m);
BRK_API brk_status brk_masses_get(const brk_masses* m, brk_mass_params* out);

typedef struct brk_potential {
    double V, Vx, Vy;
    double kappa;
    double phi; /* x Vx + y Vy = phi (1 - x^2 - y^2) */
    double rho12, rho13, rho23;
    int at_collision;
} brk_potential;

BRK_API brk_status brk_potential_eval(const brk_masses* m, double x, double y, brk_potential* out);

/* Result handle: named numeric tables plus a JSON summary. */
typedef struct brk_result brk_result;

BRK_API size_t brk_result_table_count(const brk_result* r);
BRK_API const char* brk_result_table_name(const brk_result* r, size_t table);
BRK_API size_t brk_result_rows(const brk_result* r, size_t table);
BRK_API size_t brk_result_cols(const brk_result* r, size_t table);
BRK_API const char* brk_result_column(const brk_result* r, size_t table, size_t col);
/* row-major values, brk_result_cols entries per row; NULL when out of range */
BRK_API const double* brk_result_row(const brk_result* r, size_t table, size_t row);
BRK_API const char* brk_result_summary(const brk_result* r);
BRK_API void brk_result_free(brk_result* r);

/* table "grid": x, y, inside, V, Vx, Vy, kappa, phi over an n x n grid of [-1, 1]^2 */
BRK_API brk_status brk_potential_grid(const brk_masses* m, int n, brk_result** out);

/* brake orbit from the Hill boundary over (x, y), sampled uniformly in physical time */
BRK_API brk_status brk_integrate_brake(const brk_masses* m, double h, double x, double y, double t_end, int samples,
                                       double rtol, int newtonian_check, brk_result** out);

typedef struct brk_syzygy {
    double angle, r, s0, t0;
    int type;
    int collision;
    int near_triple;
    int z_monotone;
    double max_idot;
} brk_syzygy;

BRK_API brk_status brk_first_syzygy(const brk_masses* m, double h, double x, double y, double rtol, brk_syzygy* out);

/* flag bits in syzygy tables */
#define BRK_FLAG_COLLISION 1
#define BRK_FLAG_NEAR_TRIPLE 2
#define BRK_FLAG_NONMONOTONE 4
#define BRK_FLAG_IDOT 8
#define BRK_FLAG_FAILED 16

/* random starts in the disk, excluding balls of radius `exclude` at the origin and the collisions */
BRK_API brk_status brk_syzygy_map(const brk_masses* m, double h, size_t samples, uint64_t seed, double exclude,
                                  double rtol, int threads, brk_result** out);
BRK_API brk_status brk_image_scan(const brk_masses* m, double h, int n_lat, int n_lon, double rtol, int threads,
                                  brk_result** out);
BRK_API brk_status brk_winding(const brk_masses* m, double h, double radius, int samples, int threads,
                               brk_result** out);

BRK_API brk_status brk_restpoints(const brk_masses* m, double h, brk_result** out);
BRK_API brk_status brk_spiraling_scan(int n, int threads, brk_result** out);

/* isosceles problem with m1 = m2 = 1 */
BRK_API brk_status brk_iso_branches(double m3, double rtol, int samples, brk_result** out);
BRK_API brk_status brk_iso_admissible(const double* m3, size_t n, double rtol, int threads, brk_result** out);
BRK_API brk_status brk_iso_threshold(double lo, double hi, double tol, double rtol, brk_result** out);
BRK_API brk_status brk_iso_periodic(double m3, int grid, double rtol, int threads, brk_result** out);

typedef struct brk_jm_params {
    int fixed_end;        /* 0: end on the Hill boundary, 1: end at `end` */
    double start[3];      /* r, x, y; r = 0 is the triple-collision start */
    double end[3];
    int has_end_guess;
    double end_guess[2];
    int N;
    int multistart;
    uint64_t seed;
    double grad_tol;
    double perturbation;
    double collision_offset;
    int offset_study;
    int threads;
} brk_jm_params;

BRK_API void brk_jm_params_default(brk_jm_params* p);
BRK_API brk_status brk_jm_minimize(const brk_masses* m, double h, const brk_jm_params* p, brk_result** out);
/* nodes are n triples (r, x, y) */
BRK_API brk_status brk_jm_action(const brk_masses* m, double h, const double* nodes, size_t n, double* out);
BRK_API brk_status brk_seifert_probe(const brk_masses* m, double h, double x, double y, double t, brk_result** out);

typedef void (*brk_criterion_cb)(int id, const char* name, int pass, double seconds, const char* line, void* user);

BRK_API size_t brk_criterion_count(void);
BRK_API int brk_criterion_id(size_t index);
/* runs the listed criteria (all when ids is NULL); n_failed receives the number of failures */
BRK_API brk_status brk_verify(const int* ids, size_t n, uint64_t seed, int threads, brk_criterion_cb cb, void* user,
                              int* n_failed);

#ifdef __cplusplus
}
#endif

#endif
