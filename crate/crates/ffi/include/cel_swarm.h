#ifndef CEL_SWARM_H
#define CEL_SWARM_H

/* Generated by cbindgen from crates/ffi. Do not edit. */

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

// Result code of every fallible call.
typedef enum CelStatus {
  CEL_STATUS_OK = 0,
  CEL_STATUS_NULL_POINTER = 1,
  // An argument is outside the domain of the model.
  CEL_STATUS_INVALID_ARGUMENT = 2,
  CEL_STATUS_CONFIG = 3,
  // Fewer than two lines.
  CEL_STATUS_INSUFFICIENT_DATA = 4,
  // Near-parallel line bundle.
  CEL_STATUS_DEGENERATE_GEOMETRY = 5,
  // Output buffer too small.
  CEL_STATUS_BUFFER_TOO_SMALL = 6,
  CEL_STATUS_INTERNAL = 7,
} CelStatus;

// Values accepted wherever a `shape` argument is taken.
typedef enum CelShape {
  CEL_SHAPE_TRIANGLE = 0,
  CEL_SHAPE_SQUARE = 1,
  CEL_SHAPE_HEXAGON = 2,
} CelShape;

// Values accepted wherever a `sensing` argument is taken.
typedef enum CelSensing {
  CEL_SENSING_OMNI = 0,
  CEL_SENSING_DIRECTIONAL = 1,
} CelSensing;

// Opaque, growable set of triangulation lines.
typedef struct CelLineSet CelLineSet;

// Opaque patrol route.
typedef struct CelRoute CelRoute;

typedef struct CelPoint {
  double x;
  double y;
} CelPoint;

// Settings for `cel_simulate_and_localize`; start from
// `cel_trial_config_default()`.
typedef struct CelTrialConfig {
  double directional_gain_dbi;
  double noise_std_db;
  uint64_t seed;
  double map_width;
  double map_height;
  double detection_threshold_dbm;
  // Required rise of a maximum above both trace endpoints, in units of
  // `noise_std_db`.
  double prominence_sigma;
  double sample_spacing;
  double angular_step;
} CelTrialConfig;

// An isotropic emitter.
typedef struct CelSource {
  double x;
  double y;
  double power_dbm;
  double frequency_hz;
} CelSource;

typedef struct CelLocalization {
  // True when two or more lines intersect inside the map.
  bool success;
  size_t line_count;
  // Estimated position; zero when `success` is false.
  struct CelPoint estimate;
  double residual;
} CelLocalization;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library version as a static NUL-terminated string.
const char *cel_version(void);

// Message for the last failure on this thread, or NULL. The pointer stays
// valid until the next failing call on the same thread.
const char *cel_last_error_message(void);

// Received power (dBm) by the log-form Friis equation.
enum CelStatus cel_friis_received_power(double power_tx_dbm,
                                        double gain_tx_dbi,
                                        double gain_rx_dbi,
                                        double frequency_hz,
                                        double distance_m,
                                        double *out_dbm);

// Antenna gain (dBi) `theta` radians off boresight for linear gain factor `g >= 1`.
enum CelStatus cel_directional_gain(double g, double theta, double *out_dbi);

// Distance (m) at which the boresight link budget reaches `threshold_dbm`.
enum CelStatus cel_sensing_range(double power_tx_dbm,
                                 double gain_rx_dbi,
                                 double frequency_hz,
                                 double threshold_dbm,
                                 double *out_m);

// Smallest sensing range giving full explicit coverage of a shape with `edge_length`.
enum CelStatus cel_min_sensing_range(uint32_t shape,
                                     uint32_t sensing,
                                     double edge_length,
                                     double *out_m);

// Largest edge length fully covered by `sensing_range`.
enum CelStatus cel_max_edge_length(uint32_t shape,
                                   uint32_t sensing,
                                   double sensing_range,
                                   double *out_m);

// Directional antenna mounting offset (rad) for `shape`.
enum CelStatus cel_antenna_offset(uint32_t shape, double *out_rad);

// Builds a regular-polygon route traversed clockwise, first vertex at
// angle `rotation` from the centroid.
enum CelStatus cel_route_new(uint32_t shape,
                             uint32_t sensing,
                             struct CelPoint centroid,
                             double rotation,
                             double edge_length,
                             struct CelRoute **out);

// Parses a route from its JSON form
// `{"kind", "centroid": [x, y], "rotation", "edge_length", "sensing", "psi"}`.
enum CelStatus cel_route_from_json(const char *json, struct CelRoute **out);

void cel_route_free(struct CelRoute *route);

// Number of waypoints (equal to the number of edges).
enum CelStatus cel_route_waypoint_count(const struct CelRoute *route, size_t *out);

// Copies waypoints into `buffer` (capacity `capacity` points) and stores
// the count in `written`.
enum CelStatus cel_route_waypoints(const struct CelRoute *route,
                                   struct CelPoint *buffer,
                                   size_t capacity,
                                   size_t *written);

// Whether `query` is explicitly covered (seen by two or more detection
// lines of the route) at `sensing_range`.
enum CelStatus cel_route_explicit_coverage(const struct CelRoute *route,
                                           double sensing_range,
                                           struct CelPoint query,
                                           bool *out);

// Number of detection lines of the route that observe `query`.
enum CelStatus cel_route_line_count(const struct CelRoute *route,
                                    double sensing_range,
                                    struct CelPoint query,
                                    size_t *out);

// New empty line set. Never NULL.
struct CelLineSet *cel_lineset_new(void);

void cel_lineset_free(struct CelLineSet *set);

// Appends the line through `anchor` at angle `phi` (rad).
enum CelStatus cel_lineset_push(struct CelLineSet *set, struct CelPoint anchor, double phi);

enum CelStatus cel_lineset_len(const struct CelLineSet *set, size_t *out);

// Reads line `index` as its anchor and angle folded into `[0, pi)`.
enum CelStatus cel_lineset_get(const struct CelLineSet *set,
                               size_t index,
                               struct CelPoint *anchor,
                               double *phi);

// Least-squares intersection of all lines in the set.
enum CelStatus cel_lineset_intersect(const struct CelLineSet *set,
                                     struct CelPoint *out,
                                     double *residual);

// Default trial settings (8 dBi, 0.5 dB noise, 40 m map, -30 dBm, 0.1 m, 1 degree).
struct CelTrialConfig cel_trial_config_default(void);

// Patrols `route_count` routes once past `source`, then localizes it.
// When `lines_out` is not NULL the triangulation lines are appended to it.
enum CelStatus cel_simulate_and_localize(const struct CelRoute *const *routes,
                                         size_t route_count,
                                         const struct CelSource *source,
                                         const struct CelTrialConfig *config,
                                         struct CelLocalization *out,
                                         struct CelLineSet *lines_out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CEL_SWARM_H */
