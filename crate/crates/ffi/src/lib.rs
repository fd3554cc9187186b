#![allow(clippy::missing_safety_doc, clippy::neg_cmp_op_on_partial_ord)]
//! C ABI over `cel_swarm`.
//!
//! Every fallible function returns a `CelStatus` and writes its result
//! through an out-pointer. On failure a description is available from
//! `cel_last_error_message()` on the same thread. Routes and line sets are
//! opaque handles released with their `*_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use cel_swarm::geom::Point2;
use cel_swarm::localization::{least_squares_intersection, localize, LocalizerConfig, TriangulationLine};
use cel_swarm::patrol::{
    antenna_offset_psi, build_route, detection_line_count, explicit_coverage_predicate, max_edge_length,
    min_sensing_range, MapBounds, PatrolRoute, PatrolShape, RouteSpec, ShapeKind,
};
use cel_swarm::rf_model::{self, EmitterSource, NoiseModel, SensingKind};
use cel_swarm::sim::{antenna_for_route, run_trial, SamplingConfig};
use cel_swarm::CelError;

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CelStatus {
    Ok = 0,
    NullPointer = 1,
    /// An argument is outside the domain of the model.
    InvalidArgument = 2,
    Config = 3,
    /// Fewer than two lines.
    InsufficientData = 4,
    /// Near-parallel line bundle.
    DegenerateGeometry = 5,
    /// Output buffer too small.
    BufferTooSmall = 6,
    Internal = 7,
}

/// Values accepted wherever a `shape` argument is taken.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CelShape {
    Triangle = 0,
    Square = 1,
    Hexagon = 2,
}

/// Values accepted wherever a `sensing` argument is taken.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CelSensing {
    Omni = 0,
    Directional = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CelPoint {
    pub x: f64,
    pub y: f64,
}

/// An isotropic emitter.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CelSource {
    pub x: f64,
    pub y: f64,
    pub power_dbm: f64,
    pub frequency_hz: f64,
}

/// Settings for `cel_simulate_and_localize`; start from
/// `cel_trial_config_default()`.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CelTrialConfig {
    pub directional_gain_dbi: f64,
    pub noise_std_db: f64,
    pub seed: u64,
    pub map_width: f64,
    pub map_height: f64,
    pub detection_threshold_dbm: f64,
    /// Required rise of a maximum above both trace endpoints, in units of
    /// `noise_std_db`.
    pub prominence_sigma: f64,
    pub sample_spacing: f64,
    pub angular_step: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CelLocalization {
    /// True when two or more lines intersect inside the map.
    pub success: bool,
    pub line_count: usize,
    /// Estimated position; zero when `success` is false.
    pub estimate: CelPoint,
    pub residual: f64,
}

/// Opaque patrol route.
pub struct CelRoute(PatrolRoute);

/// Opaque, growable set of triangulation lines.
pub struct CelLineSet(Vec<TriangulationLine>);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn fail(status: CelStatus, msg: impl Into<String>) -> CelStatus {
    set_last_error(msg.into());
    status
}

fn from_error(e: CelError) -> CelStatus {
    let status = match &e {
        CelError::Domain(_) => CelStatus::InvalidArgument,
        CelError::InsufficientData { .. } => CelStatus::InsufficientData,
        CelError::DegenerateGeometry { .. } => CelStatus::DegenerateGeometry,
        CelError::Config(_) | CelError::Json(_) | CelError::Toml(_) => CelStatus::Config,
        _ => CelStatus::Internal,
    };
    fail(status, e.to_string())
}

/// Runs `f`, mapping errors and panics to status codes.
fn guard(f: impl FnOnce() -> Result<(), CelStatus>) -> CelStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => CelStatus::Ok,
        Ok(Err(s)) => s,
        Err(_) => fail(CelStatus::Internal, "panic inside cel_swarm"),
    }
}

unsafe fn write<T>(out: *mut T, value: T) -> Result<(), CelStatus> {
    if out.is_null() {
        return Err(fail(CelStatus::NullPointer, "output pointer is null"));
    }
    out.write(value);
    Ok(())
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, CelStatus> {
    p.as_ref().ok_or_else(|| fail(CelStatus::NullPointer, format!("{what} is null")))
}

fn shape_kind(shape: u32) -> Result<ShapeKind, CelStatus> {
    match shape {
        0 => Ok(ShapeKind::Triangle),
        1 => Ok(ShapeKind::Square),
        2 => Ok(ShapeKind::Hexagon),
        _ => Err(fail(CelStatus::InvalidArgument, format!("unknown shape {shape}"))),
    }
}

fn sensing_kind(sensing: u32) -> Result<SensingKind, CelStatus> {
    match sensing {
        0 => Ok(SensingKind::Omnidirectional),
        1 => Ok(SensingKind::Directional),
        _ => Err(fail(CelStatus::InvalidArgument, format!("unknown sensing kind {sensing}"))),
    }
}

fn point(p: CelPoint) -> Point2 {
    Point2::new(p.x, p.y)
}

fn cel_point(p: Point2) -> CelPoint {
    CelPoint { x: p.x, y: p.y }
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn cel_version() -> *const c_char {
    static VERSION: &str = concat!(env!("CARGO_PKG_VERSION"), "\0");
    VERSION.as_ptr().cast()
}

/// Message for the last failure on this thread, or NULL. The pointer stays
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn cel_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(std::ptr::null(), |s| s.as_ptr()))
}

/// Received power (dBm) by the log-form Friis equation.
#[no_mangle]
pub unsafe extern "C" fn cel_friis_received_power(
    power_tx_dbm: f64,
    gain_tx_dbi: f64,
    gain_rx_dbi: f64,
    frequency_hz: f64,
    distance_m: f64,
    out_dbm: *mut f64,
) -> CelStatus {
    guard(|| {
        if !(frequency_hz > 0.0) {
            return Err(fail(CelStatus::InvalidArgument, format!("frequency must be positive, got {frequency_hz}")));
        }
        let lambda = rf_model::wavelength(frequency_hz);
        let p = rf_model::friis_received_power(power_tx_dbm, gain_tx_dbi, gain_rx_dbi, lambda, distance_m)
            .map_err(from_error)?;
        write(out_dbm, p)
    })
}

/// Antenna gain (dBi) `theta` radians off boresight for linear gain factor `g >= 1`.
#[no_mangle]
pub unsafe extern "C" fn cel_directional_gain(g: f64, theta: f64, out_dbi: *mut f64) -> CelStatus {
    guard(|| write(out_dbi, rf_model::directional_gain(g, theta).map_err(from_error)?))
}

/// Distance (m) at which the boresight link budget reaches `threshold_dbm`.
#[no_mangle]
pub unsafe extern "C" fn cel_sensing_range(
    power_tx_dbm: f64,
    gain_rx_dbi: f64,
    frequency_hz: f64,
    threshold_dbm: f64,
    out_m: *mut f64,
) -> CelStatus {
    guard(|| {
        let r = rf_model::sensing_range(power_tx_dbm, gain_rx_dbi, frequency_hz, threshold_dbm).map_err(from_error)?;
        write(out_m, r)
    })
}

/// Smallest sensing range giving full explicit coverage of a shape with `edge_length`.
#[no_mangle]
pub unsafe extern "C" fn cel_min_sensing_range(shape: u32, sensing: u32, edge_length: f64, out_m: *mut f64) -> CelStatus {
    guard(|| write(out_m, min_sensing_range(shape_kind(shape)?, sensing_kind(sensing)?, edge_length)))
}

/// Largest edge length fully covered by `sensing_range`.
#[no_mangle]
pub unsafe extern "C" fn cel_max_edge_length(shape: u32, sensing: u32, sensing_range: f64, out_m: *mut f64) -> CelStatus {
    guard(|| write(out_m, max_edge_length(shape_kind(shape)?, sensing_kind(sensing)?, sensing_range)))
}

/// Directional antenna mounting offset (rad) for `shape`.
#[no_mangle]
pub unsafe extern "C" fn cel_antenna_offset(shape: u32, out_rad: *mut f64) -> CelStatus {
    guard(|| write(out_rad, antenna_offset_psi(shape_kind(shape)?)))
}

/// Builds a regular-polygon route traversed clockwise, first vertex at
/// angle `rotation` from the centroid.
#[no_mangle]
pub unsafe extern "C" fn cel_route_new(
    shape: u32,
    sensing: u32,
    centroid: CelPoint,
    rotation: f64,
    edge_length: f64,
    out: *mut *mut CelRoute,
) -> CelStatus {
    guard(|| {
        let shape = PatrolShape::new(shape_kind(shape)?, point(centroid), rotation, edge_length).map_err(from_error)?;
        let route = Box::new(CelRoute(build_route(shape, sensing_kind(sensing)?)));
        write(out, Box::into_raw(route))
    })
}

/// Parses a route from its JSON form
/// `{"kind", "centroid": [x, y], "rotation", "edge_length", "sensing", "psi"}`.
#[no_mangle]
pub unsafe extern "C" fn cel_route_from_json(json: *const c_char, out: *mut *mut CelRoute) -> CelStatus {
    guard(|| {
        if json.is_null() {
            return Err(fail(CelStatus::NullPointer, "json is null"));
        }
        let text = CStr::from_ptr(json)
            .to_str()
            .map_err(|e| fail(CelStatus::InvalidArgument, format!("json is not UTF-8: {e}")))?;
        let spec: RouteSpec = serde_json::from_str(text).map_err(|e| from_error(e.into()))?;
        let route = spec.to_route().map_err(from_error)?;
        write(out, Box::into_raw(Box::new(CelRoute(route))))
    })
}

#[no_mangle]
pub unsafe extern "C" fn cel_route_free(route: *mut CelRoute) {
    if !route.is_null() {
        drop(Box::from_raw(route));
    }
}

/// Number of waypoints (equal to the number of edges).
#[no_mangle]
pub unsafe extern "C" fn cel_route_waypoint_count(route: *const CelRoute, out: *mut usize) -> CelStatus {
    guard(|| write(out, deref(route, "route")?.0.waypoints().len()))
}

/// Copies waypoints into `buffer` (capacity `capacity` points) and stores
/// the count in `written`.
#[no_mangle]
pub unsafe extern "C" fn cel_route_waypoints(
    route: *const CelRoute,
    buffer: *mut CelPoint,
    capacity: usize,
    written: *mut usize,
) -> CelStatus {
    guard(|| {
        let wps = deref(route, "route")?.0.waypoints();
        if capacity < wps.len() {
            return Err(fail(
                CelStatus::BufferTooSmall,
                format!("need {} points, buffer holds {capacity}", wps.len()),
            ));
        }
        if buffer.is_null() {
            return Err(fail(CelStatus::NullPointer, "buffer is null"));
        }
        for (i, p) in wps.iter().enumerate() {
            buffer.add(i).write(cel_point(*p));
        }
        write(written, wps.len())
    })
}

/// Whether `query` is explicitly covered (seen by two or more detection
/// lines of the route) at `sensing_range`.
#[no_mangle]
pub unsafe extern "C" fn cel_route_explicit_coverage(
    route: *const CelRoute,
    sensing_range: f64,
    query: CelPoint,
    out: *mut bool,
) -> CelStatus {
    guard(|| write(out, explicit_coverage_predicate(&deref(route, "route")?.0, sensing_range, point(query))))
}

/// Number of detection lines of the route that observe `query`.
#[no_mangle]
pub unsafe extern "C" fn cel_route_line_count(
    route: *const CelRoute,
    sensing_range: f64,
    query: CelPoint,
    out: *mut usize,
) -> CelStatus {
    guard(|| write(out, detection_line_count(&deref(route, "route")?.0, sensing_range, point(query))))
}

/// New empty line set. Never NULL.
#[no_mangle]
pub extern "C" fn cel_lineset_new() -> *mut CelLineSet {
    Box::into_raw(Box::new(CelLineSet(Vec::new())))
}

#[no_mangle]
pub unsafe extern "C" fn cel_lineset_free(set: *mut CelLineSet) {
    if !set.is_null() {
        drop(Box::from_raw(set));
    }
}

/// Appends the line through `anchor` at angle `phi` (rad).
#[no_mangle]
pub unsafe extern "C" fn cel_lineset_push(set: *mut CelLineSet, anchor: CelPoint, phi: f64) -> CelStatus {
    guard(|| {
        let set = set.as_mut().ok_or_else(|| fail(CelStatus::NullPointer, "line set is null"))?;
        if !(anchor.x.is_finite() && anchor.y.is_finite() && phi.is_finite()) {
            return Err(fail(CelStatus::InvalidArgument, "line parameters must be finite"));
        }
        set.0.push(TriangulationLine::new(point(anchor), phi));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn cel_lineset_len(set: *const CelLineSet, out: *mut usize) -> CelStatus {
    guard(|| write(out, deref(set, "line set")?.0.len()))
}

/// Reads line `index` as its anchor and angle folded into `[0, pi)`.
#[no_mangle]
pub unsafe extern "C" fn cel_lineset_get(
    set: *const CelLineSet,
    index: usize,
    anchor: *mut CelPoint,
    phi: *mut f64,
) -> CelStatus {
    guard(|| {
        let line = deref(set, "line set")?
            .0
            .get(index)
            .copied()
            .ok_or_else(|| fail(CelStatus::InvalidArgument, format!("line index {index} out of range")))?;
        write(anchor, cel_point(line.anchor))?;
        write(phi, line.phi)
    })
}

/// Least-squares intersection of all lines in the set.
#[no_mangle]
pub unsafe extern "C" fn cel_lineset_intersect(set: *const CelLineSet, out: *mut CelPoint, residual: *mut f64) -> CelStatus {
    guard(|| {
        let ix = least_squares_intersection(&deref(set, "line set")?.0).map_err(from_error)?;
        write(out, cel_point(ix.point))?;
        if !residual.is_null() {
            residual.write(ix.residual);
        }
        Ok(())
    })
}

/// Default trial settings (8 dBi, 0.5 dB noise, 40 m map, -30 dBm, 0.1 m, 1 degree).
#[no_mangle]
pub extern "C" fn cel_trial_config_default() -> CelTrialConfig {
    let loc = LocalizerConfig::default();
    let sampling = SamplingConfig::default();
    let map = MapBounds::default();
    CelTrialConfig {
        directional_gain_dbi: 8.0,
        noise_std_db: 0.5,
        seed: 0,
        map_width: map.width,
        map_height: map.height,
        detection_threshold_dbm: loc.detection_threshold,
        prominence_sigma: 1.0,
        sample_spacing: sampling.sample_spacing,
        angular_step: sampling.angular_step,
    }
}

/// Patrols `route_count` routes once past `source`, then localizes it.
/// When `lines_out` is not NULL the triangulation lines are appended to it.
#[no_mangle]
pub unsafe extern "C" fn cel_simulate_and_localize(
    routes: *const *const CelRoute,
    route_count: usize,
    source: *const CelSource,
    config: *const CelTrialConfig,
    out: *mut CelLocalization,
    lines_out: *mut CelLineSet,
) -> CelStatus {
    guard(|| {
        if routes.is_null() || route_count == 0 {
            return Err(fail(CelStatus::InvalidArgument, "at least one route is required"));
        }
        let src = deref(source, "source")?;
        let cfg = deref(config, "config")?;
        let routes: Vec<PatrolRoute> = (0..route_count)
            .map(|i| deref(*routes.add(i), "route").map(|r| r.0.clone()))
            .collect::<Result<_, _>>()?;
        let emitter = EmitterSource::new(Point2::new(src.x, src.y), src.power_dbm, src.frequency_hz).map_err(from_error)?;
        let antennas = routes
            .iter()
            .map(|r| antenna_for_route(r, cfg.directional_gain_dbi))
            .collect::<Result<Vec<_>, _>>()
            .map_err(from_error)?;
        if !(cfg.prominence_sigma >= 0.0) {
            return Err(fail(CelStatus::InvalidArgument, "prominence_sigma must be non-negative"));
        }
        let noise = NoiseModel::new(cfg.noise_std_db, cfg.seed).map_err(from_error)?;
        let sampling = SamplingConfig { sample_spacing: cfg.sample_spacing, angular_step: cfg.angular_step };
        let bounds = MapBounds::new(cfg.map_width, cfg.map_height).map_err(from_error)?;
        let localizer = LocalizerConfig {
            detection_threshold: cfg.detection_threshold_dbm,
            min_prominence: cfg.prominence_sigma * cfg.noise_std_db,
        };
        let traces = run_trial(&routes, &emitter, &antennas, &noise, &sampling).map_err(from_error)?;
        let result = localize(&traces, &bounds, &localizer);
        if let Some(set) = lines_out.as_mut() {
            set.0.extend_from_slice(&result.lines);
        }
        write(
            out,
            CelLocalization {
                success: result.success,
                line_count: result.line_count,
                estimate: result.predicted.map(cel_point).unwrap_or_default(),
                residual: result.residual,
            },
        )
    })
}
