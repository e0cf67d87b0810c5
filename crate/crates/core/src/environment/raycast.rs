//! Ray casting against a height field with a 2-D DDA over its cells.
//!
//! Inside each cell the column is an axis-aligned box, so the first hit is
//! either the side face at the point where the ray enters the cell below the
//! column top, or the top face where the ray descends through it. Both tests
//! are exact; there is no step size to tune.

use nalgebra::{Point3, Vector3};

use super::{EnvironmentError, HeightField, SurfaceKind, SurfacePoint};

const UNIT_TOL: f64 = 1e-9;
/// Tolerance for an origin sitting on (rather than under) a surface.
const SURFACE_TOL: f64 = 1e-9;

pub(crate) fn check_direction(direction: &Vector3<f64>) -> Result<(), EnvironmentError> {
    let n = direction.norm();
    if !n.is_finite() || (n - 1.0).abs() > UNIT_TOL {
        return Err(EnvironmentError::NotUnit(n));
    }
    Ok(())
}

fn top_kind(height: f64) -> SurfaceKind {
    if height == 0.0 {
        SurfaceKind::Ground
    } else {
        SurfaceKind::ElevatedTop
    }
}

/// Parametric interval `[t0, t1]` (with `t0 >= 0`) where the ray is over the
/// field's footprint, or `None` when it never is.
fn footprint_interval(
    field: &HeightField,
    origin: &Point3<f64>,
    dir: &Vector3<f64>,
) -> Option<(f64, f64)> {
    let lo = field.origin();
    let hi = field.extent();
    let mut t0 = 0.0_f64;
    let mut t1 = f64::INFINITY;
    for (o, d, min, max) in [(origin.x, dir.x, lo.x, hi.x), (origin.y, dir.y, lo.y, hi.y)] {
        if d == 0.0 {
            if o < min || o > max {
                return None;
            }
        } else {
            let a = (min - o) / d;
            let b = (max - o) / d;
            t0 = t0.max(a.min(b));
            t1 = t1.min(a.max(b));
        }
    }
    (t0 <= t1).then_some((t0, t1))
}

pub fn raycast(
    field: &HeightField,
    origin: Point3<f64>,
    direction: Vector3<f64>,
) -> Result<Option<SurfacePoint>, EnvironmentError> {
    check_direction(&direction)?;
    if !(origin.x.is_finite() && origin.y.is_finite() && origin.z.is_finite()) {
        return Err(EnvironmentError::Invalid(
            "ray origin must be finite".into(),
        ));
    }

    let xy = crate::geometry::GlobalCartesian::new(origin.x, origin.y);
    if let Some(h) = field.height_at(xy) {
        if origin.z < h - SURFACE_TOL {
            return Err(EnvironmentError::OriginBelowSurface {
                z: origin.z,
                surface: h,
            });
        }
    }

    let Some((t_enter, t_exit)) = footprint_interval(field, &origin, &direction) else {
        return Ok(None);
    };

    let cs = field.cell_size();
    let lo = field.origin();
    let (nx, ny) = field.dims();
    let at = |t: f64| origin + direction * t;

    // Vertical ray: a single column.
    if direction.x == 0.0 && direction.y == 0.0 {
        let (i, j) = field.cell_of(xy).expect("interval implies containment");
        let h = field.height(i, j);
        if direction.z < 0.0 {
            let t = (h - origin.z) / direction.z;
            let p = at(t.max(0.0));
            return Ok(Some(SurfacePoint::new(p.x, p.y, h, top_kind(h))));
        }
        return Ok(None);
    }

    // Starting cell, biased by the direction of travel when exactly on a line.
    let start = at(t_enter);
    let cell_index = |coord: f64, base: f64, d: f64, n: usize| -> (isize, i8) {
        let f = (coord - base) / cs;
        let mut idx = f.floor();
        if d < 0.0 && f == idx {
            idx -= 1.0;
        }
        let step = if d > 0.0 {
            1
        } else if d < 0.0 {
            -1
        } else {
            0
        };
        ((idx as isize).clamp(0, n as isize - 1), step)
    };
    let (mut i, step_x) = cell_index(start.x, lo.x, direction.x, nx);
    let (mut j, step_y) = cell_index(start.y, lo.y, direction.y, ny);

    let boundary_t = |idx: isize, step: i8, o: f64, d: f64, base: f64| -> f64 {
        match step {
            0 => f64::INFINITY,
            1 => (base + (idx + 1) as f64 * cs - o) / d,
            _ => (base + idx as f64 * cs - o) / d,
        }
    };
    let mut t_max_x = boundary_t(i, step_x, origin.x, direction.x, lo.x);
    let mut t_max_y = boundary_t(j, step_y, origin.y, direction.y, lo.y);
    let t_delta_x = if step_x == 0 {
        f64::INFINITY
    } else {
        cs / direction.x.abs()
    };
    let t_delta_y = if step_y == 0 {
        f64::INFINITY
    } else {
        cs / direction.y.abs()
    };

    // Which axis was crossed to enter the current cell: 0 = x, 1 = y, None = start.
    let mut entered_via: Option<u8> = if t_enter > 0.0 {
        let tx = if direction.x == 0.0 {
            f64::NEG_INFINITY
        } else {
            let a = (lo.x - origin.x) / direction.x;
            let b = (field.extent().x - origin.x) / direction.x;
            a.min(b)
        };
        Some(if tx >= t_enter { 0 } else { 1 })
    } else {
        None
    };
    let mut t = t_enter;

    loop {
        let h = field.height(i as usize, j as usize);
        let z_in = origin.z + direction.z * t;
        let t_cell_end = t_max_x.min(t_max_y).min(t_exit);

        if z_in < h && entered_via.is_some() {
            let p = at(t);
            // snap the crossed coordinate onto the face plane
            let (x, y) = match entered_via {
                Some(0) => {
                    let face = if step_x > 0 { i } else { i + 1 };
                    (lo.x + face as f64 * cs, p.y)
                }
                _ => {
                    let face = if step_y > 0 { j } else { j + 1 };
                    (p.x, lo.y + face as f64 * cs)
                }
            };
            return Ok(Some(SurfacePoint::new(x, y, z_in, SurfaceKind::WallFace)));
        }
        if direction.z < 0.0 {
            let t_top = ((h - origin.z) / direction.z).max(t);
            if t_top <= t_cell_end {
                let p = at(t_top);
                return Ok(Some(SurfacePoint::new(p.x, p.y, h, top_kind(h))));
            }
        } else if z_in > field.max_height() {
            return Ok(None);
        }

        if t_cell_end >= t_exit {
            return Ok(None);
        }
        if t_max_x < t_max_y {
            i += step_x as isize;
            t = t_max_x;
            t_max_x += t_delta_x;
            entered_via = Some(0);
        } else {
            j += step_y as isize;
            t = t_max_y;
            t_max_y += t_delta_y;
            entered_via = Some(1);
        }
        if i < 0 || j < 0 || i >= nx as isize || j >= ny as isize {
            return Ok(None);
        }
    }
}

/// Ray against the infinite plane `z = 0`.
pub fn raycast_flat(
    origin: Point3<f64>,
    direction: Vector3<f64>,
) -> Result<Option<SurfacePoint>, EnvironmentError> {
    check_direction(&direction)?;
    if origin.z < -SURFACE_TOL {
        return Err(EnvironmentError::OriginBelowSurface {
            z: origin.z,
            surface: 0.0,
        });
    }
    if direction.z >= 0.0 {
        return Ok(None);
    }
    let t = (-origin.z / direction.z).max(0.0);
    let p = origin + direction * t;
    Ok(Some(SurfacePoint::new(p.x, p.y, 0.0, SurfaceKind::Ground)))
}
