use serde::{Deserialize, Serialize};

use super::{ImageRGB, RasterError, IMAGE_SIZE};
use crate::phase_space::{PhasePoint, QRChord, Trajectory};

/// Phase-space window mapped onto the pixel grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Viewport {
    pub v_min: f64,
    pub v_max: f64,
    pub dv_min: f64,
    pub dv_max: f64,
}

impl Viewport {
    pub fn new(v_min: f64, v_max: f64, dv_min: f64, dv_max: f64) -> Result<Self, RasterError> {
        let vp = Self { v_min, v_max, dv_min, dv_max };
        vp.validate()?;
        Ok(vp)
    }

    fn validate(&self) -> Result<(), RasterError> {
        let finite = [self.v_min, self.v_max, self.dv_min, self.dv_max]
            .iter()
            .all(|x| x.is_finite());
        if !finite || self.v_min >= self.v_max || self.dv_min >= self.dv_max {
            return Err(RasterError::InvalidViewport(format!("{self:?}")));
        }
        Ok(())
    }

    /// Continuous pixel coordinates; y grows downward, so larger dv is higher.
    fn to_pixel(self, p: PhasePoint) -> (f64, f64) {
        let last = (IMAGE_SIZE - 1) as f64;
        let x = (p.v - self.v_min) / (self.v_max - self.v_min) * last;
        let y = last - (p.dv - self.dv_min) / (self.dv_max - self.dv_min) * last;
        (x, y)
    }
}

/// Line and background colors. Defaults to black on white.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RenderStyle {
    pub foreground: [u8; 3],
    pub background: [u8; 3],
}

impl Default for RenderStyle {
    fn default() -> Self {
        Self {
            foreground: [0; 3],
            background: [255; 3],
        }
    }
}

fn axis_range(lo: f64, hi: f64, margin: f64) -> (f64, f64) {
    if hi - lo <= 0.0 {
        (lo - 0.5, hi + 0.5)
    } else {
        let pad = (hi - lo) * margin;
        (lo - pad, hi + pad)
    }
}

/// Bounding box of the trajectory and chord, padded by `margin` times the
/// extent on each side. Zero-extent axes become `±0.5` around the value.
pub fn fit_viewport(
    trajectory: &Trajectory,
    chord: Option<&QRChord>,
    margin: f64,
) -> Result<Viewport, RasterError> {
    if trajectory.is_empty() {
        return Err(RasterError::EmptyTrajectory);
    }
    if !(margin >= 0.0 && margin.is_finite()) {
        return Err(RasterError::InvalidViewport(format!("margin {margin}")));
    }
    let extra = chord.map(|c| [c.q_point, c.r_point]);
    let (mut v_lo, mut v_hi) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut d_lo, mut d_hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for p in trajectory.points.iter().chain(extra.iter().flatten()) {
        v_lo = v_lo.min(p.v);
        v_hi = v_hi.max(p.v);
        d_lo = d_lo.min(p.dv);
        d_hi = d_hi.max(p.dv);
    }
    let (v_min, v_max) = axis_range(v_lo, v_hi, margin);
    let (dv_min, dv_max) = axis_range(d_lo, d_hi, margin);
    Viewport::new(v_min, v_max, dv_min, dv_max)
}

/// Liang-Barsky clip of a segment to the square `[0, max]^2`.
fn clip_segment(a: (f64, f64), b: (f64, f64), max: f64) -> Option<((f64, f64), (f64, f64))> {
    let (dx, dy) = (b.0 - a.0, b.1 - a.1);
    let mut t0: f64 = 0.0;
    let mut t1: f64 = 1.0;
    for (p, q) in [(-dx, a.0), (dx, max - a.0), (-dy, a.1), (dy, max - a.1)] {
        if p == 0.0 {
            if q < 0.0 {
                return None;
            }
        } else {
            let r = q / p;
            if p < 0.0 {
                t0 = t0.max(r);
            } else {
                t1 = t1.min(r);
            }
        }
    }
    if t0 > t1 {
        return None;
    }
    Some((
        (a.0 + t0 * dx, a.1 + t0 * dy),
        (a.0 + t1 * dx, a.1 + t1 * dy),
    ))
}

/// Integer line from `(x0, y0)` to `(x1, y1)`, endpoints included.
fn bresenham(x0: i64, y0: i64, x1: i64, y1: i64, mut plot: impl FnMut(i64, i64)) {
    let dx = (x1 - x0).abs();
    let dy = -(y1 - y0).abs();
    let sx = if x0 < x1 { 1 } else { -1 };
    let sy = if y0 < y1 { 1 } else { -1 };
    let (mut x, mut y) = (x0, y0);
    let mut err = dx + dy;
    loop {
        plot(x, y);
        if x == x1 && y == y1 {
            break;
        }
        let e2 = 2 * err;
        if e2 >= dy {
            err += dy;
            x += sx;
        }
        if e2 <= dx {
            err += dx;
            y += sy;
        }
    }
}

fn draw_segment(img: &mut ImageRGB, vp: &Viewport, a: PhasePoint, b: PhasePoint, rgb: [u8; 3]) {
    let max = (IMAGE_SIZE - 1) as f64;
    let Some((pa, pb)) = clip_segment(vp.to_pixel(a), vp.to_pixel(b), max) else {
        return;
    };
    let to_px = |c: f64| c.round().clamp(0.0, max) as i64;
    bresenham(to_px(pa.0), to_px(pa.1), to_px(pb.0), to_px(pb.1), |x, y| {
        img.set(x as usize, y as usize, rgb);
    });
}

/// Black-on-white rendering of the trajectory with the chord drawn last.
pub fn rasterize(trajectory: &Trajectory, chord: Option<&QRChord>, viewport: &Viewport) -> ImageRGB {
    rasterize_with(trajectory, chord, viewport, &RenderStyle::default())
}

pub fn rasterize_with(
    trajectory: &Trajectory,
    chord: Option<&QRChord>,
    viewport: &Viewport,
    style: &RenderStyle,
) -> ImageRGB {
    let mut img = ImageRGB::filled(style.background);
    match trajectory.points.as_slice() {
        [] => {}
        [only] => draw_segment(&mut img, viewport, *only, *only, style.foreground),
        points => {
            for pair in points.windows(2) {
                draw_segment(&mut img, viewport, pair[0], pair[1], style.foreground);
            }
        }
    }
    if let Some(c) = chord {
        draw_segment(&mut img, viewport, c.q_point, c.r_point, style.foreground);
    }
    img
}
