use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{ImageRGB, RasterError, CHANNELS, IMAGE_SIZE};

/// Ranges for random zoom, shear and horizontal flip.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AugmentParams {
    /// Zoom factor is drawn from `[1 - zoom_range, 1 + zoom_range]`.
    pub zoom_range: f64,
    /// Shear angle in radians, drawn from `[-shear_range, shear_range]`.
    pub shear_range: f64,
    pub horizontal_flip: bool,
}

impl Default for AugmentParams {
    fn default() -> Self {
        Self {
            zoom_range: 0.2,
            shear_range: 0.2,
            horizontal_flip: true,
        }
    }
}

impl AugmentParams {
    pub fn none() -> Self {
        Self {
            zoom_range: 0.0,
            shear_range: 0.0,
            horizontal_flip: false,
        }
    }

    pub fn validate(&self) -> Result<(), RasterError> {
        if !(0.0..1.0).contains(&self.zoom_range) {
            return Err(RasterError::InvalidParams(format!(
                "zoom_range {} outside [0, 1)",
                self.zoom_range
            )));
        }
        if !(0.0..std::f64::consts::FRAC_PI_2).contains(&self.shear_range) {
            return Err(RasterError::InvalidParams(format!(
                "shear_range {} outside [0, pi/2)",
                self.shear_range
            )));
        }
        Ok(())
    }
}

/// A concrete affine map about the image center.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Transform {
    pub zoom: f64,
    /// Shear angle in radians (x shifted proportionally to y).
    pub shear: f64,
    pub flip: bool,
}

impl Transform {
    pub const IDENTITY: Transform = Transform {
        zoom: 1.0,
        shear: 0.0,
        flip: false,
    };
}

/// Draws a transform. Always consumes three values from `rng` so streams stay
/// aligned whatever the parameters.
pub fn sample_transform<R: Rng + ?Sized>(params: &AugmentParams, rng: &mut R) -> Transform {
    let uz: f64 = rng.gen();
    let us: f64 = rng.gen();
    let uf: f64 = rng.gen();
    Transform {
        zoom: 1.0 + params.zoom_range * (2.0 * uz - 1.0),
        shear: params.shear_range * (2.0 * us - 1.0),
        flip: params.horizontal_flip && uf < 0.5,
    }
}

/// Applies `t` by inverse mapping with bilinear sampling; source positions
/// outside the image take the nearest edge pixel.
pub fn apply_transform(image: &ImageRGB, t: &Transform) -> ImageRGB {
    let center = (IMAGE_SIZE - 1) as f64 / 2.0;
    let last = (IMAGE_SIZE - 1) as f64;
    let tan = t.shear.tan();
    let src = image.as_raw();
    let mut out = vec![0u8; src.len()];
    let fetch = |x: usize, y: usize, c: usize| f64::from(src[(y * IMAGE_SIZE + x) * CHANNELS + c]);

    for y in 0..IMAGE_SIZE {
        for x in 0..IMAGE_SIZE {
            let mut u = x as f64 - center;
            let w = y as f64 - center;
            if t.flip {
                u = -u;
            }
            let b = w / t.zoom;
            let a = u / t.zoom - tan * b;
            let sx = (a + center).clamp(0.0, last);
            let sy = (b + center).clamp(0.0, last);
            let x0 = sx.floor() as usize;
            let y0 = sy.floor() as usize;
            let x1 = (x0 + 1).min(IMAGE_SIZE - 1);
            let y1 = (y0 + 1).min(IMAGE_SIZE - 1);
            let fx = sx - x0 as f64;
            let fy = sy - y0 as f64;
            for c in 0..CHANNELS {
                let top = fetch(x0, y0, c) + fx * (fetch(x1, y0, c) - fetch(x0, y0, c));
                let bottom = fetch(x0, y1, c) + fx * (fetch(x1, y1, c) - fetch(x0, y1, c));
                let v = top + fy * (bottom - top);
                out[(y * IMAGE_SIZE + x) * CHANNELS + c] = v.round().clamp(0.0, 255.0) as u8;
            }
        }
    }
    ImageRGB::from_raw(out).expect("same dimensions as input")
}

/// Random zoom/shear/flip of one training image.
pub fn augment<R: Rng + ?Sized>(image: &ImageRGB, params: &AugmentParams, rng: &mut R) -> ImageRGB {
    let t = sample_transform(params, rng);
    if t == Transform::IDENTITY {
        return image.clone();
    }
    apply_transform(image, &t)
}
