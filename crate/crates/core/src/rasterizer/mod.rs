//! Rendering trajectories into fixed-size RGB rasters.

mod augment;
mod draw;
mod ppm;

pub use augment::{apply_transform, augment, sample_transform, AugmentParams, Transform};
pub use draw::{fit_viewport, rasterize, rasterize_with, RenderStyle, Viewport};
pub use ppm::{read_ppm, write_ppm};

use crate::neuralnet::Tensor;

pub const IMAGE_SIZE: usize = 64;
pub const CHANNELS: usize = 3;
const PIXELS: usize = IMAGE_SIZE * IMAGE_SIZE;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RasterError {
    #[error("trajectory is empty")]
    EmptyTrajectory,
    #[error("invalid viewport: {0}")]
    InvalidViewport(String),
    #[error("malformed PPM: {0}")]
    MalformedPpm(String),
    #[error("invalid augmentation parameters: {0}")]
    InvalidParams(String),
}

/// A 64x64 RGB image, row-major with interleaved channels.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct ImageRGB {
    data: Vec<u8>,
}

impl std::fmt::Debug for ImageRGB {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let dark = self.data.chunks(3).filter(|p| p != &[255, 255, 255]).count();
        write!(f, "ImageRGB({IMAGE_SIZE}x{IMAGE_SIZE}, {dark} non-white pixels)")
    }
}

impl ImageRGB {
    pub fn filled(rgb: [u8; 3]) -> Self {
        Self {
            data: rgb.iter().copied().cycle().take(PIXELS * CHANNELS).collect(),
        }
    }

    pub fn white() -> Self {
        Self::filled([255; 3])
    }

    /// Wraps raw interleaved bytes; the length must be 64 * 64 * 3.
    pub fn from_raw(data: Vec<u8>) -> Option<Self> {
        (data.len() == PIXELS * CHANNELS).then_some(Self { data })
    }

    pub fn as_raw(&self) -> &[u8] {
        &self.data
    }

    pub fn into_raw(self) -> Vec<u8> {
        self.data
    }

    pub fn get(&self, x: usize, y: usize) -> [u8; 3] {
        let i = (y * IMAGE_SIZE + x) * CHANNELS;
        [self.data[i], self.data[i + 1], self.data[i + 2]]
    }

    pub fn set(&mut self, x: usize, y: usize, rgb: [u8; 3]) {
        let i = (y * IMAGE_SIZE + x) * CHANNELS;
        self.data[i..i + 3].copy_from_slice(&rgb);
    }

    /// Number of pixels exactly equal to `rgb`.
    pub fn count(&self, rgb: [u8; 3]) -> usize {
        self.data.chunks(CHANNELS).filter(|p| *p == rgb).count()
    }

    /// Network input: shape (64, 64, 3), values scaled to [0, 1].
    pub fn to_tensor(&self) -> Tensor {
        Tensor::from_vec(
            vec![IMAGE_SIZE, IMAGE_SIZE, CHANNELS],
            self.data.iter().map(|&b| f64::from(b) / 255.0).collect(),
        )
    }

    /// RGBA bytes, handy for canvas `ImageData`.
    pub fn to_rgba(&self) -> Vec<u8> {
        self.data
            .chunks(CHANNELS)
            .flat_map(|p| [p[0], p[1], p[2], 255])
            .collect()
    }
}
