use std::path::Path;

use image::RgbImage;

use crate::VisionError;

/// Row-major 8-bit grayscale raster.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GrayImage {
    width: u32,
    height: u32,
    pixels: Vec<u8>,
}

impl GrayImage {
    pub fn new(width: u32, height: u32, pixels: Vec<u8>) -> Result<Self, VisionError> {
        if width == 0 || height == 0 {
            return Err(VisionError::EmptyImage);
        }
        let expected = width as usize * height as usize;
        if pixels.len() != expected {
            return Err(VisionError::PixelCount {
                expected,
                found: pixels.len(),
            });
        }
        Ok(Self { width, height, pixels })
    }

    /// Panics on a zero dimension.
    pub fn filled(width: u32, height: u32, value: u8) -> Self {
        Self::from_fn(width, height, |_, _| value)
    }

    /// Panics on a zero dimension.
    pub fn from_fn(width: u32, height: u32, f: impl Fn(u32, u32) -> u8) -> Self {
        assert!(width > 0 && height > 0, "image dimensions must be positive");
        let mut pixels = Vec::with_capacity(width as usize * height as usize);
        for y in 0..height {
            for x in 0..width {
                pixels.push(f(x, y));
            }
        }
        Self { width, height, pixels }
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    pub fn get(&self, x: u32, y: u32) -> u8 {
        self.pixels[y as usize * self.width as usize + x as usize]
    }

    pub fn set(&mut self, x: u32, y: u32, v: u8) {
        self.pixels[y as usize * self.width as usize + x as usize] = v;
    }

    pub fn save_png(&self, path: &Path) -> Result<(), VisionError> {
        image::GrayImage::from_raw(self.width, self.height, self.pixels.clone())
            .expect("buffer length checked at construction")
            .save_with_format(path, image::ImageFormat::Png)
            .map_err(|e| VisionError::Encode {
                path: path.display().to_string(),
                message: e.to_string(),
            })
    }
}

/// ITU-R 601 luma, `round(0.299 R + 0.587 G + 0.114 B)`, in exact integer
/// arithmetic.
pub fn to_grayscale(rgb: &RgbImage) -> Result<GrayImage, VisionError> {
    let pixels = rgb
        .pixels()
        .map(|p| {
            let [r, g, b] = p.0;
            ((299 * r as u32 + 587 * g as u32 + 114 * b as u32 + 500) / 1000) as u8
        })
        .collect();
    GrayImage::new(rgb.width(), rgb.height(), pixels)
}

/// Decodes a PNG or JPEG file and converts it to grayscale.
pub fn load_gray(path: &Path) -> Result<GrayImage, VisionError> {
    let decoded = image::open(path).map_err(|e| VisionError::Decode {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    match decoded {
        image::DynamicImage::ImageLuma8(g) => {
            let (w, h) = g.dimensions();
            GrayImage::new(w, h, g.into_raw())
        }
        other => to_grayscale(&other.to_rgb8()),
    }
}

/// Sets every pixel farther than `radius` from `center` to `fill`.
/// Pixel `(x, y)` sits at coordinates `(x, y)`.
pub fn apply_circular_mask(
    img: &GrayImage,
    center: (f64, f64),
    radius: f64,
    fill: u8,
) -> Result<GrayImage, VisionError> {
    if !(radius.is_finite() && radius > 0.0) {
        return Err(VisionError::InvalidRadius(radius));
    }
    let (cx, cy) = center;
    let inside = |v: f64, n: u32| v.is_finite() && v >= 0.0 && v <= (n - 1) as f64;
    if !inside(cx, img.width) || !inside(cy, img.height) {
        return Err(VisionError::CenterOutsideImage { x: cx, y: cy });
    }
    let r2 = radius * radius;
    let mut out = img.clone();
    for y in 0..img.height {
        for x in 0..img.width {
            let (dx, dy) = (x as f64 - cx, y as f64 - cy);
            if dx * dx + dy * dy > r2 {
                out.set(x, y, fill);
            }
        }
    }
    Ok(out)
}

/// `(Σ pixels / 255) / (w·h)`.
pub fn mean_brightness(img: &GrayImage) -> f64 {
    let sum: u64 = img.pixels.iter().map(|&p| p as u64).sum();
    sum as f64 / 255.0 / img.pixels.len() as f64
}
