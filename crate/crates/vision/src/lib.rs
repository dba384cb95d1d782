//! Grayscale image utilities and the low-level visual features used as
//! regression predictors: mean brightness, difference-of-Gaussians keypoint
//! count, Tamura texture, GLCM statistics and the number of dominant line
//! orientations.

pub mod features;
pub mod fixtures;
pub mod glcm;
pub mod gray;
pub mod keypoints;
pub mod lines;
pub mod tamura;

mod filter;

use thiserror::Error;

pub use features::{extract_cv_features, CvConfig, CvFeatureVector, CV_FEATURE_COLUMNS};
pub use glcm::{glcm_features, GlcmStats};
pub use gray::{apply_circular_mask, load_gray, mean_brightness, to_grayscale, GrayImage};
pub use keypoints::{detect_keypoints, keypoint_count, DogParams, Keypoint};
pub use lines::{
    canny, detect_line_segments, dominant_orientation_count, probabilistic_hough, CannyParams, EdgeMap, HoughParams,
    LineSegment,
};
pub use tamura::{tamura_features, TamuraFeatures};

#[derive(Debug, Error)]
pub enum VisionError {
    #[error("image has no pixels")]
    EmptyImage,
    #[error("pixel buffer holds {found} values, expected {expected}")]
    PixelCount { expected: usize, found: usize },
    #[error("image is {width}×{height}, need at least {min} px per side")]
    ImageTooSmall { width: u32, height: u32, min: u32 },
    #[error("mask centre ({x}, {y}) lies outside the image")]
    CenterOutsideImage { x: f64, y: f64 },
    #[error("mask radius must be positive and finite, got {0}")]
    InvalidRadius(f64),
    #[error("GLCM correlation undefined: quantized image is constant")]
    DegenerateImage,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("cannot read image `{path}`: {message}")]
    Decode { path: String, message: String },
    #[error("cannot write image `{path}`: {message}")]
    Encode { path: String, message: String },
}

pub(crate) fn require_side(img: &GrayImage, min: u32) -> Result<(), VisionError> {
    if img.width() < min || img.height() < min {
        return Err(VisionError::ImageTooSmall {
            width: img.width(),
            height: img.height(),
            min,
        });
    }
    Ok(())
}
