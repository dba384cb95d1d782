use serde::{Deserialize, Serialize};

use crate::glcm::glcm_features;
use crate::keypoints::{keypoint_count, DogParams, KEYPOINT_MIN_SIDE};
use crate::lines::{detect_line_segments, dominant_orientation_count, CannyParams, HoughParams};
use crate::tamura::{tamura_features, TAMURA_MIN_SIDE};
use crate::{mean_brightness, require_side, GrayImage, VisionError};

/// Column order of [`CvFeatureVector::values`] and of feature CSVs.
pub const CV_FEATURE_COLUMNS: [&str; 10] = [
    "value",
    "keypoints",
    "tamura.coarseness",
    "tamura.contrast",
    "tamura.directionality",
    "glcm.contrast",
    "glcm.correlation",
    "glcm.energy",
    "glcm.homogeneity",
    "angles",
];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CvConfig {
    pub glcm_levels: u32,
    pub glcm_distance: u32,
    pub dog: DogParams,
    pub canny: CannyParams,
    pub hough: HoughParams,
}

impl Default for CvConfig {
    fn default() -> Self {
        Self {
            glcm_levels: 64,
            glcm_distance: 1,
            dog: DogParams::default(),
            canny: CannyParams::default(),
            hough: HoughParams::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CvFeatureVector {
    pub value: f64,
    pub keypoints: usize,
    pub tamura_coarseness: f64,
    pub tamura_contrast: f64,
    pub tamura_directionality: f64,
    pub glcm_contrast: f64,
    /// `None` on a constant quantized image.
    pub glcm_correlation: Option<f64>,
    pub glcm_energy: f64,
    pub glcm_homogeneity: f64,
    pub angles: usize,
}

impl CvFeatureVector {
    /// Entries in [`CV_FEATURE_COLUMNS`] order.
    pub fn values(&self) -> [Option<f64>; 10] {
        [
            Some(self.value),
            Some(self.keypoints as f64),
            Some(self.tamura_coarseness),
            Some(self.tamura_contrast),
            Some(self.tamura_directionality),
            Some(self.glcm_contrast),
            self.glcm_correlation,
            Some(self.glcm_energy),
            Some(self.glcm_homogeneity),
            Some(self.angles as f64),
        ]
    }
}

pub fn extract_cv_features(img: &GrayImage, config: &CvConfig) -> Result<CvFeatureVector, VisionError> {
    require_side(img, TAMURA_MIN_SIDE.max(KEYPOINT_MIN_SIDE))?;
    let tamura = tamura_features(img)?;
    let glcm = glcm_features(img, config.glcm_levels, config.glcm_distance)?;
    let segments = detect_line_segments(img, &config.canny, &config.hough);
    Ok(CvFeatureVector {
        value: mean_brightness(img),
        keypoints: keypoint_count(img, &config.dog)?,
        tamura_coarseness: tamura.coarseness,
        tamura_contrast: tamura.contrast,
        tamura_directionality: tamura.directionality,
        glcm_contrast: glcm.contrast,
        glcm_correlation: glcm.correlation,
        glcm_energy: glcm.energy,
        glcm_homogeneity: glcm.homogeneity,
        angles: dominant_orientation_count(&segments),
    })
}
