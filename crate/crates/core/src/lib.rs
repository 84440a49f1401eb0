//! Blind watermarking of color images in the DWT domain.
//!
//! A binary watermark is written, four bits per coefficient, into the
//! quantized magnitudes of the coarsest approximation subband of the luma
//! plane (or of each RGB plane). Extraction needs only the stored
//! [`AuthKey`], not the original host.

pub mod attacks;
pub mod cli;
pub mod colorspace;
pub mod error;
pub mod fixtures;
pub mod imagecodec;
pub mod metrics;
pub mod plane;
pub mod watermark;
pub mod wavelet;

pub use attacks::{crop, wavelet_compress, Attack, CropRect};
pub use colorspace::{rgb_to_ycbcr, ycbcr_to_rgb, YCbCrImage};
pub use error::{Error, ErrorKind, Result};
pub use imagecodec::{
    load_key, load_rgb_image, load_watermark, save_key, save_rgb_image, save_watermark, AuthKey, ColorMode, RgbImage,
    WatermarkBits,
};
pub use metrics::MetricReport;
pub use plane::Plane;
pub use watermark::{embed, extract, EmbedConfig};
pub use wavelet::{forward_2d, inverse_2d, FilterPair, WaveletPyramid};
