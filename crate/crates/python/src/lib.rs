//! Python bindings for `dwtmark`.
//!
//! Images cross the boundary as interleaved RGB `bytes`, watermarks as lists
//! of booleans in row-major order and keys as JSON text.

use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyBytes;

use dwtmark::attacks::{self, Attack, CropRect};
use dwtmark::error::ErrorKind;
use dwtmark::{fixtures, imagecodec, metrics, watermark, ColorMode};

fn to_py(e: dwtmark::Error) -> PyErr {
    match e.kind() {
        ErrorKind::Io => PyIOError::new_err(e.to_string()),
        ErrorKind::Domain => PyValueError::new_err(e.to_string()),
    }
}

fn parse_mode(mode: &str) -> PyResult<ColorMode> {
    mode.parse().map_err(to_py)
}

/// An 8-bit RGB image.
#[pyclass(name = "RgbImage", module = "dwtmark", frozen, eq, skip_from_py_object)]
#[derive(Clone, PartialEq)]
pub struct PyRgbImage(pub dwtmark::RgbImage);

#[pymethods]
impl PyRgbImage {
    /// `data` holds `width * height` interleaved RGB triples.
    #[new]
    fn new(width: usize, height: usize, data: &[u8]) -> PyResult<Self> {
        dwtmark::RgbImage::from_interleaved(width, height, data)
            .map(Self)
            .map_err(to_py)
    }

    #[getter]
    fn width(&self) -> usize {
        self.0.width()
    }

    #[getter]
    fn height(&self) -> usize {
        self.0.height()
    }

    fn pixel(&self, row: usize, col: usize) -> PyResult<(u8, u8, u8)> {
        if row >= self.0.height() || col >= self.0.width() {
            return Err(PyValueError::new_err("pixel index out of range"));
        }
        let [r, g, b] = self.0.pixel(row, col);
        Ok((r, g, b))
    }

    fn to_bytes<'py>(&self, py: Python<'py>) -> Bound<'py, PyBytes> {
        PyBytes::new(py, &self.0.to_interleaved())
    }

    fn __repr__(&self) -> String {
        format!("RgbImage({}x{})", self.0.width(), self.0.height())
    }
}

/// A binary watermark.
#[pyclass(name = "WatermarkBits", module = "dwtmark", frozen, eq, skip_from_py_object)]
#[derive(Clone, PartialEq)]
pub struct PyWatermarkBits(pub dwtmark::WatermarkBits);

#[pymethods]
impl PyWatermarkBits {
    #[new]
    fn new(width: usize, height: usize, bits: Vec<bool>) -> PyResult<Self> {
        dwtmark::WatermarkBits::new(width, height, bits)
            .map(Self)
            .map_err(to_py)
    }

    #[getter]
    fn width(&self) -> usize {
        self.0.width()
    }

    #[getter]
    fn height(&self) -> usize {
        self.0.height()
    }

    #[getter]
    fn bits(&self) -> Vec<bool> {
        self.0.bits().to_vec()
    }

    fn ones(&self) -> usize {
        self.0.ones()
    }

    fn __len__(&self) -> usize {
        self.0.len()
    }

    fn __repr__(&self) -> String {
        format!(
            "WatermarkBits({}x{}, ones={})",
            self.0.width(),
            self.0.height(),
            self.0.ones()
        )
    }
}

/// Everything needed to extract a watermark without the host.
#[pyclass(name = "AuthKey", module = "dwtmark", frozen, eq, skip_from_py_object)]
#[derive(Clone, PartialEq)]
pub struct PyAuthKey(pub dwtmark::AuthKey);

#[pymethods]
impl PyAuthKey {
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        imagecodec::parse_key(text).map(Self).map_err(to_py)
    }

    fn to_json(&self) -> PyResult<String> {
        serde_json::to_string_pretty(&self.0).map_err(|e| PyValueError::new_err(e.to_string()))
    }

    #[getter]
    fn color_mode(&self) -> String {
        self.0.color_mode.to_string()
    }

    #[getter]
    fn levels(&self) -> u32 {
        self.0.levels
    }

    #[getter]
    fn quant_step(&self) -> f64 {
        self.0.quant_step
    }

    #[getter]
    fn subband_id(&self) -> String {
        self.0.subband_id.clone()
    }

    #[getter]
    fn host_size(&self) -> (usize, usize) {
        (self.0.host_width, self.0.host_height)
    }

    #[getter]
    fn watermark_size(&self) -> (usize, usize) {
        (self.0.wm_width, self.0.wm_height)
    }

    #[getter]
    fn site_indices(&self) -> Vec<(usize, usize)> {
        self.0.site_indices.clone()
    }

    fn __repr__(&self) -> String {
        format!(
            "AuthKey(mode={}, {}, sites={})",
            self.0.color_mode,
            self.0.subband_id,
            self.0.site_indices.len()
        )
    }
}

#[pyclass(name = "EmbedConfig", module = "dwtmark", frozen, skip_from_py_object)]
#[derive(Clone)]
pub struct PyEmbedConfig(pub dwtmark::EmbedConfig);

#[pymethods]
impl PyEmbedConfig {
    #[new]
    #[pyo3(signature = (mode = "ycbcr", levels = 3, quant_step = 1.0))]
    fn new(mode: &str, levels: u32, quant_step: f64) -> PyResult<Self> {
        let cfg = dwtmark::EmbedConfig {
            color_mode: parse_mode(mode)?,
            levels,
            quant_step,
        };
        cfg.validate().map_err(to_py)?;
        Ok(Self(cfg))
    }

    #[getter]
    fn mode(&self) -> String {
        self.0.color_mode.to_string()
    }

    #[getter]
    fn levels(&self) -> u32 {
        self.0.levels
    }

    #[getter]
    fn quant_step(&self) -> f64 {
        self.0.quant_step
    }
}

/// Returns `(watermarked_image, key)`.
#[pyfunction]
#[pyo3(signature = (host, watermark, config = None))]
fn embed(
    host: &PyRgbImage,
    watermark: &PyWatermarkBits,
    config: Option<&PyEmbedConfig>,
) -> PyResult<(PyRgbImage, PyAuthKey)> {
    let cfg = config.map(|c| c.0).unwrap_or_default();
    let (image, key) = dwtmark::embed(&host.0, &watermark.0, &cfg).map_err(to_py)?;
    Ok((PyRgbImage(image), PyAuthKey(key)))
}

#[pyfunction]
fn extract(image: &PyRgbImage, key: &PyAuthKey) -> PyResult<PyWatermarkBits> {
    dwtmark::extract(&image.0, &key.0).map(PyWatermarkBits).map_err(to_py)
}

#[pyfunction]
fn embed_nibble(q: u64, nibble: u8) -> PyResult<u64> {
    if nibble > 15 {
        return Err(PyValueError::new_err("nibble must be in 0..16"));
    }
    Ok(watermark::embed_nibble(q, nibble))
}

#[pyfunction]
fn psnr(a: &PyRgbImage, b: &PyRgbImage) -> PyResult<f64> {
    metrics::psnr(&a.0, &b.0).map_err(to_py)
}

#[pyfunction]
fn correlation(a: &PyRgbImage, b: &PyRgbImage) -> PyResult<f64> {
    metrics::correlation(&a.0, &b.0).map_err(to_py)
}

#[pyfunction]
fn normalized_correlation(original: &PyWatermarkBits, extracted: &PyWatermarkBits) -> PyResult<f64> {
    metrics::normalized_correlation(&original.0, &extracted.0).map_err(to_py)
}

#[pyfunction]
fn error_bits(a: &PyWatermarkBits, b: &PyWatermarkBits) -> PyResult<usize> {
    metrics::error_bits(&a.0, &b.0).map_err(to_py)
}

#[pyfunction]
fn payload_percent(wm_bits: usize, subband_w: usize, subband_h: usize) -> f64 {
    metrics::payload_percent(wm_bits, subband_w, subband_h)
}

#[pyfunction]
#[pyo3(signature = (image, threshold, levels = 3))]
fn wavelet_compress(image: &PyRgbImage, threshold: f64, levels: u32) -> PyResult<PyRgbImage> {
    attacks::wavelet_compress(&image.0, threshold, levels)
        .map(PyRgbImage)
        .map_err(to_py)
}

#[pyfunction]
#[pyo3(signature = (image, x, y, w, h, fill = 0))]
fn crop(image: &PyRgbImage, x: usize, y: usize, w: usize, h: usize, fill: u8) -> PyResult<PyRgbImage> {
    let rect = CropRect { x, y, w, h, fill };
    attacks::crop(&image.0, &rect).map(PyRgbImage).map_err(to_py)
}

/// `spec` is `compress:<t>` or `crop:<x>,<y>,<w>,<h>[,fill]`.
#[pyfunction]
#[pyo3(signature = (image, spec, levels = 3))]
fn apply_attack(image: &PyRgbImage, spec: &str, levels: u32) -> PyResult<PyRgbImage> {
    let attack: Attack = spec.parse().map_err(to_py)?;
    attack.apply(&image.0, levels).map(PyRgbImage).map_err(to_py)
}

#[pyfunction]
fn load_rgb_image(path: std::path::PathBuf) -> PyResult<PyRgbImage> {
    imagecodec::load_rgb_image(path).map(PyRgbImage).map_err(to_py)
}

#[pyfunction]
fn save_rgb_image(image: &PyRgbImage, path: std::path::PathBuf) -> PyResult<()> {
    imagecodec::save_rgb_image(&image.0, path).map_err(to_py)
}

#[pyfunction]
fn load_watermark(path: std::path::PathBuf) -> PyResult<PyWatermarkBits> {
    imagecodec::load_watermark(path).map(PyWatermarkBits).map_err(to_py)
}

#[pyfunction]
fn save_watermark(wm: &PyWatermarkBits, path: std::path::PathBuf) -> PyResult<()> {
    imagecodec::save_watermark(&wm.0, path).map_err(to_py)
}

#[pyfunction]
fn load_key(path: std::path::PathBuf) -> PyResult<PyAuthKey> {
    imagecodec::load_key(path).map(PyAuthKey).map_err(to_py)
}

#[pyfunction]
fn save_key(key: &PyAuthKey, path: std::path::PathBuf) -> PyResult<()> {
    imagecodec::save_key(&key.0, path).map_err(to_py)
}

/// The synthetic hosts as `(label, image)` pairs.
#[pyfunction]
#[pyo3(signature = (seed = fixtures::DEFAULT_SEED))]
fn fixture_hosts(seed: u64) -> Vec<(String, PyRgbImage)> {
    fixtures::hosts(seed)
        .into_iter()
        .map(|(label, img)| (label.to_string(), PyRgbImage(img)))
        .collect()
}

#[pyfunction]
fn logo_watermark() -> PyWatermarkBits {
    PyWatermarkBits(fixtures::logo_watermark())
}

#[pymodule]
#[pyo3(name = "dwtmark")]
pub fn dwtmark_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyRgbImage>()?;
    m.add_class::<PyWatermarkBits>()?;
    m.add_class::<PyAuthKey>()?;
    m.add_class::<PyEmbedConfig>()?;
    m.add_function(wrap_pyfunction!(embed, m)?)?;
    m.add_function(wrap_pyfunction!(extract, m)?)?;
    m.add_function(wrap_pyfunction!(embed_nibble, m)?)?;
    m.add_function(wrap_pyfunction!(psnr, m)?)?;
    m.add_function(wrap_pyfunction!(correlation, m)?)?;
    m.add_function(wrap_pyfunction!(normalized_correlation, m)?)?;
    m.add_function(wrap_pyfunction!(error_bits, m)?)?;
    m.add_function(wrap_pyfunction!(payload_percent, m)?)?;
    m.add_function(wrap_pyfunction!(wavelet_compress, m)?)?;
    m.add_function(wrap_pyfunction!(crop, m)?)?;
    m.add_function(wrap_pyfunction!(apply_attack, m)?)?;
    m.add_function(wrap_pyfunction!(load_rgb_image, m)?)?;
    m.add_function(wrap_pyfunction!(save_rgb_image, m)?)?;
    m.add_function(wrap_pyfunction!(load_watermark, m)?)?;
    m.add_function(wrap_pyfunction!(save_watermark, m)?)?;
    m.add_function(wrap_pyfunction!(load_key, m)?)?;
    m.add_function(wrap_pyfunction!(save_key, m)?)?;
    m.add_function(wrap_pyfunction!(fixture_hosts, m)?)?;
    m.add_function(wrap_pyfunction!(logo_watermark, m)?)?;
    Ok(())
}
