//! MNIST ingestion (IDX format, plain or gzip), Zoning2 compression, column
//! slicing and the matching reservoir configuration.

use std::fs;
use std::io::Read;
use std::path::Path;

use flate2::read::GzDecoder;

use crate::cluster::ClusterGraph;
use crate::error::{Error, Result};
use crate::reservoir::{EncodingConfig, InitialState, ReservoirConfig};

const IMAGES_MAGIC: u32 = 0x0000_0803;
const LABELS_MAGIC: u32 = 0x0000_0801;

/// Step records dropped by the MNIST pipeline: the first column of every
/// image in the dataset is blank.
pub const MNIST_COLUMN_WASHOUT: usize = 1;

/// One normalized image (pixels in [0, 1], row-major) with its digit label.
#[derive(Clone, Debug, PartialEq)]
pub struct MnistImage {
    pub rows: usize,
    pub cols: usize,
    pub pixels: Vec<f64>,
    pub label: u8,
}

impl MnistImage {
    pub fn pixel(&self, row: usize, col: usize) -> f64 {
        self.pixels[row * self.cols + col]
    }
}

fn read_maybe_gzip(path: &Path) -> Result<Vec<u8>> {
    let raw = fs::read(path)?;
    if raw.len() >= 2 && raw[0] == 0x1f && raw[1] == 0x8b {
        let mut out = Vec::new();
        GzDecoder::new(raw.as_slice())
            .read_to_end(&mut out)
            .map_err(|e| Error::parse(format!("{}: gzip decode failed: {e}", path.display())))?;
        Ok(out)
    } else {
        Ok(raw)
    }
}

fn be_u32(bytes: &[u8], offset: usize, what: &str) -> Result<u32> {
    let slice = bytes.get(offset..offset + 4).ok_or_else(|| {
        Error::parse(format!("truncated {what}: need 4 bytes at offset {offset}, file has {}", bytes.len()))
    })?;
    Ok(u32::from_be_bytes(slice.try_into().expect("4-byte slice")))
}

/// Loads an IDX image/label file pair (gzip detected by magic bytes), with
/// pixel bytes normalized to [0, 1].
pub fn mnist_load(images_path: impl AsRef<Path>, labels_path: impl AsRef<Path>) -> Result<Vec<MnistImage>> {
    let images_path = images_path.as_ref();
    let labels_path = labels_path.as_ref();
    let image_bytes = read_maybe_gzip(images_path)?;
    let label_bytes = read_maybe_gzip(labels_path)?;

    let magic = be_u32(&image_bytes, 0, "image header")?;
    if magic != IMAGES_MAGIC {
        return Err(Error::parse(format!(
            "{}: bad image magic 0x{magic:08x} at offset 0 (expected 0x{IMAGES_MAGIC:08x})",
            images_path.display()
        )));
    }
    let count = be_u32(&image_bytes, 4, "image header")? as usize;
    let rows = be_u32(&image_bytes, 8, "image header")? as usize;
    let cols = be_u32(&image_bytes, 12, "image header")? as usize;
    let pixel_bytes = count
        .checked_mul(rows * cols)
        .ok_or_else(|| Error::parse("image header dimensions overflow"))?;
    if image_bytes.len() != 16 + pixel_bytes {
        return Err(Error::parse(format!(
            "{}: truncated pixel data: expected {} bytes, file ends at offset {}",
            images_path.display(),
            16 + pixel_bytes,
            image_bytes.len()
        )));
    }

    let magic = be_u32(&label_bytes, 0, "label header")?;
    if magic != LABELS_MAGIC {
        return Err(Error::parse(format!(
            "{}: bad label magic 0x{magic:08x} at offset 0 (expected 0x{LABELS_MAGIC:08x})",
            labels_path.display()
        )));
    }
    let label_count = be_u32(&label_bytes, 4, "label header")? as usize;
    if label_bytes.len() != 8 + label_count {
        return Err(Error::parse(format!(
            "{}: truncated label data: expected {} bytes, file ends at offset {}",
            labels_path.display(),
            8 + label_count,
            label_bytes.len()
        )));
    }
    if label_count != count {
        return Err(Error::parse(format!(
            "count mismatch: {} images vs {} labels",
            count, label_count
        )));
    }

    let mut images = Vec::with_capacity(count);
    for k in 0..count {
        let start = 16 + k * rows * cols;
        let pixels: Vec<f64> = image_bytes[start..start + rows * cols]
            .iter()
            .map(|b| f64::from(*b) / 255.0)
            .collect();
        let label = label_bytes[8 + k];
        if label > 9 {
            return Err(Error::parse(format!(
                "label {} out of range at record {k} (offset {})",
                label,
                8 + k
            )));
        }
        images.push(MnistImage { rows, cols, pixels, label });
    }
    Ok(images)
}

/// Zoning2: each output pixel is the mean of the corresponding disjoint 2x2
/// window of a 28x28 input.
pub fn zoning2_compress(image: &MnistImage) -> Result<MnistImage> {
    if image.rows != 28 || image.cols != 28 {
        return Err(Error::invalid_argument(format!(
            "Zoning2 expects 28x28 input, got {}x{}",
            image.rows, image.cols
        )));
    }
    if image.pixels.iter().any(|p| !(0.0..=1.0).contains(p)) {
        return Err(Error::invalid_argument("pixels must lie in [0, 1]"));
    }
    let mut pixels = Vec::with_capacity(14 * 14);
    for i in 0..14 {
        for j in 0..14 {
            let sum = image.pixel(2 * i, 2 * j)
                + image.pixel(2 * i, 2 * j + 1)
                + image.pixel(2 * i + 1, 2 * j)
                + image.pixel(2 * i + 1, 2 * j + 1);
            pixels.push(sum / 4.0);
        }
    }
    Ok(MnistImage { rows: 14, cols: 14, pixels, label: image.label })
}

/// Slices a 14x14 image into its 14 column vectors, left to right; row index
/// maps to reservoir mode index. The companion encoding is `(α, β) = (0.1,
/// 0.1)` per mode, so a pixel value `s` produces the shear entry `0.1(s+1)`.
pub fn image_to_columns(image: &MnistImage) -> Result<Vec<Vec<f64>>> {
    if image.rows != 14 || image.cols != 14 {
        return Err(Error::invalid_argument(format!(
            "column slicing expects 14x14 input, got {}x{}",
            image.rows, image.cols
        )));
    }
    Ok((0..14)
        .map(|c| (0..14).map(|r| image.pixel(r, c)).collect())
        .collect())
}

/// Cluster topology tag for the MNIST benchmark.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MnistTopology {
    Chain,
    Ring,
    TwoNn,
}

impl MnistTopology {
    pub fn as_str(&self) -> &'static str {
        match self {
            MnistTopology::Chain => "chain",
            MnistTopology::Ring => "ring",
            MnistTopology::TwoNn => "2nn",
        }
    }
}

impl std::str::FromStr for MnistTopology {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "chain" => Ok(MnistTopology::Chain),
            "ring" => Ok(MnistTopology::Ring),
            "2nn" => Ok(MnistTopology::TwoNn),
            other => Err(Error::invalid_argument(format!(
                "unknown topology {other:?} (expected chain | ring | 2nn)"
            ))),
        }
    }
}

/// The MNIST reservoir: 14 modes, `T = 0.3`, coherent `|α_x = 1⟩` product
/// start, `(0.1, 0.1)` encoding, topology per tag (2NN links at ξ = 0.1).
pub fn mnist_benchmark_config(topology: MnistTopology) -> ReservoirConfig {
    let graph = match topology {
        MnistTopology::Chain => ClusterGraph::chain(14),
        MnistTopology::Ring => ClusterGraph::ring(14),
        MnistTopology::TwoNn => ClusterGraph::two_nn(14, 0.1),
    }
    .expect("fixed 14-mode topology");
    ReservoirConfig::new(
        graph,
        0.3,
        EncodingConfig::uniform(14, 0.1, 0.1).expect("finite encoding"),
        InitialState::CoherentX(1.0),
    )
    .expect("valid fixed config")
}
