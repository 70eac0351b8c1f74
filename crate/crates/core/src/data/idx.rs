//! IDX files as used by the MNIST family: a big-endian `u32` magic number,
//! one big-endian `u32` per dimension, then raw unsigned bytes.

use std::io::Write;
use std::path::Path;

use super::{Dataset, FeatureKind};
use crate::nn::Matrix;
use crate::{Error, Result};

/// Unsigned-byte tensor with 3 dimensions (count, rows, cols).
pub const IDX_IMAGES_MAGIC: u32 = 0x0000_0803;
/// Unsigned-byte tensor with 1 dimension (count).
pub const IDX_LABELS_MAGIC: u32 = 0x0000_0801;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IdxImages {
    pub count: usize,
    pub rows: usize,
    pub cols: usize,
    /// `count × rows × cols` bytes, each image row-major.
    pub pixels: Vec<u8>,
}

fn read_header(bytes: &[u8], magic: u32, dims: usize) -> Result<(Vec<usize>, &[u8])> {
    let header_len = 4 * (dims + 1);
    if bytes.len() < header_len {
        return Err(Error::format(format!(
            "truncated header: {} bytes, need {header_len}",
            bytes.len()
        )));
    }
    let word = |k: usize| u32::from_be_bytes(bytes[4 * k..4 * k + 4].try_into().unwrap());
    let found = word(0);
    if found != magic {
        return Err(Error::format(format!(
            "magic number {found:#010x}, expected {magic:#010x}"
        )));
    }
    let sizes = (1..=dims).map(|k| word(k) as usize).collect();
    Ok((sizes, &bytes[header_len..]))
}

fn expect_payload(payload: &[u8], sizes: &[usize]) -> Result<usize> {
    let expected = sizes
        .iter()
        .try_fold(1usize, |acc, &d| acc.checked_mul(d))
        .ok_or_else(|| Error::format("dimension product overflows"))?;
    match payload.len().cmp(&expected) {
        std::cmp::Ordering::Less => Err(Error::format(format!(
            "truncated payload: {} bytes, header promises {expected}",
            payload.len()
        ))),
        std::cmp::Ordering::Greater => Err(Error::format(format!(
            "{} trailing bytes after payload",
            payload.len() - expected
        ))),
        std::cmp::Ordering::Equal => Ok(expected),
    }
}

pub fn parse_idx_images(bytes: &[u8]) -> Result<IdxImages> {
    let (sizes, payload) = read_header(bytes, IDX_IMAGES_MAGIC, 3)?;
    expect_payload(payload, &sizes)?;
    Ok(IdxImages {
        count: sizes[0],
        rows: sizes[1],
        cols: sizes[2],
        pixels: payload.to_vec(),
    })
}

pub fn parse_idx_labels(bytes: &[u8]) -> Result<Vec<u8>> {
    let (sizes, payload) = read_header(bytes, IDX_LABELS_MAGIC, 1)?;
    expect_payload(payload, &sizes)?;
    Ok(payload.to_vec())
}

/// Loads an image/label file pair. Pixels are flattened row-major and kept
/// on their 0–255 scale; labels keep their original values.
pub fn load_idx(images_path: impl AsRef<Path>, labels_path: impl AsRef<Path>) -> Result<Dataset> {
    let images = parse_idx_images(&std::fs::read(images_path.as_ref())?)?;
    let labels = parse_idx_labels(&std::fs::read(labels_path.as_ref())?)?;
    if images.count != labels.len() {
        return Err(Error::format(format!(
            "{} images but {} labels",
            images.count,
            labels.len()
        )));
    }
    let dim = images.rows * images.cols;
    if dim == 0 {
        return Err(Error::format("images have zero pixels"));
    }
    let data = images.pixels.iter().map(|&p| f64::from(p)).collect();
    let features = Matrix::from_vec(images.count, dim, data)?;
    Ok(Dataset::new(features, labels)?
        .with_kind(FeatureKind::BytePixels)
        .with_note(format!("idx:{}", images_path.as_ref().display())))
}

pub fn write_idx_images<W: Write>(out: &mut W, images: &IdxImages) -> Result<()> {
    out.write_all(&IDX_IMAGES_MAGIC.to_be_bytes())?;
    for d in [images.count, images.rows, images.cols] {
        let d = u32::try_from(d).map_err(|_| Error::format("dimension exceeds u32"))?;
        out.write_all(&d.to_be_bytes())?;
    }
    out.write_all(&images.pixels)?;
    Ok(())
}

pub fn write_idx_labels<W: Write>(out: &mut W, labels: &[u8]) -> Result<()> {
    out.write_all(&IDX_LABELS_MAGIC.to_be_bytes())?;
    let n = u32::try_from(labels.len()).map_err(|_| Error::format("count exceeds u32"))?;
    out.write_all(&n.to_be_bytes())?;
    out.write_all(labels)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn image_bytes(count: usize, rows: usize, cols: usize, fill: u8) -> Vec<u8> {
        let mut buf = Vec::new();
        let images = IdxImages {
            count,
            rows,
            cols,
            pixels: vec![fill; count * rows * cols],
        };
        write_idx_images(&mut buf, &images).unwrap();
        buf
    }

    #[test]
    fn published_magic_constants() {
        // 0x0803: unsigned byte, 3 dimensions; 0x0801: unsigned byte, 1 dimension.
        assert_eq!(IDX_IMAGES_MAGIC, 2051);
        assert_eq!(IDX_LABELS_MAGIC, 2049);
        let bytes = image_bytes(1, 2, 2, 0);
        assert_eq!(&bytes[..4], &[0x00, 0x00, 0x08, 0x03]);
    }

    #[test]
    fn wrong_magic_is_rejected() {
        let mut bytes = image_bytes(1, 28, 28, 0);
        bytes[3] = 0x01;
        assert!(matches!(parse_idx_images(&bytes), Err(Error::Format(_))));
        let mut labels = Vec::new();
        write_idx_labels(&mut labels, &[1, 2]).unwrap();
        assert!(parse_idx_images(&labels).is_err());
        assert!(parse_idx_labels(&image_bytes(1, 1, 1, 0)).is_err());
    }

    #[test]
    fn zero_image_parses() {
        let img = parse_idx_images(&image_bytes(1, 28, 28, 0)).unwrap();
        assert_eq!((img.count, img.rows, img.cols), (1, 28, 28));
        assert_eq!(img.pixels.len(), 784);
        assert!(img.pixels.iter().all(|&p| p == 0));
    }

    #[test]
    fn truncated_or_padded_payloads_fail() {
        let bytes = image_bytes(3, 4, 4, 7);
        assert!(parse_idx_images(&bytes[..bytes.len() - 1]).is_err());
        assert!(parse_idx_images(&bytes[..10]).is_err());
        let mut padded = bytes.clone();
        padded.push(0);
        assert!(parse_idx_images(&padded).is_err());
        assert_eq!(parse_idx_images(&bytes).unwrap().count, 3);
    }

    #[test]
    fn huge_header_does_not_allocate() {
        let mut bytes = IDX_IMAGES_MAGIC.to_be_bytes().to_vec();
        for _ in 0..3 {
            bytes.extend_from_slice(&u32::MAX.to_be_bytes());
        }
        assert!(parse_idx_images(&bytes).is_err());
    }

    #[test]
    fn load_pair_and_count_mismatch() {
        let dir = tempfile::tempdir().unwrap();
        let img_path = dir.path().join("img");
        let lbl_path = dir.path().join("lbl");
        std::fs::write(&img_path, image_bytes(2, 28, 28, 255)).unwrap();
        let mut labels = Vec::new();
        write_idx_labels(&mut labels, &[2, 7]).unwrap();
        std::fs::write(&lbl_path, &labels).unwrap();
        let ds = load_idx(&img_path, &lbl_path).unwrap();
        assert_eq!((ds.len(), ds.dim()), (2, 784));
        assert_eq!(ds.labels(), &[2, 7]);
        assert_eq!(ds.kind(), FeatureKind::BytePixels);
        assert!(ds.row(0).iter().all(|&v| v == 255.0));

        let mut labels = Vec::new();
        write_idx_labels(&mut labels, &[2, 7, 1]).unwrap();
        std::fs::write(&lbl_path, &labels).unwrap();
        assert!(matches!(
            load_idx(&img_path, &lbl_path),
            Err(Error::Format(_))
        ));
    }
}
