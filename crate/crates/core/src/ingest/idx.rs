//! Big-endian IDX archives (`ubyte` images and labels).

use std::path::Path;

use crate::error::{CdamError, Result};

const IMAGES_MAGIC: u32 = 0x0000_0803;
const LABELS_MAGIC: u32 = 0x0000_0801;

#[derive(Debug, Clone, PartialEq)]
pub struct IdxImages {
    pub rows: usize,
    pub cols: usize,
    /// Row-major pixels scaled by 1/255.
    pub images: Vec<Vec<f64>>,
    pub labels: Option<Vec<u8>>,
}

fn be_u32(bytes: &[u8], at: usize) -> Result<u32> {
    bytes
        .get(at..at + 4)
        .map(|b| u32::from_be_bytes([b[0], b[1], b[2], b[3]]))
        .ok_or_else(|| CdamError::Length(format!("IDX header truncated at byte {at}")))
}

fn check_magic(bytes: &[u8], want: u32) -> Result<()> {
    let magic = be_u32(bytes, 0)?;
    if magic != want {
        return Err(CdamError::Format(format!(
            "IDX magic {magic:#010x}, expected {want:#010x}"
        )));
    }
    Ok(())
}

fn payload(bytes: &[u8], offset: usize, len: usize) -> Result<&[u8]> {
    bytes.get(offset..offset + len).ok_or_else(|| {
        CdamError::Length(format!(
            "IDX payload has {} bytes, header promises {len}",
            bytes.len().saturating_sub(offset)
        ))
    })
}

/// Returns `(rows, cols, images)`.
pub fn parse_idx_images(bytes: &[u8]) -> Result<(usize, usize, Vec<Vec<f64>>)> {
    check_magic(bytes, IMAGES_MAGIC)?;
    let count = be_u32(bytes, 4)? as usize;
    let rows = be_u32(bytes, 8)? as usize;
    let cols = be_u32(bytes, 12)? as usize;
    let size = rows * cols;
    let data = payload(bytes, 16, count * size)?;
    let images = if size == 0 {
        vec![Vec::new(); count]
    } else {
        data.chunks_exact(size)
            .map(|img| img.iter().map(|&b| f64::from(b) / 255.0).collect())
            .collect()
    };
    Ok((rows, cols, images))
}

pub fn parse_idx_labels(bytes: &[u8]) -> Result<Vec<u8>> {
    check_magic(bytes, LABELS_MAGIC)?;
    let count = be_u32(bytes, 4)? as usize;
    Ok(payload(bytes, 8, count)?.to_vec())
}

pub fn load_idx(images: &Path, labels: Option<&Path>) -> Result<IdxImages> {
    let (rows, cols, images) = parse_idx_images(&std::fs::read(images)?)?;
    let labels = labels
        .map(|p| std::fs::read(p).map_err(CdamError::from).and_then(|b| parse_idx_labels(&b)))
        .transpose()?;
    if let Some(l) = &labels {
        if l.len() != images.len() {
            return Err(CdamError::Length(format!(
                "{} labels for {} images",
                l.len(),
                images.len()
            )));
        }
    }
    Ok(IdxImages {
        rows,
        cols,
        images,
        labels,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_images() -> Vec<u8> {
        let mut b = vec![0, 0, 8, 3, 0, 0, 0, 2, 0, 0, 0, 2, 0, 0, 0, 3];
        b.extend([0, 51, 102, 153, 204, 255]);
        b.extend([255, 0, 255, 0, 1, 2]);
        b
    }

    #[test]
    fn parses_hand_built_fixture() {
        let (rows, cols, imgs) = parse_idx_images(&two_images()).unwrap();
        assert_eq!((rows, cols, imgs.len()), (2, 3, 2));
        assert_eq!(imgs[0], vec![0.0, 0.2, 0.4, 0.6, 0.8, 1.0]);
        assert_eq!(imgs[1], vec![1.0, 0.0, 1.0, 0.0, 1.0 / 255.0, 2.0 / 255.0]);
        let labels = parse_idx_labels(&[0, 0, 8, 1, 0, 0, 0, 2, 7, 3]).unwrap();
        assert_eq!(labels, vec![7, 3]);
    }

    #[test]
    fn bad_magic_and_truncation() {
        let mut b = two_images();
        b[3] = 1;
        assert!(matches!(parse_idx_images(&b), Err(CdamError::Format(_))));
        let mut b = two_images();
        b.pop();
        assert!(matches!(parse_idx_images(&b), Err(CdamError::Length(_))));
        assert!(matches!(parse_idx_images(&[0, 0, 8]), Err(CdamError::Length(_))));
        assert!(matches!(
            parse_idx_labels(&[0, 0, 8, 1, 0, 0, 0, 5, 1]),
            Err(CdamError::Length(_))
        ));
    }

    #[test]
    fn load_checks_label_count() {
        let dir = tempfile::tempdir().unwrap();
        let imgs = dir.path().join("img");
        let labs = dir.path().join("lab");
        std::fs::write(&imgs, two_images()).unwrap();
        std::fs::write(&labs, [0, 0, 8, 1, 0, 0, 0, 1, 4]).unwrap();
        assert!(matches!(load_idx(&imgs, Some(&labs)), Err(CdamError::Length(_))));
        std::fs::write(&labs, [0, 0, 8, 1, 0, 0, 0, 2, 4, 5]).unwrap();
        let set = load_idx(&imgs, Some(&labs)).unwrap();
        assert_eq!(set.labels, Some(vec![4, 5]));
    }
}
