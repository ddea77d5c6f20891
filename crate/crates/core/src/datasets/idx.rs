//! Big-endian IDX files as used by MNIST.
//!
//! Images: magic `0x00000803`, count, rows, cols, then `count * rows * cols`
//! unsigned bytes. Labels: magic `0x00000801`, count, then `count` bytes.

use std::fs::File;
use std::io::{self, BufReader, BufWriter, Read, Write};
use std::path::Path;

use super::Point;
use crate::error::{Error, Result};

pub const IMAGES_MAGIC: u32 = 0x0000_0803;
pub const LABELS_MAGIC: u32 = 0x0000_0801;

fn read_u32<R: Read>(r: &mut R) -> io::Result<u32> {
    let mut buf = [0u8; 4];
    r.read_exact(&mut buf)?;
    Ok(u32::from_be_bytes(buf))
}

fn expect_magic(found: u32, want: u32, what: &str) -> Result<()> {
    if found != want {
        return Err(Error::Format(format!(
            "{what}: magic 0x{found:08x}, expected 0x{want:08x}"
        )));
    }
    Ok(())
}

/// Reads an IDX3 image stream; pixels are scaled from `0..=255` to `[0, 1]`.
pub fn read_idx_images<R: Read>(mut r: R) -> Result<Vec<Point>> {
    expect_magic(read_u32(&mut r)?, IMAGES_MAGIC, "images")?;
    let count = read_u32(&mut r)? as usize;
    let rows = read_u32(&mut r)? as usize;
    let cols = read_u32(&mut r)? as usize;
    let dim = rows * cols;
    let mut pixels = vec![0u8; dim];
    let mut points = Vec::with_capacity(count);
    for _ in 0..count {
        r.read_exact(&mut pixels)?;
        points.push(Point::new(
            pixels.iter().map(|&b| f64::from(b) / 255.0).collect(),
        ));
    }
    Ok(points)
}

pub fn read_idx_labels<R: Read>(mut r: R) -> Result<Vec<u8>> {
    expect_magic(read_u32(&mut r)?, LABELS_MAGIC, "labels")?;
    let count = read_u32(&mut r)? as usize;
    let mut labels = vec![0u8; count];
    r.read_exact(&mut labels)?;
    Ok(labels)
}

/// Loads an image file and its label file, checking that the counts agree.
pub fn load_idx(
    images_path: impl AsRef<Path>,
    labels_path: impl AsRef<Path>,
) -> Result<(Vec<Point>, Vec<usize>)> {
    let images = read_idx_images(BufReader::new(File::open(images_path)?))?;
    let labels = read_idx_labels(BufReader::new(File::open(labels_path)?))?;
    if images.len() != labels.len() {
        return Err(Error::Consistency(format!(
            "{} images but {} labels",
            images.len(),
            labels.len()
        )));
    }
    Ok((images, labels.into_iter().map(usize::from).collect()))
}

/// Writes images whose pixels are already on the `k / 255` grid.
pub fn write_idx_images(
    path: impl AsRef<Path>,
    images: &[Point],
    rows: usize,
    cols: usize,
) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(&IMAGES_MAGIC.to_be_bytes())?;
    for v in [images.len(), rows, cols] {
        w.write_all(&(v as u32).to_be_bytes())?;
    }
    for (i, img) in images.iter().enumerate() {
        if img.dim() != rows * cols {
            return Err(Error::invalid(format!(
                "image {i} has {} pixels, expected {}",
                img.dim(),
                rows * cols
            )));
        }
        let bytes: Vec<u8> = img
            .coords()
            .iter()
            .map(|&v| (v * 255.0).round().clamp(0.0, 255.0) as u8)
            .collect();
        w.write_all(&bytes)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_idx_labels(path: impl AsRef<Path>, labels: &[u8]) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(&LABELS_MAGIC.to_be_bytes())?;
    w.write_all(&(labels.len() as u32).to_be_bytes())?;
    w.write_all(labels)?;
    w.flush()?;
    Ok(())
}
