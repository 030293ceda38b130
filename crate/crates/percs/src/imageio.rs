//! Grayscale image I/O (binary PGM) and block partitioning.
//!
//! Images are kept as real-valued samples internally; quantization to 8 bit
//! happens only when writing. Partitioning pads the right/bottom edges by
//! replication up to a multiple of the block size, and reassembly crops the
//! padding back off, so `reassemble(partition(img, b)) == img` bit-exactly.

use std::fs;
use std::path::Path;

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// A 2-D grayscale image with row-major real-valued samples in `[0, 255]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GrayImage {
    pub width: usize,
    pub height: usize,
    /// Row-major samples, `samples[y * width + x]`.
    pub samples: Vec<f64>,
}

impl GrayImage {
    /// Bit depth used for file I/O.
    pub const BIT_DEPTH: u8 = 8;

    pub fn new(width: usize, height: usize, samples: Vec<f64>) -> Result<Self> {
        if samples.len() != width * height {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} image needs {} samples, got {}",
                width,
                height,
                width * height,
                samples.len()
            )));
        }
        Ok(Self {
            width,
            height,
            samples,
        })
    }

    /// Constant-valued image.
    pub fn filled(width: usize, height: usize, value: f64) -> Self {
        Self {
            width,
            height,
            samples: vec![value; width * height],
        }
    }

    pub fn sample(&self, x: usize, y: usize) -> f64 {
        self.samples[y * self.width + x]
    }

    /// Clips to `[0, 255]` and rounds half away from zero, in place.
    ///
    /// This is the same quantization applied when saving, so metrics computed
    /// on a quantized image match what a viewer of the written file sees.
    pub fn quantize(&mut self) {
        for s in &mut self.samples {
            *s = quantize_sample(*s);
        }
    }
}

/// Round half away from zero, then clip to `[0, 255]`.
pub fn quantize_sample(v: f64) -> f64 {
    // f64::round ties away from zero, matching the storage contract.
    v.round().clamp(0.0, 255.0)
}

/// An image partitioned into `B x B` tiles, plus the padding bookkeeping
/// needed to undo the partitioning.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockGrid {
    pub block_size: usize,
    /// Tiles in row-major tile order (left-to-right, top-to-bottom).
    pub blocks: Vec<DMatrix<f64>>,
    pub original_width: usize,
    pub original_height: usize,
    pub padded_width: usize,
    pub padded_height: usize,
}

impl BlockGrid {
    pub fn tiles_x(&self) -> usize {
        self.padded_width / self.block_size
    }

    pub fn tiles_y(&self) -> usize {
        self.padded_height / self.block_size
    }
}

/// Loads an 8-bit binary PGM ("P5", maxval 255).
pub fn load_image(path: impl AsRef<Path>) -> Result<GrayImage> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|source| Error::Read {
        path: path.to_path_buf(),
        source,
    })?;
    decode_pgm(&bytes)
}

/// Saves as binary PGM with maxval 255, quantizing samples to 8 bit.
pub fn save_image(img: &GrayImage, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, encode_pgm(img)).map_err(|source| Error::Write {
        path: path.to_path_buf(),
        source,
    })
}

pub fn encode_pgm(img: &GrayImage) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", img.width, img.height).into_bytes();
    out.extend(img.samples.iter().map(|&s| quantize_sample(s) as u8));
    out
}

pub fn decode_pgm(bytes: &[u8]) -> Result<GrayImage> {
    let mut cursor = 0usize;

    let magic = read_token(bytes, &mut cursor)
        .ok_or_else(|| Error::MalformedHeader("missing magic number".into()))?;
    if magic != "P5" {
        return Err(Error::UnsupportedFormat(format!(
            "expected binary PGM magic \"P5\", found \"{magic}\""
        )));
    }

    let width = read_header_number(bytes, &mut cursor, "width")?;
    let height = read_header_number(bytes, &mut cursor, "height")?;
    let maxval = read_header_number(bytes, &mut cursor, "maxval")?;
    if maxval != 255 {
        return Err(Error::UnsupportedMaxval(maxval as u32));
    }

    // Exactly one whitespace byte separates the header from the payload.
    match bytes.get(cursor) {
        Some(b) if b.is_ascii_whitespace() => cursor += 1,
        _ => {
            return Err(Error::MalformedHeader(
                "missing whitespace after maxval".into(),
            ))
        }
    }

    let expected = width * height;
    let payload = &bytes[cursor..];
    if payload.len() < expected {
        return Err(Error::TruncatedPayload {
            expected,
            found: payload.len(),
        });
    }

    let samples = payload[..expected].iter().map(|&b| b as f64).collect();
    GrayImage::new(width, height, samples)
}

/// Next whitespace-delimited header token, skipping `#` comments.
fn read_token<'a>(bytes: &'a [u8], cursor: &mut usize) -> Option<&'a str> {
    loop {
        while *cursor < bytes.len() && bytes[*cursor].is_ascii_whitespace() {
            *cursor += 1;
        }
        if *cursor < bytes.len() && bytes[*cursor] == b'#' {
            while *cursor < bytes.len() && bytes[*cursor] != b'\n' {
                *cursor += 1;
            }
            continue;
        }
        break;
    }
    let start = *cursor;
    while *cursor < bytes.len()
        && !bytes[*cursor].is_ascii_whitespace()
        && bytes[*cursor] != b'#'
    {
        *cursor += 1;
    }
    if *cursor == start {
        return None;
    }
    std::str::from_utf8(&bytes[start..*cursor]).ok()
}

fn read_header_number(bytes: &[u8], cursor: &mut usize, what: &str) -> Result<usize> {
    let token = read_token(bytes, cursor)
        .ok_or_else(|| Error::MalformedHeader(format!("missing {what}")))?;
    let value: usize = token
        .parse()
        .map_err(|_| Error::MalformedHeader(format!("invalid {what} \"{token}\"")))?;
    if value == 0 {
        return Err(Error::MalformedHeader(format!("{what} must be positive")));
    }
    Ok(value)
}

/// Splits an image into `B x B` tiles, padding right/bottom by edge
/// replication up to multiples of `B`. Tiles are emitted row-major.
pub fn partition(img: &GrayImage, block_size: usize) -> Result<BlockGrid> {
    if block_size < 2 {
        return Err(Error::InvalidParameter(format!(
            "block size must be >= 2, got {block_size}"
        )));
    }
    let b = block_size;
    let padded_width = img.width.div_ceil(b) * b;
    let padded_height = img.height.div_ceil(b) * b;

    let tiles_x = padded_width / b;
    let tiles_y = padded_height / b;
    let mut blocks = Vec::with_capacity(tiles_x * tiles_y);

    for ty in 0..tiles_y {
        for tx in 0..tiles_x {
            let mut tile = DMatrix::zeros(b, b);
            for row in 0..b {
                // Edge replication: clamp out-of-range coordinates.
                let y = (ty * b + row).min(img.height - 1);
                for col in 0..b {
                    let x = (tx * b + col).min(img.width - 1);
                    tile[(row, col)] = img.sample(x, y);
                }
            }
            blocks.push(tile);
        }
    }

    Ok(BlockGrid {
        block_size: b,
        blocks,
        original_width: img.width,
        original_height: img.height,
        padded_width,
        padded_height,
    })
}

/// Places tiles back in row-major order and crops the padding.
pub fn reassemble(grid: &BlockGrid) -> Result<GrayImage> {
    let b = grid.block_size;
    let tiles_x = grid.tiles_x();
    let tiles_y = grid.tiles_y();
    if grid.blocks.len() != tiles_x * tiles_y {
        return Err(Error::TileCountMismatch {
            expected: tiles_x * tiles_y,
            found: grid.blocks.len(),
        });
    }
    for (idx, tile) in grid.blocks.iter().enumerate() {
        if tile.nrows() != b || tile.ncols() != b {
            return Err(Error::DimensionMismatch(format!(
                "tile {idx} is {}x{}, expected {b}x{b}",
                tile.nrows(),
                tile.ncols()
            )));
        }
    }

    let mut samples = vec![0.0; grid.original_width * grid.original_height];
    for ty in 0..tiles_y {
        for tx in 0..tiles_x {
            let tile = &grid.blocks[ty * tiles_x + tx];
            for row in 0..b {
                let y = ty * b + row;
                if y >= grid.original_height {
                    break;
                }
                for col in 0..b {
                    let x = tx * b + col;
                    if x >= grid.original_width {
                        break;
                    }
                    samples[y * grid.original_width + x] = tile[(row, col)];
                }
            }
        }
    }

    GrayImage::new(grid.original_width, grid.original_height, samples)
}
