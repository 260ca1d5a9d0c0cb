//! Binary IQ cube container ("RIQ1") and grid exporters.
//!
//! Cube file layout, little-endian, no padding:
//!
//! ```text
//! magic   4 bytes  "RIQ1"
//! header  4 x u32  num_frames, num_rx, num_chirps, num_samples
//! payload per frame: rx-major, chirp next, sample innermost,
//!         each sample as f32 I then f32 Q
//! ```
//!
//! Grids (range-azimuth images and detection masks) export as 16-bit binary
//! PGM or as CSV. PGM16 uses the Netpbm convention of big-endian sample
//! bytes and maxval 65535.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use num_complex::Complex32;

use crate::error::{Error, Result};
use crate::types::{BinaryMask, FrameCube, RaImage};

const MAGIC: &[u8; 4] = b"RIQ1";
const HEADER_LEN: u64 = 4 + 4 * 4;
const BYTES_PER_SAMPLE: u64 = 8;

/// Dimensions declared by a cube file header.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CubeHeader {
    pub num_frames: u32,
    pub num_rx: u32,
    pub num_chirps: u32,
    pub num_samples: u32,
}

impl CubeHeader {
    fn samples_per_frame(&self) -> u64 {
        self.num_rx as u64 * self.num_chirps as u64 * self.num_samples as u64
    }

    fn payload_len(&self) -> u64 {
        self.num_frames as u64 * self.samples_per_frame() * BYTES_PER_SAMPLE
    }
}

/// Streaming reader over the frames of a cube file.
///
/// The header and total payload length are validated on open; frames are
/// then decoded one at a time in file order.
#[derive(Debug)]
pub struct CubeReader {
    reader: BufReader<File>,
    header: CubeHeader,
    frames_read: u32,
}

impl CubeReader {
    pub fn open(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path)?;
        let file_len = file.metadata()?.len();
        let mut reader = BufReader::new(file);

        let mut magic = [0u8; 4];
        if reader.read_exact(&mut magic).is_err() || &magic != MAGIC {
            return Err(Error::Format(format!(
                "{} is not a cube file (bad magic)",
                path.display()
            )));
        }

        let mut word = [0u8; 4];
        let mut fields = [0u32; 4];
        for f in &mut fields {
            reader.read_exact(&mut word).map_err(|_| Error::Corrupt {
                offset: file_len,
                detail: "header truncated".into(),
            })?;
            *f = u32::from_le_bytes(word);
        }
        let header = CubeHeader {
            num_frames: fields[0],
            num_rx: fields[1],
            num_chirps: fields[2],
            num_samples: fields[3],
        };

        let expected = HEADER_LEN + header.payload_len();
        if file_len != expected {
            return Err(Error::Corrupt {
                offset: file_len,
                detail: format!(
                    "payload length mismatch: header declares {} frames ({} bytes total), file has {} bytes",
                    header.num_frames, expected, file_len
                ),
            });
        }

        Ok(Self {
            reader,
            header,
            frames_read: 0,
        })
    }

    pub fn header(&self) -> CubeHeader {
        self.header
    }

    /// Decode the next frame, or `None` when all declared frames were read.
    pub fn next_frame(&mut self) -> Option<Result<FrameCube>> {
        if self.frames_read >= self.header.num_frames {
            return None;
        }
        let n = self.header.samples_per_frame() as usize;
        let mut buf = vec![0u8; n * BYTES_PER_SAMPLE as usize];
        if let Err(e) = self.reader.read_exact(&mut buf) {
            let offset =
                HEADER_LEN + self.frames_read as u64 * n as u64 * BYTES_PER_SAMPLE;
            return Some(Err(Error::Corrupt {
                offset,
                detail: format!("frame {} truncated: {e}", self.frames_read),
            }));
        }
        self.frames_read += 1;

        let mut data = Vec::with_capacity(n);
        for chunk in buf.chunks_exact(8) {
            let re = f32::from_le_bytes([chunk[0], chunk[1], chunk[2], chunk[3]]);
            let im = f32::from_le_bytes([chunk[4], chunk[5], chunk[6], chunk[7]]);
            data.push(Complex32::new(re, im));
        }
        Some(
            FrameCube::from_flat(
                self.header.num_rx as usize,
                self.header.num_chirps as usize,
                self.header.num_samples as usize,
                data,
            )
            .map_err(|_| Error::Corrupt {
                offset: HEADER_LEN,
                detail: format!("frame {} holds non-finite samples", self.frames_read - 1),
            }),
        )
    }
}

impl Iterator for CubeReader {
    type Item = Result<FrameCube>;

    fn next(&mut self) -> Option<Self::Item> {
        self.next_frame()
    }
}

/// Read an entire cube file into memory.
pub fn read_cube_file(path: impl AsRef<Path>) -> Result<(CubeHeader, Vec<FrameCube>)> {
    let reader = CubeReader::open(path)?;
    let header = reader.header();
    let frames = reader.collect::<Result<Vec<_>>>()?;
    Ok((header, frames))
}

/// Write frames to a cube file in the layout documented above.
///
/// All frames must share the dimensions of the first one.
pub fn write_cube_file(path: impl AsRef<Path>, frames: &[FrameCube]) -> Result<()> {
    let dims = frames
        .first()
        .map(|f| (f.num_rx(), f.num_chirps(), f.num_samples()))
        .unwrap_or((0, 0, 0));
    for (i, f) in frames.iter().enumerate() {
        if (f.num_rx(), f.num_chirps(), f.num_samples()) != dims {
            return Err(Error::DimMismatch {
                expected: format!("{}x{}x{}", dims.0, dims.1, dims.2),
                got: format!(
                    "frame {i}: {}x{}x{}",
                    f.num_rx(),
                    f.num_chirps(),
                    f.num_samples()
                ),
            });
        }
    }

    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(MAGIC)?;
    for field in [frames.len() as u32, dims.0 as u32, dims.1 as u32, dims.2 as u32] {
        w.write_all(&field.to_le_bytes())?;
    }
    for frame in frames {
        for s in frame.flat() {
            w.write_all(&s.re.to_le_bytes())?;
            w.write_all(&s.im.to_le_bytes())?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Output format for [`export_image`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExportFormat {
    /// Binary 16-bit PGM (`P5`, maxval 65535, big-endian samples).
    Pgm16,
    /// Comma-separated rows of decimal values.
    Csv,
}

/// Anything exportable as an H x W grid of values in `[0, 1]`.
pub trait ExportGrid {
    fn grid_height(&self) -> usize;
    fn grid_width(&self) -> usize;
    /// Cell value scaled to `[0, 1]`.
    fn grid_value(&self, row: usize, col: usize) -> f64;
    /// Decimal rendering of the cell for CSV output.
    fn grid_cell_text(&self, row: usize, col: usize) -> String;
}

impl ExportGrid for RaImage {
    fn grid_height(&self) -> usize {
        self.height()
    }

    fn grid_width(&self) -> usize {
        self.width()
    }

    fn grid_value(&self, row: usize, col: usize) -> f64 {
        self.at(row, col)
    }

    fn grid_cell_text(&self, row: usize, col: usize) -> String {
        format!("{}", self.at(row, col))
    }
}

impl ExportGrid for BinaryMask {
    fn grid_height(&self) -> usize {
        self.height()
    }

    fn grid_width(&self) -> usize {
        self.width()
    }

    fn grid_value(&self, row: usize, col: usize) -> f64 {
        if self.get(row, col) {
            1.0
        } else {
            0.0
        }
    }

    fn grid_cell_text(&self, row: usize, col: usize) -> String {
        if self.get(row, col) { "1".into() } else { "0".into() }
    }
}

/// Write a grid to `path`.
///
/// PGM16 maps `[0, 1]` linearly onto `[0, 65535]` with round-half-up;
/// masks map `{0, 1}` to `{0, 65535}`.
pub fn export_image<G: ExportGrid>(
    grid: &G,
    path: impl AsRef<Path>,
    format: ExportFormat,
) -> Result<()> {
    let (h, w) = (grid.grid_height(), grid.grid_width());
    if h == 0 || w == 0 {
        return Err(Error::invalid("grid", "cannot export an empty grid"));
    }
    let mut out = BufWriter::new(File::create(path)?);
    match format {
        ExportFormat::Pgm16 => {
            write!(out, "P5\n{w} {h}\n65535\n")?;
            for r in 0..h {
                for c in 0..w {
                    let v = grid.grid_value(r, c).clamp(0.0, 1.0);
                    let q = (v * 65535.0).round() as u16;
                    out.write_all(&q.to_be_bytes())?;
                }
            }
        }
        ExportFormat::Csv => {
            for r in 0..h {
                let row: Vec<String> = (0..w).map(|c| grid.grid_cell_text(r, c)).collect();
                writeln!(out, "{}", row.join(","))?;
            }
        }
    }
    out.flush()?;
    Ok(())
}

/// Parse a binary 16-bit PGM written by [`export_image`] back into an image
/// with values in `[0, 1]`.
pub fn read_pgm16(path: impl AsRef<Path>) -> Result<RaImage> {
    let path = path.as_ref();
    let bytes = std::fs::read(path)?;
    let parse_err = |msg: &str| Error::Format(format!("{}: {msg}", path.display()));

    // Header: "P5" then width, height, maxval as whitespace-separated
    // ASCII tokens, then a single whitespace byte before the raster.
    let mut pos = 0usize;
    let mut token = |bytes: &[u8]| -> Result<String> {
        while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if start == pos {
            return Err(Error::Format("truncated pgm header".into()));
        }
        Ok(String::from_utf8_lossy(&bytes[start..pos]).into_owned())
    };

    if token(&bytes)? != "P5" {
        return Err(parse_err("not a binary PGM (expected P5)"));
    }
    let width: usize = token(&bytes)?.parse().map_err(|_| parse_err("bad width"))?;
    let height: usize = token(&bytes)?.parse().map_err(|_| parse_err("bad height"))?;
    let maxval: u32 = token(&bytes)?.parse().map_err(|_| parse_err("bad maxval"))?;
    if maxval != 65535 {
        return Err(parse_err("expected 16-bit PGM (maxval 65535)"));
    }
    pos += 1; // single whitespace after maxval

    let need = width * height * 2;
    if bytes.len() < pos + need {
        return Err(Error::Corrupt {
            offset: bytes.len() as u64,
            detail: format!("pgm raster truncated, need {need} bytes"),
        });
    }
    let mut values = Vec::with_capacity(width * height);
    for chunk in bytes[pos..pos + need].chunks_exact(2) {
        let q = u16::from_be_bytes([chunk[0], chunk[1]]);
        values.push(q as f64 / 65535.0);
    }
    RaImage::from_values(height, width, values)
}
