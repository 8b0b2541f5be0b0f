//! Raw little-endian `f32` rasters with a JSON header, and PNG export.

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::image::TfImage;
use crate::{Result, TfError};

#[derive(Debug, Serialize, Deserialize)]
struct Header {
    height: usize,
    width: usize,
    freq_band: [f64; 2],
    duration: f64,
    source_id: Option<String>,
    degenerate: bool,
}

pub fn header_path(raw: &Path) -> PathBuf {
    raw.with_extension("json")
}

pub fn write_image(img: &TfImage, raw: &Path) -> Result<()> {
    let mut f = BufWriter::new(File::create(raw)?);
    for p in &img.pixels {
        f.write_all(&p.to_le_bytes())?;
    }
    f.flush()?;
    let h = Header {
        height: img.height,
        width: img.width,
        freq_band: img.freq_band,
        duration: img.duration,
        source_id: img.source_id.clone(),
        degenerate: img.degenerate,
    };
    std::fs::write(header_path(raw), serde_json::to_string_pretty(&h)? + "\n")?;
    Ok(())
}

pub fn read_image(raw: &Path) -> Result<TfImage> {
    let h: Header = serde_json::from_str(&std::fs::read_to_string(header_path(raw))?)?;
    let mut bytes = Vec::new();
    File::open(raw)?.read_to_end(&mut bytes)?;
    if bytes.len() != 4 * h.height * h.width {
        return Err(TfError::Format(format!(
            "{} holds {} bytes, header declares {}×{}",
            raw.display(),
            bytes.len(),
            h.height,
            h.width
        )));
    }
    let pixels = bytes.chunks_exact(4).map(|b| f32::from_le_bytes([b[0], b[1], b[2], b[3]])).collect();
    Ok(TfImage {
        height: h.height,
        width: h.width,
        pixels,
        freq_band: h.freq_band,
        duration: h.duration,
        source_id: h.source_id,
        degenerate: h.degenerate,
    })
}

/// 8-bit grayscale PNG with high frequencies at the top.
pub fn write_png(img: &TfImage, path: &Path) -> Result<()> {
    let w = BufWriter::new(File::create(path)?);
    let mut enc = png::Encoder::new(w, img.width as u32, img.height as u32);
    enc.set_color(png::ColorType::Grayscale);
    enc.set_depth(png::BitDepth::Eight);
    let mut writer = enc.write_header()?;
    let mut data = Vec::with_capacity(img.pixels.len());
    for r in (0..img.height).rev() {
        for c in 0..img.width {
            data.push((img.get(r, c).clamp(0.0, 1.0) * 255.0).round() as u8);
        }
    }
    writer.write_image_data(&data)?;
    Ok(())
}
