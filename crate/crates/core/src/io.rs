//! Image and table serialisation.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::color::Rgb;
use crate::contact::DepthField;
use crate::error::{Error, Result};
use crate::geom::RasterFrame;
use crate::model::Mechanism;
use crate::perception::Correspondence;
use crate::render::TactileImage;

/// `prefix_000042_mdm.png`.
pub fn frame_filename(prefix: &str, frame_id: u64, mechanism: Mechanism) -> String {
    format!("{prefix}_{frame_id:06}_{}.png", mechanism.to_string().to_ascii_lowercase())
}

fn to_u8(v: f64) -> u8 {
    (v.clamp(0.0, 1.0) * 255.0).round() as u8
}

pub fn encode_rgb8(img: &TactileImage) -> Vec<u8> {
    img.pixels
        .iter()
        .flat_map(|p| [to_u8(p.r), to_u8(p.g), to_u8(p.b)])
        .collect()
}

/// 8-bit lossless RGB PNG.
pub fn write_png(img: &TactileImage, path: &Path) -> Result<()> {
    let buf = image::RgbImage::from_raw(img.width as u32, img.height as u32, encode_rgb8(img))
        .ok_or_else(|| Error::Parameter("pixel buffer does not match image size".into()))?;
    buf.save_with_format(path, image::ImageFormat::Png)?;
    Ok(())
}

pub fn read_png(path: &Path, mechanism: Mechanism) -> Result<TactileImage> {
    let img = image::open(path)?.to_rgb8();
    let (w, h) = img.dimensions();
    let pixels = img
        .pixels()
        .map(|p| Rgb::new(p[0] as f64 / 255.0, p[1] as f64 / 255.0, p[2] as f64 / 255.0))
        .collect();
    Ok(TactileImage {
        width: w as usize,
        height: h as usize,
        pixels,
        mechanism,
        frame_id: 0,
    })
}

/// Binary 8-bit grey PGM of the image luma.
pub fn write_pgm(img: &TactileImage, path: &Path) -> Result<()> {
    let mut f = fs::File::create(path)?;
    write!(f, "P5\n{} {}\n255\n", img.width, img.height)?;
    let bytes: Vec<u8> = img.pixels.iter().map(|p| to_u8(p.luma())).collect();
    f.write_all(&bytes)?;
    Ok(())
}

/// Single-channel little-endian PFM (rows stored bottom-up, per the format).
pub fn write_pfm(width: usize, height: usize, data: &[f64], path: &Path) -> Result<()> {
    if data.len() != width * height {
        return Err(Error::DimensionMismatch(width, height, data.len(), 1));
    }
    let mut out = format!("Pf\n{width} {height}\n-1.0\n").into_bytes();
    for j in (0..height).rev() {
        for i in 0..width {
            out.extend_from_slice(&(data[j * width + i] as f32).to_le_bytes());
        }
    }
    fs::write(path, out)?;
    Ok(())
}

pub fn read_pfm(path: &Path) -> Result<(usize, usize, Vec<f64>)> {
    let bytes = fs::read(path)?;
    let mut fields = Vec::new();
    let mut pos = 0;
    while fields.len() < 4 && pos < bytes.len() {
        while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        fields.push(String::from_utf8_lossy(&bytes[start..pos]).to_string());
    }
    pos += 1;
    if fields.len() < 4 || fields[0] != "Pf" {
        return Err(Error::parse(1, "not a single-channel PFM"));
    }
    let w: usize = fields[1].parse().map_err(|_| Error::parse(2, "bad width"))?;
    let h: usize = fields[2].parse().map_err(|_| Error::parse(2, "bad height"))?;
    let scale: f64 = fields[3].parse().map_err(|_| Error::parse(3, "bad scale"))?;
    let body = &bytes[pos.min(bytes.len())..];
    if body.len() < 4 * w * h {
        return Err(Error::parse(4, "truncated PFM body"));
    }
    let mut data = vec![0.0; w * h];
    for j in 0..h {
        for i in 0..w {
            let k = 4 * ((h - 1 - j) * w + i);
            let raw = [body[k], body[k + 1], body[k + 2], body[k + 3]];
            let v = if scale < 0.0 {
                f32::from_le_bytes(raw)
            } else {
                f32::from_be_bytes(raw)
            };
            data[j * w + i] = v as f64;
        }
    }
    Ok((w, h, data))
}

pub fn write_depth_pfm(depth: &DepthField, path: &Path) -> Result<()> {
    write_pfm(depth.frame.width, depth.frame.height, &depth.data, path)
}

pub fn read_depth_pfm(path: &Path, frame: RasterFrame) -> Result<DepthField> {
    let (w, h, data) = read_pfm(path)?;
    if w != frame.width || h != frame.height {
        return Err(Error::DimensionMismatch(w, h, frame.width, frame.height));
    }
    Ok(DepthField { frame, data })
}

/// Header of [`correspondences_csv`].
pub const CORRESPONDENCE_HEADER: [&str; 8] = ["ref_index", "cur_index", "ref_x", "ref_y", "cur_x", "cur_y", "dx", "dy"];

/// One row per matched marker, pixel units; the last column is the stretch.
pub fn correspondences_csv(corr: &[Correspondence]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = CORRESPONDENCE_HEADER.to_vec();
    header.push("stretch");
    w.write_record(&header)?;
    for c in corr {
        let d = c.displacement();
        w.write_record([
            c.ref_index.to_string(),
            c.cur_index.to_string(),
            format!("{:.4}", c.reference.x),
            format!("{:.4}", c.reference.y),
            format!("{:.4}", c.current.x),
            format!("{:.4}", c.current.y),
            format!("{:.4}", d.x),
            format!("{:.4}", d.y),
            format!("{:.5}", c.stretch),
        ])?;
    }
    finish(w)
}

pub(crate) fn finish(w: csv::Writer<Vec<u8>>) -> Result<String> {
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// Writes `contents` next to `path` and renames it into place.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, contents)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn png_round_trip_is_quantisation() {
        let dir = tempfile::tempdir().unwrap();
        let mut img = TactileImage::filled(5, 4, Rgb::new(0.1, 0.5, 0.9), Mechanism::Imm);
        img.set(2, 3, Rgb::new(0.333, 0.0, 1.0));
        let p = dir.path().join("a.png");
        write_png(&img, &p).unwrap();
        let back = read_png(&p, Mechanism::Imm).unwrap();
        assert_eq!(back, img.quantized());
    }

    #[test]
    fn pfm_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let data: Vec<f64> = (0..12).map(|k| k as f64 * 0.25).collect();
        let p = dir.path().join("d.pfm");
        write_pfm(4, 3, &data, &p).unwrap();
        assert_eq!(read_pfm(&p).unwrap(), (4, 3, data));
    }

    #[test]
    fn filenames_carry_id_and_mechanism() {
        assert_eq!(frame_filename("contact", 7, Mechanism::Mdm), "contact_000007_mdm.png");
    }
}
