//! Image file reading and writing with extension dispatch.
//!
//! PPM (binary `P6`) is always available and bit-exact. PNG support
//! (8-bit RGB only) is compiled in behind the `png` cargo feature.

use std::path::Path;

use dustclear_core::ppm::{self, PpmError};
use dustclear_core::Raster8;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum IoError {
    #[error(transparent)]
    Ppm(#[from] PpmError),
    #[error("i/o failure: {0}")]
    Io(#[from] std::io::Error),
    #[error("unsupported image extension {ext:?}; supported: {supported}")]
    UnsupportedExtension {
        ext: String,
        supported: &'static str,
    },
    #[cfg(feature = "png")]
    #[error("png decode failure: {0}")]
    PngDecode(#[from] png::DecodingError),
    #[cfg(feature = "png")]
    #[error("png encode failure: {0}")]
    PngEncode(#[from] png::EncodingError),
    #[cfg(feature = "png")]
    #[error("unsupported png layout {color:?}/{depth:?}; only 8-bit RGB is handled")]
    PngLayout {
        color: png::ColorType,
        depth: png::BitDepth,
    },
    #[cfg(feature = "png")]
    #[error("png dimensions are invalid: {0}")]
    PngShape(dustclear_core::CoreError),
}

#[cfg(feature = "png")]
const SUPPORTED: &str = "ppm, png";
#[cfg(not(feature = "png"))]
const SUPPORTED: &str = "ppm (png needs the `png` build feature)";

fn extension_of(path: &Path) -> String {
    path.extension()
        .map(|e| e.to_string_lossy().to_ascii_lowercase())
        .unwrap_or_default()
}

/// True when [`read_image`]/[`write_image`] can handle the path.
pub fn supported_extension(path: &Path) -> bool {
    let ext = extension_of(path);
    ext == "ppm" || (cfg!(feature = "png") && ext == "png")
}

pub fn read_image(path: &Path) -> Result<Raster8, IoError> {
    match extension_of(path).as_str() {
        "ppm" => Ok(ppm::read_ppm(path)?),
        #[cfg(feature = "png")]
        "png" => read_png(path),
        ext => Err(IoError::UnsupportedExtension {
            ext: ext.to_string(),
            supported: SUPPORTED,
        }),
    }
}

pub fn write_image(path: &Path, img: &Raster8) -> Result<(), IoError> {
    match extension_of(path).as_str() {
        "ppm" => Ok(ppm::write_ppm(path, img)?),
        #[cfg(feature = "png")]
        "png" => write_png(path, img),
        ext => Err(IoError::UnsupportedExtension {
            ext: ext.to_string(),
            supported: SUPPORTED,
        }),
    }
}

#[cfg(feature = "png")]
fn read_png(path: &Path) -> Result<Raster8, IoError> {
    let decoder = png::Decoder::new(std::io::BufReader::new(std::fs::File::open(path)?));
    let mut reader = decoder.read_info()?;
    let mut buf = vec![0u8; reader.output_buffer_size()];
    let info = reader.next_frame(&mut buf)?;
    if info.color_type != png::ColorType::Rgb || info.bit_depth != png::BitDepth::Eight {
        return Err(IoError::PngLayout {
            color: info.color_type,
            depth: info.bit_depth,
        });
    }
    buf.truncate(info.buffer_size());
    Raster8::new(info.width as usize, info.height as usize, buf).map_err(IoError::PngShape)
}

#[cfg(feature = "png")]
fn write_png(path: &Path, img: &Raster8) -> Result<(), IoError> {
    let file = std::fs::File::create(path)?;
    let mut encoder = png::Encoder::new(
        std::io::BufWriter::new(file),
        img.width() as u32,
        img.height() as u32,
    );
    encoder.set_color(png::ColorType::Rgb);
    encoder.set_depth(png::BitDepth::Eight);
    let mut writer = encoder.write_header()?;
    writer.write_image_data(img.data())?;
    Ok(())
}
