//! File emission: atomic writes and heatmap rendering.

use std::io::Write;
use std::path::{Path, PathBuf};

use image::{ImageBuffer, Rgb};
use polariton_core::DispersionMap;

use crate::error::CliError;

pub const OUT_DIR_ENV: &str = "POLARITON_OUT_DIR";

/// Output directory: command-line flag, then environment, then config.
pub fn output_dir(flag: Option<&Path>, config: &Path) -> PathBuf {
    flag.map(Path::to_path_buf)
        .or_else(|| std::env::var_os(OUT_DIR_ENV).filter(|v| !v.is_empty()).map(PathBuf::from))
        .unwrap_or_else(|| config.to_path_buf())
}

/// Writes `bytes` to a temporary file next to `path`, then renames it over
/// `path`, so readers never observe a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    std::fs::create_dir_all(dir).map_err(|e| CliError::Output(format!("cannot create {}: {e}", dir.display())))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)
        .map_err(|e| CliError::Output(format!("cannot create a temporary file in {}: {e}", dir.display())))?;
    tmp.write_all(bytes)
        .and_then(|_| tmp.as_file().sync_all())
        .map_err(|e| CliError::Output(format!("cannot write {}: {e}", path.display())))?;
    tmp.persist(path)
        .map_err(|e| CliError::Output(format!("cannot move result into {}: {}", path.display(), e.error)))?;
    Ok(())
}

// Perceptually ordered ramp from dark blue (0) to pale yellow (1).
const RAMP: [[f64; 3]; 5] = [
    [13.0, 8.0, 135.0],
    [126.0, 3.0, 168.0],
    [204.0, 71.0, 120.0],
    [248.0, 149.0, 64.0],
    [240.0, 249.0, 33.0],
];

fn color(v: f64) -> Rgb<u8> {
    let v = if v.is_finite() { v.clamp(0.0, 1.0) } else { 0.0 };
    let x = v * (RAMP.len() - 1) as f64;
    let i = (x.floor() as usize).min(RAMP.len() - 2);
    let w = x - i as f64;
    let c = |k: usize| (RAMP[i][k] + w * (RAMP[i + 1][k] - RAMP[i][k])).round() as u8;
    Rgb([c(0), c(1), c(2)])
}

/// One pixel per grid point; momentum runs left to right and energy bottom
/// to top. Values are mapped linearly over [0, 1].
pub fn heatmap_png(map: &DispersionMap) -> Result<Vec<u8>, CliError> {
    let (ne, nk) = map.shape();
    let img = ImageBuffer::from_fn(nk as u32, ne as u32, |x, y| color(map.values[ne - 1 - y as usize][x as usize]));
    let mut bytes = Vec::new();
    img.write_to(&mut std::io::Cursor::new(&mut bytes), image::ImageFormat::Png)
        .map_err(|e| CliError::Output(format!("cannot encode heatmap: {e}")))?;
    Ok(bytes)
}
