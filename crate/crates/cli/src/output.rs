//! Atomic file output and the PPM heatmap.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use tempfile::NamedTempFile;

use crate::error::{CliError, CliResult};

/// Writes through a temporary file in the target directory, then renames it into place.
pub fn write_atomic<T>(
    path: &Path,
    body: impl FnOnce(&mut BufWriter<&mut NamedTempFile>) -> std::io::Result<T>,
) -> CliResult<T> {
    let context = format!("writing {}", path.display());
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    if !dir.is_dir() {
        fs::create_dir_all(dir).map_err(|e| CliError::io(&context, e))?;
    }
    let mut tmp = NamedTempFile::new_in(dir).map_err(|e| CliError::io(&context, e))?;
    let out = {
        let mut w = BufWriter::new(&mut tmp);
        let out = body(&mut w).map_err(|e| CliError::io(&context, e))?;
        w.flush().map_err(|e| CliError::io(&context, e))?;
        out
    };
    tmp.persist(path).map_err(|e| CliError::io(&context, e.error))?;
    Ok(out)
}

/// Blue-to-red color for a value in `[0, 1]`.
fn heat(x: f64) -> [u8; 3] {
    let x = x.clamp(0.0, 1.0);
    let r = (255.0 * x).round() as u8;
    let g = (255.0 * (1.0 - (2.0 * x - 1.0).abs())).round() as u8;
    let b = (255.0 * (1.0 - x)).round() as u8;
    [r, g, b]
}

/// Binary PPM (P6) of a row-major `side × side` value array, min-max normalized.
pub fn write_ppm(path: &Path, side: usize, values: &[f64]) -> CliResult<()> {
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let span = hi - lo;
    write_atomic(path, |w| {
        write!(w, "P6\n{side} {side}\n255\n")?;
        for &v in values {
            let x = if span > 0.0 { (v - lo) / span } else { 0.5 };
            w.write_all(&heat(x))?;
        }
        Ok(())
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ppm_layout() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("x.ppm");
        write_ppm(&p, 2, &[0.0, 1.0, 0.5, 0.25]).unwrap();
        let bytes = fs::read(&p).unwrap();
        let header = b"P6\n2 2\n255\n";
        assert_eq!(&bytes[..header.len()], header);
        assert_eq!(bytes.len(), header.len() + 12);
        assert_eq!(&bytes[header.len()..header.len() + 3], &[0, 0, 255]);
    }

    #[test]
    fn atomic_write_replaces() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("out.txt");
        write_atomic(&p, |w| w.write_all(b"one")).unwrap();
        write_atomic(&p, |w| w.write_all(b"two")).unwrap();
        assert_eq!(fs::read_to_string(&p).unwrap(), "two");
        assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 1);
    }
}
