//! Flat-file emission: CSV tables and 16-bit binary PGM images with a
//! sidecar recording the affine value scale. Float formatting is fixed so
//! reruns with identical inputs produce byte-identical files.

use crate::error::Result;
use std::io::Write;
use std::path::Path;

pub fn fmt_f64(v: f64) -> String {
    format!("{v:.12e}")
}

pub fn write_csv(path: &Path, header: &str, rows: &[Vec<String>]) -> Result<()> {
    let mut out = String::with_capacity(64 * (rows.len() + 1));
    out.push_str(header);
    out.push('\n');
    for row in rows {
        out.push_str(&row.join(","));
        out.push('\n');
    }
    std::fs::write(path, out)?;
    Ok(())
}

/// Binary PGM (P5), row-major, 16 bit big-endian, autoscaled to the value
/// range; the sidecar `<name>.scale.txt` records the affine mapping.
pub fn write_pgm16(path: &Path, width: usize, height: usize, values: &[f64]) -> Result<()> {
    assert_eq!(values.len(), width * height);
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for v in values {
        lo = lo.min(*v);
        hi = hi.max(*v);
    }
    if values.is_empty() {
        lo = 0.0;
        hi = 0.0;
    }
    let span = hi - lo;
    let mut buf = Vec::with_capacity(32 + 2 * values.len());
    write!(&mut buf, "P5\n{width} {height}\n65535\n").expect("in-memory write");
    for v in values {
        let t = if span > 0.0 { (v - lo) / span } else { 0.0 };
        let p = (t * 65535.0).round().clamp(0.0, 65535.0) as u16;
        buf.extend_from_slice(&p.to_be_bytes());
    }
    std::fs::write(path, buf)?;
    let sidecar = path.with_extension("scale.txt");
    std::fs::write(
        sidecar,
        format!(
            "min {}\nmax {}\nmapping value = min + (max - min) * pixel / 65535\n",
            fmt_f64(lo),
            fmt_f64(hi)
        ),
    )?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pgm_roundtrip_header_and_scale() {
        let dir = std::env::temp_dir().join("hyperstab_io_test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("field.pgm");
        let values = vec![0.0, 0.5, 1.0, -1.0];
        write_pgm16(&path, 2, 2, &values).unwrap();
        let bytes = std::fs::read(&path).unwrap();
        assert!(bytes.starts_with(b"P5\n2 2\n65535\n"));
        assert_eq!(bytes.len(), b"P5\n2 2\n65535\n".len() + 8);
        let scale = std::fs::read_to_string(dir.join("field.scale.txt")).unwrap();
        assert!(scale.contains("min -1.000000000000e0"));
        assert!(scale.contains("max 1.000000000000e0"));
        std::fs::remove_dir_all(&dir).ok();
    }

    #[test]
    fn csv_bytes_are_deterministic() {
        let dir = std::env::temp_dir().join("hyperstab_io_test_csv");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("t.csv");
        let rows = vec![vec![fmt_f64(1.0 / 3.0), "7".to_string()]];
        write_csv(&path, "a,b", &rows).unwrap();
        let first = std::fs::read(&path).unwrap();
        write_csv(&path, "a,b", &rows).unwrap();
        assert_eq!(first, std::fs::read(&path).unwrap());
        std::fs::remove_dir_all(&dir).ok();
    }
}
