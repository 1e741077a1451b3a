use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::fourier::{curl, Arity, SpectralField};
use crate::norms::magnitude_samples;

/// Scalar samples for display: the field itself, the vorticity of a vector
/// field, or the Frobenius magnitude of a tensor. Layout `i1 * n + i2`.
pub fn image_samples(f: &SpectralField) -> Result<Vec<f64>> {
    match f.arity() {
        Arity::Scalar => Ok(f.samples().remove(0)),
        Arity::Vector2 => Ok(curl(f)?.samples().remove(0)),
        Arity::SymTensor2 => Ok(magnitude_samples(f, f.grid())),
    }
}

/// Binary graymap, `x1` to the right and `x2` up, scaled linearly from the
/// minimum (0) to the maximum (255); a constant field is mid-gray.
pub fn write_pgm<W: Write>(samples: &[f64], n: usize, mut out: W) -> Result<()> {
    if samples.len() != n * n {
        return Err(Error::DimensionMismatch(format!("{} samples for a {n}x{n} image", samples.len())));
    }
    let lo = samples.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = samples.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut buf = Vec::with_capacity(n * n + 32);
    write!(buf, "P5\n{n} {n}\n255\n")?;
    for row in 0..n {
        let i2 = n - 1 - row;
        for i1 in 0..n {
            let v = samples[i1 * n + i2];
            let g = if hi > lo { ((v - lo) / (hi - lo) * 255.0).round() as u8 } else { 128 };
            buf.push(g);
        }
    }
    out.write_all(&buf)?;
    Ok(())
}

pub fn emit_image(f: &SpectralField, path: &Path) -> Result<()> {
    let s = image_samples(f)?;
    let file = std::fs::File::create(path)?;
    write_pgm(&s, f.n(), std::io::BufWriter::new(file))
}
