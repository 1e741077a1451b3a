//! `.sf2` field dumps: one line of compact JSON header, then the full-plane
//! coefficients as little-endian `f64` pairs `(re, im)`, component after
//! component, each in row-major order over `k1, k2 = -n/2 .. n/2-1`.

use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::field::{Arity, SpectralField};
use super::grid::Grid2;
use crate::error::{Error, Result};

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct Sf2Header {
    pub format: String,
    pub version: u32,
    pub arity: Arity,
    pub n: usize,
    pub components: usize,
    pub band: usize,
    pub sha256: String,
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

fn payload(f: &SpectralField) -> Vec<u8> {
    let n = f.n() as i64;
    let h = n / 2;
    let mut out = Vec::with_capacity((n * n) as usize * 16 * f.arity().components());
    for c in 0..f.arity().components() {
        for k1 in -h..h {
            for k2 in -h..h {
                let z = f.coeff(c, k1, k2);
                out.extend_from_slice(&z.re.to_le_bytes());
                out.extend_from_slice(&z.im.to_le_bytes());
            }
        }
    }
    out
}

pub fn write_sf2<W: Write>(f: &SpectralField, mut w: W) -> Result<()> {
    let data = payload(f);
    let header = Sf2Header {
        format: "sf2".into(),
        version: 1,
        arity: f.arity(),
        n: f.n(),
        components: f.arity().components(),
        band: f.band(),
        sha256: hex(&Sha256::digest(&data)),
    };
    serde_json::to_writer(&mut w, &header)?;
    w.write_all(b"\n")?;
    w.write_all(&data)?;
    Ok(())
}

pub fn read_sf2<R: Read>(r: R) -> Result<SpectralField> {
    let mut r = BufReader::new(r);
    let mut line = String::new();
    r.read_line(&mut line)?;
    let header: Sf2Header = serde_json::from_str(line.trim_end()).map_err(|e| Error::Integrity(format!("bad header: {e}")))?;
    if header.format != "sf2" || header.version != 1 || header.components != header.arity.components() {
        return Err(Error::Integrity("unsupported or inconsistent header".into()));
    }
    let grid = Grid2::new(header.n).map_err(|_| Error::Integrity(format!("bad grid size {}", header.n)))?;
    let n = header.n;
    let expected = n * n * 16 * header.components;
    let mut data = Vec::with_capacity(expected);
    r.read_to_end(&mut data)?;
    if data.len() != expected {
        return Err(Error::Integrity(format!("payload has {} bytes, expected {expected}", data.len())));
    }
    if hex(&Sha256::digest(&data)) != header.sha256 {
        return Err(Error::Integrity("payload checksum mismatch".into()));
    }
    let h = (n / 2) as i64;
    let at = |c: usize, k1: i64, k2: i64| -> Complex64 {
        let off = ((c * n + (k1 + h) as usize) * n + (k2 + h) as usize) * 16;
        let re = f64::from_le_bytes(data[off..off + 8].try_into().unwrap());
        let im = f64::from_le_bytes(data[off + 8..off + 16].try_into().unwrap());
        Complex64::new(re, im)
    };
    let mut comps = Vec::with_capacity(header.components);
    let mut scale = 0.0f64;
    let mut asym = 0.0f64;
    for c in 0..header.components {
        let mut comp = vec![Complex64::new(0.0, 0.0); n * grid.half()];
        for k2 in 0..=h {
            for k1 in -h..h {
                let z = if k2 == h { at(c, if k1 == -h { -h } else { -k1 }, -h).conj() } else { at(c, k1, k2) };
                scale = scale.max(z.norm());
                if k2 < h && k1 > -h && k2 > -h {
                    asym = asym.max((at(c, -k1, -k2) - z.conj()).norm());
                }
                comp[k2 as usize * n + grid.index(k1)] = z;
            }
        }
        comps.push(comp);
    }
    if asym > 1e-12 * scale.max(f64::MIN_POSITIVE) {
        return Err(Error::Integrity(format!("coefficients are not Hermitian (defect {asym:e})")));
    }
    let f = SpectralField::from_half_spectrum(header.arity, grid, comps)?;
    if f.band() > header.band {
        return Err(Error::Integrity(format!("nonzero modes beyond declared band {}", header.band)));
    }
    Ok(f)
}

pub fn save(f: &SpectralField, path: &Path) -> Result<()> {
    let file = std::fs::File::create(path)?;
    let mut w = std::io::BufWriter::new(file);
    write_sf2(f, &mut w)?;
    w.flush()?;
    Ok(())
}

pub fn load(path: &Path) -> Result<SpectralField> {
    read_sf2(std::fs::File::open(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> SpectralField {
        let g = Grid2::new(16).unwrap();
        let mut f = SpectralField::zeros(Arity::Vector2, g);
        f.add_mode(0, [0, 1], Complex64::new(0.0, -0.5)).unwrap();
        f.add_mode(1, [3, -2], Complex64::new(0.25, 0.125)).unwrap();
        f.add_mode(1, [0, 0], Complex64::new(1.5, 0.0)).unwrap();
        f
    }

    #[test]
    fn roundtrip_is_bit_exact() {
        let f = sample();
        let mut buf = Vec::new();
        write_sf2(&f, &mut buf).unwrap();
        let g = read_sf2(&buf[..]).unwrap();
        assert_eq!(f, g);
    }

    #[test]
    fn corruption_is_detected() {
        let f = sample();
        let mut buf = Vec::new();
        write_sf2(&f, &mut buf).unwrap();
        let last = buf.len() - 3;
        buf[last] ^= 0x40;
        assert!(matches!(read_sf2(&buf[..]), Err(Error::Integrity(_))));
        buf.truncate(buf.len() - 100);
        assert!(matches!(read_sf2(&buf[..]), Err(Error::Integrity(_))));
        assert!(matches!(read_sf2(&b"{not json\n"[..]), Err(Error::Integrity(_))));
    }
}
