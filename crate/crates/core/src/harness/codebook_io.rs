//! Codebook files: TOML with every complex number stored as a `[re, im]` pair of
//! shortest round-trip decimals, so a save/load cycle is bit-exact.

use std::path::Path;

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::admm::Codebook;
use crate::error::{Error, Result};
use crate::scalar::CVector;
use crate::steering::ArrayGeometry;

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CodebookFile {
    elements: usize,
    spacing: f64,
    entry: Vec<EntryFile>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EntryFile {
    /// Informational; the exact level is `delta`.
    delta_magnitude: f64,
    delta_phase_deg: f64,
    delta: [f64; 2],
    weights: Vec<[f64; 2]>,
}

pub fn codebook_to_toml(codebook: &Codebook<f64>) -> String {
    let file = CodebookFile {
        elements: codebook.geometry.elements(),
        spacing: codebook.geometry.spacing(),
        entry: codebook
            .vectors
            .iter()
            .zip(&codebook.deltas)
            .map(|(h, d)| EntryFile {
                delta_magnitude: d.norm(),
                delta_phase_deg: d.arg().to_degrees(),
                delta: [d.re, d.im],
                weights: h.iter().map(|z| [z.re, z.im]).collect(),
            })
            .collect(),
    };
    toml::to_string(&file).expect("codebook serializes")
}

/// Parses a codebook; diagnostics are not stored and come back empty.
pub fn codebook_from_toml(text: &str, file: &Path) -> Result<Codebook<f64>> {
    let parsed: CodebookFile = toml::from_str(text).map_err(|e| Error::Parse {
        file: file.to_path_buf(),
        message: e.to_string(),
    })?;
    let geometry = ArrayGeometry::new(parsed.elements, parsed.spacing)?;
    let deltas = parsed.entry.iter().map(|e| Complex::new(e.delta[0], e.delta[1])).collect();
    let vectors = parsed
        .entry
        .iter()
        .map(|e| CVector::from_iterator(e.weights.len(), e.weights.iter().map(|p| Complex::new(p[0], p[1]))))
        .collect();
    Codebook::new(geometry, vectors, deltas, Vec::new())
}

pub fn save_codebook(codebook: &Codebook<f64>, path: &Path) -> Result<()> {
    std::fs::write(path, codebook_to_toml(codebook)).map_err(|e| Error::io(path, e))
}

pub fn load_codebook(path: &Path) -> Result<Codebook<f64>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    codebook_from_toml(&text, path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    #[test]
    fn round_trip_is_bit_exact() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let geometry = ArrayGeometry::half_wavelength(7).unwrap();
        let vectors: Vec<CVector<f64>> = (0..4)
            .map(|_| CVector::from_fn(7, |_, _| Complex::from_polar(1.0, rng.random::<f64>() * 6.283)))
            .collect();
        let mut deltas: Vec<Complex<f64>> = (0..4).map(|_| Complex::new(rng.random(), rng.random())).collect();
        deltas[0] = Complex::new(-0.0, 1e-300);
        let cb = Codebook::new(geometry, vectors, deltas, Vec::new()).unwrap();
        let back = codebook_from_toml(&codebook_to_toml(&cb), Path::new("x")).unwrap();
        for (a, b) in cb.vectors.iter().zip(&back.vectors) {
            for (x, y) in a.iter().zip(b.iter()) {
                assert_eq!(x.re.to_bits(), y.re.to_bits());
                assert_eq!(x.im.to_bits(), y.im.to_bits());
            }
        }
        for (x, y) in cb.deltas.iter().zip(&back.deltas) {
            assert_eq!((x.re.to_bits(), x.im.to_bits()), (y.re.to_bits(), y.im.to_bits()));
        }
        assert_eq!(back.geometry, cb.geometry);
    }

    #[test]
    fn size_must_be_power_of_two() {
        let entry = "[[entry]]\ndelta_magnitude = 0.0\ndelta_phase_deg = 0.0\ndelta = [0.0, 0.0]\nweights = [[1.0, 0.0]]\n";
        let text = format!("elements = 1\nspacing = 0.5\n{}", entry.repeat(3));
        assert!(codebook_from_toml(&text, Path::new("x")).is_err());
    }
}
