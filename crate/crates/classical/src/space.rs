//! Cusp-form spaces loaded from q-expansion fixtures, and their evaluation
//! anywhere in the upper half plane through Gamma0(N) reduction.

use std::path::{Path, PathBuf};

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use hecke_core::arith::modular::{egcd, gcd};
use hecke_core::arith::DirChar;

use crate::error::{ClassicalError, Result};
use crate::qexp::{q_powers, tail_bound, QExpansion, IM_FLOOR};
use crate::slash::SlashMatrix;

/// Minimum number of stored coefficients.
pub const MIN_PRECISION: usize = 200;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FixtureChar {
    pub modulus: u64,
    pub conrey: u64,
    #[serde(default)]
    pub order: Option<u64>,
    #[serde(default)]
    pub conductor: Option<u64>,
    /// Exponents e with chi(u) = exp(2 pi i e / order), null off units.
    #[serde(default)]
    pub value_exponents: Option<Vec<Option<u64>>>,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct FixtureDims {
    pub cusp: usize,
    pub new: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Fixture {
    pub level: u64,
    pub weight: u32,
    pub character: FixtureChar,
    pub precision: usize,
    pub basis: Vec<Vec<[f64; 2]>>,
    #[serde(default)]
    pub dimensions: Option<FixtureDims>,
    #[serde(default)]
    pub provenance: String,
}

#[derive(Clone, Debug)]
pub struct CuspSpace {
    pub id: String,
    pub level: u64,
    pub weight: u32,
    pub chi: DirChar,
    /// chi(u) for u mod N (zero off units).
    pub chi_values: Vec<Complex64>,
    pub basis: Vec<QExpansion>,
    pub precision: usize,
    pub dims: Option<FixtureDims>,
    pub provenance: String,
    growth: f64,
}

/// File name used for a space in a fixture directory.
pub fn fixture_name(level: u64, weight: u32, conrey: u64) -> String {
    format!("{level}.{weight}.{conrey}.json")
}

impl CuspSpace {
    pub fn from_fixture(fx: Fixture, id: &str) -> Result<Self> {
        let n = fx.level;
        if fx.character.modulus != n {
            return Err(ClassicalError::Parse(id.into(), "character modulus differs from level".into()));
        }
        let chi = DirChar::from_conrey(n, fx.character.conrey % n.max(1))?;
        if let Some(vals) = &fx.character.value_exponents {
            let ord = fx.character.order.unwrap_or(chi.order());
            if vals.len() as u64 != n {
                return Err(ClassicalError::CharacterMismatch(id.into()));
            }
            for (u, v) in vals.iter().enumerate() {
                let ours = chi.exp(u as i64);
                let same = match (ours, v) {
                    (None, None) => true,
                    (Some(a), Some(b)) => a * ord == b * chi.order(),
                    _ => n == 1,
                };
                if !same {
                    return Err(ClassicalError::CharacterMismatch(id.into()));
                }
            }
        }
        let parity = chi.parity();
        let want = if fx.weight.is_multiple_of(2) { 1 } else { -1 };
        if parity != want {
            return Err(ClassicalError::Parity {
                chi_minus_one: parity,
                weight: fx.weight,
            });
        }
        if !fx.basis.is_empty() && fx.precision < MIN_PRECISION {
            return Err(ClassicalError::Precision {
                have: fx.precision,
                need: MIN_PRECISION,
            });
        }
        let mut basis = Vec::new();
        for (i, f) in fx.basis.iter().enumerate() {
            if f.len() != fx.precision {
                return Err(ClassicalError::Parse(id.into(), format!("form {i} has {} coefficients", f.len())));
            }
            let coeffs = f.iter().map(|[re, im]| Complex64::new(*re, *im)).collect();
            basis.push(QExpansion::new(fx.weight, coeffs));
        }
        if !basis.is_empty() {
            let rows = basis.len();
            let cols = fx.precision.min(8 * rows + 60);
            let m = DMatrix::from_fn(rows, cols, |i, j| basis[i].coeffs[j] / ((j + 1) as f64).powf(fx.weight as f64 / 2.0));
            let sv = m.singular_values();
            let (mx, mn) = (sv.max(), sv.min());
            if mx == 0.0 || mn / mx < 1e-10 {
                return Err(ClassicalError::Dependent(if mx == 0.0 { 0.0 } else { mn / mx }));
            }
        }
        let chi_values = (0..n).map(|u| chi.value_c64(u as i64)).collect();
        let growth = basis.iter().map(|f| f.growth).fold(0.0, f64::max);
        Ok(CuspSpace {
            id: id.into(),
            level: n,
            weight: fx.weight,
            chi,
            chi_values,
            basis,
            precision: fx.precision,
            dims: fx.dimensions,
            provenance: fx.provenance,
            growth,
        })
    }

    /// The zero space, used where the dimension formula rules out any forms.
    pub fn zero(level: u64, weight: u32, chi: DirChar) -> Self {
        CuspSpace {
            id: fixture_name(level, weight, chi.conrey_label()).trim_end_matches(".json").to_string(),
            level,
            weight,
            chi_values: (0..level).map(|u| chi.value_c64(u as i64)).collect(),
            chi,
            basis: vec![],
            precision: 0,
            dims: Some(FixtureDims { cusp: 0, new: 0 }),
            provenance: "dimension formula".into(),
            growth: 0.0,
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| ClassicalError::Io {
            path: path.display().to_string(),
            source: e,
        })?;
        let fx: Fixture = serde_json::from_str(&text)
            .map_err(|e| ClassicalError::Parse(path.display().to_string(), e.to_string()))?;
        let id = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        Self::from_fixture(fx, &id)
    }

    /// Load the space for (level, weight, chi) from a fixture directory.
    pub fn find(dir: &Path, level: u64, weight: u32, chi: &DirChar) -> Result<Self> {
        let path: PathBuf = dir.join(fixture_name(level, weight, chi.conrey_label()));
        if !path.exists() {
            return Err(ClassicalError::MissingFixture(path.display().to_string()));
        }
        Self::load(&path)
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn chi_at(&self, d: i64) -> Complex64 {
        self.chi_values[d.rem_euclid(self.level as i64) as usize]
    }

    /// Values of every basis form at w.
    pub fn eval_all(&self, w: Complex64) -> Result<Vec<Complex64>> {
        let (z, factor) = reduce_gamma0(w, self.level, |d| self.chi_at(d).conj(), self.weight);
        if z.im < IM_FLOOR {
            return Err(ClassicalError::BelowFloor(z.im, IM_FLOOR));
        }
        let pw = q_powers(z, self.precision);
        Ok(self
            .basis
            .iter()
            .map(|f| factor * f.coeffs.iter().zip(&pw).map(|(a, q)| a * q).sum::<Complex64>())
            .collect())
    }

    /// Tail bound of the truncated series at height y.
    pub fn tail_bound(&self, y: f64) -> f64 {
        tail_bound(self.growth, self.weight, self.precision, y)
    }

    /// Values of f | A at z for every basis form.
    pub fn slash_all(&self, a: &SlashMatrix, z: Complex64) -> Result<Vec<Complex64>> {
        let w = a.act(z);
        let s = a.automorphy(z, self.weight);
        Ok(self.eval_all(w)?.into_iter().map(|v| s * v).collect())
    }
}

/// Height of w after moving it by Gamma0(N) towards the cusp at infinity.
pub fn reduced_height(w: Complex64, level: u64) -> f64 {
    reduce_gamma0(w, level, |_| Complex64::new(1.0, 0.0), 0).0.im
}

/// Move w up by elements of Gamma0(N); returns the new point and the factor with
/// f(w) = factor f(w') for f in S_k(Gamma0(N), chi) (`cbar` gives conj(chi(d))).
pub fn reduce_gamma0(
    mut w: Complex64,
    level: u64,
    cbar: impl Fn(i64) -> Complex64,
    weight: u32,
) -> (Complex64, Complex64) {
    let n = level as i64;
    let mut factor = Complex64::new(1.0, 0.0);
    for _ in 0..16 {
        w.re -= w.re.round();
        let mut best: Option<(f64, i64, i64)> = None;
        let tmax = (1.0 / (n as f64 * w.im)).floor() as i64 + 1;
        for t in 1..=tmax {
            let c = n * t;
            let d0 = (-(c as f64) * w.re).floor() as i64;
            for d in (d0 - 1)..=(d0 + 2) {
                if gcd(c.unsigned_abs(), d.unsigned_abs()) != 1 {
                    continue;
                }
                let h = w.im / (w * c as f64 + d as f64).norm_sqr();
                if h > w.im * (1.0 + 1e-12) && best.is_none_or(|(bh, _, _)| h > bh) {
                    best = Some((h, c, d));
                }
            }
        }
        let Some((_, c, d)) = best else { break };
        // a d - b c = 1
        let (g, x, y) = egcd(d, c);
        let (a, b) = (x * g, -y * g);
        debug_assert_eq!(a * d - b * c, 1);
        let j = w * c as f64 + d as f64;
        factor *= cbar(d) * j.powi(-(weight as i32));
        w = (w * a as f64 + b as f64) / j;
    }
    w.re -= w.re.round();
    (w, factor)
}
