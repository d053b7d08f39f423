//! TOML documents describing processes and positive laws.
//!
//! ```toml
//! type = "bm_drift"
//! a = 1.0
//! sigma = 1.4142135623730951
//! ```
//!
//! Every document carries a `type` tag; unknown fields are errors.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::levy::{DensityShape, LevyMeasureSpec, LevyTriplet, Side};
use crate::range::PositiveLawSpec;
use crate::stable::{StableComponent, StableConvolutionSpec};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AtomDoc {
    pub position: f64,
    pub mass: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum SideDoc {
    #[default]
    Positive,
    Negative,
}

impl From<SideDoc> for Side {
    fn from(s: SideDoc) -> Side {
        match s {
            SideDoc::Positive => Side::Positive,
            SideDoc::Negative => Side::Negative,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case", deny_unknown_fields)]
pub enum DensityDoc {
    /// `scale · x^power e^{−rate x}`
    ExpPoly {
        scale: f64,
        #[serde(default)]
        power: f64,
        rate: f64,
        #[serde(default)]
        side: SideDoc,
    },
    /// `scale · (shift + x)^power`
    ShiftedPower {
        scale: f64,
        shift: f64,
        power: f64,
        #[serde(default)]
        side: SideDoc,
    },
    /// `scale` on `[lo, hi]`
    Box {
        scale: f64,
        lo: f64,
        hi: f64,
        #[serde(default)]
        side: SideDoc,
    },
}

impl DensityDoc {
    pub fn to_measure(&self) -> Result<LevyMeasureSpec> {
        let (scale, shape, side) = match *self {
            DensityDoc::ExpPoly { scale, power, rate, side } => (scale, DensityShape::ExpPoly { power, rate }, side),
            DensityDoc::ShiftedPower { scale, shift, power, side } => {
                (scale, DensityShape::ShiftedPower { shift, power }, side)
            }
            DensityDoc::Box { scale, lo, hi, side } => (scale, DensityShape::Box { lo, hi }, side),
        };
        LevyMeasureSpec::density(scale, shape, side.into())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StableDoc {
    pub alpha: f64,
    pub c: f64,
    #[serde(default)]
    pub b: f64,
}

/// Lévy measure as a sum of atoms, densities and stable parts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct MeasureDoc {
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub atoms: Vec<AtomDoc>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub densities: Vec<DensityDoc>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub stable: Vec<StableDoc>,
}

impl MeasureDoc {
    pub fn to_measure(&self) -> Result<LevyMeasureSpec> {
        let mut parts = Vec::new();
        if !self.atoms.is_empty() {
            let list: Vec<(f64, f64)> = self.atoms.iter().map(|a| (a.position, a.mass)).collect();
            parts.push(LevyMeasureSpec::atoms(&list)?);
        }
        for d in &self.densities {
            parts.push(d.to_measure()?);
        }
        for s in &self.stable {
            parts.push(LevyMeasureSpec::stable(s.alpha, s.c, Side::Positive)?);
        }
        Ok(match parts.len() {
            0 => LevyMeasureSpec::Zero,
            1 => parts.pop().expect("one part"),
            _ => LevyMeasureSpec::Sum(parts),
        })
    }
}

/// One process or law document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum SpecDoc {
    /// `X_t = rate · t`
    Drift { rate: f64 },
    /// `X_t = σ B_t + a t`
    BmDrift { a: f64, sigma: f64 },
    /// Finite-variation process: drift plus finite jump measure.
    CompoundPoisson {
        #[serde(default)]
        drift: f64,
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        jumps: Vec<AtomDoc>,
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        densities: Vec<DensityDoc>,
    },
    /// Subordinator with drift `b` and Lévy density `c x^{−1−α}`.
    StableSubordinator {
        alpha: f64,
        c: f64,
        #[serde(default)]
        drift: f64,
    },
    /// Sum of independent processes.
    Composite { parts: Vec<SpecDoc> },
    /// Law `δ_c`.
    PointMass { c: f64 },
    /// Law of a sum of independent positive stable variables with drift.
    StableLaw { components: Vec<StableDoc> },
    /// Selfdecomposable law `∫_0^∞ e^{−t} dX_t` for a background
    /// subordinator `X` with the given drift and Lévy measure.
    Selfdecomposable {
        #[serde(default)]
        drift: f64,
        nu_x: MeasureDoc,
    },
    /// Law of `1/G` with `G` Gamma(shape, scale).
    InverseGamma { shape: f64, scale: f64 },
}

impl SpecDoc {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Spec(e.message().to_string()))
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Spec(e.to_string()))
    }

    pub fn type_name(&self) -> &'static str {
        match self {
            SpecDoc::Drift { .. } => "drift",
            SpecDoc::BmDrift { .. } => "bm_drift",
            SpecDoc::CompoundPoisson { .. } => "compound_poisson",
            SpecDoc::StableSubordinator { .. } => "stable_subordinator",
            SpecDoc::Composite { .. } => "composite",
            SpecDoc::PointMass { .. } => "point_mass",
            SpecDoc::StableLaw { .. } => "stable_law",
            SpecDoc::Selfdecomposable { .. } => "selfdecomposable",
            SpecDoc::InverseGamma { .. } => "inverse_gamma",
        }
    }

    /// Triplet of a process document; law-only documents are refused.
    pub fn to_triplet(&self) -> Result<LevyTriplet> {
        match self {
            SpecDoc::Drift { rate } => {
                if !rate.is_finite() {
                    return Err(Error::Spec("drift rate must be finite".into()));
                }
                Ok(LevyTriplet::deterministic(*rate))
            }
            SpecDoc::BmDrift { a, sigma } => {
                if !(*sigma >= 0.0) {
                    return Err(Error::Spec("sigma must be >= 0".into()));
                }
                LevyTriplet::brownian_with_drift(*a, *sigma)
            }
            SpecDoc::CompoundPoisson { drift, jumps, densities } => {
                let m = MeasureDoc { atoms: jumps.clone(), densities: densities.clone(), stable: vec![] }.to_measure()?;
                if !m.is_finite()? {
                    return Err(Error::Spec("compound Poisson jump measure must be finite".into()));
                }
                LevyTriplet::finite_variation(*drift, m)
            }
            SpecDoc::StableSubordinator { alpha, c, drift } => {
                if !(*alpha > 0.0 && *alpha < 1.0) {
                    return Err(Error::Spec(format!("stable subordinator needs alpha in (0, 1), got {alpha}")));
                }
                LevyTriplet::subordinator(*drift, LevyMeasureSpec::stable(*alpha, *c, Side::Positive)?)
            }
            SpecDoc::Composite { parts } => {
                if parts.is_empty() {
                    return Err(Error::Spec("composite needs at least one part".into()));
                }
                let ts = parts.iter().map(|p| p.to_triplet()).collect::<Result<Vec<_>>>()?;
                let gamma = ts.iter().map(|t| t.gamma).sum();
                let sigma2 = ts.iter().map(|t| t.sigma2).sum();
                let measures: Vec<LevyMeasureSpec> = ts.into_iter().map(|t| t.levy_measure).collect();
                LevyTriplet::new(gamma, sigma2, LevyMeasureSpec::Sum(measures))
            }
            other => Err(Error::Spec(format!("'{}' describes a law, not a process", other.type_name()))),
        }
    }

    /// Positive law described by the document; process documents give the
    /// law of `X₁`, which must be a subordinator.
    pub fn to_law(&self) -> Result<PositiveLawSpec> {
        match self {
            SpecDoc::PointMass { c } => PositiveLawSpec::point_mass(*c),
            SpecDoc::StableLaw { components } => {
                let comps = components.iter().map(|s| StableComponent { alpha: s.alpha, c: s.c, b: s.b }).collect();
                Ok(PositiveLawSpec::stable(StableConvolutionSpec::new(comps)?))
            }
            SpecDoc::Selfdecomposable { drift, nu_x } => PositiveLawSpec::selfdecomposable(*drift, nu_x.to_measure()?),
            SpecDoc::InverseGamma { shape, scale } => PositiveLawSpec::inverse_gamma(*shape, *scale),
            SpecDoc::StableSubordinator { alpha, c, drift } => {
                let comps = vec![StableComponent { alpha: *alpha, c: *c, b: *drift }];
                Ok(PositiveLawSpec::stable(StableConvolutionSpec::new(comps)?))
            }
            process => {
                let t = process.to_triplet()?;
                if !t.is_subordinator()? {
                    return Err(Error::Spec(format!("'{}' is not a subordinator; no positive law", process.type_name())));
                }
                PositiveLawSpec::infinitely_divisible(&t)
            }
        }
    }
}

impl SpecDoc {
    /// Document for a triplet built from drift, Gaussian part, atoms,
    /// parametric densities and positive stable parts of index below 1.
    /// `None` for anything else.
    pub fn from_triplet(t: &LevyTriplet) -> Option<SpecDoc> {
        let m = &t.levy_measure;
        if m.is_zero() {
            return Some(if t.sigma2 > 0.0 {
                SpecDoc::BmDrift { a: t.gamma, sigma: t.sigma2.sqrt() }
            } else {
                SpecDoc::Drift { rate: t.gamma }
            });
        }
        if t.sigma2 > 0.0 {
            return None;
        }
        let drift = t.fv_drift().ok()??;
        let mut parts = vec![SpecDoc::Drift { rate: drift }];
        let mut jumps = Vec::new();
        let mut densities = Vec::new();
        for c in m.components() {
            match c {
                LevyMeasureSpec::Atoms(atoms) => {
                    jumps.extend(atoms.iter().map(|a| AtomDoc { position: a.position, mass: a.mass }));
                }
                LevyMeasureSpec::Stable { alpha, c, side: Side::Positive } if *alpha < 1.0 => {
                    parts.push(SpecDoc::StableSubordinator { alpha: *alpha, c: *c, drift: 0.0 });
                }
                LevyMeasureSpec::Density(d) => {
                    let side = if d.side == Side::Positive { SideDoc::Positive } else { SideDoc::Negative };
                    densities.push(match d.shape {
                        DensityShape::ExpPoly { power, rate } => DensityDoc::ExpPoly { scale: d.scale, power, rate, side },
                        DensityShape::ShiftedPower { shift, power } => {
                            DensityDoc::ShiftedPower { scale: d.scale, shift, power, side }
                        }
                        DensityShape::Box { lo, hi } => DensityDoc::Box { scale: d.scale, lo, hi, side },
                    });
                }
                _ => return None,
            }
        }
        if !jumps.is_empty() || !densities.is_empty() {
            let cp = SpecDoc::CompoundPoisson { drift: 0.0, jumps, densities };
            if cp.to_triplet().is_err() {
                return None;
            }
            parts.push(cp);
        }
        if drift == 0.0 && parts.len() > 1 {
            parts.remove(0);
        }
        Some(if parts.len() == 1 { parts.pop().expect("one part") } else { SpecDoc::Composite { parts } })
    }
}

pub fn read_spec(path: &std::path::Path) -> Result<(SpecDoc, Vec<u8>)> {
    let bytes = std::fs::read(path).map_err(|e| Error::Spec(format!("cannot read {}: {e}", path.display())))?;
    let text = std::str::from_utf8(&bytes).map_err(|_| Error::Spec(format!("{} is not UTF-8", path.display())))?;
    Ok((SpecDoc::parse(text)?, bytes))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_each_process_type() {
        let t = SpecDoc::parse("type = \"drift\"\nrate = 2.0").unwrap().to_triplet().unwrap();
        assert_eq!(t, LevyTriplet::deterministic(2.0));
        let t = SpecDoc::parse("type = \"bm_drift\"\na = 1.0\nsigma = 2.0").unwrap().to_triplet().unwrap();
        assert_eq!((t.gamma, t.sigma2), (1.0, 4.0));
        let doc = r#"
type = "compound_poisson"
drift = 1.0
jumps = [{ position = 1.0, mass = 2.0 }, { position = -0.5, mass = 1.0 }]
densities = [{ shape = "exp_poly", scale = 1.0, rate = 2.0 }]
"#;
        let t = SpecDoc::parse(doc).unwrap().to_triplet().unwrap();
        assert_eq!(t.fv_drift().unwrap(), Some(1.0));
        let t = SpecDoc::parse("type = \"stable_subordinator\"\nalpha = 0.5\nc = 1.0").unwrap().to_triplet().unwrap();
        assert!(t.is_subordinator().unwrap());
        let doc = r#"
type = "composite"
parts = [{ type = "drift", rate = 1.0 }, { type = "bm_drift", a = 0.5, sigma = 1.0 }]
"#;
        let t = SpecDoc::parse(doc).unwrap().to_triplet().unwrap();
        assert_eq!((t.gamma, t.sigma2), (1.5, 1.0));
    }

    #[test]
    fn strict_parsing() {
        let e = SpecDoc::parse("type = \"drift\"\nrate = 1.0\nextra = 3").unwrap_err();
        assert_eq!(e.kind(), "spec");
        assert!(SpecDoc::parse("type = \"warp\"\nrate = 1.0").is_err());
        assert!(SpecDoc::parse("rate = 1.0").is_err());
        let law_only = SpecDoc::parse("type = \"point_mass\"\nc = 1.0").unwrap();
        assert!(matches!(law_only.to_triplet(), Err(Error::Spec(_))));
    }

    #[test]
    fn laws() {
        let d = SpecDoc::parse("type = \"stable_law\"\ncomponents = [{ alpha = 0.2, c = 1.0 }, { alpha = 0.5, c = 1.0 }]")
            .unwrap();
        assert!(d.to_law().unwrap().stable.is_some());
        let d = SpecDoc::parse(
            "type = \"selfdecomposable\"\n[nu_x]\ndensities = [{ shape = \"shifted_power\", scale = 1.0, shift = 1.0, power = -3.0 }]",
        )
        .unwrap();
        assert!(d.to_law().unwrap().k_at(1.0).is_some());
        assert!(SpecDoc::parse("type = \"bm_drift\"\na = 1.0\nsigma = 1.0").unwrap().to_law().is_err());
    }

    #[test]
    fn triplet_documents_round_trip() {
        let eta = crate::stable::stable_preimage(0.4, 1.0, 1.0, 1.0).unwrap();
        let doc = SpecDoc::from_triplet(&eta).unwrap();
        let back = doc.to_triplet().unwrap();
        assert_eq!(back.fv_drift().unwrap(), eta.fv_drift().unwrap());
        assert_eq!(back.levy_measure.components().len(), 2);
        let bm = LevyTriplet::brownian_with_drift(1.0, 2.0).unwrap();
        assert_eq!(SpecDoc::from_triplet(&bm), Some(SpecDoc::BmDrift { a: 1.0, sigma: 2.0 }));
        let half = crate::stable::stable_preimage(0.5, 1.0, 0.25, 1.0).unwrap();
        assert!(matches!(SpecDoc::from_triplet(&half), Some(SpecDoc::Drift { .. })));
    }

    #[test]
    fn toml_round_trip() {
        let d = SpecDoc::Composite {
            parts: vec![
                SpecDoc::Drift { rate: 1.0 },
                SpecDoc::CompoundPoisson {
                    drift: 0.0,
                    jumps: vec![AtomDoc { position: 1.0, mass: 0.5 }],
                    densities: vec![DensityDoc::Box { scale: 1.0, lo: 0.0, hi: 2.0, side: SideDoc::Positive }],
                },
            ],
        };
        assert_eq!(SpecDoc::parse(&d.to_toml().unwrap()).unwrap(), d);
    }
}
