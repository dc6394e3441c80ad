//! Samplers and exact densities for the Laplace, Duchi and piecewise
//! transformation mechanisms, the LDP ratio audit, and the sampled-coordinate
//! wrapper for multidimensional tuples.
//!
//! Every sampler consumes an explicit [`RandomSource`] and a fixed number of
//! uniforms per call (one for Laplace and Duchi, two for PTT), so outputs are
//! reproducible draw for draw.

pub mod rng;

pub use rng::RandomSource;

use crate::domain::{PrivacyBudget, PttFamily, PttParams, UnitValue};
use crate::error::{Error, Result};

/// Selects a mechanism together with everything needed to run and analyze it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MechanismKind {
    /// Additive Laplace noise with scale `2/ε`.
    Laplace {
        epsilon: PrivacyBudget,
    },
    /// Two-point mechanism; `atom = (e^ε + 1)/(e^ε - 1)` is computed once so
    /// outputs compare exactly.
    Duchi {
        epsilon: PrivacyBudget,
        atom: f64,
    },
    Ptt(PttParams),
}

impl MechanismKind {
    pub fn laplace(epsilon: PrivacyBudget) -> Self {
        MechanismKind::Laplace { epsilon }
    }

    pub fn duchi(epsilon: PrivacyBudget) -> Self {
        MechanismKind::Duchi {
            epsilon,
            atom: duchi_atom(epsilon),
        }
    }

    /// Wraps a parameter bundle. Bundles not flagged analysis-only must pass
    /// [`validate_params`](crate::domain::validate_params); analysis-only
    /// bundles are accepted for density and variance work but samplers refuse
    /// them.
    pub fn ptt(params: PttParams) -> Result<Self> {
        PrivacyBudget::new(params.epsilon)?;
        if !params.analysis_only {
            let report = crate::domain::validate_params(&params);
            if let Some(bad) = report.failures().next() {
                return Err(Error::param(format!(
                    "PTT parameters fail '{}' (residual {:e})",
                    bad.name, bad.residual
                )));
            };
        }
        Ok(MechanismKind::Ptt(params))
    }

    pub fn epsilon(&self) -> PrivacyBudget {
        match self {
            MechanismKind::Laplace { epsilon } | MechanismKind::Duchi { epsilon, .. } => *epsilon,
            MechanismKind::Ptt(p) => p.budget(),
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            MechanismKind::Laplace { .. } => "laplace",
            MechanismKind::Duchi { .. } => "duchi",
            MechanismKind::Ptt(p) => match p.family {
                PttFamily::TypeI => "ptt-type-i",
                PttFamily::TypeII => "ptt-type-ii",
            },
        }
    }

    /// Draws one noisy report of `x`.
    pub fn perturb(&self, x: UnitValue, rng: &mut RandomSource) -> Result<f64> {
        match self {
            MechanismKind::Laplace { epsilon } => Ok(laplace_perturb(x, *epsilon, rng)),
            MechanismKind::Duchi { epsilon, atom } => {
                Ok(duchi_draw(x.value(), *epsilon, *atom, rng.uniform()))
            }
            MechanismKind::Ptt(params) => ptt_perturb(x, params, rng),
        }
    }

    /// Density (Laplace, PTT) or probability mass (Duchi) of output `y`
    /// given input `x`.
    pub fn density(&self, y: f64, x: UnitValue) -> f64 {
        match self {
            MechanismKind::Laplace { epsilon } => {
                let e = epsilon.value();
                e / 4.0 * (-(y - x.value()).abs() * e / 2.0).exp()
            }
            MechanismKind::Duchi { epsilon, atom } => {
                let up = duchi_up_probability(x.value(), *epsilon);
                if y == *atom {
                    up
                } else if y == -*atom {
                    1.0 - up
                } else {
                    0.0
                }
            }
            MechanismKind::Ptt(params) => ptt_density(y, x, params),
        }
    }

    /// Largest possible `|output - input|`, `None` for unbounded noise.
    pub fn deviation_bound(&self) -> Option<f64> {
        match self {
            MechanismKind::Laplace { .. } => None,
            MechanismKind::Duchi { atom, .. } => Some(atom + 1.0),
            MechanismKind::Ptt(p) => Some(p.k + p.a + 1.0),
        }
    }
}

/// `(e^ε + 1)/(e^ε - 1)`.
pub fn duchi_atom(epsilon: PrivacyBudget) -> f64 {
    (epsilon.exp() + 1.0) / epsilon.exp_m1()
}

fn duchi_up_probability(x: f64, epsilon: PrivacyBudget) -> f64 {
    epsilon.exp_m1() / (2.0 * (epsilon.exp() + 1.0)) * x + 0.5
}

fn duchi_draw(x: f64, epsilon: PrivacyBudget, atom: f64, u: f64) -> f64 {
    if u < duchi_up_probability(x, epsilon) {
        atom
    } else {
        -atom
    }
}

/// Inverse CDF of a zero-centered Laplace law evaluated at `u ∈ (0, 1)`.
pub fn laplace_quantile(u: f64, scale: f64) -> f64 {
    let v = u - 0.5;
    -scale * v.signum() * (-2.0 * v.abs()).ln_1p()
}

pub fn laplace_perturb(x: UnitValue, epsilon: PrivacyBudget, rng: &mut RandomSource) -> f64 {
    x.value() + laplace_quantile(rng.uniform_open(), 2.0 / epsilon.value())
}

pub fn duchi_perturb(x: UnitValue, epsilon: PrivacyBudget, rng: &mut RandomSource) -> f64 {
    duchi_draw(x.value(), epsilon, duchi_atom(epsilon), rng.uniform())
}

pub fn ptt_perturb(x: UnitValue, params: &PttParams, rng: &mut RandomSource) -> Result<f64> {
    if params.analysis_only {
        return Err(Error::AnalysisOnly);
    }
    let w = rng.uniform();
    let u = rng.uniform();
    Ok(ptt_from_uniforms(x.value(), params, w, u))
}

/// Maps two uniforms on `[0, 1)` to a PTT output.
///
/// `w < q` selects the band, sampled through the closed-form inverse CDF of
/// the family profile; otherwise `u` picks a point uniformly on the union of
/// the two out-of-band pieces, whose lengths are `k(1 + x)` and `k(1 - x)`.
pub fn ptt_from_uniforms(x: f64, params: &PttParams, w: f64, u: f64) -> f64 {
    let center = params.k * x;
    if w < params.q {
        match params.family {
            PttFamily::TypeI => center - params.a + 2.0 * params.a * u,
            PttFamily::TypeII => {
                // tent on a pedestal: density ∝ 1 - c|y - center|/a on the band
                let c = -(-params.epsilon).exp_m1();
                let half_mass = params.a * (1.0 - c / 2.0);
                let offset = |v: f64| {
                    2.0 * v * half_mass / (1.0 + (1.0 - 2.0 * c * v * (1.0 - c / 2.0)).sqrt())
                };
                if u < 0.5 {
                    center - offset(1.0 - 2.0 * u)
                } else {
                    center + offset(2.0 * u - 1.0)
                }
            }
        }
    } else {
        let left = params.k * (1.0 + x);
        let pos = u * 2.0 * params.k;
        if pos < left {
            -params.b + pos
        } else {
            center + params.a + (pos - left)
        }
    }
}

/// Exact PTT output density. Analysis-only bundles are allowed.
pub fn ptt_density(y: f64, x: UnitValue, params: &PttParams) -> f64 {
    if y.abs() > params.b {
        return 0.0;
    }
    let center = params.k * x.value();
    let dist = (y - center).abs();
    if dist <= params.a {
        match params.family {
            PttFamily::TypeI => params.p,
            PttFamily::TypeII => {
                let c = -(-params.epsilon).exp_m1();
                params.p - params.p / params.a * c * dist
            }
        }
    } else {
        params.floor_density()
    }
}

/// Largest density ratio found by [`ldp_ratio_audit`] and where it occurs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AuditReport {
    pub max_ratio: f64,
    /// `(x_i, x_j, y)` maximizing `density(y | x_i) / density(y | x_j)`.
    pub witness: (f64, f64, f64),
}

impl AuditReport {
    /// Whether the ratio respects `e^ε` up to a relative slack.
    pub fn within(&self, epsilon: PrivacyBudget, rel_slack: f64) -> bool {
        self.max_ratio <= epsilon.exp() * (1.0 + rel_slack)
    }
}

/// Maximum density ratio over all input pairs and outputs. Outputs no input
/// can produce are skipped; an output only some inputs can produce yields an
/// infinite ratio.
pub fn ldp_ratio_audit(
    mech: &MechanismKind,
    inputs: &[UnitValue],
    outputs: &[f64],
) -> Result<AuditReport> {
    if inputs.is_empty() || outputs.is_empty() {
        return Err(Error::arg("audit grids must be non-empty"));
    }
    let mut best = AuditReport {
        max_ratio: 0.0,
        witness: (f64::NAN, f64::NAN, f64::NAN),
    };
    for &y in outputs {
        let mut hi = (f64::NEG_INFINITY, f64::NAN);
        let mut lo = (f64::INFINITY, f64::NAN);
        let mut support = 0usize;
        for &x in inputs {
            let d = mech.density(y, x);
            if d > 0.0 {
                support += 1;
                if d > hi.0 {
                    hi = (d, x.value());
                }
                if d < lo.0 {
                    lo = (d, x.value());
                }
            }
        }
        if support == 0 {
            continue;
        }
        let ratio = if support < inputs.len() {
            f64::INFINITY
        } else {
            hi.0 / lo.0
        };
        if ratio > best.max_ratio {
            best = AuditReport {
                max_ratio: ratio,
                witness: (hi.1, lo.1, y),
            };
        }
    }
    Ok(best)
}

/// Default audit grids: inputs with step 0.1 on `[-1, 1]`; outputs covering
/// the support (the two atoms for Duchi) plus every band center and edge.
pub fn default_audit_grids(mech: &MechanismKind) -> (Vec<UnitValue>, Vec<f64>) {
    let inputs: Vec<UnitValue> = (0..=20)
        .map(|i| UnitValue::new((-1.0 + 0.1 * i as f64).clamp(-1.0, 1.0)).unwrap())
        .collect();
    let outputs = match mech {
        MechanismKind::Duchi { atom, .. } => vec![-*atom, *atom],
        MechanismKind::Laplace { .. } => linspace(-10.0, 10.0, 2001),
        MechanismKind::Ptt(p) => {
            let mut ys = linspace(-p.b, p.b, 2001);
            for x in &inputs {
                let c = p.k * x.value();
                ys.extend([c, c - p.a, c + p.a]);
            }
            ys
        }
    };
    (inputs, outputs)
}

pub(crate) fn linspace(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..count)
            .map(|i| lo + (hi - lo) * i as f64 / (count - 1) as f64)
            .collect(),
    }
}

/// Sparse report from a `d`-dimensional tuple: only the sampled coordinate
/// is nonzero and it carries `d` times the noisy value.
#[derive(Debug, Clone, PartialEq)]
pub struct NoisyTuple {
    pub values: Vec<f64>,
    /// 1-based index of the reported coordinate.
    pub chosen_index: usize,
}

impl NoisyTuple {
    pub fn dimension(&self) -> usize {
        self.values.len()
    }
}

pub fn multidim_perturb(
    tuple: &[UnitValue],
    mech: &MechanismKind,
    rng: &mut RandomSource,
) -> Result<NoisyTuple> {
    if tuple.is_empty() {
        return Err(Error::arg("cannot perturb an empty tuple"));
    }
    let j = rng.index(tuple.len());
    multidim_perturb_at(tuple, mech, j, rng)
}

/// [`multidim_perturb`] with the coordinate fixed to `j` (0-based).
pub fn multidim_perturb_at(
    tuple: &[UnitValue],
    mech: &MechanismKind,
    j: usize,
    rng: &mut RandomSource,
) -> Result<NoisyTuple> {
    let d = tuple.len();
    if j >= d {
        return Err(Error::arg(format!(
            "coordinate {j} out of range for d = {d}"
        )));
    }
    let noisy = mech.perturb(tuple[j], rng)?;
    let mut values = vec![0.0; d];
    values[j] = d as f64 * noisy;
    Ok(NoisyTuple {
        values,
        chosen_index: j + 1,
    })
}
