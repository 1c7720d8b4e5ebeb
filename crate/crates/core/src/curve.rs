//! Distortion-versus-blocklength sweeps: which bounds to evaluate, the
//! column layout of the resulting table, and per-row consistency flags.

use rayon::prelude::*;

use crate::bss::{self, BssBoundInput};
use crate::error::{domain, Result};
use crate::gauss::{self, GaussBoundInput};
use crate::rd::{solve, SourceModel};
use crate::{bns, Bound};

/// Gaussian codebook constraint, `R_m² = α n` when bounded.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Constraint {
    Unbounded,
    Alpha(f64),
}

impl Constraint {
    pub fn tag(&self) -> String {
        match self {
            Constraint::Unbounded => "unbounded".into(),
            Constraint::Alpha(a) => format!("alpha_{a}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CurveSpec {
    pub source: SourceModel,
    pub rate: f64,
    pub ns: Vec<u32>,
    /// Ordered-statistics `ε` values (Gaussian: the upper bound's `ε`).
    pub eps: Vec<f64>,
    /// Reference rates for the binary reference-rate bounds.
    pub ref_rates: Vec<f64>,
    /// Rate slack of the legacy BSS bound; one column per reference rate.
    pub legacy_eps: Option<f64>,
    pub constraints: Vec<Constraint>,
    /// Gaussian outer-ball margin.
    pub delta: f64,
}

impl CurveSpec {
    pub fn new(source: SourceModel, rate: f64, ns: Vec<u32>) -> Self {
        CurveSpec {
            source,
            rate,
            ns,
            eps: Vec::new(),
            ref_rates: Vec::new(),
            legacy_eps: None,
            constraints: Vec::new(),
            delta: 0.5,
        }
    }

    fn is_gauss(&self) -> bool {
        matches!(self.source, SourceModel::Gaussian { .. })
    }

    pub fn validate(&self) -> Result<()> {
        self.source.validate()?;
        solve(self.source, self.rate)?;
        if self.ns.is_empty() {
            return domain("empty blocklength range");
        }
        if self.ns.windows(2).any(|w| w[0] >= w[1]) {
            return domain("blocklengths must be strictly increasing");
        }
        if let Some(e) = self.eps.iter().find(|e| !(**e > 0.0 && **e < 1.0)) {
            return domain(format!("eps {e} outside (0, 1)"));
        }
        if self.is_gauss() {
            if self.constraints.is_empty() {
                return domain("Gaussian curves need --unbounded or at least one --alpha");
            }
            if self.eps.is_empty() {
                return domain("Gaussian curves need at least one eps");
            }
            if !self.ref_rates.is_empty() || self.legacy_eps.is_some() {
                return domain("reference-rate bounds are not available for the Gaussian source");
            }
            if self.ns[0] < 2 {
                return domain("Gaussian blocklengths start at 2");
            }
            for c in &self.constraints {
                if let Constraint::Alpha(a) = c {
                    if !(*a > 0.0 && a.is_finite()) {
                        return domain(format!("alpha must be positive, got {a}"));
                    }
                }
            }
            if !(self.delta > 0.0) {
                return domain(format!("delta must be positive, got {}", self.delta));
            }
        } else {
            if !self.constraints.is_empty() {
                return domain("--alpha/--unbounded only apply to the Gaussian source");
            }
            if self.ns[0] < 1 {
                return domain("blocklengths start at 1");
            }
            if let Some(r0) = self
                .ref_rates
                .iter()
                .find(|r| !(**r > 0.0 && **r < self.rate))
            {
                return domain(format!("reference rate {r0} outside (0, {})", self.rate));
            }
            if let Some(le) = self.legacy_eps {
                if self.source != SourceModel::BinarySymmetric {
                    return domain("the legacy bound is only defined for the BSS");
                }
                if self.ref_rates.is_empty() {
                    return domain("--legacy-eps needs at least one --ref-rate");
                }
                for r0 in &self.ref_rates {
                    if !(le > 0.0 && le < self.rate - r0) {
                        return domain(format!(
                            "legacy eps {le} outside (0, R - R0 = {})",
                            self.rate - r0
                        ));
                    }
                }
            }
        }
        Ok(())
    }

    /// Value columns after `n`, in output order.
    pub fn columns(&self) -> Vec<String> {
        let mut cols = vec!["asymptote".to_string()];
        if self.is_gauss() {
            for c in &self.constraints {
                cols.push(format!("lower_{}", c.tag()));
                for e in &self.eps {
                    cols.push(format!("upper_os_{e}_{}", c.tag()));
                }
            }
        } else {
            cols.push("lower".into());
            cols.extend(self.eps.iter().map(|e| format!("upper_os_{e}")));
            cols.extend(self.ref_rates.iter().map(|r| format!("upper_rr_{r}")));
            if self.legacy_eps.is_some() {
                cols.extend(self.ref_rates.iter().map(|r| format!("upper_legacy_{r}")));
            }
        }
        cols
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CurveRow {
    pub n: u32,
    /// One entry per [`CurveSpec::columns`].
    pub values: Vec<f64>,
    /// `degenerate:<col>` and `cross:<col>` markers.
    pub flags: Vec<String>,
}

/// Tracks the lower bound a group of upper columns must stay above.
struct RowBuilder<'a> {
    cols: &'a [String],
    values: Vec<f64>,
    flags: Vec<String>,
    lower: f64,
}

impl RowBuilder<'_> {
    fn push(&mut self, v: f64) {
        self.values.push(v);
    }

    fn lower(&mut self, v: f64) {
        self.lower = v;
        self.push(v);
    }

    fn upper(&mut self, b: Bound) {
        let col = &self.cols[self.values.len()];
        if b.degenerate {
            self.flags.push(format!("degenerate:{col}"));
        }
        if b.value < self.lower - 1e-12 * self.lower.abs().max(1.0) {
            self.flags.push(format!("cross:{col}"));
        }
        self.push(b.value);
    }
}

pub fn compute_row(spec: &CurveSpec, cols: &[String], n: u32) -> Result<CurveRow> {
    let dstar = solve(spec.source, spec.rate)?.dstar;
    let mut b = RowBuilder {
        cols,
        values: Vec::with_capacity(cols.len()),
        flags: Vec::new(),
        lower: f64::NEG_INFINITY,
    };
    b.push(dstar);
    match spec.source {
        SourceModel::BinarySymmetric => {
            let inp = BssBoundInput::new(n, spec.rate)?;
            b.lower(bss::lower_bound(&inp));
            for &e in &spec.eps {
                b.upper(bss::upper_bound_os(&inp, e)?);
            }
            for &r0 in &spec.ref_rates {
                b.upper(Bound::exact(bss::upper_bound_rr(&inp, r0)?));
            }
            if let Some(le) = spec.legacy_eps {
                for &r0 in &spec.ref_rates {
                    b.upper(Bound::exact(bss::upper_bound_legacy(&inp, r0, le)?));
                }
            }
        }
        SourceModel::BinaryNonSymmetric { p } => {
            b.lower(bns::lower_bound(n, spec.rate, p)?);
            for &e in &spec.eps {
                b.upper(bns::upper_bound_os(n, spec.rate, p, e)?);
            }
            for &r0 in &spec.ref_rates {
                let d0 = bns::reference_distortion(p, r0)?;
                b.upper(Bound::exact(bns::upper_bound_rr(n, spec.rate, p, d0)?));
            }
        }
        SourceModel::Gaussian { sigma2 } => {
            let base = GaussBoundInput::new(n, spec.rate, sigma2)?.with_delta(spec.delta)?;
            for c in &spec.constraints {
                let inp = match c {
                    Constraint::Unbounded => base,
                    Constraint::Alpha(a) => base.with_alpha(*a)?,
                };
                b.lower(gauss::lower_bound(&inp)?);
                for &e in &spec.eps {
                    b.upper(gauss::upper_bound(&inp.with_eps(e)?)?);
                }
            }
        }
    }
    Ok(CurveRow {
        n,
        values: b.values,
        flags: b.flags,
    })
}

/// All rows in ascending `n`, computed in parallel on the current rayon pool.
pub fn compute(spec: &CurveSpec) -> Result<Vec<CurveRow>> {
    spec.validate()?;
    let cols = spec.columns();
    spec.ns
        .par_iter()
        .map(|&n| compute_row(spec, &cols, n))
        .collect()
}
