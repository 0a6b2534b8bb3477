//! Numerical tolerances shared by every comparison in the crate.
//!
//! A process reads its tolerance record once: either the record passed to
//! [`install`] or, if nothing was installed, [`Tolerances::default`].

use std::fmt;
use std::sync::OnceLock;

/// Every threshold the library compares against.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Maximum `‖M − M†‖_max` accepted for Hermitian inputs.
    pub hermitian: f64,
    /// Hermiticity and idempotency bound for projectors.
    pub projector: f64,
    /// Eigenvalues within this distance of 1 count towards a projector's rank.
    pub rank: f64,
    /// Jacobi stops when the off-diagonal Frobenius norm drops below `eig_rel · ‖M‖_F`.
    pub eig_rel: f64,
    pub eig_max_sweeps: usize,
    /// Residual cutoff used when orthonormalizing the stacked complements in `meet`.
    pub meet_cutoff: f64,
    /// Residual cutoff used when orthonormalizing spans (`join`, bases).
    pub join_cutoff: f64,
    /// Eigenvalues closer than `max(cluster_abs, cluster_rel · spread)` form one spectral point.
    pub cluster_abs: f64,
    pub cluster_rel: f64,
    /// Function values closer than `value_merge · (1 + |v|)` are one value.
    pub value_merge: f64,
    /// Amplitude below which an outcome counts as impossible.
    pub outcome: f64,
    /// Allowed deviation of a state norm or a trace from 1.
    pub normalization: f64,
    pub unitary: f64,
    /// Bound for density-matrix positivity, Hermiticity and trace checks.
    pub density: f64,
    /// Default bound for operator identities checked by the verification suites.
    pub check: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            hermitian: 1e-9,
            projector: 1e-10,
            rank: 1e-8,
            eig_rel: 1e-13,
            eig_max_sweeps: 100,
            meet_cutoff: 1e-9,
            join_cutoff: 1e-10,
            cluster_abs: 1e-8,
            cluster_rel: 1e-10,
            value_merge: 1e-8,
            outcome: 1e-9,
            normalization: 1e-9,
            unitary: 1e-9,
            density: 1e-10,
            check: 1e-9,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ToleranceParseError(pub String);

impl fmt::Display for ToleranceParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid tolerance override: {}", self.0)
    }
}

impl std::error::Error for ToleranceParseError {}

impl Tolerances {
    /// Eigenvalue clustering threshold for a spectrum with the given spread.
    pub fn cluster(&self, spread: f64) -> f64 {
        self.cluster_abs.max(self.cluster_rel * spread)
    }

    /// Whether two function values are one value: their gap is within
    /// `value_merge · (1 + max(|lo|, |hi|))`.
    pub fn same_value(&self, lo: f64, hi: f64) -> bool {
        (hi - lo).abs() <= self.value_merge * (1.0 + lo.abs().max(hi.abs()))
    }

    /// Applies overrides of the form `key=value,key=value`. A bare number
    /// overrides `check`.
    pub fn with_overrides(mut self, spec: &str) -> Result<Self, ToleranceParseError> {
        let spec = spec.trim();
        if spec.is_empty() {
            return Ok(self);
        }
        if let Ok(v) = spec.parse::<f64>() {
            self.check = positive("check", v)?;
            return Ok(self);
        }
        for item in spec.split(',') {
            let (key, value) = item
                .split_once('=')
                .ok_or_else(|| ToleranceParseError(format!("expected key=value, got `{item}`")))?;
            let key = key.trim();
            let value = value.trim();
            if key == "eig_max_sweeps" {
                self.eig_max_sweeps = value
                    .parse::<usize>()
                    .ok()
                    .filter(|&n| n > 0)
                    .ok_or_else(|| ToleranceParseError(format!("bad sweep count `{value}`")))?;
                continue;
            }
            let v: f64 = value
                .parse()
                .map_err(|_| ToleranceParseError(format!("bad number `{value}` for `{key}`")))?;
            let v = positive(key, v)?;
            let slot = match key {
                "hermitian" => &mut self.hermitian,
                "projector" => &mut self.projector,
                "rank" => &mut self.rank,
                "eig_rel" => &mut self.eig_rel,
                "meet_cutoff" => &mut self.meet_cutoff,
                "join_cutoff" => &mut self.join_cutoff,
                "cluster_abs" => &mut self.cluster_abs,
                "cluster_rel" => &mut self.cluster_rel,
                "value_merge" => &mut self.value_merge,
                "outcome" => &mut self.outcome,
                "normalization" => &mut self.normalization,
                "unitary" => &mut self.unitary,
                "density" => &mut self.density,
                "check" => &mut self.check,
                other => return Err(ToleranceParseError(format!("unknown key `{other}`"))),
            };
            *slot = v;
        }
        Ok(self)
    }
}

fn positive(key: &str, v: f64) -> Result<f64, ToleranceParseError> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(ToleranceParseError(format!("`{key}` must be positive, got {v}")))
    }
}

static ACTIVE: OnceLock<Tolerances> = OnceLock::new();

/// Installs the tolerance record for this process. Fails (returning the
/// rejected record) if a record is already in use.
pub fn install(t: Tolerances) -> Result<(), Tolerances> {
    ACTIVE.set(t)
}

/// The tolerance record in effect.
pub fn active() -> &'static Tolerances {
    ACTIVE.get_or_init(Tolerances::default)
}
