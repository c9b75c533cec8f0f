//! Effective chain Hamiltonians in the `|x⟩` basis of a fixed `(J_A, J_B, N↑)`
//! sector, tuned couplings and analytic swap periods.

use std::f64::consts::PI;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sector::Spin;

/// Real symmetric tridiagonal matrix: on-site energies and hoppings.
#[derive(Clone, Debug, PartialEq)]
pub struct TridiagonalChain {
    diag: Vec<f64>,
    offdiag: Vec<f64>,
}

impl TridiagonalChain {
    pub fn new(diag: Vec<f64>, offdiag: Vec<f64>) -> Result<Self> {
        if diag.is_empty() {
            return Err(Error::Chain("chain needs at least one site".into()));
        }
        if offdiag.len() + 1 != diag.len() {
            return Err(Error::Chain(format!(
                "{} diagonal entries need {} hoppings, got {}",
                diag.len(),
                diag.len() - 1,
                offdiag.len()
            )));
        }
        if diag.iter().chain(&offdiag).any(|v| !v.is_finite()) {
            return Err(Error::Chain("non-finite coefficient".into()));
        }
        Ok(TridiagonalChain { diag, offdiag })
    }

    /// Chain with zero on-site energies.
    pub fn hopping_only(offdiag: Vec<f64>) -> Result<Self> {
        Self::new(vec![0.0; offdiag.len() + 1], offdiag)
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    pub fn diag(&self) -> &[f64] {
        &self.diag
    }

    pub fn offdiag(&self) -> &[f64] {
        &self.offdiag
    }

    /// Largest absolute coefficient.
    pub fn scale(&self) -> f64 {
        self.diag.iter().chain(&self.offdiag).fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Two-line text form: `V: ...` then `C: ...`.
    pub fn to_text(&self) -> String {
        let mut s = String::from("V:");
        for v in &self.diag {
            let _ = write!(s, " {v:?}");
        }
        s.push_str("\nC:");
        for c in &self.offdiag {
            let _ = write!(s, " {c:?}");
        }
        s.push('\n');
        s
    }

    /// Parses the two-line form. `#` starts a comment; the `V:`/`C:` tags are
    /// optional and a missing second line means a single-site chain.
    pub fn from_text(text: &str) -> Result<Self> {
        let mut rows = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let body = line
                .strip_prefix("V:")
                .or_else(|| line.strip_prefix("C:"))
                .unwrap_or(line);
            let values = body
                .split(|c: char| c.is_whitespace() || c == ',')
                .filter(|t| !t.is_empty())
                .map(|t| {
                    t.parse::<f64>()
                        .map_err(|e| Error::Chain(format!("line {}: {t:?}: {e}", lineno + 1)))
                })
                .collect::<Result<Vec<_>>>()?;
            rows.push(values);
        }
        match rows.len() {
            1 => Self::new(rows.remove(0), Vec::new()),
            2 => {
                let c = rows.pop().unwrap_or_default();
                Self::new(rows.remove(0), c)
            }
            n => Err(Error::Chain(format!("expected a V line and a C line, found {n} lines"))),
        }
    }
}

/// Coherent couplings `γ_int`, `γ_M`, `γ_J`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Couplings {
    pub gamma_int: f64,
    pub gamma_m: f64,
    pub gamma_j: f64,
}

impl Couplings {
    /// Only the exchange term, `γ_M = γ_J = 0`.
    pub fn bare(gamma_int: f64) -> Self {
        Couplings { gamma_int, gamma_m: 0.0, gamma_j: 0.0 }
    }

    pub fn zero() -> Self {
        Self::bare(0.0)
    }

    /// Scales the tuning terms by `(1 + ε_M)` and `(1 + ε_J)`.
    pub fn with_tuning_errors(self, eps_m: f64, eps_j: f64) -> Self {
        Couplings {
            gamma_m: (1.0 + eps_m) * self.gamma_m,
            gamma_j: (1.0 + eps_j) * self.gamma_j,
            ..self
        }
    }

    /// Scalar multiplying the exchange operator in sector `(J_A, J_B, N↑)`:
    /// `γ_int + γ_M (N↑ - J_A - J_B) + γ_J J_B (J_B + 1)`.
    pub fn sector_scale(&self, j_a: Spin, j_b: Spin, n_up: u32) -> f64 {
        let (ja, jb) = (j_a.value(), j_b.value());
        self.gamma_int + self.gamma_m * (f64::from(n_up) - ja - jb) + self.gamma_j * jb * (jb + 1.0)
    }
}

/// Tuning terms `γ_M`, `γ_J` in their published form. They remove the
/// first-order `N↑/J` dependence of the swap period; a `Δ/J` slope of about
/// `-W/4` remains.
pub fn tune_params(j: f64, gamma_int: f64) -> Result<Couplings> {
    if j <= 0.0 {
        return Err(Error::Division("tune_params (J must be positive)"));
    }
    let denom = j * (7.0 * j + 4.0);
    Ok(Couplings {
        gamma_int,
        gamma_m: gamma_int * (2.0 * j + 1.0) / (2.0 * denom),
        gamma_j: -gamma_int / denom,
    })
}

/// Matrix element `⟨x+1| J_+^A J_-^B |x⟩`.
pub fn hopping_coefficient(x: u32, j_a: Spin, j_b: Spin, n_up: u32) -> Result<f64> {
    if x >= n_up {
        return Err(Error::InvalidSector(format!("hop from x = {x} needs x < N_up = {n_up}")));
    }
    let (x, n) = (f64::from(x), f64::from(n_up));
    let (two_ja, two_jb) = (f64::from(j_a.twice()), f64::from(j_b.twice()));
    let factors = [x + 1.0, two_ja - x, n - x, two_jb - n + x + 1.0];
    if factors.iter().any(|f| *f < 0.0) {
        return Err(Error::InvalidSector(format!(
            "negative hopping factor at x = {x}, J_A = {j_a}, J_B = {j_b}, N_up = {n_up}"
        )));
    }
    Ok(factors.iter().product::<f64>().sqrt())
}

/// Rescaling factor `W(x, N↑, Δ)` with `γ_int C_x = J γ_int W √((x+1)(N↑-x))`.
/// Arguments are real so the function can be probed between lattice points.
pub fn w_factor(x: f64, n_up: f64, delta: f64, j: f64, couplings: &Couplings) -> Result<f64> {
    if j <= 0.0 {
        return Err(Error::Division("w_factor (J must be positive)"));
    }
    if couplings.gamma_int == 0.0 {
        return Err(Error::Division("w_factor (γ_int = 0)"));
    }
    let m = couplings.gamma_m / couplings.gamma_int;
    let jj = couplings.gamma_j / couplings.gamma_int;
    let (u, n, d) = (x / j, n_up / j, delta / j);
    let bracket = 1.0
        + j * m * (-2.0 - d + n)
        + j * j * jj * (j * (j + 1.0) / (j * j) + (2.0 * j + 1.0) / j * d + d * d);
    let radicand = (2.0 - u) * (2.0 + 2.0 * d - n + u + 1.0 / j);
    if radicand < 0.0 {
        return Err(Error::InvalidSector(format!("negative radicand in W at x = {x}")));
    }
    Ok(bracket * radicand.sqrt())
}

/// Exact chain for sector `(J_A, J_B, N↑)`; on-site energies vanish and every
/// hopping carries [`Couplings::sector_scale`].
pub fn build_chain(j_a: Spin, j_b: Spin, n_up: u32, couplings: &Couplings) -> Result<TridiagonalChain> {
    let scale = couplings.sector_scale(j_a, j_b, n_up);
    let c = (0..n_up)
        .map(|x| hopping_coefficient(x, j_a, j_b, n_up).map(|h| scale * h))
        .collect::<Result<Vec<_>>>()?;
    TridiagonalChain::hopping_only(c)
}

/// Swap period of the bare exchange Hamiltonian in the partially polarized
/// limit, `π / (2 γ_int J (2 + Δ/J - (N↑-1)/(2J)))`.
pub fn swap_period_pure(j: f64, delta: f64, n_up: f64, gamma_int: f64) -> Result<f64> {
    if j <= 0.0 || gamma_int == 0.0 {
        return Err(Error::Division("swap_period_pure"));
    }
    let w = 2.0 + delta / j - (n_up - 1.0) / (2.0 * j);
    if w == 0.0 {
        return Err(Error::Division("swap_period_pure (vanishing rescaling)"));
    }
    Ok(PI / (2.0 * gamma_int * j) / w)
}

/// Limit of the tuned rescaling factor, `(8J² + 6J + 1) / (7J² + 4J)`.
pub fn tuned_w_limit(j: f64) -> f64 {
    (8.0 * j * j + 6.0 * j + 1.0) / (7.0 * j * j + 4.0 * j)
}

/// Swap period with tuned `γ_M`, `γ_J`.
pub fn swap_period_tuned(j: f64, gamma_int: f64) -> Result<f64> {
    if j <= 0.0 || gamma_int == 0.0 {
        return Err(Error::Division("swap_period_tuned"));
    }
    Ok(PI / (2.0 * gamma_int * j) / tuned_w_limit(j))
}

/// `γ J_x` for a single spin `J`, written in the `|M⟩` basis.
pub fn mi_jx_chain(j: Spin, gamma: f64) -> Result<TridiagonalChain> {
    if j.twice() == 0 {
        return Err(Error::InvalidSector("J_x chain needs J ≥ 1/2".into()));
    }
    let jt = i64::from(j.twice());
    // 2M runs over -2J, -2J+2, ..., 2J-2
    let c = (0..jt)
        .map(|k| {
            let m2 = -jt + 2 * k;
            let prod = ((jt - m2) * (jt + m2 + 2)) as f64 / 4.0;
            0.5 * gamma * prod.sqrt()
        })
        .collect();
    TridiagonalChain::hopping_only(c)
}
