//! Matrix elements of the individual generators in the doubled basis.
//!
//! Each channel maps a source index to the weights with which it feeds every
//! target index, `dρ[target]/dt += w · ρ[source]`, at unit rate. The bra-side
//! level of species A is written `b = N↑ - y` throughout.

use num_complex::Complex64;

use crate::coherent::{hopping_coefficient, Couplings};
use crate::error::{Error, Result};
use crate::sector::{DoubledIndex, Spin};

pub type Transitions = Vec<(DoubledIndex, Complex64)>;

pub trait Channel: Send + Sync {
    fn name(&self) -> &'static str;

    /// Appends `(target, weight)` pairs for `src`; zero weights may be omitted.
    fn transitions(&self, src: &DoubledIndex, out: &mut Transitions) -> Result<()>;
}

fn real(w: f64) -> Complex64 {
    Complex64::new(w, 0.0)
}

fn shift_j(j: Spin, delta_twice: i64) -> Option<Spin> {
    j.checked_add_twice(delta_twice)
}

/// `-i[H, ρ]` with `H` the sector chain of [`crate::coherent::build_chain`].
#[derive(Clone, Copy, Debug)]
pub struct Coherent {
    pub couplings: Couplings,
}

impl Channel for Coherent {
    fn name(&self) -> &'static str {
        "coherent"
    }

    fn transitions(&self, src: &DoubledIndex, out: &mut Transitions) -> Result<()> {
        let DoubledIndex { j_b, j_a, n_up, x, y } = *src;
        let scale = self.couplings.sector_scale(j_a, j_b, n_up);
        if scale == 0.0 {
            return Ok(());
        }
        let hop = |site: u32| hopping_coefficient(site, j_a, j_b, n_up).map(|c| scale * c);
        let mut push = |x2: u32, y2: u32, w: Complex64| {
            if w != Complex64::new(0.0, 0.0) {
                out.push((DoubledIndex::new(j_b, j_a, n_up, x2, y2), w));
            }
        };
        // ket chain site x
        if x < n_up {
            push(x + 1, y, Complex64::new(0.0, -hop(x)?));
        }
        if x > 0 {
            push(x - 1, y, Complex64::new(0.0, -hop(x - 1)?));
        }
        // bra chain site b = N↑ - y
        let b = n_up - y;
        if b < n_up {
            push(x, y - 1, Complex64::new(0.0, hop(b)?));
        }
        if b > 0 {
            push(x, y + 1, Complex64::new(0.0, hop(b - 1)?));
        }
        Ok(())
    }
}

/// `D(J_z^A)`.
#[derive(Clone, Copy, Debug)]
pub struct CollectiveDephasing;

impl CollectiveDephasing {
    pub fn diagonal(src: &DoubledIndex) -> f64 {
        let (x, b) = (f64::from(src.x), f64::from(src.bra_a()));
        x * b - 0.5 * (x * x + b * b)
    }
}

impl Channel for CollectiveDephasing {
    fn name(&self) -> &'static str {
        "collective dephasing"
    }

    fn transitions(&self, src: &DoubledIndex, out: &mut Transitions) -> Result<()> {
        let d = Self::diagonal(src);
        if d != 0.0 {
            out.push((*src, real(d)));
        }
        Ok(())
    }
}

/// `D(J_-^A)`.
#[derive(Clone, Copy, Debug)]
pub struct CollectiveDecay;

impl CollectiveDecay {
    pub fn jump(src: &DoubledIndex) -> f64 {
        let tj = f64::from(src.j_a.twice());
        let (x, b) = (f64::from(src.x), f64::from(src.bra_a()));
        (x * (tj - x + 1.0) * b * (tj - b + 1.0)).sqrt()
    }

    pub fn diagonal(src: &DoubledIndex) -> f64 {
        let tj = f64::from(src.j_a.twice());
        let (x, b) = (f64::from(src.x), f64::from(src.bra_a()));
        -0.5 * (x * (tj - x + 1.0) + b * (tj - b + 1.0))
    }
}

impl Channel for CollectiveDecay {
    fn name(&self) -> &'static str {
        "collective decay"
    }

    fn transitions(&self, src: &DoubledIndex, out: &mut Transitions) -> Result<()> {
        let DoubledIndex { j_b, j_a, n_up, x, y } = *src;
        if x > 0 && src.bra_a() > 0 {
            out.push((DoubledIndex::new(j_b, j_a, n_up - 1, x - 1, y), real(Self::jump(src))));
        }
        let d = Self::diagonal(src);
        if d != 0.0 {
            out.push((*src, real(d)));
        }
        Ok(())
    }
}

fn check_sites(src: &DoubledIndex, n_a: u32) -> Result<()> {
    if src.j_a.twice() > n_a || !(n_a - src.j_a.twice()).is_multiple_of(2) {
        return Err(Error::InvalidSector(format!("J_A = {} is not a spin of {n_a} sites", src.j_a)));
    }
    Ok(())
}

/// `Σ_i D(Z_i^A)` over the `N_A` sites of species A.
#[derive(Clone, Copy, Debug)]
pub struct LocalDephasing {
    pub n_a: u32,
}

impl LocalDephasing {
    /// Weight of the `J_A → J_A - 1` branch.
    pub fn lowering(&self, src: &DoubledIndex) -> f64 {
        if src.j_a.twice() < 2 {
            return 0.0;
        }
        let (j, tj) = (src.j_a.value(), f64::from(src.j_a.twice()));
        let (x, b) = (f64::from(src.x), f64::from(src.bra_a()));
        let na = f64::from(self.n_a);
        2.0 * (na / 2.0 + j + 1.0) * (x * (tj - x) * b * (tj - b)).sqrt() / (j * (tj + 1.0))
    }

    /// Weight of the `J_A → J_A + 1` branch.
    pub fn raising(&self, src: &DoubledIndex) -> f64 {
        let (j, tj) = (src.j_a.value(), f64::from(src.j_a.twice()));
        let (x, b) = (f64::from(src.x), f64::from(src.bra_a()));
        let na = f64::from(self.n_a);
        2.0 * (na / 2.0 - j) * ((x + 1.0) * (tj - x + 1.0) * (b + 1.0) * (tj - b + 1.0)).sqrt()
            / ((j + 1.0) * (tj + 1.0))
    }

    pub fn diagonal(&self, src: &DoubledIndex) -> f64 {
        let j = src.j_a.value();
        let (x, b) = (f64::from(src.x), f64::from(src.bra_a()));
        let na = f64::from(self.n_a);
        let mixed = if src.j_a.twice() == 0 {
            0.0
        } else {
            2.0 * (na / 2.0 + 1.0) * (x - j) * (b - j) / (j * (j + 1.0))
        };
        mixed - na
    }
}

impl Channel for LocalDephasing {
    fn name(&self) -> &'static str {
        "local dephasing"
    }

    fn transitions(&self, src: &DoubledIndex, out: &mut Transitions) -> Result<()> {
        check_sites(src, self.n_a)?;
        let DoubledIndex { j_b, j_a, n_up, x, y } = *src;
        let w = self.lowering(src);
        if w != 0.0 {
            let j = shift_j(j_a, -2).expect("weight vanishes below J = 1");
            out.push((DoubledIndex::new(j_b, j, n_up - 1, x - 1, y), real(w)));
        }
        let w = self.raising(src);
        if w != 0.0 {
            let j = shift_j(j_a, 2).ok_or(Error::Overflow("J_A + 1"))?;
            out.push((DoubledIndex::new(j_b, j, n_up + 1, x + 1, y), real(w)));
        }
        let d = self.diagonal(src);
        if d != 0.0 {
            out.push((*src, real(d)));
        }
        Ok(())
    }
}

/// `Σ_i D(σ_-^{A,i})` over the `N_A` sites of species A.
#[derive(Clone, Copy, Debug)]
pub struct LocalDecay {
    pub n_a: u32,
}

impl LocalDecay {
    /// Weight of the branch keeping `J_A`, lowering `N↑` and `x` by one.
    pub fn keeping(&self, src: &DoubledIndex) -> f64 {
        if src.j_a.twice() == 0 {
            return 0.0;
        }
        let (j, tj) = (src.j_a.value(), f64::from(src.j_a.twice()));
        let (x, b) = (f64::from(src.x), f64::from(src.bra_a()));
        let na = f64::from(self.n_a);
        (na / 2.0 + 1.0) * (x * (tj - x + 1.0) * b * (tj - b + 1.0)).sqrt() / (2.0 * j * (j + 1.0))
    }

    /// Weight of the `J_A → J_A - 1` branch (`N↑ → N↑ - 2`, `x → x - 2`).
    pub fn lowering(&self, src: &DoubledIndex) -> f64 {
        if src.j_a.twice() < 2 {
            return 0.0;
        }
        let (j, tj) = (src.j_a.value(), f64::from(src.j_a.twice()));
        let (x, b) = (f64::from(src.x), f64::from(src.bra_a()));
        let na = f64::from(self.n_a);
        (na / 2.0 + j + 1.0) * (x * (x - 1.0) * b * (b - 1.0)).sqrt() / (2.0 * j * (tj + 1.0))
    }

    /// Weight of the `J_A → J_A + 1` branch; `N↑`, `x`, `y` are unchanged.
    pub fn raising(&self, src: &DoubledIndex) -> f64 {
        let (j, tj) = (src.j_a.value(), f64::from(src.j_a.twice()));
        let (x, b) = (f64::from(src.x), f64::from(src.bra_a()));
        let na = f64::from(self.n_a);
        (na / 2.0 - j)
            * ((tj - x + 1.0) * (tj - x + 2.0) * (tj - b + 1.0) * (tj - b + 2.0)).sqrt()
            / (2.0 * (j + 1.0) * (tj + 1.0))
    }

    pub fn diagonal(&self, src: &DoubledIndex) -> f64 {
        let tj = f64::from(src.j_a.twice());
        let (x, b) = (f64::from(src.x), f64::from(src.bra_a()));
        -(f64::from(self.n_a) - tj + x + b) / 2.0
    }
}

impl Channel for LocalDecay {
    fn name(&self) -> &'static str {
        "local decay"
    }

    fn transitions(&self, src: &DoubledIndex, out: &mut Transitions) -> Result<()> {
        check_sites(src, self.n_a)?;
        let DoubledIndex { j_b, j_a, n_up, x, y } = *src;
        let w = self.keeping(src);
        if w != 0.0 {
            out.push((DoubledIndex::new(j_b, j_a, n_up - 1, x - 1, y), real(w)));
        }
        let w = self.lowering(src);
        if w != 0.0 {
            let j = shift_j(j_a, -2).expect("weight vanishes below J = 1");
            out.push((DoubledIndex::new(j_b, j, n_up - 2, x - 2, y), real(w)));
        }
        let w = self.raising(src);
        if w != 0.0 {
            let j = shift_j(j_a, 2).ok_or(Error::Overflow("J_A + 1"))?;
            out.push((DoubledIndex::new(j_b, j, n_up, x, y), real(w)));
        }
        let d = self.diagonal(src);
        if d != 0.0 {
            out.push((*src, real(d)));
        }
        Ok(())
    }
}
