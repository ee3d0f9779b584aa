//! Heavy-mass limit: c.m. operators frozen at the branch centers, leaving
//! pure internal phases.

use nalgebra::Complex;

use crate::opalg::{OperatorSeries, Sector};
use crate::Rational;

use super::model::HilbertModel;
use super::{cplx, re, HilbertError, Real};

/// Diagonal internal energies `E_n`, `n < levels`, of `h` with every c.m.
/// operator replaced by zero and the rest energy dropped. In recentered
/// branch frames this freezes the packet at its branch center.
pub fn frozen_energies<T: Real>(
    h: &OperatorSeries<Rational>,
    m: &HilbertModel<T>,
    levels: usize,
) -> Result<Vec<T>, HilbertError> {
    let table = m.table();
    let mut s = h.drop_rest_energy();
    for (id, sym) in table.symbols().iter().enumerate() {
        if matches!(sym.sector, Sector::CmPosition | Sector::CmMomentum) {
            s = s.substitute(id as u16, &OperatorSeries::zero(table))?;
        }
    }
    let spec = m.spec();
    let half: T = re(0.5);
    let mut out = Vec::with_capacity(levels);
    for n in 0..levels {
        let k = re::<T>(n as f64) + half;
        let mut e = cplx(T::zero(), T::zero());
        for ((ep, word), c) in s.terms() {
            let mut v = m.eval_coeff(c)? * cplx(spec.eps().powi(*ep), T::zero());
            for &(sym, p) in word {
                let d = match table.name(sym) {
                    "Hrel0" => spec.hbar * spec.omega_int * k,
                    "Hrel1" => -spec.lambda * k * k,
                    other => return Err(HilbertError::Unbound(other.into())),
                };
                v *= cplx(d.powi(p as i32), T::zero());
            }
            e += v;
        }
        if e.im.abs() > re::<T>(1e-12) * e.re.abs().max(T::one()) {
            return Err(HilbertError::NotHermitian { what: "frozen Hamiltonian".into(), defect: e.im.to_f64().unwrap_or(f64::NAN) });
        }
        out.push(e.re);
    }
    Ok(out)
}

/// `V(t) = |Σ p_n exp(−i(E↑_n − E↓_n)t/ħ)|`.
pub fn frozen_visibility<T: Real>(e_up: &[T], e_down: &[T], weights: &[T], hbar: T, times: &[T]) -> Vec<T> {
    times
        .iter()
        .map(|&t| {
            let mut acc = Complex::new(T::zero(), T::zero());
            for ((u, d), w) in e_up.iter().zip(e_down).zip(weights) {
                let ph = -(*u - *d) * t / hbar;
                acc += cplx(ph.cos(), ph.sin()) * cplx(*w, T::zero());
            }
            acc.norm_sqr().sqrt()
        })
        .collect()
}
