use nalgebra::{Complex, DMatrix, DVector};

use super::model::HilbertModel;
use super::{cplx, re, HilbertError, Real};

/// Tail bound used for thermal truncation.
pub const THERMAL_TAIL: f64 = 1e-10;

/// Smallest `n_max` with thermal tail `q^{n_max+1} < 1e-10`, from
/// `⌈log(1e-10)/log q⌉`.
pub fn thermal_n_max(nbar: f64) -> usize {
    if nbar <= 0.0 {
        return 0;
    }
    let q = nbar / (nbar + 1.0);
    (THERMAL_TAIL.ln() / q.ln()).ceil() as usize
}

/// Thermal occupation weights `p_n ∝ q^n`, `n = 0..=n_max`, renormalized.
pub fn thermal_weights<T: Real>(nbar: T, n_max: usize) -> Result<Vec<T>, HilbertError> {
    if nbar < T::zero() {
        return Err(HilbertError::Invalid("mean occupation must be >= 0".into()));
    }
    let q = nbar / (nbar + T::one());
    let tail = q.powi(n_max as i32 + 1);
    if tail >= re(THERMAL_TAIL) {
        return Err(HilbertError::NMaxTooSmall {
            n_max,
            minimum: thermal_n_max(nbar.to_f64().unwrap_or(f64::INFINITY)),
        });
    }
    Ok(geometric_weights(q, n_max + 1))
}

/// `p_n ∝ q^n` over `levels` levels, renormalized; no tail check.
pub fn geometric_weights<T: Real>(q: T, levels: usize) -> Vec<T> {
    let mut w = Vec::with_capacity(levels);
    let mut x = T::one();
    for _ in 0..levels {
        w.push(x);
        x *= q;
    }
    let s = w.iter().fold(T::zero(), |a, b| a + *b);
    w.iter().map(|v| *v / s).collect()
}

/// Thermal dephasing oracle `(1−q)/sqrt(1 − 2q cosθ + q²)`.
pub fn visibility_oracle(nbar: f64, theta: f64) -> f64 {
    let q = nbar / (nbar + 1.0);
    (1.0 - q) / (1.0 - 2.0 * q * theta.cos() + q * q).sqrt()
}

/// Harmonic-oscillator eigenfunctions `φ_0..φ_{d-1}` at `ξ = x/x0`, in
/// units of `x0^{-1/2}`.
fn ho_functions(xi: f64, d: usize, out: &mut [f64]) {
    let mut prev = 0.0;
    let mut cur = std::f64::consts::PI.powf(-0.25) * (-xi * xi / 2.0).exp();
    for n in 0..d {
        out[n] = cur;
        let next = (2.0 / (n as f64 + 1.0)).sqrt() * xi * cur - (n as f64 / (n as f64 + 1.0)).sqrt() * prev;
        prev = cur;
        cur = next;
    }
}

/// Real Gaussian `ψ(x) ∝ exp(−(x−center)²/(2w²))` expanded in the c.m.
/// ladder basis; `w = x0` is the ground state.
pub fn gaussian_packet<T: Real>(center: T, width: T, m: &HilbertModel<T>) -> Result<DVector<Complex<T>>, HilbertError> {
    let d = m.spec().d_cm;
    let x0 = m.spec().x0().to_f64().unwrap();
    let (c, w) = (center.to_f64().unwrap(), width.to_f64().unwrap());
    if w <= 0.0 || !c.is_finite() {
        return Err(HilbertError::Invalid("packet width must be positive and center finite".into()));
    }
    // trapezoid rule over ±12 widths; spectrally accurate for this integrand
    let h = w.min(x0) / 24.0;
    let half = (12.0 * w / h).ceil() as i64;
    let norm = (std::f64::consts::PI.sqrt() * w).powf(-0.5);
    let mut coef = vec![0.0f64; d];
    let mut phi = vec![0.0f64; d];
    for k in -half..=half {
        let x = c + k as f64 * h;
        let psi = norm * (-(x - c) * (x - c) / (2.0 * w * w)).exp();
        ho_functions(x / x0, d, &mut phi);
        for n in 0..d {
            coef[n] += psi * phi[n];
        }
    }
    let scale = h / x0.sqrt();
    let fidelity: f64 = coef.iter().map(|v| (v * scale).powi(2)).sum();
    if fidelity < 1.0 - 1e-6 {
        return Err(HilbertError::Support { fidelity });
    }
    let inv = 1.0 / fidelity.sqrt();
    Ok(DVector::from_iterator(d, coef.iter().map(|v| cplx(re(v * scale * inv), T::zero()))))
}

/// One thermal ensemble member with its two interferometer branches.
#[derive(Clone, Debug)]
pub struct EnsembleMember<T: Real> {
    pub weight: T,
    /// Internal level the member was prepared in.
    pub level: usize,
    pub up: DVector<Complex<T>>,
    pub down: DVector<Complex<T>>,
}

#[derive(Clone, Debug)]
pub struct QuantumState<T: Real> {
    pub members: Vec<EnsembleMember<T>>,
}

impl<T: Real> QuantumState<T> {
    /// Checks weights and branch normalization.
    pub fn validate(&self) -> Result<(), HilbertError> {
        let mut sum = T::zero();
        for m in &self.members {
            if m.weight < T::zero() {
                return Err(HilbertError::Invalid("negative ensemble weight".into()));
            }
            sum += m.weight;
            for v in [&m.up, &m.down] {
                if (v.norm() - T::one()).abs() > re(1e-9) {
                    return Err(HilbertError::Invalid("branch vector not normalized".into()));
                }
            }
            if m.up.len() != m.down.len() {
                return Err(HilbertError::Ensemble("branch dimensions differ".into()));
            }
        }
        if (sum - T::one()).abs() > re(1e-12) {
            return Err(HilbertError::Invalid("ensemble weights do not sum to 1".into()));
        }
        Ok(())
    }

    /// Thermal ensemble with both branches in `|ψ_cm⟩ ⊗ |n⟩`.
    pub fn thermal_product(weights: &[T], cm: &DVector<Complex<T>>, m: &HilbertModel<T>) -> Result<Self, HilbertError> {
        if weights.len() > m.spec().d_int {
            return Err(HilbertError::Invalid(format!(
                "{} thermal levels exceed the internal dimension {}",
                weights.len(),
                m.spec().d_int
            )));
        }
        let members = weights
            .iter()
            .enumerate()
            .map(|(n, &w)| {
                let v = m.embed(cm, n);
                EnsembleMember { weight: w, level: n, up: v.clone(), down: v }
            })
            .collect();
        let s = Self { members };
        s.validate()?;
        Ok(s)
    }

    pub fn visibility(&self) -> T {
        visibility(self.members.iter().map(|m| (m.weight, &m.up, &m.down)))
    }

    /// `ρ = Σ p_n |Ψ_n⟩⟨Ψ_n|` with `Ψ_n = (up + down)/‖up + down‖`.
    pub fn superposed(&self) -> Vec<(T, DVector<Complex<T>>)> {
        self.members
            .iter()
            .map(|m| {
                let v = &m.up + &m.down;
                let n = v.norm();
                (m.weight, v / cplx(n, T::zero()))
            })
            .collect()
    }
}

/// `|Σ p_n ⟨up_n|down_n⟩|`, summed in the given order.
pub fn visibility<'a, T: Real + 'a>(
    members: impl IntoIterator<Item = (T, &'a DVector<Complex<T>>, &'a DVector<Complex<T>>)>,
) -> T {
    let mut acc = cplx(T::zero(), T::zero());
    for (w, up, down) in members {
        acc += up.dotc(down) * cplx(w, T::zero());
    }
    acc.norm_sqr().sqrt()
}

/// Reduced c.m. density matrix of a weighted ensemble of full-space vectors.
pub fn partial_trace_cm<T: Real>(
    ensemble: &[(T, DVector<Complex<T>>)],
    m: &HilbertModel<T>,
) -> Result<DMatrix<Complex<T>>, HilbertError> {
    let (dc, di) = (m.spec().d_cm, m.spec().d_int);
    let mut rho = DMatrix::from_element(dc, dc, cplx(T::zero(), T::zero()));
    for (w, v) in ensemble {
        if v.len() != dc * di {
            return Err(HilbertError::Ensemble("vector dimension does not match the model".into()));
        }
        for a in 0..dc {
            for b in 0..dc {
                let mut s = cplx(T::zero(), T::zero());
                for k in 0..di {
                    s += v[m.index(a, k)] * v[m.index(b, k)].conj();
                }
                rho[(a, b)] += s * cplx(*w, T::zero());
            }
        }
    }
    Ok(rho)
}

/// `tr ρ²`.
pub fn purity<T: Real>(rho: &DMatrix<Complex<T>>) -> T {
    (rho * rho).trace().re
}
