use nalgebra::{Complex, DMatrix, DVector, SymmetricEigen};

use super::sparse::SparseOperator;
use super::{cplx, re, HilbertError, Real};

#[derive(Clone, Debug, PartialEq)]
pub struct KrylovOptions<T: Real> {
    pub max_dim: usize,
    /// Local error target per step, relative to the state norm.
    pub tolerance: T,
    /// Abort threshold on `|‖ψ(t+dt)‖ − ‖ψ(t)‖|`.
    pub unitarity_tol: T,
    pub hbar: T,
    /// Largest number of substeps tried before giving up.
    pub max_substeps: usize,
}

impl<T: Real> KrylovOptions<T> {
    pub fn new(max_dim: usize, tolerance: T, unitarity_tol: T, hbar: T) -> Self {
        Self { max_dim, tolerance, unitarity_tol, hbar, max_substeps: 4096 }
    }
}

/// Lanczos short-time propagator `ψ ↦ exp(−iHτ/ħ)ψ`.
#[derive(Clone, Debug)]
pub struct Krylov<T: Real> {
    pub opts: KrylovOptions<T>,
}

fn czero<T: Real>() -> Complex<T> {
    cplx(T::zero(), T::zero())
}

impl<T: Real> Krylov<T> {
    pub fn new(opts: KrylovOptions<T>) -> Self {
        Self { opts }
    }

    /// `exp(−iTτ/ħ)e₁` for the Lanczos tridiagonal `T`.
    fn small_exp(&self, alpha: &[T], beta: &[T], tau: T) -> Vec<Complex<T>> {
        let m = alpha.len();
        let mut t = DMatrix::<T>::zeros(m, m);
        for i in 0..m {
            t[(i, i)] = alpha[i];
            if i + 1 < m {
                t[(i, i + 1)] = beta[i];
                t[(i + 1, i)] = beta[i];
            }
        }
        let eig = SymmetricEigen::new(t);
        let mut y = vec![czero::<T>(); m];
        for k in 0..m {
            let phase = -eig.eigenvalues[k] * tau / self.opts.hbar;
            let c = cplx(phase.cos(), phase.sin()) * cplx(eig.eigenvectors[(0, k)], T::zero());
            for (i, yi) in y.iter_mut().enumerate() {
                *yi += c * cplx(eig.eigenvectors[(i, k)], T::zero());
            }
        }
        y
    }

    /// One Lanczos exponential, grown until the error estimate
    /// `β_m |y_m|` (relative to `‖ψ‖`) meets `target` or the dimension
    /// limit is hit; returns the new state and the estimate.
    fn expm_once(&self, h: &SparseOperator<T>, psi: &DVector<Complex<T>>, tau: T, target: T) -> (DVector<Complex<T>>, T) {
        let n = psi.len();
        let beta0 = psi.norm();
        if beta0 == T::zero() {
            return (psi.clone(), T::zero());
        }
        let m_max = self.opts.max_dim.min(n).max(1);
        let scale = h.norm_bound().max(T::one());
        let mut basis: Vec<DVector<Complex<T>>> = vec![psi / cplx(beta0, T::zero())];
        let mut alpha: Vec<T> = Vec::new();
        let mut beta: Vec<T> = Vec::new();
        let mut result: Option<(Vec<Complex<T>>, T)> = None;
        for j in 0..m_max {
            let mut w = h.matvec(&basis[j]);
            let a = basis[j].dotc(&w).re;
            alpha.push(a);
            w -= &basis[j] * cplx(a, T::zero());
            if j > 0 {
                w -= &basis[j - 1] * cplx(beta[j - 1], T::zero());
            }
            for _ in 0..2 {
                for v in &basis {
                    let p = v.dotc(&w);
                    w -= v * p;
                }
            }
            let b = w.norm();
            if b <= re::<T>(1e-13) * scale {
                // Invariant subspace: the projection is exact.
                result = Some((self.small_exp(&alpha, &beta, tau), T::zero()));
                break;
            }
            if j + 1 == m_max || (j >= 3 && j % 2 == 1) {
                let y = self.small_exp(&alpha, &beta, tau);
                let err = b * y[j].norm_sqr().sqrt();
                if err <= target || j + 1 == m_max {
                    result = Some((y, err));
                    break;
                }
            }
            beta.push(b);
            basis.push(w / cplx(b, T::zero()));
        }
        let (y, err) = result.expect("Lanczos loop always yields");
        let mut out = DVector::from_element(n, czero::<T>());
        for (i, yi) in y.iter().enumerate() {
            out += &basis[i] * *yi;
        }
        (out * cplx(beta0, T::zero()), err)
    }

    /// Advances by `dt`, halving into substeps until every substep meets
    /// the error target. Returns the new state and the substep count.
    pub fn step(&self, h: &SparseOperator<T>, psi: &DVector<Complex<T>>, dt: T) -> Result<(DVector<Complex<T>>, usize), HilbertError> {
        let mut subs = 1usize;
        loop {
            let tau = dt / re::<T>(subs as f64);
            let mut cur = psi.clone();
            let mut ok = true;
            let target = self.opts.tolerance * psi.norm().max(T::one());
            for _ in 0..subs {
                let (next, err) = self.expm_once(h, &cur, tau, target);
                if err > target {
                    ok = false;
                    break;
                }
                cur = next;
            }
            if ok {
                return Ok((cur, subs));
            }
            subs *= 2;
            if subs > self.opts.max_substeps {
                return Err(HilbertError::Krylov(format!(
                    "error target {} not reached with {} substeps",
                    self.opts.tolerance.to_f64().unwrap_or(f64::NAN),
                    self.opts.max_substeps
                )));
            }
        }
    }

    /// [`Krylov::step`] plus the unitarity check for step `index`.
    pub fn checked_step(
        &self,
        h: &SparseOperator<T>,
        psi: &DVector<Complex<T>>,
        dt: T,
        index: usize,
    ) -> Result<(DVector<Complex<T>>, usize, T), HilbertError> {
        let (next, subs) = self.step(h, psi, dt)?;
        let defect = (next.norm() - psi.norm()).abs();
        if !(defect <= self.opts.unitarity_tol) {
            return Err(HilbertError::Unitarity { step: index, defect: defect.to_f64().unwrap_or(f64::NAN) });
        }
        Ok((next, subs, defect))
    }
}

/// Recorded expectation values along a propagation.
#[derive(Clone, Debug)]
pub struct Trajectory<T: Real> {
    pub times: Vec<T>,
    /// `observables[k][s]`: observable `k` at sample `s`.
    pub observables: Vec<Vec<Complex<T>>>,
    pub states: Vec<DVector<Complex<T>>>,
    pub final_state: DVector<Complex<T>>,
    pub max_unitarity_defect: T,
    pub substeps: usize,
}

fn record<T: Real>(obs: &[&SparseOperator<T>], psi: &DVector<Complex<T>>, out: &mut [Vec<Complex<T>>]) {
    for (k, o) in obs.iter().enumerate() {
        out[k].push(o.expectation(psi));
    }
}

/// Time-independent propagation over `steps` steps; samples at every step
/// including `t = 0`.
pub fn propagate<T: Real>(
    h: &SparseOperator<T>,
    psi0: &DVector<Complex<T>>,
    dt: T,
    steps: usize,
    krylov: &Krylov<T>,
    observables: &[&SparseOperator<T>],
    keep_states: bool,
) -> Result<Trajectory<T>, HilbertError> {
    propagate_time_dependent(|_, _| Ok(h.clone()), psi0, dt, steps, krylov, observables, keep_states)
}

/// Propagation with `H(t, ψ)`: each step uses `H` at the step midpoint,
/// evaluated on a predictor state advanced half a step with `H(t, ψ(t))`.
pub fn propagate_time_dependent<T: Real>(
    mut h_at: impl FnMut(T, &DVector<Complex<T>>) -> Result<SparseOperator<T>, HilbertError>,
    psi0: &DVector<Complex<T>>,
    dt: T,
    steps: usize,
    krylov: &Krylov<T>,
    observables: &[&SparseOperator<T>],
    keep_states: bool,
) -> Result<Trajectory<T>, HilbertError> {
    let mut traj = Trajectory {
        times: vec![T::zero()],
        observables: vec![Vec::with_capacity(steps + 1); observables.len()],
        states: Vec::new(),
        final_state: psi0.clone(),
        max_unitarity_defect: T::zero(),
        substeps: 0,
    };
    record(observables, psi0, &mut traj.observables);
    if keep_states {
        traj.states.push(psi0.clone());
    }
    let half: T = re(0.5);
    let mut psi = psi0.clone();
    let mut static_h: Option<SparseOperator<T>> = None;
    for s in 0..steps {
        let t = dt * re::<T>(s as f64);
        let h0 = h_at(t, &psi)?;
        let h_mid = if static_h.as_ref() == Some(&h0) {
            h0
        } else {
            let (pred, _) = krylov.step(&h0, &psi, dt * half)?;
            let hm = h_at(t + dt * half, &pred)?;
            if hm == h0 {
                static_h = Some(h0);
            }
            hm
        };
        let (next, subs, defect) = krylov.checked_step(&h_mid, &psi, dt, s)?;
        traj.max_unitarity_defect = traj.max_unitarity_defect.max(defect);
        traj.substeps += subs;
        psi = next;
        traj.times.push(t + dt);
        record(observables, &psi, &mut traj.observables);
        if keep_states {
            traj.states.push(psi.clone());
        }
    }
    traj.final_state = psi;
    Ok(traj)
}
