//! Two-qubit states, gates and spectra.
//!
//! Everything here is exact linear algebra on 4x4 complex matrices; the
//! network-facing real form lives in [`crate::realrep`]. Eigenvalues are
//! computed with a cyclic Jacobi sweep on the symmetric real embedding, so
//! no external linear-algebra backend is involved.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::error::{QuantumError, UnknownGate};
use crate::realrep::{self, ComplexMat4, RealRep8};

const HERMITICITY_TOL: f64 = 1e-12;
const TRACE_TOL: f64 = 1e-12;
const UNITARITY_TOL: f64 = 1e-12;
const EIGENVALUE_FLOOR: f64 = -1e-10;
const DEGENERATE_TRACE: f64 = 1e-12;

/// Density matrix of a two-qubit state: hermitian, unit trace, positive
/// semi-definite within tolerance.
#[derive(Clone, Debug)]
pub struct Density4 {
    mat: ComplexMat4,
}

impl Density4 {
    pub fn new(mat: ComplexMat4) -> Result<Self, QuantumError> {
        let herm_dev = mat.dist(&mat.adjoint());
        if herm_dev > HERMITICITY_TOL {
            return Err(QuantumError::InvalidDensity {
                reason: format!("hermiticity deviation {herm_dev:e}"),
            });
        }
        let tr = mat.trace();
        let tr_dev = (tr - Complex64::new(1.0, 0.0)).norm();
        if tr_dev > TRACE_TOL {
            return Err(QuantumError::InvalidDensity {
                reason: format!("trace deviation {tr_dev:e}"),
            });
        }
        let eigs = hermitian_eigenvalues(&mat)?;
        if eigs[0] < EIGENVALUE_FLOOR {
            return Err(QuantumError::InvalidDensity {
                reason: format!("negative eigenvalue {:e}", eigs[0]),
            });
        }
        Ok(Self { mat })
    }

    /// Skips validation; for matrices hermitian and normalized by
    /// construction (normalized products, unitary conjugations).
    pub(crate) fn from_trusted(mat: ComplexMat4) -> Self {
        Self { mat }
    }

    /// Pure computational basis state |j><j|.
    pub fn basis_state(j: usize) -> Self {
        Self::from_trusted(ComplexMat4::ketbra(j, j))
    }

    /// identity / 4.
    pub fn maximally_mixed() -> Self {
        Self::from_trusted(ComplexMat4::identity().scale(Complex64::new(0.25, 0.0)))
    }

    pub fn mat(&self) -> &ComplexMat4 {
        &self.mat
    }

    /// Real network-side form of the state.
    pub fn to_real(&self) -> RealRep8 {
        realrep::embed(&self.mat)
    }
}

/// Validated 4x4 unitary.
#[derive(Clone, Debug)]
pub struct Unitary4 {
    mat: ComplexMat4,
}

impl Unitary4 {
    pub fn new(mat: ComplexMat4) -> Result<Self, QuantumError> {
        let dev = mat.mul(&mat.adjoint()).dist(&ComplexMat4::identity());
        if dev > UNITARITY_TOL {
            return Err(QuantumError::InvalidUnitary { deviation: dev });
        }
        Ok(Self { mat })
    }

    pub fn mat(&self) -> &ComplexMat4 {
        &self.mat
    }

    /// Matrix product `self * other` (so `other` acts first on kets).
    pub fn compose(&self, other: &Self) -> Self {
        Self {
            mat: self.mat.mul(&other.mat),
        }
    }
}

/// CNOT with the first qubit as control: block-diag(identity, swap).
pub fn gate_cnot() -> Unitary4 {
    let rows = [
        [1.0, 0.0, 0.0, 0.0],
        [0.0, 1.0, 0.0, 0.0],
        [0.0, 0.0, 0.0, 1.0],
        [0.0, 0.0, 1.0, 0.0],
    ];
    Unitary4::new(ComplexMat4::from_fn(|r, c| Complex64::new(rows[r][c], 0.0)))
        .expect("permutation matrix is unitary")
}

/// Hadamard on the first qubit.
pub fn gate_h1() -> Unitary4 {
    let h = 1.0 / 2.0_f64.sqrt();
    let rows = [
        [h, 0.0, h, 0.0],
        [0.0, h, 0.0, h],
        [h, 0.0, -h, 0.0],
        [0.0, h, 0.0, -h],
    ];
    Unitary4::new(ComplexMat4::from_fn(|r, c| Complex64::new(rows[r][c], 0.0)))
        .expect("Hadamard block matrix is unitary")
}

/// pi/8 phase gate on the second qubit: diag(1, e^{i pi/4}, 1, e^{i pi/4}).
pub fn gate_r2() -> Unitary4 {
    let one = Complex64::new(1.0, 0.0);
    let phase = Complex64::from_polar(1.0, std::f64::consts::FRAC_PI_4);
    Unitary4::new(ComplexMat4::diag([one, phase, one, phase]))
        .expect("diagonal phase matrix is unitary")
}

/// Combined Hadamard-phase layer: Hadamard on qubit one applied after the
/// phase rotation on qubit two.
pub fn gate_hr() -> Unitary4 {
    gate_h1().compose(&gate_r2())
}

/// Named gates understood at string boundaries (CLI, weight files).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum GateId {
    Cnot,
    Hr,
    H1,
    R2,
}

impl GateId {
    pub const ALL: [GateId; 4] = [GateId::Cnot, GateId::Hr, GateId::H1, GateId::R2];

    pub fn unitary(self) -> Unitary4 {
        match self {
            GateId::Cnot => gate_cnot(),
            GateId::Hr => gate_hr(),
            GateId::H1 => gate_h1(),
            GateId::R2 => gate_r2(),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            GateId::Cnot => "cnot",
            GateId::Hr => "hr",
            GateId::H1 => "h1",
            GateId::R2 => "r2",
        }
    }
}

impl fmt::Display for GateId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for GateId {
    type Err = UnknownGate;

    fn from_str(s: &str) -> Result<Self, UnknownGate> {
        match s.to_ascii_lowercase().as_str() {
            "cnot" => Ok(GateId::Cnot),
            "hr" => Ok(GateId::Hr),
            "h1" => Ok(GateId::H1),
            "r2" => Ok(GateId::R2),
            _ => Err(UnknownGate(s.to_string())),
        }
    }
}

/// A repeated layer of gates. `gates` is listed in application order (the
/// first entry acts first on the state); the layer is applied
/// `repetitions` times. Layer spacing is purely notational.
#[derive(Clone, Debug)]
pub struct GateChainSpec {
    pub gates: Vec<GateId>,
    pub repetitions: usize,
}

impl GateChainSpec {
    pub fn new(gates: Vec<GateId>, repetitions: usize) -> Self {
        Self { gates, repetitions }
    }

    /// Single-layer unitary: the product of the listed gates with the first
    /// listed gate rightmost.
    pub fn layer_unitary(&self) -> Unitary4 {
        let mut u = Unitary4::new(ComplexMat4::identity()).expect("identity");
        for g in &self.gates {
            u = g.unitary().compose(&u);
        }
        u
    }
}

/// Turns the raw real matrix of a network into a density matrix:
/// `rho = C C^dagger / tr(C C^dagger)` with `C` the extracted complex form.
///
/// `C C^dagger` is hermitian bitwise (conjugate-symmetric summands), so the
/// result needs no re-validation. Inputs with vanishing `tr(C C^dagger)`
/// cannot be normalized and are rejected.
pub fn quantumness_map(a: &RealRep8) -> Result<Density4, QuantumError> {
    let c = realrep::extract(a);
    let g = c.mul(&c.adjoint());
    let t = g.trace().re;
    if !(t > DEGENERATE_TRACE) {
        return Err(QuantumError::DegenerateInput { trace: t });
    }
    Ok(Density4::from_trusted(g.scale(Complex64::new(
        1.0 / t,
        0.0,
    ))))
}

/// One step of unitary evolution `rho -> U rho U^dagger`.
pub fn evolve(rho: &Density4, u: &Unitary4) -> Density4 {
    Density4::from_trusted(u.mat().mul(rho.mat()).mul(&u.mat().adjoint()))
}

/// Applies the chain layer by layer: the layer unitary is formed once and
/// conjugates the state `repetitions` times, mirroring how the emulating
/// networks are iterated.
pub fn chain_exact(rho0: &Density4, spec: &GateChainSpec) -> Density4 {
    let ubar = spec.layer_unitary();
    let mut rho = rho0.clone();
    for _ in 0..spec.repetitions {
        rho = evolve(&rho, &ubar);
    }
    rho
}

/// Eigenvalues of a hermitian 4x4 matrix, ascending.
///
/// The matrix is symmetrized, embedded as a symmetric real 8x8 matrix and
/// diagonalized with cyclic Jacobi sweeps (converged when the off-diagonal
/// Frobenius norm falls below 1e-14, or stalls at the rounding floor). The
/// embedding doubles every multiplicity; the doubling is verified to 1e-10
/// (relative at large scale) and then deduplicated.
pub fn hermitian_eigenvalues(h: &ComplexMat4) -> Result<[f64; 4], QuantumError> {
    let dev = h.dist(&h.adjoint());
    if !(dev <= 1e-8) {
        return Err(QuantumError::NotHermitian { deviation: dev });
    }
    let herm = h.add(&h.adjoint()).scale(Complex64::new(0.5, 0.0));
    let mut eig8 = jacobi_symmetric8(&realrep::embed(&herm));
    eig8.sort_unstable_by(f64::total_cmp);
    let scale = eig8[0].abs().max(eig8[7].abs()).max(1.0);
    let mut out = [0.0; 4];
    for k in 0..4 {
        let gap = (eig8[2 * k + 1] - eig8[2 * k]).abs();
        if !(gap <= 1e-10 * scale) {
            return Err(QuantumError::NotHermitian { deviation: gap });
        }
        out[k] = eig8[2 * k];
    }
    Ok(out)
}

/// Cyclic Jacobi diagonalization of a symmetric 8x8 matrix.
fn jacobi_symmetric8(sym: &RealRep8) -> [f64; 8] {
    let mut a = [0.0; 64];
    a.copy_from_slice(sym.as_slice());
    let mut prev_off = f64::INFINITY;
    for _sweep in 0..50 {
        let mut off2 = 0.0;
        for r in 0..8 {
            for c in 0..8 {
                if r != c {
                    off2 += a[r * 8 + c] * a[r * 8 + c];
                }
            }
        }
        let off = off2.sqrt();
        if off < 1e-14 || off >= prev_off {
            break;
        }
        prev_off = off;
        for p in 0..8 {
            for q in (p + 1)..8 {
                let apq = a[p * 8 + q];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[q * 8 + q] - a[p * 8 + p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + theta.hypot(1.0));
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                // A <- J^T A J with the rotation J in the (p, q) plane.
                for k in 0..8 {
                    let akp = a[k * 8 + p];
                    let akq = a[k * 8 + q];
                    a[k * 8 + p] = c * akp - s * akq;
                    a[k * 8 + q] = s * akp + c * akq;
                }
                for k in 0..8 {
                    let apk = a[p * 8 + k];
                    let aqk = a[q * 8 + k];
                    a[p * 8 + k] = c * apk - s * aqk;
                    a[q * 8 + k] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut diag = [0.0; 8];
    for i in 0..8 {
        diag[i] = a[i * 8 + i];
    }
    diag
}

/// How far a raw network output is from being a density matrix.
#[derive(Clone, Copy, Debug)]
pub struct QuantumMetrics {
    /// |tr(F) - 1| of the extracted complex matrix.
    pub trace_residual: f64,
    /// Frobenius norm of `F - F^dagger`.
    pub antiherm_norm: f64,
    /// Smallest eigenvalue of the hermitian part `(F + F^dagger) / 2`.
    pub min_eigenvalue: f64,
    /// Distance of the raw real matrix from the complex-structured subspace.
    pub complex_residual: f64,
}

/// Constraint diagnostics of a raw real 8x8 matrix (typically a network
/// output). Non-finite inputs yield NaN metrics instead of an error.
pub fn quantum_metrics(b: &RealRep8) -> QuantumMetrics {
    if !b.as_slice().iter().all(|v| v.is_finite()) {
        return QuantumMetrics {
            trace_residual: f64::NAN,
            antiherm_norm: f64::NAN,
            min_eigenvalue: f64::NAN,
            complex_residual: f64::NAN,
        };
    }
    let f = realrep::extract(b);
    let trace_residual = (f.trace() - Complex64::new(1.0, 0.0)).norm();
    let antiherm_norm = f.dist(&f.adjoint());
    let herm = f.add(&f.adjoint()).scale(Complex64::new(0.5, 0.0));
    let eigs = hermitian_eigenvalues(&herm).expect("symmetrized matrix is hermitian");
    QuantumMetrics {
        trace_residual,
        antiherm_norm,
        min_eigenvalue: eigs[0],
        complex_residual: realrep::complex_residual(b),
    }
}
