//! Real 8x8 representation of complex 4x4 matrices.
//!
//! A complex matrix `C = C_R + i C_I` is carried as the real block matrix
//!
//! ```text
//!     embed(C) = | C_R  -C_I |
//!                | C_I   C_R |
//! ```
//!
//! `embed` is a ring homomorphism (products and adjoints are preserved), so
//! every quantum-side operation has an equivalent purely real formulation
//! that a real-valued network can be trained against. `extract` averages the
//! blocks back into a complex matrix; `project_complex` is the orthogonal
//! projection of an arbitrary real 8x8 matrix onto the image of `embed`.

use num_complex::Complex64;

/// Complex 4x4 matrix, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexMat4 {
    m: [Complex64; 16],
}

impl ComplexMat4 {
    pub fn zero() -> Self {
        Self {
            m: [Complex64::new(0.0, 0.0); 16],
        }
    }

    pub fn identity() -> Self {
        let mut out = Self::zero();
        for i in 0..4 {
            out.m[i * 4 + i] = Complex64::new(1.0, 0.0);
        }
        out
    }

    pub fn from_fn(mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut out = Self::zero();
        for r in 0..4 {
            for c in 0..4 {
                out.m[r * 4 + c] = f(r, c);
            }
        }
        out
    }

    pub fn diag(d: [Complex64; 4]) -> Self {
        Self::from_fn(|r, c| if r == c { d[r] } else { Complex64::new(0.0, 0.0) })
    }

    /// |j><k| in the computational basis (indices 0..4).
    pub fn ketbra(j: usize, k: usize) -> Self {
        assert!(j < 4 && k < 4);
        let mut out = Self::zero();
        out.m[j * 4 + k] = Complex64::new(1.0, 0.0);
        out
    }

    #[inline]
    pub fn at(&self, r: usize, c: usize) -> Complex64 {
        self.m[r * 4 + c]
    }

    #[inline]
    pub fn at_mut(&mut self, r: usize, c: usize) -> &mut Complex64 {
        &mut self.m[r * 4 + c]
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Self::zero();
        for r in 0..4 {
            for c in 0..4 {
                let mut s = Complex64::new(0.0, 0.0);
                for k in 0..4 {
                    s += self.at(r, k) * other.at(k, c);
                }
                out.m[r * 4 + c] = s;
            }
        }
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for i in 0..16 {
            out.m[i] += other.m[i];
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for i in 0..16 {
            out.m[i] -= other.m[i];
        }
        out
    }

    pub fn scale(&self, s: Complex64) -> Self {
        let mut out = self.clone();
        for v in out.m.iter_mut() {
            *v *= s;
        }
        out
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(|r, c| self.at(c, r).conj())
    }

    pub fn trace(&self) -> Complex64 {
        self.at(0, 0) + self.at(1, 1) + self.at(2, 2) + self.at(3, 3)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.m.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn dist(&self, other: &Self) -> f64 {
        self.sub(other).frobenius_norm()
    }
}

/// Real 8x8 matrix, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct RealRep8 {
    m: [f64; 64],
}

impl RealRep8 {
    pub fn zero() -> Self {
        Self { m: [0.0; 64] }
    }

    pub fn identity() -> Self {
        let mut out = Self::zero();
        for i in 0..8 {
            out.m[i * 8 + i] = 1.0;
        }
        out
    }

    pub fn from_fn(mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut out = Self::zero();
        for r in 0..8 {
            for c in 0..8 {
                out.m[r * 8 + c] = f(r, c);
            }
        }
        out
    }

    pub fn from_slice(v: &[f64]) -> Self {
        assert_eq!(v.len(), 64, "real representation is 8x8");
        let mut m = [0.0; 64];
        m.copy_from_slice(v);
        Self { m }
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.m
    }

    #[inline]
    pub fn at(&self, r: usize, c: usize) -> f64 {
        self.m[r * 8 + c]
    }

    #[inline]
    pub fn at_mut(&mut self, r: usize, c: usize) -> &mut f64 {
        &mut self.m[r * 8 + c]
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Self::zero();
        for r in 0..8 {
            for c in 0..8 {
                let mut s = 0.0;
                for k in 0..8 {
                    s += self.at(r, k) * other.at(k, c);
                }
                out.m[r * 8 + c] = s;
            }
        }
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for i in 0..64 {
            out.m[i] += other.m[i];
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for i in 0..64 {
            out.m[i] -= other.m[i];
        }
        out
    }

    pub fn scale(&self, s: f64) -> Self {
        let mut out = self.clone();
        for v in out.m.iter_mut() {
            *v *= s;
        }
        out
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(|r, c| self.at(c, r))
    }

    pub fn trace(&self) -> f64 {
        (0..8).map(|i| self.at(i, i)).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.m.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn dist(&self, other: &Self) -> f64 {
        self.sub(other).frobenius_norm()
    }
}

/// embed(i * identity): the symplectic unit squaring to minus identity.
pub fn symplectic_unit() -> RealRep8 {
    RealRep8::from_fn(|r, c| {
        if r < 4 && c == r + 4 {
            -1.0
        } else if r >= 4 && c == r - 4 {
            1.0
        } else {
            0.0
        }
    })
}

/// Real block embedding of a complex matrix.
pub fn embed(c: &ComplexMat4) -> RealRep8 {
    let mut out = RealRep8::zero();
    for r in 0..4 {
        for s in 0..4 {
            let v = c.at(r, s);
            *out.at_mut(r, s) = v.re;
            *out.at_mut(r, s + 4) = -v.im;
            *out.at_mut(r + 4, s) = v.im;
            *out.at_mut(r + 4, s + 4) = v.re;
        }
    }
    out
}

/// Block-averaged inverse of [`embed`]; exact on its image.
pub fn extract(a: &RealRep8) -> ComplexMat4 {
    ComplexMat4::from_fn(|r, s| {
        let re = (a.at(r, s) + a.at(r + 4, s + 4)) / 2.0;
        let im = (a.at(r + 4, s) - a.at(r, s + 4)) / 2.0;
        Complex64::new(re, im)
    })
}

/// Orthogonal projection onto the image of [`embed`], computed as
/// `(a - J a J) / 2` with `J` the symplectic unit. Coincides with
/// `embed(extract(a))`.
pub fn project_complex(a: &RealRep8) -> RealRep8 {
    let j = symplectic_unit();
    let jaj = j.mul(a).mul(&j);
    a.sub(&jaj).scale(0.5)
}

/// Frobenius distance of `a` from the complex-structured subspace.
pub fn complex_residual(a: &RealRep8) -> f64 {
    a.dist(&project_complex(a))
}

/// Orthonormal basis of the 15-dimensional space of traceless hermitian
/// 4x4 matrices (orthonormal under `tr(G_i G_j)`). Fixed order: the six
/// real symmetric pair matrices, the six imaginary antisymmetric pair
/// matrices, then the three diagonal generators.
pub fn traceless_hermitian_basis() -> Vec<ComplexMat4> {
    let mut basis = Vec::with_capacity(15);
    let inv_sqrt2 = 1.0 / 2.0_f64.sqrt();
    for j in 0..4 {
        for k in (j + 1)..4 {
            basis.push(ComplexMat4::from_fn(|r, c| {
                if (r, c) == (j, k) || (r, c) == (k, j) {
                    Complex64::new(inv_sqrt2, 0.0)
                } else {
                    Complex64::new(0.0, 0.0)
                }
            }));
        }
    }
    for j in 0..4 {
        for k in (j + 1)..4 {
            basis.push(ComplexMat4::from_fn(|r, c| {
                if (r, c) == (j, k) {
                    Complex64::new(0.0, inv_sqrt2)
                } else if (r, c) == (k, j) {
                    Complex64::new(0.0, -inv_sqrt2)
                } else {
                    Complex64::new(0.0, 0.0)
                }
            }));
        }
    }
    let diag = |d: [f64; 4], norm: f64| {
        ComplexMat4::diag([
            Complex64::new(d[0] / norm, 0.0),
            Complex64::new(d[1] / norm, 0.0),
            Complex64::new(d[2] / norm, 0.0),
            Complex64::new(d[3] / norm, 0.0),
        ])
    };
    basis.push(diag([1.0, -1.0, 0.0, 0.0], 2.0_f64.sqrt()));
    basis.push(diag([1.0, 1.0, -2.0, 0.0], 6.0_f64.sqrt()));
    basis.push(diag([1.0, 1.0, 1.0, -3.0], 12.0_f64.sqrt()));
    basis
}
