//! Third-order linear joint model and its exact zero-order-hold discretization.
//!
//! The continuous model is a unity-gain first-order low pass cascaded with an
//! underdamped second-order system:
//!
//! ```text
//! G(s) = a / (s + a) * omega^2 / (s^2 + 2 zeta omega s + omega^2)
//! ```
//!
//! realised with states `[filtered input, position, velocity]`.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::linalg::Matrix;
use crate::scalar::Real;
use crate::signal::DEFAULT_DT;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct LinearModel<T> {
    /// Low-pass corner frequency (rad/s).
    pub a: T,
    /// Damping ratio of the second-order stage.
    pub zeta: T,
    /// Natural frequency (rad/s).
    pub omega: T,
    /// Sampling period (s).
    pub dt: T,
}

impl<T: Real> Default for LinearModel<T> {
    fn default() -> Self {
        Self {
            a: T::lit(25.0),
            zeta: T::lit(0.5),
            omega: T::lit(15.0),
            dt: T::lit(DEFAULT_DT),
        }
    }
}

impl<T: Real> LinearModel<T> {
    pub fn new(a: T, zeta: T, omega: T, dt: T) -> Result<Self> {
        let m = Self { a, zeta, omega, dt };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("a", self.a),
            ("zeta", self.zeta),
            ("omega", self.omega),
            ("dt", self.dt),
        ];
        for (name, v) in fields {
            if !v.is_finite() {
                return Err(Error::NonFinite(format!("linear model parameter `{name}`")));
            }
        }
        if self.a <= T::zero() {
            return Err(invalid("a", "corner frequency must be positive"));
        }
        if self.omega <= T::zero() {
            return Err(invalid("omega", "natural frequency must be positive"));
        }
        if self.zeta <= T::zero() || self.zeta >= T::one() {
            return Err(invalid("zeta", "damping ratio must lie in (0, 1)"));
        }
        if self.dt <= T::zero() {
            return Err(invalid("dt", "sampling period must be positive"));
        }
        Ok(())
    }

    pub fn state_space(&self) -> ContinuousStateSpace<T> {
        let (a, z, w) = (self.a, self.zeta, self.omega);
        let two = T::lit(2.0);
        let am = Matrix::from_rows(&[
            vec![-a, T::zero(), T::zero()],
            vec![T::zero(), T::zero(), T::one()],
            vec![w * w, -(w * w), -two * z * w],
        ]);
        ContinuousStateSpace {
            a: am,
            b: vec![a, T::zero(), T::zero()],
            c: vec![T::zero(), T::one(), T::zero()],
            d: T::zero(),
        }
    }

    /// Frequency response `G(j w)` as `(re, im)`.
    pub fn frequency_response(&self, w: T) -> (T, T) {
        let lp = complex_div((self.a, T::zero()), (self.a, w));
        let w2 = self.omega * self.omega;
        let so = complex_div(
            (w2, T::zero()),
            (w2 - w * w, T::lit(2.0) * self.zeta * self.omega * w),
        );
        complex_mul(lp, so)
    }
}

pub(crate) fn complex_mul<T: Real>(x: (T, T), y: (T, T)) -> (T, T) {
    (x.0 * y.0 - x.1 * y.1, x.0 * y.1 + x.1 * y.0)
}

pub(crate) fn complex_div<T: Real>(x: (T, T), y: (T, T)) -> (T, T) {
    let den = y.0 * y.0 + y.1 * y.1;
    ((x.0 * y.0 + x.1 * y.1) / den, (x.1 * y.0 - x.0 * y.1) / den)
}

/// Single-input single-output continuous-time realization.
#[derive(Debug, Clone, PartialEq)]
pub struct ContinuousStateSpace<T> {
    pub a: Matrix<T>,
    pub b: Vec<T>,
    pub c: Vec<T>,
    pub d: T,
}

impl<T: Real> ContinuousStateSpace<T> {
    pub fn order(&self) -> usize {
        self.b.len()
    }

    /// Series connection: `self` feeds `next`.
    pub fn series(&self, next: &Self) -> Self {
        let (n1, n2) = (self.order(), next.order());
        let mut a = Matrix::zeros(n1 + n2, n1 + n2);
        a.set_block(0, 0, &self.a);
        a.set_block(n1, n1, &next.a);
        for i in 0..n2 {
            for j in 0..n1 {
                a[(n1 + i, j)] = next.b[i] * self.c[j];
            }
        }
        let mut b = self.b.clone();
        b.extend(next.b.iter().map(|&bi| bi * self.d));
        let mut c: Vec<T> = self.c.iter().map(|&ci| next.d * ci).collect();
        c.extend(next.c.iter().copied());
        Self {
            a,
            b,
            c,
            d: next.d * self.d,
        }
    }

    /// Exact zero-order-hold discretization over `dt`.
    pub fn zoh(&self, dt: T) -> DiscreteStateSpace<T> {
        let n = self.order();
        let mut aug = Matrix::zeros(n + 1, n + 1);
        aug.set_block(0, 0, &self.a);
        for i in 0..n {
            aug[(i, n)] = self.b[i];
        }
        let e = aug.scaled(dt).expm();
        DiscreteStateSpace {
            ad: e.block(0, 0, n, n),
            bd: (0..n).map(|i| e[(i, n)]).collect(),
            c: self.c.clone(),
            d: self.d,
            dt,
        }
    }
}

/// Discrete-time realization `x+ = Ad x + Bd u`, `y = C x + D u`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteStateSpace<T> {
    pub ad: Matrix<T>,
    pub bd: Vec<T>,
    pub c: Vec<T>,
    pub d: T,
    pub dt: T,
}

impl<T: Real> DiscreteStateSpace<T> {
    pub fn order(&self) -> usize {
        self.bd.len()
    }

    /// Steady-state gain `C (I - Ad)^-1 Bd + D`.
    pub fn dc_gain(&self) -> Result<T> {
        let n = self.order();
        let mut m = Matrix::identity(n);
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] -= self.ad[(i, j)];
            }
        }
        let x = m.solve(&self.bd)?;
        Ok(crate::scalar::dot(&self.c, &x) + self.d)
    }

    /// Response samples to a unit pulse at sample 0 from zero state.
    pub fn pulse_response(&self, len: usize) -> Vec<T> {
        let mut x = vec![T::zero(); self.order()];
        let mut h = Vec::with_capacity(len);
        for k in 0..len {
            let u = if k == 0 { T::one() } else { T::zero() };
            h.push(crate::scalar::dot(&self.c, &x) + self.d * u);
            let ax = self.ad.mul_vec(&x);
            for (i, xi) in x.iter_mut().enumerate() {
                *xi = ax[i] + self.bd[i] * u;
            }
        }
        h
    }

    /// True when every eigenvalue of `Ad` lies strictly inside the unit circle.
    ///
    /// Uses `rho(A) < 1  <=>  ||A^k|| < 1` for some `k`, probing `k = 2^m`.
    pub fn is_schur_stable(&self) -> bool {
        let n = self.order();
        let mut p = Matrix::<f64>::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                p[(i, j)] = self.ad[(i, j)].as_f64();
            }
        }
        if !p.is_finite() {
            return false;
        }
        // log of the scale factor divided out of `p` so far.
        let mut log_scale = 0.0f64;
        for _ in 0..40 {
            let norm = p.norm_inf();
            if norm == 0.0 {
                return true;
            }
            if norm.ln() + log_scale < 0.0 {
                return true;
            }
            // keep entries O(1) while squaring
            log_scale += norm.ln();
            p = p.scaled(1.0 / norm);
            p = p.matmul(&p);
            log_scale *= 2.0;
        }
        false
    }
}

/// Zero-order-hold discretization of a [`LinearModel`] at its own sampling period.
pub fn discretize<T: Real>(model: &LinearModel<T>) -> Result<DiscreteStateSpace<T>> {
    model.validate()?;
    let sys = model.state_space().zoh(model.dt);
    if !sys.ad.is_finite() || !crate::scalar::all_finite(&sys.bd) {
        return Err(Error::NonFinite("discretized system".into()));
    }
    if !sys.is_schur_stable() {
        return Err(Error::Unstable("discretized linear model".into()));
    }
    Ok(sys)
}
