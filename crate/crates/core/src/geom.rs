//! Small fixed-size vector helpers and the simulation box.

#[allow(unused_imports)]
use num_traits::Float;

/// A point or displacement in `D`-dimensional space.
pub type Vector<const D: usize> = [f64; D];

#[inline]
pub fn add<const D: usize>(a: &Vector<D>, b: &Vector<D>) -> Vector<D> {
    core::array::from_fn(|i| a[i] + b[i])
}

#[inline]
pub fn sub<const D: usize>(a: &Vector<D>, b: &Vector<D>) -> Vector<D> {
    core::array::from_fn(|i| a[i] - b[i])
}

#[inline]
pub fn scale<const D: usize>(a: &Vector<D>, s: f64) -> Vector<D> {
    core::array::from_fn(|i| a[i] * s)
}

/// `a + s * b`
#[inline]
pub fn axpy<const D: usize>(a: &Vector<D>, s: f64, b: &Vector<D>) -> Vector<D> {
    core::array::from_fn(|i| a[i] + s * b[i])
}

#[inline]
pub fn dot<const D: usize>(a: &Vector<D>, b: &Vector<D>) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub fn norm_sq<const D: usize>(a: &Vector<D>) -> f64 {
    dot(a, a)
}

#[inline]
pub fn norm<const D: usize>(a: &Vector<D>) -> f64 {
    norm_sq(a).sqrt()
}

#[inline]
pub fn dist<const D: usize>(a: &Vector<D>, b: &Vector<D>) -> f64 {
    norm(&sub(a, b))
}

/// `div(g / |g|)` from the gradient `g` and Hessian `hess` of an implicit
/// function: `(|g|^2 tr H - g^T H g) / |g|^3`.
pub fn unit_gradient_divergence<const D: usize>(g: &Vector<D>, hess: &[[f64; D]; D]) -> f64 {
    let gn2 = norm_sq(g);
    let trace: f64 = (0..D).map(|i| hess[i][i]).sum();
    let mut ghg = 0.0;
    for i in 0..D {
        for j in 0..D {
            ghg += g[i] * hess[i][j] * g[j];
        }
    }
    (gn2 * trace - ghg) / (gn2 * gn2.sqrt())
}

/// Axis-aligned box with per-axis periodicity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Domain<const D: usize> {
    pub lo: Vector<D>,
    pub hi: Vector<D>,
    pub periodic: [bool; D],
}

impl<const D: usize> Domain<D> {
    pub fn new(lo: Vector<D>, hi: Vector<D>, periodic: [bool; D]) -> Self {
        Self { lo, hi, periodic }
    }

    /// Periodic in every direction.
    pub fn periodic(lo: Vector<D>, hi: Vector<D>) -> Self {
        Self::new(lo, hi, [true; D])
    }

    /// Open (non-periodic) in every direction.
    pub fn open(lo: Vector<D>, hi: Vector<D>) -> Self {
        Self::new(lo, hi, [false; D])
    }

    /// Open box around `points` enlarged by `pad` on every side.
    pub fn bounding(points: &[Vector<D>], pad: f64) -> Self {
        let mut lo = [f64::INFINITY; D];
        let mut hi = [f64::NEG_INFINITY; D];
        for p in points {
            for i in 0..D {
                lo[i] = lo[i].min(p[i]);
                hi[i] = hi[i].max(p[i]);
            }
        }
        if points.is_empty() {
            lo = [0.0; D];
            hi = [0.0; D];
        }
        Self::open(core::array::from_fn(|i| lo[i] - pad), core::array::from_fn(|i| hi[i] + pad))
    }

    pub fn extent(&self) -> Vector<D> {
        sub(&self.hi, &self.lo)
    }

    pub fn volume(&self) -> f64 {
        self.extent().iter().product()
    }

    /// Wraps periodic coordinates into `[lo, hi)`; open axes are untouched.
    pub fn wrap(&self, x: &Vector<D>) -> Vector<D> {
        core::array::from_fn(|i| {
            if self.periodic[i] {
                let l = self.hi[i] - self.lo[i];
                let mut v = x[i] - l * ((x[i] - self.lo[i]) / l).floor();
                if v >= self.hi[i] {
                    v -= l;
                }
                if v < self.lo[i] {
                    v = self.lo[i];
                }
                v
            } else {
                x[i]
            }
        })
    }

    /// Minimum-image displacement `a - b`.
    #[inline]
    pub fn displacement(&self, a: &Vector<D>, b: &Vector<D>) -> Vector<D> {
        core::array::from_fn(|i| {
            let d = a[i] - b[i];
            if self.periodic[i] {
                let l = self.hi[i] - self.lo[i];
                let half = 0.5 * l;
                if d.abs() <= half {
                    d
                } else if d.abs() < l {
                    d - l.copysign(d)
                } else {
                    d - l * (d / l).round()
                }
            } else {
                d
            }
        })
    }

    #[inline]
    pub fn distance_sq(&self, a: &Vector<D>, b: &Vector<D>) -> f64 {
        norm_sq(&self.displacement(a, b))
    }

    #[inline]
    pub fn distance(&self, a: &Vector<D>, b: &Vector<D>) -> f64 {
        self.distance_sq(a, b).sqrt()
    }

    /// Image of `x` closest to `reference`.
    #[inline]
    pub fn unwrap_near(&self, x: &Vector<D>, reference: &Vector<D>) -> Vector<D> {
        add(reference, &self.displacement(x, reference))
    }

    pub fn contains(&self, x: &Vector<D>) -> bool {
        (0..D).all(|i| self.periodic[i] || (x[i] >= self.lo[i] && x[i] <= self.hi[i]))
    }
}
