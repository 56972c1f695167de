//! Adaptive Gauss-Kronrod (7, 15) quadrature for vector-valued integrands.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

/// Gauss weights of the odd Kronrod nodes `XGK[1], XGK[3], XGK[5], XGK[7]`.
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
    pub max_panels: usize,
}

impl Tolerance {
    pub const fn new(abs: f64, rel: f64) -> Self {
        Self {
            abs,
            rel,
            max_panels: 2000,
        }
    }
}

struct Panel {
    a: f64,
    b: f64,
    value: Vec<f64>,
    err: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.err == other.err
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.err.total_cmp(&other.err)
    }
}

fn gk15<F>(f: &mut F, a: f64, b: f64, dim: usize, buf: &mut Vec<f64>) -> Panel
where
    F: FnMut(f64, &mut [f64]),
{
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut kron = vec![0.0; dim];
    let mut gauss = vec![0.0; dim];
    buf.resize(dim, 0.0);
    for i in 0..8 {
        let xs: &[f64] = if i == 7 {
            &[c]
        } else {
            &[c - h * XGK[i], c + h * XGK[i]]
        };
        for &x in xs {
            buf.iter_mut().for_each(|v| *v = 0.0);
            f(x, buf);
            for d in 0..dim {
                kron[d] += WGK[i] * buf[d];
                if i % 2 == 1 {
                    gauss[d] += WG[i / 2] * buf[d];
                }
            }
        }
    }
    let mut err: f64 = 0.0;
    for d in 0..dim {
        kron[d] *= h;
        gauss[d] *= h;
        err = err.max((kron[d] - gauss[d]).abs());
    }
    Panel { a, b, value: kron, err }
}

/// Integrate the `dim`-vector valued `f` over `[a, b]`. `f(x, out)` writes
/// the integrand at `x` into a zeroed `out`. Panels are bisected worst-first
/// until the summed error estimate (max over components) meets the tolerance
/// relative to the largest component.
pub fn integrate_vec<F>(mut f: F, a: f64, b: f64, dim: usize, tol: Tolerance) -> Result<Vec<f64>>
where
    F: FnMut(f64, &mut [f64]),
{
    if a == b {
        return Ok(vec![0.0; dim]);
    }
    let mut buf = Vec::with_capacity(dim);
    let mut heap = BinaryHeap::new();
    let n0 = 4;
    for i in 0..n0 {
        let lo = a + (b - a) * i as f64 / n0 as f64;
        let hi = if i + 1 == n0 {
            b
        } else {
            a + (b - a) * (i + 1) as f64 / n0 as f64
        };
        heap.push(gk15(&mut f, lo, hi, dim, &mut buf));
    }
    loop {
        let mut total = vec![0.0; dim];
        let mut err = 0.0;
        for p in heap.iter() {
            for (t, v) in total.iter_mut().zip(&p.value) {
                *t += v;
            }
            err += p.err;
        }
        let scale = total.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if !err.is_finite() || total.iter().any(|v| !v.is_finite()) {
            return Err(Error::Quadrature(format!("non-finite integrand on [{a}, {b}]")));
        }
        if err <= tol.abs.max(tol.rel * scale) {
            return Ok(total);
        }
        if heap.len() >= tol.max_panels {
            return Err(Error::Quadrature(format!(
                "no convergence on [{a}, {b}] after {} panels (error {err:.3e})",
                heap.len()
            )));
        }
        let worst = heap.pop().expect("heap is non-empty");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // cannot split further; accept this panel as is
            heap.push(Panel { err: 0.0, ..worst });
            continue;
        }
        heap.push(gk15(&mut f, worst.a, mid, dim, &mut buf));
        heap.push(gk15(&mut f, mid, worst.b, dim, &mut buf));
    }
}

/// Scalar version of [`integrate_vec`].
pub fn integrate<F>(mut f: F, a: f64, b: f64, tol: Tolerance) -> Result<f64>
where
    F: FnMut(f64) -> f64,
{
    Ok(integrate_vec(|x, out| out[0] = f(x), a, b, 1, tol)?[0])
}

/// `int_a^inf f(t) dt` through `t = a + scale u / (1 - u)`.
pub fn integrate_vec_to_inf<F>(mut f: F, a: f64, scale: f64, dim: usize, tol: Tolerance) -> Result<Vec<f64>>
where
    F: FnMut(f64, &mut [f64]),
{
    integrate_vec(
        |u, out| {
            let w = 1.0 - u;
            let t = a + scale * u / w;
            let jac = scale / (w * w);
            f(t, out);
            for v in out.iter_mut() {
                *v *= jac;
            }
        },
        0.0,
        1.0,
        dim,
        tol,
    )
}

pub fn integrate_to_inf<F>(mut f: F, a: f64, scale: f64, tol: Tolerance) -> Result<f64>
where
    F: FnMut(f64) -> f64,
{
    Ok(integrate_vec_to_inf(|x, out| out[0] = f(x), a, scale, 1, tol)?[0])
}

/// Neumaier-compensated sum.
pub fn compensated_sum<I: IntoIterator<Item = f64>>(xs: I) -> f64 {
    let mut sum = 0.0;
    let mut c = 0.0;
    for x in xs {
        let t = sum + x;
        if sum.abs() >= x.abs() {
            c += (sum - t) + x;
        } else {
            c += (x - t) + sum;
        }
        sum = t;
    }
    sum + c
}

#[cfg(test)]
mod tests {
    use super::*;

    const TIGHT: Tolerance = Tolerance::new(1e-14, 1e-13);

    #[test]
    fn rule_weights() {
        let s: f64 = 2.0 * WGK[..7].iter().sum::<f64>() + WGK[7];
        assert!((s - 2.0).abs() < 1e-14);
        let g: f64 = 2.0 * WG[..3].iter().sum::<f64>() + WG[3];
        assert!((g - 2.0).abs() < 1e-14);
    }

    #[test]
    fn polynomial_exactness() {
        // a single GK15 panel integrates degree 22 exactly, its Gauss part degree 13
        let mut buf = Vec::new();
        for deg in 0..=22 {
            let mut f = |x: f64, out: &mut [f64]| out[0] = x.powi(deg);
            let p = gk15(&mut f, 0.0, 1.0, 1, &mut buf);
            assert!((p.value[0] - 1.0 / (deg + 1) as f64).abs() < 1e-14, "deg {deg}");
            if deg <= 13 {
                assert!(p.err < 1e-14, "deg {deg}");
            }
        }
    }

    #[test]
    fn known_integrals() {
        let v = integrate(|x| x.sin(), 0.0, std::f64::consts::PI, TIGHT).unwrap();
        assert!((v - 2.0).abs() < 1e-12);
        let v = integrate_to_inf(|x| (-x).exp(), 0.0, 1.0, TIGHT).unwrap();
        assert!((v - 1.0).abs() < 1e-12);
        let v = integrate_to_inf(|x| 1.0 / (x * x), 1.0, 1.0, TIGHT).unwrap();
        assert!((v - 1.0).abs() < 1e-12);
        let v = integrate(|x| x.sqrt(), 0.0, 1.0, TIGHT).unwrap();
        assert!((v - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn vector_components() {
        let v = integrate_vec(
            |x, out| {
                out[0] = x;
                out[1] = x * x;
            },
            0.0,
            3.0,
            2,
            TIGHT,
        )
        .unwrap();
        assert!((v[0] - 4.5).abs() < 1e-12 && (v[1] - 9.0).abs() < 1e-12);
    }

    #[test]
    fn compensated() {
        let xs = [1.0, 1e100, 1.0, -1e100];
        assert_eq!(compensated_sum(xs), 2.0);
    }
}
