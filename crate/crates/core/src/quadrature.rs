//! Adaptive Gauss–Kronrod (G10/K21) integration of vector-valued integrands.
//!
//! Every integral in the analytic engine carries a whole derivative jet, so
//! the integrator works on `dim`-component integrands and refines the panel
//! whose worst component is furthest from its tolerance. Callers pass the
//! non-smooth points of the integrand as breakpoints; each initial panel is
//! smooth.

use crate::error::{Error, Result};

const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];

const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_958_109_831_074,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

// Gauss weights for the odd-indexed Kronrod nodes XGK[1], XGK[3], ..., XGK[9].
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_146,
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub rel: f64,
    pub abs: f64,
    pub max_panels: usize,
}

impl Tolerance {
    pub const fn new(rel: f64, abs: f64) -> Self {
        Self {
            rel,
            abs,
            max_panels: 4000,
        }
    }

    fn allowed(&self, value: f64) -> f64 {
        self.abs.max(self.rel * value.abs())
    }
}

impl Default for Tolerance {
    fn default() -> Self {
        Self::new(1e-8, 1e-12)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Estimate {
    pub value: Vec<f64>,
    pub abs_error: Vec<f64>,
    pub evaluations: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalarEstimate {
    pub value: f64,
    pub abs_error: f64,
    pub evaluations: usize,
}

struct Panel {
    a: f64,
    b: f64,
    value: Vec<f64>,
    error: Vec<f64>,
}

fn kronrod<F>(f: &mut F, a: f64, b: f64, dim: usize, buf: &mut [f64]) -> (Vec<f64>, Vec<f64>)
where
    F: FnMut(f64, &mut [f64]),
{
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut k = vec![0.0; dim];
    let mut g = vec![0.0; dim];

    f(center, buf);
    for d in 0..dim {
        k[d] += WGK[10] * buf[d];
    }
    for (i, (&x, &w)) in XGK[..10].iter().zip(&WGK[..10]).enumerate() {
        let dx = half * x;
        for &node in &[center - dx, center + dx] {
            f(node, buf);
            for d in 0..dim {
                k[d] += w * buf[d];
                if i % 2 == 1 {
                    g[d] += WG[i / 2] * buf[d];
                }
            }
        }
    }
    let err = k
        .iter()
        .zip(&g)
        .map(|(kk, gg)| (half * (kk - gg)).abs())
        .collect();
    for v in &mut k {
        *v *= half;
    }
    (k, err)
}

/// Integrates a `dim`-component integrand over `[points[0], points[last]]`,
/// with the interior entries of `points` treated as breakpoints.
///
/// `f(x, out)` must write the integrand value at `x` into `out[..dim]`.
pub fn integrate_vec<F>(
    dim: usize,
    mut f: F,
    points: &[f64],
    tol: Tolerance,
    context: &str,
) -> Result<Estimate>
where
    F: FnMut(f64, &mut [f64]),
{
    assert!(points.len() >= 2, "need at least two integration limits");
    let mut buf = vec![0.0; dim];
    let mut panels: Vec<Panel> = Vec::new();
    let mut evaluations = 0;
    for w in points.windows(2) {
        let (a, b) = (w[0], w[1]);
        if !(b > a) {
            continue;
        }
        let (value, error) = kronrod(&mut f, a, b, dim, &mut buf);
        evaluations += 21;
        panels.push(Panel { a, b, value, error });
    }

    loop {
        let mut total = vec![0.0; dim];
        let mut total_err = vec![0.0; dim];
        for p in &panels {
            for d in 0..dim {
                total[d] += p.value[d];
                total_err[d] += p.error[d];
            }
        }
        let allowed: Vec<f64> = total.iter().map(|v| tol.allowed(*v)).collect();
        let converged = total_err.iter().zip(&allowed).all(|(e, a)| e <= a);
        if converged || panels.is_empty() {
            return Ok(Estimate {
                value: total,
                abs_error: total_err,
                evaluations,
            });
        }

        // Split the panel with the largest error relative to the allowance.
        let score = |p: &Panel| {
            p.error
                .iter()
                .zip(&allowed)
                .map(|(e, a)| e / a.max(f64::MIN_POSITIVE))
                .fold(0.0, f64::max)
        };
        let (idx, _) = panels
            .iter()
            .enumerate()
            .filter(|(_, p)| {
                let mid = 0.5 * (p.a + p.b);
                mid > p.a && mid < p.b
            })
            .map(|(i, p)| (i, score(p)))
            .fold((usize::MAX, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });

        if idx == usize::MAX || panels.len() >= tol.max_panels {
            let (worst, err, allow) = total_err
                .iter()
                .zip(&allowed)
                .map(|(e, a)| (e / a, *e, *a))
                .fold((0.0, 0.0, 0.0), |acc, x| if x.0 > acc.0 { x } else { acc });
            debug_assert!(worst > 1.0);
            return Err(Error::Quadrature {
                context: context.to_string(),
                error: err,
                tolerance: allow,
            });
        }

        let p = panels.swap_remove(idx);
        let mid = 0.5 * (p.a + p.b);
        for (a, b) in [(p.a, mid), (mid, p.b)] {
            let (value, error) = kronrod(&mut f, a, b, dim, &mut buf);
            evaluations += 21;
            panels.push(Panel { a, b, value, error });
        }
    }
}

/// Scalar convenience wrapper around [`integrate_vec`].
pub fn integrate<F>(mut f: F, points: &[f64], tol: Tolerance, context: &str) -> Result<ScalarEstimate>
where
    F: FnMut(f64) -> f64,
{
    let est = integrate_vec(1, |x, out| out[0] = f(x), points, tol, context)?;
    Ok(ScalarEstimate {
        value: est.value[0],
        abs_error: est.abs_error[0],
        evaluations: est.evaluations,
    })
}

/// Sorts, deduplicates and clips breakpoints to `[lo, hi]`, returning the
/// full list of panel boundaries including both limits.
pub fn panel_points(lo: f64, hi: f64, interior: &[f64]) -> Vec<f64> {
    let mut pts = vec![lo];
    let mut inner: Vec<f64> = interior
        .iter()
        .copied()
        .filter(|x| x.is_finite() && *x > lo && *x < hi)
        .collect();
    inner.sort_by(|a, b| a.partial_cmp(b).unwrap());
    inner.dedup();
    pts.extend(inner);
    pts.push(hi);
    pts
}
