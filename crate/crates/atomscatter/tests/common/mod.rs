//! Shared test helpers: an adaptive Gauss–Kronrod integrator used as an
//! oracle, and noise-free synthetic data.
#![allow(dead_code)]

use atomscatter::simulate::{self, SimConfig};
use atomscatter::theory::{AtomParams, PhotonParams};
use atomscatter::{Histogram, Label, TimeWindow};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = WGK[7] * fc;
    let mut g = WG[3] * fc;
    for j in 0..7 {
        let s = f(c - h * XGK[j]) + f(c + h * XGK[j]);
        k += WGK[j] * s;
        if j % 2 == 1 {
            g += WG[j / 2] * s;
        }
    }
    (k * h, ((k - g) * h).abs())
}

/// Adaptive G7/K15 quadrature of `f` over `[a, b]` to absolute tolerance `tol`.
pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn rec(f: &impl Fn(f64) -> f64, a: f64, b: f64, density: f64, depth: u32) -> f64 {
        let (v, err) = gk15(f, a, b);
        if err <= density * (b - a) || err <= 1e-15 * v.abs() || depth >= 30 {
            return v;
        }
        let m = 0.5 * (a + b);
        rec(f, a, m, density, depth + 1) + rec(f, m, b, density, depth + 1)
    }
    rec(&f, a, b, tol / (b - a), 0)
}

/// Simulator configuration at natural linewidth with overlap `lambda` and
/// bandwidth `ratio`·Γ0 starting at t = 0.
pub fn config(lambda: f64, ratio: f64, n_heralds: u64) -> SimConfig {
    let atom = AtomParams::from_linewidth_mhz(6.07, lambda).unwrap();
    let photon = PhotonParams::relative_to(&atom, ratio, 0.0).unwrap();
    SimConfig::new(atom, photon, n_heralds)
}

/// Noise-free histogram pair over `window` with `bin_width` bins.
pub fn noise_free(
    lambda: f64,
    ratio: f64,
    window: TimeWindow,
    bin_width: f64,
) -> (SimConfig, Histogram, Histogram) {
    let mut c = config(lambda, ratio, 1_000_000_000_000_000);
    c.window = window;
    c.bin_width = bin_width;
    let r = simulate::expected_histogram(&c, Label::Reference).unwrap();
    let a = simulate::expected_histogram(&c, Label::WithAtom).unwrap();
    (c, r, a)
}

/// Long window over which the atom has fully decayed.
pub const LONG_WINDOW: TimeWindow = TimeWindow {
    t_min: -10e-9,
    t_max: 400e-9,
};
