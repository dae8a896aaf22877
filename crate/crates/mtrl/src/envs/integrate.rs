/// Classical fixed-step RK4 over `substeps` equal slices of `dt`.
pub(crate) fn rk4<const N: usize>(
    deriv: impl Fn(&[f64; N]) -> [f64; N],
    mut y: [f64; N],
    dt: f64,
    substeps: usize,
) -> [f64; N] {
    let h = dt / substeps as f64;
    for _ in 0..substeps {
        let k1 = deriv(&y);
        let k2 = deriv(&add_scaled(&y, &k1, h / 2.0));
        let k3 = deriv(&add_scaled(&y, &k2, h / 2.0));
        let k4 = deriv(&add_scaled(&y, &k3, h));
        for i in 0..N {
            y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
    }
    y
}

fn add_scaled<const N: usize>(y: &[f64; N], k: &[f64; N], h: f64) -> [f64; N] {
    let mut out = *y;
    for i in 0..N {
        out[i] += h * k[i];
    }
    out
}
