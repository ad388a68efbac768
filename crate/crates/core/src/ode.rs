//! Adaptive Dormand–Prince 8(5,3) integration of complex matrix ODEs.
//!
//! The integrator stops exactly on every requested output time, so callers
//! align steps with coefficient breakpoints and quadrature nodes by listing
//! them as stops.

use nalgebra::{Complex, ComplexField};

use crate::scalar::{lit, CMat, Real};

#[derive(Debug, Clone, Copy)]
pub struct OdeOptions<T> {
    pub rtol: T,
    pub atol: T,
    pub max_steps: usize,
    /// Initial step; estimated from the first derivative when `None`.
    pub h_init: Option<T>,
}

impl<T: Real> OdeOptions<T> {
    pub fn with_tol(tol: T) -> Self {
        OdeOptions { rtol: tol, atol: tol, max_steps: 2_000_000, h_init: None }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct OdeStats<T> {
    pub accepted: usize,
    pub rejected: usize,
    /// Sum of accepted local error norms scaled back to absolute units.
    pub err_est: T,
    /// Step size proposed for the next step; lets callers chain integrations.
    pub next_h: T,
}

/// Why an integration stopped early.
#[derive(Debug, Clone, Copy)]
pub enum OdeFailure<T> {
    StepSizeUnderflow { t: T },
    MaxSteps { t: T },
}

struct Tableau<T> {
    c: [T; 12],
    a: [[T; 11]; 12],
    b: [T; 12],
    er: [T; 12],
    bhh: [T; 3],
}

#[rustfmt::skip]
fn tableau<T: Real>() -> Tableau<T> {
    let mut a = [[0.0f64; 11]; 12];
    a[1][0] = 5.26001519587677318785587544488E-2;
    a[2][0] = 1.97250569845378994544595329183E-2;
    a[2][1] = 5.91751709536136983633785987549E-2;
    a[3][0] = 2.95875854768068491816892993775E-2;
    a[3][2] = 8.87627564304205475450678981324E-2;
    a[4][0] = 2.41365134159266685502369798665E-1;
    a[4][2] = -8.84549479328286085344864962717E-1;
    a[4][3] = 9.24834003261792003115737966543E-1;
    a[5][0] = 3.7037037037037037037037037037E-2;
    a[5][3] = 1.70828608729473871279604482173E-1;
    a[5][4] = 1.25467687566822425016691814123E-1;
    a[6][0] = 3.7109375E-2;
    a[6][3] = 1.70252211019544039314978060272E-1;
    a[6][4] = 6.02165389804559606850219397283E-2;
    a[6][5] = -1.7578125E-2;
    a[7][0] = 3.70920001185047927108779319836E-2;
    a[7][3] = 1.70383925712239993810214054705E-1;
    a[7][4] = 1.07262030446373284651809199168E-1;
    a[7][5] = -1.53194377486244017527936158236E-2;
    a[7][6] = 8.27378916381402288758473766002E-3;
    a[8][0] = 6.24110958716075717114429577812E-1;
    a[8][3] = -3.36089262944694129406857109825E0;
    a[8][4] = -8.68219346841726006818189891453E-1;
    a[8][5] = 2.75920996994467083049415600797E1;
    a[8][6] = 2.01540675504778934086186788979E1;
    a[8][7] = -4.34898841810699588477366255144E1;
    a[9][0] = 4.77662536438264365890433908527E-1;
    a[9][3] = -2.48811461997166764192642586468E0;
    a[9][4] = -5.90290826836842996371446475743E-1;
    a[9][5] = 2.12300514481811942347288949897E1;
    a[9][6] = 1.52792336328824235832596922938E1;
    a[9][7] = -3.32882109689848629194453265587E1;
    a[9][8] = -2.03312017085086261358222928593E-2;
    a[10][0] = -9.3714243008598732571704021658E-1;
    a[10][3] = 5.18637242884406370830023853209E0;
    a[10][4] = 1.09143734899672957818500254654E0;
    a[10][5] = -8.14978701074692612513997267357E0;
    a[10][6] = -1.85200656599969598641566180701E1;
    a[10][7] = 2.27394870993505042818970056734E1;
    a[10][8] = 2.49360555267965238987089396762E0;
    a[10][9] = -3.0467644718982195003823669022E0;
    a[11][0] = 2.27331014751653820792359768449E0;
    a[11][3] = -1.05344954667372501984066689879E1;
    a[11][4] = -2.00087205822486249909675718444E0;
    a[11][5] = -1.79589318631187989172765950534E1;
    a[11][6] = 2.79488845294199600508499808837E1;
    a[11][7] = -2.85899827713502369474065508674E0;
    a[11][8] = -8.87285693353062954433549289258E0;
    a[11][9] = 1.23605671757943030647266201528E1;
    a[11][10] = 6.43392746015763530355970484046E-1;

    let c = [
        0.0,
        0.526001519587677318785587544488E-01,
        0.789002279381515978178381316732E-01,
        0.118350341907227396726757197510E+00,
        0.281649658092772603273242802490E+00,
        0.333333333333333333333333333333E+00,
        0.25E+00,
        0.307692307692307692307692307692E+00,
        0.651282051282051282051282051282E+00,
        0.6E+00,
        0.857142857142857142857142857142E+00,
        1.0,
    ];
    let b = [
        5.42937341165687622380535766363E-2, 0.0, 0.0, 0.0, 0.0,
        4.45031289275240888144113950566E0,
        1.89151789931450038304281599044E0,
        -5.8012039600105847814672114227E0,
        3.1116436695781989440891606237E-1,
        -1.52160949662516078556178806805E-1,
        2.01365400804030348374776537501E-1,
        4.47106157277725905176885569043E-2,
    ];
    let er = [
        0.1312004499419488073250102996E-01, 0.0, 0.0, 0.0, 0.0,
        -0.1225156446376204440720569753E+01,
        -0.4957589496572501915214079952E+00,
        0.1664377182454986536961530415E+01,
        -0.3503288487499736816886487290E+00,
        0.3341791187130174790297318841E+00,
        0.8192320648511571246570742613E-01,
        -0.2235530786388629525884427845E-01,
    ];
    let bhh = [
        0.244094488188976377952755905512E+00,
        0.733846688281611857341361741547E+00,
        0.220588235294117647058823529412E-01,
    ];
    Tableau {
        c: c.map(lit),
        a: a.map(|row| row.map(lit)),
        b: b.map(lit),
        er: er.map(lit),
        bhh: bhh.map(lit),
    }
}

fn axpy<T: Real>(dst: &mut CMat<T>, a: Complex<T>, src: &CMat<T>) {
    for (d, s) in dst.iter_mut().zip(src.iter()) {
        *d += *s * a;
    }
}

/// Integrates `y' = f(t, y)` from `t0` through every time in `stops`
/// (strictly increasing, all `> t0`), calling `output(i, &y)` on arrival at
/// `stops[i]`. Returns the final state.
pub fn integrate<T, F, O>(
    mut f: F,
    t0: T,
    stops: &[T],
    y0: CMat<T>,
    opts: &OdeOptions<T>,
    mut output: O,
) -> Result<(CMat<T>, OdeStats<T>), OdeFailure<T>>
where
    T: Real,
    F: FnMut(T, &CMat<T>, &mut CMat<T>),
    O: FnMut(usize, &CMat<T>),
{
    let tab = tableau::<T>();
    let (r, c) = y0.shape();
    let n = r * c;
    let mut y = y0;
    let mut t = t0;
    let mut k: Vec<CMat<T>> = (0..12).map(|_| CMat::zeros(r, c)).collect();
    let mut tmp = CMat::zeros(r, c);
    let mut ynew = CMat::zeros(r, c);
    let mut stats = OdeStats { accepted: 0, rejected: 0, err_est: T::zero(), next_h: T::zero() };
    let safe = lit::<T>(0.9);
    let facc1 = lit::<T>(1.0 / 0.333);
    let facc2 = lit::<T>(1.0 / 6.0);
    let expo = lit::<T>(1.0 / 8.0);
    let tiny = T::default_epsilon() * lit(16.0);

    let Some(&t_end) = stops.last() else {
        return Ok((y, stats));
    };
    f(t, &y, &mut k[0]);
    let mut h = match opts.h_init {
        Some(h) if h > T::zero() => h,
        _ => {
            let dnf = k[0].norm();
            let dny = y.norm();
            let span = t_end - t0;
            let h0 = if dnf <= lit(1e-10) || dny <= lit(1e-10) {
                lit::<T>(1e-3) * span
            } else {
                (dny / dnf) * lit(0.01)
            };
            h0.min(span)
        }
    };
    let mut steps = 0usize;

    for (idx, &t_stop) in stops.iter().enumerate() {
        while t < t_stop {
            steps += 1;
            if steps > opts.max_steps {
                return Err(OdeFailure::MaxSteps { t });
            }
            let remaining = t_stop - t;
            let last = h >= remaining * (T::one() - tiny);
            let h_try = if last { remaining } else { h };
            if h_try <= tiny * t.abs().max(T::one()) {
                return Err(OdeFailure::StepSizeUnderflow { t });
            }

            for s in 1..12 {
                tmp.copy_from(&y);
                for j in 0..s {
                    let aij = tab.a[s][j];
                    if aij != T::zero() {
                        axpy(&mut tmp, Complex::new(aij * h_try, T::zero()), &k[j]);
                    }
                }
                let (head, tail) = k.split_at_mut(s);
                let _ = head;
                f(t + tab.c[s] * h_try, &tmp, &mut tail[0]);
            }
            // Eighth-order solution and the two embedded error estimates.
            ynew.copy_from(&y);
            for j in 0..12 {
                if tab.b[j] != T::zero() {
                    axpy(&mut ynew, Complex::new(tab.b[j] * h_try, T::zero()), &k[j]);
                }
            }
            let mut err = T::zero();
            let mut err2 = T::zero();
            for i in 0..n {
                let sk = opts.atol + opts.rtol * y[i].modulus().max(ynew[i].modulus());
                let mut bsum = Complex::new(T::zero(), T::zero());
                let mut e5 = Complex::new(T::zero(), T::zero());
                for j in 0..12 {
                    if tab.b[j] != T::zero() {
                        bsum += k[j][i] * tab.b[j];
                    }
                    if tab.er[j] != T::zero() {
                        e5 += k[j][i] * tab.er[j];
                    }
                }
                let e3 = bsum - k[0][i] * tab.bhh[0] - k[8][i] * tab.bhh[1] - k[11][i] * tab.bhh[2];
                err2 += (e3.modulus() / sk).powi(2);
                err += (e5.modulus() / sk).powi(2);
            }
            let mut deno = err + lit::<T>(0.01) * err2;
            if deno <= T::zero() {
                deno = T::one();
            }
            let err = h_try * err * (T::one() / (deno * lit(n as f64))).sqrt();
            let fac11 = err.powf(expo);

            if err <= T::one() {
                stats.accepted += 1;
                stats.err_est += err * opts.atol.max(opts.rtol * ynew.norm());
                t = if last { t_stop } else { t + h_try };
                std::mem::swap(&mut y, &mut ynew);
                f(t, &y, &mut k[0]);
                let fac = facc2.max(facc1.min(fac11 / safe));
                let h_new = h_try / fac;
                // A step shortened to land on a stop should not shrink the next one.
                h = if last { h_new.max(h) } else { h_new };
            } else {
                stats.rejected += 1;
                h = h_try / facc1.min(fac11 / safe);
            }
        }
        output(idx, &y);
    }
    stats.next_h = h;
    Ok((y, stats))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{cplx, creal};

    #[test]
    fn harmonic_oscillator_to_high_accuracy() {
        // y0' = y1, y1' = -y0 over one period.
        let rhs = |_t: f64, y: &CMat<f64>, dy: &mut CMat<f64>| {
            dy[(0, 0)] = y[(1, 0)];
            dy[(1, 0)] = -y[(0, 0)];
        };
        let y0 = CMat::from_column_slice(2, 1, &[creal(1.0), creal(0.0)]);
        let tau = 2.0 * std::f64::consts::PI;
        let (y, stats) = integrate(rhs, 0.0, &[tau], y0, &OdeOptions::with_tol(1e-12), |_, _| {}).unwrap();
        assert!((y[(0, 0)].re - 1.0).abs() < 1e-10);
        assert!(y[(1, 0)].re.abs() < 1e-10);
        assert!(stats.accepted > 0);
    }

    #[test]
    fn complex_exponential_with_stops() {
        let lam = cplx(0.3, 2.0);
        let rhs = move |_t: f64, y: &CMat<f64>, dy: &mut CMat<f64>| {
            dy[(0, 0)] = y[(0, 0)] * lam;
        };
        let stops: Vec<f64> = (1..=10).map(|i| i as f64 * 0.1).collect();
        let mut seen = Vec::new();
        let y0 = CMat::from_element(1, 1, creal(1.0));
        integrate(rhs, 0.0, &stops, y0, &OdeOptions::with_tol(1e-12), |i, y| seen.push((stops[i], y[(0, 0)]))).unwrap();
        assert_eq!(seen.len(), 10);
        for (t, v) in seen {
            let exact = (lam * t).exp();
            assert!((v - exact).modulus() < 1e-10 * exact.modulus().max(1.0));
        }
    }
}
