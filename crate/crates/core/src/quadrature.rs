//! Globally adaptive Gauss–Kronrod (7/15) quadrature for vector-valued
//! complex integrands.

use num_complex::Complex64;

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
// Gauss weights for the odd-indexed Kronrod nodes
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

struct Piece {
    a: f64,
    b: f64,
    value: Vec<Complex64>,
    error: f64,
}

fn norm(v: &[Complex64]) -> f64 {
    v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
}

fn rule<F>(f: &F, a: f64, b: f64, dim: usize, buf: &mut [Complex64]) -> Piece
where
    F: Fn(f64, &mut [Complex64]),
{
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut kron = vec![Complex64::new(0.0, 0.0); dim];
    let mut gauss = vec![Complex64::new(0.0, 0.0); dim];
    f(c, buf);
    for d in 0..dim {
        kron[d] += buf[d] * WGK[7];
        gauss[d] += buf[d] * WG[3];
    }
    for k in 0..7 {
        for x in [c - h * XGK[k], c + h * XGK[k]] {
            f(x, buf);
            for d in 0..dim {
                kron[d] += buf[d] * WGK[k];
                if k % 2 == 1 {
                    gauss[d] += buf[d] * WG[k / 2];
                }
            }
        }
    }
    for d in 0..dim {
        kron[d] *= h;
        gauss[d] *= h;
    }
    let diff: Vec<Complex64> = kron.iter().zip(&gauss).map(|(k, g)| k - g).collect();
    Piece {
        a,
        b,
        error: norm(&diff),
        value: kron,
    }
}

/// Integrate `f` over `[a, b]`. `f(x, out)` writes `dim` values.
///
/// Stops when the summed error estimate drops below
/// `rel_tol * |I| + abs_tol` (Euclidean norm over components).
/// Returns `Err(best estimate)` when `max_pieces` is exhausted first.
pub fn integrate_vec<F>(
    f: F,
    a: f64,
    b: f64,
    dim: usize,
    rel_tol: f64,
    abs_tol: f64,
    max_pieces: usize,
) -> Result<Vec<Complex64>, Vec<Complex64>>
where
    F: Fn(f64, &mut [Complex64]),
{
    let mut buf = vec![Complex64::new(0.0, 0.0); dim];
    let mut pieces = vec![rule(&f, a, b, dim, &mut buf)];
    loop {
        let mut total = vec![Complex64::new(0.0, 0.0); dim];
        let mut err = 0.0;
        for p in &pieces {
            for d in 0..dim {
                total[d] += p.value[d];
            }
            err += p.error;
        }
        // roundoff floor of the 15-point sum itself
        let floor = 50.0 * f64::EPSILON * norm(&total);
        if err <= (rel_tol * norm(&total)).max(abs_tol).max(floor) {
            return Ok(total);
        }
        if pieces.len() >= max_pieces {
            return Err(total);
        }
        let worst = pieces
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.error.total_cmp(&y.1.error))
            .map(|(i, _)| i)
            .unwrap();
        let p = pieces.swap_remove(worst);
        let m = 0.5 * (p.a + p.b);
        pieces.push(rule(&f, p.a, m, dim, &mut buf));
        pieces.push(rule(&f, m, p.b, dim, &mut buf));
    }
}
