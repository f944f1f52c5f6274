use crate::error::Result;
use crate::operators::CrossoverConfig;
use crate::rng::RngStream;
use crate::space::RealVector;

/// Arithmetical crossover: `α p1 + (1 - α) p2` per gene.
pub fn ax_crossover(p1: &RealVector, p2: &RealVector, alpha: f64) -> Result<RealVector> {
    p1.check_same_dim(p2)?;
    Ok(p1
        .iter()
        .zip(p2.iter())
        .map(|(a, b)| alpha * a + (1.0 - alpha) * b)
        .collect())
}

/// Flat crossover: each gene uniform on the parental interval.
pub fn fx_crossover(p1: &RealVector, p2: &RealVector, rng: &mut RngStream) -> Result<RealVector> {
    p1.check_same_dim(p2)?;
    Ok(p1
        .iter()
        .zip(p2.iter())
        .map(|(&a, &b)| {
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            rng.uniform_in(lo, hi)
        })
        .collect())
}

/// Blend crossover: each gene uniform on the parental interval widened by
/// `α I` on both sides.
pub fn blx_alpha_crossover(
    p1: &RealVector,
    p2: &RealVector,
    alpha: f64,
    rng: &mut RngStream,
) -> Result<RealVector> {
    p1.check_same_dim(p2)?;
    Ok(p1
        .iter()
        .zip(p2.iter())
        .map(|(&a, &b)| {
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            let ext = alpha * (hi - lo);
            rng.uniform_in(lo - ext, hi + ext)
        })
        .collect())
}

/// SBX spread factor for a uniform draw `u`.
pub fn sbx_beta(u: f64, eta: f64) -> f64 {
    let e = 1.0 / (eta + 1.0);
    if u <= 0.5 {
        (2.0 * u).powf(e)
    } else {
        (1.0 / (2.0 * (1.0 - u))).powf(e)
    }
}

/// The symmetric SBX pair for one gene.
#[inline]
pub fn sbx_gene(a: f64, b: f64, beta: f64) -> (f64, f64) {
    (
        0.5 * ((1.0 + beta) * a + (1.0 - beta) * b),
        0.5 * ((1.0 - beta) * a + (1.0 + beta) * b),
    )
}

pub fn sbx_crossover(
    p1: &RealVector,
    p2: &RealVector,
    eta: f64,
    rng: &mut RngStream,
) -> Result<(RealVector, RealVector)> {
    p1.check_same_dim(p2)?;
    let mut c1 = Vec::with_capacity(p1.dim());
    let mut c2 = Vec::with_capacity(p1.dim());
    for (&a, &b) in p1.iter().zip(p2.iter()) {
        let mut u = rng.uniform();
        while u >= 1.0 {
            u = rng.uniform();
        }
        let (x, y) = sbx_gene(a, b, sbx_beta(u, eta));
        c1.push(x);
        c2.push(y);
    }
    Ok((c1.into(), c2.into()))
}

/// Laplace-distributed coefficient for `u` in `(0, 1)`.
pub fn laplace_beta(u: f64, a: f64, b: f64) -> f64 {
    if u <= 0.5 {
        a - b * u.ln()
    } else {
        a + b * u.ln()
    }
}

#[inline]
pub fn laplace_gene(x: f64, y: f64, beta: f64) -> (f64, f64) {
    let d = beta * (x - y).abs();
    (x + d, y + d)
}

pub fn laplace_crossover(
    p1: &RealVector,
    p2: &RealVector,
    a: f64,
    b: f64,
    rng: &mut RngStream,
) -> Result<(RealVector, RealVector)> {
    p1.check_same_dim(p2)?;
    let mut c1 = Vec::with_capacity(p1.dim());
    let mut c2 = Vec::with_capacity(p1.dim());
    for (&x, &y) in p1.iter().zip(p2.iter()) {
        let beta = laplace_beta(rng.open_uniform(), a, b);
        let (o1, o2) = laplace_gene(x, y, beta);
        c1.push(o1);
        c2.push(o2);
    }
    Ok((c1.into(), c2.into()))
}

/// One PSOX gene: `w p + c1 r1 (pbest - p) + c2 r2 (gbest - p)`.
#[inline]
#[allow(clippy::too_many_arguments)]
pub fn psox_gene(
    p: f64,
    pbest: f64,
    gbest: f64,
    w: f64,
    c1: f64,
    c2: f64,
    r1: f64,
    r2: f64,
) -> f64 {
    w * p + c1 * r1 * (pbest - p) + c2 * r2 * (gbest - p)
}

/// PSO-inspired crossover.
///
/// `p_i` is the individual being varied, `pbest_j` the historical best of a
/// different population slot and `gbest` the global historical best. Choosing
/// `j != i` is the caller's job.
pub fn psox_crossover(
    p_i: &RealVector,
    pbest_j: &RealVector,
    gbest: &RealVector,
    cfg: &CrossoverConfig,
    rng: &mut RngStream,
) -> Result<RealVector> {
    p_i.check_same_dim(pbest_j)?;
    p_i.check_same_dim(gbest)?;
    let (w, c1, c2) = (cfg.psox_w, cfg.psox_c1, cfg.psox_c2);
    if cfg.psox_per_gene {
        Ok((0..p_i.dim())
            .map(|k| {
                let r1 = rng.uniform();
                let r2 = rng.uniform();
                psox_gene(p_i[k], pbest_j[k], gbest[k], w, c1, c2, r1, r2)
            })
            .collect())
    } else {
        let r1 = rng.uniform();
        let r2 = rng.uniform();
        Ok((0..p_i.dim())
            .map(|k| psox_gene(p_i[k], pbest_j[k], gbest[k], w, c1, c2, r1, r2))
            .collect())
    }
}
