use rand::{Rng, RngCore};

use super::{assemble, check_n, check_scales, sweep, unit_tangent, Control, Sample, Scaling, VerificationReport};
use crate::error::{Error, Result};
use crate::manifold::{Manifold, Point, Tangent};

fn inside_injectivity(m: &dyn Manifold, reach: f64) -> Result<()> {
    let inj = m.geometry().injectivity_radius;
    if reach >= 0.5 * inj {
        return Err(Error::domain(
            format!("sampled configurations reach {reach:.3e}, not well inside the injectivity radius"),
            inj,
        ));
    }
    Ok(())
}

/// `d(Exp_x(y+a), Exp_z(Γ_x^z y))` with `z = Exp_x(a)`.
pub fn two_step_residual(m: &dyn Manifold, x: &Point, a: &Tangent, y: &Tangent) -> Result<f64> {
    let (z, y_moved) = m.transport_along(x, a, y)?;
    let direct = m.exp(x, &y.lin_comb(1.0, a, 1.0))?;
    let two_step = m.exp(&z, &y_moved)?;
    m.dist(&direct, &two_step)
}

/// `‖Γ_y^z Γ_x^y w − Γ_x^z w‖`.
pub fn holonomy_residual(m: &dyn Manifold, x: &Point, y: &Point, z: &Point, w: &Tangent) -> Result<f64> {
    let via_y = m.transport(y, z, &m.transport(x, y, w)?)?;
    let direct = m.transport(x, z, w)?;
    Ok(via_y.lin_comb(1.0, &direct, -1.0).norm())
}

/// `d(Exp_x(w), Exp_y(Γ_x^y w))` with `y = Exp_x(v)`.
pub fn contraction_residual(m: &dyn Manifold, x: &Point, v: &Tangent, w: &Tangent) -> Result<f64> {
    let (y, w_moved) = m.transport_along(x, v, w)?;
    m.dist(&m.exp(x, w)?, &m.exp(&y, &w_moved)?)
}

/// `(‖Exp_x⁻¹(y) − Exp_x⁻¹(z)‖, d(y,z))`.
pub fn log_pair(m: &dyn Manifold, x: &Point, y: &Point, z: &Point) -> Result<(f64, f64)> {
    let ly = m.log(x, y)?;
    let lz = m.log(x, z)?;
    Ok((ly.lin_comb(1.0, &lz, -1.0).norm(), m.dist(y, z)?))
}

/// Two-step commutation: the residual is bounded by
/// `C·min{‖a‖,‖y‖}·(‖a‖+‖y‖)²` and decays cubically in the scale.
pub fn check_two_step(
    m: &dyn Manifold,
    n: usize,
    scales: &[f64],
    rng: &mut dyn RngCore,
    control: Control,
) -> Result<VerificationReport> {
    check_n(n)?;
    check_scales(scales)?;
    inside_injectivity(m, 2.0 * scales[0])?;
    let seed = rng.next_u64();
    let data = sweep(n, scales.len(), seed, |r| {
        let x = m.random_point(r);
        let da = unit_tangent(m, &x, r)?;
        let dy = unit_tangent(m, &x, r)?;
        let (alpha, beta): (f64, f64) = (r.gen_range(0.1..1.0), r.gen_range(0.1..1.0));
        scales
            .iter()
            .map(|s| {
                let a = da.scale(s * alpha);
                let y = dy.scale(s * beta);
                let (na, ny) = (a.norm(), y.norm());
                let res = two_step_residual(m, &x, &a, &y)?;
                Ok(Sample::new(res, na.min(ny) * (na + ny).powi(2)))
            })
            .collect()
    })?;
    Ok(assemble(
        Scaling {
            lemma_id: "two-step",
            scales,
            exponent: Some(3.0),
            control,
        },
        data,
    ))
}

/// Bi-Lipschitz log map: for `y, z` within diameter `R` of `x`,
/// `(1+c₂R²)⁻¹·d(y,z) ≤ ‖Exp_x⁻¹y − Exp_x⁻¹z‖ ≤ (1+c₃R²)·d(y,z)`, and the
/// distortion decays like `R²`. Reports `c2` and `c3` as notes.
pub fn check_log_bilipschitz(
    m: &dyn Manifold,
    n: usize,
    radii: &[f64],
    rng: &mut dyn RngCore,
    control: Control,
) -> Result<VerificationReport> {
    check_n(n)?;
    check_scales(radii)?;
    inside_injectivity(m, radii[0])?;
    let seed = rng.next_u64();
    let data = sweep(n, radii.len(), seed, |r| {
        let x = m.random_point(r);
        let d1 = unit_tangent(m, &x, r)?;
        let d2 = unit_tangent(m, &x, r)?;
        let (a, b): (f64, f64) = (r.gen_range(0.1..0.5), r.gen_range(0.1..0.5));
        radii
            .iter()
            .map(|big_r| {
                let y = m.exp(&x, &d1.scale(a * big_r))?;
                let z = m.exp(&x, &d2.scale(b * big_r))?;
                let (l, d) = log_pair(m, &x, &y, &z)?;
                if d <= 1e-9 * big_r {
                    return Ok(Sample::new(0.0, big_r * big_r));
                }
                let dev = (l / d).max(d / l) - 1.0;
                Ok(Sample {
                    residual: dev,
                    bound: big_r * big_r,
                    decay: dev,
                    aux: l / d - 1.0,
                })
            })
            .collect()
    })?;
    let (mut c2, mut c3) = (0.0f64, 0.0f64);
    for (k, row) in data.iter().enumerate() {
        let r2 = radii[k] * radii[k];
        for s in row {
            if s.aux >= 0.0 {
                c3 = c3.max(s.residual / r2);
            } else {
                c2 = c2.max(s.residual / r2);
            }
        }
    }
    let mut rep = assemble(
        Scaling {
            lemma_id: "log-bilipschitz",
            scales: radii,
            exponent: Some(2.0),
            control,
        },
        data,
    );
    rep.notes.push(("c2".into(), super::report::fmt_f64(c2)));
    rep.notes.push(("c3".into(), super::report::fmt_f64(c3)));
    Ok(rep)
}

/// Transport contraction: `d(Exp_x w, Exp_y Γ_x^y w) ≤ c₄·d(x,y)` for
/// `‖w‖ ≤ 1`, with the ratio stable as `d(x,y)` shrinks. Reports `c4_max`,
/// the largest ratio over all scales.
pub fn check_transport_contraction(
    m: &dyn Manifold,
    n: usize,
    scales: &[f64],
    rng: &mut dyn RngCore,
    control: Control,
) -> Result<VerificationReport> {
    check_n(n)?;
    check_scales(scales)?;
    inside_injectivity(m, scales[0] + 1.0)?;
    let seed = rng.next_u64();
    let data = sweep(n, scales.len(), seed, |r| {
        let x = m.random_point(r);
        let u = unit_tangent(m, &x, r)?;
        let w = m.sample_tangent_ball(&x, 1.0, r)?;
        scales
            .iter()
            .map(|s| {
                let v = u.scale(*s);
                Ok(Sample::new(contraction_residual(m, &x, &v, &w)?, *s))
            })
            .collect()
    })?;
    let c4_max = data
        .iter()
        .enumerate()
        .flat_map(|(k, row)| row.iter().map(move |s| s.residual / scales[k]))
        .fold(0.0, f64::max);
    let mut rep = assemble(
        Scaling {
            lemma_id: "transport-contraction",
            scales,
            exponent: None,
            control,
        },
        data,
    );
    rep.notes.push(("c4_max".into(), super::report::fmt_f64(c4_max)));
    Ok(rep)
}

/// Holonomy of a geodesic triangle:
/// `‖Γ_y^z Γ_x^y w − Γ_x^z w‖ ≤ c₅·d(x,y)·d(y,z)·‖w‖`, decaying quadratically.
pub fn check_holonomy(
    m: &dyn Manifold,
    n: usize,
    scales: &[f64],
    rng: &mut dyn RngCore,
    control: Control,
) -> Result<VerificationReport> {
    check_n(n)?;
    check_scales(scales)?;
    inside_injectivity(m, 2.0 * scales[0])?;
    let seed = rng.next_u64();
    let data = sweep(n, scales.len(), seed, |r| {
        let x = m.random_point(r);
        let a = unit_tangent(m, &x, r)?;
        let b = unit_tangent(m, &x, r)?;
        let w = unit_tangent(m, &x, r)?;
        let (alpha, beta): (f64, f64) = (r.gen_range(0.25..1.0), r.gen_range(0.25..1.0));
        scales
            .iter()
            .map(|s| {
                let y = m.exp(&x, &a.scale(s * alpha))?;
                let z = m.exp(&x, &b.scale(s * beta))?;
                let res = holonomy_residual(m, &x, &y, &z, &w)?;
                Ok(Sample::new(res, m.dist(&x, &y)? * m.dist(&y, &z)?))
            })
            .collect()
    })?;
    Ok(assemble(
        Scaling {
            lemma_id: "holonomy",
            scales,
            exponent: Some(2.0),
            control,
        },
        data,
    ))
}
