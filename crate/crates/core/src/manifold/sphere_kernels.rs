//! Closed-form unit-sphere maps on plain slices, shared by the sphere and the
//! row-wise oblique manifold.

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub(crate) fn normalize(x: &mut [f64]) {
    let n = norm(x);
    if n > 0.0 {
        x.iter_mut().for_each(|c| *c /= n);
    }
}

pub(crate) fn project(x: &[f64], a: &[f64]) -> Vec<f64> {
    let c = dot(x, a);
    a.iter().zip(x).map(|(ai, xi)| ai - c * xi).collect()
}

/// `cos‖v‖·x + sin‖v‖·v/‖v‖`, renormalized.
pub(crate) fn exp(x: &[f64], v: &[f64]) -> Vec<f64> {
    let theta = norm(v);
    if theta == 0.0 {
        return x.to_vec();
    }
    let (s, c) = theta.sin_cos();
    let mut out: Vec<f64> = x.iter().zip(v).map(|(xi, vi)| c * xi + s * vi / theta).collect();
    normalize(&mut out);
    out
}

/// Tangent direction `y − ⟨x,y⟩x`, its norm and the cosine `⟨x,y⟩`.
fn chord(x: &[f64], y: &[f64]) -> (Vec<f64>, f64, f64) {
    let c = dot(x, y);
    let u: Vec<f64> = y.iter().zip(x).map(|(yi, xi)| yi - c * xi).collect();
    let s = norm(&u);
    (u, s, c)
}

pub(crate) fn dist(x: &[f64], y: &[f64]) -> f64 {
    let (_, s, c) = chord(x, y);
    s.atan2(c)
}

/// `None` at the antipode, where the inverse exponential map is undefined.
pub(crate) fn log(x: &[f64], y: &[f64]) -> Option<Vec<f64>> {
    let (u, s, c) = chord(x, y);
    if s == 0.0 {
        return if c > 0.0 { Some(vec![0.0; x.len()]) } else { None };
    }
    if s < 1e-12 && c < 0.0 {
        return None;
    }
    let theta = s.atan2(c);
    Some(u.into_iter().map(|ui| theta * ui / s).collect())
}

/// Transport along the great circle `t ↦ exp(x, t·v)`.
///
/// Only the component of `w` along `v` rotates; the rest is untouched.
pub(crate) fn transport_along(x: &[f64], v: &[f64], w: &[f64]) -> Vec<f64> {
    let theta = norm(v);
    if theta == 0.0 {
        return w.to_vec();
    }
    let (s, c) = theta.sin_cos();
    let along = dot(v, w) / theta;
    w.iter()
        .zip(v)
        .zip(x)
        .map(|((wi, vi), xi)| wi + ((c - 1.0) * vi / theta - s * xi) * along)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn quarter_turn() {
        let y = exp(&[1.0, 0.0, 0.0], &[0.0, FRAC_PI_2, 0.0]);
        assert!((y[0]).abs() < 1e-15 && (y[1] - 1.0).abs() < 1e-15);
        let v = log(&[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0]).unwrap();
        assert!((v[1] - FRAC_PI_2).abs() < 1e-15);
    }

    #[test]
    fn antipode_has_no_log() {
        assert!(log(&[1.0, 0.0, 0.0], &[-1.0, 0.0, 0.0]).is_none());
        assert!((dist(&[1.0, 0.0, 0.0], &[-1.0, 0.0, 0.0]) - std::f64::consts::PI).abs() < 1e-15);
    }
}
