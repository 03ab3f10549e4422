//! Smooth positive test fields with closed-form derivatives, in any
//! dimension, for chain-rule and `Pi_psi` checks.

use dunkl_liyau::{FnField, StdPsi};

pub struct CorpusField {
    pub name: &'static str,
    /// Even in every coordinate.
    pub invariant: bool,
    pub field: FnField,
}

fn weights(d: usize, first: f64, step: f64) -> Vec<f64> {
    (0..d).map(|i| first - step * i as f64).collect()
}

/// `exp(c.x) + 1/2`.
fn exp_linear(d: usize) -> CorpusField {
    let c = weights(d, 0.3, 0.1);
    let (c1, c2, c3) = (c.clone(), c.clone(), c);
    CorpusField {
        name: "exp-linear",
        invariant: false,
        field: FnField::new(
            d,
            move |x| dot(&c1, x).exp() + 0.5,
            move |x| {
                let e = dot(&c2, x).exp();
                c2.iter().map(|ci| ci * e).collect()
            },
            move |x| {
                let e = dot(&c3, x).exp();
                c3.iter().map(|ci| ci * ci * e).collect()
            },
        ),
    }
}

/// `1 + sum w_i x_i^2`.
fn quadratic(d: usize) -> CorpusField {
    let w = weights(d, 1.0, 0.3);
    let (w1, w2, w3) = (w.clone(), w.clone(), w);
    CorpusField {
        name: "even-quadratic",
        invariant: true,
        field: FnField::new(
            d,
            move |x| 1.0 + w1.iter().zip(x).map(|(w, v)| w * v * v).sum::<f64>(),
            move |x| w2.iter().zip(x).map(|(w, v)| 2.0 * w * v).collect(),
            move |_| w3.iter().map(|w| 2.0 * w).collect(),
        ),
    }
}

/// `2 + sin(x_0) prod_{i>0} cos(0.7 x_i)`.
fn trig(d: usize) -> CorpusField {
    fn parts(x: &[f64]) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
        let mut v = Vec::with_capacity(x.len());
        let mut dv = Vec::with_capacity(x.len());
        let mut ddv = Vec::with_capacity(x.len());
        for (i, &xi) in x.iter().enumerate() {
            if i == 0 {
                v.push(xi.sin());
                dv.push(xi.cos());
                ddv.push(-xi.sin());
            } else {
                v.push((0.7 * xi).cos());
                dv.push(-0.7 * (0.7 * xi).sin());
                ddv.push(-0.49 * (0.7 * xi).cos());
            }
        }
        (v, dv, ddv)
    }
    fn others(v: &[f64], i: usize) -> f64 {
        v.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, f)| f).product()
    }
    CorpusField {
        name: "trig",
        invariant: false,
        field: FnField::new(
            d,
            |x| 2.0 + parts(x).0.iter().product::<f64>(),
            |x| {
                let (v, dv, _) = parts(x);
                (0..x.len()).map(|i| dv[i] * others(&v, i)).collect()
            },
            |x| {
                let (v, _, ddv) = parts(x);
                (0..x.len()).map(|i| ddv[i] * others(&v, i)).collect()
            },
        ),
    }
}

/// `1 / (1 + q)` with `q = sum (x_i - m_i)^2 / (2 s_i)`, an off-centre
/// bump with algebraic tails so that `psi(f)` stays well conditioned far out.
fn rational_bump(d: usize) -> CorpusField {
    let m = weights(d, 0.4, 0.7);
    let s = weights(d, 1.0, -2.0);
    let (m1, s1, m2, s2, m3, s3) = (m.clone(), s.clone(), m.clone(), s.clone(), m, s);
    let q = |m: &[f64], s: &[f64], x: &[f64]| -> f64 {
        (0..x.len()).map(|i| (x[i] - m[i]).powi(2) / (2.0 * s[i])).sum()
    };
    CorpusField {
        name: "rational-bump",
        invariant: false,
        field: FnField::new(
            d,
            move |x| 1.0 / (1.0 + q(&m1, &s1, x)),
            move |x| {
                let r = 1.0 / (1.0 + q(&m2, &s2, x));
                (0..x.len()).map(|i| -(x[i] - m2[i]) / s2[i] * r * r).collect()
            },
            move |x| {
                let r = 1.0 / (1.0 + q(&m3, &s3, x));
                (0..x.len())
                    .map(|i| {
                        let qi = (x[i] - m3[i]) / s3[i];
                        -r * r / s3[i] + 2.0 * qi * qi * r * r * r
                    })
                    .collect()
            },
        ),
    }
}

/// `3/2 + tanh(c.x)`.
fn sigmoid(d: usize) -> CorpusField {
    let c = weights(d, 0.8, 0.5);
    let (c1, c2, c3) = (c.clone(), c.clone(), c);
    CorpusField {
        name: "sigmoid",
        invariant: false,
        field: FnField::new(
            d,
            move |x| 1.5 + dot(&c1, x).tanh(),
            move |x| {
                let s = 1.0 - dot(&c2, x).tanh().powi(2);
                c2.iter().map(|ci| ci * s).collect()
            },
            move |x| {
                let th = dot(&c3, x).tanh();
                let dd = -2.0 * th * (1.0 - th * th);
                c3.iter().map(|ci| ci * ci * dd).collect()
            },
        ),
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Five fields in dimension `d`, all strictly positive.
pub fn fields(d: usize) -> Vec<CorpusField> {
    vec![exp_linear(d), quadratic(d), trig(d), rational_bump(d), sigmoid(d)]
}

pub const PSIS: [(&str, StdPsi); 4] = [
    ("log", StdPsi::Log),
    ("exp", StdPsi::Exp),
    ("square", StdPsi::Square),
    ("cube", StdPsi::Cube),
];
