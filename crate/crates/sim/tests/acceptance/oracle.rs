//! Straight-line evaluations of the estimators' defining sums with explicit
//! loops, used to check the library on tiny instances.

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn aug(row: &[f64]) -> Vec<f64> {
    let mut v = vec![1.0];
    v.extend_from_slice(row);
    v
}

fn moments(rows: &[Vec<f64>]) -> (Vec<f64>, Vec<Vec<f64>>) {
    let m = rows.len() as f64;
    let p = rows[0].len();
    let mut mu = vec![0.0; p];
    for r in rows {
        for j in 0..p {
            mu[j] += r[j] / m;
        }
    }
    let mut c = vec![vec![0.0; p]; p];
    for r in rows {
        for i in 0..p {
            for j in 0..p {
                c[i][j] += (r[i] - mu[i]) * (r[j] - mu[j]) / m;
            }
        }
    }
    (mu, c)
}

fn quad(b: &[f64], c: &[Vec<f64>]) -> f64 {
    let mut s = 0.0;
    for i in 0..b.len() {
        for j in 0..b.len() {
            s += b[i] * c[i][j] * b[j];
        }
    }
    s
}

fn folds(assign: &[usize], k: usize) -> Vec<Vec<usize>> {
    (0..k).map(|f| (0..assign.len()).filter(|&i| assign[i] == f).collect()).collect()
}

pub struct MeanVar {
    pub theta: f64,
    pub sigma_eps_sq: f64,
    pub b_sq: f64,
    pub sigma_y_sq: f64,
    pub sigma_xi_sq: f64,
    pub sigma_nu_sq: f64,
}

/// Mean and variance estimators for raw covariates `x` (labeled), `u`
/// (unlabeled), fold labels and per-fold slopes (intercept first).
pub fn mean_variance(y: &[f64], x: &[Vec<f64>], u: &[Vec<f64>], assign: &[usize], slopes: &[Vec<f64>]) -> MeanVar {
    let k = slopes.len();
    let n = y.len() as f64;
    let ua: Vec<Vec<f64>> = u.iter().map(|r| aug(r)).collect();
    let (mu, c) = moments(&ua);
    let fl = folds(assign, k);
    let theta = (0..k)
        .map(|f| {
            let b = &slopes[f];
            let s: f64 = fl[f].iter().map(|&i| y[i] - dot(&aug(&x[i]), b)).sum();
            dot(&mu, b) + s / fl[f].len() as f64
        })
        .sum::<f64>()
        / k as f64;
    let (mut se, mut bs, mut sy) = (0.0, 0.0, 0.0);
    let mut eta = vec![];
    let mut xi2 = 0.0;
    for f in 0..k {
        let b = &slopes[f];
        let size = fl[f].len() as f64;
        let bcb = quad(b, &c);
        for &i in &fl[f] {
            let v: Vec<f64> = aug(&x[i]).iter().zip(&mu).map(|(a, m)| a - m).collect();
            let proj = dot(b, &v);
            let eps = y[i] - theta - proj;
            se += eps * eps / size / k as f64;
            bs += (bcb / size + 2.0 * proj * eps / size) / k as f64;
            sy += ((y[i] - theta).powi(2) + bcb - proj * proj) / size / k as f64;
            eta.push(eps * eps + 2.0 * proj * eps + bcb);
            xi2 += (proj * proj - bcb).powi(2) / n;
        }
    }
    MeanVar {
        theta,
        sigma_eps_sq: se,
        b_sq: bs,
        sigma_y_sq: sy,
        sigma_xi_sq: xi2,
        sigma_nu_sq: eta.iter().map(|e| (e - sy).powi(2)).sum::<f64>() / n,
    }
}

pub struct Effect {
    pub delta: f64,
    pub v_delta: f64,
    pub sigma_sq: f64,
    pub d_hat: f64,
    pub v_d: f64,
}

fn stacked(row: &[f64], d: bool) -> Vec<f64> {
    let a = aug(row);
    let zero = vec![0.0; a.len()];
    if d {
        [a, zero].concat()
    } else {
        [zero, a].concat()
    }
}

/// Treatment effect and effect size with known per-fold arm slopes and
/// propensity values `e[i]` (already trimmed).
#[allow(clippy::too_many_arguments)]
pub fn effect(
    y: &[f64],
    d: &[bool],
    x: &[Vec<f64>],
    ud: &[bool],
    ux: &[Vec<f64>],
    assign: &[usize],
    beta1: &[Vec<f64>],
    beta0: &[Vec<f64>],
    e: &[f64],
) -> Effect {
    let k = beta1.len();
    let n = y.len();
    let tau = n as f64 / ux.len() as f64;
    let fl = folds(assign, k);
    let (mu, _) = moments(&ux.iter().map(|r| aug(r)).collect::<Vec<_>>());
    let weights = |i: usize| if d[i] { (1.0 / e[i], 0.0) } else { (0.0, 1.0 / (1.0 - e[i])) };
    let delta = (0..k)
        .map(|f| {
            let (mut s1, mut s0) = (0.0, 0.0);
            for &i in &fl[f] {
                let (r, rho) = weights(i);
                s1 += r * (y[i] - dot(&beta1[f], &aug(&x[i])));
                s0 += rho * (y[i] - dot(&beta0[f], &aug(&x[i])));
            }
            let size = fl[f].len() as f64;
            dot(&beta1[f], &mu) + s1 / size - dot(&beta0[f], &mu) - s0 / size
        })
        .sum::<f64>()
        / k as f64;
    let mut nu_d = vec![0.0; n];
    let mut xi_d = vec![0.0; n];
    let (mut v1, mut v2) = (0.0, 0.0);
    for f in 0..k {
        let diff: Vec<f64> = beta1[f].iter().zip(&beta0[f]).map(|(a, b)| a - b).collect();
        let size = fl[f].len() as f64;
        for &i in &fl[f] {
            let xt = aug(&x[i]);
            let (r, rho) = weights(i);
            nu_d[i] = r * (y[i] - dot(&beta1[f], &xt)) - rho * (y[i] - dot(&beta0[f], &xt)) - (delta - dot(&diff, &mu));
            let v: Vec<f64> = xt.iter().zip(&mu).map(|(a, m)| a - m).collect();
            xi_d[i] = dot(&diff, &v);
            v1 += nu_d[i].powi(2) / size / k as f64;
            v2 += xi_d[i].powi(2) / size / k as f64;
        }
    }
    let wu: Vec<Vec<f64>> = ux.iter().zip(ud).map(|(r, &t)| stacked(r, t)).collect();
    let (mw, cw) = moments(&wu);
    let bw: Vec<Vec<f64>> = (0..k).map(|f| [beta1[f].clone(), beta0[f].clone()].concat()).collect();
    let theta = (0..k)
        .map(|f| {
            let s: f64 = fl[f].iter().map(|&i| y[i] - dot(&bw[f], &stacked(&x[i], d[i]))).sum();
            dot(&mw, &bw[f]) + s / fl[f].len() as f64
        })
        .sum::<f64>()
        / k as f64;
    let proj = |f: usize, i: usize| {
        let w = stacked(&x[i], d[i]);
        let v: Vec<f64> = w.iter().zip(&mw).map(|(a, b)| a - b).collect();
        dot(&bw[f], &v)
    };
    let mut sigma_sq = 0.0;
    for f in 0..k {
        for &i in &fl[f] {
            sigma_sq += ((y[i] - theta).powi(2) + quad(&bw[f], &cw) - proj(f, i).powi(2)) / fl[f].len() as f64 / k as f64;
        }
    }
    let (mut v3, mut v4, mut d_hat) = (0.0, 0.0, 0.0);
    if sigma_sq > 0.0 {
        let s = sigma_sq.sqrt();
        d_hat = delta / s;
        for f in 0..k {
            let bcb = quad(&bw[f], &cw);
            for &i in &fl[f] {
                let nu = bcb + (y[i] - theta).powi(2) - proj(f, i).powi(2) - sigma_sq;
                let xi = proj(f, i).powi(2) - bcb;
                let size = fl[f].len() as f64;
                v3 += (nu_d[i] / s - delta * nu / (2.0 * s.powi(3))).powi(2) / size / k as f64;
                v4 += (xi_d[i] / s - delta * xi / (2.0 * s.powi(3))).powi(2) / size / k as f64;
            }
        }
    }
    Effect {
        delta,
        v_delta: v1 + tau * v2,
        sigma_sq,
        d_hat,
        v_d: v3 + tau * v4,
    }
}
