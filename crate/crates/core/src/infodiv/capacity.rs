use serde::Serialize;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Capacity {
    /// Capacity in nats per channel use.
    pub nats: f64,
    /// Capacity-achieving input law.
    pub input: Vec<f64>,
    /// Upper minus lower bound at termination.
    pub gap: f64,
    pub iterations: usize,
}

/// Blahut–Arimoto iteration for the channel with transition rows `w[x][y]`.
///
/// Stops when the standard upper and lower capacity bounds are within `tol`.
pub fn blahut_arimoto(w: &[&[f64]], tol: f64, max_iter: usize) -> Capacity {
    let nx = w.len();
    let ny = w.first().map_or(0, |r| r.len());
    let mut p = vec![1.0 / nx as f64; nx];
    let mut c = vec![0.0; nx];
    let mut q = vec![0.0; ny];
    let mut gap = f64::INFINITY;
    let mut lower = 0.0;
    let mut it = 0;
    while it < max_iter {
        it += 1;
        q.iter_mut().for_each(|v| *v = 0.0);
        for (px, row) in p.iter().zip(w) {
            for (qy, g) in q.iter_mut().zip(row.iter()) {
                *qy += px * g;
            }
        }
        for (cx, row) in c.iter_mut().zip(w) {
            let d: f64 = row
                .iter()
                .zip(&q)
                .filter(|(g, _)| **g > 0.0)
                .map(|(g, qy)| g * (g / qy).ln())
                .sum();
            *cx = d.exp();
        }
        let s: f64 = p.iter().zip(&c).map(|(a, b)| a * b).sum();
        lower = s.ln();
        let upper = c.iter().cloned().fold(f64::MIN, f64::max).ln();
        gap = upper - lower;
        if gap < tol {
            break;
        }
        for (px, cx) in p.iter_mut().zip(&c) {
            *px *= cx / s;
        }
    }
    Capacity { nats: lower.max(0.0), input: p, gap, iterations: it }
}
