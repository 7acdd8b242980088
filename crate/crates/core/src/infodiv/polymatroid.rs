use super::{mutual_information, JointInputLaw};
use crate::channel::GeneralMac;
use serde::Serialize;
use std::collections::BTreeMap;

/// Set function on subsets of non-covert users, stored by bitmask
/// (bit `j` set when user `j` is in the subset).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Polymatroid {
    pub users: usize,
    pub rank: Vec<f64>,
}

impl Polymatroid {
    pub fn value(&self, mask: usize) -> f64 {
        self.rank[mask]
    }

    /// Whether `rates` satisfies every subset-sum bound up to `tol`.
    pub fn contains(&self, rates: &[f64], tol: f64) -> bool {
        (1..self.rank.len()).all(|m| {
            let s: f64 = (0..self.users).filter(|j| m >> j & 1 == 1).map(|j| rates[j]).sum();
            s <= self.rank[m] + tol
        })
    }

    /// Vertex maximising `weights · R`, filling users in decreasing weight
    /// order (ties to the lower index). Returns the value and the vertex.
    pub fn greedy(&self, weights: &[f64]) -> (f64, Vec<f64>) {
        let mut order: Vec<usize> = (0..self.users).collect();
        order.sort_by(|&a, &b| weights[b].total_cmp(&weights[a]).then(a.cmp(&b)));
        let mut vertex = vec![0.0; self.users];
        let mut mask = 0usize;
        let mut value = 0.0;
        for &j in &order {
            let next = mask | 1 << j;
            vertex[j] = self.rank[next] - self.rank[mask];
            value += weights[j] * vertex[j];
            mask = next;
        }
        (value, vertex)
    }
}

pub(super) fn mi_table(joint: &JointInputLaw, ch: &GeneralMac) -> Polymatroid {
    let m = ch.l_nc();
    let idle = vec![0; ch.l_c()];
    let tuples: Vec<Vec<usize>> = (0..ch.nc_count()).map(|i| ch.nc_tuple(i)).collect();
    let mut rank = vec![0.0; 1 << m];
    for (mask, r) in rank.iter_mut().enumerate().skip(1) {
        let mut total = 0.0;
        for (pt, law) in joint.p_t.iter().zip(&joint.p_x_given_t) {
            if *pt <= 0.0 {
                continue;
            }
            let mut groups: BTreeMap<Vec<usize>, Vec<usize>> = BTreeMap::new();
            for (i, tup) in tuples.iter().enumerate() {
                let key: Vec<usize> = (0..m).filter(|j| mask >> j & 1 == 0).map(|j| tup[j]).collect();
                groups.entry(key).or_default().push(i);
            }
            let mut inner = 0.0;
            for members in groups.values() {
                let mass: f64 = members.iter().map(|&i| law[i]).sum();
                if mass <= 0.0 {
                    continue;
                }
                let q: Vec<f64> = members.iter().map(|&i| law[i] / mass).collect();
                let rows: Vec<&[f64]> = members.iter().map(|&i| ch.y_row(&idle, i)).collect();
                inner += mass * mutual_information(&q, &rows);
            }
            total += pt * inner;
        }
        *r = total;
    }
    Polymatroid { users: m, rank }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn greedy_vertex_and_membership() {
        let p = Polymatroid { users: 2, rank: vec![0.0, 0.5, 0.4, 0.7] };
        let (v, x) = p.greedy(&[1.0, 2.0]);
        assert_eq!(x, vec![0.7 - 0.4, 0.4]);
        assert!((v - (0.3 + 0.8)).abs() < 1e-15);
        assert!(p.contains(&x, 1e-12));
        assert!(!p.contains(&[0.5, 0.4], 1e-12));
    }
}
