//! Discrete memoryless channels with a legitimate receiver and a warden.
//!
//! Three shapes are supported: the three-user MAC ([`Dmmac`]) with two binary
//! covert inputs and one non-covert input, the general MAC ([`GeneralMac`])
//! with any number of covert and non-covert users, and the two-receiver
//! interference channel ([`DmicChannel`]).

mod averaged;
pub mod io;
pub mod reference;
mod validate;

pub use averaged::{averaged_channel, AveragedLaws};
pub use io::{from_rows_text, load, save, to_json_string, ChannelKind};
pub use validate::{Condition, Observer, ValidationReport, Violation};

use crate::error::{Error, Result};

/// Row-sum tolerance for transition probabilities.
pub const ROW_SUM_TOL: f64 = 1e-12;

pub(crate) fn check_rows(name: &str, data: &[f64], width: usize) -> Result<()> {
    for (r, row) in data.chunks(width).enumerate() {
        if let Some((i, &v)) = row.iter().enumerate().find(|(_, v)| !(**v >= 0.0) || !v.is_finite()) {
            return Err(Error::Probability(format!(
                "{name} row {r} entry {i} is {v}, not a probability"
            )));
        }
        let s: f64 = row.iter().sum();
        if (s - 1.0).abs() > ROW_SUM_TOL {
            return Err(Error::Probability(format!(
                "{name} row {r} sums to {s:.17}, not 1"
            )));
        }
    }
    Ok(())
}

/// Rescales every row of a row-major matrix to sum to one.
pub fn renormalize_rows(data: &mut [f64], width: usize) -> Result<()> {
    for (r, row) in data.chunks_mut(width).enumerate() {
        let s: f64 = row.iter().sum();
        if !(s > 0.0) {
            return Err(Error::Probability(format!("row {r} has zero mass")));
        }
        row.iter_mut().for_each(|v| *v /= s);
    }
    Ok(())
}

/// Three-user MAC: binary covert inputs X1, X2, non-covert input X3.
///
/// Rows are stored in the order `(x1, x2, x3)` with `x3` fastest, i.e. row
/// index `(2 * x1 + x2) * x3_size + x3`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dmmac {
    x3_size: usize,
    y_size: usize,
    z_size: usize,
    gamma_y: Vec<f64>,
    gamma_z: Vec<f64>,
}

impl Dmmac {
    pub fn new(
        x3_size: usize,
        y_size: usize,
        z_size: usize,
        gamma_y: Vec<f64>,
        gamma_z: Vec<f64>,
    ) -> Result<Self> {
        if x3_size == 0 || y_size == 0 || z_size == 0 {
            return Err(Error::Structure("alphabet sizes must be at least 1".into()));
        }
        let rows = 4 * x3_size;
        if gamma_y.len() != rows * y_size {
            return Err(Error::Structure(format!(
                "gamma_y has {} entries, expected {}",
                gamma_y.len(),
                rows * y_size
            )));
        }
        if gamma_z.len() != rows * z_size {
            return Err(Error::Structure(format!(
                "gamma_z has {} entries, expected {}",
                gamma_z.len(),
                rows * z_size
            )));
        }
        check_rows("gamma_y", &gamma_y, y_size)?;
        check_rows("gamma_z", &gamma_z, z_size)?;
        Ok(Self { x3_size, y_size, z_size, gamma_y, gamma_z })
    }

    /// Builds the channel from row lists in `(x1, x2, x3)` lexicographic order.
    pub fn from_rows(y_rows: &[Vec<f64>], z_rows: &[Vec<f64>]) -> Result<Self> {
        if y_rows.is_empty() || y_rows.len() % 4 != 0 || y_rows.len() != z_rows.len() {
            return Err(Error::Structure(format!(
                "need the same multiple of 4 rows for Y and Z, got {} and {}",
                y_rows.len(),
                z_rows.len()
            )));
        }
        let x3_size = y_rows.len() / 4;
        let y_size = y_rows[0].len();
        let z_size = z_rows[0].len();
        if let Some(r) = y_rows.iter().position(|r| r.len() != y_size) {
            return Err(Error::Structure(format!("Y row {r} has a different length")));
        }
        if let Some(r) = z_rows.iter().position(|r| r.len() != z_size) {
            return Err(Error::Structure(format!("Z row {r} has a different length")));
        }
        Self::new(x3_size, y_size, z_size, y_rows.concat(), z_rows.concat())
    }

    fn row_index(&self, x1: usize, x2: usize, x3: usize) -> usize {
        debug_assert!(x1 < 2 && x2 < 2 && x3 < self.x3_size);
        (2 * x1 + x2) * self.x3_size + x3
    }

    pub fn x3_size(&self) -> usize {
        self.x3_size
    }

    pub fn y_size(&self) -> usize {
        self.y_size
    }

    pub fn z_size(&self) -> usize {
        self.z_size
    }

    /// Γ_Y(·|x1,x2,x3).
    pub fn y_row(&self, x1: usize, x2: usize, x3: usize) -> &[f64] {
        let r = self.row_index(x1, x2, x3);
        &self.gamma_y[r * self.y_size..(r + 1) * self.y_size]
    }

    /// Γ_Z(·|x1,x2,x3).
    pub fn z_row(&self, x1: usize, x2: usize, x3: usize) -> &[f64] {
        let r = self.row_index(x1, x2, x3);
        &self.gamma_z[r * self.z_size..(r + 1) * self.z_size]
    }

    pub fn gamma_y(&self) -> &[f64] {
        &self.gamma_y
    }

    pub fn gamma_z(&self) -> &[f64] {
        &self.gamma_z
    }

    /// The channel with X3 pinned to `x3` (a one-letter X3 alphabet).
    pub fn restrict_x3(&self, x3: usize) -> Result<Dmmac> {
        if x3 >= self.x3_size {
            return Err(Error::Index(format!("x3 = {x3} but |X3| = {}", self.x3_size)));
        }
        let mut gy = Vec::with_capacity(4 * self.y_size);
        let mut gz = Vec::with_capacity(4 * self.z_size);
        for x1 in 0..2 {
            for x2 in 0..2 {
                gy.extend_from_slice(self.y_row(x1, x2, x3));
                gz.extend_from_slice(self.z_row(x1, x2, x3));
            }
        }
        Dmmac::new(1, self.y_size, self.z_size, gy, gz)
    }

    /// True when neither output depends on X3.
    pub fn ignores_x3(&self) -> bool {
        (0..2).all(|x1| {
            (0..2).all(|x2| {
                (1..self.x3_size).all(|x3| {
                    self.y_row(x1, x2, x3) == self.y_row(x1, x2, 0)
                        && self.z_row(x1, x2, x3) == self.z_row(x1, x2, 0)
                })
            })
        })
    }

    /// True when neither output depends on X2 or X3.
    pub fn is_single_user(&self) -> bool {
        self.ignores_x3()
            && (0..2).all(|x1| {
                self.y_row(x1, 1, 0) == self.y_row(x1, 0, 0)
                    && self.z_row(x1, 1, 0) == self.z_row(x1, 0, 0)
            })
    }

    pub fn validate(&self) -> ValidationReport {
        validate::validate_dmmac(self)
    }
}

/// MAC with `covert_sizes.len()` covert users and `nc_sizes.len()` non-covert users.
///
/// Inputs are indexed in mixed radix, covert users first, the first user being
/// the most significant digit.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneralMac {
    covert_sizes: Vec<usize>,
    nc_sizes: Vec<usize>,
    y_size: usize,
    z_size: usize,
    gamma_y: Vec<f64>,
    gamma_z: Vec<f64>,
}

impl GeneralMac {
    pub fn new(
        covert_sizes: Vec<usize>,
        nc_sizes: Vec<usize>,
        y_size: usize,
        z_size: usize,
        gamma_y: Vec<f64>,
        gamma_z: Vec<f64>,
    ) -> Result<Self> {
        if covert_sizes.iter().chain(&nc_sizes).any(|&s| s == 0) || y_size == 0 || z_size == 0 {
            return Err(Error::Structure("alphabet sizes must be at least 1".into()));
        }
        if covert_sizes.iter().any(|&s| s < 2) {
            return Err(Error::Structure(
                "covert alphabets need the idle symbol 0 and at least one other symbol".into(),
            ));
        }
        let inputs: usize = covert_sizes.iter().chain(&nc_sizes).product();
        if gamma_y.len() != inputs * y_size {
            return Err(Error::Structure(format!(
                "gamma_y has {} entries, expected {}",
                gamma_y.len(),
                inputs * y_size
            )));
        }
        if gamma_z.len() != inputs * z_size {
            return Err(Error::Structure(format!(
                "gamma_z has {} entries, expected {}",
                gamma_z.len(),
                inputs * z_size
            )));
        }
        check_rows("gamma_y", &gamma_y, y_size)?;
        check_rows("gamma_z", &gamma_z, z_size)?;
        Ok(Self { covert_sizes, nc_sizes, y_size, z_size, gamma_y, gamma_z })
    }

    /// The three-user MAC seen as two binary covert users and one non-covert user.
    pub fn from_dmmac(ch: &Dmmac) -> Self {
        GeneralMac {
            covert_sizes: vec![2, 2],
            nc_sizes: vec![ch.x3_size()],
            y_size: ch.y_size(),
            z_size: ch.z_size(),
            gamma_y: ch.gamma_y().to_vec(),
            gamma_z: ch.gamma_z().to_vec(),
        }
    }

    pub fn l_c(&self) -> usize {
        self.covert_sizes.len()
    }

    pub fn l_nc(&self) -> usize {
        self.nc_sizes.len()
    }

    pub fn covert_sizes(&self) -> &[usize] {
        &self.covert_sizes
    }

    pub fn nc_sizes(&self) -> &[usize] {
        &self.nc_sizes
    }

    pub fn y_size(&self) -> usize {
        self.y_size
    }

    pub fn z_size(&self) -> usize {
        self.z_size
    }

    pub fn gamma_y(&self) -> &[f64] {
        &self.gamma_y
    }

    pub fn gamma_z(&self) -> &[f64] {
        &self.gamma_z
    }

    /// Number of non-covert input tuples.
    pub fn nc_count(&self) -> usize {
        self.nc_sizes.iter().product()
    }

    /// Mixed-radix digits of a non-covert tuple index.
    pub fn nc_tuple(&self, mut idx: usize) -> Vec<usize> {
        let mut out = vec![0; self.nc_sizes.len()];
        for (j, &s) in self.nc_sizes.iter().enumerate().rev() {
            out[j] = idx % s;
            idx /= s;
        }
        out
    }

    pub fn nc_index(&self, tuple: &[usize]) -> usize {
        tuple.iter().zip(&self.nc_sizes).fold(0, |acc, (&d, &s)| acc * s + d)
    }

    fn input_index(&self, covert: &[usize], nc_idx: usize) -> usize {
        let c = covert.iter().zip(&self.covert_sizes).fold(0, |acc, (&d, &s)| acc * s + d);
        c * self.nc_count() + nc_idx
    }

    /// Γ_Y(·|covert, nc) with the non-covert tuple given by its index.
    pub fn y_row(&self, covert: &[usize], nc_idx: usize) -> &[f64] {
        let r = self.input_index(covert, nc_idx);
        &self.gamma_y[r * self.y_size..(r + 1) * self.y_size]
    }

    pub fn z_row(&self, covert: &[usize], nc_idx: usize) -> &[f64] {
        let r = self.input_index(covert, nc_idx);
        &self.gamma_z[r * self.z_size..(r + 1) * self.z_size]
    }

    /// Covert input with user `l` on symbol `x` and all others idle.
    pub fn unit_input(&self, l: usize, x: usize) -> Vec<usize> {
        let mut c = vec![0; self.covert_sizes.len()];
        c[l] = x;
        c
    }

    pub fn validate(&self) -> ValidationReport {
        validate::validate_general(self)
    }
}

/// Two-receiver interference channel sharing one warden output.
#[derive(Debug, Clone, PartialEq)]
pub struct DmicChannel {
    rx1: Dmmac,
    rx2: Dmmac,
}

impl DmicChannel {
    pub fn new(
        x3_size: usize,
        y1_size: usize,
        y2_size: usize,
        z_size: usize,
        gamma_y1: Vec<f64>,
        gamma_y2: Vec<f64>,
        gamma_z: Vec<f64>,
    ) -> Result<Self> {
        let rx1 = Dmmac::new(x3_size, y1_size, z_size, gamma_y1, gamma_z.clone())
            .map_err(|e| relabel(e, "gamma_y", "gamma_y1"))?;
        let rx2 = Dmmac::new(x3_size, y2_size, z_size, gamma_y2, gamma_z)
            .map_err(|e| relabel(e, "gamma_y", "gamma_y2"))?;
        Ok(Self { rx1, rx2 })
    }

    /// The MAC formed by receiver `l` (1 or 2) and the warden.
    pub fn receiver(&self, l: usize) -> &Dmmac {
        match l {
            1 => &self.rx1,
            2 => &self.rx2,
            _ => panic!("receiver index must be 1 or 2"),
        }
    }

    pub fn x3_size(&self) -> usize {
        self.rx1.x3_size()
    }

    pub fn validate(&self) -> ValidationReport {
        validate::validate_dmic(self)
    }
}

fn relabel(e: Error, from: &str, to: &str) -> Error {
    match e {
        Error::Structure(m) => Error::Structure(m.replace(from, to)),
        Error::Probability(m) => Error::Probability(m.replace(from, to)),
        other => other,
    }
}

/// Any of the supported channel shapes.
#[derive(Debug, Clone, PartialEq)]
pub enum Channel {
    Dmmac(Dmmac),
    General(GeneralMac),
    Dmic(DmicChannel),
}

impl Channel {
    pub fn kind(&self) -> ChannelKind {
        match self {
            Channel::Dmmac(_) => ChannelKind::Dmmac,
            Channel::General(_) => ChannelKind::GeneralMac,
            Channel::Dmic(_) => ChannelKind::Dmic,
        }
    }

    pub fn validate(&self) -> ValidationReport {
        match self {
            Channel::Dmmac(c) => c.validate(),
            Channel::General(c) => c.validate(),
            Channel::Dmic(c) => c.validate(),
        }
    }

    pub fn as_dmmac(&self) -> Result<&Dmmac> {
        match self {
            Channel::Dmmac(c) => Ok(c),
            _ => Err(Error::Unsupported(format!(
                "operation needs a dmmac channel, got {}",
                self.kind().as_str()
            ))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn row_layout_follows_lexicographic_inputs() {
        let ch = reference::reference_mac();
        assert_eq!(ch.y_row(0, 0, 0)[0], 0.28);
        assert_eq!(ch.y_row(0, 0, 1)[0], 0.12);
        assert_eq!(ch.y_row(0, 1, 0)[0], 0.17);
        assert_eq!(ch.y_row(1, 1, 1)[5], 0.30);
        assert_eq!(ch.z_row(1, 0, 0)[5], 0.34);
    }

    #[test]
    fn rejects_bad_rows() {
        let bad = Dmmac::new(1, 2, 2, vec![0.5, 0.5, 1.0, 0.0, 0.2, 0.7, 0.5, 0.5], vec![0.5; 8]);
        assert!(matches!(bad, Err(Error::Probability(_))));
        let neg = Dmmac::new(1, 2, 2, vec![1.5, -0.5, 1.0, 0.0, 0.3, 0.7, 0.5, 0.5], vec![0.5; 8]);
        assert!(matches!(neg, Err(Error::Probability(_))));
        let short = Dmmac::new(1, 2, 2, vec![0.5; 6], vec![0.5; 8]);
        assert!(matches!(short, Err(Error::Structure(_))));
    }

    #[test]
    fn restriction_and_inertness() {
        let ch = reference::reference_mac();
        assert!(!ch.ignores_x3());
        let r = ch.restrict_x3(1).unwrap();
        assert!(r.ignores_x3());
        assert_eq!(r.z_row(1, 0, 0), ch.z_row(1, 0, 1));
        assert!(ch.restrict_x3(2).is_err());
    }

    #[test]
    fn general_from_dmmac_shares_rows() {
        let ch = reference::reference_mac();
        let g = GeneralMac::from_dmmac(&ch);
        for x1 in 0..2 {
            for x2 in 0..2 {
                for x3 in 0..2 {
                    assert_eq!(g.y_row(&[x1, x2], x3), ch.y_row(x1, x2, x3));
                    assert_eq!(g.z_row(&[x1, x2], x3), ch.z_row(x1, x2, x3));
                }
            }
        }
        assert_eq!(g.nc_tuple(1), vec![1]);
    }

    #[test]
    fn renormalize_on_request() {
        let mut v = vec![1.0, 3.0, 2.0, 2.0];
        renormalize_rows(&mut v, 2).unwrap();
        assert_eq!(v, vec![0.25, 0.75, 0.5, 0.5]);
    }
}
