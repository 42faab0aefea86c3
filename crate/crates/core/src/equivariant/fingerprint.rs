//! Decomposition of invariant subspaces into real irreducible
//! representations.
//!
//! A fingerprint lists `(label, multiplicity, irrep_dim)` triples. For the
//! circle, weight `n >= 1` is the two-dimensional rotation representation
//! and weight 0 the one-dimensional trivial one, so `total_dim` always
//! equals the dimension of the subspace.

use std::f64::consts::TAU;

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::group::{block_diag, max_abs, GroupAction};
use super::projector::INVARIANCE_TOLERANCE;
use super::{orthonormal_span, EquivariantError};

/// Allowed distance of a character inner product from an integer.
pub const MULTIPLICITY_TOLERANCE: f64 = 1e-6;
const SPLIT_SEED: u64 = 0x5eed_1e55;
const SPLIT_ATTEMPTS: u64 = 4;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IrrepLabel {
    /// Circle weight.
    Weight(u32),
    /// Hash of the normalized character of a finite group.
    Character(u64),
    /// Irreducible of a product, labelled factorwise.
    Pair(Box<IrrepLabel>, Box<IrrepLabel>),
    /// Spherical-harmonic bidegree on a product of spheres.
    Bidegree(u32, u32),
    /// Dual-lattice mode of a flat torus, up to sign.
    Lattice(i64, i64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FingerprintKind {
    Finite,
    Circle,
    Product,
    Bidegree,
    Lattice,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FingerprintEntry {
    pub label: IrrepLabel,
    pub multiplicity: usize,
    pub irrep_dim: usize,
}

impl FingerprintEntry {
    pub fn isotypic_dim(&self) -> usize {
        self.multiplicity * self.irrep_dim
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fingerprint {
    pub kind: FingerprintKind,
    pub entries: Vec<FingerprintEntry>,
    pub total_dim: usize,
}

impl Fingerprint {
    pub fn empty(kind: FingerprintKind) -> Self {
        Self {
            kind,
            entries: Vec::new(),
            total_dim: 0,
        }
    }

    /// Merges repeated labels, drops zero multiplicities and sorts.
    pub fn from_entries(kind: FingerprintKind, entries: impl IntoIterator<Item = FingerprintEntry>) -> Self {
        let mut merged: Vec<FingerprintEntry> = Vec::new();
        for e in entries.into_iter().filter(|e| e.multiplicity > 0) {
            match merged.iter_mut().find(|m| m.label == e.label) {
                Some(m) => {
                    debug_assert_eq!(m.irrep_dim, e.irrep_dim);
                    m.multiplicity += e.multiplicity;
                }
                None => merged.push(e),
            }
        }
        merged.sort_by(|a, b| a.label.cmp(&b.label));
        let total_dim = merged.iter().map(FingerprintEntry::isotypic_dim).sum();
        Self {
            kind,
            entries: merged,
            total_dim,
        }
    }

    pub fn entry(&self, label: &IrrepLabel) -> Option<&FingerprintEntry> {
        self.entries.iter().find(|e| &e.label == label)
    }

    pub fn multiplicity(&self, label: &IrrepLabel) -> usize {
        self.entry(label).map_or(0, |e| e.multiplicity)
    }

    pub fn direct_sum(&self, other: &Fingerprint) -> Result<Fingerprint, EquivariantError> {
        if self.kind != other.kind {
            return Err(EquivariantError::ActionMismatch);
        }
        Ok(Self::from_entries(
            self.kind,
            self.entries.iter().chain(&other.entries).cloned(),
        ))
    }

    /// Entries whose multiplicity is larger here than in `other`, with the
    /// excess multiplicity.
    pub fn gained_over(&self, other: &Fingerprint) -> Vec<FingerprintEntry> {
        self.entries
            .iter()
            .filter_map(|e| {
                let before = other.multiplicity(&e.label);
                (e.multiplicity > before).then(|| FingerprintEntry {
                    label: e.label.clone(),
                    multiplicity: e.multiplicity - before,
                    irrep_dim: e.irrep_dim,
                })
            })
            .collect()
    }
}

/// Equivalence of representations: identical multiplicity lists.
pub fn fingerprints_equivalent(f1: &Fingerprint, f2: &Fingerprint) -> Result<bool, EquivariantError> {
    if f1.kind != f2.kind {
        return Err(EquivariantError::ActionMismatch);
    }
    Ok(f1.entries == f2.entries)
}

pub fn kind_of(action: &GroupAction) -> FingerprintKind {
    match action {
        GroupAction::Finite(_) => FingerprintKind::Finite,
        GroupAction::Circle(_) => FingerprintKind::Circle,
        GroupAction::Product(..) => FingerprintKind::Product,
    }
}

/// Fingerprint of the representation of `action` on the span of
/// `subspace_basis`, which must be invariant.
pub fn fingerprint(action: &GroupAction, subspace_basis: &DMatrix<f64>) -> Result<Fingerprint, EquivariantError> {
    let d = action.dim();
    if subspace_basis.nrows() != d {
        return Err(EquivariantError::DimensionMismatch {
            expected: d,
            actual: subspace_basis.nrows(),
        });
    }
    let kind = kind_of(action);
    let b = orthonormal_span(subspace_basis, 1e-10);
    if b.ncols() < subspace_basis.ncols() {
        return Err(EquivariantError::RankDeficient);
    }
    if b.ncols() == 0 {
        return Ok(Fingerprint::empty(kind));
    }
    let outside = DMatrix::<f64>::identity(d, d) - &b * b.transpose();
    for g in action.test_elements() {
        let defect = max_abs(&(&outside * &g * &b));
        if defect > INVARIANCE_TOLERANCE {
            return Err(EquivariantError::SubspaceNotInvariant { defect });
        }
    }
    match action {
        GroupAction::Circle(c) => {
            // Trapezoidal character inner products; the rule is exact for
            // every weight up to the node count.
            let n_nodes = c.quadrature_nodes();
            let traces: Vec<(f64, f64)> = (0..n_nodes)
                .map(|i| {
                    let t = TAU * i as f64 / n_nodes as f64;
                    (t, (b.transpose() * c.matrix(t) * &b).trace())
                })
                .collect();
            let mut entries = Vec::new();
            for n in 0..=c.max_weight() {
                let raw: f64 = traces.iter().map(|(t, tr)| tr * (n as f64 * t).cos()).sum::<f64>() / n_nodes as f64;
                let m = integer(raw)?;
                entries.push(FingerprintEntry {
                    label: IrrepLabel::Weight(n as u32),
                    multiplicity: m,
                    irrep_dim: if n == 0 { 1 } else { 2 },
                });
            }
            let fp = Fingerprint::from_entries(kind, entries);
            if fp.total_dim != b.ncols() {
                return Err(EquivariantError::NonIntegerMultiplicity {
                    value: fp.total_dim as f64,
                });
            }
            Ok(fp)
        }
        _ => {
            let pieces = split_irreducibles(action, &b)?;
            let mut entries = Vec::with_capacity(pieces.len());
            for piece in pieces {
                entries.push(FingerprintEntry {
                    label: isotypic_label(action, 0, d, &piece)?,
                    multiplicity: 1,
                    irrep_dim: piece.ncols(),
                });
            }
            Ok(Fingerprint::from_entries(kind, entries))
        }
    }
}

fn integer(raw: f64) -> Result<usize, EquivariantError> {
    let m = raw.round();
    if (raw - m).abs() > MULTIPLICITY_TOLERANCE || m < 0.0 {
        return Err(EquivariantError::NonIntegerMultiplicity { value: raw });
    }
    Ok(m as usize)
}

/// Splits an invariant subspace into irreducible pieces using the
/// eigenspaces of a Haar-averaged random symmetric operator, which lies in
/// the commutant of the representation.
fn split_irreducibles(action: &GroupAction, b: &DMatrix<f64>) -> Result<Vec<DMatrix<f64>>, EquivariantError> {
    let k = b.ncols();
    let nodes: Vec<(f64, DMatrix<f64>)> = action
        .quadrature()
        .into_iter()
        .map(|(w, g)| (w, b.transpose() * g * b))
        .collect();
    let mut last_err = EquivariantError::NonIntegerMultiplicity { value: f64::NAN };
    for attempt in 0..SPLIT_ATTEMPTS {
        let mut rng = ChaCha8Rng::seed_from_u64(SPLIT_SEED + attempt);
        let mut m = DMatrix::<f64>::zeros(k, k);
        for i in 0..k {
            for j in 0..=i {
                let v: f64 = rng.random_range(-1.0..1.0);
                m[(i, j)] = v;
                m[(j, i)] = v;
            }
        }
        let mut avg = DMatrix::<f64>::zeros(k, k);
        for (w, r) in &nodes {
            avg += *w * (r * &m * r.transpose());
        }
        avg = 0.5 * (&avg + avg.transpose());
        let eig = SymmetricEigen::new(avg);
        let mut order: Vec<usize> = (0..k).collect();
        order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
        let scale = eig.eigenvalues.amax().max(1e-300);
        let mut clusters: Vec<Vec<usize>> = Vec::new();
        for &i in &order {
            match clusters.last_mut() {
                Some(c) if (eig.eigenvalues[i] - eig.eigenvalues[*c.last().unwrap()]).abs() <= 1e-8 * scale => {
                    c.push(i)
                }
                _ => clusters.push(vec![i]),
            }
        }
        let mut pieces = Vec::with_capacity(clusters.len());
        let mut ok = true;
        for c in &clusters {
            let mut local = DMatrix::zeros(k, c.len());
            for (col, &i) in c.iter().enumerate() {
                local.set_column(col, &eig.eigenvectors.column(i));
            }
            // Irreducible real representations have character norm 1, 2 or 4.
            let norm: f64 = nodes
                .iter()
                .map(|(w, r)| {
                    let chi = (local.transpose() * r * &local).trace();
                    w * chi * chi
                })
                .sum();
            match integer(norm) {
                Ok(1 | 2 | 4) => pieces.push(b * local),
                Ok(_) => {
                    ok = false;
                    last_err = EquivariantError::NonIntegerMultiplicity { value: norm };
                    break;
                }
                Err(e) => {
                    ok = false;
                    last_err = e;
                    break;
                }
            }
        }
        if ok {
            return Ok(pieces);
        }
    }
    Err(last_err)
}

/// Label of the isotypic type of `piece` under an action living on
/// coordinates `offset..offset + action.dim()` of a `total`-dimensional
/// space.
fn isotypic_label(
    action: &GroupAction,
    offset: usize,
    total: usize,
    piece: &DMatrix<f64>,
) -> Result<IrrepLabel, EquivariantError> {
    let embed = |g: &DMatrix<f64>| {
        let before = DMatrix::identity(offset, offset);
        let after_dim = total - offset - g.nrows();
        block_diag(&block_diag(&before, g), &DMatrix::identity(after_dim, after_dim))
    };
    match action {
        GroupAction::Finite(_) => {
            let quad = action.quadrature();
            let chars: Vec<f64> = quad
                .iter()
                .map(|(_, g)| (piece.transpose() * embed(g) * piece).trace())
                .collect();
            let dim = chars[0];
            Ok(IrrepLabel::Character(hash_character(chars.iter().map(|c| c / dim))))
        }
        GroupAction::Circle(c) => {
            let n_nodes = c.quadrature_nodes();
            let mut found = None;
            for n in 0..=c.max_weight() {
                let raw: f64 = (0..n_nodes)
                    .map(|i| {
                        let t = TAU * i as f64 / n_nodes as f64;
                        (piece.transpose() * embed(&c.matrix(t)) * piece).trace() * (n as f64 * t).cos()
                    })
                    .sum::<f64>()
                    / n_nodes as f64;
                if integer(raw)? > 0 {
                    if found.is_some() {
                        return Err(EquivariantError::NonIntegerMultiplicity { value: raw });
                    }
                    found = Some(n as u32);
                }
            }
            found
                .map(IrrepLabel::Weight)
                .ok_or(EquivariantError::NonIntegerMultiplicity { value: 0.0 })
        }
        GroupAction::Product(a, b) => Ok(IrrepLabel::Pair(
            Box::new(isotypic_label(a, offset, total, piece)?),
            Box::new(isotypic_label(b, offset + a.dim(), total, piece)?),
        )),
    }
}

/// FNV-1a over the character values rounded to six decimals.
fn hash_character(values: impl Iterator<Item = f64>) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for v in values {
        let q = (v * 1e6).round() as i64;
        for byte in q.to_le_bytes() {
            h ^= u64::from(byte);
            h = h.wrapping_mul(0x0100_0000_01b3);
        }
    }
    h
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cols(d: usize, idx: &[usize]) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(d, idx.len());
        for (c, &i) in idx.iter().enumerate() {
            m[(i, c)] = 1.0;
        }
        m
    }

    #[test]
    fn circle_examples() {
        let rot = GroupAction::circle(vec![1], false);
        let fp = fingerprint(&rot, &DMatrix::identity(2, 2)).unwrap();
        assert_eq!(fp.entries.len(), 1);
        assert_eq!(fp.multiplicity(&IrrepLabel::Weight(1)), 1);
        assert_eq!(fp.total_dim, 2);

        let two = GroupAction::circle(vec![1, 2], false);
        let fp = fingerprint(&two, &cols(4, &[2, 3])).unwrap();
        assert_eq!(fp.entries.len(), 1);
        assert_eq!(fp.multiplicity(&IrrepLabel::Weight(2)), 1);

        let fp = fingerprint(&two, &DMatrix::zeros(4, 0)).unwrap();
        assert!(fp.entries.is_empty());
        assert_eq!(fp.total_dim, 0);
    }

    #[test]
    fn circle_fixed_axis_and_repeated_weights() {
        let action = GroupAction::circle(vec![3, 0, 3], true);
        let fp = fingerprint(&action, &DMatrix::identity(7, 7)).unwrap();
        assert_eq!(fp.multiplicity(&IrrepLabel::Weight(3)), 2);
        assert_eq!(fp.multiplicity(&IrrepLabel::Weight(0)), 3);
        assert_eq!(fp.total_dim, 7);
    }

    #[test]
    fn rejects_non_invariant_subspace() {
        let rot = GroupAction::circle(vec![1], false);
        assert!(matches!(
            fingerprint(&rot, &cols(2, &[0])),
            Err(EquivariantError::SubspaceNotInvariant { .. })
        ));
    }

    #[test]
    fn finite_group_distinguishes_sign_and_trivial() {
        let flip = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]);
        let z2 = GroupAction::finite(2, vec![flip]).unwrap();
        let even = fingerprint(&z2, &cols(2, &[0])).unwrap();
        let odd = fingerprint(&z2, &cols(2, &[1])).unwrap();
        assert!(!fingerprints_equivalent(&even, &odd).unwrap());
        let both = fingerprint(&z2, &DMatrix::identity(2, 2)).unwrap();
        assert_eq!(both, even.direct_sum(&odd).unwrap());
    }

    #[test]
    fn dihedral_group_two_dimensional_irrep() {
        let rot = super::super::group::CircleAction::new(vec![1], false).matrix(TAU / 3.0);
        let flip = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]);
        let d3 = GroupAction::finite(2, vec![rot, flip]).unwrap();
        let fp = fingerprint(&d3, &DMatrix::identity(2, 2)).unwrap();
        assert_eq!(fp.entries.len(), 1);
        assert_eq!(fp.entries[0].irrep_dim, 2);
        assert_eq!(fp.entries[0].multiplicity, 1);
    }

    #[test]
    fn product_labels_are_factorwise() {
        let action = GroupAction::product(GroupAction::circle(vec![1], false), GroupAction::circle(vec![2], true));
        let fp = fingerprint(&action, &DMatrix::identity(5, 5)).unwrap();
        let w = |n| Box::new(IrrepLabel::Weight(n));
        assert_eq!(fp.multiplicity(&IrrepLabel::Pair(w(1), w(0))), 1);
        assert_eq!(fp.multiplicity(&IrrepLabel::Pair(w(0), w(2))), 1);
        assert_eq!(fp.multiplicity(&IrrepLabel::Pair(w(0), w(0))), 1);
        assert_eq!(fp.total_dim, 5);
    }

    #[test]
    fn equivalence_examples() {
        let one = |label, m| {
            Fingerprint::from_entries(
                FingerprintKind::Circle,
                [FingerprintEntry {
                    label,
                    multiplicity: m,
                    irrep_dim: 2,
                }],
            )
        };
        let a = one(IrrepLabel::Weight(1), 1);
        assert!(fingerprints_equivalent(&a, &a).unwrap());
        assert!(!fingerprints_equivalent(&a, &one(IrrepLabel::Weight(2), 1)).unwrap());
        assert!(!fingerprints_equivalent(&one(IrrepLabel::Weight(1), 2), &a).unwrap());
        assert!(matches!(
            fingerprints_equivalent(&a, &Fingerprint::empty(FingerprintKind::Finite)),
            Err(EquivariantError::ActionMismatch)
        ));
    }
}
