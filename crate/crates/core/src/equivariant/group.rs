//! Compact groups acting orthogonally on a model space: finite groups given
//! by generators, circle actions given by integer weights, and products on
//! complementary coordinate blocks.

use std::f64::consts::TAU;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::EquivariantError;

pub const ORTHOGONALITY_TOLERANCE: f64 = 1e-12;
/// Upper bound on the order of an enumerated finite group.
pub const MAX_GROUP_ORDER: usize = 4096;
/// Entrywise tolerance when identifying two group elements.
const ELEMENT_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct FiniteGroup {
    dim: usize,
    generators: Vec<DMatrix<f64>>,
    elements: Vec<DMatrix<f64>>,
}

impl FiniteGroup {
    /// Enumerates the group generated by `generators` by breadth-first
    /// closure. The identity comes first and the order is deterministic.
    pub fn new(dim: usize, generators: Vec<DMatrix<f64>>) -> Result<Self, EquivariantError> {
        for (index, g) in generators.iter().enumerate() {
            if g.nrows() != dim || g.ncols() != dim {
                return Err(EquivariantError::DimensionMismatch {
                    expected: dim,
                    actual: g.nrows().max(g.ncols()),
                });
            }
            let defect = max_abs(&(g.transpose() * g - DMatrix::identity(dim, dim)));
            if defect > ORTHOGONALITY_TOLERANCE {
                return Err(EquivariantError::NotOrthogonal { index, defect });
            }
        }
        let mut elements = vec![DMatrix::identity(dim, dim)];
        let mut cursor = 0;
        while cursor < elements.len() {
            for g in &generators {
                let next = g * &elements[cursor];
                if !elements.iter().any(|e| max_abs(&(e - &next)) <= ELEMENT_TOLERANCE) {
                    if elements.len() == MAX_GROUP_ORDER {
                        return Err(EquivariantError::GroupTooLarge { limit: MAX_GROUP_ORDER });
                    }
                    elements.push(next);
                }
            }
            cursor += 1;
        }
        Ok(Self {
            dim,
            generators,
            elements,
        })
    }

    pub fn trivial(dim: usize) -> Self {
        Self {
            dim,
            generators: Vec::new(),
            elements: vec![DMatrix::identity(dim, dim)],
        }
    }

    /// Cyclic group generated by one matrix.
    pub fn cyclic(generator: DMatrix<f64>) -> Result<Self, EquivariantError> {
        Self::new(generator.nrows(), vec![generator])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn generators(&self) -> &[DMatrix<f64>] {
        &self.generators
    }

    pub fn elements(&self) -> &[DMatrix<f64>] {
        &self.elements
    }

    fn contains(&self, g: &DMatrix<f64>) -> bool {
        self.elements.iter().any(|e| max_abs(&(e - g)) <= ELEMENT_TOLERANCE)
    }

    fn discrete_part(&self) -> DiscretePart {
        let id = DMatrix::identity(self.dim, self.dim);
        let is_id = |m: &DMatrix<f64>| max_abs(&(m - &id)) <= ELEMENT_TOLERANCE;
        let abelian = self.generators.iter().all(|a| {
            self.generators
                .iter()
                .all(|b| max_abs(&(a * b - b * a)) <= ELEMENT_TOLERANCE)
        });
        match self.order() {
            1 => DiscretePart::Trivial,
            _ if self.elements.iter().all(|g| is_id(&(g * g))) => DiscretePart::ProductOfZ2,
            _ if abelian && self.elements.iter().all(|g| is_id(&(g * g * g))) => DiscretePart::ProductOfZ3,
            4 if self.elements.iter().any(|g| !is_id(&(g * g))) => DiscretePart::Z4,
            _ => DiscretePart::Other,
        }
    }
}

/// The circle acting by rotation with integer weights on consecutive
/// coordinate planes, optionally fixing one trailing axis.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CircleAction {
    pub weights: Vec<i64>,
    pub fixed_axis: bool,
}

impl CircleAction {
    pub fn new(weights: Vec<i64>, fixed_axis: bool) -> Self {
        Self { weights, fixed_axis }
    }

    pub fn dim(&self) -> usize {
        2 * self.weights.len() + usize::from(self.fixed_axis)
    }

    pub fn max_weight(&self) -> u64 {
        self.weights.iter().map(|w| w.unsigned_abs()).max().unwrap_or(0)
    }

    /// Node count of the trapezoidal Haar rule.
    pub fn quadrature_nodes(&self) -> usize {
        4 * self.max_weight() as usize + 8
    }

    pub fn matrix(&self, theta: f64) -> DMatrix<f64> {
        let mut m = DMatrix::identity(self.dim(), self.dim());
        for (i, &w) in self.weights.iter().enumerate() {
            let (s, c) = (w as f64 * theta).sin_cos();
            m[(2 * i, 2 * i)] = c;
            m[(2 * i, 2 * i + 1)] = -s;
            m[(2 * i + 1, 2 * i)] = s;
            m[(2 * i + 1, 2 * i + 1)] = c;
        }
        m
    }

    /// Infinitesimal generator `d/dtheta g(theta)` at the identity.
    pub fn lie_generator(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.dim(), self.dim());
        for (i, &w) in self.weights.iter().enumerate() {
            m[(2 * i, 2 * i + 1)] = -(w as f64);
            m[(2 * i + 1, 2 * i)] = w as f64;
        }
        m
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum GroupAction {
    Finite(FiniteGroup),
    Circle(CircleAction),
    /// First factor on the leading coordinates, second on the rest.
    Product(Box<GroupAction>, Box<GroupAction>),
}

impl GroupAction {
    pub fn trivial(dim: usize) -> Self {
        GroupAction::Finite(FiniteGroup::trivial(dim))
    }

    pub fn circle(weights: Vec<i64>, fixed_axis: bool) -> Self {
        GroupAction::Circle(CircleAction::new(weights, fixed_axis))
    }

    pub fn finite(dim: usize, generators: Vec<DMatrix<f64>>) -> Result<Self, EquivariantError> {
        Ok(GroupAction::Finite(FiniteGroup::new(dim, generators)?))
    }

    pub fn product(first: GroupAction, second: GroupAction) -> Self {
        GroupAction::Product(Box::new(first), Box::new(second))
    }

    pub fn dim(&self) -> usize {
        match self {
            GroupAction::Finite(g) => g.dim(),
            GroupAction::Circle(c) => c.dim(),
            GroupAction::Product(a, b) => a.dim() + b.dim(),
        }
    }

    /// Weighted nodes whose average equals the Haar integral of every
    /// matrix coefficient of degree at most two in the action.
    pub fn quadrature(&self) -> Vec<(f64, DMatrix<f64>)> {
        match self {
            GroupAction::Finite(g) => {
                let w = 1.0 / g.order() as f64;
                g.elements().iter().map(|e| (w, e.clone())).collect()
            }
            GroupAction::Circle(c) => {
                let n = c.quadrature_nodes();
                (0..n)
                    .map(|i| (1.0 / n as f64, c.matrix(TAU * i as f64 / n as f64)))
                    .collect()
            }
            GroupAction::Product(a, b) => {
                let qa = a.quadrature();
                let qb = b.quadrature();
                let mut out = Vec::with_capacity(qa.len() * qb.len());
                for (wa, ga) in &qa {
                    for (wb, gb) in &qb {
                        out.push((wa * wb, block_diag(ga, gb)));
                    }
                }
                out
            }
        }
    }

    /// Elements used to test invariance: finite generators, circle
    /// quadrature nodes, and the embedded test elements of each factor.
    pub fn test_elements(&self) -> Vec<DMatrix<f64>> {
        match self {
            GroupAction::Finite(g) => {
                if g.generators().is_empty() {
                    vec![DMatrix::identity(g.dim(), g.dim())]
                } else {
                    g.generators().to_vec()
                }
            }
            GroupAction::Circle(_) => self.quadrature().into_iter().map(|(_, g)| g).collect(),
            GroupAction::Product(a, b) => {
                let (da, db) = (a.dim(), b.dim());
                let mut out: Vec<_> = a
                    .test_elements()
                    .iter()
                    .map(|g| block_diag(g, &DMatrix::identity(db, db)))
                    .collect();
                out.extend(
                    b.test_elements()
                        .iter()
                        .map(|g| block_diag(&DMatrix::identity(da, da), g)),
                );
                out
            }
        }
    }

    /// Infinitesimal generators of the identity component.
    pub fn lie_generators(&self) -> Vec<DMatrix<f64>> {
        match self {
            GroupAction::Finite(_) => Vec::new(),
            GroupAction::Circle(c) => vec![c.lie_generator()],
            GroupAction::Product(a, b) => {
                let (da, db) = (a.dim(), b.dim());
                let mut out: Vec<_> = a
                    .lie_generators()
                    .iter()
                    .map(|g| block_diag(g, &DMatrix::zeros(db, db)))
                    .collect();
                out.extend(
                    b.lie_generators()
                        .iter()
                        .map(|g| block_diag(&DMatrix::zeros(da, da), g)),
                );
                out
            }
        }
    }

    /// Orthonormal basis of the tangent space of the orbit through `x`.
    pub fn orbit_tangent(&self, x: &DVector<f64>) -> DMatrix<f64> {
        let gens = self.lie_generators();
        let mut m = DMatrix::zeros(x.len(), gens.len());
        for (c, g) in gens.iter().enumerate() {
            m.set_column(c, &(g * x));
        }
        super::orthonormal_span(&m, 1e-10)
    }

    /// Stabilizer of `x`, acting on the same space. Coordinates below `tol`
    /// in absolute value are treated as zero.
    pub fn isotropy(&self, x: &DVector<f64>, tol: f64) -> GroupAction {
        match self {
            GroupAction::Finite(g) => {
                let fixing: Vec<DMatrix<f64>> = g
                    .elements()
                    .iter()
                    .filter(|e| (*e * x - x).amax() <= tol)
                    .cloned()
                    .collect();
                let generators = fixing.into_iter().skip(1).collect();
                GroupAction::Finite(FiniteGroup::new(g.dim(), generators).expect("subgroup of an enumerated group"))
            }
            GroupAction::Circle(c) => {
                let moving = c
                    .weights
                    .iter()
                    .enumerate()
                    .filter(|&(i, &w)| w != 0 && x[2 * i].abs().max(x[2 * i + 1].abs()) > tol)
                    .fold(0u64, |acc, (_, &w)| gcd(acc, w.unsigned_abs()));
                match moving {
                    0 => self.clone(),
                    1 => GroupAction::trivial(c.dim()),
                    k => GroupAction::Finite(
                        FiniteGroup::cyclic(c.matrix(TAU / k as f64)).expect("rotation matrices are orthogonal"),
                    ),
                }
            }
            GroupAction::Product(a, b) => {
                let da = a.dim();
                let xa = x.rows(0, da).into_owned();
                let xb = x.rows(da, b.dim()).into_owned();
                GroupAction::product(a.isotropy(&xa, tol), b.isotropy(&xb, tol))
            }
        }
    }

    pub fn nice_descriptor(&self) -> NiceDescriptor {
        match self {
            GroupAction::Finite(g) => NiceDescriptor {
                component_count: g.order(),
                discrete_part: g.discrete_part(),
            },
            GroupAction::Circle(_) => NiceDescriptor {
                component_count: 1,
                discrete_part: DiscretePart::Trivial,
            },
            GroupAction::Product(a, b) => {
                let (da, db) = (a.nice_descriptor(), b.nice_descriptor());
                use DiscretePart::*;
                let discrete_part = match (da.discrete_part, db.discrete_part) {
                    (Trivial, p) | (p, Trivial) => p,
                    (ProductOfZ2, ProductOfZ2) => ProductOfZ2,
                    (ProductOfZ3, ProductOfZ3) => ProductOfZ3,
                    _ => Other,
                };
                NiceDescriptor {
                    component_count: da.component_count * db.component_count,
                    discrete_part,
                }
            }
        }
    }

    /// Whether two actions describe the same subgroup of `O(d)`.
    pub fn same_group(&self, other: &GroupAction) -> bool {
        match (self, other) {
            (GroupAction::Finite(a), GroupAction::Finite(b)) => {
                a.dim() == b.dim() && a.order() == b.order() && a.elements().iter().all(|g| b.contains(g))
            }
            (GroupAction::Circle(a), GroupAction::Circle(b)) => a == b,
            (GroupAction::Product(a1, a2), GroupAction::Product(b1, b2)) => a1.same_group(b1) && a2.same_group(b2),
            _ => false,
        }
    }

    /// Distance between the orbits of `x` and `y`.
    pub fn orbit_distance(&self, x: &DVector<f64>, y: &DVector<f64>) -> f64 {
        match self {
            GroupAction::Finite(g) => g
                .elements()
                .iter()
                .map(|e| (e * x - y).norm())
                .fold(f64::INFINITY, f64::min),
            GroupAction::Circle(c) => {
                let dist = |t: f64| (c.matrix(t) * x - y).norm();
                let n = c.quadrature_nodes().max(64) * 4;
                let h = TAU / n as f64;
                let best = (0..n)
                    .min_by(|&i, &j| dist(i as f64 * h).total_cmp(&dist(j as f64 * h)))
                    .unwrap_or(0);
                golden_min(&dist, (best as f64 - 1.0) * h, (best as f64 + 1.0) * h)
            }
            GroupAction::Product(a, b) => {
                let da = a.dim();
                let db = b.dim();
                let d1 = a.orbit_distance(&x.rows(0, da).into_owned(), &y.rows(0, da).into_owned());
                let d2 = b.orbit_distance(&x.rows(da, db).into_owned(), &y.rows(da, db).into_owned());
                d1.hypot(d2)
            }
        }
    }
}

/// Discrete part of a compact group, `G / G_0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DiscretePart {
    Trivial,
    ProductOfZ2,
    ProductOfZ3,
    Z4,
    Other,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct NiceDescriptor {
    pub component_count: usize,
    pub discrete_part: DiscretePart,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Niceness {
    Nice,
    Unknown,
}

/// Decides niceness from the known sufficient conditions: connected,
/// fewer than five components, or discrete part a product of `Z_2`s, a
/// product of `Z_3`s, or `Z_4`. Anything else is `Unknown`, never "not nice".
pub fn nice_group(desc: &NiceDescriptor) -> Niceness {
    let sufficient = desc.component_count < 5
        || matches!(
            desc.discrete_part,
            DiscretePart::Trivial | DiscretePart::ProductOfZ2 | DiscretePart::ProductOfZ3 | DiscretePart::Z4
        );
    if sufficient {
        Niceness::Nice
    } else {
        Niceness::Unknown
    }
}

pub(crate) fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0, |acc: f64, v| acc.max(v.abs()))
}

pub(crate) fn block_diag(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    let (ra, ca) = a.shape();
    let (rb, cb) = b.shape();
    let mut m = DMatrix::zeros(ra + rb, ca + cb);
    m.view_mut((0, 0), (ra, ca)).copy_from(a);
    m.view_mut((ra, ca), (rb, cb)).copy_from(b);
    m
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn golden_min(f: &dyn Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let ratio = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - ratio * (b - a);
    let mut d = a + ratio * (b - a);
    for _ in 0..100 {
        if f(c) < f(d) {
            b = d;
        } else {
            a = c;
        }
        c = b - ratio * (b - a);
        d = a + ratio * (b - a);
    }
    f(0.5 * (a + b))
}
