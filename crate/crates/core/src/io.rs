//! JSON formats for maps, skew products and partitions.
//!
//! Rationals are written as strings `"p/q"` (or `"p"` when `q = 1`) so that
//! files round-trip exactly.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exactgeom::{format_rat, parse_rat, AffineMap, HalfSpace, Polytope, RMat, RVec, Rat};
use crate::pwamap::{Cell, Partition, Piece, PwaMap};
use crate::skew::{BaseDynamics, SkewProduct};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sense {
    Le,
    Ge,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConstraintDef {
    pub a: Vec<String>,
    pub b: String,
    #[serde(default)]
    pub strict: bool,
    #[serde(default = "default_sense")]
    pub sense: Sense,
}

fn default_sense() -> Sense {
    Sense::Le
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PolytopeDef {
    pub constraints: Vec<ConstraintDef>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AffineDef {
    #[serde(rename = "A")]
    pub a: Vec<Vec<String>>,
    pub b: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PieceDef {
    pub domain: PolytopeDef,
    #[serde(rename = "A")]
    pub a: Vec<Vec<String>>,
    pub b: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MapDef {
    pub dim: usize,
    pub ambient: PolytopeDef,
    pub pieces: Vec<PieceDef>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum BaseDef {
    Pwamap {
        map: MapDef,
    },
    Shift {
        #[serde(rename = "N")]
        n: usize,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SkewDef {
    pub base: BaseDef,
    pub fiber_space: PolytopeDef,
    pub fibers: Vec<MapDef>,
    pub assignment: Vec<usize>,
}

/// One exported cell of a continuity partition.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CellDef {
    pub word: Vec<usize>,
    pub constraints: Vec<ConstraintDef>,
    pub composed: AffineDef,
}

fn parse_vec(v: &[String]) -> Result<RVec> {
    v.iter().map(|s| parse_rat(s)).collect::<Result<Vec<Rat>>>().map(RVec)
}

fn format_vec(v: &RVec) -> Vec<String> {
    v.iter().map(format_rat).collect()
}

fn parse_mat(rows: &[Vec<String>], dim: usize) -> Result<RMat> {
    if rows.len() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: rows.len(),
        });
    }
    let rows = rows
        .iter()
        .map(|r| {
            if r.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: r.len(),
                });
            }
            r.iter().map(|s| parse_rat(s)).collect::<Result<Vec<Rat>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    RMat::from_rows(rows)
}

fn format_mat(m: &RMat) -> Vec<Vec<String>> {
    m.to_rows().iter().map(|r| r.iter().map(format_rat).collect()).collect()
}

impl ConstraintDef {
    pub fn to_halfspace(&self, dim: usize) -> Result<HalfSpace> {
        let a = parse_vec(&self.a)?;
        a.check_dim(dim)?;
        let b = parse_rat(&self.b)?;
        match self.sense {
            Sense::Le => HalfSpace::le(a, b, self.strict),
            Sense::Ge => HalfSpace::ge(a, b, self.strict),
        }
    }

    pub fn from_halfspace(h: &HalfSpace) -> Self {
        ConstraintDef {
            a: format_vec(h.normal()),
            b: format_rat(h.offset()),
            strict: h.is_strict(),
            sense: Sense::Le,
        }
    }
}

impl PolytopeDef {
    pub fn to_polytope(&self, dim: usize) -> Result<Polytope> {
        let hs = self
            .constraints
            .iter()
            .map(|c| c.to_halfspace(dim))
            .collect::<Result<Vec<_>>>()?;
        Polytope::new(dim, hs)
    }

    pub fn from_polytope(p: &Polytope) -> Self {
        PolytopeDef {
            constraints: p.constraints().iter().map(ConstraintDef::from_halfspace).collect(),
        }
    }
}

impl AffineDef {
    pub fn to_affine(&self, dim: usize) -> Result<AffineMap> {
        let b = parse_vec(&self.b)?;
        b.check_dim(dim)?;
        AffineMap::new(parse_mat(&self.a, dim)?, b)
    }

    pub fn from_affine(g: &AffineMap) -> Self {
        AffineDef {
            a: format_mat(&g.linear),
            b: format_vec(&g.shift),
        }
    }
}

impl MapDef {
    /// Builds and validates the map.
    pub fn to_map(&self) -> Result<PwaMap> {
        if self.dim == 0 {
            return Err(Error::InvalidMap("dimension must be positive".into()));
        }
        let d = self.dim;
        let ambient = self.ambient.to_polytope(d)?;
        let pieces = self
            .pieces
            .iter()
            .map(|p| {
                let b = parse_vec(&p.b)?;
                b.check_dim(d)?;
                Ok(Piece {
                    domain: p.domain.to_polytope(d)?,
                    map: AffineMap::new(parse_mat(&p.a, d)?, b)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        PwaMap::new(ambient, pieces)
    }

    pub fn from_map(f: &PwaMap) -> Self {
        MapDef {
            dim: f.dim(),
            ambient: PolytopeDef::from_polytope(f.ambient()),
            pieces: f
                .pieces()
                .iter()
                .map(|p| PieceDef {
                    domain: PolytopeDef::from_polytope(&p.domain),
                    a: format_mat(&p.map.linear),
                    b: format_vec(&p.map.shift),
                })
                .collect(),
        }
    }
}

impl SkewDef {
    pub fn to_skew(&self) -> Result<SkewProduct> {
        let base = match &self.base {
            BaseDef::Pwamap { map } => BaseDynamics::Map(map.to_map()?),
            BaseDef::Shift { n } => BaseDynamics::FullShift(*n),
        };
        let fibers = self.fibers.iter().map(MapDef::to_map).collect::<Result<Vec<_>>>()?;
        let fd = fibers
            .first()
            .map(PwaMap::dim)
            .ok_or_else(|| Error::InvalidMap("skew product needs at least one fibre map".into()))?;
        let fiber_space = self.fiber_space.to_polytope(fd)?;
        SkewProduct::new(base, fiber_space, fibers, self.assignment.clone())
    }

    pub fn from_skew(sp: &SkewProduct) -> Self {
        SkewDef {
            base: match &sp.base {
                BaseDynamics::Map(f) => BaseDef::Pwamap {
                    map: MapDef::from_map(f),
                },
                BaseDynamics::FullShift(n) => BaseDef::Shift { n: *n },
            },
            fiber_space: PolytopeDef::from_polytope(&sp.fiber_space),
            fibers: sp.fibers.iter().map(MapDef::from_map).collect(),
            assignment: sp.assignment.clone(),
        }
    }
}

impl CellDef {
    pub fn from_cell(c: &Cell) -> Self {
        CellDef {
            word: c.word.clone(),
            constraints: c
                .region
                .constraints()
                .iter()
                .map(ConstraintDef::from_halfspace)
                .collect(),
            composed: AffineDef::from_affine(&c.composed),
        }
    }
}

pub fn parse_map(json: &str) -> Result<PwaMap> {
    serde_json::from_str::<MapDef>(json)?.to_map()
}

pub fn map_to_json(f: &PwaMap) -> String {
    serde_json::to_string_pretty(&MapDef::from_map(f)).expect("map definitions serialize")
}

pub fn parse_skew(json: &str) -> Result<SkewProduct> {
    serde_json::from_str::<SkewDef>(json)?.to_skew()
}

pub fn skew_to_json(sp: &SkewProduct) -> String {
    serde_json::to_string_pretty(&SkewDef::from_skew(sp)).expect("skew definitions serialize")
}

/// Cells in word order.
pub fn export_partition(p: &Partition) -> Vec<CellDef> {
    let mut cells: Vec<CellDef> = p.cells.iter().map(CellDef::from_cell).collect();
    cells.sort_by(|a, b| a.word.cmp(&b.word));
    cells
}
