//! Slope multisets, Newton and Hodge polygons, and the filtered
//! `(φ, N)`-module arithmetic built on them.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::check::{CheckResult, Witness};
use crate::error::{Error, Result};
use crate::linalg::{rat, rat_to_string, Rat};
use crate::weight_ss::E2Page;

/// Frobenius slopes on `H^q`, with multiplicities.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct SlopeMultiset {
    pub degree: usize,
    entries: BTreeMap<Rat, usize>,
}

impl SlopeMultiset {
    pub fn new(degree: usize, slopes: impl IntoIterator<Item = Rat>) -> Self {
        let mut entries = BTreeMap::new();
        for s in slopes {
            *entries.entry(s).or_insert(0) += 1;
        }
        SlopeMultiset { degree, entries }
    }

    pub fn with_multiplicities(degree: usize, pairs: impl IntoIterator<Item = (Rat, usize)>) -> Self {
        let mut entries = BTreeMap::new();
        for (s, m) in pairs {
            if m > 0 {
                *entries.entry(s).or_insert(0) += m;
            }
        }
        SlopeMultiset { degree, entries }
    }

    /// Distinct slopes in increasing order with their multiplicities.
    pub fn entries(&self) -> impl Iterator<Item = (&Rat, usize)> {
        self.entries.iter().map(|(s, &m)| (s, m))
    }

    pub fn multiplicity(&self, slope: &Rat) -> usize {
        self.entries.get(slope).copied().unwrap_or(0)
    }

    /// All slopes, sorted, repeated by multiplicity.
    pub fn values(&self) -> Vec<Rat> {
        self.entries
            .iter()
            .flat_map(|(s, &m)| std::iter::repeat_n(s.clone(), m))
            .collect()
    }

    pub fn len(&self) -> usize {
        self.entries.values().sum()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn total(&self) -> Rat {
        self.entries
            .iter()
            .map(|(s, &m)| s * rat(m as i64))
            .fold(Rat::zero(), |a, b| a + b)
    }
}

impl fmt::Display for SlopeMultiset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.values().iter().map(rat_to_string).collect();
        write!(f, "{{{}}}", parts.join(", "))
    }
}

/// `h^{i,q-i}` for `0 <= i <= q`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct HodgeVector {
    pub degree: usize,
    pub values: Vec<usize>,
}

impl HodgeVector {
    pub fn new(degree: usize, values: Vec<usize>) -> Result<Self> {
        if values.len() != degree + 1 {
            return Err(Error::InvalidParameters(format!(
                "degree {degree} needs {} Hodge numbers, got {}",
                degree + 1,
                values.len()
            )));
        }
        Ok(HodgeVector { degree, values })
    }

    /// `h^{i,q-i}`.
    pub fn get(&self, i: usize) -> usize {
        self.values.get(i).copied().unwrap_or(0)
    }

    pub fn is_palindromic(&self) -> bool {
        self.values.iter().eq(self.values.iter().rev())
    }

    /// Nonzero `h^{i,q-i} = h^{q-i,i}` pairs with `i > q - i`, e.g. `h^{1,0}=h^{0,1}=1`.
    pub fn describe_off_diagonal(&self) -> Vec<String> {
        let q = self.degree;
        (0..=q)
            .rev()
            .filter(|&i| 2 * i > q && self.get(i) > 0)
            .map(|i| {
                format!(
                    "h^{{{i},{j}}}=h^{{{j},{i}}}={}",
                    self.get(i),
                    j = q - i
                )
            })
            .collect()
    }
}

/// Lower convex polygon through `(0,0)`; vertices only where the slope changes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Polygon {
    vertices: Vec<(Rat, Rat)>,
}

impl Polygon {
    /// Segments of the given slopes (any order) and horizontal lengths.
    pub fn from_segments(segments: impl IntoIterator<Item = (Rat, usize)>) -> Self {
        let mut merged: BTreeMap<Rat, usize> = BTreeMap::new();
        for (s, len) in segments {
            if len > 0 {
                *merged.entry(s).or_insert(0) += len;
            }
        }
        let mut vertices = vec![(Rat::zero(), Rat::zero())];
        for (s, len) in merged {
            let (x, y) = vertices.last().cloned().expect("nonempty");
            let dx = rat(len as i64);
            vertices.push((x + &dx, y + s * dx));
        }
        Polygon { vertices }
    }

    pub fn vertices(&self) -> &[(Rat, Rat)] {
        &self.vertices
    }

    pub fn endpoint(&self) -> &(Rat, Rat) {
        self.vertices.last().expect("polygons start at the origin")
    }

    /// Height at `x`, or `None` outside `[0, width]`.
    pub fn value_at(&self, x: &Rat) -> Option<Rat> {
        if x.is_negative() || x > &self.endpoint().0 {
            return None;
        }
        for w in self.vertices.windows(2) {
            let ((x0, y0), (x1, y1)) = (&w[0], &w[1]);
            if x <= x1 {
                return Some(y0 + (y1 - y0) * (x - x0) / (x1 - x0));
            }
        }
        Some(self.endpoint().1.clone())
    }

    /// Segment slopes in order.
    pub fn slopes(&self) -> Vec<Rat> {
        self.vertices
            .windows(2)
            .map(|w| (&w[1].1 - &w[0].1) / (&w[1].0 - &w[0].0))
            .collect()
    }

    /// First `x` among the vertices of both polygons where `self` is below `other`.
    pub fn first_point_below(&self, other: &Polygon) -> Option<Rat> {
        let mut xs: Vec<Rat> = self
            .vertices
            .iter()
            .chain(&other.vertices)
            .map(|(x, _)| x.clone())
            .collect();
        xs.sort();
        xs.dedup();
        xs.into_iter().find(|x| match (self.value_at(x), other.value_at(x)) {
            (Some(a), Some(b)) => a < b,
            _ => false,
        })
    }

    pub fn to_json_value(&self) -> serde_json::Value {
        serde_json::Value::Array(
            self.vertices
                .iter()
                .map(|(x, y)| serde_json::json!([rat_to_string(x), rat_to_string(y)]))
                .collect(),
        )
    }
}

pub fn newton_polygon(sl: &SlopeMultiset) -> Polygon {
    Polygon::from_segments(sl.entries().map(|(s, m)| (s.clone(), m)))
}

pub fn hodge_polygon(h: &HodgeVector) -> Polygon {
    Polygon::from_segments(h.values.iter().enumerate().map(|(i, &m)| (rat(i as i64), m)))
}

/// Slopes and Hodge filtration jumps of a filtered `(φ, N)`-module.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PhiNModule {
    pub slopes: SlopeMultiset,
    pub jumps: BTreeMap<i64, usize>,
    pub monodromy_rank: Option<usize>,
}

impl PhiNModule {
    pub fn new(
        slopes: SlopeMultiset,
        jumps: impl IntoIterator<Item = i64>,
        monodromy_rank: Option<usize>,
    ) -> Result<Self> {
        let mut map = BTreeMap::new();
        for j in jumps {
            *map.entry(j).or_insert(0) += 1;
        }
        let count: usize = map.values().sum();
        if count != slopes.len() {
            return Err(Error::InvalidModule(format!(
                "{} slopes but {count} filtration jumps",
                slopes.len()
            )));
        }
        Ok(PhiNModule {
            slopes,
            jumps: map,
            monodromy_rank,
        })
    }

    /// Jumps read off ordinary Hodge numbers: `i` with multiplicity `h^{i,q-i}`.
    pub fn from_hodge(slopes: SlopeMultiset, h: &HodgeVector) -> Result<Self> {
        let jumps = h
            .values
            .iter()
            .enumerate()
            .flat_map(|(i, &m)| std::iter::repeat_n(i as i64, m));
        Self::new(slopes, jumps, None)
    }

    pub fn dim(&self) -> usize {
        self.slopes.len()
    }

    pub fn newton_polygon(&self) -> Polygon {
        newton_polygon(&self.slopes)
    }

    pub fn hodge_polygon(&self) -> Polygon {
        Polygon::from_segments(self.jumps.iter().map(|(&j, &m)| (rat(j), m)))
    }
}

pub fn t_n(m: &PhiNModule) -> Rat {
    m.slopes.total()
}

pub fn t_h(m: &PhiNModule) -> Rat {
    m.jumps
        .iter()
        .map(|(&j, &k)| rat(j * k as i64))
        .fold(Rat::zero(), |a, b| a + b)
}

/// The `b/2` labels of `E2^{q-b,b}`, weighted by dimension.
pub fn slopes_from_e2(e2: &E2Page, q: usize) -> Result<SlopeMultiset> {
    if !e2.cycle_generated {
        return Err(Error::SlopesUnavailable);
    }
    let q = q as i64;
    let pairs = e2
        .cells()
        .filter(|c| c.a + c.b == q && c.dim() > 0)
        .map(|c| (c.slope.clone().expect("cycle-generated cells carry slopes"), c.dim()));
    Ok(SlopeMultiset::with_multiplicities(q as usize, pairs))
}

pub fn check_slope_symmetry(sl: &SlopeMultiset) -> CheckResult {
    let q = rat(sl.degree as i64);
    let result = CheckResult::new("slope_symmetry", &[("q", sl.degree as i64)])
        .fact("count", sl.len());
    let bad = sl
        .entries()
        .find(|(s, m)| sl.multiplicity(&(&q - *s)) != *m);
    match bad {
        None => result,
        Some((s, m)) => {
            let mirror = &q - s;
            let values = BTreeMap::from([
                (format!("mult {}", rat_to_string(s)), m.to_string()),
                (
                    format!("mult {}", rat_to_string(&mirror)),
                    sl.multiplicity(&mirror).to_string(),
                ),
            ]);
            result.fail(Witness::Values { values })
        }
    }
}

/// Endpoint equality and Newton on or above Hodge; weak admissibility over
/// all subobjects is not tested.
pub fn check_admissibility_necessary(m: &PhiNModule) -> CheckResult {
    let result = CheckResult::new("admissibility_necessary", &[("q", m.slopes.degree as i64)])
        .note("necessary conditions only")
        .fact("dim", m.dim());
    let (tn, th) = (t_n(m), t_h(m));
    if tn != th {
        let values = BTreeMap::from([
            ("t_N".to_string(), rat_to_string(&tn)),
            ("t_H".to_string(), rat_to_string(&th)),
        ]);
        return result.fail(Witness::Values { values });
    }
    let (newton, hodge) = (m.newton_polygon(), m.hodge_polygon());
    match newton.first_point_below(&hodge) {
        None => result,
        Some(x) => {
            let values = BTreeMap::from([
                ("x".to_string(), rat_to_string(&x)),
                ("newton".to_string(), rat_to_string(&newton.value_at(&x).unwrap())),
                ("hodge".to_string(), rat_to_string(&hodge.value_at(&x).unwrap())),
            ]);
            result.fail(Witness::Values { values })
        }
    }
}

/// `N` maps slope `α` into slope `α - 1`, bounding its rank by
/// `Σ_α min(mult α, mult (α - 1))`.
pub fn check_monodromy_rank(m: &PhiNModule) -> CheckResult {
    let result = CheckResult::new("monodromy_rank", &[("q", m.slopes.degree as i64)]);
    let Some(rank) = m.monodromy_rank else {
        return result.skip("no monodromy rank given");
    };
    let bound: usize = m
        .slopes
        .entries()
        .map(|(s, k)| k.min(m.slopes.multiplicity(&(s - Rat::one()))))
        .sum();
    let result = result.fact("rank", rank).fact("bound", bound);
    if rank <= bound {
        result
    } else {
        let values = BTreeMap::from([
            ("rank".to_string(), rank.to_string()),
            ("bound".to_string(), bound.to_string()),
        ]);
        result.fail(Witness::Values { values })
    }
}

/// `Σ_i (i - j) h^{i,j} = 0` over `i + j = q`.
pub fn check_linear_relation(h: &HodgeVector) -> CheckResult {
    let q = h.degree as i64;
    let sum: i64 = h
        .values
        .iter()
        .enumerate()
        .map(|(i, &v)| (2 * i as i64 - q) * v as i64)
        .sum();
    let result = CheckResult::new("linear_relation", &[("q", q)]).fact("sum", sum);
    if sum == 0 {
        result
    } else {
        let values = BTreeMap::from([("sum".to_string(), sum.to_string())]);
        result.fail(Witness::Values { values })
    }
}

/// Hodge numbers of an ordinary degree-`q` piece: `h^{i,q-i}` is the
/// multiplicity of slope `i`.
pub fn hodge_from_ordinary(sl: &SlopeMultiset) -> Result<HodgeVector> {
    let q = sl.degree;
    let mut values = vec![0; q + 1];
    for (s, m) in sl.entries() {
        if !s.is_integer() {
            return Err(Error::NonIntegralSlopes(rat_to_string(s)));
        }
        let i = s
            .to_integer()
            .to_usize()
            .filter(|&i| i <= q)
            .ok_or_else(|| {
                Error::InvalidModule(format!("slope {} outside [0, {q}]", rat_to_string(s)))
            })?;
        values[i] += m;
    }
    HodgeVector::new(q, values)
}

/// Plain-text plot of two polygons over the same width: `N` marks the first,
/// `H` the second, `*` where they meet.
pub fn ascii_sketch(newton: &Polygon, hodge: &Polygon) -> String {
    let width = newton.endpoint().0.clone().max(hodge.endpoint().0.clone());
    let top = newton.endpoint().1.clone().max(hodge.endpoint().1.clone());
    let bottom = newton
        .vertices()
        .iter()
        .chain(hodge.vertices())
        .map(|(_, y)| y.clone())
        .min()
        .unwrap_or_else(Rat::zero);
    let cols = width.ceil().to_integer().to_usize().unwrap_or(0).min(60);
    let rows = (&top - &bottom).ceil().to_integer().to_usize().unwrap_or(0).min(20);
    if cols == 0 {
        return "(empty)\n".to_string();
    }
    let xscale = &width / rat(cols as i64);
    let yscale = if rows == 0 {
        Rat::one()
    } else {
        (&top - &bottom) / rat(rows as i64)
    };
    let row_of = |y: Rat| ((y - &bottom) / &yscale).round().to_integer().to_usize().unwrap_or(0);
    let mut grid = vec![vec![' '; cols + 1]; rows + 1];
    for c in 0..=cols {
        let x = &xscale * rat(c as i64);
        let cells = [(newton.value_at(&x), 'N'), (hodge.value_at(&x), 'H')];
        for (y, mark) in cells {
            if let Some(y) = y {
                let r = row_of(y).min(rows);
                let slot = &mut grid[rows - r][c];
                *slot = if *slot == ' ' || *slot == mark { mark } else { '*' };
            }
        }
    }
    let mut out = String::new();
    for row in grid {
        out.push('|');
        out.extend(row.iter());
        out.truncate(out.trim_end().len());
        out.push('\n');
    }
    out.push('+');
    out.push_str(&"-".repeat(cols + 1));
    out.push('\n');
    out
}
