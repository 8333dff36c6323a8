//! Builtin degenerations with hand-derived strata cohomology.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg::{rat, RatMatrix};
use crate::strata::{face, Face, StrataComplex, StratumCohomology};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ScenarioSpec {
    GoodReductionPn { n: usize },
    Ngon { sides: usize },
    NgonTimesP1 { sides: usize },
    Tetrahedron,
    EllipticStratum,
    Cellular { cells: Vec<usize> },
}

impl ScenarioSpec {
    pub fn build(&self) -> Result<StrataComplex> {
        match self {
            ScenarioSpec::GoodReductionPn { n } => good_reduction_pn(*n),
            ScenarioSpec::Ngon { sides } => ngon(*sides),
            ScenarioSpec::NgonTimesP1 { sides } => ngon_x_p1(*sides),
            ScenarioSpec::Tetrahedron => Ok(tetrahedron()),
            ScenarioSpec::EllipticStratum => Ok(elliptic_stratum()),
            ScenarioSpec::Cellular { cells } => cellular(cells),
        }
    }

    /// Every builtin kind at representative parameters.
    pub fn builtins() -> Vec<ScenarioSpec> {
        let mut v = vec![
            ScenarioSpec::GoodReductionPn { n: 1 },
            ScenarioSpec::GoodReductionPn { n: 2 },
            ScenarioSpec::GoodReductionPn { n: 3 },
        ];
        v.extend((3..=8).map(|sides| ScenarioSpec::Ngon { sides }));
        v.extend((3..=5).map(|sides| ScenarioSpec::NgonTimesP1 { sides }));
        v.push(ScenarioSpec::Tetrahedron);
        v.push(ScenarioSpec::EllipticStratum);
        for cells in [vec![1, 1], vec![1, 2, 1], vec![1, 3, 1], vec![1, 2, 2, 1], vec![1, 3, 4, 3, 1]] {
            v.push(ScenarioSpec::Cellular { cells });
        }
        v
    }
}

impl fmt::Display for ScenarioSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScenarioSpec::GoodReductionPn { n } => write!(f, "pn:{n}"),
            ScenarioSpec::Ngon { sides } => write!(f, "ngon:{sides}"),
            ScenarioSpec::NgonTimesP1 { sides } => write!(f, "ngon-x-p1:{sides}"),
            ScenarioSpec::Tetrahedron => write!(f, "tetrahedron"),
            ScenarioSpec::EllipticStratum => write!(f, "elliptic"),
            ScenarioSpec::Cellular { cells } => {
                let parts: Vec<String> = cells.iter().map(|c| c.to_string()).collect();
                write!(f, "cellular:{}", parts.join(","))
            }
        }
    }
}

impl FromStr for ScenarioSpec {
    type Err = Error;

    /// Parses `kind[:params]`, e.g. `ngon:5`, `pn:2`, `cellular:1,2,1`.
    fn from_str(s: &str) -> Result<Self> {
        let (kind, params) = match s.split_once(':') {
            Some((k, p)) => (k.trim(), Some(p.trim())),
            None => (s.trim(), None),
        };
        let count = |what: &str| -> Result<usize> {
            let p = params.ok_or_else(|| Error::InvalidParameters(format!("{kind} needs {what}")))?;
            p.parse()
                .map_err(|_| Error::InvalidParameters(format!("{kind}: {what} must be a count, got {p:?}")))
        };
        let spec = match kind.replace('_', "-").as_str() {
            "pn" | "good-reduction-pn" => ScenarioSpec::GoodReductionPn { n: count("n")? },
            "ngon" => ScenarioSpec::Ngon { sides: count("N")? },
            "ngon-x-p1" => ScenarioSpec::NgonTimesP1 { sides: count("N")? },
            "tetrahedron" => ScenarioSpec::Tetrahedron,
            "elliptic" | "elliptic-stratum" => ScenarioSpec::EllipticStratum,
            "cellular" => {
                let p = params.ok_or_else(|| Error::InvalidParameters("cellular needs cell counts".into()))?;
                let cells = p
                    .split(',')
                    .map(|c| c.trim().parse::<usize>())
                    .collect::<std::result::Result<Vec<_>, _>>()
                    .map_err(|_| Error::InvalidParameters(format!("cellular: bad cell counts {p:?}")))?;
                ScenarioSpec::Cellular { cells }
            }
            other => return Err(Error::InvalidParameters(format!("unknown scenario kind {other:?}"))),
        };
        let fixed = matches!(spec, ScenarioSpec::Tetrahedron | ScenarioSpec::EllipticStratum);
        if fixed && params.is_some() {
            return Err(Error::InvalidParameters(format!("{kind} takes no parameters")));
        }
        Ok(spec)
    }
}

fn labels(prefix: &str, count: usize) -> Vec<String> {
    (1..=count).map(|i| format!("{prefix}{i}")).collect()
}

fn single(name: String, c: StratumCohomology, n: usize) -> StrataComplex {
    StrataComplex {
        name,
        n,
        components: vec!["Y1".into()],
        faces: BTreeMap::from([(Face::single(1), c)]),
        restrictions: BTreeMap::new(),
    }
}

/// Smooth reduction: a single component `P^n`.
pub fn good_reduction_pn(n: usize) -> Result<StrataComplex> {
    if n == 0 {
        return Err(Error::InvalidParameters("good_reduction_pn needs n >= 1".into()));
    }
    Ok(single(format!("good_reduction_pn({n})"), StratumCohomology::projective_space(n), n))
}

/// A cycle of `sides` rational curves, each of Lefschetz degree 1.
pub fn ngon(sides: usize) -> Result<StrataComplex> {
    ngon_with_degrees(&vec![1; sides])
}

/// A cycle of rational curves whose Lefschetz operators have the given degrees.
pub fn ngon_with_degrees(degrees: &[i64]) -> Result<StrataComplex> {
    let sides = degrees.len();
    if sides < 3 {
        return Err(Error::InvalidParameters(format!("ngon needs N >= 3, got {sides}")));
    }
    let mut faces = BTreeMap::new();
    for (i, &d) in degrees.iter().enumerate() {
        let mut c = StratumCohomology::projective_space(1);
        c.lefschetz.insert(0, RatMatrix::from_ints(1, 1, &[d]));
        faces.insert(Face::single(i + 1), c);
    }
    let mut restrictions = BTreeMap::new();
    for i in 1..=sides {
        let j = i % sides + 1;
        let edge = face(&[i, j]);
        faces.insert(edge.clone(), StratumCohomology::point());
        for v in [i, j] {
            restrictions.insert(
                (Face::single(v), edge.clone()),
                BTreeMap::from([(0, RatMatrix::identity(1))]),
            );
        }
    }
    Ok(StrataComplex {
        name: format!("ngon({sides})"),
        n: 1,
        components: labels("C", sides),
        faces,
        restrictions,
    })
}

pub fn ngon_x_p1(sides: usize) -> Result<StrataComplex> {
    let mut sc = ngon(sides)?.product_with_factor(&StratumCohomology::projective_space(1));
    sc.name = format!("ngon_x_p1({sides})");
    Ok(sc)
}

/// Four surfaces meeting along the boundary of a tetrahedron.
///
/// Surface `a` has `H^2` spanned by its three double curves `C_{a,x}`
/// (x ascending) with intersection matrix `J - 2I`, so each double curve has
/// self-intersection -1 on both sides and the triple-point relation holds.
/// The polarization is the sum of the double curves.
pub fn tetrahedron() -> StrataComplex {
    let gram = RatMatrix::from_ints(3, 3, &[-1, 1, 1, 1, -1, 1, 1, 1, -1]);
    let mut faces = BTreeMap::new();
    for a in 1..=4 {
        let mut c = StratumCohomology::new(2, vec![1, 0, 3, 0, 1]);
        c.slope_pure = true;
        c.pairing.insert(0, RatMatrix::identity(1));
        c.pairing.insert(2, gram.clone());
        c.lefschetz.insert(0, RatMatrix::from_ints(3, 1, &[1, 1, 1]));
        c.lefschetz.insert(2, RatMatrix::from_ints(1, 3, &[1, 1, 1]));
        let others: Vec<usize> = (1..=4).filter(|&x| x != a).collect();
        c.labels.insert(2, others.iter().map(|x| format!("C{a}{x}")).collect());
        faces.insert(Face::single(a), c);
    }
    let mut restrictions = BTreeMap::new();
    for a in 1..=4usize {
        for b in a + 1..=4 {
            let line = face(&[a, b]);
            faces.insert(line.clone(), StratumCohomology::projective_space(1));
            for (v, w) in [(a, b), (b, a)] {
                let others: Vec<usize> = (1..=4).filter(|&x| x != v).collect();
                let row = others.iter().position(|&x| x == w).expect("w differs from v");
                let deg2 = gram.block(row, 0, 1, 3);
                restrictions.insert(
                    (Face::single(v), line.clone()),
                    BTreeMap::from([(0, RatMatrix::identity(1)), (2, deg2)]),
                );
            }
        }
    }
    for a in 1..=4usize {
        for b in a + 1..=4 {
            for c in b + 1..=4 {
                let pt = face(&[a, b, c]);
                faces.insert(pt.clone(), StratumCohomology::point());
                for line in [face(&[a, b]), face(&[a, c]), face(&[b, c])] {
                    restrictions.insert((line, pt.clone()), BTreeMap::from([(0, RatMatrix::identity(1))]));
                }
            }
        }
    }
    StrataComplex {
        name: "tetrahedron".into(),
        n: 2,
        components: labels("S", 4),
        faces,
        restrictions,
    }
}

/// An elliptic curve and a rational curve meeting transversally in two points.
pub fn elliptic_stratum() -> StrataComplex {
    let mut e = StratumCohomology::new(1, vec![1, 2, 1]);
    e.pairing.insert(0, RatMatrix::identity(1));
    e.pairing.insert(1, RatMatrix::from_ints(2, 2, &[0, 1, -1, 0]));
    e.lefschetz.insert(0, RatMatrix::identity(1));
    let p1 = StratumCohomology::projective_space(1);
    let mut nodes = StratumCohomology::new(0, vec![2]);
    nodes.pairing.insert(0, RatMatrix::identity(2));
    nodes.slope_pure = true;
    let edge = face(&[1, 2]);
    let both = RatMatrix::from_ints(2, 1, &[1, 1]);
    StrataComplex {
        name: "elliptic_stratum".into(),
        n: 1,
        components: vec!["E".into(), "P1".into()],
        faces: BTreeMap::from([(Face::single(1), e), (Face::single(2), p1), (edge.clone(), nodes)]),
        restrictions: BTreeMap::from([
            ((Face::single(1), edge.clone()), BTreeMap::from([(0, both.clone())])),
            ((Face::single(2), edge), BTreeMap::from([(0, both)])),
        ]),
    }
}

/// Cohomology of a smooth projective variety with a cell decomposition,
/// `cells[c]` cells of codimension `c`.
///
/// The counts must be palindromic and unimodal with a single top cell. The
/// cohomology is assembled from Lefschetz strings: primitive classes in
/// degree `2c` number `cells[c] - cells[c-1]` and pair with sign `(-1)^c`.
pub fn cellular_cohomology(cells: &[usize]) -> Result<StratumCohomology> {
    if cells.is_empty() || cells[0] != 1 {
        return Err(Error::InvalidParameters(format!(
            "cellular needs exactly one cell of codimension 0, got {cells:?}"
        )));
    }
    let d = cells.len() - 1;
    if (0..=d).any(|c| cells[c] != cells[d - c]) {
        return Err(Error::InvalidParameters(format!("cell counts {cells:?} are not palindromic")));
    }
    if (1..=d / 2).any(|c| cells[c] < cells[c - 1]) {
        return Err(Error::InvalidParameters(format!("cell counts {cells:?} are not unimodal")));
    }
    // Strings (start degree c) in order; position of each string element per degree.
    let mut strings = Vec::new();
    for c in 0..=d / 2 {
        let prev = if c == 0 { 0 } else { cells[c - 1] };
        strings.extend(std::iter::repeat_n(c, cells[c] - prev));
    }
    let mut betti = vec![0; 2 * d + 1];
    let mut index: Vec<BTreeMap<usize, usize>> = vec![BTreeMap::new(); d + 1];
    for (s, &c) in strings.iter().enumerate() {
        for e in c..=d - c {
            index[e].insert(s, betti[2 * e]);
            betti[2 * e] += 1;
        }
    }
    let mut coh = StratumCohomology::new(d, betti.clone());
    coh.slope_pure = true;
    for e in 0..=d {
        let mut p = RatMatrix::zeros(betti[2 * e], betti[2 * (d - e)]);
        for (s, &c) in strings.iter().enumerate() {
            if let (Some(&i), Some(&j)) = (index[e].get(&s), index[d - e].get(&s)) {
                let sign = if c % 2 == 0 { 1 } else { -1 };
                p.set(i, j, rat(sign));
            }
        }
        coh.pairing.insert(2 * e, p);
        if e < d {
            let mut l = RatMatrix::zeros(betti[2 * e + 2], betti[2 * e]);
            for (s, _) in strings.iter().enumerate() {
                if let (Some(&i), Some(&j)) = (index[e + 1].get(&s), index[e].get(&s)) {
                    l.set(i, j, rat(1));
                }
            }
            coh.lefschetz.insert(2 * e, l);
        }
    }
    Ok(coh)
}

/// Smooth reduction to a cellular variety.
pub fn cellular(cells: &[usize]) -> Result<StrataComplex> {
    let coh = cellular_cohomology(cells)?;
    if coh.dim == 0 {
        return Err(Error::InvalidParameters("cellular needs dimension >= 1".into()));
    }
    let parts: Vec<String> = cells.iter().map(|c| c.to_string()).collect();
    let n = coh.dim;
    Ok(single(format!("cellular({})", parts.join(",")), coh, n))
}

/// Invertible integer matrix `lower * upper` with unit diagonals.
fn random_unimodular(rng: &mut ChaCha8Rng, size: usize) -> RatMatrix {
    let mut lower = RatMatrix::identity(size);
    let mut upper = RatMatrix::identity(size);
    for i in 0..size {
        for j in 0..i {
            lower.set(i, j, rat(rng.gen_range(-2..=2)));
            upper.set(j, i, rat(rng.gen_range(-2..=2)));
        }
    }
    &lower * &upper
}

/// A small valid complex drawn from the builtin families, optionally times
/// `P^1`, with the basis of every graded piece randomly changed.
pub fn random_instance(seed: u64) -> StrataComplex {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sc = match rng.gen_range(0..6) {
        0 => good_reduction_pn(rng.gen_range(1..=3)).expect("n >= 1"),
        1 => {
            let sides = rng.gen_range(3..=6);
            let degrees: Vec<i64> = (0..sides).map(|_| rng.gen_range(1..=3)).collect();
            ngon_with_degrees(&degrees).expect("N >= 3")
        }
        2 => tetrahedron(),
        3 => elliptic_stratum(),
        4 => {
            let shapes = [vec![1, 1], vec![1, 2, 1], vec![1, 3, 1], vec![1, 2, 2, 1]];
            cellular(shapes.choose(&mut rng).expect("nonempty")).expect("valid shape")
        }
        _ => ngon(rng.gen_range(3..=5)).expect("N >= 3"),
    };
    if sc.n <= 2 && rng.gen_bool(0.3) {
        sc = sc.product_with_factor(&StratumCohomology::projective_space(1));
    }
    let targets: Vec<(Face, usize, usize)> = sc
        .faces
        .iter()
        .flat_map(|(f, c)| {
            c.betti
                .iter()
                .enumerate()
                .filter(|(_, &b)| b > 0)
                .map(move |(m, &b)| (f.clone(), m, b))
        })
        .collect();
    for (f, m, b) in targets {
        if rng.gen_bool(0.5) {
            let g = random_unimodular(&mut rng, b);
            sc.change_basis(&f, m, &g).expect("unimodular basis change");
        }
    }
    sc.name = format!("random({seed}):{}", sc.name);
    sc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtins_validate() {
        for spec in ScenarioSpec::builtins() {
            let sc = spec.build().unwrap();
            let r = sc.validate();
            assert!(r.is_valid(), "{spec}: {:?}", r.violations);
        }
    }

    #[test]
    fn spec_round_trip() {
        for spec in ScenarioSpec::builtins() {
            assert_eq!(spec.to_string().parse::<ScenarioSpec>().unwrap(), spec);
        }
        assert_eq!(
            "good_reduction_pn:2".parse::<ScenarioSpec>().unwrap(),
            ScenarioSpec::GoodReductionPn { n: 2 }
        );
        assert!("ngon".parse::<ScenarioSpec>().is_err());
        assert!("tetrahedron:3".parse::<ScenarioSpec>().is_err());
        assert!("blob:1".parse::<ScenarioSpec>().is_err());
    }

    #[test]
    fn parameter_ranges() {
        assert!(matches!(ngon(2), Err(Error::InvalidParameters(_))));
        assert!(matches!(good_reduction_pn(0), Err(Error::InvalidParameters(_))));
        assert!(matches!(cellular(&[1, 2]), Err(Error::InvalidParameters(_))));
        assert!(matches!(cellular(&[1, 3, 2, 3, 1]), Err(Error::InvalidParameters(_))));
        assert!(matches!(cellular(&[2, 2]), Err(Error::InvalidParameters(_))));
    }

    #[test]
    fn cellular_121() {
        let sc = cellular(&[1, 2, 1]).unwrap();
        let c = &sc.faces[&Face::single(1)];
        assert_eq!(c.betti, vec![1, 0, 2, 0, 1]);
        assert!(c.slope_pure);
        assert_eq!(c.pairing_block(2).unwrap(), RatMatrix::from_ints(2, 2, &[1, 0, 0, -1]));
    }

    #[test]
    fn cellular_projective_space_matches() {
        let a = cellular_cohomology(&[1, 1, 1]).unwrap();
        assert_eq!(a, {
            let mut p = StratumCohomology::projective_space(2);
            p.labels.clear();
            p
        });
    }

    #[test]
    fn random_instances_validate() {
        for seed in 0..30 {
            let sc = random_instance(seed);
            let r = sc.validate();
            assert!(r.is_valid(), "{}: {:?}", sc.name, r.violations);
        }
    }

    #[test]
    fn random_instances_are_reproducible() {
        assert_eq!(random_instance(7).to_json(), random_instance(7).to_json());
    }
}
