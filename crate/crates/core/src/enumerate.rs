//! Exhaustive enumeration of polygon classes by half-perimeter `m` and area `n`.
//!
//! Polygons are generated column by column. A column is a vertical segment
//! `[b, t)` of cells; the state carried between columns is the current
//! column height together with the running half-perimeter and area, so the
//! number of states stays polynomial in `max_m`.

use std::collections::{BTreeMap, HashMap};

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{ModelSpec, PolygonClass};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum EnumerateError {
    #[error("max_m must be at least 2, got {0}")]
    MaxMTooSmall(u32),
    #[error("max_m = {max_m} exceeds the supported limit {limit} for {class}")]
    TooLarge { class: PolygonClass, max_m: u32, limit: u32 },
    #[error("m = {m} outside the table range 1..={max_m}")]
    MOutOfRange { m: u32, max_m: u32 },
    #[error("row m = {0} is empty")]
    EmptyRow(u32),
    #[error("malformed table data: {0}")]
    Parse(String),
}

/// Largest `max_m` accepted by [`enumerate_counts`] per class.
pub fn enumeration_limit(class: PolygonClass) -> u32 {
    match class {
        PolygonClass::Rectangles => 4000,
        PolygonClass::Squares => 8000,
        PolygonClass::Ferrers => 90,
        PolygonClass::Staircase => 34,
        PolygonClass::DirectedConvex => 30,
    }
}

/// Sparse table `(m, n) → p_{m,n}`; zero counts are never stored.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CountTable {
    pub model: PolygonClass,
    pub max_m: u32,
    entries: BTreeMap<(u32, u64), BigUint>,
}

impl CountTable {
    pub fn new(model: PolygonClass, max_m: u32) -> CountTable {
        CountTable { model, max_m, entries: BTreeMap::new() }
    }

    /// Adds `count` to entry `(m, n)`; zero additions are ignored.
    pub fn add(&mut self, m: u32, n: u64, count: &BigUint) {
        if count.is_zero() {
            return;
        }
        *self.entries.entry((m, n)).or_insert_with(BigUint::zero) += count;
    }

    pub fn get(&self, m: u32, n: u64) -> BigUint {
        self.entries.get(&(m, n)).cloned().unwrap_or_default()
    }

    pub fn entries(&self) -> impl Iterator<Item = (u32, u64, &BigUint)> {
        self.entries.iter().map(|(&(m, n), c)| (m, n, c))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Nonzero `(n, p_{m,n})` pairs of row `m`, sorted by `n`.
    pub fn row(&self, m: u32) -> Vec<(u64, BigUint)> {
        self.entries.range((m, 0)..=(m, u64::MAX)).map(|(&(_, n), c)| (n, c.clone())).collect()
    }

    pub fn row_sum(&self, m: u32) -> BigUint {
        self.entries.range((m, 0)..=(m, u64::MAX)).map(|(_, c)| c).sum()
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(vec![]);
        w.write_record(["model", "m", "n", "count"]).expect("in-memory write");
        for (m, n, c) in self.entries() {
            w.write_record([self.model.tag(), &m.to_string(), &n.to_string(), &c.to_string()])
                .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("ascii output")
    }

    /// Parses the CSV form. `max_m` is taken as the largest row present.
    pub fn from_csv(text: &str) -> Result<CountTable, EnumerateError> {
        let mut r = csv::Reader::from_reader(text.as_bytes());
        let headers = r.headers().map_err(|e| EnumerateError::Parse(e.to_string()))?.clone();
        if headers.iter().collect::<Vec<_>>() != ["model", "m", "n", "count"] {
            return Err(EnumerateError::Parse(format!("unexpected header {headers:?}")));
        }
        let mut table: Option<CountTable> = None;
        for rec in r.records() {
            let rec = rec.map_err(|e| EnumerateError::Parse(e.to_string()))?;
            let model: PolygonClass =
                rec[0].parse().map_err(|e: crate::model::UnknownClass| EnumerateError::Parse(e.to_string()))?;
            let m: u32 = rec[1].parse().map_err(|_| EnumerateError::Parse(format!("bad m `{}`", &rec[1])))?;
            let n: u64 = rec[2].parse().map_err(|_| EnumerateError::Parse(format!("bad n `{}`", &rec[2])))?;
            let c: BigUint = rec[3].parse().map_err(|_| EnumerateError::Parse(format!("bad count `{}`", &rec[3])))?;
            let t = table.get_or_insert_with(|| CountTable::new(model, m));
            if t.model != model {
                return Err(EnumerateError::Parse("mixed models in one table".into()));
            }
            if c.is_zero() {
                return Err(EnumerateError::Parse("zero counts are not stored".into()));
            }
            t.max_m = t.max_m.max(m);
            t.entries.insert((m, n), c);
        }
        table.ok_or_else(|| EnumerateError::Parse("empty table".into()))
    }

    pub fn to_json(&self) -> String {
        let doc = TableJson {
            model: self.model,
            max_m: self.max_m,
            entries: self.entries().map(|(m, n, c)| EntryJson { m, n, count: c.to_string() }).collect(),
        };
        serde_json::to_string_pretty(&doc).expect("serializable")
    }

    pub fn from_json(text: &str) -> Result<CountTable, EnumerateError> {
        let doc: TableJson = serde_json::from_str(text).map_err(|e| EnumerateError::Parse(e.to_string()))?;
        let mut t = CountTable::new(doc.model, doc.max_m);
        for e in doc.entries {
            let c: BigUint = e.count.parse().map_err(|_| EnumerateError::Parse(format!("bad count `{}`", e.count)))?;
            if c.is_zero() {
                return Err(EnumerateError::Parse("zero counts are not stored".into()));
            }
            t.entries.insert((e.m, e.n), c);
        }
        Ok(t)
    }
}

#[derive(Serialize, Deserialize)]
struct TableJson {
    model: PolygonClass,
    max_m: u32,
    entries: Vec<EntryJson>,
}

#[derive(Serialize, Deserialize)]
struct EntryJson {
    m: u32,
    n: u64,
    count: String,
}

/// Exact probability mass function of the area at fixed half-perimeter.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DiscreteDistribution {
    pub masses: Vec<(u64, BigRational)>,
}

impl DiscreteDistribution {
    pub fn total(&self) -> BigRational {
        self.masses.iter().map(|(_, p)| p.clone()).sum()
    }

    pub fn moment(&self, k: u32) -> BigRational {
        self.masses.iter().map(|(n, p)| p * BigRational::from_integer(BigInt::from(*n).pow(k))).sum()
    }

    pub fn mean(&self) -> BigRational {
        self.moment(1)
    }

    pub fn variance(&self) -> BigRational {
        let mu = self.mean();
        self.moment(2) - &mu * &mu
    }
}

fn check_range(class: PolygonClass, max_m: u32) -> Result<(), EnumerateError> {
    if max_m < 2 {
        return Err(EnumerateError::MaxMTooSmall(max_m));
    }
    let limit = enumeration_limit(class);
    if max_m > limit {
        return Err(EnumerateError::TooLarge { class, max_m, limit });
    }
    Ok(())
}

/// Enumerates every polygon of `class` with half-perimeter at most `max_m`.
pub fn enumerate_counts(class: PolygonClass, max_m: u32) -> Result<CountTable, EnumerateError> {
    check_range(class, max_m)?;
    let mut table = CountTable::new(class, max_m);
    match class {
        PolygonClass::Rectangles => {
            let one = BigUint::one();
            for r in 1..max_m {
                for s in 1..=(max_m - r) {
                    table.add(r + s, r as u64 * s as u64, &one);
                }
            }
        }
        PolygonClass::Squares => {
            let one = BigUint::one();
            for r in 1..=(max_m / 2) {
                table.add(2 * r, r as u64 * r as u64, &one);
            }
        }
        PolygonClass::Ferrers => columns(&mut table, ColumnRule::Ferrers),
        PolygonClass::Staircase => columns(&mut table, ColumnRule::Staircase),
        PolygonClass::DirectedConvex => columns(&mut table, ColumnRule::DirectedConvex),
    }
    Ok(table)
}

#[derive(Clone, Copy)]
enum ColumnRule {
    Ferrers,
    Staircase,
    DirectedConvex,
}

/// Column state: height, half-perimeter so far, area so far, falling phase.
type State = (u32, u32, u64, bool);

fn columns(table: &mut CountTable, rule: ColumnRule) {
    let max_m = table.max_m;
    let mut frontier: HashMap<State, BigUint> = HashMap::new();
    for h in 1..max_m {
        frontier.insert((h, 1 + h, h as u64, false), BigUint::one());
    }
    while !frontier.is_empty() {
        let mut next: HashMap<State, BigUint> = HashMap::new();
        for ((h, m, n, falling), c) in frontier {
            table.add(m, n, &c);
            if m + 1 > max_m {
                continue;
            }
            let mut push = |h2: u32, dm: u32, f2: bool| {
                let m2 = m + dm;
                if m2 <= max_m {
                    *next.entry((h2, m2, n + h2 as u64, f2)).or_insert_with(BigUint::zero) += &c;
                }
            };
            match rule {
                ColumnRule::Ferrers => {
                    for h2 in 1..=h {
                        push(h2, 1, false);
                    }
                }
                ColumnRule::Staircase => {
                    // new bottom b+δ below the old top, new top t+τ
                    for delta in 0..h {
                        for tau in 0..=(max_m - m - 1) {
                            push(h - delta + tau, 1 + tau, false);
                        }
                    }
                }
                ColumnRule::DirectedConvex => {
                    for delta in 0..h {
                        if !falling {
                            for tau in 0..=(max_m - m - 1) {
                                push(h - delta + tau, 1 + tau, false);
                            }
                        }
                        // top drops by ρ; entering the falling phase needs ρ ≥ 1
                        let rho_min = if falling { 0 } else { 1 };
                        for rho in rho_min..(h - delta) {
                            push(h - delta - rho, 1, true);
                        }
                    }
                }
            }
        }
        frontier = next;
    }
}

/// `(1/k!)·Σ_n (n)_k p_{m,n}`, which equals `Σ_n C(n,k) p_{m,n}`.
pub fn factorial_area_moment(table: &CountTable, m: u32, k: u32) -> Result<BigRational, EnumerateError> {
    if m < 1 || m > table.max_m {
        return Err(EnumerateError::MOutOfRange { m, max_m: table.max_m });
    }
    let mut acc = BigInt::zero();
    for (n, c) in table.row(m) {
        acc += binomial(n, k) * BigInt::from(c);
    }
    Ok(BigRational::from_integer(acc))
}

pub(crate) fn binomial(n: u64, k: u32) -> BigInt {
    let k = k as u64;
    if k > n {
        return BigInt::zero();
    }
    let mut acc = BigInt::one();
    for i in 0..k {
        acc = acc * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    acc
}

/// Law of the area `X̃_m` under the uniform measure on row `m`.
pub fn empirical_area_law(table: &CountTable, m: u32) -> Result<DiscreteDistribution, EnumerateError> {
    if m < 1 || m > table.max_m {
        return Err(EnumerateError::MOutOfRange { m, max_m: table.max_m });
    }
    let row = table.row(m);
    if row.is_empty() {
        return Err(EnumerateError::EmptyRow(m));
    }
    let total = BigInt::from(table.row_sum(m));
    let masses = row.into_iter().map(|(n, c)| (n, BigRational::new(BigInt::from(c), total.clone()))).collect();
    Ok(DiscreteDistribution { masses })
}

/// Dyck paths of half-length `m−1` counted by the sum of their peak heights.
pub fn dyck_peak_area_counts(max_m: u32) -> Result<CountTable, EnumerateError> {
    if max_m < 2 {
        return Err(EnumerateError::MaxMTooSmall(max_m));
    }
    let mut table = CountTable::new(PolygonClass::Staircase, max_m);
    let half = max_m - 1;
    // (height, last step was up, peak sum)
    let mut states: HashMap<(u32, bool, u64), BigUint> = HashMap::new();
    states.insert((0, false, 0), BigUint::one());
    for step in 1..=(2 * half) {
        let mut next: HashMap<(u32, bool, u64), BigUint> = HashMap::new();
        for ((h, up, sum), c) in states {
            let remaining = 2 * half - step;
            if h + 1 <= remaining {
                *next.entry((h + 1, true, sum)).or_insert_with(BigUint::zero) += &c;
            }
            if h > 0 {
                let sum2 = if up { sum + h as u64 } else { sum };
                *next.entry((h - 1, false, sum2)).or_insert_with(BigUint::zero) += &c;
            }
        }
        states = next;
        if step % 2 == 0 {
            for ((h, _, sum), c) in &states {
                if *h == 0 {
                    table.add(step / 2 + 1, *sum, c);
                }
            }
        }
    }
    Ok(table)
}

/// True when every stored entry lies in the growth window of its model.
pub fn respects_growth_window(table: &CountTable) -> bool {
    let spec = ModelSpec::of(table.model);
    table.entries().all(|(m, n, _)| spec.in_growth_window(m as u64, n))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn u(v: u64) -> BigUint {
        BigUint::from(v)
    }

    #[test]
    fn rectangles_small() {
        let t = enumerate_counts(PolygonClass::Rectangles, 3).unwrap();
        assert_eq!(t.get(3, 2), u(2));
        assert_eq!(t.row(3).len(), 1);
    }

    #[test]
    fn staircase_small() {
        let t = enumerate_counts(PolygonClass::Staircase, 5).unwrap();
        assert_eq!(t.get(2, 1), u(1));
        assert_eq!(t.row_sum(5), u(14));
        assert_eq!(t.get(4, 3), u(4));
        assert_eq!(t.get(4, 4), u(1));
    }

    #[test]
    fn ferrers_row_sum() {
        let t = enumerate_counts(PolygonClass::Ferrers, 6).unwrap();
        assert_eq!(t.row_sum(6), u(16));
    }

    #[test]
    fn factorial_moments() {
        let st = enumerate_counts(PolygonClass::Staircase, 4).unwrap();
        assert_eq!(factorial_area_moment(&st, 3, 1).unwrap(), BigRational::from_integer(4.into()));
        assert_eq!(factorial_area_moment(&st, 4, 0).unwrap(), BigRational::from_integer(BigInt::from(st.row_sum(4))));
        let re = enumerate_counts(PolygonClass::Rectangles, 4).unwrap();
        assert_eq!(factorial_area_moment(&re, 4, 1).unwrap(), BigRational::from_integer(10.into()));
        assert!(factorial_area_moment(&re, 5, 1).is_err());
    }

    #[test]
    fn area_laws() {
        let re = enumerate_counts(PolygonClass::Rectangles, 5).unwrap();
        let d3 = empirical_area_law(&re, 3).unwrap();
        assert_eq!(d3.masses, vec![(2, BigRational::one())]);
        let d5 = empirical_area_law(&re, 5).unwrap();
        let half = BigRational::new(1.into(), 2.into());
        assert_eq!(d5.masses, vec![(4, half.clone()), (6, half)]);
        let st = enumerate_counts(PolygonClass::Staircase, 3).unwrap();
        assert_eq!(empirical_area_law(&st, 3).unwrap().masses, vec![(2, BigRational::one())]);
        let sq = enumerate_counts(PolygonClass::Squares, 5).unwrap();
        assert_eq!(empirical_area_law(&sq, 5), Err(EnumerateError::EmptyRow(5)));
    }

    #[test]
    fn dyck_small() {
        let t = dyck_peak_area_counts(2).unwrap();
        assert_eq!(t.get(2, 1), u(1));
        let t = dyck_peak_area_counts(3).unwrap();
        assert_eq!(t.get(3, 2), u(2));
        assert_eq!(t.row(3).len(), 1);
    }

    #[test]
    fn range_errors() {
        assert_eq!(enumerate_counts(PolygonClass::Staircase, 1), Err(EnumerateError::MaxMTooSmall(1)));
        assert!(matches!(enumerate_counts(PolygonClass::Staircase, 200), Err(EnumerateError::TooLarge { .. })));
    }

    #[test]
    fn csv_json_round_trip() {
        let t = enumerate_counts(PolygonClass::DirectedConvex, 8).unwrap();
        let csv = t.to_csv();
        assert!(csv.starts_with("model,m,n,count\n"));
        let back = CountTable::from_csv(&csv).unwrap();
        assert_eq!(back, t);
        assert_eq!(back.to_csv(), csv);
        let json = t.to_json();
        let back = CountTable::from_json(&json).unwrap();
        assert_eq!(back, t);
        assert_eq!(back.to_json(), json);
    }
}
