//! Bratteli diagram of the filtration `W_1 ⊆ W_2 ⊆ …`, computed from the closed
//! multiplicity formula and, independently, from ranks of the units `1_v^k`.

use std::fmt::Write as _;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::gicar::block_unit_on;
use crate::linalg::{singular_values, RANK_REL_TOL};
use crate::rep::TruncatedFock;
use crate::rewrite::QMatrix;
use crate::words::OccVector;

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct BratteliNode {
    pub k: usize,
    pub v: OccVector,
    /// Matrix size `multinomial(v)` of the block.
    pub dim: u64,
}

/// Edge from block `v` of `W_k` to block `u` of `W_{k+1}` with multiplicity `m`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct BratteliEdge {
    pub k: usize,
    pub v: OccVector,
    pub u: OccVector,
    pub m: u64,
}

/// Whether the level-`k` inclusion fills block `u` of level `k+1`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct UnitalRecord {
    pub k: usize,
    pub u: OccVector,
    /// `sum_v m_{v,u} * multinomial(v)`.
    pub covered: u64,
    pub dim: u64,
    pub unital: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Diagram {
    pub n: usize,
    pub k_max: usize,
    pub nodes: Vec<BratteliNode>,
    pub edges: Vec<BratteliEdge>,
    pub unital: Vec<UnitalRecord>,
}

/// Closed form: `multinomial(u - v)` if `0 <= u - v <= 1` and `u_t > v_t` only where `v_t = k`; else 0.
pub fn multiplicity_closed(v: &OccVector, u: &OccVector, k: usize) -> u64 {
    let Some(diff) = u.checked_sub(v) else { return 0 };
    let admissible = diff
        .entries()
        .iter()
        .zip(v.entries())
        .all(|(&d, &vt)| d == 0 || (d == 1 && vt == k));
    if admissible {
        diff.multinomial()
    } else {
        0
    }
}

/// `rank(1_v^k on H_u) / multinomial(v)`, with `1_v^k` evaluated on the blocks `w <= (k+1)^n`.
///
/// `t` must contain every block `w <= (k+1)^n`.
pub fn multiplicity_numeric(v: &OccVector, u: &OccVector, k: usize, t: &TruncatedFock) -> Result<u64> {
    Ok(numeric_row(v, k, t)?
        .into_iter()
        .find(|(w, _)| w == u)
        .map_or(0, |(_, m)| m))
}

/// Numeric multiplicities from `v` to every `u <= (k+1)^n`, one unit construction.
pub fn numeric_row(v: &OccVector, k: usize, t: &TruncatedFock) -> Result<Vec<(OccVector, u64)>> {
    let bound = OccVector::splat(t.n(), k + 1);
    let unit = block_unit_on(v, k, &bound, t)?;
    let dim = v.multinomial();
    // one threshold for the whole unit, so round-off blocks do not count
    let top = unit.blocks().flat_map(|(_, _, m)| singular_values(m)).fold(0.0, f64::max);
    let mut row = Vec::new();
    for u in OccVector::lattice_below(&bound) {
        let r = unit.block(&u, &u).map_or(0, |m| {
            singular_values(m).iter().filter(|&&x| x > RANK_REL_TOL * top).count()
        }) as u64;
        if !r.is_multiple_of(dim) {
            return Err(Error::NonIntegralMultiplicity { rank: r as usize, dim });
        }
        row.push((u, r / dim));
    }
    Ok(row)
}

fn nodes(n: usize, k_max: usize) -> Vec<BratteliNode> {
    (1..=k_max + 1)
        .flat_map(|k| {
            OccVector::lattice_box(n, k)
                .into_iter()
                .map(move |v| BratteliNode { k, dim: v.multinomial(), v })
        })
        .collect()
}

fn unital_records(n: usize, k_max: usize, edges: &[BratteliEdge]) -> Vec<UnitalRecord> {
    let mut out = Vec::new();
    for k in 1..=k_max {
        for u in OccVector::lattice_box(n, k + 1) {
            let covered = edges
                .iter()
                .filter(|e| e.k == k && e.u == u)
                .map(|e| e.m * e.v.multinomial())
                .sum();
            let dim = u.multinomial();
            out.push(UnitalRecord { k, u, covered, dim, unital: covered == dim });
        }
    }
    out
}

fn assemble(n: usize, k_max: usize, edges: Vec<BratteliEdge>) -> Diagram {
    let unital = unital_records(n, k_max, &edges);
    Diagram { n, k_max, nodes: nodes(n, k_max), edges, unital }
}

/// Diagram for levels `1..=k_max + 1` from the closed form.
pub fn diagram_closed(n: usize, k_max: usize) -> Diagram {
    let mut edges = Vec::new();
    for k in 1..=k_max {
        for v in OccVector::lattice_box(n, k) {
            for u in OccVector::lattice_box(n, k + 1) {
                let m = multiplicity_closed(&v, &u, k);
                if m > 0 {
                    edges.push(BratteliEdge { k, v: v.clone(), u, m });
                }
            }
        }
    }
    assemble(n, k_max, edges)
}

/// Diagram for levels `1..=k_max + 1` from numeric ranks in the Fock representation of `q`.
pub fn diagram_numeric(q: &QMatrix, k_max: usize) -> Result<Diagram> {
    let n = q.n();
    let mut edges = Vec::new();
    for k in 1..=k_max {
        let t = TruncatedFock::boxed(q, &OccVector::splat(n, k + 1))?;
        for v in OccVector::lattice_box(n, k) {
            for (u, m) in numeric_row(&v, k, &t)? {
                if m > 0 {
                    edges.push(BratteliEdge { k, v: v.clone(), u, m });
                }
            }
        }
    }
    Ok(assemble(n, k_max, edges))
}

/// Pairs `(v, u)` where the numeric and closed multiplicities disagree.
pub fn disagreements(q: &QMatrix, k: usize) -> Result<Vec<(OccVector, OccVector, u64, u64)>> {
    let n = q.n();
    let t = TruncatedFock::boxed(q, &OccVector::splat(n, k + 1))?;
    let mut out = Vec::new();
    for v in OccVector::lattice_box(n, k) {
        for (u, m) in numeric_row(&v, k, &t)? {
            let want = multiplicity_closed(&v, &u, k);
            if m != want {
                out.push((v.clone(), u, m, want));
            }
        }
    }
    Ok(out)
}

fn node_id(k: usize, v: &OccVector) -> String {
    let parts: Vec<String> = v.entries().iter().map(|e| e.to_string()).collect();
    format!("k{k}_{}", parts.join("_"))
}

impl Diagram {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "schema": 1,
            "n": self.n,
            "k_max": self.k_max,
            "nodes": self.nodes,
            "edges": self.edges,
            "unital": self.unital,
        })
    }

    pub fn to_dot(&self) -> String {
        let mut s = String::from("digraph bratteli {\n  rankdir=TB;\n");
        for k in 1..=self.k_max + 1 {
            let _ = writeln!(s, "  subgraph level{k} {{\n    rank=same;");
            for node in self.nodes.iter().filter(|x| x.k == k) {
                let _ = writeln!(
                    s,
                    "    {} [label=\"{}\\n{}\"];",
                    node_id(k, &node.v),
                    node.v,
                    node.dim
                );
            }
            s.push_str("  }\n");
        }
        for e in &self.edges {
            let _ = writeln!(
                s,
                "  {} -> {} [label=\"{}\"];",
                node_id(e.k, &e.v),
                node_id(e.k + 1, &e.u),
                e.m
            );
        }
        s.push_str("}\n");
        s
    }
}

/// Parses the edge lines of [`Diagram::to_dot`] back into `(k, v, u, m)` tuples.
pub fn edges_from_dot(dot: &str) -> Vec<BratteliEdge> {
    let parse_id = |id: &str| -> Option<(usize, OccVector)> {
        let mut parts = id.trim_start_matches('k').split('_');
        let k = parts.next()?.parse().ok()?;
        let v = parts.map(|p| p.parse().ok()).collect::<Option<Vec<usize>>>()?;
        Some((k, OccVector::new(v)))
    };
    dot.lines()
        .filter_map(|line| {
            let (lhs, rest) = line.trim().split_once(" -> ")?;
            let (rhs, label) = rest.split_once(" [label=\"")?;
            let m = label.trim_end_matches("\"];").parse().ok()?;
            let (k, v) = parse_id(lhs)?;
            let (_, u) = parse_id(rhs)?;
            Some(BratteliEdge { k, v, u, m })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn occ(e: &[usize]) -> OccVector {
        OccVector::new(e.to_vec())
    }

    #[test]
    fn closed_form_examples() {
        assert_eq!(multiplicity_closed(&occ(&[1, 0]), &occ(&[1, 0]), 1), 1);
        assert_eq!(multiplicity_closed(&occ(&[1, 1]), &occ(&[2, 2]), 1), 2);
        assert_eq!(multiplicity_closed(&occ(&[1, 0]), &occ(&[1, 1]), 1), 0);
        assert_eq!(multiplicity_closed(&occ(&[1, 0]), &occ(&[2, 0]), 1), 1);
        assert_eq!(multiplicity_closed(&occ(&[1, 0]), &occ(&[0, 0]), 1), 0);
        assert_eq!(multiplicity_closed(&occ(&[1, 1, 1]), &occ(&[2, 2, 2]), 1), 6);
    }

    #[test]
    fn numeric_matches_closed_n2() {
        for k in 1..=2 {
            let q = QMatrix::random_isom(2, 0.9, 100 + k as u64).unwrap();
            assert!(disagreements(&q, k).unwrap().is_empty());
        }
    }

    #[test]
    fn numeric_single_pair() {
        let q = QMatrix::random_isom(2, 0.7, 1).unwrap();
        let t = TruncatedFock::boxed(&q, &occ(&[2, 2])).unwrap();
        assert_eq!(multiplicity_numeric(&occ(&[1, 1]), &occ(&[2, 2]), 1, &t).unwrap(), 2);
        assert_eq!(multiplicity_numeric(&occ(&[1, 0]), &occ(&[1, 1]), 1, &t).unwrap(), 0);
    }

    #[test]
    fn one_generator_is_a_half_line() {
        let d = diagram_closed(1, 1);
        assert_eq!(d.nodes.len(), 2 + 3);
        let d = diagram_closed(1, 2);
        for e in &d.edges {
            assert_eq!(e.m, 1);
            let (v, u) = (e.v.entries()[0], e.u.entries()[0]);
            assert!(u == v || (v == e.k && u == e.k + 1));
        }
        let numeric = diagram_numeric(&QMatrix::zero(1), 2).unwrap();
        assert_eq!(numeric, d);
    }

    #[test]
    fn two_generator_level_one() {
        let d = diagram_closed(2, 1);
        assert_eq!(d.nodes.iter().filter(|x| x.k == 1).count(), 4);
        assert_eq!(d.nodes.iter().filter(|x| x.k == 2).count(), 9);
        let e = |v: &[usize], u: &[usize]| d.edges.iter().find(|e| e.v == occ(v) && e.u == occ(u)).map(|e| e.m);
        assert_eq!(e(&[0, 0], &[0, 0]), Some(1));
        assert_eq!(e(&[1, 1], &[2, 2]), Some(2));
        assert_eq!(e(&[1, 0], &[2, 0]), Some(1));
        assert_eq!(e(&[1, 0], &[1, 1]), None);
    }

    #[test]
    fn q_independence() {
        let reference = diagram_closed(2, 1);
        for seed in 0..5 {
            let q = QMatrix::random_isom(2, 0.9, seed).unwrap();
            assert_eq!(diagram_numeric(&q, 1).unwrap(), reference);
        }
    }

    #[test]
    fn dimension_bookkeeping() {
        let d = diagram_closed(2, 2);
        for r in &d.unital {
            assert!(r.covered <= r.dim, "{r:?}");
        }
        // the top corner block (k+1)^n is never reached from a smaller corner
        assert!(d.unital.iter().any(|r| !r.unital));
    }

    #[test]
    fn json_and_dot_agree() {
        let d = diagram_closed(2, 2);
        let from_dot = edges_from_dot(&d.to_dot());
        assert_eq!(from_dot, d.edges);
        let json = d.to_json();
        assert_eq!(json["schema"], 1);
        let from_json: Vec<BratteliEdge> = json["edges"]
            .as_array()
            .unwrap()
            .iter()
            .map(|e| BratteliEdge {
                k: e["k"].as_u64().unwrap() as usize,
                v: serde_json::from_value(e["v"].clone()).unwrap(),
                u: serde_json::from_value(e["u"].clone()).unwrap(),
                m: e["m"].as_u64().unwrap(),
            })
            .collect();
        assert_eq!(from_json, d.edges);
    }
}
