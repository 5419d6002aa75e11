//! Text formats: point CSV, OR-library `estein` files, tree JSON, plot CSV.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{argument, Error, Result};
use crate::model::{CostParams, FullTopology, Mode, PointSet, Topology, Tree};
use crate::scalar::Scalar;

fn parse_error(line: usize, message: impl Into<String>) -> Error {
    Error::Parse { line, message: message.into() }
}

/// One point per line, coordinates separated by commas and/or whitespace.
/// Blank lines and lines starting with `#` are skipped.
pub fn parse_points_csv<T: Scalar>(text: &str) -> Result<PointSet<T>> {
    let mut dim = None;
    let mut coords = Vec::new();
    let mut rows = 0;
    let mut last = 0;
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        last = i + 1;
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let before = coords.len();
        for tok in line.split(|c: char| c == ',' || c.is_whitespace()).filter(|t| !t.is_empty()) {
            let x: f64 = tok.parse().map_err(|_| parse_error(i + 1, format!("not a number: '{tok}'")))?;
            if !x.is_finite() {
                return Err(parse_error(i + 1, format!("non-finite coordinate '{tok}'")));
            }
            coords.push(T::lit(x));
        }
        let d = coords.len() - before;
        match dim {
            None if d == 0 => return Err(parse_error(i + 1, "empty row")),
            None => dim = Some(d),
            Some(e) if e != d => {
                return Err(parse_error(i + 1, format!("expected {e} coordinates, found {d}")));
            }
            Some(_) => {}
        }
        rows += 1;
    }
    if rows < 2 {
        return Err(parse_error(last.max(1), format!("need at least 2 points, found {rows}")));
    }
    PointSet::from_flat(rows, dim.expect("rows were read"), coords)
}

/// OR-library Euclidean Steiner format: instance count, then for each
/// instance its point count followed by that many `x y` pairs.
pub fn parse_orlib_estein<T: Scalar>(text: &str) -> Result<Vec<PointSet<T>>> {
    let mut toks = text
        .lines()
        .enumerate()
        .flat_map(|(i, l)| l.split_whitespace().map(move |t| (i + 1, t)));
    let mut last_line = 1;
    let mut next = |what: &str| -> Result<(usize, &str)> {
        match toks.next() {
            Some((line, t)) => {
                last_line = line;
                Ok((line, t))
            }
            None => Err(parse_error(last_line, format!("unexpected end of input, expected {what}"))),
        }
    };
    let count = |line: usize, t: &str| -> Result<usize> {
        t.parse().map_err(|_| parse_error(line, format!("expected a count, found '{t}'")))
    };
    let (line, t) = next("instance count")?;
    let instances = count(line, t)?;
    let mut out = Vec::with_capacity(instances);
    for k in 0..instances {
        let (line, t) = next("point count")?;
        let n = count(line, t)?;
        let mut coords = Vec::with_capacity(2 * n);
        for _ in 0..2 * n {
            let (line, t) = next("coordinate")?;
            let x: f64 = t.parse().map_err(|_| parse_error(line, format!("not a number: '{t}'")))?;
            if !x.is_finite() {
                return Err(parse_error(line, format!("non-finite coordinate '{t}'")));
            }
            if !(0.0..=1.0).contains(&x) {
                log::warn!("instance {}: coordinate {x} outside the unit square (line {line})", k + 1);
            }
            coords.push(T::lit(x));
        }
        out.push(PointSet::from_flat(n, 2, coords)?);
    }
    Ok(out)
}

/// Tree interchange record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeRecord {
    pub n_terminals: usize,
    pub alpha: f64,
    pub mode: Mode,
    pub cost: f64,
    pub edges: Vec<[usize; 2]>,
    pub steiner_coords: Vec<Vec<f64>>,
    pub edge_shares: Vec<f64>,
}

impl TreeRecord {
    pub fn new<T: Scalar>(points: &PointSet<T>, tree: &Tree<T>, params: &CostParams<T>) -> Result<Self> {
        let shares = tree.shares()?;
        let steiner_coords = match tree {
            Tree::Cst(_) => Vec::new(),
            Tree::Bcst(f) => (0..f.n_steiner()).map(|k| f.steiner_point(k).iter().map(|x| x.as_f64()).collect()).collect(),
        };
        Ok(Self {
            n_terminals: tree.n_terminals(),
            alpha: params.alpha.as_f64(),
            mode: tree.mode(),
            cost: tree.cost(points, params)?.as_f64(),
            edges: tree.edges().iter().map(|&(u, v)| [u, v]).collect(),
            steiner_coords,
            edge_shares: (0..shares.len()).map(|e| shares.share::<f64>(e)).collect(),
        })
    }

    /// Rebuilds the tree; `dim` is needed when there are no Steiner points.
    pub fn to_tree<T: Scalar>(&self, dim: usize) -> Result<Tree<T>> {
        let edges = self.edges.iter().map(|e| (e[0], e[1]));
        match self.mode {
            Mode::Cst => {
                if !self.steiner_coords.is_empty() {
                    return Err(argument("a CST record cannot carry Steiner points"));
                }
                Ok(Tree::Cst(Topology::new(self.n_terminals, edges)?))
            }
            Mode::Bcst => {
                if let Some(bad) = self.steiner_coords.iter().find(|c| c.len() != dim) {
                    return Err(argument(format!("Steiner point of dimension {} in a {dim}-d tree", bad.len())));
                }
                let coords: Vec<T> = self.steiner_coords.iter().flatten().map(|&x| T::lit(x)).collect();
                Ok(Tree::Bcst(FullTopology::new(self.n_terminals, dim, edges, coords)?))
            }
        }
    }

    /// Point dimension implied by the Steiner coordinates, if any.
    pub fn dim(&self) -> Option<usize> {
        self.steiner_coords.first().map(Vec::len)
    }

    /// Pretty JSON; floats use the shortest representation that parses
    /// back to the same bits.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("record serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| parse_error(e.line(), e.to_string()))
    }
}

/// One row per edge: `u,v,length,m_e,weight`, with `m_e` the share on the
/// side away from terminal 0 and `weight = (m_e (1 - m_e))^alpha`.
pub fn plot_data_csv<T: Scalar>(points: &PointSet<T>, tree: &Tree<T>, alpha: T) -> Result<String> {
    let shares = tree.shares()?;
    let mut out = String::from("u,v,length,m_e,weight\n");
    for (e, &(u, v)) in tree.edges().iter().enumerate() {
        let len = crate::scalar::distance(tree.node(points, u), tree.node(points, v));
        writeln!(
            out,
            "{u},{v},{},{},{}",
            len.as_f64(),
            shares.share::<f64>(e),
            shares.weight(e, alpha).as_f64()
        )
        .expect("writing to a String");
    }
    Ok(out)
}

/// `instance_id,cost` rows; a non-numeric first row is taken as a header.
pub fn parse_reference_costs(text: &str) -> Result<Vec<(String, f64)>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split(|c: char| c == ',' || c.is_whitespace()).filter(|t| !t.is_empty()).collect();
        if fields.len() != 2 {
            return Err(parse_error(i + 1, format!("expected 'instance_id,cost', found {} fields", fields.len())));
        }
        match fields[1].parse::<f64>() {
            Ok(c) => out.push((fields[0].to_string(), c)),
            Err(_) if out.is_empty() && i == first_data_line(text) => {}
            Err(_) => return Err(parse_error(i + 1, format!("not a number: '{}'", fields[1]))),
        }
    }
    Ok(out)
}

fn first_data_line(text: &str) -> usize {
    text.lines().position(|l| !l.trim().is_empty() && !l.trim().starts_with('#')).unwrap_or(0)
}

/// 1-based instance number named by a reference id: `3` or `e50.3` both
/// mean the third instance.
pub fn reference_instance(id: &str) -> Option<usize> {
    id.rsplit('.').next()?.parse().ok().filter(|&k| k >= 1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn points_csv_examples() {
        let p: PointSet<f64> = parse_points_csv("0,0\n1,0").unwrap();
        assert_eq!((p.len(), p.dim()), (2, 2));
        let p: PointSet<f64> = parse_points_csv("# c\n0 0 0\n1 1 1").unwrap();
        assert_eq!((p.len(), p.dim()), (2, 3));
        match parse_points_csv::<f64>("0,0\n1") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected parse error, got {other:?}"),
        }
        assert!(matches!(parse_points_csv::<f64>("0,x\n1,1"), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(parse_points_csv::<f64>("1,1\n"), Err(Error::Parse { .. })));
    }

    #[test]
    fn orlib_examples() {
        let v: Vec<PointSet<f64>> = parse_orlib_estein("1 2 0.0 0.0 1.0 1.0").unwrap();
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].len(), 2);
        let v: Vec<PointSet<f64>> = parse_orlib_estein("2 2 0 0 1 1 3 0 0 1 0 0 1").unwrap();
        assert_eq!(v.iter().map(|p| p.len()).collect::<Vec<_>>(), vec![2, 3]);
        assert_eq!(v[1].point(2), &[0.0, 1.0]);
        assert!(matches!(parse_orlib_estein::<f64>(""), Err(Error::Parse { .. })));
        assert!(matches!(parse_orlib_estein::<f64>("1 3 0 0 1"), Err(Error::Parse { .. })));
    }

    #[test]
    fn reference_ids() {
        assert_eq!(reference_instance("e50.3"), Some(3));
        assert_eq!(reference_instance("7"), Some(7));
        assert_eq!(reference_instance("x"), None);
        let r = parse_reference_costs("instance,cost\ne50.1,0.5\n2 0.25\n").unwrap();
        assert_eq!(r, vec![("e50.1".to_string(), 0.5), ("2".to_string(), 0.25)]);
        assert!(parse_reference_costs("a,b\nc,d").is_err());
    }
}
