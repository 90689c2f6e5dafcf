//! Reader for MATPOWER version 2 case files (`.m`).
//!
//! Only the fields the DC model needs are used. Buses are renumbered
//! `1..=N` in file order; isolated buses (type 4) and out-of-service
//! branches and generators are dropped. Branch susceptance is
//! `1 / (x · tap)` with a zero tap read as 1. A zero `rateA` means no flow
//! limit. Polynomial costs keep only their linear coefficient; piecewise
//! costs become one segment per breakpoint interval.

use std::collections::BTreeMap;

use super::LoadError;
use crate::grid::{Bus, CostSegment, Generator, GridCase, Line};

struct Matrix {
    line: usize,
    rows: Vec<(usize, Vec<f64>)>,
}

fn parse_error(source_name: &str, line: usize, message: impl Into<String>) -> LoadError {
    LoadError::Parse {
        source_name: source_name.to_string(),
        line,
        message: message.into(),
    }
}

/// Appends the rows found in `body` to `m`; returns true once the closing
/// `]` has been seen.
fn feed(m: &mut Matrix, name: &str, body: &str, line_no: usize, source_name: &str) -> Result<bool, LoadError> {
    let (inner, closed) = match body.find(']') {
        Some(pos) => (&body[..pos], true),
        None => (body, false),
    };
    for row in inner.split(';') {
        let vals = row
            .split(|c: char| c.is_whitespace() || c == ',')
            .filter(|t| !t.is_empty())
            .map(str::parse)
            .collect::<Result<Vec<f64>, _>>()
            .map_err(|_| parse_error(source_name, line_no, format!("non-numeric entry in mpc.{name}")))?;
        if !vals.is_empty() {
            m.rows.push((line_no, vals));
        }
    }
    Ok(closed)
}

type Scalars = BTreeMap<String, (usize, String)>;

/// Splits the file into scalar assignments and numeric matrices keyed by
/// the field after `mpc.`.
fn scan(text: &str, source_name: &str) -> Result<(Scalars, BTreeMap<String, Matrix>), LoadError> {
    let mut scalars = BTreeMap::new();
    let mut matrices = BTreeMap::new();
    let mut open: Option<(String, Matrix)> = None;
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.split('%').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (name, mut m, body) = match open.take() {
            Some((name, m)) => (name, m, line),
            None => {
                let Some((name, value)) = line.strip_prefix("mpc.").and_then(|rest| rest.split_once('=')) else {
                    continue;
                };
                let (name, value) = (name.trim().to_string(), value.trim());
                match value.strip_prefix('[') {
                    Some(body) => (name, Matrix { line: line_no, rows: Vec::new() }, body),
                    None => {
                        let value = value.trim_end_matches(';').trim().trim_matches('\'');
                        scalars.insert(name, (line_no, value.to_string()));
                        continue;
                    }
                }
            }
        };
        if feed(&mut m, &name, body, line_no, source_name)? {
            matrices.insert(name, m);
        } else {
            open = Some((name, m));
        }
    }
    if let Some((name, m)) = open {
        return Err(parse_error(source_name, m.line, format!("mpc.{name} is never closed with `]`")));
    }
    Ok((scalars, matrices))
}

pub fn parse_matpower(text: &str, source_name: &str) -> Result<GridCase, LoadError> {
    let (scalars, matrices) = scan(text, source_name)?;
    let need = |name: &str| {
        matrices
            .get(name)
            .ok_or_else(|| parse_error(source_name, 1, format!("missing mpc.{name}")))
    };
    let base_mva: f64 = match scalars.get("baseMVA") {
        Some((line, v)) => v.parse().map_err(|_| parse_error(source_name, *line, "baseMVA is not a number"))?,
        None => return Err(parse_error(source_name, 1, "missing mpc.baseMVA")),
    };
    let col = |row: &(usize, Vec<f64>), k: usize, what: &str| {
        row.1
            .get(k)
            .copied()
            .ok_or_else(|| parse_error(source_name, row.0, format!("{what} row has no column {}", k + 1)))
    };

    let mut index = BTreeMap::new();
    let mut buses = Vec::new();
    let mut ref_bus = None;
    for row in &need("bus")?.rows {
        let kind = col(row, 1, "bus")? as i64;
        if kind == 4 {
            continue;
        }
        let ext = col(row, 0, "bus")? as i64;
        let id = buses.len() + 1;
        if index.insert(ext, id).is_some() {
            return Err(parse_error(source_name, row.0, format!("duplicate bus number {ext}")));
        }
        if kind == 3 && ref_bus.is_none() {
            ref_bus = Some(id);
        }
        buses.push(Bus {
            id,
            load: col(row, 2, "bus")?,
        });
    }

    let mut lines = Vec::new();
    for row in &need("branch")?.rows {
        if row.1.len() > 10 && col(row, 10, "branch")? == 0.0 {
            continue;
        }
        let (Some(&from), Some(&to)) = (index.get(&(col(row, 0, "branch")? as i64)), index.get(&(col(row, 1, "branch")? as i64))) else {
            continue;
        };
        let x = col(row, 3, "branch")?;
        let tap = match row.1.get(8).copied().unwrap_or(0.0) {
            0.0 => 1.0,
            t => t,
        };
        let rate = row.1.get(5).copied().unwrap_or(0.0);
        let limit = if rate > 0.0 { rate } else { f64::INFINITY };
        lines.push(Line {
            from,
            to,
            susceptance: 1.0 / (x * tap),
            flow_min: -limit,
            flow_max: limit,
        });
    }

    let costs = matrices.get("gencost");
    let mut generators = Vec::new();
    for (k, row) in need("gen")?.rows.iter().enumerate() {
        if row.1.len() > 7 && col(row, 7, "gen")? <= 0.0 {
            continue;
        }
        let Some(&bus) = index.get(&(col(row, 0, "gen")? as i64)) else {
            continue;
        };
        let (p_max, p_min) = (col(row, 8, "gen")?, col(row, 9, "gen")?.max(0.0));
        let cost = match costs.and_then(|c| c.rows.get(k)) {
            None => vec![CostSegment { up_to: p_max, price: 0.0 }],
            Some(c) => gen_cost(source_name, c, p_max)?,
        };
        generators.push(Generator { bus, p_min, p_max, cost });
    }

    let name = std::path::Path::new(source_name)
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or(source_name)
        .to_string();
    let case = GridCase {
        name,
        base_mva,
        ref_bus: ref_bus.unwrap_or(1),
        buses,
        lines,
        generators,
    };
    case.validate().map_err(|source| LoadError::Grid {
        source_name: source_name.to_string(),
        source,
    })?;
    Ok(case)
}

fn gen_cost(source_name: &str, row: &(usize, Vec<f64>), p_max: f64) -> Result<Vec<CostSegment>, LoadError> {
    let v = &row.1;
    let bad = |m: &str| parse_error(source_name, row.0, m.to_string());
    let (model, n) = match (v.first(), v.get(3)) {
        (Some(&m), Some(&n)) => (m as i64, n as usize),
        _ => return Err(bad("gencost row is too short")),
    };
    let data = v.get(4..4 + if model == 1 { 2 * n } else { n }).ok_or_else(|| bad("gencost row is too short"))?;
    match model {
        2 => {
            // Coefficients run from the highest power down; keep the linear one.
            let price = if n >= 2 { data[n - 2] } else { 0.0 };
            Ok(vec![CostSegment { up_to: p_max, price }])
        }
        1 => {
            let points: Vec<(f64, f64)> = data.chunks(2).map(|c| (c[0], c[1])).collect();
            let mut segs: Vec<CostSegment> = points
                .windows(2)
                .map(|w| CostSegment {
                    up_to: w[1].0,
                    price: (w[1].1 - w[0].1) / (w[1].0 - w[0].0),
                })
                .collect();
            if segs.is_empty() {
                return Err(bad("piecewise gencost needs at least two points"));
            }
            let last = segs.len() - 1;
            segs[last].up_to = segs[last].up_to.max(p_max);
            Ok(segs)
        }
        _ => Err(bad("gencost model must be 1 (piecewise) or 2 (polynomial)")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const CASE3: &str = "\
function mpc = case3
mpc.version = '2';
mpc.baseMVA = 100;
%% bus data
mpc.bus = [
	10	3	0	0	0	0	1	1	0	135	1	1.05	0.95;
	20	1	60	0	0	0	1	1	0	135	1	1.05	0.95;
	30	1	40	0	0	0	1	1	0	135	1	1.05	0.95;
	40	4	0	0	0	0	1	1	0	135	1	1.05	0.95;
];
mpc.gen = [
	10	0	0	300	-300	1	100	1	250	10	0	0	0	0	0	0	0	0	0	0	0;
	30	0	0	300	-300	1	100	0	50	0	0	0	0	0	0	0	0	0	0	0	0;
];
mpc.branch = [
	10	20	0.01	0.1	0	80	0	0	0	0	1	-360	360;
	20	30	0.01	0.2	0	0	0	0	0.5	0	1	-360	360;
	10	30	0.01	0.1	0	50	0	0	0	0	0	-360	360;
];
mpc.gencost = [
	2	0	0	3	0.11	5	0;
	1	0	0	3	0	0	50	500	100	1500;
];
";

    #[test]
    fn imports_small_case() {
        let case = parse_matpower(CASE3, "dir/case3.m").unwrap();
        assert_eq!(case.name, "case3");
        assert_eq!(case.bus_count(), 3);
        assert_eq!(case.ref_bus, 1);
        assert_eq!(case.buses[1].load, 60.0);
        // Third branch is out of service.
        assert_eq!(case.lines.len(), 2);
        assert_eq!(case.lines[0].susceptance, 10.0);
        assert_eq!(case.lines[0].flow_max, 80.0);
        assert_eq!(case.lines[1].susceptance, 1.0 / (0.2 * 0.5));
        assert_eq!(case.lines[1].flow_max, f64::INFINITY);
        // Second generator is out of service.
        assert_eq!(case.generators.len(), 1);
        assert_eq!(case.generators[0].cost[0].price, 5.0);
        assert_eq!(case.generators[0].p_min, 10.0);
    }

    #[test]
    fn piecewise_cost_slopes() {
        let segs = gen_cost("x", &(1, vec![1.0, 0.0, 0.0, 3.0, 0.0, 0.0, 50.0, 500.0, 100.0, 1500.0]), 100.0).unwrap();
        assert_eq!(segs, vec![CostSegment { up_to: 50.0, price: 10.0 }, CostSegment { up_to: 100.0, price: 20.0 }]);
    }

    #[test]
    fn unclosed_matrix_reports_line() {
        let text = "mpc.baseMVA = 100;\nmpc.bus = [\n1 3 0;\n";
        let err = parse_matpower(text, "u.m").unwrap_err().to_string();
        assert!(err.starts_with("u.m:2:"), "{err}");
    }
}
