use std::collections::BTreeSet;
use std::fmt::Write;

use super::{expect_fields, parse_num, LoadError, Reader};
use crate::dispatch::{FleetSpec, Reach};

const KIND: &str = "fleetgrid-fleet";
const VERSION: u32 = 1;

/// Parses a fleet file: one fleet per line as
/// `id origin p_min_mw p_max_mw energy_cost [exclude=3,4 | radius=10]`.
/// Ids must be unique. Node references are checked against the grid when
/// the scenario is assembled, not here.
pub fn parse_fleets(text: &str, source_name: &str) -> Result<Vec<FleetSpec>, LoadError> {
    let mut r = Reader::new(text, source_name, KIND, VERSION)?;
    let mut specs: Vec<FleetSpec> = Vec::new();
    while let Some(rec) = r.next() {
        let (line, f) = (rec.line, &rec.fields);
        expect_fields(&r, &rec, 5..=6, "id origin p_min p_max energy_cost [exclude=..|radius=..]")?;
        let reach = match f.get(5) {
            None => Reach::All,
            Some(opt) => match opt.split_once('=') {
                Some(("exclude", list)) => Reach::Exclude(
                    list.split(',')
                        .map(|n| parse_num(&r, line, n, "excluded node"))
                        .collect::<Result<BTreeSet<usize>, _>>()?,
                ),
                Some(("radius", v)) => Reach::Radius(parse_num(&r, line, v, "radius")?),
                _ => return Err(r.error(line, format!("unknown fleet option `{opt}`"))),
            },
        };
        let spec = FleetSpec {
            id: f[0].to_string(),
            origin: parse_num(&r, line, f[1], "origin")?,
            p_min: parse_num(&r, line, f[2], "p_min")?,
            p_max: parse_num(&r, line, f[3], "p_max")?,
            energy_cost: parse_num(&r, line, f[4], "energy cost")?,
            reach,
        };
        if specs.iter().any(|s| s.id == spec.id) {
            return Err(r.error(line, format!("duplicate fleet id `{}`", spec.id)));
        }
        specs.push(spec);
    }
    Ok(specs)
}

pub fn write_fleets(specs: &[FleetSpec]) -> String {
    let mut out = format!("{KIND} {VERSION}\n# id origin p_min_mw p_max_mw energy_cost [exclude=..|radius=..]\n");
    for s in specs {
        let _ = write!(out, "{} {} {} {} {}", s.id, s.origin, s.p_min, s.p_max, s.energy_cost);
        match &s.reach {
            Reach::All => {}
            Reach::Exclude(set) if set.is_empty() => {}
            Reach::Exclude(set) => {
                let list: Vec<String> = set.iter().map(usize::to_string).collect();
                let _ = write!(out, " exclude={}", list.join(","));
            }
            Reach::Radius(v) => {
                let _ = write!(out, " radius={v}");
            }
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn options_parse_and_round_trip() {
        let text = "fleetgrid-fleet 1\na 2 0 20 15\nb 7 0 20 15 exclude=1,3\nc 12 5 40 18 radius=9.5\n";
        let specs = parse_fleets(text, "f").unwrap();
        assert_eq!(specs[1].reach, Reach::Exclude(BTreeSet::from([1, 3])));
        assert_eq!(specs[2].reach, Reach::Radius(9.5));
        assert_eq!(parse_fleets(&write_fleets(&specs), "again").unwrap(), specs);
    }

    #[test]
    fn duplicate_id_rejected() {
        let text = "fleetgrid-fleet 1\na 2 0 20 15\na 3 0 20 15\n";
        assert!(parse_fleets(text, "f").unwrap_err().to_string().starts_with("f:3:"));
    }
}
