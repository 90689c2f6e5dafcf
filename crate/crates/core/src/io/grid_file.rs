use std::fmt::Write;

use super::{expect_fields, parse_num, LoadError, Reader};
use crate::grid::{Bus, CostSegment, Generator, GridCase, Line};

const KIND: &str = "fleetgrid-grid";
const VERSION: u32 = 1;

#[derive(Clone, Copy, PartialEq)]
enum Section {
    Header,
    Bus,
    Line,
    Gen,
}

/// Parses a grid case file:
///
/// ```text
/// fleetgrid-grid 1
/// name two-bus
/// base_mva 100
/// ref_bus 1
/// [bus]          # id load_mw
/// 1 0
/// 2 50
/// [line]         # from to susceptance_pu flow_min_mw flow_max_mw
/// 1 2 0.1 -100 100
/// [gen]          # bus p_min_mw p_max_mw cost...
/// 1 0 100 10
/// ```
///
/// A generator cost is either one price or a list of `price@up_to_mw`
/// segments. Flow limits accept `inf` and `-inf`. The case is validated
/// before it is returned.
pub fn parse_grid(text: &str, source_name: &str) -> Result<GridCase, LoadError> {
    let mut r = Reader::new(text, source_name, KIND, VERSION)?;
    let mut section = Section::Header;
    let (mut name, mut base_mva, mut ref_bus) = (None, None, None);
    let mut buses = Vec::new();
    let mut lines = Vec::new();
    let mut generators = Vec::new();

    while let Some(rec) = r.next() {
        let (line, f) = (rec.line, &rec.fields);
        if let [head] = f.as_slice() {
            if let Some(tag) = head.strip_prefix('[').and_then(|h| h.strip_suffix(']')) {
                section = match tag {
                    "bus" => Section::Bus,
                    "line" => Section::Line,
                    "gen" => Section::Gen,
                    other => return Err(r.error(line, format!("unknown section [{other}]"))),
                };
                continue;
            }
        }
        match section {
            Section::Header => {
                expect_fields(&r, &rec, 2..=2, "key value")?;
                let slot = match f[0] {
                    "name" => {
                        name = Some(f[1].to_string());
                        continue;
                    }
                    "base_mva" => &mut base_mva,
                    "ref_bus" => {
                        ref_bus = Some(parse_num::<usize>(&r, line, f[1], "reference bus")?);
                        continue;
                    }
                    other => return Err(r.error(line, format!("unknown key `{other}`"))),
                };
                *slot = Some(parse_num::<f64>(&r, line, f[1], "base MVA")?);
            }
            Section::Bus => {
                expect_fields(&r, &rec, 2..=2, "id load_mw")?;
                buses.push(Bus {
                    id: parse_num(&r, line, f[0], "bus id")?,
                    load: parse_num(&r, line, f[1], "load")?,
                });
            }
            Section::Line => {
                expect_fields(&r, &rec, 5..=5, "from to susceptance_pu flow_min_mw flow_max_mw")?;
                lines.push(Line {
                    from: parse_num(&r, line, f[0], "from bus")?,
                    to: parse_num(&r, line, f[1], "to bus")?,
                    susceptance: parse_num(&r, line, f[2], "susceptance")?,
                    flow_min: parse_num(&r, line, f[3], "flow minimum")?,
                    flow_max: parse_num(&r, line, f[4], "flow maximum")?,
                });
            }
            Section::Gen => {
                if f.len() < 4 {
                    return Err(r.error(line, "expected `bus p_min_mw p_max_mw cost...`"));
                }
                let p_max: f64 = parse_num(&r, line, f[2], "p_max")?;
                let cost = if f.len() == 4 && !f[3].contains('@') {
                    vec![CostSegment {
                        up_to: p_max,
                        price: parse_num(&r, line, f[3], "price")?,
                    }]
                } else {
                    f[3..]
                        .iter()
                        .map(|seg| {
                            let (price, up_to) = seg
                                .split_once('@')
                                .ok_or_else(|| r.error(line, format!("cost segment `{seg}` is not `price@up_to`")))?;
                            Ok(CostSegment {
                                up_to: parse_num(&r, line, up_to, "segment breakpoint")?,
                                price: parse_num(&r, line, price, "segment price")?,
                            })
                        })
                        .collect::<Result<_, LoadError>>()?
                };
                generators.push(Generator {
                    bus: parse_num(&r, line, f[0], "generator bus")?,
                    p_min: parse_num(&r, line, f[1], "p_min")?,
                    p_max,
                    cost,
                });
            }
        }
    }

    let missing = |key: &str| r.error(1, format!("missing `{key}`"));
    let case = GridCase {
        name: name.ok_or_else(|| missing("name"))?,
        base_mva: base_mva.ok_or_else(|| missing("base_mva"))?,
        ref_bus: ref_bus.ok_or_else(|| missing("ref_bus"))?,
        buses,
        lines,
        generators,
    };
    case.validate().map_err(|source| LoadError::Grid {
        source_name: r.source_name().to_string(),
        source,
    })?;
    Ok(case)
}

/// Writes `case` in the format read by [`parse_grid`]. Numbers use the
/// shortest representation that parses back to the same value.
pub fn write_grid(case: &GridCase) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{KIND} {VERSION}");
    let _ = writeln!(out, "name {}", case.name);
    let _ = writeln!(out, "base_mva {}", case.base_mva);
    let _ = writeln!(out, "ref_bus {}", case.ref_bus);
    out.push_str("\n[bus]\n# id load_mw\n");
    for b in &case.buses {
        let _ = writeln!(out, "{} {}", b.id, b.load);
    }
    out.push_str("\n[line]\n# from to susceptance_pu flow_min_mw flow_max_mw\n");
    for l in &case.lines {
        let _ = writeln!(out, "{} {} {} {} {}", l.from, l.to, l.susceptance, l.flow_min, l.flow_max);
    }
    out.push_str("\n[gen]\n# bus p_min_mw p_max_mw price | price@up_to_mw...\n");
    for g in &case.generators {
        let _ = write!(out, "{} {} {}", g.bus, g.p_min, g.p_max);
        if g.is_linear() && g.cost[0].up_to == g.p_max {
            let _ = write!(out, " {}", g.cost[0].price);
        } else {
            for s in &g.cost {
                let _ = write!(out, " {}@{}", s.price, s.up_to);
            }
        }
        out.push('\n');
    }
    out
}
