use std::path::{Path, PathBuf};

use super::{expect_fields, parse_fleets, parse_grid, parse_matpower, parse_num, parse_transport, LoadError, Reader};
use crate::dispatch::{Closure, DispatchOptions, FleetSpec, Reach};
use crate::grid::GridCase;
use crate::transport::TransportNetwork;

const KIND: &str = "fleetgrid-scenario";
const VERSION: u32 = 1;

/// A complete, cross-checked problem instance.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub grid: GridCase,
    pub transport: TransportNetwork,
    pub fleets: Vec<FleetSpec>,
    /// Closures applied on top of edges already marked `restricted`.
    pub closures: Vec<Closure>,
    pub options: DispatchOptions,
}

impl Scenario {
    /// Checks that the grid and the transport network share one node set
    /// and that every fleet and closure refers to nodes in it.
    pub fn validate(&self) -> Result<(), LoadError> {
        let buses = self.grid.bus_count();
        let nodes = self.transport.node_count();
        if buses != nodes {
            return Err(LoadError::CrossReference(format!(
                "scenario `{}`: grid `{}` has {buses} buses but the transport network has {nodes} nodes; both layers must share nodes 1..=N",
                self.name, self.grid.name
            )));
        }
        let check = |what: String, node: usize| {
            if node == 0 || node > buses {
                Err(LoadError::CrossReference(format!(
                    "scenario `{}`: {what} refers to node {node}, but the case has nodes 1..={buses}",
                    self.name
                )))
            } else {
                Ok(())
            }
        };
        for f in &self.fleets {
            check(format!("fleet `{}` origin", f.id), f.origin)?;
            if let Reach::Exclude(set) = &f.reach {
                for &n in set {
                    check(format!("fleet `{}` exclusion list", f.id), n)?;
                }
            }
        }
        for c in &self.closures {
            match *c {
                Closure::Node(n) => check("node closure".into(), n)?,
                Closure::Edge { from, to } => {
                    if self.transport.edge_id(from, to).is_none() {
                        return Err(LoadError::CrossReference(format!(
                            "scenario `{}`: closure names edge {from}->{to}, which is not in the transport network",
                            self.name
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    /// Copy of the transport network with the scenario closures applied.
    pub fn closed_network(&self) -> TransportNetwork {
        let mut net = self.transport.clone();
        for c in &self.closures {
            match *c {
                Closure::Edge { from, to } => {
                    let _ = net.restrict(from, to);
                }
                Closure::Node(n) => net.isolate(n),
            }
        }
        net
    }
}

/// The parsed contents of a scenario manifest, before the referenced
/// files are read.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Manifest {
    pub name: String,
    pub grid: String,
    pub transport: String,
    pub fleets: Option<String>,
    pub closures: Vec<Closure>,
    pub travel_cost_scale: Option<f64>,
    pub enumeration_cap: Option<u64>,
}

/// Parses a scenario manifest:
///
/// ```text
/// fleetgrid-scenario 1
/// name ieee14-demo
/// grid ieee14.grid          # or a MATPOWER .m file
/// transport ieee14.net
/// fleets ieee14.fleet       # optional
/// travel_cost_scale 10      # optional
/// enumeration_cap 100000    # optional
/// close 3 4                 # optional, repeatable: close edge 3->4
/// close_node 9              # optional, repeatable
/// ```
pub fn parse_manifest(text: &str, source_name: &str) -> Result<Manifest, LoadError> {
    let mut r = Reader::new(text, source_name, KIND, VERSION)?;
    let mut m = Manifest::default();
    let (mut has_grid, mut has_transport) = (false, false);
    while let Some(rec) = r.next() {
        let (line, f) = (rec.line, &rec.fields);
        match f[0] {
            "close" => {
                expect_fields(&r, &rec, 3..=3, "close from to")?;
                m.closures.push(Closure::Edge {
                    from: parse_num(&r, line, f[1], "from node")?,
                    to: parse_num(&r, line, f[2], "to node")?,
                });
                continue;
            }
            "close_node" => {
                expect_fields(&r, &rec, 2..=2, "close_node node")?;
                m.closures.push(Closure::Node(parse_num(&r, line, f[1], "node")?));
                continue;
            }
            _ => {}
        }
        expect_fields(&r, &rec, 2..=2, "key value")?;
        let v = f[1];
        match f[0] {
            "name" => m.name = v.to_string(),
            "grid" => {
                m.grid = v.to_string();
                has_grid = true;
            }
            "transport" => {
                m.transport = v.to_string();
                has_transport = true;
            }
            "fleets" => m.fleets = Some(v.to_string()),
            "travel_cost_scale" => m.travel_cost_scale = Some(parse_num(&r, line, v, "travel cost scale")?),
            "enumeration_cap" => m.enumeration_cap = Some(parse_num(&r, line, v, "enumeration cap")?),
            other => return Err(r.error(line, format!("unknown key `{other}`"))),
        }
    }
    if !has_grid || !has_transport {
        return Err(r.error(1, "manifest needs both `grid` and `transport`"));
    }
    if m.name.is_empty() {
        m.name = source_name.to_string();
    }
    Ok(m)
}

fn assemble(manifest: Manifest, read: impl Fn(&str) -> Result<String, LoadError>) -> Result<Scenario, LoadError> {
    let grid_text = read(&manifest.grid)?;
    let grid = if manifest.grid.ends_with(".m") {
        parse_matpower(&grid_text, &manifest.grid)?
    } else {
        parse_grid(&grid_text, &manifest.grid)?
    };
    let transport = parse_transport(&read(&manifest.transport)?, &manifest.transport)?;
    let fleets = match &manifest.fleets {
        Some(path) => parse_fleets(&read(path)?, path)?,
        None => Vec::new(),
    };
    let mut options = DispatchOptions::default();
    if let Some(s) = manifest.travel_cost_scale {
        options.travel_cost_scale = s;
    }
    if let Some(c) = manifest.enumeration_cap {
        options.enumeration_cap = c;
    }
    let scenario = Scenario {
        name: manifest.name,
        grid,
        transport,
        fleets,
        closures: manifest.closures,
        options,
    };
    scenario.validate()?;
    Ok(scenario)
}

/// Loads a manifest and the files it names, resolved relative to the
/// manifest's directory.
pub fn load_scenario_file(path: &Path) -> Result<Scenario, LoadError> {
    let read_path = |p: &Path| {
        std::fs::read_to_string(p).map_err(|source| LoadError::Read {
            path: p.to_path_buf(),
            source,
        })
    };
    let text = read_path(path)?;
    let manifest = parse_manifest(&text, &path.display().to_string())?;
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    assemble(manifest, |rel| read_path(&base.join(rel)))
}

struct Bundled {
    name: &'static str,
    manifest: &'static str,
    files: &'static [(&'static str, &'static str)],
}

const BUNDLED: &[Bundled] = &[
    Bundled {
        name: "ieee14-demo",
        manifest: include_str!("../../data/ieee14-demo.scenario"),
        files: &[
            ("ieee14.grid", include_str!("../../data/ieee14.grid")),
            ("ieee14.net", include_str!("../../data/ieee14.net")),
            ("ieee14.fleet", include_str!("../../data/ieee14.fleet")),
        ],
    },
    Bundled {
        name: "ieee30-demo",
        manifest: include_str!("../../data/ieee30-demo.scenario"),
        files: &[
            ("ieee30.grid", include_str!("../../data/ieee30.grid")),
            ("ieee30.net", include_str!("../../data/ieee30.net")),
            ("ieee30.fleet", include_str!("../../data/ieee30.fleet")),
        ],
    },
];

pub fn bundled_names() -> Vec<&'static str> {
    BUNDLED.iter().map(|b| b.name).collect()
}

pub fn load_bundled(name: &str) -> Result<Scenario, LoadError> {
    let b = BUNDLED
        .iter()
        .find(|b| b.name == name)
        .ok_or_else(|| LoadError::UnknownScenario { name: name.to_string() })?;
    let manifest = parse_manifest(b.manifest, b.name)?;
    assemble(manifest, |file| {
        b.files
            .iter()
            .find(|(f, _)| *f == file)
            .map(|(_, text)| text.to_string())
            .ok_or_else(|| LoadError::Read {
                path: PathBuf::from(file),
                source: std::io::Error::new(std::io::ErrorKind::NotFound, "not bundled"),
            })
    })
}

/// Loads a bundled scenario by name, or a manifest file by path.
pub fn load_scenario(name_or_path: &str) -> Result<Scenario, LoadError> {
    if bundled_names().contains(&name_or_path) {
        load_bundled(name_or_path)
    } else {
        load_scenario_file(Path::new(name_or_path))
    }
}
