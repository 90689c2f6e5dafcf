//! Prints a seeded synthetic transport network in the transport file
//! format. The bundled scenarios were produced with
//!
//! ```text
//! cargo run -p fleetgrid --example synthetic_network -- 14 10 20140 > crates/core/data/ieee14.net
//! cargo run -p fleetgrid --example synthetic_network -- 30 24 20300 > crates/core/data/ieee30.net
//! ```
//!
//! Roads are two-way with integer weights drawn uniformly from 1 to 12.

use fleetgrid::io::write_transport;
use fleetgrid::transport::random_network;

fn main() {
    let args: Vec<u64> = std::env::args()
        .skip(1)
        .map(|a| a.parse().expect("arguments are: nodes extra_roads seed"))
        .collect();
    let [nodes, extra, seed] = args[..] else {
        eprintln!("usage: synthetic_network NODES EXTRA_ROADS SEED");
        std::process::exit(1);
    };
    let net = random_network(nodes as usize, extra as usize, true, 1..=12, seed);
    print!("# synthetic road network: {nodes} nodes, {extra} extra roads, seed {seed}\n{}", write_transport(&net));
}
