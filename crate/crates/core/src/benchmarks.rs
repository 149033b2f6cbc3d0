//! Small combinational benchmarks bundled with the crate, each as a
//! two-input gate netlist (BLIF) and its truth table (PLA).

use crate::error::{Error, Result};
use crate::io::{parse_blif, parse_pla, BlifModel};
use crate::target::TargetSpec;

pub struct Benchmark {
    pub name: &'static str,
    pub blif: &'static str,
    pub pla: &'static str,
}

macro_rules! bench {
    ($name:literal) => {
        Benchmark {
            name: $name,
            blif: include_str!(concat!("../data/", $name, ".blif")),
            pla: include_str!(concat!("../data/", $name, ".pla")),
        }
    };
}

pub const ALL: &[Benchmark] = &[
    bench!("mult2"),
    bench!("b1"),
    bench!("c17"),
    bench!("cm82a"),
    bench!("cm42a"),
    bench!("cm138a"),
    bench!("decod"),
];

impl Benchmark {
    pub fn seed(&self) -> Result<BlifModel> {
        parse_blif(self.blif)
    }

    pub fn target(&self) -> Result<TargetSpec> {
        parse_pla(self.pla)
    }
}

pub fn get(name: &str) -> Result<&'static Benchmark> {
    ALL.iter()
        .find(|b| b.name == name)
        .ok_or_else(|| Error::Config(format!("unknown benchmark '{name}'")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netlist::Pin;

    #[test]
    fn tables_match_netlists() {
        for b in ALL {
            let seed = b.seed().unwrap();
            let target = b.target().unwrap();
            let from_seed = TargetSpec::from_circuit(&seed.circuit);
            assert_eq!(from_seed.outputs, target.outputs, "{}", b.name);
            assert_eq!(seed.input_names, target.input_names, "{}", b.name);
            assert_eq!(seed.output_names, target.output_names, "{}", b.name);
        }
    }

    #[test]
    fn gates_read_two_distinct_nets() {
        for b in ALL {
            for g in b.seed().unwrap().circuit.gates {
                assert_ne!(g.a, g.b, "{}", b.name);
                assert!(
                    g.tt.depends_on(Pin::A) && g.tt.depends_on(Pin::B),
                    "{}",
                    b.name
                );
            }
        }
    }

    #[test]
    fn sizes() {
        let sizes: Vec<(usize, usize, usize)> = ALL
            .iter()
            .map(|b| {
                let c = b.seed().unwrap().circuit;
                (c.inputs, c.outputs.len(), c.gates.len())
            })
            .collect();
        assert_eq!(
            sizes,
            [
                (4, 4, 7),
                (3, 4, 5),
                (5, 2, 6),
                (5, 3, 10),
                (4, 10, 17),
                (6, 8, 16),
                (5, 16, 26)
            ]
        );
    }
}
