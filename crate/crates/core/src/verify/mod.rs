//! Differential verification of circuits against integer oracles.

pub mod oracle;

use std::collections::BTreeMap;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bricks::{
    build_adder_with, build_inequality_with, build_minmax_with, build_mux_with, build_not,
    build_scalar_mult_with, build_subtractor_with, build_variable_mult_with, BuildOptions,
    InequalityVariant, MinMaxMode,
};
use crate::error::{Error, Result};
use crate::neuron::LeakMode;
use crate::scaffold::{DelayStrategy, LoweredNetwork, Scaffold};

pub const REPORT_FORMAT_VERSION: u32 = 1;
/// Largest width swept exhaustively.
pub const EXHAUSTIVE_MAX_WIDTH: u32 = 8;
/// Largest operand space swept exhaustively.
pub const EXHAUSTIVE_MAX_CASES: u64 = 1 << 20;
pub const DEFAULT_SAMPLES: usize = 1000;
pub const DEFAULT_SEED: u64 = 0x5eed;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "circuit")]
pub enum Circuit {
    Adder,
    Not { leak: LeakMode },
    Inequality { variant: InequalityVariant },
    Mux,
    MinMax { mode: MinMaxMode },
    Subtractor,
    ScalarMult { a: u64 },
    VariableMult,
}

impl fmt::Display for Circuit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Circuit::Adder => f.write_str("adder"),
            Circuit::Not { leak } => write!(f, "not[{leak}]"),
            Circuit::Inequality { variant } => write!(
                f,
                "inequality[{}]",
                match variant {
                    InequalityVariant::Arithmetic => "arithmetic",
                    InequalityVariant::Decay => "decay",
                }
            ),
            Circuit::Mux => f.write_str("mux"),
            Circuit::MinMax { mode } => write!(
                f,
                "minmax[{}]",
                match mode {
                    MinMaxMode::Min => "min",
                    MinMaxMode::Max => "max",
                }
            ),
            Circuit::Subtractor => f.write_str("subtractor"),
            Circuit::ScalarMult { a } => write!(f, "scalar_mult[a={a}]"),
            Circuit::VariableMult => f.write_str("variable_mult"),
        }
    }
}

/// Circuit family names accepted by [`Circuit::family`].
pub const FAMILIES: &[&str] = &[
    "adder",
    "not",
    "inequality",
    "mux",
    "minmax",
    "subtractor",
    "scalar_mult",
    "variable_mult",
];

/// Largest constant covered when a scalar-multiplier family is expanded.
pub const SCALAR_FAMILY_MAX: u64 = 31;

/// Choices that pick one configuration out of a circuit family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct CircuitOptions {
    pub leak: Option<LeakMode>,
    pub variant: Option<InequalityVariant>,
    pub mode: Option<MinMaxMode>,
    pub scalar: Option<u64>,
}

impl Circuit {
    /// One configuration of family `name`. Unset options fall back to the
    /// additive NOT, the arithmetic inequality and max; the scalar multiplier
    /// needs `scalar`.
    pub fn named(name: &str, o: &CircuitOptions) -> Result<Circuit> {
        Ok(match name {
            "adder" => Circuit::Adder,
            "not" => Circuit::Not {
                leak: o.leak.unwrap_or(LeakMode::Additive),
            },
            "inequality" => Circuit::Inequality {
                variant: o.variant.unwrap_or(InequalityVariant::Arithmetic),
            },
            "mux" => Circuit::Mux,
            "minmax" => Circuit::MinMax {
                mode: o.mode.unwrap_or(MinMaxMode::Max),
            },
            "subtractor" => Circuit::Subtractor,
            "scalar_mult" => Circuit::ScalarMult {
                a: o.scalar
                    .ok_or_else(|| Error::MissingValue("scalar".into()))?,
            },
            "variable_mult" => Circuit::VariableMult,
            other => return Err(Error::UnknownCircuit(other.to_string())),
        })
    }

    /// Every configuration of a named family, or of all families for `all`.
    pub fn family(name: &str) -> Result<Vec<Circuit>> {
        use Circuit::*;
        Ok(match name {
            "all" => {
                let mut v = Vec::new();
                for f in FAMILIES {
                    v.extend(Circuit::family(f)?);
                }
                v
            }
            "adder" => vec![Adder],
            "not" => vec![
                Not {
                    leak: LeakMode::Additive,
                },
                Not {
                    leak: LeakMode::Multiplicative,
                },
            ],
            "inequality" => vec![
                Inequality {
                    variant: InequalityVariant::Arithmetic,
                },
                Inequality {
                    variant: InequalityVariant::Decay,
                },
            ],
            "mux" => vec![Mux],
            "minmax" => vec![
                MinMax {
                    mode: MinMaxMode::Min,
                },
                MinMax {
                    mode: MinMaxMode::Max,
                },
            ],
            "subtractor" => vec![Subtractor],
            "scalar_mult" => (0..=SCALAR_FAMILY_MAX).map(|a| ScalarMult { a }).collect(),
            "variable_mult" => vec![VariableMult],
            other => return Err(Error::UnknownCircuit(other.to_string())),
        })
    }

    /// Operand names in order, with their widths for a `width`-bit instance.
    pub fn operands(&self, width: u32) -> Vec<(&'static str, u32)> {
        match self {
            Circuit::Not { .. } => vec![("X", width)],
            Circuit::ScalarMult { .. } => vec![("X", width)],
            Circuit::VariableMult => vec![("X", width), ("Y", width)],
            Circuit::Mux => vec![("A", width), ("B", width), ("select", 1)],
            _ => vec![("A", width), ("B", width)],
        }
    }

    pub fn output(&self) -> &'static str {
        match self {
            Circuit::Adder => "S",
            Circuit::Not { .. } => "notX",
            Circuit::Inequality { .. } => "gt",
            Circuit::Mux | Circuit::MinMax { .. } => "out",
            Circuit::Subtractor => "D",
            Circuit::ScalarMult { .. } => "Y",
            Circuit::VariableMult => "P",
        }
    }

    pub fn brick(&self, width: u32, opts: &BuildOptions) -> Result<crate::brick::Brick> {
        match *self {
            Circuit::Adder => Ok(build_adder_with(opts.adder)),
            Circuit::Not { leak } => Ok(build_not(leak)),
            Circuit::Inequality { variant } => build_inequality_with(width, variant, opts),
            Circuit::Mux => Ok(build_mux_with(width, opts.mux)),
            Circuit::MinMax { mode } => build_minmax_with(width, mode, opts),
            Circuit::Subtractor => build_subtractor_with(width, opts),
            Circuit::ScalarMult { a } => build_scalar_mult_with(a, width, opts),
            Circuit::VariableMult => build_variable_mult_with(width, opts),
        }
    }

    pub fn lower(
        &self,
        width: u32,
        opts: &BuildOptions,
        strategy: DelayStrategy,
    ) -> Result<LoweredNetwork> {
        Scaffold::single(self.brick(width, opts)?, width)?.lower_with(strategy)
    }

    pub fn case_count(&self, width: u32) -> u64 {
        self.operands(width)
            .iter()
            .map(|(_, w)| 1u64 << w)
            .product()
    }

    /// The `index`-th operand tuple in mixed-radix order (first operand fastest).
    pub fn case(&self, width: u32, mut index: u64) -> Vec<i64> {
        self.operands(width)
            .iter()
            .map(|(_, w)| {
                let v = index & ((1u64 << w) - 1);
                index >>= w;
                v as i64
            })
            .collect()
    }

    /// Operand map for the simulator; the mux stop pulse mirrors select.
    pub fn bind(&self, width: u32, values: &[i64]) -> BTreeMap<String, i64> {
        let mut m: BTreeMap<String, i64> = self
            .operands(width)
            .iter()
            .zip(values)
            .map(|((n, _), v)| (n.to_string(), *v))
            .collect();
        if *self == Circuit::Mux {
            m.insert("stop".into(), values[2]);
        }
        m
    }

    /// Expected output according to the integer oracle.
    pub fn expected(&self, width: u32, v: &[i64]) -> i64 {
        use oracle::*;
        match *self {
            Circuit::Adder => add(v[0], v[1]),
            Circuit::Not { .. } => not(v[0], width),
            Circuit::Inequality { .. } => ones_complement_carry(v[0], v[1], width) as i64,
            Circuit::Mux => mux(v[0], v[1], v[2] == 1),
            Circuit::MinMax {
                mode: MinMaxMode::Min,
            } => min(v[0], v[1]),
            Circuit::MinMax {
                mode: MinMaxMode::Max,
            } => max(v[0], v[1]),
            Circuit::Subtractor => twos_complement_difference(v[0], v[1], width),
            Circuit::ScalarMult { a } => mul(a as i64, v[0]),
            Circuit::VariableMult => mul(v[0], v[1]),
        }
    }
}

/// A single-parameter change that must break a circuit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Mutation {
    AdderThreshold { hidden: usize, value: i64 },
    AdderOutputWeight { hidden: usize, value: i64 },
    AdderCarryWeight { value: i64 },
    MuxASelectWeight { value: i64 },
    MuxBSelectWeight { value: i64 },
    MuxBThreshold { value: i64 },
    MuxSelectSelfWeight { value: i64 },
    MuxOutThreshold { value: i64 },
}

impl Mutation {
    /// The documented adder and mux mutations.
    pub fn documented() -> Vec<Mutation> {
        use Mutation::*;
        vec![
            AdderThreshold {
                hidden: 0,
                value: 2,
            },
            AdderThreshold {
                hidden: 1,
                value: 3,
            },
            AdderThreshold {
                hidden: 2,
                value: 2,
            },
            AdderOutputWeight {
                hidden: 1,
                value: 0,
            },
            AdderCarryWeight { value: 0 },
            MuxASelectWeight { value: 0 },
            MuxBSelectWeight { value: 0 },
            MuxBThreshold { value: 1 },
            MuxSelectSelfWeight { value: 0 },
            MuxOutThreshold { value: 2 },
        ]
    }

    /// Circuit whose sweep should expose the mutation.
    pub fn target(&self) -> Circuit {
        match self {
            Mutation::AdderThreshold { .. }
            | Mutation::AdderOutputWeight { .. }
            | Mutation::AdderCarryWeight { .. } => Circuit::Adder,
            _ => Circuit::Mux,
        }
    }

    pub fn apply(&self, opts: &mut BuildOptions) {
        match *self {
            Mutation::AdderThreshold { hidden, value } => opts.adder.thresholds[hidden] = value,
            Mutation::AdderOutputWeight { hidden, value } => opts.adder.out_weights[hidden] = value,
            Mutation::AdderCarryWeight { value } => opts.adder.carry_weight = value,
            Mutation::MuxASelectWeight { value } => opts.mux.a_select_weight = value,
            Mutation::MuxBSelectWeight { value } => opts.mux.b_select_weight = value,
            Mutation::MuxBThreshold { value } => opts.mux.b_threshold = value,
            Mutation::MuxSelectSelfWeight { value } => opts.mux.select_self_weight = value,
            Mutation::MuxOutThreshold { value } => opts.mux.out_threshold = value,
        }
    }
}

impl fmt::Display for Mutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Mutation::AdderThreshold { hidden, value } => {
                write!(f, "adder T{} threshold -> {value}", hidden + 1)
            }
            Mutation::AdderOutputWeight { hidden, value } => {
                write!(f, "adder T{}->S weight -> {value}", hidden + 1)
            }
            Mutation::AdderCarryWeight { value } => write!(f, "adder carry weight -> {value}"),
            Mutation::MuxASelectWeight { value } => write!(f, "mux select->A_in weight -> {value}"),
            Mutation::MuxBSelectWeight { value } => write!(f, "mux select->B_in weight -> {value}"),
            Mutation::MuxBThreshold { value } => write!(f, "mux B_in threshold -> {value}"),
            Mutation::MuxSelectSelfWeight { value } => {
                write!(f, "mux select self weight -> {value}")
            }
            Mutation::MuxOutThreshold { value } => write!(f, "mux out threshold -> {value}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "mode")]
pub enum SweepMode {
    Exhaustive,
    Randomized { samples: usize, seed: u64 },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub circuits: Vec<Circuit>,
    pub widths: Vec<u32>,
    pub mode: SweepMode,
    pub mutation: Option<Mutation>,
    pub delay: DelayStrategy,
}

impl SweepSpec {
    pub fn new(circuits: Vec<Circuit>, widths: Vec<u32>, mode: SweepMode) -> Self {
        SweepSpec {
            circuits,
            widths,
            mode,
            mutation: None,
            delay: DelayStrategy::Synapse,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.circuits.is_empty() || self.widths.is_empty() {
            return Err(Error::InvalidSweep("no circuits or widths".into()));
        }
        for &w in &self.widths {
            if w == 0 || w > 16 {
                return Err(Error::InvalidWidth(w));
            }
            if self.mode == SweepMode::Exhaustive {
                for c in &self.circuits {
                    if w > EXHAUSTIVE_MAX_WIDTH || c.case_count(w) > EXHAUSTIVE_MAX_CASES {
                        return Err(Error::ExhaustiveBound {
                            circuit: c.to_string(),
                            width: w,
                        });
                    }
                }
            }
        }
        if let SweepMode::Randomized { samples: 0, .. } = self.mode {
            return Err(Error::InvalidSweep("zero samples".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counterexample {
    pub operands: BTreeMap<String, i64>,
    pub expected: i64,
    pub actual: i64,
    pub raster_csv: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SweepEntry {
    pub circuit: Circuit,
    pub label: String,
    pub width: u32,
    pub cases: u64,
    pub failures: u64,
    pub neurons: usize,
    pub timesteps: u64,
    pub counterexample: Option<Counterexample>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Report {
    pub format_version: u32,
    pub spec: SweepSpec,
    pub entries: Vec<SweepEntry>,
    pub cases: u64,
    pub failures: u64,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for e in &self.entries {
            out.push_str(&format!(
                "{:<28} k={:<2} cases={:<7} failures={:<6} neurons={:<4} steps={}\n",
                e.label, e.width, e.cases, e.failures, e.neurons, e.timesteps
            ));
            if let Some(c) = &e.counterexample {
                out.push_str(&format!(
                    "  counterexample {:?}: expected {} got {}\n",
                    c.operands, c.expected, c.actual
                ));
                for line in c.raster_csv.lines() {
                    out.push_str("    ");
                    out.push_str(line);
                    out.push('\n');
                }
            }
        }
        if let Some(m) = &self.spec.mutation {
            out.push_str(&format!("mutation: {m}\n"));
        }
        out.push_str(&format!(
            "total cases={} failures={} => {}\n",
            self.cases,
            self.failures,
            if self.passed() { "PASS" } else { "FAIL" }
        ));
        out
    }
}

fn case_seed(seed: u64, circuit: &Circuit, width: u32) -> u64 {
    // FNV-1a over the label keeps streams distinct per circuit and width
    let mut h: u64 = 0xcbf29ce484222325;
    for b in circuit.to_string().bytes().chain(width.to_le_bytes()) {
        h ^= b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    seed ^ h
}

fn sweep_one(
    circuit: Circuit,
    width: u32,
    mode: SweepMode,
    opts: &BuildOptions,
    strategy: DelayStrategy,
) -> Result<SweepEntry> {
    let net = circuit.lower(width, opts, strategy)?;
    let cases: Vec<Vec<i64>> = match mode {
        SweepMode::Exhaustive => (0..circuit.case_count(width))
            .map(|i| circuit.case(width, i))
            .collect(),
        SweepMode::Randomized { samples, seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(case_seed(seed, &circuit, width));
            let ops = circuit.operands(width);
            (0..samples)
                .map(|_| {
                    ops.iter()
                        .map(|(_, w)| rng.random_range(0..1i64 << w))
                        .collect()
                })
                .collect()
        }
    };
    let output = circuit.output();
    let check = |v: &Vec<i64>| -> Result<Option<i64>> {
        let got = net.evaluate(&circuit.bind(width, v))?[output];
        Ok((got != circuit.expected(width, v)).then_some(got))
    };
    let outcomes: Vec<Option<i64>> = cases.par_iter().map(check).collect::<Result<_>>()?;
    let failures = outcomes.iter().filter(|o| o.is_some()).count() as u64;
    let counterexample = match outcomes.iter().position(|o| o.is_some()) {
        Some(i) => {
            let operands = circuit.bind(width, &cases[i]);
            let raster = net.simulate(&operands)?;
            Some(Counterexample {
                operands,
                expected: circuit.expected(width, &cases[i]),
                actual: outcomes[i].unwrap(),
                raster_csv: raster.to_csv(),
            })
        }
        None => None,
    };
    Ok(SweepEntry {
        circuit,
        label: circuit.to_string(),
        width,
        cases: cases.len() as u64,
        failures,
        neurons: net.network.len(),
        timesteps: cases.len() as u64 * net.horizon(),
        counterexample,
    })
}

/// Build, lower, run and check every case of `spec`.
pub fn sweep(spec: &SweepSpec) -> Result<Report> {
    spec.validate()?;
    let mut opts = BuildOptions::default();
    if let Some(m) = &spec.mutation {
        m.apply(&mut opts);
    }
    let mut entries = Vec::new();
    for c in &spec.circuits {
        for &w in &spec.widths {
            entries.push(sweep_one(*c, w, spec.mode, &opts, spec.delay)?);
        }
    }
    Ok(Report {
        format_version: REPORT_FORMAT_VERSION,
        spec: spec.clone(),
        cases: entries.iter().map(|e| e.cases).sum(),
        failures: entries.iter().map(|e| e.failures).sum(),
        entries,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn oracle_examples() {
        let ineq = Circuit::Inequality {
            variant: InequalityVariant::Arithmetic,
        };
        assert_eq!(ineq.expected(3, &[5, 3]), 1);
        assert_eq!(Circuit::Adder.expected(4, &[0, 0]), 0);
        assert_eq!(Circuit::ScalarMult { a: 5 }.expected(4, &[3]), 15);
    }

    #[test]
    fn case_enumeration_covers_space() {
        let c = Circuit::Mux;
        assert_eq!(c.case_count(3), 128);
        assert_eq!(c.case(3, 0), vec![0, 0, 0]);
        assert_eq!(c.case(3, 127), vec![7, 7, 1]);
        assert_eq!(c.case(3, 9), vec![1, 1, 0]);
    }

    #[test]
    fn small_exhaustive_sweep_passes() {
        let spec = SweepSpec::new(
            Circuit::family("all").unwrap(),
            vec![1, 2],
            SweepMode::Exhaustive,
        );
        let r = sweep(&spec).unwrap();
        assert!(r.passed(), "{}", r.to_text());
    }

    #[test]
    fn mutated_adder_is_caught() {
        let mut spec = SweepSpec::new(vec![Circuit::Adder], vec![3], SweepMode::Exhaustive);
        spec.mutation = Some(Mutation::AdderThreshold {
            hidden: 1,
            value: 3,
        });
        let r = sweep(&spec).unwrap();
        assert!(r.failures > 0);
        let c = r.entries[0].counterexample.as_ref().unwrap();
        assert!(c.raster_csv.starts_with("# spikearith-raster v1"));
    }

    #[test]
    fn exhaustive_bound_enforced() {
        let spec = SweepSpec::new(vec![Circuit::Adder], vec![9], SweepMode::Exhaustive);
        assert!(matches!(sweep(&spec), Err(Error::ExhaustiveBound { .. })));
    }

    #[test]
    fn randomized_sweeps_reproduce() {
        let mode = SweepMode::Randomized {
            samples: 50,
            seed: 7,
        };
        let spec = SweepSpec::new(vec![Circuit::VariableMult], vec![5], mode);
        assert_eq!(sweep(&spec).unwrap(), sweep(&spec).unwrap());
    }
}
