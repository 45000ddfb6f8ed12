//! Boolean circuits over labelled nodes.
//!
//! A circuit is `⟨L, G, w⟩`: ordered input labels, gates writing to fresh
//! labels, and an output label. Gate inputs are sets. An `and` without
//! inputs is the constant 1 and an `or` without inputs the constant 0.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::fmt::Write as _;

use rayon::prelude::*;

use crate::error::{parse_error, Error, Result};

/// Largest input count for [`Circuit::compute_table`].
pub const TABLE_LIMIT: usize = 24;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GateKind {
    And,
    Or,
    Not,
    Tie,
}

impl GateKind {
    fn keyword(self) -> &'static str {
        match self {
            GateKind::And => "and",
            GateKind::Or => "or",
            GateKind::Not => "not",
            GateKind::Tie => "tie",
        }
    }
}

impl fmt::Display for GateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.keyword())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Gate {
    kind: GateKind,
    inputs: Vec<String>,
    output: String,
    note: Option<String>,
}

impl Gate {
    /// Input labels are sorted and deduplicated.
    pub fn new(
        kind: GateKind,
        inputs: impl IntoIterator<Item = impl Into<String>>,
        output: impl Into<String>,
    ) -> Gate {
        let inputs: BTreeSet<String> = inputs.into_iter().map(Into::into).collect();
        Gate {
            kind,
            inputs: inputs.into_iter().collect(),
            output: output.into(),
            note: None,
        }
    }

    pub fn and(
        inputs: impl IntoIterator<Item = impl Into<String>>,
        output: impl Into<String>,
    ) -> Gate {
        Gate::new(GateKind::And, inputs, output)
    }

    pub fn or(
        inputs: impl IntoIterator<Item = impl Into<String>>,
        output: impl Into<String>,
    ) -> Gate {
        Gate::new(GateKind::Or, inputs, output)
    }

    pub fn not(input: impl Into<String>, output: impl Into<String>) -> Gate {
        Gate::new(GateKind::Not, [input.into()], output)
    }

    pub fn tie(input: impl Into<String>, output: impl Into<String>) -> Gate {
        Gate::new(GateKind::Tie, [input.into()], output)
    }

    /// Attaches a provenance note, written as a `#` comment.
    pub fn with_note(mut self, note: impl Into<String>) -> Gate {
        self.note = Some(note.into());
        self
    }

    pub fn kind(&self) -> GateKind {
        self.kind
    }

    pub fn inputs(&self) -> &[String] {
        &self.inputs
    }

    pub fn output(&self) -> &str {
        &self.output
    }

    pub fn note(&self) -> Option<&str> {
        self.note.as_deref()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct Compiled {
    /// `(kind, input node indices, output node index)` in topological order.
    steps: Vec<(GateKind, Vec<usize>, usize)>,
    num_nodes: usize,
    output: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Circuit {
    inputs: Vec<String>,
    gates: Vec<Gate>,
    output: String,
    compiled: Compiled,
}

impl Circuit {
    pub fn new(
        inputs: Vec<String>,
        gates: Vec<Gate>,
        output: impl Into<String>,
    ) -> Result<Circuit> {
        let output = output.into();
        let invalid = |m: String| Err(Error::InvalidCircuit(m));
        let mut index: HashMap<&str, usize> = HashMap::new();
        for (i, l) in inputs.iter().enumerate() {
            if index.insert(l.as_str(), i).is_some() {
                return invalid(format!("duplicate input label `{l}`"));
            }
        }
        for (k, g) in gates.iter().enumerate() {
            if matches!(g.kind, GateKind::Not | GateKind::Tie) && g.inputs.len() != 1 {
                return invalid(format!(
                    "{} gate `{}` needs exactly one input",
                    g.kind, g.output
                ));
            }
            if index.insert(g.output.as_str(), inputs.len() + k).is_some() {
                return invalid(format!("label `{}` is defined twice", g.output));
            }
        }
        for g in &gates {
            if let Some(l) = g.inputs.iter().find(|l| !index.contains_key(l.as_str())) {
                return invalid(format!("gate `{}` reads undefined label `{l}`", g.output));
            }
        }
        let Some(&out) = index.get(output.as_str()) else {
            return invalid(format!("output label `{output}` is undefined"));
        };

        // Kahn's algorithm, ready gates taken in declaration order.
        let n_in = inputs.len();
        let deps: Vec<Vec<usize>> = gates
            .iter()
            .map(|g| g.inputs.iter().map(|l| index[l.as_str()]).collect())
            .collect();
        let mut missing: Vec<usize> = deps
            .iter()
            .map(|d| d.iter().filter(|&&x| x >= n_in).count())
            .collect();
        let mut readers: Vec<Vec<usize>> = vec![Vec::new(); gates.len()];
        for (k, d) in deps.iter().enumerate() {
            for &x in d.iter().filter(|&&x| x >= n_in) {
                readers[x - n_in].push(k);
            }
        }
        let mut ready: BTreeSet<usize> = (0..gates.len()).filter(|&k| missing[k] == 0).collect();
        let mut steps = Vec::with_capacity(gates.len());
        while let Some(k) = ready.pop_first() {
            steps.push((gates[k].kind, deps[k].clone(), n_in + k));
            for &r in &readers[k] {
                missing[r] -= 1;
                if missing[r] == 0 {
                    ready.insert(r);
                }
            }
        }
        if steps.len() != gates.len() {
            return invalid("the gates contain a cycle".to_string());
        }
        let compiled = Compiled {
            steps,
            num_nodes: n_in + gates.len(),
            output: out,
        };
        Ok(Circuit {
            inputs,
            gates,
            output,
            compiled,
        })
    }

    pub fn inputs(&self) -> &[String] {
        &self.inputs
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn output(&self) -> &str {
        &self.output
    }

    pub fn num_gates(&self) -> usize {
        self.gates.len()
    }

    /// Gates in a topological order of the dependency graph.
    pub fn topological_gates(&self) -> impl Iterator<Item = &Gate> {
        let n_in = self.inputs.len();
        self.compiled
            .steps
            .iter()
            .map(move |(_, _, o)| &self.gates[o - n_in])
    }

    /// Only `and`, `or` and `tie` gates.
    pub fn is_monotone(&self) -> bool {
        self.gates.iter().all(|g| g.kind != GateKind::Not)
    }

    pub fn evaluate(&self, x: &[bool]) -> Result<bool> {
        if x.len() != self.inputs.len() {
            return Err(Error::InputLength {
                expected: self.inputs.len(),
                actual: x.len(),
            });
        }
        let mut val = vec![false; self.compiled.num_nodes];
        val[..x.len()].copy_from_slice(x);
        for (kind, ins, out) in &self.compiled.steps {
            val[*out] = match kind {
                GateKind::And => ins.iter().all(|&i| val[i]),
                GateKind::Or => ins.iter().any(|&i| val[i]),
                GateKind::Not => !val[ins[0]],
                GateKind::Tie => val[ins[0]],
            };
        }
        Ok(val[self.compiled.output])
    }

    /// Full truth table; row `r` has `x_i` = bit `i` of `r`.
    pub fn compute_table(&self) -> Result<Vec<(Vec<bool>, bool)>> {
        let n = self.inputs.len();
        if n > TABLE_LIMIT {
            return Err(Error::TooLarge {
                size: n,
                limit: TABLE_LIMIT,
            });
        }
        Ok((0..1usize << n)
            .into_par_iter()
            .map(|r| {
                let x: Vec<bool> = (0..n).map(|i| r >> i & 1 == 1).collect();
                let y = self.evaluate(&x).expect("length matches");
                (x, y)
            })
            .collect())
    }

    /// Truth table restricted to `domain`.
    pub fn compute_table_on(&self, domain: &[Vec<bool>]) -> Result<Vec<bool>> {
        domain.par_iter().map(|x| self.evaluate(x)).collect()
    }

    /// Drops gates the output does not depend on.
    pub fn prune_dead(&self) -> Circuit {
        let by_output: HashMap<&str, &Gate> =
            self.gates.iter().map(|g| (g.output.as_str(), g)).collect();
        let mut live: BTreeSet<&str> = BTreeSet::new();
        let mut stack = vec![self.output.as_str()];
        while let Some(l) = stack.pop() {
            if live.insert(l) {
                if let Some(g) = by_output.get(l) {
                    stack.extend(g.inputs.iter().map(String::as_str));
                }
            }
        }
        let gates = self
            .gates
            .iter()
            .filter(|g| live.contains(g.output.as_str()))
            .cloned()
            .collect();
        Circuit::new(self.inputs.clone(), gates, self.output.clone())
            .expect("subset of a valid circuit")
    }

    /// Replaces every `tie(q, t)` by renaming `t` to `q`.
    pub fn inline_ties(&self) -> Circuit {
        let mut alias: HashMap<String, String> = HashMap::new();
        for g in self.topological_gates() {
            if g.kind == GateKind::Tie {
                let target = alias
                    .get(&g.inputs[0])
                    .cloned()
                    .unwrap_or_else(|| g.inputs[0].clone());
                alias.insert(g.output.clone(), target);
            }
        }
        let resolve = |l: &String| alias.get(l).cloned().unwrap_or_else(|| l.clone());
        let gates = self
            .gates
            .iter()
            .filter(|g| g.kind != GateKind::Tie)
            .map(|g| Gate {
                inputs: g
                    .inputs
                    .iter()
                    .map(resolve)
                    .collect::<BTreeSet<_>>()
                    .into_iter()
                    .collect(),
                ..g.clone()
            })
            .collect();
        Circuit::new(self.inputs.clone(), gates, resolve(&self.output))
            .expect("ties removed from a valid circuit")
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for l in &self.inputs {
            writeln!(out, "input {l}").unwrap();
        }
        for g in &self.gates {
            if let Some(note) = &g.note {
                writeln!(out, "# {note}").unwrap();
            }
            write!(out, "{} {}", g.kind, g.output).unwrap();
            for l in &g.inputs {
                write!(out, " {l}").unwrap();
            }
            out.push('\n');
        }
        writeln!(out, "output {}", self.output).unwrap();
        out
    }

    /// Parses the line format written by [`Circuit::to_text`]. A `#` comment
    /// line directly above a gate becomes that gate's note.
    pub fn from_text(text: &str) -> Result<Circuit> {
        let mut inputs = Vec::new();
        let mut gates = Vec::new();
        let mut output = None;
        let mut note: Option<String> = None;
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let trimmed = raw.trim();
            if trimmed.is_empty() {
                note = None;
                continue;
            }
            if let Some(c) = trimmed.strip_prefix('#') {
                note = Some(c.trim().to_string());
                continue;
            }
            let body = trimmed.split('#').next().unwrap_or("");
            let parts: Vec<&str> = body.split_whitespace().collect();
            let kind = match parts[0] {
                "input" | "output" => {
                    if parts.len() != 2 {
                        return Err(parse_error(line, format!("`{}` takes one label", parts[0])));
                    }
                    if parts[0] == "input" {
                        inputs.push(parts[1].to_string());
                    } else if output.replace(parts[1].to_string()).is_some() {
                        return Err(parse_error(line, "duplicate `output` line"));
                    }
                    note = None;
                    continue;
                }
                "and" => GateKind::And,
                "or" => GateKind::Or,
                "not" => GateKind::Not,
                "tie" => GateKind::Tie,
                other => return Err(parse_error(line, format!("unknown keyword `{other}`"))),
            };
            if parts.len() < 2 {
                return Err(parse_error(line, "gate without an output label"));
            }
            if matches!(kind, GateKind::Not | GateKind::Tie) && parts.len() != 3 {
                return Err(parse_error(
                    line,
                    format!("`{}` takes exactly one input", parts[0]),
                ));
            }
            let mut g = Gate::new(kind, parts[2..].iter().copied(), parts[1]);
            g.note = note.take();
            gates.push(g);
        }
        let output = output.ok_or_else(|| parse_error(0, "missing `output` line"))?;
        Circuit::new(inputs, gates, output)
    }
}
