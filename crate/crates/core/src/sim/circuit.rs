//! Gate-level circuits, the transpiler to `{H, CNOT, Rz}`, and a line-based
//! text form (`GATE q0 [q1] [angle]`, one gate per line).

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::pauli::{Pauli, PauliString};
use crate::sim::noise::ErrorSite;
use crate::sim::Statevector;

#[derive(Debug, Clone, PartialEq)]
pub enum Gate {
    H(usize),
    Cnot { control: usize, target: usize },
    /// `exp(-i angle Z / 2)`.
    Rz { qubit: usize, angle: f64 },
    X(usize),
    /// Phase correction used by the imaginary-part Hadamard test.
    Sdg(usize),
    /// `exp(-i angle P / 2)`, optionally controlled. Pre-transpilation only.
    PauliRotation {
        pauli: PauliString,
        angle: f64,
        control: Option<usize>,
    },
}

impl Gate {
    fn name(&self) -> &'static str {
        match self {
            Gate::H(_) => "H",
            Gate::Cnot { .. } => "CNOT",
            Gate::Rz { .. } => "RZ",
            Gate::X(_) => "X",
            Gate::Sdg(_) => "SDG",
            Gate::PauliRotation { control: None, .. } => "PROT",
            Gate::PauliRotation { control: Some(_), .. } => "CPROT",
        }
    }

    fn qubits(&self) -> Vec<usize> {
        match self {
            Gate::H(q) | Gate::X(q) | Gate::Sdg(q) | Gate::Rz { qubit: q, .. } => vec![*q],
            Gate::Cnot { control, target } => vec![*control, *target],
            Gate::PauliRotation { pauli, control, .. } => {
                let mut qs = pauli.support();
                qs.extend(control);
                qs
            }
        }
    }

    pub fn is_native(&self) -> bool {
        matches!(self, Gate::H(_) | Gate::Cnot { .. } | Gate::Rz { .. })
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct GateCounts {
    pub h: usize,
    pub cnot: usize,
    pub rz: usize,
    pub other: usize,
}

impl GateCounts {
    pub fn total(&self) -> usize {
        self.h + self.cnot + self.rz + self.other
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Circuit {
    n_qubits: usize,
    gates: Vec<Gate>,
}

impl Circuit {
    pub fn new(n_qubits: usize) -> Self {
        Self {
            n_qubits,
            gates: Vec::new(),
        }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    /// Appends a gate after checking its qubit indices.
    pub fn push(&mut self, gate: Gate) -> Result<()> {
        self.check(&gate)?;
        self.gates.push(gate);
        Ok(())
    }

    fn check(&self, gate: &Gate) -> Result<()> {
        if let Gate::PauliRotation { pauli, control, .. } = gate {
            if pauli.n_qubits() != self.n_qubits {
                return Err(Error::QubitCountMismatch {
                    expected: self.n_qubits,
                    found: pauli.n_qubits(),
                });
            }
            if let Some(c) = control {
                if *c < self.n_qubits && pauli.get(*c) != Pauli::I {
                    return Err(Error::Format(format!(
                        "control qubit {c} overlaps the rotation support"
                    )));
                }
            }
        }
        if let Gate::Cnot { control, target } = gate {
            if control == target {
                return Err(Error::Format("CNOT control equals target".into()));
            }
        }
        for q in gate.qubits() {
            if q >= self.n_qubits {
                return Err(Error::QubitOutOfRange {
                    gate: gate.name().into(),
                    qubit: q,
                    n_qubits: self.n_qubits,
                });
            }
        }
        Ok(())
    }

    pub fn extend(&mut self, other: &Circuit) -> Result<()> {
        if other.n_qubits != self.n_qubits {
            return Err(Error::QubitCountMismatch {
                expected: self.n_qubits,
                found: other.n_qubits,
            });
        }
        self.gates.extend_from_slice(&other.gates);
        Ok(())
    }

    pub fn is_transpiled(&self) -> bool {
        self.gates.iter().all(Gate::is_native)
    }

    pub fn gate_counts(&self) -> GateCounts {
        let mut c = GateCounts::default();
        for g in &self.gates {
            match g {
                Gate::H(_) => c.h += 1,
                Gate::Cnot { .. } => c.cnot += 1,
                Gate::Rz { .. } => c.rz += 1,
                _ => c.other += 1,
            }
        }
        c
    }

    pub fn rz_count(&self) -> usize {
        self.gates
            .iter()
            .filter(|g| matches!(g, Gate::Rz { .. }))
            .count()
    }

    /// Lowers every gate to `{H, CNOT, Rz}`.
    ///
    /// Pauli rotations become basis changes (`H` for X, `Rz(-pi/2)` then `H`
    /// for Y), a CNOT parity ladder onto the highest support qubit, and an
    /// `Rz` core. A controlled core is `Rz(a/2) CNOT Rz(-a/2) CNOT`. The
    /// controlled identity rotation is a plain `Rz(-a/2)` on the control.
    /// Global phases are dropped.
    pub fn transpile(&self) -> Circuit {
        let mut out = Circuit::new(self.n_qubits);
        for g in &self.gates {
            lower(g, &mut out.gates);
        }
        out
    }

    /// Noiseless application.
    pub fn apply(&self, state: &mut Statevector) -> Result<()> {
        self.apply_with_errors(state, &[])
    }

    /// Applies the circuit, inserting a Pauli after selected `Rz` gates.
    ///
    /// `errors` must be sorted by `rz_ordinal`, which counts `Rz` gates
    /// (including `Sdg`, which lowers to one) from zero.
    pub fn apply_with_errors(&self, state: &mut Statevector, errors: &[ErrorSite]) -> Result<()> {
        if state.n_qubits() != self.n_qubits {
            return Err(Error::DimensionMismatch {
                expected: self.n_qubits,
                found: state.n_qubits(),
            });
        }
        let mut ordinal = 0usize;
        let mut next = errors.iter().peekable();
        for g in &self.gates {
            match g {
                Gate::H(q) => state.h(*q),
                Gate::X(q) => state.x(*q),
                Gate::Cnot { control, target } => state.cnot(*control, *target),
                Gate::Rz { qubit, angle } => {
                    state.rz(*qubit, *angle);
                    while let Some(e) = next.next_if(|e| e.rz_ordinal == ordinal) {
                        apply_single(state, *qubit, e.pauli);
                    }
                    ordinal += 1;
                }
                Gate::Sdg(q) => {
                    state.rz(*q, -FRAC_PI_2);
                    while let Some(e) = next.next_if(|e| e.rz_ordinal == ordinal) {
                        apply_single(state, *q, e.pauli);
                    }
                    ordinal += 1;
                }
                Gate::PauliRotation {
                    pauli,
                    angle,
                    control,
                } => state.pauli_rotation(pauli, *angle, *control),
            }
        }
        Ok(())
    }

    /// One gate per line: `H q`, `CNOT c t`, `RZ q angle`, `X q`, `SDG q`,
    /// `PROT label angle`, `CPROT c label angle`.
    pub fn to_text(&self) -> String {
        let mut s = format!("QUBITS {}\n", self.n_qubits);
        for g in &self.gates {
            let _ = match g {
                Gate::H(q) => writeln!(s, "H {q}"),
                Gate::X(q) => writeln!(s, "X {q}"),
                Gate::Sdg(q) => writeln!(s, "SDG {q}"),
                Gate::Cnot { control, target } => writeln!(s, "CNOT {control} {target}"),
                Gate::Rz { qubit, angle } => writeln!(s, "RZ {qubit} {angle:?}"),
                Gate::PauliRotation {
                    pauli,
                    angle,
                    control: None,
                } => writeln!(s, "PROT {pauli} {angle:?}"),
                Gate::PauliRotation {
                    pauli,
                    angle,
                    control: Some(c),
                } => writeln!(s, "CPROT {c} {pauli} {angle:?}"),
            };
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Circuit> {
        let bad = |line: &str| Error::Format(format!("bad circuit line {line:?}"));
        let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#'));
        let header = lines.next().ok_or_else(|| Error::Format("empty circuit".into()))?;
        let n_qubits = header
            .strip_prefix("QUBITS ")
            .and_then(|n| n.trim().parse().ok())
            .ok_or_else(|| bad(header))?;
        let mut c = Circuit::new(n_qubits);
        for line in lines {
            let f: Vec<&str> = line.split_whitespace().collect();
            let q = |i: usize| -> Result<usize> {
                f.get(i).and_then(|s| s.parse().ok()).ok_or_else(|| bad(line))
            };
            let a = |i: usize| -> Result<f64> {
                f.get(i).and_then(|s| s.parse().ok()).ok_or_else(|| bad(line))
            };
            let gate = match f[0] {
                "H" => Gate::H(q(1)?),
                "X" => Gate::X(q(1)?),
                "SDG" => Gate::Sdg(q(1)?),
                "CNOT" => Gate::Cnot {
                    control: q(1)?,
                    target: q(2)?,
                },
                "RZ" => Gate::Rz {
                    qubit: q(1)?,
                    angle: a(2)?,
                },
                "PROT" => Gate::PauliRotation {
                    pauli: f.get(1).ok_or_else(|| bad(line))?.parse()?,
                    angle: a(2)?,
                    control: None,
                },
                "CPROT" => Gate::PauliRotation {
                    control: Some(q(1)?),
                    pauli: f.get(2).ok_or_else(|| bad(line))?.parse()?,
                    angle: a(3)?,
                },
                _ => return Err(bad(line)),
            };
            c.push(gate)?;
        }
        Ok(c)
    }
}

fn apply_single(state: &mut Statevector, q: usize, p: Pauli) {
    match p {
        Pauli::I => {}
        Pauli::X => state.x(q),
        Pauli::Y => state.y(q),
        Pauli::Z => state.z(q),
    }
}

fn lower(g: &Gate, out: &mut Vec<Gate>) {
    match g {
        Gate::H(_) | Gate::Cnot { .. } | Gate::Rz { .. } => out.push(g.clone()),
        Gate::X(q) => {
            out.push(Gate::H(*q));
            out.push(Gate::Rz { qubit: *q, angle: PI });
            out.push(Gate::H(*q));
        }
        Gate::Sdg(q) => out.push(Gate::Rz {
            qubit: *q,
            angle: -FRAC_PI_2,
        }),
        Gate::PauliRotation {
            pauli,
            angle,
            control,
        } => lower_rotation(pauli, *angle, *control, out),
    }
}

fn lower_rotation(pauli: &PauliString, angle: f64, control: Option<usize>, out: &mut Vec<Gate>) {
    let support = pauli.support();
    let Some(&pivot) = support.last() else {
        if let Some(c) = control {
            out.push(Gate::Rz {
                qubit: c,
                angle: -angle / 2.0,
            });
        }
        return;
    };
    for &q in &support {
        match pauli.get(q) {
            Pauli::X => out.push(Gate::H(q)),
            Pauli::Y => {
                out.push(Gate::Rz {
                    qubit: q,
                    angle: -FRAC_PI_2,
                });
                out.push(Gate::H(q));
            }
            _ => {}
        }
    }
    for w in support.windows(2) {
        out.push(Gate::Cnot {
            control: w[0],
            target: w[1],
        });
    }
    match control {
        None => out.push(Gate::Rz {
            qubit: pivot,
            angle,
        }),
        Some(c) => {
            out.push(Gate::Rz {
                qubit: pivot,
                angle: angle / 2.0,
            });
            out.push(Gate::Cnot {
                control: c,
                target: pivot,
            });
            out.push(Gate::Rz {
                qubit: pivot,
                angle: -angle / 2.0,
            });
            out.push(Gate::Cnot {
                control: c,
                target: pivot,
            });
        }
    }
    for w in support.windows(2).rev() {
        out.push(Gate::Cnot {
            control: w[0],
            target: w[1],
        });
    }
    for &q in &support {
        match pauli.get(q) {
            Pauli::X => out.push(Gate::H(q)),
            Pauli::Y => {
                out.push(Gate::H(q));
                out.push(Gate::Rz {
                    qubit: q,
                    angle: FRAC_PI_2,
                });
            }
            _ => {}
        }
    }
}
