//! Gate-level compilation of Trotterized pathways.
//!
//! `exp(−iθP)` is emitted as a basis change (H for X, S†·H for Y), a CX
//! ladder onto the highest active qubit, `RZ(2θ)` there, and the mirror
//! image. `RZ(φ) = exp(−iφZ/2)`; likewise RX and RY.

use std::fmt::Write as _;
use std::str::FromStr;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{check_size, Error, Result};
use crate::pathway::PathwaySchedule;
use crate::pauli::{Pauli, PauliString};
use crate::pauli_fierz::CoupledSystem;
use crate::statevector::StateVector;

/// Rotations with `|θ|` below this are dropped by the optimizer.
pub const ZERO_ANGLE: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Axis {
    X,
    Y,
    Z,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Gate {
    /// `exp(−iθσ/2)` about `axis`.
    Rotation {
        axis: Axis,
        qubit: usize,
        angle: f64,
    },
    H(usize),
    S(usize),
    Sdg(usize),
    X(usize),
    Cx {
        control: usize,
        target: usize,
    },
}

impl Gate {
    pub fn rx(qubit: usize, angle: f64) -> Self {
        Gate::Rotation {
            axis: Axis::X,
            qubit,
            angle,
        }
    }

    pub fn ry(qubit: usize, angle: f64) -> Self {
        Gate::Rotation {
            axis: Axis::Y,
            qubit,
            angle,
        }
    }

    pub fn rz(qubit: usize, angle: f64) -> Self {
        Gate::Rotation {
            axis: Axis::Z,
            qubit,
            angle,
        }
    }

    /// Qubits acted on; the control comes first for CX.
    pub fn qubits(&self) -> Vec<usize> {
        match *self {
            Gate::Rotation { qubit, .. } | Gate::H(qubit) | Gate::S(qubit) | Gate::Sdg(qubit) | Gate::X(qubit) => {
                vec![qubit]
            }
            Gate::Cx { control, target } => vec![control, target],
        }
    }

    fn is_two_qubit(&self) -> bool {
        matches!(self, Gate::Cx { .. })
    }

    /// Product `later·self` as at most one gate, if the pair simplifies.
    /// `Some(None)` means the pair cancels.
    fn merge(&self, later: &Gate) -> Option<Option<Gate>> {
        use Gate::*;
        match (*self, *later) {
            (
                Rotation {
                    axis: a,
                    qubit: q,
                    angle: x,
                },
                Rotation {
                    axis: b,
                    qubit: r,
                    angle: y,
                },
            ) if a == b && q == r => {
                let angle = x + y;
                Some((angle.abs() >= ZERO_ANGLE).then_some(Rotation {
                    axis: a,
                    qubit: q,
                    angle,
                }))
            }
            (H(q), H(r)) | (X(q), X(r)) | (S(q), Sdg(r)) | (Sdg(q), S(r)) if q == r => Some(None),
            (Cx { control: c, target: t }, Cx { control: d, target: u }) if c == d && t == u => Some(None),
            _ => None,
        }
    }
}

/// Origin of an emitted circuit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CircuitMetadata {
    pub n_steps: usize,
    pub schedule: Option<PathwaySchedule>,
}

/// Ordered gate sequence on a fixed register; the first gate acts first.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GateList {
    n_qubits: usize,
    gates: Vec<Gate>,
    pub metadata: CircuitMetadata,
}

impl GateList {
    pub fn new(n_qubits: usize) -> Self {
        Self {
            n_qubits,
            gates: Vec::new(),
            metadata: CircuitMetadata {
                n_steps: 0,
                schedule: None,
            },
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

    /// Appends a gate after checking indices and angle.
    pub fn push(&mut self, gate: Gate) -> Result<()> {
        for q in gate.qubits() {
            if q >= self.n_qubits {
                return Err(Error::QubitOutOfRange {
                    qubit: q,
                    n_qubits: self.n_qubits,
                });
            }
        }
        match gate {
            Gate::Cx { control, target } if control == target => {
                return Err(Error::InvalidParameter("CX control equals target".into()));
            }
            Gate::Rotation { angle, .. } if !angle.is_finite() => {
                return Err(Error::InvalidParameter(format!("non-finite rotation angle {angle}")));
            }
            _ => {}
        }
        self.gates.push(gate);
        Ok(())
    }

    pub fn extend(&mut self, other: &GateList) -> Result<()> {
        check_size(self.n_qubits, other.n_qubits)?;
        other.gates.iter().try_for_each(|&g| self.push(g))
    }

    pub fn cx_count(&self) -> usize {
        self.gates.iter().filter(|g| g.is_two_qubit()).count()
    }

    /// Appends `exp(−iθP)`; the coefficient of `p` is ignored.
    pub fn push_pauli_rotation(&mut self, p: &PauliString, theta: f64) -> Result<()> {
        check_size(self.n_qubits, p.n_qubits())?;
        let support = p.support();
        let Some(&last) = support.last() else {
            return Ok(());
        };
        let change = |list: &mut GateList, undo: bool| -> Result<()> {
            for &q in &support {
                match (p.pauli(q), undo) {
                    (Pauli::X, _) => list.push(Gate::H(q))?,
                    (Pauli::Y, false) => {
                        list.push(Gate::Sdg(q))?;
                        list.push(Gate::H(q))?;
                    }
                    (Pauli::Y, true) => {
                        list.push(Gate::H(q))?;
                        list.push(Gate::S(q))?;
                    }
                    _ => {}
                }
            }
            Ok(())
        };
        change(self, false)?;
        for w in support.windows(2) {
            self.push(Gate::Cx {
                control: w[0],
                target: w[1],
            })?;
        }
        self.push(Gate::rz(last, 2.0 * theta))?;
        for w in support.windows(2).rev() {
            self.push(Gate::Cx {
                control: w[0],
                target: w[1],
            })?;
        }
        change(self, true)
    }
}

/// `R_Y(φ)` on the electronic qubit and X on the photon: `|Ψ₀⟩⊗|1⟩` for the
/// two-level model with `φ = arctan(−g/ε)`.
pub fn two_level_ground_prep(phi: f64) -> GateList {
    let mut g = GateList::new(2);
    g.gates = vec![Gate::ry(0, phi), Gate::X(1)];
    g
}

/// `ground_prep` followed by every first-order Trotter step of the schedule.
pub fn emit_trotter_circuit(cs: &CoupledSystem, sched: &PathwaySchedule, ground_prep: &GateList) -> Result<GateList> {
    check_size(cs.n_qubits(), ground_prep.n_qubits())?;
    let layout = cs.trotter_layout()?;
    let dt = sched.dt();
    let mut out = ground_prep.clone();
    for (_, omega, lambda) in sched.grid() {
        for term in layout.terms() {
            out.push_pauli_rotation(&term.string, dt * term.coefficient(omega, lambda))?;
        }
    }
    out.metadata = CircuitMetadata {
        n_steps: sched.n_steps,
        schedule: Some(*sched),
    };
    Ok(out)
}

/// Removes rotations below [`ZERO_ANGLE`], fuses same-axis rotations and
/// cancels self-inverse pairs that meet once commuting-by-disjointness is
/// taken into account. Repeats until nothing changes.
pub fn peephole_optimize(g: &GateList) -> GateList {
    let mut gates: Vec<Gate> = g.gates.clone();
    loop {
        let before = gates.len();
        let mut out: Vec<Gate> = Vec::with_capacity(gates.len());
        for gate in gates {
            if let Gate::Rotation { angle, .. } = gate {
                if angle.abs() < ZERO_ANGLE {
                    continue;
                }
            }
            let qubits = gate.qubits();
            let blocker = out.iter().rposition(|h| h.qubits().iter().any(|q| qubits.contains(q)));
            match blocker.and_then(|i| out[i].merge(&gate).map(|m| (i, m))) {
                Some((i, Some(merged))) => out[i] = merged,
                Some((i, None)) => {
                    out.remove(i);
                }
                None => out.push(gate),
            }
        }
        gates = out;
        if gates.len() == before {
            break;
        }
    }
    GateList {
        n_qubits: g.n_qubits,
        gates,
        metadata: g.metadata.clone(),
    }
}

fn apply_single(amps: &mut [Complex64], qubit: usize, m: [[Complex64; 2]; 2]) {
    let bit = 1usize << qubit;
    for b in (0..amps.len()).filter(|b| b & bit == 0) {
        let (a0, a1) = (amps[b], amps[b | bit]);
        amps[b] = m[0][0] * a0 + m[0][1] * a1;
        amps[b | bit] = m[1][0] * a0 + m[1][1] * a1;
    }
}

fn gate_matrix(gate: &Gate) -> Option<[[Complex64; 2]; 2]> {
    let c = |re: f64, im: f64| Complex64::new(re, im);
    let r = std::f64::consts::FRAC_1_SQRT_2;
    Some(match *gate {
        Gate::Rotation { axis, angle, .. } => {
            let (s, co) = (angle / 2.0).sin_cos();
            match axis {
                Axis::X => [[c(co, 0.0), c(0.0, -s)], [c(0.0, -s), c(co, 0.0)]],
                Axis::Y => [[c(co, 0.0), c(-s, 0.0)], [c(s, 0.0), c(co, 0.0)]],
                Axis::Z => [[c(co, -s), c(0.0, 0.0)], [c(0.0, 0.0), c(co, s)]],
            }
        }
        Gate::H(_) => [[c(r, 0.0), c(r, 0.0)], [c(r, 0.0), c(-r, 0.0)]],
        Gate::S(_) => [[c(1.0, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(0.0, 1.0)]],
        Gate::Sdg(_) => [[c(1.0, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(0.0, -1.0)]],
        Gate::X(_) => [[c(0.0, 0.0), c(1.0, 0.0)], [c(1.0, 0.0), c(0.0, 0.0)]],
        Gate::Cx { .. } => return None,
    })
}

/// Runs the circuit on a statevector.
pub fn simulate(g: &GateList, initial: &StateVector) -> Result<StateVector> {
    check_size(g.n_qubits, initial.n_qubits())?;
    let mut state = initial.clone();
    let amps = state.amplitudes_mut();
    for gate in &g.gates {
        match (gate, gate_matrix(gate)) {
            (Gate::Cx { control, target }, _) => {
                let (c, t) = (1usize << control, 1usize << target);
                for b in (0..amps.len()).filter(|b| b & c != 0 && b & t == 0) {
                    amps.swap(b, b | t);
                }
            }
            (_, Some(m)) => apply_single(amps, gate.qubits()[0], m),
            (_, None) => unreachable!("every single-qubit gate has a matrix"),
        }
    }
    Ok(state)
}

/// Dense unitary of the circuit; column `b` is the image of `|b⟩`.
pub fn unitary(g: &GateList) -> Result<DMatrix<Complex64>> {
    let dim = 1usize << g.n_qubits;
    let mut u = DMatrix::zeros(dim, dim);
    for b in 0..dim {
        let col = simulate(g, &StateVector::basis(g.n_qubits, b))?;
        u.column_mut(b).copy_from_slice(col.amplitudes());
    }
    Ok(u)
}

const QASM_HEADER: &str = "OPENQASM 2.0;\ninclude \"qelib1.inc\";\n";

/// OpenQASM 2.0 text: header, one `qreg q[n];`, one gate per line. Metadata
/// travels in `// steps` and `// schedule` comment lines.
pub fn write_qasm(g: &GateList) -> String {
    let mut s = String::from(QASM_HEADER);
    let _ = writeln!(s, "// steps {}", g.metadata.n_steps);
    if let Some(sc) = &g.metadata.schedule {
        let _ = writeln!(
            s,
            "// schedule {} {} {} {}",
            sc.omega_max, sc.lambda_max, sc.total_time, sc.n_steps
        );
    }
    let _ = writeln!(s, "qreg q[{}];", g.n_qubits);
    for gate in &g.gates {
        let _ = match *gate {
            Gate::Rotation { axis, qubit, angle } => {
                let name = match axis {
                    Axis::X => "rx",
                    Axis::Y => "ry",
                    Axis::Z => "rz",
                };
                writeln!(s, "{name}({angle:?}) q[{qubit}];")
            }
            Gate::H(q) => writeln!(s, "h q[{q}];"),
            Gate::S(q) => writeln!(s, "s q[{q}];"),
            Gate::Sdg(q) => writeln!(s, "sdg q[{q}];"),
            Gate::X(q) => writeln!(s, "x q[{q}];"),
            Gate::Cx { control, target } => writeln!(s, "cx q[{control}],q[{target}];"),
        };
    }
    s
}

fn qasm_error(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        path: "<qasm>".into(),
        line,
        message: message.into(),
    }
}

fn parse_qubit(token: &str, line: usize) -> Result<usize> {
    token
        .trim()
        .strip_prefix("q[")
        .and_then(|t| t.strip_suffix(']'))
        .and_then(|t| t.parse().ok())
        .ok_or_else(|| qasm_error(line, format!("bad qubit operand `{token}`")))
}

fn parse_number<T: FromStr>(token: &str, line: usize) -> Result<T> {
    token
        .trim()
        .parse()
        .map_err(|_| qasm_error(line, format!("bad number `{token}`")))
}

/// Inverse of [`write_qasm`].
pub fn parse_qasm(text: &str) -> Result<GateList> {
    let mut list: Option<GateList> = None;
    let mut metadata = CircuitMetadata {
        n_steps: 0,
        schedule: None,
    };
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let t = raw.trim();
        if let Some(comment) = t.strip_prefix("//") {
            let mut words = comment.split_whitespace();
            match words.next() {
                Some("steps") => metadata.n_steps = parse_number(words.next().unwrap_or(""), line)?,
                Some("schedule") => {
                    let v: Vec<&str> = words.collect();
                    if v.len() != 4 {
                        return Err(qasm_error(line, "schedule needs four fields"));
                    }
                    metadata.schedule = Some(PathwaySchedule::new(
                        parse_number(v[0], line)?,
                        parse_number(v[1], line)?,
                        parse_number(v[2], line)?,
                        parse_number(v[3], line)?,
                    )?);
                }
                _ => {}
            }
            continue;
        }
        if t.is_empty() || t.starts_with("OPENQASM") || t.starts_with("include") {
            continue;
        }
        let body = t.strip_suffix(';').ok_or_else(|| qasm_error(line, "missing `;`"))?;
        if let Some(reg) = body.strip_prefix("qreg ") {
            let n = parse_qubit(reg, line)?;
            list = Some(GateList::new(n));
            continue;
        }
        let g = list
            .as_mut()
            .ok_or_else(|| qasm_error(line, "gate before register declaration"))?;
        let (head, operands) = body
            .split_once(' ')
            .ok_or_else(|| qasm_error(line, "missing operands"))?;
        let (name, angle) = match head.split_once('(') {
            Some((n, rest)) => {
                let a = rest
                    .strip_suffix(')')
                    .ok_or_else(|| qasm_error(line, "unclosed angle"))?;
                (n, Some(parse_number::<f64>(a, line)?))
            }
            None => (head, None),
        };
        let qubits = operands
            .split(',')
            .map(|o| parse_qubit(o, line))
            .collect::<Result<Vec<_>>>()?;
        let gate = match (name, angle, qubits.as_slice()) {
            ("rx", Some(a), [q]) => Gate::rx(*q, a),
            ("ry", Some(a), [q]) => Gate::ry(*q, a),
            ("rz", Some(a), [q]) => Gate::rz(*q, a),
            ("h", None, [q]) => Gate::H(*q),
            ("s", None, [q]) => Gate::S(*q),
            ("sdg", None, [q]) => Gate::Sdg(*q),
            ("x", None, [q]) => Gate::X(*q),
            ("cx", None, [c, t]) => Gate::Cx {
                control: *c,
                target: *t,
            },
            _ => return Err(qasm_error(line, format!("unsupported instruction `{body}`"))),
        };
        g.push(gate).map_err(|e| qasm_error(line, e.to_string()))?;
    }
    let mut g = list.ok_or_else(|| qasm_error(0, "no register declared"))?;
    g.metadata = metadata;
    Ok(g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dense::expm_unitary;
    use crate::models::{build_two_level, two_level_ground_angle, two_level_ground_state, TwoLevelParams};
    use crate::pauli::PauliSum;
    use crate::propagator::{apply_trotter_step, prepare_initial};

    fn unitary_distance(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> f64 {
        // phase-insensitive: 1 − |tr(a†b)|/dim
        1.0 - (a.adjoint() * b).trace().norm() / a.nrows() as f64
    }

    fn two_level(n_steps: usize) -> (CoupledSystem, PathwaySchedule, GateList, StateVector) {
        let p = TwoLevelParams {
            epsilon: 1.0,
            g: 1.0,
            mu: 1.0,
        };
        let sys = build_two_level(p).unwrap();
        let ground = two_level_ground_state(p);
        let cs = CoupledSystem::couple(sys, [0.0, 0.0, 1.0]).unwrap();
        let sched = PathwaySchedule::new(5.0, 1.0, 20.0, n_steps).unwrap();
        let prep = two_level_ground_prep(two_level_ground_angle(p));
        let psi0 = prepare_initial(&cs, &ground).unwrap();
        (cs, sched, prep, psi0)
    }

    #[test]
    fn single_z_term_is_one_rotation() {
        let mut g = GateList::new(2);
        g.push_pauli_rotation(&PauliString::from_label("ZI", 1.0).unwrap(), 0.3)
            .unwrap();
        assert_eq!(g.gates(), &[Gate::rz(0, 0.6)]);
    }

    #[test]
    fn pauli_rotations_match_dense_exponentials() {
        for label in ["XX", "XY", "YZ", "ZX", "YY", "IY", "XIZ", "YXY"] {
            let p = PauliString::from_label(label, 1.0).unwrap();
            let mut g = GateList::new(p.n_qubits());
            g.push_pauli_rotation(&p, 0.37).unwrap();
            let dense = expm_unitary(
                &PauliSum::from_strings(p.n_qubits(), [p.clone()]).unwrap().to_dense(),
                0.37,
            );
            assert!((unitary(&g).unwrap() - dense).norm() < 1e-12, "{label}");
        }
        let mut g = GateList::new(2);
        g.push_pauli_rotation(&PauliString::from_label("XX", 1.0).unwrap(), 0.2)
            .unwrap();
        assert_eq!(
            g.gates(),
            &[
                Gate::H(0),
                Gate::H(1),
                Gate::Cx { control: 0, target: 1 },
                Gate::rz(1, 0.4),
                Gate::Cx { control: 0, target: 1 },
                Gate::H(0),
                Gate::H(1)
            ]
        );
    }

    #[test]
    fn two_level_prep_gates() {
        let (_, _, prep, psi0) = two_level(1);
        let phi = (-1.0f64).atan();
        assert_eq!(prep.gates(), &[Gate::ry(0, phi), Gate::X(1)]);
        let out = simulate(&prep, &StateVector::zero(2)).unwrap();
        assert!((out.fidelity(&psi0).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn emitted_circuit_tracks_trotter_propagator() {
        let (cs, sched, prep, psi0) = two_level(12);
        let circuit = emit_trotter_circuit(&cs, &sched, &prep).unwrap();
        let layout = cs.trotter_layout().unwrap();
        let mut state = psi0;
        for (_, w, l) in sched.grid() {
            apply_trotter_step(&mut state, &layout, w, l, sched.dt()).unwrap();
        }
        let simulated = simulate(&circuit, &StateVector::zero(2)).unwrap();
        assert!((simulated.fidelity(&state).unwrap() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn peephole_rules() {
        let mut g = GateList::new(2);
        for gate in [
            Gate::rz(0, 0.2),
            Gate::rz(0, 0.3),
            Gate::Cx { control: 0, target: 1 },
            Gate::rx(1, 1e-14),
            Gate::Cx { control: 0, target: 1 },
            Gate::H(1),
            Gate::rz(0, 0.1),
            Gate::H(1),
        ] {
            g.push(gate).unwrap();
        }
        let opt = peephole_optimize(&g);
        assert_eq!(opt.gates(), &[Gate::rz(0, 0.6)]);
    }

    #[test]
    fn peephole_preserves_unitary_and_cuts_cx() {
        let (cs, sched, prep, _) = two_level(40);
        let circuit = emit_trotter_circuit(&cs, &sched, &prep).unwrap();
        let opt = peephole_optimize(&circuit);
        assert!(opt.cx_count() < circuit.cx_count());
        assert!(unitary_distance(&unitary(&circuit).unwrap(), &unitary(&opt).unwrap()) < 1e-10);
    }

    #[test]
    fn qasm_round_trip() {
        let (cs, sched, prep, _) = two_level(2);
        let circuit = emit_trotter_circuit(&cs, &sched, &prep).unwrap();
        let text = write_qasm(&circuit);
        assert!(text.starts_with("OPENQASM 2.0;"));
        assert_eq!(parse_qasm(&text).unwrap(), circuit);
        let empty = GateList::new(3);
        assert_eq!(write_qasm(&empty), format!("{QASM_HEADER}// steps 0\nqreg q[3];\n"));
        assert_eq!(parse_qasm(&write_qasm(&empty)).unwrap(), empty);
        assert!(parse_qasm("qreg q[1];\ncx q[0],q[0];\n").is_err());
        assert!(parse_qasm("qreg q[1];\nfoo q[0];\n").is_err());
    }
}
