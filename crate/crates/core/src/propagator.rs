//! Time evolution along the schedule, exact or first-order Trotterized.
//!
//! Step `k` applies `exp(−i δT Ĥ(s_k))` with `s_k = k/N`. Trace row `k` holds
//! the state after `k` steps, evaluated with `Ĥ(s = k/N)`; row 0 is the
//! initial state.

use std::io::Write;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{check_size, Error, Result};
use crate::krylov::{KrylovOptions, KrylovStats};
use crate::operator::PauliOperator;
use crate::pathway::PathwaySchedule;
use crate::pauli::PauliSum;
use crate::pauli_fierz::{CoupledSystem, TrotterLayout};
use crate::statevector::{StateVector, MIN_PROJECTION_PROBABILITY};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Exact,
    Trotter,
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "exact" => Ok(Method::Exact),
            "trotter" => Ok(Method::Trotter),
            other => Err(Error::InvalidParameter(format!(
                "unknown propagation method {other:?} (expected exact or trotter)"
            ))),
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Method::Exact => "exact",
            Method::Trotter => "trotter",
        })
    }
}

/// Recording interval: every step up to 1000 steps, otherwise `⌈N/1000⌉`.
pub fn default_record_every(n_steps: usize) -> usize {
    if n_steps <= 1000 {
        1
    } else {
        n_steps.div_ceil(1000)
    }
}

/// One trace row. Post-selected quantities are NaN when the vacuum branch
/// is empty.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub step: usize,
    pub s: f64,
    pub omega: f64,
    pub lambda: f64,
    pub e_total: f64,
    pub e_electronic: f64,
    pub e_postselected: f64,
    pub p_photon0: f64,
    pub fid_target_raw: f64,
    pub fid_target_post: f64,
    pub fid_initial: f64,
}

/// CSV column names, in order.
pub const TRACE_COLUMNS: [&str; 11] = [
    "step",
    "s",
    "omega",
    "lambda",
    "e_total",
    "e_electronic",
    "e_postselected",
    "p_photon0",
    "fid_target_raw",
    "fid_target_post",
    "fid_initial",
];

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PropagationTrace {
    pub rows: Vec<TraceRow>,
}

impl PropagationTrace {
    pub fn last(&self) -> Option<&TraceRow> {
        self.rows.last()
    }

    /// Header plus one line per row; floats in `{:.16e}` (17 significant
    /// digits).
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "{}", TRACE_COLUMNS.join(","))?;
        for r in &self.rows {
            writeln!(
                out,
                "{},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
                r.step,
                r.s,
                r.omega,
                r.lambda,
                r.e_total,
                r.e_electronic,
                r.e_postselected,
                r.p_photon0,
                r.fid_target_raw,
                r.fid_target_post,
                r.fid_initial
            )?;
        }
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("ASCII output")
    }
}

#[derive(Clone, Debug)]
pub struct EvolveOptions {
    pub method: Method,
    /// Rows are kept every `record_every` steps, plus the final one.
    pub record_every: usize,
    pub krylov: KrylovOptions,
    /// Electronic target; the raw fidelity is taken against `target ⊗ |0⟩`.
    pub target: Option<StateVector>,
}

impl EvolveOptions {
    pub fn new(method: Method) -> Self {
        Self {
            method,
            record_every: 1,
            krylov: KrylovOptions::default(),
            target: None,
        }
    }

    pub fn with_target(mut self, target: StateVector) -> Self {
        self.target = Some(target);
        self
    }

    pub fn with_record_every(mut self, every: usize) -> Self {
        self.record_every = every.max(1);
        self
    }
}

#[derive(Clone, Debug)]
pub struct Evolution {
    pub final_state: StateVector,
    pub trace: PropagationTrace,
    /// Phase `Σ_k δT·c₀(s_k)` of the identity terms dropped by Trotter steps.
    pub global_phase: f64,
    pub krylov: KrylovStats,
}

/// `|Ψ_e⟩ ⊗ |1⟩`.
pub fn prepare_initial(cs: &CoupledSystem, ground: &StateVector) -> Result<StateVector> {
    check_size(cs.n_electronic_qubits(), ground.n_qubits())?;
    StateVector::init_product(ground, 1)
}

/// One first-order Trotter step in layout order. Returns the dropped
/// identity phase `δT·c₀`.
pub fn apply_trotter_step(
    state: &mut StateVector,
    layout: &TrotterLayout,
    omega: f64,
    lambda: f64,
    dt: f64,
) -> Result<f64> {
    check_size(state.n_qubits(), layout.n_qubits())?;
    for term in layout.terms() {
        let c = term.coefficient(omega, lambda);
        if c != 0.0 {
            state.apply_pauli_rotation(&term.string, dt * c)?;
        }
    }
    Ok(dt * layout.identity_coefficient(omega, lambda))
}

/// Trotter step of a time-independent Hermitian sum, diagonal strings first.
pub fn trotter_step_static(state: &mut StateVector, h: &PauliSum, dt: f64) -> Result<f64> {
    let layout = TrotterLayout::from_static(h)?;
    apply_trotter_step(state, &layout, 0.0, 0.0, dt)
}

struct Observer {
    h_e: PauliOperator,
    target: Option<StateVector>,
    initial: StateVector,
}

impl Observer {
    fn row(&self, state: &StateVector, h: &PauliOperator, step: usize, s: f64, omega: f64, lambda: f64) -> TraceRow {
        let amps = state.amplitudes();
        let e_total = h.expectation(amps).re;
        let e_electronic = self.h_e.expectation(amps).re;
        let vacuum = state.high_qubit_slice(0);
        let p0: f64 = vacuum.iter().map(|a| a.norm_sqr()).sum();
        let e_postselected = if p0 >= MIN_PROJECTION_PROBABILITY {
            let mut v = vacuum.to_vec();
            v.resize(amps.len(), Complex64::new(0.0, 0.0));
            self.h_e.expectation(&v).re / p0
        } else {
            f64::NAN
        };
        let (fid_raw, fid_post) = match &self.target {
            Some(t) => {
                let overlap: Complex64 = t.amplitudes().iter().zip(vacuum).map(|(a, b)| a.conj() * b).sum();
                let raw = overlap.norm_sqr();
                let post = if p0 >= MIN_PROJECTION_PROBABILITY {
                    raw / p0
                } else {
                    f64::NAN
                };
                (raw, post)
            }
            None => (f64::NAN, f64::NAN),
        };
        let fid_initial = self.initial.fidelity(state).expect("same register");
        TraceRow {
            step,
            s,
            omega,
            lambda,
            e_total,
            e_electronic,
            e_postselected,
            p_photon0: p0,
            fid_target_raw: fid_raw,
            fid_target_post: fid_post,
            fid_initial,
        }
    }
}

/// Propagates `psi0` through all `N` steps of `sched`.
pub fn evolve(
    cs: &CoupledSystem,
    sched: &PathwaySchedule,
    psi0: &StateVector,
    opts: &EvolveOptions,
) -> Result<Evolution> {
    check_size(cs.n_qubits(), psi0.n_qubits())?;
    if let Some(t) = &opts.target {
        check_size(cs.n_electronic_qubits(), t.n_qubits())?;
    }
    let observer = Observer {
        h_e: PauliOperator::new(cs.electronic_hamiltonian()),
        target: opts.target.clone(),
        initial: psi0.clone(),
    };
    let layout = match opts.method {
        Method::Trotter => Some(cs.trotter_layout()?),
        Method::Exact => None,
    };
    let every = opts.record_every.max(1);
    let n = sched.n_steps;
    let dt = sched.dt();
    let mut state = psi0.clone();
    let mut trace = PropagationTrace::default();
    let mut global_phase = 0.0;
    let mut stats = KrylovStats::default();

    let point = |k: usize| -> Result<(f64, f64, f64)> {
        let s = sched.s(k);
        Ok((s, sched.omega(s)?, sched.lambda(s)?))
    };

    let (s, omega, lambda) = point(0)?;
    let mut op = PauliOperator::new(&cs.hamiltonian_at(omega, lambda)?);
    trace.rows.push(observer.row(&state, &op, 0, s, omega, lambda));
    for k in 0..n {
        let (_, omega, lambda) = point(k)?;
        match &layout {
            Some(layout) => {
                global_phase += apply_trotter_step(&mut state, layout, omega, lambda, dt)?;
            }
            None => {
                let step = state.evolve_with(&op, dt, &opts.krylov)?;
                stats.matvecs += step.matvecs;
                stats.substeps += step.substeps;
                stats.max_dim = stats.max_dim.max(step.max_dim);
            }
        }
        let next = k + 1;
        let (s, omega, lambda) = point(next)?;
        let record = next % every == 0 || next == n;
        if record || layout.is_none() {
            op = PauliOperator::new(&cs.hamiltonian_at(omega, lambda)?);
        }
        if record {
            trace.rows.push(observer.row(&state, &op, next, s, omega, lambda));
        }
    }
    Ok(Evolution {
        final_state: state,
        trace,
        global_phase,
        krylov: stats,
    })
}
