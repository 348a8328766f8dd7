//! Subcommand implementations. Each returns its outputs in memory; `main`
//! writes them to disk.

use std::fmt::Write as _;
use std::time::Instant;

use anyhow::{anyhow, bail, Context, Result};
use exasp::analysis::{fidelity_report, pathway_spectrum, FidelityReport};
use exasp::circuit::{emit_trotter_circuit, peephole_optimize, two_level_ground_prep, write_qasm, Gate, GateList};
use exasp::ground_state::{optimize, BhptConfig, Checkpoint, TupsAnsatz};
use exasp::models::{
    build_hubbard, build_molecular, build_two_level, exact_diagonalize, find_first_bright_state,
    two_level_ground_angle, BrightState, ElectronicSystem, HubbardParams, MolecularIntegrals, Spectrum, TwoLevelParams,
    BRIGHT_THRESHOLD,
};
use exasp::pathway::{adiabatic_time_bound, PathwaySchedule, BOUND_GRID};
use exasp::pauli_fierz::CoupledSystem;
use exasp::propagator::{default_record_every, evolve, prepare_initial, EvolveOptions, PropagationTrace, TraceRow};
use exasp::StateVector;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{from_table, parse_value, Config, ModelKind, OmegaMax, KEYS};

/// Largest coupled-sector dimension for which runs report the adiabatic
/// time bound.
pub const BOUND_MAX_DIM: usize = 512;

/// Electronic model plus the shape of a matching tUPS ansatz.
pub struct Model {
    pub sys: ElectronicSystem,
    /// `(orbitals, electrons, 2·M_s)`; `None` for the two-level model.
    pub orbitals: Option<(usize, usize, i32)>,
    pub two_level: Option<TwoLevelParams>,
}

pub fn build_model(cfg: &Config) -> Result<Model> {
    Ok(match cfg.model {
        ModelKind::Twolevel => {
            let p = TwoLevelParams {
                epsilon: cfg.epsilon,
                g: cfg.g,
                mu: cfg.mu,
            };
            Model {
                sys: build_two_level(p)?,
                orbitals: None,
                two_level: Some(p),
            }
        }
        ModelKind::Hubbard => {
            let mut p = HubbardParams::half_filled(cfg.sites, cfg.u);
            p.t = cfg.hopping;
            if let Some(n) = cfg.electrons {
                p.n_electrons = n;
            }
            Model {
                sys: build_hubbard(&p)?,
                orbitals: Some((p.n_sites, p.n_electrons, p.two_ms())),
                two_level: None,
            }
        }
        ModelKind::Molecule => {
            let path = cfg
                .integrals
                .as_deref()
                .ok_or_else(|| anyhow!("`integrals` is required"))?;
            let ints = MolecularIntegrals::from_files(path, cfg.dipoles.as_deref())?;
            Model {
                sys: build_molecular(&ints)?,
                orbitals: Some((ints.n_orbitals, ints.n_electrons, ints.ms2)),
                two_level: None,
            }
        }
    })
}

fn unit(p: [f64; 3]) -> Result<[f64; 3]> {
    let norm = p.iter().map(|x| x * x).sum::<f64>().sqrt();
    if !(norm.is_finite() && norm > 0.0) {
        bail!("configuration key `polarization` must be a nonzero vector");
    }
    Ok(p.map(|x| x / norm))
}

/// Everything a propagation needs besides its initial state.
pub struct Problem {
    pub model: Model,
    pub cs: CoupledSystem,
    pub spectrum: Spectrum,
    pub bright: BrightState,
    pub sched: PathwaySchedule,
}

impl Problem {
    pub fn new(cfg: &Config) -> Result<Self> {
        let model = build_model(cfg)?;
        let e = unit(cfg.polarization.0)?;
        let spectrum = exact_diagonalize(&model.sys, model.sys.sector)?;
        let bright = find_first_bright_state(&spectrum, &model.sys.projected_dipole(e), BRIGHT_THRESHOLD)?;
        let omega_max = match cfg.omega_max {
            OmegaMax::Auto => 2.0 * bright.excitation_energy,
            OmegaMax::Value(w) => w,
        };
        let sched = match cfg.steps {
            Some(n) => PathwaySchedule::new(omega_max, cfg.lambda_max, cfg.total_time, n)?,
            None => PathwaySchedule::from_time_step(omega_max, cfg.lambda_max, cfg.total_time, cfg.dt)?,
        };
        let cs = CoupledSystem::couple(model.sys.clone(), e)?;
        Ok(Self {
            model,
            cs,
            spectrum,
            bright,
            sched,
        })
    }

    fn ansatz(&self, layers: usize) -> Result<TupsAnsatz> {
        let (n_orbitals, n_electrons, two_ms) = self
            .model
            .orbitals
            .ok_or_else(|| anyhow!("tUPS states need an orbital model (hubbard or molecule)"))?;
        Ok(TupsAnsatz::new(n_orbitals, layers, n_electrons, two_ms)?)
    }

    /// Weight of `state` outside the exact ground level.
    fn ground_infidelity(&self, state: &StateVector) -> Result<f64> {
        let weight = self
            .spectrum
            .cluster(0)
            .map(|k| self.spectrum.state(k).fidelity(state))
            .sum::<exasp::Result<f64>>()?;
        Ok(1.0 - weight)
    }
}

pub fn bhpt_config(cfg: &Config) -> BhptConfig {
    BhptConfig {
        n_replicas: cfg.replicas,
        n_steps: cfg.bhpt_steps,
        seed: cfg.seed,
        ..BhptConfig::default()
    }
}

/// Electronic initial state and where it came from.
pub struct Initial {
    pub state: StateVector,
    pub source: &'static str,
    pub eps_initial: f64,
}

pub fn initial_state(cfg: &Config, problem: &Problem) -> Result<Initial> {
    let state = if let Some(path) = &cfg.checkpoint {
        let ckpt = Checkpoint::load(path).with_context(|| format!("loading checkpoint {}", path.display()))?;
        let expected = problem.ansatz(ckpt.ansatz.n_layers)?;
        if ckpt.ansatz != expected {
            bail!("checkpoint {} does not match the configured model", path.display());
        }
        (ckpt.state()?, "checkpoint")
    } else if let Some(layers) = cfg.layers {
        let opt = optimize(&problem.ansatz(layers)?, &problem.model.sys.h_e, &bhpt_config(cfg))?;
        (opt.state, "tups")
    } else {
        (problem.spectrum.state(0), "exact")
    };
    Ok(Initial {
        eps_initial: problem.ground_infidelity(&state.0)?.max(0.0),
        state: state.0,
        source: state.1,
    })
}

/// Summary of one `run`.
#[derive(Clone, Debug, Serialize)]
pub struct RunSummary {
    pub model: ModelKind,
    pub n_qubits: usize,
    pub n_steps: usize,
    pub dt: f64,
    pub omega_max: f64,
    pub lambda_max: f64,
    pub total_time: f64,
    pub ground_energy: f64,
    pub target_index: usize,
    pub target_energy: f64,
    pub excitation_energy: f64,
    pub transition_dipole: f64,
    pub initial_state: &'static str,
    pub eps_initial: f64,
    pub final_row: TraceRow,
    pub fidelity: FidelityReport,
    /// `null` when the sector is too large or the bound diverges.
    pub adiabatic_time_bound: Option<f64>,
    pub krylov_matvecs: usize,
    pub seed: u64,
    pub wall_time_s: f64,
    pub config: Config,
}

pub fn run(cfg: &Config) -> Result<(PropagationTrace, RunSummary)> {
    let start = Instant::now();
    let problem = Problem::new(cfg)?;
    let initial = initial_state(cfg, &problem)?;
    let psi0 = prepare_initial(&problem.cs, &initial.state)?;
    let every = cfg
        .record_every
        .unwrap_or_else(|| default_record_every(problem.sched.n_steps));
    let opts = EvolveOptions::new(cfg.method)
        .with_target(problem.bright.state.clone())
        .with_record_every(every);
    let ev = evolve(&problem.cs, &problem.sched, &psi0, &opts)?;
    let fidelity = fidelity_report(&ev.final_state, &problem.cs, &problem.bright.state)?;
    let final_row = *ev.trace.last().ok_or_else(|| anyhow!("empty trace"))?;
    let adiabatic_time_bound = if problem.cs.sector_basis()?.len() <= BOUND_MAX_DIM {
        // the initial |Ψ₀⟩⊗|1⟩ sits just above the ground level at small s
        let followed = problem.spectrum.cluster(0).end;
        Some(adiabatic_time_bound(&problem.cs, &problem.sched, followed, BOUND_GRID)?).filter(|b| b.is_finite())
    } else {
        None
    };
    let summary = RunSummary {
        model: cfg.model,
        n_qubits: problem.cs.n_qubits(),
        n_steps: problem.sched.n_steps,
        dt: problem.sched.dt(),
        omega_max: problem.sched.omega_max,
        lambda_max: problem.sched.lambda_max,
        total_time: problem.sched.total_time,
        ground_energy: problem.spectrum.energy(0),
        target_index: problem.bright.index,
        target_energy: problem.bright.energy,
        excitation_energy: problem.bright.excitation_energy,
        transition_dipole: problem.bright.transition_dipole,
        initial_state: initial.source,
        eps_initial: initial.eps_initial,
        final_row,
        fidelity,
        adiabatic_time_bound,
        krylov_matvecs: ev.krylov.matvecs,
        seed: cfg.seed,
        wall_time_s: start.elapsed().as_secs_f64(),
        config: cfg.clone(),
    };
    Ok((ev.trace, summary))
}

/// One swept configuration key and its values in sweep order.
#[derive(Clone, Debug)]
pub struct Axis {
    pub key: String,
    pub values: Vec<String>,
}

const UNSWEEPABLE: [&str; 3] = ["output", "workers", "sweep"];

pub fn parse_axes(specs: &[String]) -> Result<Vec<Axis>> {
    if specs.is_empty() {
        bail!("a sweep needs at least one `KEY=V1,V2,...` axis");
    }
    if specs.len() > 2 {
        bail!("at most two swept axes are supported, got {}", specs.len());
    }
    let axes = specs
        .iter()
        .map(|spec| {
            let (key, values) = spec
                .split_once('=')
                .ok_or_else(|| anyhow!("sweep axis {spec:?} is not of the form KEY=V1,V2,..."))?;
            let key = key.trim();
            if !KEYS.contains(&key) || UNSWEEPABLE.contains(&key) {
                bail!("configuration key `{key}` cannot be swept");
            }
            let values: Vec<String> = values
                .split(',')
                .map(|v| v.trim().to_string())
                .filter(|v| !v.is_empty())
                .collect();
            if values.is_empty() {
                bail!("sweep axis `{key}` has an empty range");
            }
            Ok(Axis {
                key: key.into(),
                values,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    if axes.len() == 2 && axes[0].key == axes[1].key {
        bail!("sweep axis `{}` given twice", axes[0].key);
    }
    Ok(axes)
}

/// Column names of the aggregated sweep CSV after the axis columns.
pub const SWEEP_COLUMNS: [&str; 13] = [
    "n_steps",
    "omega_max",
    "target_energy",
    "eps_initial",
    "e_total",
    "e_electronic",
    "e_postselected",
    "p_photon0",
    "fid_target_raw",
    "fid_target_post",
    "fid_postselected",
    "eps_final",
    "eps_final_raw",
];

/// Cross product of the axes, first axis outermost; one CSV row per run.
pub fn sweep(base: &toml::Table, workers: Option<usize>) -> Result<String> {
    let cfg = from_table(base.clone())?;
    let axes = parse_axes(&cfg.sweep)?;
    let mut points: Vec<Vec<&str>> = vec![Vec::new()];
    for axis in &axes {
        points = points
            .into_iter()
            .flat_map(|p| {
                axis.values.iter().map(move |v| {
                    let mut q = p.clone();
                    q.push(v.as_str());
                    q
                })
            })
            .collect();
    }
    let configs = points
        .iter()
        .map(|values| {
            let mut table = base.clone();
            table.remove("sweep");
            for (axis, v) in axes.iter().zip(values) {
                table.insert(axis.key.clone(), parse_value(v));
            }
            from_table(table)
        })
        .collect::<Result<Vec<_>>>()?;
    let threads = workers.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build()?;
    let summaries = pool.install(|| {
        configs
            .par_iter()
            .map(|c| run(c).map(|(_, s)| s))
            .collect::<Result<Vec<_>>>()
    })?;

    let mut out = String::new();
    let header: Vec<&str> = axes.iter().map(|a| a.key.as_str()).chain(SWEEP_COLUMNS).collect();
    writeln!(out, "{}", header.join(","))?;
    for (values, s) in points.iter().zip(&summaries) {
        let r = &s.final_row;
        let numbers = [
            s.omega_max,
            s.target_energy,
            s.eps_initial,
            r.e_total,
            r.e_electronic,
            r.e_postselected,
            r.p_photon0,
            r.fid_target_raw,
            r.fid_target_post,
            s.fidelity.fid_postselected,
            s.fidelity.eps_final,
            s.fidelity.eps_final_raw,
        ];
        let mut fields: Vec<String> = values.iter().map(|v| v.to_string()).collect();
        fields.push(s.n_steps.to_string());
        fields.extend(numbers.iter().map(|x| format!("{x:.16e}")));
        writeln!(out, "{}", fields.join(","))?;
    }
    Ok(out)
}

/// Pathway eigenvalue scan as CSV.
pub fn spectrum(cfg: &Config) -> Result<String> {
    let problem = Problem::new(cfg)?;
    let initial = initial_state(cfg, &problem)?;
    let start = prepare_initial(&problem.cs, &initial.state)?;
    let target = StateVector::init_product(&problem.bright.state, 0)?;
    let points = pathway_spectrum(&problem.cs, &problem.sched, cfg.points, cfg.n_states, &start, &target)?;
    let n = points.first().map_or(0, |p| p.energies.len());
    let mut out = String::new();
    let mut header = vec![
        "s".to_string(),
        "omega".into(),
        "lambda".into(),
        "followed_index".into(),
        "followed_energy".into(),
        "initial_weight".into(),
        "target_weight".into(),
    ];
    header.extend((0..n).map(|k| format!("e{k}")));
    writeln!(out, "{}", header.join(","))?;
    for p in &points {
        let mut fields = vec![
            format!("{:.16e}", p.s),
            format!("{:.16e}", p.omega),
            format!("{:.16e}", p.lambda),
            p.followed_index.to_string(),
            format!("{:.16e}", p.followed_energy),
            format!("{:.16e}", p.initial_weight),
            format!("{:.16e}", p.target_weight),
        ];
        fields.extend(p.energies.iter().map(|e| format!("{e:.16e}")));
        writeln!(out, "{}", fields.join(","))?;
    }
    Ok(out)
}

/// Optimized tUPS parameters for the configured model.
pub fn ground_state(cfg: &Config) -> Result<Checkpoint> {
    let layers = cfg
        .layers
        .ok_or_else(|| anyhow!("configuration key `layers` is required for ground-state"))?;
    let model = build_model(cfg)?;
    let (n_orbitals, n_electrons, two_ms) = model
        .orbitals
        .ok_or_else(|| anyhow!("ground-state needs an orbital model (hubbard or molecule)"))?;
    let ansatz = TupsAnsatz::new(n_orbitals, layers, n_electrons, two_ms)?;
    let opt = optimize(&ansatz, &model.sys.h_e, &bhpt_config(cfg))?;
    Ok(Checkpoint {
        ansatz,
        params: opt.params,
        energy: opt.energy,
        exact_energy: opt.exact_energy,
        fidelity: opt.fidelity,
    })
}

/// First-order Trotter circuit of the configured pathway.
pub fn emit_circuit(cfg: &Config) -> Result<GateList> {
    let problem = Problem::new(cfg)?;
    let n = problem.cs.n_qubits();
    let prep = match (problem.model.two_level, cfg.skip_prep) {
        (_, true) => {
            // photon starts in |1⟩; the electronic register is left in |0…0⟩
            let mut g = GateList::new(n);
            g.push(Gate::X(problem.cs.photon_qubit()))?;
            g
        }
        (Some(p), false) => two_level_ground_prep(two_level_ground_angle(p)),
        (None, false) => bail!(
            "a ground-state preparation circuit is only built for the two-level model; set `skip_prep` to emit the pathway alone"
        ),
    };
    let circuit = emit_trotter_circuit(&problem.cs, &problem.sched, &prep)?;
    Ok(if cfg.optimize {
        peephole_optimize(&circuit)
    } else {
        circuit
    })
}

pub fn qasm(circuit: &GateList) -> String {
    write_qasm(circuit)
}
