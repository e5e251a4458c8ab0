use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use scrl::dp::value_iteration;
use scrl::product::{ContinuousEnv, InitialState, Interpreter, Policy, RewardConfig};
use scrl::qlearn::{
    evaluate, extract_policy, initial_observation, reported_value, train, LearnedPolicy, QTable,
};
use scrl::quantize::{build_finite_mdp, build_grid, policy_interval, Grid};
use scrl::scltl::{compile_str, Dfa, Props};

use crate::config::{Resolution, RunConfig, SystemId};
use crate::error::CliError;

fn create_out_dir(dir: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(dir).map_err(CliError::io(dir))
}

fn write_file<F>(path: &Path, body: F) -> Result<(), CliError>
where
    F: FnOnce(&mut BufWriter<File>) -> std::io::Result<()>,
{
    let file = File::create(path).map_err(CliError::io(path))?;
    let mut w = BufWriter::new(file);
    body(&mut w)
        .and_then(|_| w.flush())
        .map_err(CliError::io(path))
}

fn join(values: &[f64], sep: &str) -> String {
    values
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join(sep)
}

fn finite(name: &str, v: f64) -> Result<f64, CliError> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(CliError::Numeric(format!("{name} is not finite")))
    }
}

/// Settings that reproduce the run, followed by derived facts as comments.
fn write_manifest(
    cfg: &RunConfig,
    command: &str,
    derived: &[(&str, String)],
) -> Result<(), CliError> {
    let path = cfg.out.join("manifest.txt");
    let system = match &cfg.system_id {
        SystemId::Room => "room".to_string(),
        SystemId::Traffic => "traffic".to_string(),
        SystemId::Bmw => "bmw".to_string(),
        SystemId::Custom(p) => p.display().to_string(),
    };
    let created = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    write_file(&path, |w| {
        writeln!(w, "# command={command}")?;
        writeln!(w, "# version={}", env!("CARGO_PKG_VERSION"))?;
        writeln!(w, "# created_unix={created}")?;
        writeln!(w, "system={system}")?;
        writeln!(w, "formula={}", cfg.formula)?;
        if let Some(props) = &cfg.props {
            writeln!(w, "props={}", props.join(","))?;
        }
        writeln!(w, "horizon={}", cfg.horizon)?;
        match cfg.resolution {
            Some(Resolution::Delta(d)) => writeln!(w, "delta={d}")?,
            Some(Resolution::Epsilon(e)) => writeln!(w, "epsilon={e}")?,
            None => {}
        }
        if command == "sweep" {
            writeln!(w, "deltas={}", join(&cfg.deltas, ","))?;
        }
        if let Some(h) = cfg.lipschitz {
            writeln!(w, "lipschitz={h}")?;
        }
        writeln!(w, "lebesgue={}", cfg.lebesgue)?;
        if let Some(n) = cfg.episodes {
            writeln!(w, "episodes={n}")?;
        }
        writeln!(w, "seed={}", cfg.seed)?;
        writeln!(w, "kappa={}", cfg.reward.kappa())?;
        writeln!(w, "reward={}", cfg.reward.mode())?;
        writeln!(w, "out={}", cfg.out.display())?;
        writeln!(w, "x0={}", join(&cfg.x0, ","))?;
        writeln!(w, "uniform_restarts={}", cfg.uniform_restarts)?;
        writeln!(w, "alpha_exponent={}", cfg.alpha_exponent)?;
        if let Some(p) = &cfg.policy {
            writeln!(w, "policy={}", p.display())?;
        }
        writeln!(w, "rollouts={}", cfg.rollouts)?;
        writeln!(w, "sims={}", cfg.sims)?;
        for (k, v) in derived {
            writeln!(w, "# {k}={v}")?;
        }
        Ok(())
    })
}

fn automaton(cfg: &RunConfig) -> Result<Dfa, CliError> {
    Ok(compile_str(&cfg.formula, cfg.model.props())?)
}

fn initial_state(cfg: &RunConfig) -> InitialState {
    if cfg.uniform_restarts {
        InitialState::Uniform
    } else {
        InitialState::Fixed(cfg.x0.clone())
    }
}

fn warn_if_vehicle(cfg: &RunConfig) {
    if cfg.system_id == SystemId::Bmw {
        eprintln!(
            "warning: tabular learning on the 7-D vehicle model is experimental; no convergence guarantee applies"
        );
    }
}

pub fn compile(cfg: &RunConfig) -> Result<(), CliError> {
    let props = match &cfg.props {
        Some(names) => Props::new(names.iter().map(String::as_str))?,
        None => cfg.model.props().clone(),
    };
    let dfa = compile_str(&cfg.formula, &props)?;
    create_out_dir(&cfg.out)?;
    let dot = cfg.out.join("automaton.dot");
    write_file(&dot, |w| w.write_all(dfa.to_dot().as_bytes()))?;
    println!("states={}", dfa.num_states());
    let chain = dfa.num_states() - dfa.rejecting().is_some() as usize;
    println!("chain_states={chain}");
    println!("initial_distance={}", dfa.dist(dfa.initial()));
    println!("d_max={}", dfa.d_max());
    for q in 0..dfa.num_states() {
        println!("q{q} d={}", dfa.dist(q));
    }
    write_manifest(cfg, "compile", &[("states", dfa.num_states().to_string())])
}

struct Oracle {
    grid: Grid,
    p_star: f64,
    table: scrl::dp::ValueTable,
}

fn oracle(cfg: &RunConfig, dfa: &Dfa, delta: f64) -> Result<Oracle, CliError> {
    if cfg.system_id == SystemId::Bmw {
        return Err(CliError::Config(
            "the explicit oracle is not available for the bmw system".into(),
        ));
    }
    let grid = build_grid(cfg.model.state_box(), delta)?;
    let mdp = build_finite_mdp(&cfg.model, &grid)?;
    let start = grid.cell_index(&cfg.x0);
    let sol = value_iteration(&mdp, dfa, cfg.horizon, start)?;
    let p_star = finite("p_star", sol.p_star)?;
    Ok(Oracle {
        grid,
        p_star,
        table: sol.table,
    })
}

pub fn dp(cfg: &RunConfig) -> Result<(), CliError> {
    let delta = cfg.delta()?;
    let dfa = automaton(cfg)?;
    let o = oracle(cfg, &dfa, delta)?;
    create_out_dir(&cfg.out)?;
    let path = cfg.out.join("value_table.csv");
    write_file(&path, |w| o.table.write_csv(w))?;
    println!("p_star={}", o.p_star);
    let mut derived = vec![
        ("delta_target", delta.to_string()),
        ("delta_realized", o.grid.delta().to_string()),
        ("p_star", o.p_star.to_string()),
    ];
    if let Some(eps) = cfg.epsilon_for(delta) {
        let (lo, hi) = policy_interval(o.p_star, eps);
        println!("epsilon={eps}");
        println!("interval=[{lo}, {hi}]");
        derived.push(("epsilon", eps.to_string()));
    }
    write_manifest(cfg, "dp", &derived)
}

fn write_strategy(
    path: &Path,
    table: &QTable,
    policy: &LearnedPolicy,
    grid: &Grid,
    cfg: &RunConfig,
) -> Result<(), CliError> {
    let inputs = cfg.model.inputs();
    write_file(path, |w| {
        writeln!(w, "k,cell_center,q,action_value")?;
        let mut center = vec![0.0; grid.dim()];
        let mut row =
            |w: &mut BufWriter<File>, k: usize, cell: usize, q: usize| -> std::io::Result<()> {
                if grid.center_into(cell, &mut center) {
                    let u = policy.choice(k, cell, q);
                    writeln!(
                        w,
                        "{k},{},{q},{}",
                        join(&center, ";"),
                        join(&inputs[u], ";")
                    )?;
                }
                Ok(())
            };
        if table.is_dense() {
            for k in 0..table.horizon() {
                for cell in 0..grid.num_cells() {
                    for q in 0..table.num_automaton_states() {
                        row(w, k, cell, q)?;
                    }
                }
            }
        } else {
            for (k, cell, q) in table.keys() {
                row(w, k, cell, q)?;
            }
        }
        Ok(())
    })
}

pub fn train_cmd(cfg: &RunConfig) -> Result<(), CliError> {
    let delta = cfg.delta()?;
    let train_cfg = cfg.train_config()?;
    warn_if_vehicle(cfg);
    let dfa = automaton(cfg)?;
    let grid = build_grid(cfg.model.state_box(), delta)?;
    let env = ContinuousEnv::new(&cfg.model, &grid, initial_state(cfg))?;
    let mut table = train(env, &dfa, cfg.horizon, &train_cfg)?;
    table.meta.delta = Some(delta);
    let (cell, letter) = initial_observation(&cfg.model, &grid, &cfg.x0)?;
    let p_r = finite("p_r", reported_value(&table, &dfa, cell, letter))?;
    let policy = extract_policy(&table);
    create_out_dir(&cfg.out)?;
    let qpath = cfg.out.join("qtable.csv");
    write_file(&qpath, |w| table.write_csv(w))?;
    write_strategy(&cfg.out.join("strategy.csv"), &table, &policy, &grid, cfg)?;
    println!("p_r={p_r}");
    let mut derived = vec![
        ("delta_target", delta.to_string()),
        ("delta_realized", grid.delta().to_string()),
        ("p_r", p_r.to_string()),
    ];
    if let Some(eps) = cfg.epsilon_for(delta) {
        derived.push(("epsilon", eps.to_string()));
    }
    write_manifest(cfg, "train", &derived)
}

fn load_policy(
    cfg: &RunConfig,
    grid: &Grid,
    dfa: &Dfa,
) -> Result<(PathBuf, LearnedPolicy), CliError> {
    let path = cfg
        .policy
        .clone()
        .ok_or_else(|| CliError::Config("a policy file is required (`--policy`)".into()))?;
    let file = File::open(&path).map_err(|e| {
        CliError::Config(format!("cannot open policy file {}: {e}", path.display()))
    })?;
    let table = QTable::read_csv(BufReader::new(file))
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    let shape = (
        table.horizon(),
        table.num_cells(),
        table.num_automaton_states(),
        table.num_inputs(),
    );
    let expected = (
        cfg.horizon,
        grid.num_cells(),
        dfa.num_states(),
        cfg.model.num_inputs(),
    );
    if shape != expected {
        return Err(CliError::Config(format!(
            "policy shape (horizon, cells, automaton states, inputs) = {shape:?} does not match the run {expected:?}"
        )));
    }
    Ok((path, extract_policy(&table)))
}

pub fn eval_cmd(cfg: &RunConfig) -> Result<(), CliError> {
    let delta = cfg.delta()?;
    let dfa = automaton(cfg)?;
    let grid = build_grid(cfg.model.state_box(), delta)?;
    let (_, policy) = load_policy(cfg, &grid, &dfa)?;
    let env = ContinuousEnv::new(&cfg.model, &grid, initial_state(cfg))?;
    let e = evaluate(&env, &dfa, cfg.horizon, &policy, cfg.rollouts, cfg.seed)?;
    create_out_dir(&cfg.out)?;
    write_file(&cfg.out.join("eval.csv"), |w| {
        writeln!(w, "rollouts,accepted,p_hat,half_width")?;
        writeln!(
            w,
            "{},{},{},{}",
            e.rollouts, e.accepted, e.estimate, e.half_width
        )
    })?;
    println!(
        "p_hat={} half_width={} rollouts={}",
        e.estimate, e.half_width, e.rollouts
    );
    write_manifest(
        cfg,
        "eval",
        &[
            ("p_hat", e.estimate.to_string()),
            ("half_width", e.half_width.to_string()),
        ],
    )
}

pub fn sweep(cfg: &RunConfig) -> Result<(), CliError> {
    if cfg.system_id == SystemId::Bmw {
        return Err(CliError::Config(
            "sweep needs the explicit oracle, which the bmw system lacks".into(),
        ));
    }
    let h = cfg
        .lipschitz
        .ok_or_else(|| CliError::Config("sweep needs a Lipschitz constant".into()))?;
    let train_cfg = cfg.train_config()?;
    let dfa = automaton(cfg)?;
    let mut rows = Vec::with_capacity(cfg.deltas.len());
    for &delta in &cfg.deltas {
        let o = oracle(cfg, &dfa, delta)?;
        let env = ContinuousEnv::new(&cfg.model, &o.grid, initial_state(cfg))?;
        let table = train(env, &dfa, cfg.horizon, &train_cfg)?;
        let (cell, letter) = initial_observation(&cfg.model, &o.grid, &cfg.x0)?;
        let p_r = finite("p_r", reported_value(&table, &dfa, cell, letter))?;
        let eps = finite(
            "epsilon",
            scrl::quantize::epsilon_bound(cfg.horizon, delta, h, cfg.lebesgue),
        )?;
        let (p_l, p_h) = policy_interval(o.p_star, eps);
        println!(
            "delta={delta} p_r={p_r} p_star={} epsilon={eps} p_l={p_l} p_h={p_h}",
            o.p_star
        );
        rows.push([delta, p_r, o.p_star, eps, p_l, p_h]);
    }
    create_out_dir(&cfg.out)?;
    write_file(&cfg.out.join("sweep.csv"), |w| {
        writeln!(w, "delta,p_r,p_star,epsilon,p_l,p_h")?;
        for r in &rows {
            writeln!(w, "{}", join(r, ","))?;
        }
        Ok(())
    })?;
    write_manifest(cfg, "sweep", &[("rows", rows.len().to_string())])
}

pub fn simulate(cfg: &RunConfig) -> Result<(), CliError> {
    let delta = cfg.delta()?;
    let dfa = automaton(cfg)?;
    let grid = build_grid(cfg.model.state_box(), delta)?;
    let (_, policy) = load_policy(cfg, &grid, &dfa)?;
    let env = ContinuousEnv::new(&cfg.model, &grid, initial_state(cfg))?;
    let mut interp = Interpreter::new(env, &dfa, RewardConfig::sparse(), cfg.horizon);
    let n = cfg.model.dim();
    let mut accepted = 0u64;
    create_out_dir(&cfg.out)?;
    let path = cfg.out.join("trajectories.csv");
    let file = File::create(&path).map_err(CliError::io(&path))?;
    let mut w = BufWriter::new(file);
    let header: Vec<String> = (1..=n).map(|i| format!("x{i}")).collect();
    writeln!(w, "sim_id,k,{}", header.join(",")).map_err(CliError::io(&path))?;
    for sim in 0..cfg.sims {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        rng.set_stream(sim);
        let mut s = interp.reset(&mut rng)?;
        let record = |w: &mut BufWriter<File>, k: usize, x: Option<&[f64]>| match x {
            Some(x) => writeln!(w, "{sim},{k},{}", join(x, ",")),
            None => Ok(()),
        };
        record(&mut w, 0, interp.env().state()).map_err(CliError::io(&path))?;
        while !interp.is_terminal() {
            let u = policy.action(s.k, s.cell, s.q);
            s = interp.step(u, &mut rng)?.next;
            record(&mut w, s.k, interp.env().state()).map_err(CliError::io(&path))?;
        }
        accepted += dfa.is_accepting(s.q) as u64;
    }
    w.flush().map_err(CliError::io(&path))?;
    println!("simulations={} accepted={accepted}", cfg.sims);
    write_manifest(cfg, "simulate", &[("accepted", accepted.to_string())])
}
