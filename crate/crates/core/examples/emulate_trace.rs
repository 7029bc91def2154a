//! Replays a simulated trace with one-slot Walls and compares the measured
//! Wall shares with the simulator's own estimate and with the model.

use psirank::emulator::replay;
use psirank::graph::ring_with_chords;
use psirank::model::DenseSolver;
use psirank::simulator::{simulate, Eviction, PolicyConfig, Selection, SimConfig};
use psirank::{ActivityRates, PropagationSystem};

fn main() -> psirank::Result<()> {
    let n = 8;
    let g = ring_with_chords(n, 3.0, 5)?;
    let rates = ActivityRates::new(
        vec![0.2, 0.5, 0.1, 0.9, 0.3, 0.4, 0.7, 0.2],
        vec![0.8, 0.3, 1.0, 0.2, 0.6, 0.5, 0.4, 0.9],
    )?;
    let cfg = SimConfig {
        policy: PolicyConfig::new(Selection::Random, Eviction::Fifo),
        wall_size: 1,
        n_events: 400_000,
        seed: 3,
        record_trace: true,
        ..SimConfig::default()
    };
    let out = simulate(&g, &rates, &cfg)?;
    let trace = out.trace.as_deref().unwrap_or_default();
    let emu = replay(trace, n, Some((out.summary.warmup_end, out.summary.end_time)))?;

    let system = PropagationSystem::build(&g, &rates)?;
    let dense = DenseSolver::new(&system)?;
    println!("{} trace events, {} dropped", emu.events, emu.dropped);
    println!("origin  user  emulated  simulated  model");
    for origin in [0, 3] {
        let exact = dense.solve(origin)?.q;
        let sim = out.influence.q_dense(origin);
        for (u, e) in emu.q_dense(origin).iter().enumerate() {
            println!("{origin:>6}  {u:>4}  {e:.4}    {:.4}     {:.4}", sim[u], exact[u]);
        }
    }
    println!("emulated psi {:.4?}", emu.psi);
    Ok(())
}
