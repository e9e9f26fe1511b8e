"""Train the double deep Q-learner on a pocket-sized network.

Three nodes, two MECs, eight joint actions per node: small enough that the
exhaustive one-step optimum is computable, so after training we can report
a true optimality gap. Takes about a minute. Run with:

    python3 demos/train_small.py
"""

from mecoff import runner, verify
from mecoff.config import ExperimentConfig

cfg = ExperimentConfig(
    env_n_mec=2, env_n_nodes=3, env_horizon=10,
    env_arena=50.0, env_mec_alt_range=(20.0, 40.0), env_noise=1e-11,
    env_data_range=(0.5, 2.0), env_ck_range=(0.5, 2.0),
    env_node_energy=100.0, env_energy_drain=0.001,
    env_delay_tr=0.05, env_delay_process=0.5,
    env_mec_p_m=0.2, env_mec_cr_range=(2.0, 4.0),
    env_subband_count=2, env_rho_grid=(0.5, 1.0), env_p_grid=(1.0,),
    env_c_const=10.0,
    ddql_eta=120, ddql_batch=8, ddql_hidden=(16, 8), ddql_memory=500,
    ddql_train_every=2, ddql_psi=1e-3,
).validate()

seed = 0
print(f"training ddql for {cfg.ddql_eta} episodes ...")
result = runner.run_experiment(cfg, "ddql", seed=seed)

for ep in (0, 20, 60, 119):
    row = result.rows[ep]
    print(f"  episode {ep:3d}: sum cost {row['sum_cost']:7.2f} "
          f"loss {row['loss']:.4f} cum reward {row['cum_reward']:.2f}")

print()
print("one-step report against the exhaustive optimum:")
report = verify.verify_small_instance(cfg, seed,
                                      learners={"ddql": result.agents})
print(f"  optimum joint cost: {report['optimum']:.3f}")
for name, entry in sorted(report["policies"].items(),
                          key=lambda kv: kv[1]["gap"]):
    print(f"  {name:>6}: cost {entry['cost']:8.3f} gap {entry['gap']:8.3f}")
