"""A walk through the channel model.

Places one aerial and one ground MEC, then slides a user node away from
them and prints how line-of-sight probability, path loss, channel gain and
achievable rate respond. Run with:

    python3 demos/channel_tour.py
"""

import numpy as np

from mecoff import geo

rng = np.random.default_rng(7)

chan = geo.ChannelParams(f_c=2e9, c=3e8, eta_los=1.0, eta_nlos=20.0,
                         alpha=9.61, beta=0.16)
obstructions = geo.ObstructionModel(
    r_o=1.0, lambda_o=0.3, g_ccdf=geo.exponential_height_ccdf(15.0))

aerial = geo.Position3D(0.0, 0.0, 30.0)
ground = geo.Position3D(0.0, 0.0, 10.0)

print(f"{'dist':>6} {'p_los air':>10} {'p_los gnd':>10} "
      f"{'PL air dB':>10} {'PL gnd dB':>10} {'rate air':>9} {'rate gnd':>9}")

for d in (5.0, 10.0, 20.0, 40.0, 80.0):
    node = geo.Position3D(d, 0.0, 0.0)

    p_air = geo.p_los_aerial(aerial, node, chan)
    p_gnd = geo.p_los_ground(ground, node, obstructions)

    pl_air = geo.path_loss(aerial, node, chan,
                           geo.mean_excess_loss(p_air, chan))
    pl_gnd = geo.path_loss(ground, node, chan,
                           geo.mean_excess_loss(p_gnd, chan))

    # one fading draw shared by both links so the comparison is fair
    fading = geo.sample_fading(rng, k_factor=3.0)
    h_air = geo.channel_gain(fading, geo.distance(aerial, node),
                             geo.db_to_linear(pl_air))
    h_gnd = geo.channel_gain(fading, geo.distance(ground, node),
                             geo.db_to_linear(pl_gnd))
    r_air = geo.data_rate(h_air, tx_power=1.0, noise=1e-11, bandwidth=10.0)
    r_gnd = geo.data_rate(h_gnd, tx_power=1.0, noise=1e-11, bandwidth=10.0)

    print(f"{d:6.1f} {p_air:10.4f} {p_gnd:10.4f} "
          f"{pl_air:10.2f} {pl_gnd:10.2f} {r_air:9.2f} {r_gnd:9.2f}")

print()
print("The aerial link keeps line of sight much longer; the ground link's")
print("LoS probability collapses with distance through the obstruction")
print("field, which shows up as ~19 dB of extra loss at range.")
