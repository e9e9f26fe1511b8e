"""Where offloading starts to pay.

Computes the weighted time/energy cost of running one task locally versus
shipping it to a MEC, as the task's data size grows. Run with:

    python3 demos/offload_tradeoff.py
"""

from mecoff import costs, geo

link = costs.LinkParams(delay_tr=0.08, delay_process=1.0)
cp = costs.CostParams(kappa=0.5)

node = costs.UserNode(id=0, pos=geo.Position3D(0, 0, 0),
                      f_n=3.0, ue=6.0, p_tx=1.0)
mec = costs.MecNode(id=0, pos=geo.Position3D(15, 0, 30), kind="aerial",
                    f_max=3.0, cr_max=6.0, p_m=0.15)
dist = geo.distance(node.pos, mec.pos)
no_handover = costs.HandoverContext(serving_is_best=True)

print(f"{'data':>6} {'v local':>9} {'v offload':>10}  cheaper")
for data in (0.25, 0.5, 1.0, 1.5, 2.0, 3.0):
    task = costs.Task(cat=0, data=data, ck=2.0, th_max=8.0,
                      origin=node.pos)
    local = costs.local_cost(task, node, link, cp)
    # a congested uplink and a half share of the MEC's processor
    off = costs.offload_cost(task, node, mec, dist, rate=1.2, g_of_h=0.5,
                             link=link, rho=0.5, lambda_o=0.3,
                             ho=no_handover, cp=cp)
    winner = "offload" if off.v < local.v else "local"
    print(f"{data:6.2f} {local.v:9.3f} {off.v:10.3f}  {winner}")

print()
print("Local execution pays a fixed energy toll (the CPU burns the same")
print("power regardless of payload), so light tasks are cheaper shipped")
print("out. Uplink time scales with the payload, so past the crossover a")
print("heavy task is cheaper at home. The learners rediscover exactly this")
print("boundary per node, complicated by congestion: shared subbands and")
print("processor grants make offloading worse the more neighbors pick it.")
