"""Fit a Hermite interpolant to the transcendental curve, save it, reload it and report errors."""
import tempfile
from pathlib import Path

import numpy as np

from grassinterp import evaluate_many_with_velocity, fit_hermite
from grassinterp.experiments import load_model, save_model
from grassinterp.experiments.scenarios import gen_transcendental
from grassinterp.manifold import orthogonality_defect, projector_velocity_error, subspace_error
from grassinterp.polybasis import chebyshev_nodes

n, p, m, seed = 300, 6, 8, 1
nodes = chebyshev_nodes(m, (0.0, 1.0))
pairs = [gen_transcendental(n, p, t, seed) for t in nodes]
interp = fit_hermite(nodes, [P for P, _ in pairs], [D for _, D in pairs])

with tempfile.TemporaryDirectory() as tmp:
    path = Path(tmp) / "curve.gmi"
    save_model(interp, path)
    print(f"model file: {path.stat().st_size} bytes")
    interp = load_model(path)

probes = np.linspace(0.0, 1.0, 101)
worst_sub = worst_vel = worst_orth = 0.0
for t, (P, D) in zip(probes, evaluate_many_with_velocity(interp, probes)):
    Q, E = gen_transcendental(n, p, t, seed)
    worst_sub = max(worst_sub, subspace_error(Q, P)[1])
    diff, ref = projector_velocity_error(P.U, D.Udot, Q.U, E.Udot)
    worst_vel = max(worst_vel, diff / ref)
    worst_orth = max(worst_orth, orthogonality_defect(P.U))
print(f"max relative subspace error {worst_sub:.3e}")
print(f"max relative projector-velocity error {worst_vel:.3e}")
print(f"max orthogonality defect {worst_orth:.3e}")
