#!/usr/bin/env python3
"""Select the generator seeds frozen into the shipped scenario files.

The published experiments report only whole-horizon attack statistics, so the
shipped scenarios emulate them with seeded random attacks whose realized
statistics match those targets. This script documents exactly how each seed
was chosen; rerunning it reproduces the selection.

Selection rules
---------------
example_a.json (10 s, delta 0.1):
    transitions n(0,10) == 15, jammed fraction within [0.17, 0.21],
    quantizer capacity set from the realized-average budget so the range
    requirement passes with a small margin, no saturation, consensus ratio
    |delta(10s)| / |delta(0)| <= 0.05, all replicas bit-identical, and the
    normalized recursion residual <= 1e-9.

example_scalar.json (25 s, delta 0.1):
    transitions n(0,25) within [23, 33], jammed fraction within [0.70, 0.82],
    jammed fraction of sampling instants below 0.80 (the scalar consensus
    balance point is 0.8134), consensus ratio <= 0.05, no saturation.

example_scalar_unquantized.json (25 s, delta 0.1):
    realized combined level duty + delta/tau_d_avg <= 0.72 (inside the 0.8134
    ceiling with margin), decay envelope from the tight fitted budget holds,
    and |delta| shrinks by >= 1e3 from step 1 to the end.
"""

import sys

import numpy as np

sys.path.insert(0, "src")

from qconsensus import conditions, dos, scenario as scen, simulation  # noqa: E402

sys.path.insert(0, "tests")
from conftest import example_a_doc, scalar_doc  # noqa: E402


def pick_example_a(max_seed=4000):
    for seed in range(max_seed):
        sig = dos.generate_random(seed, 10.0, 0.1, 0.19, 0.6667)
        if not sig.intervals:
            continue
        n, jam_time = dos.measure(sig, 0.0, 10.0)
        duty = jam_time / 10.0
        if n != 15 or not (0.17 <= duty <= 0.21):
            continue
        doc = example_a_doc()
        doc["dos"]["generator"]["seed"] = seed
        cfg = scen.from_dict(doc)
        report = conditions.validate(cfg)
        if not report.verdicts["dwell_frequency"].passed:
            continue
        levels = int(np.ceil((report.bound_40 / 1.0 - 1) / 2)) + 5
        doc["quantizer"]["levels"] = levels
        cfg = scen.from_dict(doc)
        report = conditions.validate(cfg)
        if not report.verdicts["quantizer_range"].passed:
            continue
        for init_seed in range(40):
            doc["initial_states"] = {"seed": init_seed}
            cfg = scen.from_dict(doc)
            trace = simulation.run(cfg, debug_replicas=True)
            norms = trace.delta_norms()
            if norms[0] < 0.5:
                continue
            ratio = norms[-1] / norms[0]
            res = simulation.oracle_for_config(cfg, trace)
            if (ratio <= 0.05 and trace.saturation_count() == 0
                    and trace.replica_divergences == 0
                    and res["max"] <= 1e-9
                    and trace.max_symbol() <= 10):
                print(f"example-a: dos seed {seed}, init seed {init_seed}, "
                      f"levels {levels}")
                print(f"  n={n} duty={duty:.4f} ratio={ratio:.3e} "
                      f"maxsym={trace.max_symbol()} oracle={res['max']:.2e} "
                      f"bound_40={report.bound_40:.1f}")
                return seed, init_seed, levels
    raise SystemExit("no example-a seed found")


def pick_example_scalar(max_seed=6000):
    for seed in range(max_seed):
        sig = dos.generate_random(seed, 25.0, 0.1, 0.78, 0.9)
        if not sig.intervals:
            continue
        n, jam_time = dos.measure(sig, 0.0, 25.0)
        duty = jam_time / 25.0
        if not (23 <= n <= 33 and 0.70 <= duty <= 0.82):
            continue
        steps = dos.n_steps(25.0, 0.1)
        grid_fraction = dos.jammed_mask(sig, 0.1, steps).mean()
        if grid_fraction > 0.80:
            continue
        doc = scalar_doc()
        doc["dos"]["generator"]["seed"] = seed
        for init_seed in range(40):
            doc["initial_states"] = {"seed": init_seed}
            cfg = scen.from_dict(doc)
            trace = simulation.run(cfg)
            norms = trace.delta_norms()
            if norms[0] < 0.5:
                continue
            ratio = norms[-1] / norms[0]
            res = simulation.oracle_for_config(cfg, trace)
            if (ratio <= 0.05 and trace.saturation_count() == 0
                    and res["max"] <= 1e-9):
                print(f"example-scalar: dos seed {seed}, init seed {init_seed}")
                print(f"  n={n} duty={duty:.4f} grid={grid_fraction:.4f} "
                      f"ratio={ratio:.3e} maxsym={trace.max_symbol()} "
                      f"oracle={res['max']:.2e}")
                return seed, init_seed
    raise SystemExit("no scalar seed found")


def pick_example_scalar_unquantized(max_seed=4000):
    for seed in range(max_seed):
        sig = dos.generate_random(seed, 25.0, 0.1, 0.6, 1.0)
        if not sig.intervals:
            continue
        tau_d_avg, duty = dos.averaged_params(sig)
        level = duty + 0.1 / tau_d_avg
        if level > 0.72:
            continue
        doc = scalar_doc(mode="scalar_unquantized", name="example-scalar-unquantized")
        doc.pop("quantizer")
        doc.pop("zoom")
        doc["dos"] = {"generator": {"seed": seed, "target_duty": 0.6,
                                    "mean_period": 1.0}}
        for init_seed in range(20):
            doc["initial_states"] = {"seed": init_seed}
            cfg = scen.from_dict(doc)
            trace = simulation.run(cfg)
            norms = trace.delta_norms()
            if norms[1] < 0.5:
                continue
            if norms[-1] > 1e-3 * norms[1]:
                continue
            budget = dos.fit_min_budget(sig, tau_d_avg, 1.0 / duty)
            gamma_u = 0.66 ** (1 - budget.dos_level(0.1)) * 1.1 ** budget.dos_level(0.1)
            c_u = (1.1 / 0.66) ** ((budget.kappa + budget.eta * 0.1) / 0.1)
            envelope_ok = all(
                norms[k] <= c_u * gamma_u ** (k - 1) * norms[1] * (1 + 1e-9)
                for k in range(1, trace.steps + 1)
            )
            if envelope_ok:
                print(f"example-scalar-unquantized: dos seed {seed}, "
                      f"init seed {init_seed}")
                print(f"  level={level:.4f} ratio={norms[-1]/norms[1]:.3e} "
                      f"gamma_u={gamma_u:.4f} c_u={c_u:.2f}")
                return seed, init_seed
    raise SystemExit("no unquantized seed found")


if __name__ == "__main__":
    pick_example_a()
    pick_example_scalar()
    pick_example_scalar_unquantized()
