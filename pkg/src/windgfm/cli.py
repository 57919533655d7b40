"""Command-line interface: simulate, compare, deload-table, gain-design,
droop-map, smallsignal."""
from __future__ import annotations

import argparse
import json
import math
import sys

import numpy as np

from . import _kernel, curtailment, gaindesign, harness, plotting, smallsignal
from .config import (
    ConfigError, apply_overrides, load_config, make_design_spec, make_plant,
    make_surface, make_turbine,
)
from .harness import HarnessAssertionError


def _add_common(sub):
    sub.add_argument("--config", help="scenario JSON file")
    sub.add_argument("--set", dest="sets", action="append", default=[],
                     metavar="KEY=VALUE", help="dotted config override")
    sub.add_argument("--out", help="output file (CSV)")
    sub.add_argument("--plot", help="optional SVG output path")


def _cfg(args) -> dict:
    return apply_overrides(load_config(args.config), args.sets)


def cmd_simulate(args) -> int:
    cfg = _cfg(args)
    res = harness.run_from_config(cfg)
    t_ev = res.scenario.load.events[0][0] if res.scenario.load.events else None
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(harness.trace_to_csv(res.trace))
    if t_ev is not None:
        metrics = harness.compute_metrics(res.trace, t_ev,
                                          f_base=cfg["network"]["f_hz"])
        print(harness.metrics_to_json({res.scenario.mode.name: metrics}))
    if args.plot:
        with open(args.plot, "w") as fh:
            fh.write(plotting.trace_svg(res.trace))
    return 0


def cmd_compare(args) -> int:
    cfg = _cfg(args)
    plant = make_plant(cfg)
    surface = make_surface(cfg)
    base = harness.scenario_from_config(cfg)
    rep = harness.compare_modes(plant, surface, base)
    print(harness.metrics_to_json(rep.metrics))
    if args.out:
        stem = args.out[:-4] if args.out.endswith(".csv") else args.out
        for name, res in rep.results.items():
            with open(f"{stem}_{name}.csv", "w") as fh:
                fh.write(harness.trace_to_csv(res.trace))
    if args.plot:
        with open(args.plot, "w") as fh:
            fh.write(plotting.trace_svg(rep.results["GFM_FR"].trace))
    if not rep.ordering_ok:
        raise HarnessAssertionError("mode nadir ordering violated")
    return 0


def cmd_deload_table(args) -> int:
    cfg = _cfg(args)
    table = curtailment.build_table(make_turbine(cfg), make_surface(cfg))
    text = curtailment.table_to_csv(table)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


def cmd_gain_design(args) -> int:
    cfg = _cfg(args)
    sc = cfg["scenario"]
    plant = make_plant(cfg)
    surface = make_surface(cfg)
    spec = make_design_spec(cfg)
    if float(sc["eta"]) >= 1.0:
        d = gaindesign.mppt_gains(plant.turbine, surface, float(sc["v_w"]), spec)
    else:
        d = gaindesign.design_gains(plant.turbine, surface, float(sc["v_w"]),
                                    float(sc["eta"]), spec)
    out = {
        "v_w": float(d.v_w), "eta": float(d.eta), "status": d.status,
        "m_p": None if math.isinf(d.m_p) else float(d.m_p),
        "omega_del_pu": float(d.omega_del), "beta_del_deg": float(d.beta_del),
        "omega_mpp_pu": float(d.omega_mpp), "k_wr": float(d.k_wr),
        "k_b": float(d.k_b),
        "k_theta_gsc": float(d.gains.gsc.k_theta),
        "k_d_gsc": float(d.gains.gsc.k_d),
        "k_theta_msc": float(d.gains.msc.k_theta),
        "k_d_msc": float(d.gains.msc.k_d),
        "k_p": float(d.gains.pitch.k_p),
        "theorem1_ratio_ok": bool(d.gains.theorem1_ratio_ok),
    }
    print(json.dumps(out, indent=2, sort_keys=True))
    return 0


def cmd_droop_map(args) -> int:
    cfg = _cfg(args)
    turbine = make_turbine(cfg)
    surface = make_surface(cfg)
    spec = make_design_spec(cfg)
    v_grid = np.linspace(5.0, 14.0, 10)
    eta_grid = np.array([0.7, 0.8, 0.9, 0.95, 1.0])
    m, status = gaindesign.droop_map(turbine, surface, v_grid, eta_grid, spec)
    text = gaindesign.droop_map_to_csv(v_grid, eta_grid, m, status)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    if args.plot:
        with open(args.plot, "w") as fh:
            fh.write(plotting.heatmap_svg(v_grid, eta_grid, m))
    return 0


def cmd_smallsignal(args) -> int:
    cfg = _cfg(args)
    plant = make_plant(cfg)
    surface = make_surface(cfg)
    base = harness.scenario_from_config(cfg)
    design = harness.gains_for_scenario(plant, surface, base)
    model = smallsignal.model_from_params(plant, design.gains, design.k_wr,
                                          design.k_b)
    print(smallsignal.model_to_json(model))
    lam, stable = smallsignal.stability_verdict(model)
    rep = smallsignal.lasalle_verify(model)
    print(json.dumps({"lasalle_max_eig_S": rep.max_eig_S,
                      "lasalle_certified": rep.certified,
                      "M_positive_definite": rep.m_positive_definite},
                     indent=2))
    if not stable:
        raise HarnessAssertionError("small-signal model is not stable")
    return 0


COMMANDS = {
    "simulate": cmd_simulate,
    "compare": cmd_compare,
    "deload-table": cmd_deload_table,
    "gain-design": cmd_gain_design,
    "droop-map": cmd_droop_map,
    "smallsignal": cmd_smallsignal,
}


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="windgfm",
        description="Reduced-order dual-port GFM wind turbine toolkit "
                    f"(kernel backend: {_kernel.BACKEND})")
    subs = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        _add_common(subs.add_parser(name))
    args = parser.parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return 3
    except (HarnessAssertionError, AssertionError) as e:
        print(f"assertion failure: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
