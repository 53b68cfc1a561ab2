"""Command-line interface: mask-ensemble generation, measurement
simulation, reconstruction, experiment sweeps, and set diagnostics."""

from __future__ import annotations

import argparse
import json
from pathlib import Path

import numpy as np

from . import bench, masks, measure, setgen
from .recover import RecoveryParams, recover


def _parse_set(text: str, dim: int) -> setgen.ModulationSet:
    elements = [int(tok) for tok in text.split(",") if tok.strip()]
    return setgen.ModulationSet.from_elements(dim, elements)


def _cmd_masks_gen(args) -> int:
    vertex = masks.build_vertex_masks(args.dim, args.count, mode=args.mode, seed=args.seed)
    if args.set is not None:
        mod = _parse_set(args.set, args.dim)
    elif args.set_density is not None or args.set_c is not None:
        if args.set_density is not None:
            cfg = setgen.SetGenConfig(args.dim, args.set_density,
                                      restrict_nonzero=args.set_restrict_nonzero,
                                      seed=args.set_seed)
        else:
            cfg = setgen.SetGenConfig.from_bias_constant(args.dim, args.set_c,
                                                         restrict_nonzero=args.set_restrict_nonzero,
                                                         seed=args.set_seed)
        mod = setgen.symmetrize(setgen.draw_B(cfg), args.dim)
    else:
        raise SystemExit("masks gen: provide --set, --set-density, or --set-c")
    ensemble = masks.build_ensemble(vertex, mod)
    masks.save_ensemble(ensemble, args.out)
    print(f"wrote {args.out}: {ensemble.total_masks} masks "
          f"({vertex.count} vertex + {len(ensemble.auxiliary)} auxiliary), |A|={len(mod)}")
    return 0


def _cmd_simulate(args) -> int:
    ensemble = masks.load_ensemble(args.ensemble)
    rng = np.random.default_rng(args.signal_seed)
    x = bench.draw_signal(ensemble.dim, rng, args.signal_mode)
    meas = measure_all_with_noise(x, ensemble, args.sigma2, args.noise_seed)
    measure.write_measurements(meas, args.out)
    if args.signal_out:
        measure.write_signal(x, args.signal_out)
    print(f"wrote {args.out}: M={ensemble.dim}, "
          f"{meas.vertex.size + meas.edge.size} intensities, sigma2={args.sigma2:g}")
    return 0


def measure_all_with_noise(x, ensemble, sigma2: float, noise_seed):
    meas = measure.measure_all(x, ensemble)
    if sigma2 > 0:
        meas = measure.add_noise(meas, measure.NoiseModel(sigma2, noise_seed))
    return meas


def _cmd_recover(args) -> int:
    ensemble = masks.load_ensemble(args.ensemble)
    meas = measure.read_measurements(args.measurements)
    params = RecoveryParams(alpha=args.alpha, tau=args.tau)
    result = recover(meas, ensemble, params)
    measure.write_signal(result.estimate, args.out)
    diagnostics_path = args.diagnostics or str(Path(args.out).with_suffix(".json"))
    diagnostics = {
        "surviving_vertices": result.surviving_vertices,
        "final_gap": result.final_gap,
        "pruning_iterations": result.pruning_iterations,
        "success": result.success,
    }
    Path(diagnostics_path).write_text(json.dumps(diagnostics, indent=2) + "\n")
    print(f"wrote {args.out} and {diagnostics_path}: success={result.success}, "
          f"surviving={result.surviving_vertices}, gap={result.final_gap:.4g}")
    return 0


def _cmd_experiment(args) -> int:
    config = bench.load_config(args.config)
    records = bench.run_experiment(config)
    bench.write_records(records, args.out)
    print(f"wrote {args.out} ({len(records)} records)")
    if args.plots:
        for path in bench.emit_plots(bench.summarize(records), args.plots):
            print(f"wrote {path}")
    return 0


def _cmd_bias_eval(args) -> int:
    mod = _parse_set(args.set, args.dim)
    print(f"bias={setgen.fourier_bias(mod.elements, args.dim):.12g}")
    print(f"spectral_gap={setgen.spectral_gap_from_bias(mod):.12g}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="phasepol",
                                     description="Masked-DFT phase retrieval via polarization")
    sub = parser.add_subparsers(dest="command", required=True)

    p_masks = sub.add_parser("masks", help="mask-ensemble tools")
    masks_sub = p_masks.add_subparsers(dest="masks_command", required=True)
    p_gen = masks_sub.add_parser("gen", help="generate a mask ensemble JSON file")
    p_gen.add_argument("--dim", type=int, required=True, help="signal dimension M")
    p_gen.add_argument("--count", type=int, required=True, help="number of vertex masks K")
    p_gen.add_argument("--mode", default="deterministic",
                       choices=list(masks.MASK_MODES), help="vertex mask construction")
    p_gen.add_argument("--seed", type=int, default=None, help="vertex mask seed")
    p_gen.add_argument("--set", default=None, help="explicit modulation set, comma-separated")
    p_gen.add_argument("--set-density", type=float, default=None,
                       help="Bernoulli density for a random set")
    p_gen.add_argument("--set-c", type=float, default=None,
                       help="density constant: density c*ln(M)/M")
    p_gen.add_argument("--set-restrict-nonzero", action="store_true",
                       help="draw only over nonzero residues")
    p_gen.add_argument("--set-seed", type=int, default=None, help="set draw seed")
    p_gen.add_argument("--out", required=True, help="output JSON path")
    p_gen.set_defaults(func=_cmd_masks_gen)

    p_sim = sub.add_parser("simulate", help="draw a signal and write its measurements")
    p_sim.add_argument("--ensemble", required=True, help="mask ensemble JSON")
    p_sim.add_argument("--signal-seed", type=int, default=None)
    p_sim.add_argument("--signal-mode", default="complex", choices=list(bench.SIGNAL_MODES))
    p_sim.add_argument("--sigma2", type=float, default=0.0, help="noise variance")
    p_sim.add_argument("--noise-seed", type=int, default=None)
    p_sim.add_argument("--out", required=True, help="measurement CSV path")
    p_sim.add_argument("--signal-out", default=None, help="optional signal CSV path")
    p_sim.set_defaults(func=_cmd_simulate)

    p_rec = sub.add_parser("recover", help="reconstruct a signal from measurements")
    p_rec.add_argument("--ensemble", required=True, help="mask ensemble JSON")
    p_rec.add_argument("--measurements", required=True, help="measurement CSV")
    p_rec.add_argument("--out", required=True, help="estimate CSV path (rows m,re,im)")
    p_rec.add_argument("--diagnostics", default=None,
                       help="diagnostics JSON path (default: estimate path with .json)")
    p_rec.add_argument("--alpha", type=float, default=0.99, help="reliability pruning parameter")
    p_rec.add_argument("--tau", type=float, default=0.1, help="connectivity threshold")
    p_rec.set_defaults(func=_cmd_recover)

    p_exp = sub.add_parser("experiment", help="run a seeded experiment grid")
    p_exp.add_argument("--config", required=True, help="flat key = value config file")
    p_exp.add_argument("--out", required=True, help="results CSV path")
    p_exp.add_argument("--plots", default=None, help="directory for SVG figures")
    p_exp.set_defaults(func=_cmd_experiment)

    p_bias = sub.add_parser("bias", help="modulation set diagnostics")
    bias_sub = p_bias.add_subparsers(dest="bias_command", required=True)
    p_eval = bias_sub.add_parser("eval", help="print Fourier bias and spectral gap")
    p_eval.add_argument("--dim", type=int, required=True)
    p_eval.add_argument("--set", required=True, help="comma-separated residues")
    p_eval.set_defaults(func=_cmd_bias_eval)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    raise SystemExit(main())
