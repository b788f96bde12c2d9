"""Command-line interface: every library operation as a subcommand.

Exit codes: 0 success, 2 validation/domain error, 3 I/O error. Error text
goes to stderr; results are printed to stdout as single-line JSON (use
--pretty for indented output). Outputs are byte-identical across reruns
with identical inputs, flags, and seeds.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import imageops, metrics, sandbox, tensorio
from .cte import CteConfig, combine, extract_color_embedding, extract_texture_embedding
from .errors import DomainError, SadisError
from .regwct import RegWctConfig, blend_step, reg_wct, wct
from .tensorio import Embedding, LatentTensor

try:  # Python 3.11+
    import tomllib as _toml
except ModuleNotFoundError:  # pragma: no cover - depends on interpreter
    import tomli as _toml


def _sig9(x: float) -> float:
    """Round to 9 significant digits for stable printed metric results."""
    return float(f"{float(x):.9g}")


def _emit(payload: dict, pretty: bool) -> None:
    if pretty:
        print(json.dumps(payload, indent=2, sort_keys=True))
    else:
        print(json.dumps(payload, sort_keys=True, separators=(",", ":")))


def _resolve_seed(value: int | None) -> int:
    """Explicit --seed wins; then the SADIS_SEED variable; else 0 + notice."""
    if value is not None:
        return value
    env = os.environ.get("SADIS_SEED")
    if env is not None:
        try:
            return int(env)
        except ValueError as exc:
            raise DomainError(f"SADIS_SEED must be an integer, got {env!r}") from exc
    print("notice: no --seed given and SADIS_SEED unset; defaulting to seed 0", file=sys.stderr)
    return 0


# ---------------------------------------------------------------------------
# embed
# ---------------------------------------------------------------------------


def _cmd_embed(args) -> int:
    if args.embed_op == "color-extract":
        emb_c = tensorio.read_embedding(args.color)
        emb_g = tensorio.read_embedding(args.gray)
        out = extract_color_embedding(emb_c, emb_g, CteConfig(color_scale=args.color_scale))
        tokens = out.tokens
    elif args.embed_op == "texture-extract":
        emb_t = tensorio.read_embedding(args.gray_texture)
        emb_a = tensorio.read_embedding(args.avg_gray)
        out = extract_texture_embedding(
            emb_t, emb_a, CteConfig(gamma=args.gamma, beta=args.beta)
        )
        tokens = out.tokens
    else:  # combine
        emb_t = tensorio.read_embedding(args.texture)
        emb_c = tensorio.read_embedding(args.color)
        tokens = combine(emb_t, emb_c).tokens
    tensorio.write_npy(args.out, tokens, precision=args.precision)
    _emit(
        {
            "op": args.embed_op,
            "out": str(args.out),
            "shape": list(tokens.shape),
            "fro_norm": _sig9(np.linalg.norm(tokens)),
        },
        args.pretty,
    )
    return 0


# ---------------------------------------------------------------------------
# image
# ---------------------------------------------------------------------------


def _cmd_image(args) -> int:
    img = tensorio.read_image(args.input)
    gray = imageops.grayscale(img)
    if args.image_op == "avg":
        gray = imageops.average_gray(gray)
    out = imageops.gray_to_rgb(gray)
    tensorio.write_image(args.out, out)
    _emit(
        {
            "op": args.image_op,
            "out": str(args.out),
            "shape": [out.height, out.width, 3],
            "mean": _sig9(out.pixels.mean()),
        },
        args.pretty,
    )
    return 0


# ---------------------------------------------------------------------------
# wct
# ---------------------------------------------------------------------------


def _cmd_wct(args) -> int:
    latent = tensorio.read_latent(args.latent)
    ref = tensorio.read_latent(args.ref)
    lam = 0.0 if args.no_noise else args.lam
    needs_seed = lam > 0.0
    seed = _resolve_seed(args.seed) if needs_seed else (args.seed or 0)
    config = RegWctConfig(lam=lam, omega=args.omega, seed=seed)
    rng = np.random.default_rng(seed)
    if (args.t is None) != (args.total is None):
        raise DomainError("--t and --T must be given together")
    if args.t is not None:
        out = blend_step(latent, ref, args.t, args.total, config, rng)
        gated = out is not latent
    else:
        if config.omega == 0.0:
            out = latent
        elif config.omega == 1.0:
            out = reg_wct(latent, ref, config, rng)
        else:
            transformed = reg_wct(latent, ref, config, rng)
            out = LatentTensor(
                (1.0 - config.omega) * latent.data + config.omega * transformed.data
            )
        gated = config.omega > 0.0
    tensorio.write_npy(args.out, out.data, precision=args.precision)
    _emit(
        {
            "op": "wct",
            "out": str(args.out),
            "shape": list(out.data.shape),
            "applied": bool(gated),
            "omega": args.omega,
            "lambda": lam,
        },
        args.pretty,
    )
    return 0


# ---------------------------------------------------------------------------
# metrics
# ---------------------------------------------------------------------------


def _cmd_metrics(args) -> int:
    if args.metric == "chist":
        a = tensorio.read_image(args.a)
        b = tensorio.read_image(args.b)
        _emit({"chist": _sig9(metrics.chist_distance(a, b, args.bins))}, args.pretty)
    elif args.metric == "swd":
        a = tensorio.read_image(args.a)
        b = tensorio.read_image(args.b)
        seed = _resolve_seed(args.seed)
        value = metrics.swd_color_distance(
            a, b, projections=args.projections, scales=args.scales, seed=seed
        )
        _emit({"swd": _sig9(value)}, args.pretty)
    elif args.metric == "covdist":
        a = tensorio.read_latent(args.a)
        b = tensorio.read_latent(args.b)
        _emit({"covdist": _sig9(metrics.covariance_distance(a, b))}, args.pretty)
    else:  # spectrum
        arr = tensorio.read_npy(args.a)
        profile = metrics.radial_spectrum(arr)
        lines = ["radius,power"]
        for radius, power in enumerate(profile.radial_bins):
            lines.append(f"{radius},{float(power)!r}")
        Path(args.out).write_text("\n".join(lines) + "\n", encoding="ascii")
        _emit(
            {"op": "spectrum", "out": str(args.out), "max_radius": profile.max_radius},
            args.pretty,
        )
    return 0


# ---------------------------------------------------------------------------
# sim
# ---------------------------------------------------------------------------

_FLOAT_KEYS = {
    "beta_min", "beta_max", "omega", "lambda", "t_start", "t_end", "eig_floor",
}
_INT_KEYS = {"c", "h", "w", "t_train", "steps", "seed"}
_ARRAY_KEYS = {"data_mean", "data_cov", "ref_mean", "ref_cov"}


def _parse_flat_value(key: str, text: str):
    text = text.strip()
    if key in _INT_KEYS:
        return int(text)
    if key in _FLOAT_KEYS:
        return float(text)
    if key in _ARRAY_KEYS:
        rows = [r for r in text.split(";") if r.strip()]
        parsed = [[float(v) for v in row.split(",") if v.strip()] for row in rows]
        return parsed[0] if len(parsed) == 1 else parsed
    raise DomainError(f"unknown config key {key!r}")


def load_sim_config(path) -> sandbox.SimConfig:
    """Build a SimConfig from a TOML file or a flat key=value file.

    Flat files hold one key=value per line; vectors are comma-separated and
    matrices use ';' between rows. Unset keys keep their defaults.
    """
    path = Path(path)
    if path.suffix.lower() == ".toml":
        with open(path, "rb") as fh:
            raw = _toml.load(fh)
    else:
        raw = {}
        for lineno, line in enumerate(path.read_text().splitlines(), 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise DomainError(f"{path}:{lineno}: expected key=value, got {line!r}")
            key, _, value = line.partition("=")
            raw[key.strip()] = _parse_flat_value(key.strip(), value)
    known = _INT_KEYS | _FLOAT_KEYS | _ARRAY_KEYS
    unknown = set(raw) - known
    if unknown:
        raise DomainError(f"unknown config keys: {sorted(unknown)}")
    rc_kwargs = {}
    for src, dst in (("lambda", "lam"), ("omega", "omega"),
                     ("t_start", "t_start_frac"), ("t_end", "t_end_frac"),
                     ("eig_floor", "eig_floor"), ("seed", "seed")):
        if src in raw:
            rc_kwargs[dst] = raw[src]
    sim_kwargs = {k: raw[k] for k in raw if k in _INT_KEYS | {"beta_min", "beta_max"} | _ARRAY_KEYS}
    for key in _ARRAY_KEYS & set(sim_kwargs):
        sim_kwargs[key] = np.asarray(sim_kwargs[key], dtype=np.float64)
    return sandbox.SimConfig(regwct=RegWctConfig(**rc_kwargs), **sim_kwargs)


def _cmd_sim(args) -> int:
    config = load_sim_config(args.config) if args.config else sandbox.SimConfig()
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    base_seed = _resolve_seed(args.seed)
    seeds = [base_seed + i for i in range(args.seeds)]

    arm_means: dict[str, float] = {}
    for arm, arm_cfg in sandbox.arm_configs(config).items():
        summaries = []
        for seed in seeds:
            report = sandbox.run_trajectory(replace(arm_cfg, seed=seed))
            sandbox.report_to_csv(report, out_dir / f"{arm}_seed{seed}.csv")
            summary = sandbox.report_summary(report)
            summary["seed"] = seed
            summaries.append(summary)
        mean_ref = float(np.mean([s["cov_to_ref"] for s in summaries]))
        mean_data = float(np.mean([s["cov_to_data"] for s in summaries]))
        arm_means[arm] = mean_ref
        (out_dir / f"{arm}_summary.json").write_text(
            json.dumps(
                {"arm": arm, "mean_cov_to_ref": mean_ref, "mean_cov_to_data": mean_data,
                 "runs": summaries},
                indent=2,
                sort_keys=True,
            )
            + "\n",
            encoding="ascii",
        )
    verdict = {
        "control_cov_to_ref": _sig9(arm_means["control"]),
        "regwct_cov_to_ref": _sig9(arm_means["regwct"]),
        "wct_cov_to_ref": _sig9(arm_means["wct"]),
        "reduction_at_least_half": bool(
            arm_means["regwct"] <= 0.5 * arm_means["control"]
        ),
        "seeds": seeds,
    }
    (out_dir / "verdict.json").write_text(
        json.dumps(verdict, indent=2, sort_keys=True) + "\n", encoding="ascii"
    )
    _emit(verdict, args.pretty)
    return 0


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sadis",
        description="Color-texture disentanglement toolkit: embedding "
        "extraction, latent whitening-coloring, color/frequency metrics, "
        "and a closed-form diffusion sandbox.",
    )
    parser.add_argument("--pretty", action="store_true", help="indent JSON output")
    sub = parser.add_subparsers(dest="command", required=True)

    embed = sub.add_parser("embed", help="token-embedding operations")
    embed_sub = embed.add_subparsers(dest="embed_op", required=True)
    ce = embed_sub.add_parser(
        "color-extract",
        help="subtract the grayscale-image embedding from the color-image embedding",
    )
    ce.add_argument("--color", required=True, help="NPY with the color-image embedding")
    ce.add_argument("--gray", required=True, help="NPY with the grayscale-image embedding")
    ce.add_argument("--out", required=True, help="output NPY path")
    ce.add_argument(
        "--color-scale",
        type=float,
        default=1.0,
        help="gain on the color difference (the color-embedding scale; default 1.0)",
    )
    te = embed_sub.add_parser(
        "texture-extract",
        help="concat gray-texture and average-gray embeddings, damp singular values, slice",
    )
    te.add_argument("--gray-texture", required=True, help="NPY with the gray-texture embedding")
    te.add_argument("--avg-gray", required=True, help="NPY with the average-gray embedding")
    te.add_argument("--out", required=True)
    te.add_argument(
        "--gamma",
        type=float,
        default=0.003,
        help="singular-value damping rate γ (default 0.003)",
    )
    te.add_argument(
        "--beta", type=float, default=1.0, help="singular-value gain β (default 1.0)"
    )
    cm = embed_sub.add_parser("combine", help="stack texture tokens above color tokens")
    cm.add_argument("--texture", required=True)
    cm.add_argument("--color", required=True)
    cm.add_argument("--out", required=True)
    for p in (ce, te, cm):
        p.add_argument("--precision", choices=("f32", "f64"), default="f32")

    image = sub.add_parser("image", help="image-domain operations")
    image_sub = image.add_subparsers(dest="image_op", required=True)
    gs = image_sub.add_parser("gs", help="grayscale (output replicated to RGB)")
    avg = image_sub.add_parser("avg", help="uniform image of the grayscale mean")
    for p in (gs, avg):
        p.add_argument("--in", dest="input", required=True)
        p.add_argument("--out", required=True)

    wct_p = sub.add_parser(
        "wct",
        help="blend a latent with its whitening-coloring transform toward a reference",
    )
    wct_p.add_argument("--latent", required=True, help="NPY latent shaped (C,H,W)")
    wct_p.add_argument("--ref", required=True, help="NPY reference latent shaped (C,H,W)")
    wct_p.add_argument("--out", required=True)
    wct_p.add_argument(
        "--omega", type=float, default=0.5, help="blend weight ω in [0,1] (default 0.5)"
    )
    wct_p.add_argument(
        "--lambda",
        dest="lam",
        type=float,
        default=0.01,
        help="additive noise scale λ (default 0.01)",
    )
    wct_p.add_argument("--no-noise", action="store_true", help="force λ = 0")
    wct_p.add_argument("--seed", type=int, default=None, help="noise seed")
    wct_p.add_argument(
        "--t",
        type=int,
        default=None,
        help="current timestep; with --T, gates the transform to "
        "T_end ≤ t/T ≤ T_start (defaults 0.6, 0.8)",
    )
    wct_p.add_argument("--T", dest="total", type=int, default=None, help="total timesteps")
    wct_p.add_argument("--precision", choices=("f32", "f64"), default="f32")

    met = sub.add_parser("metrics", help="color and frequency diagnostics")
    met_sub = met.add_subparsers(dest="metric", required=True)
    chist = met_sub.add_parser("chist", help="summed per-channel Bhattacharyya distance")
    chist.add_argument("a")
    chist.add_argument("b")
    chist.add_argument("--bins", type=int, default=256)
    swd = met_sub.add_parser("swd", help="multi-scale sliced Wasserstein color distance")
    swd.add_argument("a")
    swd.add_argument("b")
    swd.add_argument("--projections", type=int, default=64)
    swd.add_argument("--scales", type=int, default=3)
    swd.add_argument("--seed", type=int, default=None)
    cov = met_sub.add_parser("covdist", help="relative Frobenius covariance distance")
    cov.add_argument("a")
    cov.add_argument("b")
    spec = met_sub.add_parser("spectrum", help="radial power spectrum of a 2-D NPY array")
    spec.add_argument("a")
    spec.add_argument("--out", required=True, help="output CSV path (radius,power)")

    sim = sub.add_parser("sim", help="run sandbox trajectories for all arms")
    sim.add_argument("--config", default=None, help="TOML or key=value SimConfig file")
    sim.add_argument("--out-dir", required=True)
    sim.add_argument("--seeds", type=int, default=16, help="number of seeds per arm")
    sim.add_argument("--seed", type=int, default=None, help="base seed (seeds count up from it)")
    return parser


_HANDLERS = {
    "embed": _cmd_embed,
    "image": _cmd_image,
    "wct": _cmd_wct,
    "metrics": _cmd_metrics,
    "sim": _cmd_sim,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _HANDLERS[args.command](args)
    except SadisError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
