"""Manifest-driven pipeline runner.

Usage:
    pulsekit --manifest subject.json --out results/ [--verbs rppg,fuse,...]
             [--seed N] [--threads N] [--config overrides.json]

Verbs run in dependency order (synth and flow first, stats last); outputs
land in the --out directory and a report.json summarizes every verb.
Exit codes: 0 success, 2 validation problem, 3 numerical/runtime failure.
Reports are deterministic for a fixed manifest and seed apart from the
timestamp field. --threads is accepted for interface stability; execution
is sequential, so results never depend on it.
"""

from __future__ import annotations

import argparse
import dataclasses
import hashlib
import json
import sys
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .core import ChannelSet, HrSeries
from .dsp import BandpassSpec, bandpass, estimate_hr_series
from .errors import ToolkitError, ValidationError
from .flow import motion_from_frames
from .fusion import FusionConfig, GuideRate, fuse
from .io import (
    load_manifest,
    read_frames_dir,
    read_hr_csv,
    read_motion_csv,
    read_rgb_csv,
    read_timeseries_csv,
    write_frames_dir,
    write_hr_csv,
    write_lag_csv,
    write_motion_csv,
    write_rgb_csv,
    write_timeseries_csv,
)
from .metrics import hr_errors
from .ptt import PttConfig, ptt_summary, sliding_xcorr_lag
from .respiration import RespConfig, estimate_resp_rate, resp_from_motion, resp_from_ppg
from .rppg import RppgConfig, chrom, pos
from .stats import wilcoxon_signed_rank
from .synth import (
    AttackSpec,
    NoiseSpec,
    RateProfile,
    SiteSpec,
    SubjectSpec,
    gen_contact_channels,
    gen_frame_sequence,
    gen_motion_matrix,
    gen_rgb_trace,
)
from .ptt import ptt_site_analysis

VERB_ORDER = ["synth", "flow", "rppg", "fuse", "resp-ppg", "resp-motion", "ptt", "stats"]

__all__ = ["main", "run", "VERB_ORDER"]


def _from_dict(cls, d: dict, context: str):
    """Build a dataclass from a plain dict, rejecting unknown keys."""
    names = {f.name for f in dataclasses.fields(cls)}
    unknown = set(d) - names
    if unknown:
        raise ValidationError(f"{context}: unknown keys {sorted(unknown)}")
    clean = {k: tuple(v) if isinstance(v, list) else v for k, v in d.items()}
    return cls(**clean)


def _rate_profile(d, context: str) -> RateProfile:
    if isinstance(d, (int, float)):
        return RateProfile(start_bpm=float(d))
    return _from_dict(RateProfile, d, context)


def subject_spec_from_dict(d: dict, seed_override: int | None = None) -> SubjectSpec:
    d = dict(d)
    for drop in ("rgb", "motion", "frames"):
        d.pop(drop, None)
    if "hr" in d:
        d["hr"] = _rate_profile(d["hr"], "synth.hr")
    if "resp" in d:
        d["resp"] = _rate_profile(d["resp"], "synth.resp")
    if "sites" in d:
        sites = []
        for s in d["sites"]:
            s = dict(s)
            if "noise" in s:
                s["noise"] = _from_dict(NoiseSpec, s["noise"], "synth.sites.noise")
            sites.append(_from_dict(SiteSpec, s, "synth.sites"))
        d["sites"] = tuple(sites)
    if seed_override is not None:
        d["seed"] = seed_override
    return _from_dict(SubjectSpec, d, "synth")


def _configs(manifest: dict, overrides: dict | None) -> dict:
    cfg = dict(manifest.get("configs", {}))
    for key, val in (overrides or {}).items():
        merged = dict(cfg.get(key, {}))
        merged.update(val)
        cfg[key] = merged
    return cfg


def _rppg_config(cfg: dict) -> RppgConfig:
    d = dict(cfg.get("rppg", {}))
    band = d.pop("band_bpm", None)
    order = d.pop("band_order", 4)
    if band is not None:
        d["band"] = BandpassSpec.per_minute(band[0], band[1], order)
    allowed = {"method", "window_s", "band"}
    unknown = set(d) - allowed
    if unknown:
        raise ValidationError(f"configs.rppg: unknown keys {sorted(unknown)}")
    return RppgConfig(**d)


def _hr_params(cfg: dict) -> tuple[float, float]:
    d = cfg.get("hr", {})
    return float(d.get("window_s", 10.0)), float(d.get("hop_s", 1.0))


def _load_channels(manifest: dict) -> ChannelSet:
    if "channels" not in manifest:
        raise ValidationError("manifest declares no contact channels")
    loaded = {}
    for name, path in manifest["channels"].items():
        _, ts = read_timeseries_csv(path)
        loaded[name] = ts
    return ChannelSet(loaded)


def _load_guide(manifest: dict) -> GuideRate:
    if "guide" not in manifest:
        raise ValidationError("manifest declares no guide rate file")
    _, ts = read_timeseries_csv(manifest["guide"])
    return GuideRate(ts.times(), ts.values)


def _metrics_vs_truth(truth: HrSeries, pred: HrSeries) -> dict:
    """Error summary over centers present in both series (within half a hop)."""
    if len(truth) > 1:
        hop = float(np.median(np.diff(truth.t)))
    else:
        hop = 1.0
    ti = {round(t / hop): i for i, t in enumerate(truth.t)}
    pairs = [(ti[round(t / hop)], j) for j, t in enumerate(pred.t) if round(t / hop) in ti]
    if not pairs:
        return {"n_windows": 0}
    ii, jj = zip(*pairs)
    sub_truth = HrSeries(truth.t[list(ii)], truth.bpm[list(ii)])
    sub_pred = HrSeries(pred.t[list(jj)], pred.bpm[list(jj)])
    me, mae, rmse = hr_errors(sub_truth, sub_pred)
    return {"me_bpm": me, "mae_bpm": mae, "rmse_bpm": rmse, "n_windows": len(sub_truth)}


def _verb_synth(manifest, out: Path, cfg: dict, seed: int | None) -> dict:
    spec = subject_spec_from_dict(manifest.get("synth", {}), seed)
    hr_window, hr_hop = _hr_params(cfg)
    channels, guide, truth = gen_contact_channels(spec, hr_window, hr_hop)
    chan_dir = out / "channels"
    chan_dir.mkdir(parents=True, exist_ok=True)
    manifest["channels"] = {}
    for name in channels.names():
        p = chan_dir / f"{name}.csv"
        write_timeseries_csv(p, channels[name], name)
        manifest["channels"][name] = str(p)
    gpath = out / "guide.csv"
    write_timeseries_csv(gpath, _guide_to_ts(guide), "hr_bpm")
    manifest["guide"] = str(gpath)
    tpath = out / "truth_hr.csv"
    write_hr_csv(tpath, truth)
    manifest["truth_hr"] = str(tpath)
    written = ["channels/", "guide.csv", "truth_hr.csv"]

    synth_cfg = manifest.get("synth", {})
    if "rgb" in synth_cfg:
        rgb_cfg = dict(synth_cfg["rgb"])
        attack = rgb_cfg.pop("attack", None)
        if attack is not None:
            attack = _from_dict(AttackSpec, attack, "synth.rgb.attack")
        trace = gen_rgb_trace(spec, attack=attack, **rgb_cfg)
        rpath = out / "trace_rgb.csv"
        write_rgb_csv(rpath, trace)
        manifest["rgb"] = {"face": str(rpath)}
        written.append("trace_rgb.csv")
    if "motion" in synth_cfg:
        mm, resp_truth = gen_motion_matrix(spec, **synth_cfg["motion"])
        mpath = out / "motion.csv"
        write_motion_csv(mpath, mm)
        manifest["motion"] = str(mpath)
        rpath = out / "truth_resp.csv"
        write_hr_csv(rpath, resp_truth)
        manifest["truth_resp"] = str(rpath)
        written += ["motion.csv", "truth_resp.csv"]
    if "frames" in synth_cfg:
        frames, resp_truth = gen_frame_sequence(spec, **synth_cfg["frames"])
        fdir = out / "frames"
        write_frames_dir(fdir, frames)
        manifest["frames_dir"] = str(fdir)
        rpath = out / "truth_resp.csv"
        write_hr_csv(rpath, resp_truth)
        manifest["truth_resp"] = str(rpath)
        written += ["frames/", "truth_resp.csv"]
    return {"seed": spec.seed, "outputs": written}


def _guide_to_ts(guide: GuideRate):
    from .core import TimeSeries

    fs = 1.0 / float(np.median(np.diff(guide.t)))
    return TimeSeries(guide.bpm, fs, float(guide.t[0]))


def _verb_flow(manifest, out: Path, cfg: dict) -> dict:
    if "frames_dir" not in manifest:
        raise ValidationError("flow verb needs frames_dir in the manifest")
    frames = read_frames_dir(manifest["frames_dir"])
    bbox = manifest.get("bbox")
    fs = float(manifest.get("frames_fs", 30.0))
    mm = motion_from_frames(frames, bbox=tuple(bbox) if bbox else None, fs=fs)
    mpath = out / "motion.csv"
    write_motion_csv(mpath, mm)
    manifest["motion"] = str(mpath)
    return {"n_frames": int(mm.n_frames) + 1, "outputs": ["motion.csv"]}


def _verb_rppg(manifest, out: Path, cfg: dict) -> dict:
    if "rgb" not in manifest:
        raise ValidationError("rppg verb needs rgb trace files in the manifest")
    rcfg = _rppg_config(cfg)
    hr_window, hr_hop = _hr_params(cfg)
    method = {"pos": pos, "chrom": chrom}[rcfg.method]
    result: dict = {"method": rcfg.method, "sites": {}}
    truth = read_hr_csv(manifest["truth_hr"]) if "truth_hr" in manifest else None
    for name, path in sorted(manifest["rgb"].items()):
        trace = read_rgb_csv(path)
        wave = method(trace, rcfg)
        write_timeseries_csv(out / f"rppg_{name}.csv", wave, "pulse")
        hr = estimate_hr_series(wave, hr_window, hr_hop)
        write_hr_csv(out / f"hr_rppg_{name}.csv", hr)
        entry = {"n_windows": len(hr), "outputs": [f"rppg_{name}.csv", f"hr_rppg_{name}.csv"]}
        if truth is not None:
            entry["errors"] = _metrics_vs_truth(truth, hr)
        result["sites"][name] = entry
    return result


def _verb_fuse(manifest, out: Path, cfg: dict) -> dict:
    channels = _load_channels(manifest)
    guide = _load_guide(manifest)
    fcfg = _from_dict(FusionConfig, cfg.get("fusion", {}), "configs.fusion")
    hr_window, hr_hop = _hr_params(cfg)
    fused = fuse(channels, guide, fcfg)
    write_timeseries_csv(out / "fused.csv", fused, "pulse")
    hr = estimate_hr_series(fused, hr_window, hr_hop)
    write_hr_csv(out / "hr_fused.csv", hr)
    manifest["fused"] = str(out / "fused.csv")
    result = {
        "n_samples": len(fused),
        "n_windows": len(hr),
        "outputs": ["fused.csv", "hr_fused.csv"],
    }
    if "truth_hr" in manifest:
        result["errors"] = _metrics_vs_truth(read_hr_csv(manifest["truth_hr"]), hr)
    return result


def _resp_config(cfg: dict) -> RespConfig:
    return _from_dict(RespConfig, cfg.get("resp", {}), "configs.resp")


def _rate_report(manifest, out: Path, wave, rcfg: RespConfig, tag: str) -> dict:
    write_timeseries_csv(out / f"resp_{tag}.csv", wave, "resp")
    rate = estimate_resp_rate(
        wave,
        rcfg.rate_window_s,
        rcfg.rate_hop_s,
        rcfg.rate_band_bpm,
        rcfg.min_dominance,
        rcfg.min_band_fraction,
    )
    write_hr_csv(out / f"resp_rate_{tag}.csv", rate)
    result = {
        "n_windows": len(rate),
        "outputs": [f"resp_{tag}.csv", f"resp_rate_{tag}.csv"],
    }
    if "truth_resp" in manifest:
        result["errors"] = _metrics_vs_truth(read_hr_csv(manifest["truth_resp"]), rate)
    return result


def _verb_resp_ppg(manifest, out: Path, cfg: dict) -> dict:
    channels = _load_channels(manifest)
    rcfg = _resp_config(cfg)
    wave = resp_from_ppg(channels, rcfg)
    return _rate_report(manifest, out, wave, rcfg, "ppg")


def _verb_resp_motion(manifest, out: Path, cfg: dict) -> dict:
    if "motion" not in manifest:
        raise ValidationError("resp-motion verb needs a motion matrix (run flow or synth)")
    mm = read_motion_csv(manifest["motion"])
    rcfg = _resp_config(cfg)
    wave = resp_from_motion(mm, rcfg)
    return _rate_report(manifest, out, wave, rcfg, "motion")


def _verb_ptt(manifest, out: Path, cfg: dict) -> dict:
    channels = _load_channels(manifest)
    pairs = manifest.get("ptt_pairs")
    if not pairs:
        raise ValidationError("ptt verb needs ptt_pairs in the manifest")
    pcfg = _from_dict(PttConfig, cfg.get("ptt", {}), "configs.ptt")
    band = BandpassSpec.per_minute(40, 180, 4)
    filtered = {name: bandpass(channels[name], band) for name in channels.names()}
    result: dict = {"pairs": {}}
    for x_name, y_name in pairs:
        if x_name not in filtered or y_name not in filtered:
            raise ValidationError(f"ptt pair ({x_name}, {y_name}) not among channels")
        series = sliding_xcorr_lag(filtered[x_name], filtered[y_name], pcfg)
        tag = f"{x_name}_{y_name}"
        write_lag_csv(out / f"ptt_{tag}.csv", series)
        summary = ptt_summary(series, pcfg)
        result["pairs"][tag] = {**summary.as_dict(), "outputs": [f"ptt_{tag}.csv"]}
    return result


def _verb_stats(manifest, out: Path, cfg: dict) -> dict:
    groups = manifest.get("stats_groups")
    residuals = manifest.get("stats_residuals")
    if not groups and residuals is None:
        raise ValidationError("stats verb needs stats_groups and/or stats_residuals")
    scfg = cfg.get("stats", {})
    alpha = float(scfg.get("alpha", 0.05))
    results = []
    if groups:
        m = scfg.get("bonferroni_m")
        results += ptt_site_analysis(
            {k: np.asarray(v, dtype=float) for k, v in groups.items()},
            alpha=alpha,
            m=int(m) if m is not None else None,
        )
    if residuals is not None:
        m_w = int(scfg.get("bonferroni_m", 1) or 1)
        from .stats import bonferroni

        results.append(
            wilcoxon_signed_rank(
                np.asarray(residuals, dtype=float), alpha=bonferroni(alpha, m_w)
            )
        )
    payload = [r.as_dict() for r in results]
    with open(out / "stats.json", "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
    return {"tests": payload, "outputs": ["stats.json"]}


_VERB_IMPL = {
    "flow": _verb_flow,
    "rppg": _verb_rppg,
    "fuse": _verb_fuse,
    "resp-ppg": _verb_resp_ppg,
    "resp-motion": _verb_resp_motion,
    "ptt": _verb_ptt,
    "stats": _verb_stats,
}


def run(
    manifest_path,
    out_dir,
    verbs: list[str] | None = None,
    seed: int | None = None,
    threads: int = 1,
    config_path=None,
) -> tuple[dict, int]:
    """Execute the requested verbs; returns (report, exit_code)."""
    manifest = load_manifest(manifest_path)
    raw = json.loads(Path(manifest_path).read_text())
    overrides = None
    if config_path is not None:
        cfg_path = Path(config_path)
        if not cfg_path.exists():
            raise ValidationError(f"config file not found: {cfg_path}")
        overrides = json.loads(cfg_path.read_text())
    cfg = _configs(manifest, overrides)

    if verbs is None:
        verbs = [v for v in VERB_ORDER if _verb_applicable(v, manifest)]
    unknown = set(verbs) - set(VERB_ORDER)
    if unknown:
        raise ValidationError(f"unknown verbs: {sorted(unknown)}")
    ordered = [v for v in VERB_ORDER if v in verbs]

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)

    provenance = {
        "config_hash": hashlib.sha256(
            json.dumps(
                {"manifest": raw, "overrides": overrides, "seed": seed, "verbs": ordered},
                sort_keys=True,
            ).encode()
        ).hexdigest(),
        "seed": seed if seed is not None else manifest.get("synth", {}).get("seed", 0),
        "tool_version": __version__,
    }
    report: dict = {
        "version": 1,
        "subject": manifest.get("subject", "unknown"),
        "timestamp": datetime.now(timezone.utc).isoformat(),
        "provenance": provenance,
        "verbs": {},
    }

    worst = 0
    for verb in ordered:
        try:
            if verb == "synth":
                report["verbs"][verb] = _verb_synth(manifest, out, cfg, seed)
            else:
                report["verbs"][verb] = _VERB_IMPL[verb](manifest, out, cfg)
        except ValidationError as exc:
            report["verbs"][verb] = {"error": str(exc), "error_type": type(exc).__name__}
            worst = max(worst, 2)
        except ToolkitError as exc:
            report["verbs"][verb] = {"error": str(exc), "error_type": type(exc).__name__}
            worst = max(worst, 3)

    with open(out / "report.json", "w") as fh:
        json.dump(report, fh, indent=2, sort_keys=True)
    return report, worst


def _verb_applicable(verb: str, manifest: dict) -> bool:
    if verb == "synth":
        return "synth" in manifest
    if verb == "flow":
        return "frames_dir" in manifest or "frames" in manifest.get("synth", {})
    if verb == "rppg":
        return "rgb" in manifest or "rgb" in manifest.get("synth", {})
    if verb in ("fuse", "resp-ppg", "ptt"):
        has_chan = "channels" in manifest or "synth" in manifest
        if verb == "ptt":
            return has_chan and "ptt_pairs" in manifest
        return has_chan
    if verb == "resp-motion":
        return (
            "motion" in manifest
            or "frames_dir" in manifest
            or "motion" in manifest.get("synth", {})
            or "frames" in manifest.get("synth", {})
        )
    if verb == "stats":
        return "stats_groups" in manifest or "stats_residuals" in manifest
    return False


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="pulsekit",
        description="Multi-site vital-sign pipelines: rPPG, fusion, PTT, respiration.",
    )
    parser.add_argument("--manifest", required=True, help="subject manifest JSON")
    parser.add_argument("--out", required=True, help="output directory")
    parser.add_argument("--verbs", default=None, help="comma-separated subset of: " + ",".join(VERB_ORDER))
    parser.add_argument("--seed", type=int, default=None, help="override the synth seed")
    parser.add_argument("--threads", type=int, default=1, help="reserved; execution is sequential")
    parser.add_argument("--config", default=None, help="path to a JSON file overriding pipeline configs")
    args = parser.parse_args(argv)

    verbs = [v.strip() for v in args.verbs.split(",") if v.strip()] if args.verbs else None
    try:
        report, code = run(
            args.manifest, args.out, verbs, seed=args.seed, threads=args.threads,
            config_path=args.config,
        )
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ToolkitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    for verb, entry in report["verbs"].items():
        status = f"FAILED ({entry['error']})" if "error" in entry else "ok"
        print(f"{verb}: {status}")
    print(f"report: {Path(args.out) / 'report.json'}")
    return code


if __name__ == "__main__":
    sys.exit(main())
