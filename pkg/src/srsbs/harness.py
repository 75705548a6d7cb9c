"""Experiment orchestration: seeded runs, phase pairs, sweeps, metrics, files.

One experiment simulates R back-to-back message transmissions (the tag cycles
its pattern continuously while enabled) and counts outcomes per message
window: a detection when the tag's own code fires inside the window, a cross
false alarm when any other code fires while the tag is on, a false alarm when
anything fires while the tag is off. Consecutive same-code events collapse to
one before counting; raw events stay available.

Everything is deterministic given the config: child seeds are derived through
a seed sequence, never through wall-clock or hash randomization.
"""

from __future__ import annotations

import csv
import dataclasses
import io
import json
from dataclasses import dataclass, field
from typing import Iterable, Sequence, TextIO

import numpy as np
from scipy import stats

from . import __version__
from .channel import ChannelConfig, ChannelState, get_preset, propagate, step
from .detector import (
    DetectionEvent,
    Detector,
    DetectorConfig,
    FilterConfig,
    average_magnitude,
)
from .srs import SRS_PERIOD_S, ZcConfig, make_srs_symbol
from .tag import (
    GoldCodeSet,
    LfsrSpec,
    OokState,
    PREFERRED_TAPS_A,
    PREFERRED_TAPS_B,
    TagMessage,
    encode_repetition,
    generate_gold_set,
    ook_state,
)

RESULTS_HEADER = (
    "parameter_value",
    "detection_probability",
    "false_alarm_probability",
    "cross_false_alarm_probability",
    "n_srs",
    "seed",
)

EVENTS_HEADER = ("period_index", "code_id", "correlation")


@dataclass(frozen=True)
class CodeConfig:
    """Which polynomial pair and register seeds generate the code family."""

    poly_a: tuple[int, ...] = PREFERRED_TAPS_A
    poly_b: tuple[int, ...] = PREFERRED_TAPS_B
    seed_a: tuple[int, ...] = (1, 1, 1, 1, 1)
    seed_b: tuple[int, ...] = (1, 1, 1, 1, 1)

    def build(self) -> GoldCodeSet:
        return generate_gold_set(
            LfsrSpec(taps=self.poly_a, seed=self.seed_a),
            LfsrSpec(taps=self.poly_b, seed=self.seed_b),
        )


@dataclass(frozen=True)
class ExperimentConfig:
    """Fully resolved description of one experiment.

    ``scenario`` is either a preset name or an explicit channel config.
    ``messages`` is the number of message transmissions R; one run simulates
    exactly R * v * n sounding periods.
    """

    scenario: str | ChannelConfig = "noiseless"
    tag_code_id: int = 0
    tag_enabled: bool = True
    messages: int = 300
    seed: int = 0
    detector: DetectorConfig = field(default_factory=DetectorConfig)
    filter: FilterConfig = field(default_factory=FilterConfig)
    codes: CodeConfig = field(default_factory=CodeConfig)
    zc: ZcConfig = field(default_factory=ZcConfig)

    def __post_init__(self):
        if self.messages < 1:
            raise ValueError(f"messages must be >= 1, got {self.messages}")
        if isinstance(self.scenario, str):
            get_preset(self.scenario)  # raises on unknown name
        elif not isinstance(self.scenario, ChannelConfig):
            raise ValueError("scenario must be a preset name or a ChannelConfig")

    def channel_config(self) -> ChannelConfig:
        if isinstance(self.scenario, str):
            return get_preset(self.scenario).config
        return self.scenario

    def scenario_name(self) -> str:
        if isinstance(self.scenario, str):
            return self.scenario
        return "custom"

    def to_dict(self) -> dict:
        return {
            "scenario": self.scenario
            if isinstance(self.scenario, str)
            else dataclasses.asdict(self.scenario),
            "tag_code_id": self.tag_code_id,
            "tag_enabled": self.tag_enabled,
            "messages": self.messages,
            "seed": self.seed,
            "detector": {
                "theta": self.detector.theta,
                "v": self.detector.v,
                "n": self.detector.n,
                "polarity_agnostic": self.detector.polarity_agnostic,
            },
            "filter": dataclasses.asdict(self.filter),
            "codes": dataclasses.asdict(self.codes),
            "zc": dataclasses.asdict(self.zc),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        def build(factory, section, raw):
            try:
                return factory(**raw)
            except TypeError as exc:
                raise ValueError(f"bad {section} config: {exc}") from None

        data = dict(data)
        kwargs: dict = {}
        scenario = data.pop("scenario", "noiseless")
        if isinstance(scenario, dict):
            kwargs["scenario"] = build(ChannelConfig, "scenario", scenario)
        else:
            kwargs["scenario"] = scenario
        for key in ("tag_code_id", "tag_enabled", "messages", "seed"):
            if key in data:
                kwargs[key] = data.pop(key)
        if "detector" in data:
            kwargs["detector"] = build(DetectorConfig, "detector", data.pop("detector"))
        if "filter" in data:
            kwargs["filter"] = build(FilterConfig, "filter", data.pop("filter"))
        if "codes" in data:
            raw = {k: tuple(v) for k, v in data.pop("codes").items()}
            kwargs["codes"] = build(CodeConfig, "codes", raw)
        if "zc" in data:
            kwargs["zc"] = build(ZcConfig, "zc", data.pop("zc"))
        if data:
            raise ValueError(f"unknown config keys: {sorted(data)}")
        return cls(**kwargs)


@dataclass
class Metrics:
    """Per-run outcome counts and probabilities.

    Detection and cross false alarm are measured only while the tag is on;
    false alarm only while it is off. The unused probabilities stay 0.
    Exact Clopper-Pearson 95% intervals accompany each point estimate since
    R message windows is a modest sample.
    """

    detection_probability: float
    false_alarm_probability: float
    cross_false_alarm_probability: float
    events: list[DetectionEvent]
    n_srs: int
    messages: int
    tag_enabled: bool
    tag_code_id: int
    detected: int
    missed: int
    cross_windows: int
    false_alarm_windows: int
    simulated_seconds: float
    detection_ci: tuple[float, float]
    false_alarm_ci: tuple[float, float]
    cross_false_alarm_ci: tuple[float, float]
    dedup: list[DetectionEvent] = field(default_factory=list)
    trace: np.ndarray | None = None


def derive_seed(base_seed: int, index: int) -> int:
    """Deterministic child seed; stable across processes and platforms."""
    return int(np.random.SeedSequence([base_seed, index]).generate_state(1)[0])


def clopper_pearson(successes: int, trials: int, confidence: float = 0.95):
    """Exact binomial confidence interval."""
    if trials == 0:
        return (0.0, 1.0)
    alpha = 1.0 - confidence
    lo = 0.0 if successes == 0 else float(stats.beta.ppf(alpha / 2, successes, trials - successes + 1))
    hi = 1.0 if successes == trials else float(stats.beta.ppf(1 - alpha / 2, successes + 1, trials - successes))
    return (lo, hi)


def dedup_events(
    events: Sequence[DetectionEvent], message_length: int
) -> list[DetectionEvent]:
    """Collapse runs of consecutive-period same-code events into their first.

    A run never spans more than one message duration; longer streaks split.
    """
    out: list[DetectionEvent] = []
    run_start: DetectionEvent | None = None
    prev: DetectionEvent | None = None
    for ev in events:
        extends = (
            prev is not None
            and run_start is not None
            and ev.code_id == prev.code_id
            and ev.period_index == prev.period_index + 1
            and ev.period_index - run_start.period_index < message_length
        )
        if not extends:
            out.append(ev)
            run_start = ev
        prev = ev
    return out


def _count_metrics(
    events: list[DetectionEvent],
    config: ExperimentConfig,
    trace: np.ndarray | None,
) -> Metrics:
    window_len = config.detector.window_length
    r = config.messages
    deduped = dedup_events(events, window_len)
    det_windows: set[int] = set()
    cross_windows: set[int] = set()
    any_windows: set[int] = set()
    for ev in deduped:
        w = ev.period_index // window_len
        any_windows.add(w)
        if ev.code_id == config.tag_code_id:
            det_windows.add(w)
        else:
            cross_windows.add(w)
    if config.tag_enabled:
        detected = len(det_windows)
        crossed = len(cross_windows)
        false_alarms = 0
    else:
        detected = 0
        crossed = 0
        false_alarms = len(any_windows)
    return Metrics(
        detection_probability=detected / r,
        false_alarm_probability=false_alarms / r,
        cross_false_alarm_probability=crossed / r,
        events=events,
        n_srs=r * window_len,
        messages=r,
        tag_enabled=config.tag_enabled,
        tag_code_id=config.tag_code_id,
        detected=detected,
        missed=r - detected if config.tag_enabled else 0,
        cross_windows=crossed,
        false_alarm_windows=false_alarms,
        simulated_seconds=r * window_len * SRS_PERIOD_S,
        detection_ci=clopper_pearson(detected, r),
        false_alarm_ci=clopper_pearson(false_alarms, r),
        cross_false_alarm_ci=clopper_pearson(crossed, r),
        dedup=deduped,
        trace=trace,
    )


def run_experiment(config: ExperimentConfig, keep_trace: bool = False) -> Metrics:
    """Simulate R message transmissions and count per-window outcomes."""
    code_set = config.codes.build()
    if not 0 <= config.tag_code_id < code_set.n_codes:
        raise ValueError(
            f"tag_code_id must be in 0..{code_set.n_codes - 1}, got {config.tag_code_id}"
        )
    detector_cfg = dataclasses.replace(config.detector, code_set=code_set)
    detector = Detector(detector_cfg, config.filter)
    message: TagMessage = encode_repetition(
        code_set.code(config.tag_code_id), config.detector.v, config.tag_code_id
    )
    srs = make_srs_symbol(config.zc)
    chan = ChannelState.create(config.channel_config())
    rng = np.random.default_rng(config.seed)

    n_periods = config.messages * config.detector.window_length
    events: list[DetectionEvent] = []
    trace = np.empty(n_periods) if keep_trace else None
    for k in range(n_periods):
        if config.tag_enabled:
            state = ook_state(message, k)
        else:
            state = OokState.TRANSPARENT
        received = propagate(srs, state, chan, rng)
        step(chan, rng)
        a = average_magnitude(received)
        if trace is not None:
            trace[k] = a
        event = detector.process(a)
        if event is not None:
            events.append(event)
    return _count_metrics(events, config, trace)


def run_phases(
    config: ExperimentConfig, keep_trace: bool = True
) -> tuple[Metrics, Metrics]:
    """Tag-off baseline then tag-on run, sharing the scenario.

    Phase seeds derive from the config seed (index 0 off, 1 on) so the pair
    reproduces together. Raw amplitude traces are kept by default for
    off/on comparison.
    """
    off_cfg = dataclasses.replace(
        config, tag_enabled=False, seed=derive_seed(config.seed, 0)
    )
    on_cfg = dataclasses.replace(
        config, tag_enabled=True, seed=derive_seed(config.seed, 1)
    )
    off = run_experiment(off_cfg, keep_trace=keep_trace)
    on = run_experiment(on_cfg, keep_trace=keep_trace)
    return off, on


def _sweep_target(parameter: str) -> str:
    channel_fields = {f.name for f in dataclasses.fields(ChannelConfig)}
    detector_fields = {f.name for f in dataclasses.fields(DetectorConfig)} - {
        "code_set",
        "polarity_agnostic",
    }
    if parameter in channel_fields:
        return "channel"
    if parameter in detector_fields:
        return "detector"
    raise ValueError(
        f"unknown sweep parameter {parameter!r}; expected a scalar field of "
        "the channel or detector config"
    )


def _replace_parameter(
    config: ExperimentConfig, parameter: str, value: float
) -> ExperimentConfig:
    if _sweep_target(parameter) == "channel":
        new_channel = dataclasses.replace(
            config.channel_config(), **{parameter: value}
        )
        return dataclasses.replace(config, scenario=new_channel)
    coerced: float | int = int(value) if parameter in ("v", "n") else value
    new_detector = dataclasses.replace(config.detector, **{parameter: coerced})
    return dataclasses.replace(config, detector=new_detector)


def sweep(
    config: ExperimentConfig, parameter: str, values: Iterable[float]
) -> list[tuple[float, Metrics]]:
    """One run per value, child seeds derived from the base seed in order."""
    _sweep_target(parameter)
    results: list[tuple[float, Metrics]] = []
    for i, value in enumerate(values):
        point = _replace_parameter(config, parameter, value)
        point = dataclasses.replace(point, seed=derive_seed(config.seed, i))
        results.append((value, run_experiment(point)))
    return results


# ---------------------------------------------------------------------------
# file formats


def write_trace(stream: TextIO, values: Iterable[float]) -> None:
    """One amplitude per line, full float precision (round-trips exactly)."""
    for v in values:
        stream.write(repr(float(v)))
        stream.write("\n")


def read_trace(stream: TextIO) -> np.ndarray:
    values = []
    for line_no, line in enumerate(stream, 1):
        text = line.strip()
        if not text:
            continue
        try:
            values.append(float(text))
        except ValueError:
            raise ValueError(f"trace line {line_no} is not a number: {text!r}") from None
    return np.asarray(values, dtype=np.float64)


def detect_trace(
    trace: np.ndarray,
    detector_config: DetectorConfig,
    filter_config: FilterConfig,
    code_set: GoldCodeSet | None = None,
) -> list[DetectionEvent]:
    """Run the full detector pipeline over a recorded amplitude trace."""
    cfg = detector_config
    if code_set is not None:
        cfg = dataclasses.replace(cfg, code_set=code_set)
    detector = Detector(cfg, filter_config)
    events = []
    for a in trace:
        event = detector.process(float(a))
        if event is not None:
            events.append(event)
    return events


def results_row(parameter_value, metrics: Metrics, seed: int) -> dict:
    return {
        "parameter_value": parameter_value,
        "detection_probability": metrics.detection_probability,
        "false_alarm_probability": metrics.false_alarm_probability,
        "cross_false_alarm_probability": metrics.cross_false_alarm_probability,
        "n_srs": metrics.n_srs,
        "seed": seed,
    }


def _format_cell(value) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_results_csv(stream: TextIO, rows: Iterable[dict]) -> None:
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(RESULTS_HEADER)
    for row in rows:
        writer.writerow([_format_cell(row[key]) for key in RESULTS_HEADER])


def write_events_csv(stream: TextIO, events: Iterable[DetectionEvent]) -> None:
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(EVENTS_HEADER)
    for ev in events:
        writer.writerow([ev.period_index, ev.code_id, repr(float(ev.correlation))])


def read_events_csv(stream: TextIO) -> list[DetectionEvent]:
    reader = csv.reader(stream)
    header = next(reader, None)
    if header != list(EVENTS_HEADER):
        raise ValueError(f"unexpected events header: {header}")
    return [
        DetectionEvent(period_index=int(p), code_id=int(c), correlation=float(r))
        for p, c, r in reader
    ]


def metrics_summary(metrics: Metrics) -> dict:
    return {
        "detection_probability": metrics.detection_probability,
        "detection_ci95": list(metrics.detection_ci),
        "false_alarm_probability": metrics.false_alarm_probability,
        "false_alarm_ci95": list(metrics.false_alarm_ci),
        "cross_false_alarm_probability": metrics.cross_false_alarm_probability,
        "cross_false_alarm_ci95": list(metrics.cross_false_alarm_ci),
        "n_srs": metrics.n_srs,
        "messages": metrics.messages,
        "raw_events": len(metrics.events),
        "deduplicated_events": len(metrics.dedup),
        "simulated_seconds": metrics.simulated_seconds,
    }


def manifest_json(command: str, config: ExperimentConfig | dict, extra: dict | None = None) -> str:
    """Run manifest: resolved config plus tool version; no timestamps so
    identical runs produce identical bytes."""
    resolved = config.to_dict() if isinstance(config, ExperimentConfig) else config
    doc = {
        "tool": "srsbs",
        "version": __version__,
        "command": command,
        "config": resolved,
    }
    if extra:
        doc.update(extra)
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def format_results(rows: list[dict], fmt: str) -> str:
    if fmt == "csv":
        buf = io.StringIO()
        write_results_csv(buf, rows)
        return buf.getvalue()
    if fmt == "json":
        return json.dumps(rows, indent=2) + "\n"
    raise ValueError(f"unknown format {fmt!r}")


def format_events(events: list[DetectionEvent], fmt: str) -> str:
    if fmt == "csv":
        buf = io.StringIO()
        write_events_csv(buf, events)
        return buf.getvalue()
    if fmt == "json":
        return (
            json.dumps(
                [dataclasses.asdict(ev) for ev in events],
                indent=2,
            )
            + "\n"
        )
    raise ValueError(f"unknown format {fmt!r}")
