"""Scenario runner: pick a handshake variant, an intruder mode, and seeds;
emit transcripts and one report line per run.

The three-party cast is fixed: honest devices A and B, intruder C. Each
master seed deterministically derives the per-device challenge streams and
the pairing randomness, so any report line can be reproduced from its
scenario name and seed alone.
"""

import argparse
import random
import sys
from dataclasses import dataclass

from .adversary import (
    AttackVerdict,
    Confidentiality,
    Integrity,
    IntruderMode,
    new_intruder,
    verdict,
)
from .crypto import (
    Challenge,
    DeviceId,
    DhParams,
    LinkKey,
    Pin,
    combination_link_key,
    has_full_order,
    init_key,
    xor_bytes,
)
from .protocol import AuthOutcome, DeviceState, Variant, new_device, rtt_estimate
from .simnet import Detection, LinkConfig, Transcript, delay_detector, run

__all__ = ["ScenarioConfig", "ScenarioResult", "ConfigError", "run_scenario", "main"]

ADDR_A = DeviceId.from_hex("aa0000000001")
ADDR_B = DeviceId.from_hex("bb0000000002")
ADDR_C = DeviceId.from_hex("cc0000000003")

# group moduli stay desk-scale: primitive-root validation and the
# brute-force experiments must stay interactive
DH_P_CAP = 1 << 48


class ConfigError(Exception):
    """Invalid scenario configuration; maps to exit status 2."""


@dataclass(frozen=True)
class ScenarioConfig:
    variant: Variant = Variant.LEGACY
    intruder: IntruderMode | None = None
    initiator: str = "A"
    seed: int = 0
    seeds_count: int = 1
    pin: bytes = b"0000"
    latency_ms: int = 10
    timeout_ms: int = 2000
    detect_factor: float = 1.5
    dh_p: int = 2147483647
    dh_alpha: int = 7
    output: str = "text"

    @property
    def scenario_name(self) -> str:
        mode = self.intruder.value if self.intruder is not None else "none"
        return f"{self.variant.value}+{mode}"


@dataclass(frozen=True)
class ScenarioResult:
    seed: int
    transcript: Transcript
    outcomes: dict[DeviceId, AuthOutcome]
    score: AttackVerdict
    baselines: dict[DeviceId, int]
    link_key: LinkKey


def validate(config: ScenarioConfig) -> None:
    if config.initiator not in ("A", "C"):
        raise ConfigError(f"initiator must be A or C, got {config.initiator}")
    if config.initiator == "C" and config.intruder is not IntruderMode.ORIGINATE_TO_A:
        raise ConfigError("initiator C requires the originate intruder mode")
    if config.seeds_count < 1:
        raise ConfigError(f"seeds-count must be at least 1, got {config.seeds_count}")
    if not 1 <= len(config.pin) <= 16:
        raise ConfigError(f"pin must be 1 to 16 octets, got {len(config.pin)}")
    if config.latency_ms <= 0:
        raise ConfigError(f"latency must be positive, got {config.latency_ms}")
    if config.timeout_ms <= config.latency_ms:
        raise ConfigError("timeout must exceed the per-hop latency")
    if config.detect_factor <= 1:
        raise ConfigError(f"detect-factor must exceed 1, got {config.detect_factor}")
    if config.output not in ("text", "jsonl"):
        raise ConfigError(f"output must be text or jsonl, got {config.output}")
    if config.variant is Variant.DH_IMPROVED:
        _validate_group(config.dh_p, config.dh_alpha)


def _validate_group(p: int, alpha: int) -> None:
    if p >= DH_P_CAP:
        raise ConfigError(f"dh-p must be below 2^48, got {p}")
    try:
        DhParams(p=p, alpha=alpha)
    except ValueError as err:
        raise ConfigError(str(err)) from None
    if not has_full_order(alpha, p):
        raise ConfigError(f"dh-alpha {alpha} is not a primitive root of {p}")


def _derive_link_key(pin: Pin, master: random.Random) -> LinkKey:
    """Pairing phase: both contributions cross the wire masked by the
    PIN-derived bootstrap key, so the bootstrap key cancels out of the
    combined result; the link key depends on the contributions alone."""
    pairing_rand = Challenge(master.randbytes(16))
    bootstrap = init_key(pin, ADDR_A, pairing_rand)
    rand_a = Challenge(master.randbytes(16))
    rand_b = Challenge(master.randbytes(16))
    masked_a = xor_bytes(rand_a.value, bootstrap.value)
    masked_b = xor_bytes(rand_b.value, bootstrap.value)
    return combination_link_key(
        Challenge(xor_bytes(masked_a, bootstrap.value)),
        ADDR_A,
        Challenge(xor_bytes(masked_b, bootstrap.value)),
        ADDR_B,
    )


def _build_devices(
    config: ScenarioConfig, link_key: LinkKey, seed_a: int, seed_b: int
) -> tuple[DeviceState, DeviceState]:
    params = (
        DhParams(p=config.dh_p, alpha=config.dh_alpha)
        if config.variant is Variant.DH_IMPROVED
        else None
    )
    dev_a = new_device(ADDR_A, config.variant, link_key, seed_a, dh_params=params)
    dev_b = new_device(ADDR_B, config.variant, link_key, seed_b, dh_params=params)
    return dev_a, dev_b


def run_scenario(config: ScenarioConfig, seed: int) -> ScenarioResult:
    """One full run at one seed: baseline calibration, the run itself,
    detection, and scoring."""
    master = random.Random(seed)
    seed_a = master.getrandbits(64)
    seed_b = master.getrandbits(64)
    seed_c = master.getrandbits(64)
    link_key = _derive_link_key(Pin(config.pin), master)
    links = LinkConfig(latency_ms=config.latency_ms, timeout_ms=config.timeout_ms)

    # intruder-free pass over the same seeds calibrates each device's
    # expected round trip for this variant and latency
    base_a, base_b = _build_devices(config, link_key, seed_a, seed_b)
    run([base_a, base_b], None, links, ADDR_A, ADDR_B, seed=seed)
    baselines = {}
    for base in (base_a, base_b):
        baseline = rtt_estimate(base)
        assert baseline is not None
        baselines[base.id] = baseline

    dev_a, dev_b = _build_devices(config, link_key, seed_a, seed_b)
    intruder = None
    if config.intruder is not None:
        params = (
            DhParams(p=config.dh_p, alpha=config.dh_alpha)
            if config.variant is Variant.DH_IMPROVED
            else None
        )
        intruder = new_intruder(
            ADDR_C,
            config.intruder,
            config.variant,
            ADDR_A,
            ADDR_B,
            rng_seed=seed_c,
            dh_params=params,
        )
    initiator = ADDR_C if config.initiator == "C" else ADDR_A
    transcript, outcomes = run([dev_a, dev_b], intruder, links, initiator, ADDR_B, seed=seed)

    detection = Detection.NONE
    for device_id in (ADDR_A, ADDR_B):
        flag = delay_detector(transcript, baselines[device_id], config.detect_factor, device_id)
        if flag is Detection.DELAY_FLAGGED:
            detection = Detection.DELAY_FLAGGED
    if intruder is not None:
        score = verdict(intruder, outcomes, transcript, detection, link_key)
    else:
        score = AttackVerdict(
            attack_success=False,
            integrity=Integrity.MAINTAINED,
            confidentiality=Confidentiality.MAINTAINED,
            detection=detection,
        )
    return ScenarioResult(
        seed=seed,
        transcript=transcript,
        outcomes=outcomes,
        score=score,
        baselines=baselines,
        link_key=link_key,
    )


def report_line(config: ScenarioConfig, result: ScenarioResult) -> str:
    score = result.score
    return (
        f"scenario={config.scenario_name} "
        f"seed={result.seed} "
        f"attack_success={'true' if score.attack_success else 'false'} "
        f"integrity={score.integrity.value} "
        f"confidentiality={score.confidentiality.value} "
        f"detection={score.detection.value} "
        f"messages={len(result.transcript.events)}"
    )


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="btauthsim",
        description="Simulate pairing authentication runs and relay attacks.",
    )
    parser.add_argument("--variant", choices=[v.value for v in Variant], default="legacy")
    parser.add_argument(
        "--intruder",
        choices=["none"] + [m.value for m in IntruderMode],
        default="none",
    )
    parser.add_argument("--initiator", choices=["A", "C"], default="A")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--seeds-count", type=int, default=1)
    parser.add_argument("--pin", default="0000")
    parser.add_argument("--latency-ms", type=int, default=10)
    parser.add_argument("--timeout-ms", type=int, default=2000)
    parser.add_argument("--detect-factor", type=float, default=1.5)
    parser.add_argument("--dh-p", type=int, default=2147483647)
    parser.add_argument("--dh-alpha", type=int, default=7)
    parser.add_argument("--output", choices=["text", "jsonl"], default="text")
    parser.add_argument(
        "--transcript", action="store_true", help="print each run's transcript before its report"
    )
    parser.add_argument("--out", default=None, help="write to this file instead of stdout")
    return parser


def _config_from_args(args: argparse.Namespace) -> ScenarioConfig:
    return ScenarioConfig(
        variant=Variant(args.variant),
        intruder=None if args.intruder == "none" else IntruderMode(args.intruder),
        initiator=args.initiator,
        seed=args.seed,
        seeds_count=args.seeds_count,
        pin=args.pin.encode(),
        latency_ms=args.latency_ms,
        timeout_ms=args.timeout_ms,
        detect_factor=args.detect_factor,
        dh_p=args.dh_p,
        dh_alpha=args.dh_alpha,
        output=args.output,
    )


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    config = _config_from_args(args)
    try:
        validate(config)
    except ConfigError as err:
        print(f"error: {err}", file=sys.stderr)
        return 2

    sink = open(args.out, "w") if args.out else sys.stdout
    try:
        for offset in range(config.seeds_count):
            result = run_scenario(config, config.seed + offset)
            if args.transcript:
                text = (
                    result.transcript.to_jsonl()
                    if config.output == "jsonl"
                    else result.transcript.to_text()
                )
                sink.write(text)
            sink.write(report_line(config, result) + "\n")
    finally:
        if sink is not sys.stdout:
            sink.close()
    return 0


if __name__ == "__main__":
    sys.exit(main())
