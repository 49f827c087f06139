"""Synthetic labeled log corpus for the eleven home-network states.

Each sample imitates one monitoring cycle on the home network: the wired
host runs ping, dig, ip route and ethtool, and the access point contributes a
hostapd_cli station dump.  The five outputs are concatenated, each prefixed
with the command that produced it.

The generator is built around two rules:

* Numeric coherence.  RTTs are drawn from the configured link delay and
  jitter, dig query times follow the same link, the station signal follows a
  log-distance path-loss model of distance and transmit power, and loss
  percentages match the number of echo replies actually rendered.

* Keyword neutrality for the "hard" classes.  NORMAL_STATE, HIGH_DELAY and
  HIGH_JITTER render through exactly the same template with fixed number
  formatting, so the three classes differ only in digits.  A model that
  cannot read numbers cannot separate them.

Every sample's random stream is derived from (corpus seed, sample index), so
generation is reproducible sample by sample and order-independent.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from enum import Enum
from pathlib import Path

import numpy as np

from .errors import ConfigurationError, DataFormatError, GenerationError

GENERATOR_VERSION = 1


class ProblemClass(Enum):
    CORRUPT_DEFAULT_ROUTE = "CORRUPT_DEFAULT_ROUTE"
    DNS_WRONG_IP = "DNS_WRONG_IP"
    HIGH_DELAY = "HIGH_DELAY"
    HIGH_JITTER = "HIGH_JITTER"
    HIGH_PACKET_LOSS = "HIGH_PACKET_LOSS"
    HOST_INTERFACE_DOWN = "HOST_INTERFACE_DOWN"
    LOW_AP_TX_POWER = "LOW_AP_TX_POWER"
    NO_DEFAULT_ROUTE = "NO_DEFAULT_ROUTE"
    NORMAL_STATE = "NORMAL_STATE"
    ROUTER_INTERFACE_DOWN = "ROUTER_INTERFACE_DOWN"
    STATION_FAR_AWAY = "STATION_FAR_AWAY"


# Canonical class order: alphabetical, underscores ignored (so NO_DEFAULT_ROUTE
# sorts before NORMAL_STATE). Index in this list is the label id everywhere
# (datasets, model heads, confusion matrices). The enum above is declared in
# this order already; sorting makes the invariant explicit.
CLASSES: list[ProblemClass] = sorted(ProblemClass, key=lambda c: c.value.replace("_", ""))
CLASS_NAMES: list[str] = [c.value for c in CLASSES]
CLASS_INDEX: dict[ProblemClass, int] = {c: i for i, c in enumerate(CLASSES)}

# Baseline parameter ranges for a healthy network.
NORMAL_RANGES = {
    "station_distance_m": (0.0, 10.0),
    "link_delay_ms": (0.0, 100.0),
    "link_jitter_ms": (0.0, 20.0),
    "ap_tx_power_dbm": (15.0, 22.0),
}

# Fault parameter bands, deliberately disjoint from the baseline ranges so a
# one-dimensional threshold on the underlying quantity separates fault from
# normal (checked in the test suite), while the rendered logs still overlap
# in their symptoms.
FAULT_BANDS = {
    "HIGH_DELAY": {"link_delay_ms": (150.0, 400.0)},
    "HIGH_JITTER": {"link_jitter_ms": (40.0, 100.0)},
    "HIGH_PACKET_LOSS": {"packet_loss_pct": (20.0, 80.0)},
    "LOW_AP_TX_POWER": {"ap_tx_power_dbm": (5.0, 12.0)},
    "STATION_FAR_AWAY": {"station_distance_m": (15.0, 40.0)},
}

PING_PROBES = 5
GATEWAY_PING_PROBES = 2  # quick reachability check before the external ping
BASE_RTT_MS = 2.0

TARGET_IP = "198.51.100.7"  # documentation-reserved ranges only
DNS_IP = "203.0.113.53"
GATEWAY_IP = "192.168.1.1"
GATEWAY_BASE_RTT_MS = 0.4
QUERY_DOMAIN = "example.com"
AP_BSSID = "de:ad:be:ef:ca:fe"
STATION_MAC = "fa:ce:db:ad:fe:ed"

# Log-distance path loss: reference loss 40 dB at 1 m, exponent 3.
PATH_LOSS_REF_DB = 40.0
PATH_LOSS_EXPONENT = 3.0
SIGNAL_SHADOW_STD_DB = 2.5


def signal_strength_dbm(distance_m: float, tx_power_dbm: float) -> float:
    """Deterministic received signal at the AP for a station at ``distance_m``.

    Strictly decreasing in distance beyond the 1 m reference point.
    """
    d = max(distance_m, 1.0)
    path_loss = PATH_LOSS_REF_DB + 10.0 * PATH_LOSS_EXPONENT * math.log10(d)
    return tx_power_dbm - path_loss


@dataclass
class ScenarioState:
    station_distance_m: float
    link_delay_ms: float
    link_jitter_ms: float
    ap_tx_power_dbm: float
    packet_loss_pct: float = 0.0
    host_if_down: bool = False
    router_if_down: bool = False
    default_route: str = "ok"  # ok | missing | corrupt
    dns_reachable: bool = True


@dataclass
class LogSample:
    text: str
    label: ProblemClass
    seed_trace: int


def sample_scenario(problem: ProblemClass, rng: np.random.Generator) -> ScenarioState:
    """Draw baseline parameters, then apply the class's fault override."""
    state = ScenarioState(
        station_distance_m=rng.uniform(*NORMAL_RANGES["station_distance_m"]),
        link_delay_ms=rng.uniform(*NORMAL_RANGES["link_delay_ms"]),
        link_jitter_ms=rng.uniform(*NORMAL_RANGES["link_jitter_ms"]),
        ap_tx_power_dbm=rng.uniform(*NORMAL_RANGES["ap_tx_power_dbm"]),
    )
    if problem is ProblemClass.HIGH_DELAY:
        state.link_delay_ms = rng.uniform(*FAULT_BANDS["HIGH_DELAY"]["link_delay_ms"])
    elif problem is ProblemClass.HIGH_JITTER:
        state.link_jitter_ms = rng.uniform(*FAULT_BANDS["HIGH_JITTER"]["link_jitter_ms"])
    elif problem is ProblemClass.HIGH_PACKET_LOSS:
        state.packet_loss_pct = rng.uniform(*FAULT_BANDS["HIGH_PACKET_LOSS"]["packet_loss_pct"])
    elif problem is ProblemClass.LOW_AP_TX_POWER:
        state.ap_tx_power_dbm = rng.uniform(*FAULT_BANDS["LOW_AP_TX_POWER"]["ap_tx_power_dbm"])
    elif problem is ProblemClass.STATION_FAR_AWAY:
        state.station_distance_m = rng.uniform(*FAULT_BANDS["STATION_FAR_AWAY"]["station_distance_m"])
    elif problem is ProblemClass.HOST_INTERFACE_DOWN:
        state.host_if_down = True
    elif problem is ProblemClass.ROUTER_INTERFACE_DOWN:
        state.router_if_down = True
    elif problem is ProblemClass.NO_DEFAULT_ROUTE:
        state.default_route = "missing"
    elif problem is ProblemClass.CORRUPT_DEFAULT_ROUTE:
        state.default_route = "corrupt"
    elif problem is ProblemClass.DNS_WRONG_IP:
        state.dns_reachable = False
    return state


def _check_consistency(state: ScenarioState, problem: ProblemClass) -> None:
    expected = sample_scenario(problem, np.random.default_rng(0))
    for flag in ("host_if_down", "router_if_down", "default_route", "dns_reachable"):
        if getattr(state, flag) != getattr(expected, flag):
            raise GenerationError(
                f"scenario flag {flag}={getattr(state, flag)!r} inconsistent "
                f"with class {problem.value}"
            )


def _draw_rtts(state: ScenarioState, rng: np.random.Generator, base_rtt: float,
               probes: int) -> list[float]:
    rtts = base_rtt + state.link_delay_ms + rng.normal(0.0, state.link_jitter_ms, probes)
    return [max(float(r), 0.1) for r in rtts]


def _render_one_ping(
    state: ScenarioState,
    rng: np.random.Generator,
    target: str,
    base_rtt: float,
    ttl: int,
    probes: int,
    outcome: str,
    host_octet: int,
) -> str:
    """One `ping -c <probes> <target>` run.

    ``outcome`` is one of ok, loss, no_route (socket error before sending),
    host_unreachable (ICMP errors from the host itself) or net_unreachable
    (ICMP errors from the gateway).
    """
    lines = [f"$ ping -c {probes} {target}"]
    if outcome == "no_route":
        lines.append("ping: connect: Network is unreachable")
        return "\n".join(lines)

    lines.append(f"PING {target} ({target}) 56(84) bytes of data.")
    total_ms = (probes - 1) * 1000 + int(rng.integers(0, 120))
    if outcome in ("host_unreachable", "net_unreachable"):
        if outcome == "host_unreachable":
            src, reason = f"192.168.1.{host_octet}", "Destination Host Unreachable"
        else:
            src, reason = GATEWAY_IP, "Destination Net Unreachable"
        for seq in range(1, probes + 1):
            lines.append(f"From {src} icmp_seq={seq} {reason}")
        lines.append(f"--- {target} ping statistics ---")
        lines.append(
            f"{probes} packets transmitted, 0 received, +{probes} errors, "
            f"100% packet loss, time {total_ms}ms"
        )
        return "\n".join(lines)

    loss_pct_param = state.packet_loss_pct if outcome == "loss" else 0.0
    delivered = rng.uniform(0.0, 100.0, probes) >= loss_pct_param
    rtts = _draw_rtts(state, rng, base_rtt, probes)
    received = [(seq, rtt) for seq, (ok, rtt) in enumerate(zip(delivered, rtts), start=1) if ok]
    for seq, rtt in received:
        lines.append(f"64 bytes from {target}: icmp_seq={seq} ttl={ttl} time={rtt:.2f} ms")
    loss_pct = round(100 * (probes - len(received)) / probes)
    lines.append(f"--- {target} ping statistics ---")
    lines.append(
        f"{probes} packets transmitted, {len(received)} received, "
        f"{loss_pct}% packet loss, time {total_ms}ms"
    )
    if received:
        values = [rtt for _, rtt in received]
        avg = sum(values) / len(values)
        mdev = math.sqrt(sum((v - avg) ** 2 for v in values) / len(values))
        lines.append(
            f"rtt min/avg/max/mdev = {min(values):.2f}/{avg:.2f}/{max(values):.2f}/{mdev:.2f} ms"
        )
    return "\n".join(lines)


def _render_ping(state: ScenarioState, rng: np.random.Generator, host_octet: int) -> str:
    # The monitoring script pings the gateway first (link-local, reachable
    # even without a default route), then an external host.
    if state.host_if_down:
        gateway_outcome = "no_route"
    elif state.packet_loss_pct > 0:
        gateway_outcome = "loss"
    else:
        gateway_outcome = "ok"

    if state.host_if_down or state.default_route == "missing":
        external_outcome = "no_route"
    elif state.default_route == "corrupt":
        external_outcome = "host_unreachable"
    elif state.router_if_down:
        external_outcome = "net_unreachable"
    elif state.packet_loss_pct > 0:
        external_outcome = "loss"
    else:
        external_outcome = "ok"

    gateway = _render_one_ping(
        state, rng, GATEWAY_IP, GATEWAY_BASE_RTT_MS, 64, GATEWAY_PING_PROBES,
        gateway_outcome, host_octet,
    )
    external = _render_one_ping(
        state, rng, TARGET_IP, BASE_RTT_MS, 56, PING_PROBES,
        external_outcome, host_octet,
    )
    return gateway + "\n" + external


def _dig_succeeds(state: ScenarioState, rng: np.random.Generator) -> bool:
    if state.host_if_down or state.router_if_down or not state.dns_reachable:
        return False
    if state.default_route != "ok":
        return False
    if state.packet_loss_pct > 0:
        # dig retries, so only heavy loss usually takes the query down
        return rng.uniform(0.0, 1.0) >= (state.packet_loss_pct / 100.0) ** 2
    return True


def _render_dig(state: ScenarioState, rng: np.random.Generator) -> str:
    lines = [f"$ dig {QUERY_DOMAIN}"]
    lines.append(f"; <<>> DiG 9.16.1 <<>> {QUERY_DOMAIN}")
    lines.append(";; global options: +cmd")
    if not _dig_succeeds(state, rng):
        lines.append(";; connection timed out; no servers could be reached")
        return "\n".join(lines)

    query_time = int(
        BASE_RTT_MS + state.link_delay_ms + abs(rng.normal(0.0, state.link_jitter_ms))
    )
    msg_id = int(rng.integers(10000, 65536))  # fixed width keeps field positions stable
    lines += [
        ";; Got answer:",
        f";; ->>HEADER<<- opcode: QUERY, status: NOERROR, id: {msg_id}",
        ";; flags: qr rd ra; QUERY: 1, ANSWER: 1, AUTHORITY: 0, ADDITIONAL: 1",
        "",
        ";; OPT PSEUDOSECTION:",
        "; EDNS: version: 0, flags:; udp: 4096",
        ";; QUESTION SECTION:",
        f";{QUERY_DOMAIN}.\t\t\tIN\tA",
        "",
        ";; ANSWER SECTION:",
        f"{QUERY_DOMAIN}.\t\t3600\tIN\tA\t{TARGET_IP}",
        "",
        f";; Query time: {query_time} msec",
        f";; SERVER: {DNS_IP}#53",
        ";; MSG SIZE  rcvd: 56",
    ]
    return "\n".join(lines)


def _render_ip_route(state: ScenarioState, rng: np.random.Generator, host_octet: int,
                     gateway_octet: int) -> str:
    lines = ["$ ip route"]
    if not state.host_if_down:  # interface down: kernel dropped its routes
        if state.default_route == "ok":
            lines.append(f"default via {GATEWAY_IP} dev eth0 proto dhcp metric 100")
        elif state.default_route == "corrupt":
            lines.append(f"default via 192.168.1.{gateway_octet} dev eth0 proto static metric 100")
        lines.append(
            f"192.168.1.0/24 dev eth0 proto kernel scope link src 192.168.1.{host_octet} metric 100"
        )
    if state.host_if_down:
        flags, link_state = "<BROADCAST,MULTICAST>", "DOWN"
    else:
        flags, link_state = "<BROADCAST,MULTICAST,UP,LOWER_UP>", "UP"
    lines += [
        "$ ip link show eth0",
        f"2: eth0: {flags} mtu 1500 qdisc fq_codel state {link_state} "
        "mode DEFAULT group default qlen 1000",
        "    link/ether fa:ce:db:ad:fe:ed brd ff:ff:ff:ff:ff:ff",
    ]
    return "\n".join(lines)


def _render_ethtool(state: ScenarioState) -> str:
    lines = [
        "$ ethtool eth0",
        "Settings for eth0:",
        "\tSupported ports: [ TP MII ]",
        "\tSupported link modes:   Not reported",
        "\tSupported pause frame use: Symmetric Receive-only",
        "\tSupports auto-negotiation: Yes",
        "\tSupported FEC modes: Not reported",
        "\tAdvertised link modes:  Not reported",
        "\tAdvertised pause frame use: Symmetric Receive-only",
        "\tAdvertised auto-negotiation: Yes",
        "\tAdvertised FEC modes: Not reported",
        "\tLink partner advertised pause frame use: Symmetric",
        "\tLink partner advertised auto-negotiation: Yes",
        "\tLink partner advertised FEC modes: Not reported",
    ]
    if state.host_if_down:
        lines += ["\tSpeed: Unknown!", "\tDuplex: Unknown!"]
    else:
        lines += ["\tSpeed: 1000Mb/s", "\tDuplex: Full"]
    lines += [
        "\tPort: Twisted Pair",
        "\tTransceiver: internal",
        "\tAuto-negotiation: on",
        "\tMDI-X: on (auto)",
        "\tSupports Wake-on: pumbg",
        "\tWake-on: d",
        "\tCurrent message level: drv probe link ifdown ifup",
        f"\tLink detected: {'no' if state.host_if_down else 'yes'}",
        "$ ethtool -i eth0",
        "driver: virtio_net",
        "expansion-rom-version:",
        "supports-statistics: yes",
        "supports-test: no",
        "supports-eeprom-access: no",
        "supports-register-dump: no",
        "supports-priv-flags: no",
        "$ ethtool -k eth0",
        "Features for eth0:",
        "rx-checksumming: on [fixed]",
        "tx-checksumming: on",
        "scatter-gather: on",
        "tcp-segmentation-offload: on",
        "generic-segmentation-offload: on",
        "generic-receive-offload: on",
        "large-receive-offload: off [fixed]",
        "rx-vlan-offload: off [fixed]",
        "tx-vlan-offload: off [fixed]",
        "ntuple-filters: off [fixed]",
        "receive-hashing: off [fixed]",
        "highdma: on [fixed]",
        "tx-gre-segmentation: off [fixed]",
        "tx-udp-segmentation: off [fixed]",
        "tx-gso-robust: on [fixed]",
        "tx-nocache-copy: off",
        "rx-all: off [fixed]",
        "rx-fcs: off [fixed]",
        "loopback: off [fixed]",
        "hw-tc-offload: off [fixed]",
        "esp-hw-offload: off [fixed]",
        "macsec-hw-offload: off [fixed]",
        "rx-gro-list: off",
        "tls-hw-rx-offload: off [fixed]",
    ]
    return "\n".join(lines)


def _render_hostapd(state: ScenarioState, rng: np.random.Generator) -> str:
    tx_dbm = round(state.ap_tx_power_dbm)
    true_signal = signal_strength_dbm(state.station_distance_m, state.ap_tx_power_dbm)
    signal = round(true_signal + rng.normal(0.0, SIGNAL_SHADOW_STD_DB))
    avg_signal = round(true_signal + rng.normal(0.0, 1.0))
    beacon_signal = round(true_signal + rng.normal(0.0, SIGNAL_SHADOW_STD_DB))
    connected_s = int(rng.integers(10, 86400))
    # Station traffic from the periodic image downloads shows up as counters.
    images = int(rng.integers(1, 6))
    rx_bytes = int(rng.uniform(50_000, 900_000) * images)
    tx_bytes = int(rng.uniform(2_000, 60_000))
    rx_packets = max(1, rx_bytes // 1400) + int(rng.integers(0, 40))
    tx_packets = max(1, tx_bytes // 120) + int(rng.integers(0, 40))
    lines = [
        "$ hostapd_cli status; hostapd_cli all_sta",
        "Selected interface 'wlan0'",
        "state=ENABLED",
        "phy=phy0",
        "country_code=DE",
        "hw_mode=g",
        "freq=2437",
        "channel=6",
        "beacon_int=100",
        "dtim_period=2",
        "ssid=HomeNet",
        "key_mgmt=WPA-PSK",
        "group_cipher=CCMP",
        "rsn_pairwise_cipher=CCMP",
        "config_methods=label display push_button keypad",
        f"bssid={AP_BSSID}",
        f"tx_power={tx_dbm} dBm",
        "num_sta=1",
        STATION_MAC,
        "flags=[AUTH][ASSOC][AUTHORIZED][SHORT_PREAMBLE][WMM]",
        "capability=ess short_slot_time short_preamble",
        "listen_interval=10",
        "supported_rates=cck ofdm qam legacy",
        "aid=1",
        f"signal={signal} dBm",
        f"avg_signal={avg_signal} dBm",
        f"beacon_signal={beacon_signal} dBm",
        f"connected_time={connected_s} s",
        f"inactive_msec={int(rng.integers(0, 1000))}",
        f"rx_packets={rx_packets}",
        f"tx_packets={tx_packets}",
        f"rx_bytes={rx_bytes}",
        f"tx_bytes={tx_bytes}",
    ]
    return "\n".join(lines)


def render_sample(state: ScenarioState, problem: ProblemClass,
                  rng: np.random.Generator, seed_trace: int = -1) -> LogSample:
    """Render one monitoring cycle for ``state`` into a labeled log sample."""
    _check_consistency(state, problem)
    host_octet = int(rng.integers(2, 255))
    gateway_octet = int(rng.integers(2, 255))
    while gateway_octet == host_octet:
        gateway_octet = int(rng.integers(2, 255))
    sections = [
        _render_ping(state, rng, host_octet),
        _render_dig(state, rng),
        _render_ip_route(state, rng, host_octet, gateway_octet),
        _render_ethtool(state),
        _render_hostapd(state, rng),
    ]
    return LogSample(text="\n".join(sections) + "\n", label=problem, seed_trace=seed_trace)


def generate_dataset(
    per_class_count: int,
    seed: int,
    split_fractions: tuple[float, float, float] = (0.7, 0.15, 0.15),
) -> tuple[list[LogSample], list[LogSample], list[LogSample]]:
    """Generate, shuffle, and split a balanced corpus.

    Fully determined by the arguments: sample ``i`` of class ``c`` always uses
    the random stream seeded with (seed, global sample index).
    """
    if per_class_count < 3:
        raise ConfigurationError(f"per_class_count must be >= 3, got {per_class_count}")
    if seed < 0:
        raise ConfigurationError(f"seed must be >= 0, got {seed}")
    if len(split_fractions) != 3 or any(f <= 0 for f in split_fractions):
        raise ConfigurationError(f"split fractions must be three positive values, got {split_fractions}")
    if abs(sum(split_fractions) - 1.0) > 1e-9:
        raise ConfigurationError(f"split fractions must sum to 1, got {split_fractions}")

    samples: list[LogSample] = []
    for class_pos, problem in enumerate(CLASSES):
        for i in range(per_class_count):
            index = class_pos * per_class_count + i
            rng = np.random.default_rng([seed, index])
            state = sample_scenario(problem, rng)
            samples.append(render_sample(state, problem, rng, seed_trace=index))

    order = np.random.default_rng([seed, 2**40]).permutation(len(samples))
    shuffled = [samples[int(i)] for i in order]

    n = len(shuffled)
    n_train = int(n * split_fractions[0])
    n_valid = int(n * split_fractions[1])
    train = shuffled[:n_train]
    valid = shuffled[n_train : n_train + n_valid]
    test = shuffled[n_train + n_valid :]
    return train, valid, test


# ---------------------------------------------------------------------------
# Dataset files: one JSON record per line, plus a generation manifest.

def save_samples(path: str | Path, samples: list[LogSample]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for s in samples:
            fh.write(json.dumps(
                {"text": s.text, "label": s.label.value, "seed_trace": s.seed_trace},
                ensure_ascii=False,
            ))
            fh.write("\n")


def load_samples(path: str | Path) -> list[LogSample]:
    samples = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
                samples.append(LogSample(
                    text=rec["text"],
                    label=ProblemClass(rec["label"]),
                    seed_trace=int(rec.get("seed_trace", -1)),
                ))
            except (ValueError, KeyError) as exc:
                raise DataFormatError(f"{path}:{lineno}: bad dataset record: {exc}") from exc
    return samples


def write_dataset(
    out_dir: str | Path,
    per_class_count: int,
    seed: int,
    split_fractions: tuple[float, float, float] = (0.7, 0.15, 0.15),
) -> dict:
    """Generate and write train/valid/test JSONL files plus a manifest."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    train, valid, test = generate_dataset(per_class_count, seed, split_fractions)
    save_samples(out / "train.jsonl", train)
    save_samples(out / "valid.jsonl", valid)
    save_samples(out / "test.jsonl", test)
    manifest = {
        "generator_version": GENERATOR_VERSION,
        "seed": seed,
        "per_class_count": per_class_count,
        "split_fractions": list(split_fractions),
        "counts": {"train": len(train), "valid": len(valid), "test": len(test)},
        "classes": CLASS_NAMES,
        "fault_bands": FAULT_BANDS,
        "normal_ranges": NORMAL_RANGES,
        "base_rtt_ms": BASE_RTT_MS,
        "ping_probes": PING_PROBES,
    }
    with open(out / "manifest.json", "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return manifest


def load_splits(data_dir: str | Path) -> tuple[list[LogSample], list[LogSample], list[LogSample]]:
    data = Path(data_dir)
    return (
        load_samples(data / "train.jsonl"),
        load_samples(data / "valid.jsonl"),
        load_samples(data / "test.jsonl"),
    )
