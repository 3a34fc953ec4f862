"""Experiment campaigns: per-cell runs, analytic/simulated lost sets, CSV
reports with 99% confidence intervals, and the simulated-vs-analytic
oracle-equivalence suite.

A campaign iterates cells (protocol x adversary behavior x attack-edge
budget).  Each run derives its own seed from the master seed, places the
attack edges, draws the root uniformly among honest nodes, computes the
analytic containment report, and (unless analytic-only) executes the
simulator and measures the realized lost set.  Everything is deterministic
end to end for a fixed master seed: re-running a campaign reproduces the CSV
byte for byte (the timestamp header line can be suppressed).
"""

from __future__ import annotations

import hashlib
import io
import math
import time
from dataclasses import dataclass, field, replace
from datetime import datetime, timezone
from random import Random

from .adversary import AdversaryBehavior, AdversaryConfig, place_attack_edges
from .analysis import (
    ContainmentReport,
    RunSummary,
    campaign_stats,
    containment_sets,
    rln,
    simulated_lost_set,
)
from .attestation import Deltas
from .graph import (
    Graph,
    GraphMetrics,
    extract_largest_component,
    generate_erdos_renyi,
    load_edge_list,
    metrics,
    randomize_preserving_degrees,
)
from .protocol import InitMode, ProtocolKind
from .simcore import (
    RunConfig,
    Snapshot,
    WalkStatus,
    consistency_round,
    convergence_round,
    count_disturbances,
    detect_stable,
    run,
    snapshot_status,
)

CSV_COLUMNS = (
    "protocol",
    "behavior",
    "g",
    "run_index",
    "seed",
    "root",
    "rln_analytic",
    "rln_simulated",
    "mean_dist_root",
    "mean_dist_adv",
    "effective_adv_dist",
    "d_m_r",
    "convergence_round",
    "ties_count",
)

_BEHAVIORS = {
    "disturb": AdversaryBehavior.DISTURB,
    "cheat": AdversaryBehavior.CHEAT_MIN_LEVEL,
    "honest": AdversaryBehavior.HONEST_MIN_LEVEL,
}
_PROTOCOLS = {
    "attested": ProtocolKind.ATTESTED,
    "baseline": ProtocolKind.BASELINE,
}


def derive_seed(*parts) -> int:
    """Stable 64-bit seed from a tuple of labels (platform-independent)."""
    data = "\x1f".join(str(p) for p in parts).encode()
    return int.from_bytes(hashlib.blake2b(data, digest_size=8).digest(), "big")


@dataclass(frozen=True)
class CampaignConfig:
    graph_spec: str
    protocols: tuple[str, ...] = ("attested", "baseline")
    behaviors: tuple[str, ...] = ("disturb",)
    attack_edges: tuple[int, ...] = (25,)
    runs: int = 100
    master_seed: int = 1
    delta_d: int = 1
    delta_e: int = 1
    delta_c: int | None = None  # None = auto: (g + 2) * (delta_d + delta_e)
    analytic_only: bool = True
    output: str | None = None
    timestamp_header: bool = True
    lcc: bool = True

    def __post_init__(self):
        if self.runs < 1:
            raise ValueError("need at least one run per cell")
        if any(g < 1 for g in self.attack_edges):
            raise ValueError("attack-edge counts must be positive")
        for p in self.protocols:
            if p not in _PROTOCOLS:
                raise ValueError(f"unknown protocol {p!r}")
        for b in self.behaviors:
            if b not in _BEHAVIORS:
                raise ValueError(f"unknown behavior {b!r}")


def parse_campaign_config(text: str) -> CampaignConfig:
    """Parse the flat key = value campaign file format.

    Blank lines and '#' comments are ignored.  List-valued keys
    (protocols, behaviors, attack_edges) take comma-separated values.
    """
    raw: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise ValueError(f"line {lineno}: expected 'key = value'")
        key, _, value = stripped.partition("=")
        raw[key.strip()] = value.strip()

    def take_bool(key: str, default: bool) -> bool:
        if key not in raw:
            return default
        val = raw.pop(key).lower()
        if val in ("true", "1", "yes", "on"):
            return True
        if val in ("false", "0", "no", "off"):
            return False
        raise ValueError(f"{key}: expected a boolean, got {val!r}")

    if "graph" not in raw:
        raise ValueError("missing required key 'graph'")
    cfg = CampaignConfig(
        graph_spec=raw.pop("graph"),
        protocols=tuple(
            s.strip() for s in raw.pop("protocols", "attested,baseline").split(",")
        ),
        behaviors=tuple(s.strip() for s in raw.pop("behaviors", "disturb").split(",")),
        attack_edges=tuple(
            int(s) for s in raw.pop("attack_edges", "25").split(",")
        ),
        runs=int(raw.pop("runs", "100")),
        master_seed=int(raw.pop("master_seed", "1")),
        delta_d=int(raw.pop("delta_d", "1")),
        delta_e=int(raw.pop("delta_e", "1")),
        delta_c=int(raw["delta_c"]) if raw.pop("delta_c", "") else None,
        analytic_only=take_bool("analytic_only", True),
        output=raw.pop("output", "") or None,
        timestamp_header=take_bool("timestamp_header", True),
        lcc=take_bool("lcc", True),
    )
    if raw:
        raise ValueError(f"unknown config keys: {sorted(raw)}")
    return cfg


def graph_from_spec(spec: str, master_seed: int = 1, lcc: bool = True) -> Graph:
    """Build the honest graph from a spec string.

    Accepted forms: ``er(N,M)`` for a uniform random graph, ``randomized(PATH)``
    for a degree-preserving shuffle of a file, ``file:PATH`` or a bare path.
    """
    spec = spec.strip()
    if spec.startswith("er(") and spec.endswith(")"):
        inner = spec[3:-1]
        n_str, m_str = inner.split(",")
        g = generate_erdos_renyi(int(n_str), int(m_str), derive_seed(master_seed, "er"))
        if lcc:
            g, _ = extract_largest_component(g)
        return g
    if spec.startswith("randomized(") and spec.endswith(")"):
        path = spec[len("randomized(") : -1]
        with open(path, "r", encoding="utf-8") as fp:
            loaded = load_edge_list(fp, largest_component=lcc)
        return randomize_preserving_degrees(
            loaded.graph, derive_seed(master_seed, "randomize")
        )
    path = spec[len("file:") :] if spec.startswith("file:") else spec
    with open(path, "r", encoding="utf-8") as fp:
        return load_edge_list(fp, largest_component=lcc).graph


def analytic_lost_set(report_cheat: ContainmentReport,
                      report_nocheat: ContainmentReport,
                      protocol: str, behavior: str) -> frozenset[int]:
    """Which analytic set the theory assigns to a (protocol, behavior) cell."""
    if protocol == "baseline":
        return report_cheat.baseline_lost
    if behavior == "cheat":
        return report_cheat.containment_set
    if behavior == "disturb":
        return report_cheat.strict_set
    return report_nocheat.strict_set  # non-cheating adversary, strict set


def _root_and_report(
    aug: Graph, m: int, honest_n: int, rng: Random, need_nocheat: bool
) -> tuple[int, ContainmentReport, ContainmentReport | None]:
    last_err: Exception | None = None
    for _ in range(10):
        root = rng.randrange(honest_n)
        try:
            rep = containment_sets(aug, root, m, cheat=True)
        except ValueError as exc:
            last_err = exc
            continue
        rep_nc = containment_sets(aug, root, m, cheat=False) if need_nocheat else None
        return root, rep, rep_nc
    raise ValueError(f"no usable root found after 10 attempts: {last_err}")


def _sim_parameters(report: ContainmentReport, g_atk: int, deltas: Deltas):
    finite = [d for d in report.dist_root if math.isfinite(d)]
    diam_ub = 2 * int(max(finite)) if finite else 2
    t0 = diam_ub + 1
    window = 2 * (diam_ub + 1) + 2 * g_atk + 6
    budget = report.disturbance_budget
    max_rounds = min(t0 + 2 * budget + window + 60, 4000)
    return diam_ub, t0, window, max_rounds


def simulate_run(
    aug: Graph,
    m: int,
    root: int,
    protocol: str,
    behavior: str,
    g_atk: int,
    run_seed: int,
    report: ContainmentReport,
    deltas: Deltas,
):
    """Full-protocol execution of one campaign run; returns the outcome, the
    measured lost set, and a per-run summary."""
    honest = frozenset(range(aug.n)) - {m}
    if behavior == "disturb":
        strict = (
            report.strict_set if protocol == "attested" else report.baseline_lost
        )
        candidates = honest - strict
    else:
        candidates = honest
    _, t0, window, max_rounds = _sim_parameters(report, g_atk, deltas)
    cfg = RunConfig(
        graph=aug,
        root=root,
        protocol=_PROTOCOLS[protocol],
        adversary=AdversaryConfig(_BEHAVIORS[behavior], g_atk, derive_seed(run_seed, "adv")),
        adversary_node=m,
        deltas=deltas,
        init_mode=InitMode.CLEAN,
        seed=run_seed,
        max_rounds=max_rounds,
        stability_window=window,
        stability_candidates=frozenset(candidates),
    )
    outcome = run(cfg)
    last_round = outcome.trace[-1].round
    start = max(t0, last_round - window)
    lost = simulated_lost_set(outcome, start)
    d_r = float(sum(report.dist_root[u] for u in honest) / len(honest))
    d_m = float(sum(report.dist_adv[u] for u in honest) / len(honest))
    summary = RunSummary(
        rln=len(lost) / len(honest),
        mean_dist_root=d_r,
        mean_dist_adv=d_m,
        effective_adv_dist=d_m + report.adv_root_distance - 1.0,
        convergence_round=convergence_round(outcome.trace, candidates),
    )
    return outcome, lost, summary


def run_campaign(cfg: CampaignConfig) -> list[dict]:
    """Execute a campaign and return the ordered CSV rows (runs + summaries).

    All protocols are evaluated on the same sequence of placements and roots
    per (behavior, attack-edge budget) so they are directly comparable; the
    three distance passes per run are shared between them.
    """
    base_graph = graph_from_spec(cfg.graph_spec, cfg.master_seed, cfg.lcc)
    honest_n = base_graph.n
    step = cfg.delta_d + cfg.delta_e
    cells: dict[tuple, list[dict]] = {
        (p, b, g): [] for p in cfg.protocols for b in cfg.behaviors
        for g in cfg.attack_edges
    }
    for behavior in cfg.behaviors:
        for g_atk in cfg.attack_edges:
            for run_idx in range(cfg.runs):
                run_seed = derive_seed(cfg.master_seed, behavior, g_atk, run_idx)
                aug, m = place_attack_edges(
                    base_graph, g_atk, derive_seed(run_seed, "place")
                )
                root, rep, rep_nc = _root_and_report(
                    aug, m, honest_n, Random(derive_seed(run_seed, "root")),
                    need_nocheat=(behavior == "honest"),
                )
                honest = range(honest_n)
                d_r = float(sum(rep.dist_root[u] for u in honest) / honest_n)
                d_m = float(sum(rep.dist_adv[u] for u in honest) / honest_n)
                eff = d_m + rep.adv_root_distance - 1.0
                for protocol in cfg.protocols:
                    lost = analytic_lost_set(rep, rep_nc or rep, protocol, behavior)
                    row = {
                        "protocol": protocol,
                        "behavior": behavior,
                        "g": g_atk,
                        "run_index": run_idx,
                        "seed": run_seed,
                        "root": root,
                        "rln_analytic": len(lost) / honest_n,
                        "rln_simulated": None,
                        "mean_dist_root": d_r,
                        "mean_dist_adv": d_m,
                        "effective_adv_dist": eff,
                        "d_m_r": rep.adv_root_distance,
                        "convergence_round": None,
                        "ties_count": len(rep.baseline_ties),
                    }
                    if not cfg.analytic_only:
                        delta_c = (
                            cfg.delta_c if cfg.delta_c is not None else (g_atk + 2) * step
                        )
                        deltas = Deltas(delta_c, cfg.delta_d, cfg.delta_e)
                        _, _, summary = simulate_run(
                            aug, m, root, protocol, behavior, g_atk,
                            derive_seed(run_seed, protocol), rep, deltas,
                        )
                        row["rln_simulated"] = summary.rln
                        row["convergence_round"] = summary.convergence_round
                    cells[(protocol, behavior, g_atk)].append(row)
    rows: list[dict] = []
    for key in sorted(cells):
        cell_rows = cells[key]
        rows.extend(cell_rows)
        rows.extend(_summary_rows(cell_rows))
    return rows


def _summary_rows(cell_rows: list[dict]) -> list[dict]:
    proto = cell_rows[0]["protocol"]
    behavior = cell_rows[0]["behavior"]
    g_atk = cell_rows[0]["g"]
    numeric = (
        "rln_analytic",
        "rln_simulated",
        "mean_dist_root",
        "mean_dist_adv",
        "effective_adv_dist",
        "d_m_r",
        "ties_count",
    )

    def agg(kind: str) -> dict:
        row = {c: None for c in CSV_COLUMNS}
        row.update({"protocol": proto, "behavior": behavior, "g": g_atk,
                    "run_index": kind})
        for col in numeric:
            vals = [r[col] for r in cell_rows if r[col] is not None]
            if not vals:
                continue
            if kind == "MEAN":
                row[col] = sum(vals) / len(vals)
            elif col in ("rln_analytic", "rln_simulated") and len(vals) >= 2:
                row[col] = campaign_stats(vals).ci99_half_width
        return row

    return [agg("MEAN"), agg("CI99")]


def _format_cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return f"{value:.6f}"
    return str(value)


def campaign_csv(cfg: CampaignConfig, rows: list[dict] | None = None) -> str:
    """Render campaign rows as CSV text (optionally with a timestamp line)."""
    if rows is None:
        rows = run_campaign(cfg)
    buf = io.StringIO()
    if cfg.timestamp_header:
        stamp = datetime.now(timezone.utc).isoformat()
        buf.write(f"# generated {stamp}\n")
    buf.write(",".join(CSV_COLUMNS) + "\n")
    for row in rows:
        buf.write(",".join(_format_cell(row.get(c)) for c in CSV_COLUMNS) + "\n")
    return buf.getvalue()


def report_table1(
    spec: str,
    master_seed: int = 1,
    sample_sources: int | None = None,
    lcc: bool = True,
) -> GraphMetrics:
    """Structural metrics of a graph spec (node/edge counts, CPL, CC)."""
    g = graph_from_spec(spec, master_seed, lcc)
    if sample_sources is None and g.n > 4000:
        sample_sources = 256
    return metrics(g, sample_sources=sample_sources, seed=derive_seed(master_seed, "cpl"))


# -- degree-skewed generator (oracle suite and demos) ----------------------


def generate_degree_skewed(n: int, attach: int, seed: int) -> Graph:
    """Preferential-attachment graph: each new node links to ``attach``
    existing nodes sampled proportionally to current degree (plus one)."""
    if n < 2:
        raise ValueError("need at least two nodes")
    rng = Random(seed)
    edges: list[tuple[int, int]] = []
    pool: list[int] = [0]
    for j in range(1, n):
        k = min(attach, j)
        targets: set[int] = set()
        while len(targets) < k:
            pick = pool[rng.randrange(len(pool))] if rng.random() < 0.8 else rng.randrange(j)
            targets.add(pick)
        for t in targets:
            edges.append((j, t))
            pool.extend((j, t))
    return Graph.from_edges(n, edges)


# -- oracle-equivalence suite ----------------------------------------------


@dataclass
class OracleReport:
    instances: int = 0
    violations: list[str] = field(default_factory=list)
    cheat_runs: int = 0
    disturb_runs: int = 0
    honest_runs: int = 0
    baseline_runs: int = 0
    elapsed_seconds: float = 0.0

    @property
    def ok(self) -> bool:
        return not self.violations


def _random_instance(rng: Random, n_lo: int, n_hi: int, g_hi: int):
    """One random (graph, placement, root) instance for the oracle suite."""
    while True:
        n = int(round(math.exp(rng.uniform(math.log(n_lo), math.log(n_hi)))))
        n = max(n_lo, min(n_hi, n))
        if rng.random() < 0.5:
            m_edges = int(n * rng.uniform(1.2, 3.0))
            g = generate_erdos_renyi(n, min(m_edges, n * (n - 1) // 2), rng.getrandbits(48))
            g, _ = extract_largest_component(g)
        else:
            g = generate_degree_skewed(n, rng.randint(1, 3), rng.getrandbits(48))
        if g.n >= max(12, n_lo // 2):
            break
    g_atk = rng.randint(1, min(g_hi, g.n - 1))
    aug, m = place_attack_edges(g, g_atk, rng.getrandbits(48))
    root = rng.randrange(g.n)
    return g, aug, m, root, g_atk


def _exact_diameter_small(g: Graph) -> int:
    from .graph import exact_diameter

    return exact_diameter(g)


def _snapshot_legitimate(
    g: Graph, root: int, malicious: frozenset[int], keys, snap: Snapshot, node: int
) -> bool:
    lvl = snap.levels[node]
    if node == root:
        return lvl == 0 and snap.pids[node] == keys[node]
    if lvl is None or lvl == 0:
        return False
    l_min = None
    for v in g.neighbor_lists[node]:
        if v in malicious:
            continue
        lv = snap.levels[v]
        if lv is not None and (l_min is None or lv < l_min):
            l_min = lv
    if l_min is None or lvl != l_min + 1:
        return False
    return any(
        snap.levels[v] == l_min and snap.pids[node] == keys[v]
        for v in g.neighbor_lists[node]
        if v not in malicious
    )


def oracle_check(
    instances: int = 500,
    master_seed: int = 20240601,
    n_range: tuple[int, int] = (20, 200),
    g_range: tuple[int, int] = (1, 10),
    include_baseline: bool = True,
) -> OracleReport:
    """Cross-validate simulated outcomes against the analytic containment
    sets, convergence bounds, and the disturbance budget on random instances.

    Per instance this executes (attested protocol) a level-minimizing run, a
    non-cheating run, and a disturbance run, plus baseline runs, and records
    a violation string for every analytic prediction the simulation misses.
    """
    t_begin = time.perf_counter()
    report = OracleReport()
    idx = -1
    while report.instances < instances:
        idx += 1
        rng = Random(derive_seed(master_seed, "oracle", idx))
        base_honest, aug, m, root, g_atk = _random_instance(
            rng, n_range[0], n_range[1], g_range[1]
        )
        tag = f"inst{idx}(n={aug.n - 1},g={g_atk})"
        try:
            rep = containment_sets(aug, root, m, cheat=True)
            rep_nc = containment_sets(aug, root, m, cheat=False)
        except ValueError:
            continue  # disconnected placement; instance skipped deterministically
        report.instances += 1
        viol = report.violations

        # analytic set relations
        if not rep.strict_set <= rep.containment_set:
            viol.append(f"{tag}: strict lost set escapes the containment set")
        if not rep_nc.containment_set <= rep.containment_set:
            viol.append(f"{tag}: removing the cheat enlarged the containment set")
        if not rep_nc.strict_set <= rep.strict_set:
            viol.append(f"{tag}: removing the cheat enlarged the strict set")

        honest = frozenset(range(aug.n)) - {m}
        diam = _exact_diameter_small(aug)
        step = 2
        deltas = Deltas((g_atk + 2) * step, 1, 1)

        # adversary-free convergence: every node legitimate within diam+1
        diam_h = _exact_diameter_small(base_honest)
        free_cfg = RunConfig(
            graph=base_honest, root=root, protocol=ProtocolKind.ATTESTED,
            deltas=deltas, seed=derive_seed(master_seed, "free", idx),
            max_rounds=diam_h + 3,
        )
        free_out = run(free_cfg)
        snap = free_out.trace[min(diam_h + 1, len(free_out.trace) - 1)]
        for u in range(base_honest.n):
            if not _snapshot_legitimate(
                base_honest, root, frozenset(), free_out.final.keys, snap, u
            ):
                viol.append(f"{tag}: adversary-free node {u} not legitimate at the bound")
                break

        report.cheat_runs += 1
        _check_cheat_run(report, tag, aug, m, root, g_atk, rep, rep_nc, deltas,
                         diam, honest, master_seed, idx)
        report.disturb_runs += 1
        _check_disturb_run(report, tag, aug, m, root, g_atk, rep, deltas, diam,
                           honest, master_seed, idx)
        if include_baseline:
            report.baseline_runs += 1
            _check_baseline_runs(report, tag, aug, m, root, g_atk, rep, diam,
                                 honest, master_seed, idx)
    report.elapsed_seconds = time.perf_counter() - t_begin
    return report


def _statuses_per_round(outcome, nodes):
    g = outcome.cfg.graph
    root = outcome.cfg.root
    malicious = outcome.final.malicious
    for snap in outcome.trace:
        yield snap.round, {
            u: snapshot_status(g, root, malicious, snap, u) for u in nodes
        }


def _check_cheat_run(report, tag, aug, m, root, g_atk, rep, rep_nc, deltas,
                     diam, honest, master_seed, idx):
    viol = report.violations
    safe = honest - rep.containment_set
    # offers are continuous when the adversary never withdraws, so a short
    # quiet window certifies convergence
    window = diam + 6
    max_rounds = (diam + 1) + (g_atk + diam + 6) + window
    cfg = RunConfig(
        graph=aug, root=root, protocol=ProtocolKind.ATTESTED,
        adversary=AdversaryConfig(AdversaryBehavior.CHEAT_MIN_LEVEL, g_atk),
        adversary_node=m, deltas=deltas,
        seed=derive_seed(master_seed, "cheat", idx),
        max_rounds=max_rounds, stability_window=window,
        stability_candidates=honest,
    )
    out = run(cfg)
    if not out.stopped_early and not detect_stable(out.trace[-(window + 1):], honest):
        viol.append(f"{tag}: cheating-adversary run failed to stabilize")
        return

    keys = out.final.keys
    bound_snap = out.trace[min(diam + 1, len(out.trace) - 1)]
    for u in safe:
        if not _snapshot_legitimate(aug, root, frozenset({m}), keys, bound_snap, u):
            viol.append(f"{tag}: safe node {u} not legitimate by round diam+1 under cheat")
            break

    # safe nodes must stay well-directed from the bound onward
    for rnd, statuses in _statuses_per_round(out, safe):
        if rnd <= diam + 1:
            continue
        bad = [u for u, s in statuses.items() if s is not WalkStatus.WELL]
        if bad:
            viol.append(f"{tag}: safe node {bad[0]} left well-directed state at round {rnd}")
            break

    final = out.trace[-1]
    ill = {
        u for u in honest
        if snapshot_status(aug, root, frozenset({m}), final, u) is WalkStatus.ILL
    }
    if not ill <= rep.containment_set:
        viol.append(f"{tag}: ill-directed set escapes the containment set: "
                    f"{sorted(ill - rep.containment_set)}")
    if not rep.strict_set <= ill:
        viol.append(f"{tag}: strictly-lost nodes ended well-directed: "
                    f"{sorted(rep.strict_set - ill)}")

    # non-cheating adversary: smaller reach, simulated and analytic
    cfg_h = replace(cfg, adversary=AdversaryConfig(AdversaryBehavior.HONEST_MIN_LEVEL, g_atk),
                    seed=derive_seed(master_seed, "honestadv", idx))
    out_h = run(cfg_h)
    report.honest_runs += 1
    final_h = out_h.trace[-1]
    ill_h = {
        u for u in honest
        if snapshot_status(aug, root, frozenset({m}), final_h, u) is WalkStatus.ILL
    }
    if not ill_h <= rep_nc.containment_set:
        viol.append(f"{tag}: non-cheating ill set escapes its containment set")
    if not ill_h <= ill:
        viol.append(f"{tag}: non-cheating adversary misled nodes the cheat did not")
    if not rep_nc.strict_set <= ill_h:
        viol.append(f"{tag}: non-cheating strict nodes ended well-directed")


def _check_disturb_run(report, tag, aug, m, root, g_atk, rep, deltas, diam,
                       honest, master_seed, idx):
    viol = report.violations
    candidates = honest - rep.strict_set
    t0 = diam + 1
    window = 2 * (diam + 1) + 2 * g_atk + 6
    budget = rep.disturbance_budget
    max_rounds = min(t0 + 2 * budget + window + 60, 4000)
    cfg = RunConfig(
        graph=aug, root=root, protocol=ProtocolKind.ATTESTED,
        adversary=AdversaryConfig(AdversaryBehavior.DISTURB, g_atk),
        adversary_node=m, deltas=deltas,
        seed=derive_seed(master_seed, "disturb", idx),
        max_rounds=max_rounds, stability_window=window,
        stability_candidates=frozenset(candidates),
    )
    out = run(cfg)
    if not out.stopped_early and not detect_stable(out.trace[-(window + 1):], candidates):
        viol.append(f"{tag}: nodes outside the strict set failed to stabilize")
        return
    disturbances = count_disturbances(out.trace[t0:], rep.strict_set)
    if disturbances > budget:
        viol.append(
            f"{tag}: {disturbances} disturbances exceed the budget {budget}"
        )
    if rep.strict_set:
        tail = out.trace[-(window + 1):]
        for u in rep.strict_set:
            if all(a.levels[u] == b.levels[u] and a.pids[u] == b.pids[u]
                   for a, b in zip(tail, tail[1:])):
                viol.append(f"{tag}: strictly-lost node {u} went quiet under disturbances")
                break


def consistency_check(
    instances: int = 100,
    master_seed: int = 7,
    max_n: int = 100,
    deltas: Deltas = Deltas(1, 1, 1),
) -> OracleReport:
    """Adversarial-start expiry oracle.

    From an arbitrary configuration whose stale chains are stamped no later
    than the clock-skew bound past the start, stale material (chains whose
    every timestamp predates that bound) must obey two facts wherever it
    appears in a register or a node variable: a stale chain of length n is
    invalid once simulated time exceeds skew + per-hop-budget * n, and no
    stale valid-but-inconsistent chain exists past skew + per-hop-budget *
    diameter.  Honest nodes may re-extend not-yet-expired stale material
    (the extensions carry fresh timestamps and their own, longer budgets),
    which is why the guarantee is stated over the stale values themselves.
    """
    from .attestation import is_consistent, is_valid_att
    from .crypto import MODEL
    from .graph import exact_diameter

    t_begin = time.perf_counter()
    report = OracleReport()
    idx = -1
    while report.instances < instances:
        idx += 1
        rng = Random(derive_seed(master_seed, "consistency", idx))
        n = rng.randint(16, max_n)
        g = generate_erdos_renyi(n, int(n * rng.uniform(1.3, 2.5)), rng.getrandbits(48))
        g, _ = extract_largest_component(g)
        if g.n < 8:
            continue
        g_atk = rng.randint(1, min(5, g.n - 1))
        aug, m = place_attack_edges(g, g_atk, rng.getrandbits(48))
        root = rng.randrange(g.n)
        try:
            containment_sets(aug, root, m)
        except ValueError:
            continue
        report.instances += 1
        diam = exact_diameter(aug)
        bound_time = deltas.c + deltas.step * diam
        tag = f"consistency{idx}(n={aug.n - 1})"
        behavior = (
            AdversaryBehavior.CHEAT_MIN_LEVEL if idx % 2 == 0 else AdversaryBehavior.DISTURB
        )
        cfg = RunConfig(
            graph=aug, root=root, protocol=ProtocolKind.ATTESTED,
            adversary=AdversaryConfig(behavior, g_atk),
            adversary_node=m, deltas=deltas,
            init_mode=InitMode.ADVERSARIAL,
            seed=derive_seed(master_seed, "run", idx),
            max_rounds=consistency_round(deltas, diam) + diam + 6,
        )

        violations = report.violations

        def check_att(att, reader, reader_id, where, rnd, now, directory, config):
            if not att.tuples or max(t.t for t in att.tuples) > deltas.c:
                return  # carries fresh signatures; not the stale material
            n_att = len(att.tuples)
            if now > deltas.c + deltas.step * n_att and is_valid_att(
                att, reader_id, config.keys[root], now, deltas, None, MODEL
            ):
                violations.append(
                    f"{tag}: stale chain of length {n_att} still valid in "
                    f"{where} at round {rnd} (time {now})"
                )
            elif now > bound_time and not is_consistent(
                att, aug, directory, reader, config.malicious,
                reader_id, config.keys[root], now, deltas, MODEL,
            ):
                violations.append(
                    f"{tag}: stale inconsistent chain alive in {where} "
                    f"at round {rnd} (time {now} > {bound_time})"
                )

        def check_round(rnd: int, config) -> None:
            if violations:
                return
            now = rnd * deltas.step
            directory = {config.keys[u]: u for u in range(aug.n)}
            for u in range(aug.n):
                for k, v in enumerate(aug.neighbor_lists[u]):
                    reg = config.registers[u][k]
                    if reg.att is not None:
                        check_att(reg.att, v, config.keys[v], f"register {u}->{v}",
                                  rnd, now, directory, config)
                st = config.node_states[u]
                if st is not None and len(st.level_att) > 0:
                    check_att(st.level_att, u, config.keys[u], f"node {u}",
                              rnd, now, directory, config)

        run(cfg, per_round_hook=check_round)
    report.elapsed_seconds = time.perf_counter() - t_begin
    return report


def _check_baseline_runs(report, tag, aug, m, root, g_atk, rep, diam, honest,
                         master_seed, idx):
    viol = report.violations
    strict = rep.baseline_lost
    ties = rep.baseline_ties
    t0 = diam + 1
    window = 2 * (diam + 1) + 6
    tie_budget = 4 * sum(aug.degree(u) for u in ties) + 8
    cfg = RunConfig(
        graph=aug, root=root, protocol=ProtocolKind.BASELINE,
        adversary=AdversaryConfig(AdversaryBehavior.DISTURB, g_atk),
        adversary_node=m,
        seed=derive_seed(master_seed, "base-disturb", idx),
        max_rounds=min(t0 + tie_budget + window + 60, 4000),
        stability_window=window,
        stability_candidates=frozenset(honest - strict),
    )
    out = run(cfg)
    if not out.stopped_early and not detect_stable(
        out.trace[-(window + 1):], honest - strict
    ):
        viol.append(f"{tag}: baseline nodes outside the formula set failed to stabilize")
        return
    last_round = out.trace[-1].round
    measured = simulated_lost_set(out, max(t0, last_round - window))
    if measured != strict:
        viol.append(
            f"{tag}: baseline disturbance lost set {sorted(measured)} != "
            f"formula set {sorted(strict)}"
        )

    cfg_c = replace(
        cfg,
        adversary=AdversaryConfig(AdversaryBehavior.CHEAT_MIN_LEVEL, g_atk),
        seed=derive_seed(master_seed, "base-cheat", idx),
        stability_candidates=frozenset(honest),
        max_rounds=2 * (diam + 2) + window + 10,
    )
    out_c = run(cfg_c)
    final = out_c.trace[-1]
    ill = {
        u for u in honest
        if snapshot_status(aug, root, frozenset({m}), final, u) is WalkStatus.ILL
    }
    if not strict <= ill:
        viol.append(f"{tag}: baseline strictly-closer nodes ended well-directed")
    if not ill <= (strict | ties):
        viol.append(f"{tag}: baseline ill set exceeds formula set plus ties")
