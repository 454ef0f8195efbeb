"""Seeded experiment harness: runs the lab's experiments as row-oriented
tables with reproducible per-trial randomness.

One top-level seed drives everything; trial t uses the stream derived from
spawn key (domain, t), so serial and fanned-out executions emit identical
rows.  Every row carries the master seed and a hash of the configuration, so
any row can be replayed.  A table's ``ok`` flag is the conjunction of its
per-row invariant checks; the CLI maps it to the exit status.
"""

from __future__ import annotations

import hashlib
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import advice as advice_mod
from . import compress as compress_mod
from .adapters import (
    HellmanInversion,
    LookupInversion,
    haar_scrambler,
    masked_box_grover,
    parity_box_algorithm,
)
from .hybrid import (
    ParityAdviceScheme,
    box_experiment,
    collision_in_window,
    expectation_check,
    verify_swapping,
    verify_tv,
)
from .qsim import (
    BasisLayout,
    BitStringOracle,
    PermutationOracle,
    PureState,
    grover_invert,
    grover_spec,
    default_grover_iterations,
    run,
)
from .util import ceil_log2, stream_rng, trial_rng

GROVER_MAX_N = 256


@dataclass
class ResultTable:
    command: str
    config: dict
    columns: list
    rows: list = field(default_factory=list)
    ok: bool = True

    @property
    def config_hash(self) -> str:
        return config_hash(self.config)


def config_hash(config: dict) -> str:
    blob = json.dumps(config, sort_keys=True, separators=(",", ":"))
    return hashlib.sha1(blob.encode()).hexdigest()[:12]


def pool_size() -> int:
    env = os.environ.get("ADVICE_LAB_THREADS")
    if env:
        return max(1, int(env))
    return min(8, os.cpu_count() or 1)


def fan_out(worker, count: int) -> list:
    """Run worker(0..count-1) over a thread pool; results come back in trial
    order regardless of completion order."""
    if count <= 1 or pool_size() == 1:
        return [worker(i) for i in range(count)]
    with ThreadPoolExecutor(max_workers=pool_size()) as ex:
        return list(ex.map(worker, range(count)))


def _finish(table: ResultTable) -> ResultTable:
    digest = table.config_hash
    for row in table.rows:
        row["seed"] = table.config["seed"]
        row["config"] = digest
    return table


# ---------------------------------------------------------------------------
# grover
# ---------------------------------------------------------------------------

def cmd_grover(n: int, trials: int, seed: int) -> ResultTable:
    if n > GROVER_MAX_N:
        raise ValueError(f"N capped at {GROVER_MAX_N} for the exact sweep")
    config = {"command": "grover", "n": n, "trials": trials, "seed": seed}
    iterations = default_grover_iterations(n)
    theta = math.asin(1.0 / math.sqrt(n))
    closed_form = math.sin((2 * iterations + 1) * theta) ** 2

    def worker(t: int) -> dict:
        rng = trial_rng(seed, t)
        f = PermutationOracle(rng.permutation(n))
        y = int(rng.integers(n))
        candidate, prob, trace = grover_invert(f, y)
        expected = int(np.flatnonzero(f.table == y)[0])
        return {
            "trial": t,
            "n": n,
            "iterations": iterations,
            "queries": trace.num_queries,
            "success_probability": prob,
            "closed_form": closed_form,
            "abs_error": abs(prob - closed_form),
            "candidate": candidate,
            "preimage": expected,
            "candidate_correct": candidate == expected,
            "mass_ok": bool(trace.totals.sum() <= trace.num_queries + 1e-9),
        }

    table = ResultTable("grover", config, [
        "trial", "n", "iterations", "queries", "success_probability", "closed_form",
        "abs_error", "candidate", "preimage", "candidate_correct", "mass_ok",
        "seed", "config"])
    table.rows = fan_out(worker, trials)
    table.ok = all(r["abs_error"] <= 1e-6 and r["mass_ok"] for r in table.rows)
    return _finish(table)


# ---------------------------------------------------------------------------
# box
# ---------------------------------------------------------------------------

def cmd_box(n: int, m: int, trials: int, seed: int) -> ResultTable:
    config = {"command": "box", "n": n, "m": m, "trials": trials, "seed": seed}
    result = box_experiment(n, m, ParityAdviceScheme(m), parity_box_algorithm, trials, seed)
    table = ResultTable("box", config, [
        "trial", "j", "alpha", "class_size", "window", "delta_size", "num_queries",
        "swap_bound", "swap_actual", "swap_holds", "averaged_bound",
        "mean_qz", "expected_qz", "qz_stderr", "qz_within_3se", "seed", "config"])
    for rec in result.records:
        table.rows.append({
            "trial": rec.trial,
            "j": rec.j,
            "alpha": rec.alpha,
            "class_size": rec.class_size,
            "window": " ".join(str(i) for i in rec.window),
            "delta_size": len(rec.swap.delta_set),
            "num_queries": rec.swap.num_queries,
            "swap_bound": rec.swap.bound,
            "swap_actual": rec.swap.actual,
            "swap_holds": rec.swap.holds,
            "averaged_bound": rec.eq_bound,
            "mean_qz": rec.expectation.mean,
            "expected_qz": rec.expectation.expected,
            "qz_stderr": rec.expectation.stderr,
            "qz_within_3se": rec.expectation.within_3se,
        })
    table.ok = result.all_swaps_hold and result.all_expectations_within
    return _finish(table)


# ---------------------------------------------------------------------------
# hellman
# ---------------------------------------------------------------------------

def cmd_hellman(n: int, s_values, trials: int, seed: int) -> ResultTable:
    config = {"command": "hellman", "n": n, "s": list(s_values), "trials": trials, "seed": seed}
    log_n = ceil_log2(n)
    target = n * 2 * log_n

    jobs = [(s, t) for s in s_values for t in range(trials)]

    def worker(i: int) -> dict:
        s, t = jobs[i]
        rng = stream_rng(seed, s, t)
        f = rng.permutation(n)
        point = advice_mod.measure_tradeoff(f, s)
        ratio = point["bits_times_calls"] / target
        return {
            "s": s,
            "trial": t,
            "n": n,
            "entries": point["entries"],
            "advice_bits": point["advice_bits"],
            "header_bits": point["header_bits"],
            "worst_calls": point["worst_calls"],
            "bits_times_calls": point["bits_times_calls"],
            "target_bits": target,
            "ratio_to_target": ratio,
            "within_factor_8": bool(1 / 8 <= ratio <= 8),
            "calls_bounded": point["worst_calls"] <= 2 * s + 2,
        }

    table = ResultTable("hellman", config, [
        "s", "trial", "n", "entries", "advice_bits", "header_bits", "worst_calls",
        "bits_times_calls", "target_bits", "ratio_to_target", "within_factor_8",
        "calls_bounded", "seed", "config"])
    table.rows = fan_out(worker, len(jobs))
    table.ok = all(r["within_factor_8"] and r["calls_bounded"] for r in table.rows)
    return _finish(table)


# ---------------------------------------------------------------------------
# compress
# ---------------------------------------------------------------------------

def compress_trial(f: PermutationOracle, family, R, params) -> dict:
    """Encode/decode once and audit the run: length identity and bound on a
    successful encode, final-state closeness under the hybrid oracle for every
    good element, exact roundtrip when decoding succeeds."""
    n = f.num_positions
    record = {
        "r_size": len(R),
        "good_count": 0,
        "encode_failed": True,
        "decode_ok": False,
        "roundtrip_exact": False,
        "logical_bits": 0,
        "bound_bits": 0.0,
        "length_identity_ok": True,
        "length_bound_ok": True,
        "envelope_ok": True,
        "max_h_distance": 0.0,
        "h_ok": True,
    }
    enc = compress_mod.encode(f, family, R, params)
    if enc is None:
        return record
    record["encode_failed"] = False
    record["good_count"] = enc.good_count
    record["logical_bits"] = enc.logical_bits
    record["bound_bits"] = compress_mod.length_bound_bits(enc)
    record["length_identity_ok"] = enc.logical_bits == sum(enc.component_bits().values())
    record["length_bound_ok"] = enc.logical_bits <= record["bound_bits"] + 1e-9
    record["envelope_ok"] = (
        compress_mod.encoding_from_json(compress_mod.encoding_to_json(enc), n) == enc)

    good = compress_mod.good_set(f, family, np.asarray(R), params)
    advice = family.preprocess(f)
    alg = family.spec(advice, n)
    sampled = set(int(v) for v in R)
    known = {int(z): int(f.table[z]) for z in range(n) if z not in sampled}
    max_dist = 0.0
    for x in good:
        y = int(f.table[x])
        h = compress_mod.build_h(known, R, y)
        final_f, _ = run(alg, f, y)
        final_h, _ = run(alg, h, y)
        max_dist = max(max_dist, float(np.linalg.norm(final_f.amplitudes - final_h.amplitudes)))
    record["max_h_distance"] = max_dist
    record["h_ok"] = max_dist <= math.sqrt(params.c) + 1e-9

    try:
        decoded = compress_mod.decode(enc, R, family, params)
        record["decode_ok"] = True
        record["roundtrip_exact"] = bool(np.array_equal(decoded, f.table))
    except (compress_mod.DecodeFailure, compress_mod.CorruptEncodingError):
        pass
    return record


def cmd_compress(n: int, delta: float, c: float, trials: int, seed: int,
                 min_good: int = 1) -> ResultTable:
    config = {"command": "compress", "n": n, "delta": delta, "c": c,
              "min_good": min_good, "trials": trials, "seed": seed}
    params = compress_mod.CompressionParams(delta=delta, c=c, min_good=min_good)
    family = LookupInversion(verify=True)
    f = PermutationOracle(stream_rng(seed, 0).permutation(n))
    probe = family.spec(family.preprocess(f), n)

    def worker(t: int) -> dict:
        R = compress_mod.sample_R(n, delta, probe.num_queries, stream_rng(seed, 1, t))
        record = compress_trial(f, family, R, params)
        record["trial"] = t
        return record

    table = ResultTable("compress", config, [
        "trial", "r_size", "good_count", "encode_failed", "decode_ok", "roundtrip_exact",
        "logical_bits", "bound_bits", "length_identity_ok", "length_bound_ok",
        "envelope_ok", "max_h_distance", "h_ok", "seed", "config"])
    table.rows = fan_out(worker, trials)
    successes = sum(1 for r in table.rows if r["roundtrip_exact"])
    audits = all(r["length_identity_ok"] and r["length_bound_ok"] and r["envelope_ok"]
                 and r["h_ok"] for r in table.rows)
    table.ok = successes >= math.ceil(0.8 * trials) and audits
    return _finish(table)


# ---------------------------------------------------------------------------
# verification suites
# ---------------------------------------------------------------------------

def _swap_instance(rng: np.random.Generator, n: int, kind: str):
    """One (algorithm, oracle pair, input) triple for the perturbation check."""
    if kind == "grover":
        f = rng.permutation(n)
        a, b = rng.choice(n, size=2, replace=False)
        f2 = f.copy()
        f2[[a, b]] = f2[[b, a]]
        y = int(f[a]) if rng.random() < 0.7 else int(rng.integers(n))
        # Three rounds keep the magnitude mass on a queried disagreement set
        # high enough that the bound clears the diameter 2 of the unit sphere;
        # at two rounds the bound can dip below the observed distance.
        alg = grover_spec(n, 3)
        return alg, PermutationOracle(f), PermutationOracle(f2), y
    if kind == "parity":
        m = int(rng.choice([2, 4])) if n >= 16 else 2
        bits = rng.integers(0, 2, size=n)
        flips = rng.choice(n, size=int(rng.integers(1, 4)), replace=False)
        other = bits.copy()
        other[flips] ^= 1
        j = int(rng.integers(n))
        pad = advice_mod.parity_preprocess(bits, m)
        alg = parity_box_algorithm(pad, j)
        return alg, BitStringOracle(bits, forbidden=j), BitStringOracle(other, forbidden=j), j
    if kind == "hellman":
        f = rng.permutation(n)
        a, b = rng.choice(n, size=2, replace=False)
        f2 = f.copy()
        f2[[a, b]] = f2[[b, a]]
        y = int(rng.integers(n))
        family = HellmanInversion(s=2)
        oracle = PermutationOracle(f)
        alg = family.spec(family.preprocess(oracle), n)
        return alg, oracle, PermutationOracle(f2), y
    raise ValueError(f"unknown swap instance kind {kind!r}")


def swapping_trials(trials: int, seed: int, sizes=(8, 16)) -> list:
    kinds = ("grover", "parity", "hellman")

    def worker(t: int) -> dict:
        rng = trial_rng(seed, t)
        n = int(rng.choice(sizes))
        kind = kinds[int(rng.integers(len(kinds)))]
        alg, ox, oy, run_input = _swap_instance(rng, n, kind)
        rep = verify_swapping(alg, ox, oy, run_input)
        return {
            "trial": t, "algorithm": alg.name, "n": n, "kind": kind,
            "delta_size": len(rep.delta_set), "num_queries": rep.num_queries,
            "bound": rep.bound, "actual": rep.actual, "holds": rep.holds,
        }

    return fan_out(worker, trials)


def _random_state(rng: np.random.Generator, layout: BasisLayout) -> PureState:
    vec = rng.normal(size=layout.dim) + 1j * rng.normal(size=layout.dim)
    return PureState(vec / np.linalg.norm(vec), layout)


def tv_trials(trials: int, seed: int) -> list:
    layout = BasisLayout(8, 2, 2)
    registers = ("position", "answer", "workspace")

    def worker(t: int) -> dict:
        rng = trial_rng(seed, t)
        kind = ("gaussian", "near", "grover")[int(rng.integers(3))]
        if kind == "grover":
            n = 8
            alg = grover_spec(n, default_grover_iterations(n))
            f = rng.permutation(n)
            a, b = rng.choice(n, size=2, replace=False)
            f2 = f.copy()
            f2[[a, b]] = f2[[b, a]]
            y = int(f[a])
            state_a, _ = run(alg, PermutationOracle(f), y)
            state_b, _ = run(alg, PermutationOracle(f2), y)
            register = "position"
        else:
            state_a = _random_state(rng, layout)
            if kind == "near":
                noise = rng.normal(size=layout.dim) + 1j * rng.normal(size=layout.dim)
                vec = state_a.amplitudes + 10 ** rng.uniform(-6, -1) * noise
                state_b = PureState(vec / np.linalg.norm(vec), layout)
            else:
                state_b = _random_state(rng, layout)
            register = registers[int(rng.integers(3))]
        rep = verify_tv(state_a, state_b, register)
        return {
            "trial": t, "kind": kind, "register": register,
            "tv": rep.tv, "euclidean": rep.euclidean, "bound": rep.bound,
            "holds": rep.holds,
        }

    return fan_out(worker, trials)


def collision_trials(trials: int, seed: int, max_n: int = 10) -> list:
    def worker(t: int) -> dict:
        rng = trial_rng(seed, t)
        n = int(rng.integers(4, max_n + 1))
        m = int(rng.integers(1, min(n - 1, 6) + 1))
        size = 2 ** (n - m) + int(rng.integers(0, 2 ** (n - m)))
        members = rng.choice(1 << n, size=min(size, 1 << n), replace=False)
        window = sorted(int(i) for i in rng.choice(n, size=m + 1, replace=False))
        x, y = collision_in_window(members, window, n)
        outside_mask = ((1 << n) - 1) ^ sum(1 << i for i in window)
        member_set = set(int(v) for v in members)
        valid = (x != y and x in member_set and y in member_set
                 and (x ^ y) & outside_mask == 0)
        # independent pairwise scan for any valid pair
        arr = np.sort(np.asarray(members, dtype=np.int64))
        xor = (arr[:, None] ^ arr[None, :]) & outside_mask
        np.fill_diagonal(xor, 1)
        brute_found = bool((xor == 0).any())
        return {
            "trial": t, "n": n, "m": m, "class_size": len(members),
            "x": x, "y": y, "valid": valid, "brute_agrees": brute_found,
            "holds": valid and brute_found,
        }

    return fan_out(worker, trials)


def expectation_trials(trials: int, seed: int, n: int = 16, z_samples: int = 10_000) -> list:
    def worker(t: int) -> dict:
        rng = trial_rng(seed, t)
        bits = rng.integers(0, 2, size=n)
        j = int(rng.integers(n))
        kind = ("box-grover", "parity2", "parity4")[int(rng.integers(3))]
        if kind == "box-grover":
            alg = masked_box_grover(n)
        else:
            m = 2 if kind == "parity2" else 4
            alg = parity_box_algorithm(advice_mod.parity_preprocess(bits, m), j)
        oracle = BitStringOracle(bits, forbidden=j)
        _, trace = run(alg, oracle, j)
        rep = expectation_check(trace.totals, j, alg.num_queries, rng, z_samples)
        return {
            "trial": t, "algorithm": alg.name, "num_queries": alg.num_queries,
            "mean_qz": rep.mean, "expected_qz": rep.expected, "stderr": rep.stderr,
            "within_3se": rep.within_3se, "holds": rep.within_3se,
        }

    return fan_out(worker, trials)


def eq2_trials(trials: int, seed: int) -> list:
    """Total query magnitude never exceeds the query count; classical adapters
    meet it exactly."""
    kinds = ("grover", "lookup", "hellman", "parity", "box-grover", "scrambler")

    def worker(t: int) -> dict:
        rng = trial_rng(seed, t)
        kind = kinds[t % len(kinds)]
        classical = kind in ("lookup", "hellman", "parity")
        if kind == "grover":
            n = int(rng.choice([8, 16]))
            f = PermutationOracle(rng.permutation(n))
            alg = grover_spec(n, default_grover_iterations(n))
            _, trace = run(alg, f, int(rng.integers(n)))
        elif kind == "lookup":
            n = 16
            f = PermutationOracle(rng.permutation(n))
            family = LookupInversion(verify=True)
            alg = family.spec(family.preprocess(f), n)
            _, trace = run(alg, f, int(rng.integers(n)))
        elif kind == "hellman":
            n = 16
            f = PermutationOracle(rng.permutation(n))
            family = HellmanInversion(s=2)
            alg = family.spec(family.preprocess(f), n)
            _, trace = run(alg, f, int(rng.integers(n)))
        elif kind == "parity":
            n = 16
            bits = rng.integers(0, 2, size=n)
            j = int(rng.integers(n))
            alg = parity_box_algorithm(advice_mod.parity_preprocess(bits, 4), j)
            _, trace = run(alg, BitStringOracle(bits, forbidden=j), j)
        elif kind == "box-grover":
            n = 16
            bits = rng.integers(0, 2, size=n)
            j = int(rng.integers(n))
            alg = masked_box_grover(n)
            _, trace = run(alg, BitStringOracle(bits, forbidden=j), j)
        else:
            alg = haar_scrambler(BasisLayout(8, 2, 2), 8, int(rng.integers(2 ** 31)))
            bits = rng.integers(0, 2, size=8)
            _, trace = run(alg, BitStringOracle(bits), 0)
        total = float(trace.totals.sum())
        bounded = total <= trace.num_queries + 1e-9
        exact = total == float(trace.num_queries)
        return {
            "trial": t, "algorithm": alg.name, "classical": classical,
            "num_queries": trace.num_queries, "total_mass": total,
            "bounded": bounded, "classical_exact": (not classical) or exact,
            "holds": bounded and ((not classical) or exact),
        }

    return fan_out(worker, trials)


_SUITES = {
    "swapping": swapping_trials,
    "tv": tv_trials,
    "collision": collision_trials,
    "expectation": expectation_trials,
    "eq2": eq2_trials,
}


def cmd_verify(suite: str, trials: int, seed: int) -> ResultTable:
    names = list(_SUITES) if suite == "all" else [suite]
    for name in names:
        if name not in _SUITES:
            raise ValueError(f"unknown suite {name!r}; choose from {sorted(_SUITES)} or 'all'")
    config = {"command": "verify", "suite": suite, "trials": trials, "seed": seed}
    table = ResultTable("verify", config, [
        "suite", "trial", "algorithm", "detail", "holds", "seed", "config"])
    ok = True
    for name in names:
        rows = _SUITES[name](trials, seed)
        for row in rows:
            detail = {k: v for k, v in row.items() if k not in ("trial", "algorithm", "holds")}
            table.rows.append({
                "suite": name,
                "trial": row["trial"],
                "algorithm": row.get("algorithm", row.get("kind", "")),
                "detail": json.dumps(detail, sort_keys=True, default=str),
                "holds": row["holds"],
            })
            ok = ok and bool(row["holds"])
    table.ok = ok
    return _finish(table)


# ---------------------------------------------------------------------------
# emission
# ---------------------------------------------------------------------------

def _cell(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def render_csv(table: ResultTable) -> str:
    lines = [",".join(table.columns)]
    for row in table.rows:
        cells = []
        for col in table.columns:
            text = _cell(row.get(col, ""))
            if "," in text or '"' in text:
                text = '"' + text.replace('"', '""') + '"'
            cells.append(text)
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"


def render_json(table: ResultTable) -> str:
    doc = {
        "command": table.command,
        "config": table.config,
        "config_hash": table.config_hash,
        "ok": table.ok,
        "columns": table.columns,
        "rows": [{col: row.get(col, "") for col in table.columns} for row in table.rows],
    }
    return json.dumps(doc, sort_keys=True, indent=2, default=_cell) + "\n"


def emit(table: ResultTable, out: str | None, fmt: str) -> None:
    text = render_csv(table) if fmt == "csv" else render_json(table)
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
