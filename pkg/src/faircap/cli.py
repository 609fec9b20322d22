"""Command-line surface: synth, mine, evaluate, oracle-compare.

The run configuration is a flat ``key = value`` text file (``#`` comments).
Relative paths inside it resolve against the config file's directory. Reports
are JSON with sorted keys and no timestamps, so identical inputs produce
byte-identical reports at any parallelism degree.

Exit codes: 0 success, 1 input/config error, 2 infeasible (report written).
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
from pathlib import Path

import numpy as np

from .config import (
    CoverageMode,
    CoverageVariant,
    FairnessMode,
    FairnessVariant,
    MiningConfig,
    SelectionConfig,
)
from .dag import CausalDag, format_dot, parse_dot, validate_dag
from .data import (
    AttributeSpec,
    Categorical,
    Dataset,
    Numeric,
    Pattern,
    Predicate,
    Role,
    coverage,
)
from .errors import ConfigError, FaircapError, Infeasible, TooManyCandidates
from .evaluate import markdown_table, render_rule, run_variant_matrix, variant_label
from .interventions import PrescriptionRule
from .pipeline import PipelineConfig, run_pipeline
from .selection import brute_force_select, objective, ruleset_metrics
from .synth import SyntheticSpec, generate_synthetic, value_labels

log = logging.getLogger("faircap.cli")

REPORT_SCHEMA_VERSION = 1

_CONFIG_KEYS = {
    "dataset",
    "dag",
    "outcome",
    "immutable",
    "mutable",
    "protected",
    "bins",
    "on_missing",
    "apriori_support",
    "max_grouping_len",
    "max_intervention_len",
    "alpha",
    "min_group_size",
    "fairness",
    "epsilon",
    "tau",
    "coverage",
    "theta",
    "theta_p",
    "lambda1",
    "lambda2",
    "stop_threshold",
    "max_rules",
    "w_coverage",
    "w_benefit",
    "w_utility",
    "jobs",
    "report",
    "markdown",
    "expu_denominator",
}


def setup_logging() -> None:
    level = os.environ.get("FAIRCAP_LOG", "WARNING").upper()
    logging.basicConfig(
        level=getattr(logging, level, logging.WARNING),
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )


def parse_config_file(path: Path) -> dict[str, str]:
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    values: dict[str, str] = {}
    for lineno, raw in enumerate(path.read_text().splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value', got {raw!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        if key not in _CONFIG_KEYS:
            raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
        if key in values:
            raise ConfigError(f"{path}:{lineno}: duplicate key {key!r}")
        values[key] = value.strip()
    return values


_OPS_BY_LENGTH = ("<=", ">=", "!=", "=", "<", ">")


def parse_pattern_text(text: str, schema: list[AttributeSpec] | None = None) -> Pattern:
    """Parse 'A=x & B<=3' into a Pattern; validates against a schema if given."""
    text = text.strip()
    if not text or text == "*":
        return Pattern()
    by_name = {a.name: a for a in schema} if schema else None
    preds = []
    for clause in text.split("&"):
        clause = clause.strip()
        op = next((o for o in _OPS_BY_LENGTH if o in clause), None)
        if op is None:
            raise ConfigError(f"no operator in pattern clause {clause!r}")
        attr, _, value = clause.partition(op)
        attr, value = attr.strip(), value.strip()
        if not attr or not value:
            raise ConfigError(f"malformed pattern clause {clause!r}")
        if by_name is not None:
            if attr not in by_name:
                raise ConfigError(f"pattern references unknown attribute {attr!r}")
            spec = by_name[attr]
            if spec.is_categorical:
                if op not in ("=", "!="):
                    raise ConfigError(
                        f"comparison op {op!r} on categorical attribute {attr!r}"
                    )
            else:
                try:
                    value = float(value)
                except ValueError:
                    raise ConfigError(
                        f"numeric attribute {attr!r} compared to non-number {value!r}"
                    ) from None
        preds.append(Predicate(attr, op, value))
    return Pattern(preds)


def _parse_bins(text: str) -> dict[str, int]:
    out: dict[str, int] = {}
    for part in filter(None, (p.strip() for p in text.split(","))):
        name, _, k = part.partition(":")
        if not k:
            out[name.strip()] = 5
        else:
            out[name.strip()] = int(k)
    return out


def _bin_labels(edges: np.ndarray) -> list[str]:
    labels = []
    for i in range(len(edges) - 1):
        close = "]" if i == len(edges) - 2 else ")"
        labels.append(f"[{edges[i]:g},{edges[i + 1]:g}{close}")
    return labels


def equal_frequency_bins(values: np.ndarray, k: int) -> tuple[np.ndarray, list[str]]:
    """Codes plus interval labels for k equal-frequency bins (deduped edges)."""
    qs = np.linspace(0.0, 1.0, k + 1)
    edges = np.unique(np.quantile(values, qs))
    if edges.size < 2:
        edges = np.asarray([edges[0], edges[0] + 1.0])
    codes = np.clip(np.searchsorted(edges, values, side="right") - 1, 0, edges.size - 2)
    return codes.astype(np.int32), _bin_labels(edges)


def load_csv_dataset(
    path: Path,
    *,
    outcome: str,
    immutable: list[str],
    mutable: list[str],
    protected_text: str,
    bins: dict[str, int],
    on_missing: str = "reject",
) -> Dataset:
    if not path.exists():
        raise ConfigError(f"dataset file not found: {path}")
    declared = {outcome: Role.OUTCOME}
    for a in immutable:
        declared[a] = Role.IMMUTABLE
    for a in mutable:
        if a in declared:
            raise ConfigError(f"attribute {a!r} declared with two roles")
        declared[a] = Role.MUTABLE
    if list(declared).count(outcome) != 1:
        raise ConfigError("exactly one outcome attribute required")

    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ConfigError(f"{path}: empty file") from None
        missing_cols = [a for a in declared if a not in header]
        if missing_cols:
            raise ConfigError(f"{path}: columns not in header: {missing_cols}")
        col_idx = {a: header.index(a) for a in declared}
        raw: dict[str, list[str]] = {a: [] for a in declared}
        keep_rows = []
        for rowno, row in enumerate(reader, start=2):
            cells = {a: row[i].strip() for a, i in col_idx.items()}
            if any(c == "" for c in cells.values()):
                if on_missing == "drop":
                    continue
                raise ConfigError(f"{path}:{rowno}: missing value")
            keep_rows.append(cells)
        for cells in keep_rows:
            for a in declared:
                raw[a].append(cells[a])
    if not keep_rows:
        raise ConfigError(f"{path}: no usable rows")

    numeric_cols = set(bins) | {outcome}
    schema: list[AttributeSpec] = []
    columns: dict[str, np.ndarray] = {}
    ordered = [a for a in header if a in declared]
    for name in ordered:
        role = declared[name]
        cells = raw[name]
        if name in numeric_cols:
            try:
                values = np.asarray([float(c) for c in cells])
            except ValueError as exc:
                raise ConfigError(f"column {name!r}: non-numeric value ({exc})") from None
            if name == outcome:
                schema.append(
                    AttributeSpec(name, role, Numeric(float(values.min()), float(values.max())))
                )
                columns[name] = values
            else:
                codes, labels = equal_frequency_bins(values, bins[name])
                schema.append(AttributeSpec(name, role, Categorical(tuple(labels))))
                columns[name] = codes
        else:
            labels = tuple(sorted(set(cells)))
            index = {v: i for i, v in enumerate(labels)}
            schema.append(AttributeSpec(name, role, Categorical(labels)))
            columns[name] = np.asarray([index[c] for c in cells], dtype=np.int32)

    protected = parse_pattern_text(protected_text, schema)
    return Dataset(schema, columns, protected)


def build_run(config_values: dict[str, str], base: Path):
    """Materialize dataset, DAG and pipeline config from parsed key-values."""
    def need(key: str) -> str:
        if key not in config_values:
            raise ConfigError(f"missing config key {key!r}")
        return config_values[key]

    def split_list(key: str) -> list[str]:
        return [p.strip() for p in config_values.get(key, "").split(",") if p.strip()]

    dataset_path = base / need("dataset")
    dag_path = base / need("dag")
    dataset = load_csv_dataset(
        dataset_path,
        outcome=need("outcome"),
        immutable=split_list("immutable"),
        mutable=split_list("mutable"),
        protected_text=config_values.get("protected", ""),
        bins=_parse_bins(config_values.get("bins", "")),
        on_missing=config_values.get("on_missing", "reject"),
    )
    if not dag_path.exists():
        raise ConfigError(f"dag file not found: {dag_path}")
    try:
        dag = parse_dot(dag_path.read_text())
    except ValueError as exc:
        raise ConfigError(f"{dag_path}: {exc}") from None

    fvariant = FairnessVariant(config_values.get("fairness", "none"))
    kwargs = {}
    if "epsilon" in config_values:
        kwargs["epsilon"] = float(config_values["epsilon"])
    if "tau" in config_values:
        kwargs["tau"] = float(config_values["tau"])
    fairness = FairnessMode(fvariant, **kwargs)
    cvariant = CoverageVariant(config_values.get("coverage", "none"))
    cov = CoverageMode(
        cvariant,
        theta=float(config_values.get("theta", 0.0)),
        theta_p=float(config_values.get("theta_p", 0.0)),
    )
    selection = SelectionConfig(
        fairness=fairness,
        coverage=cov,
        lambda1=float(config_values.get("lambda1", 0.0)),
        lambda2=float(config_values.get("lambda2", 1.0)),
        stop_threshold=float(config_values.get("stop_threshold", 0.01)),
        max_rules=int(config_values.get("max_rules", 20)),
        w_coverage=float(config_values.get("w_coverage", 1.0)),
        w_benefit=float(config_values.get("w_benefit", 1.0)),
        w_utility=float(config_values.get("w_utility", 1.0)),
        expu_denominator=config_values.get("expu_denominator", "covered"),
    )
    mining = MiningConfig(
        apriori_support=float(config_values.get("apriori_support", 0.1)),
        max_grouping_len=int(config_values.get("max_grouping_len", 3)),
        max_intervention_len=int(config_values.get("max_intervention_len", 3)),
        alpha=float(config_values.get("alpha", 0.05)),
        min_group_size=int(config_values.get("min_group_size", 10)),
    )
    return dataset, dag, PipelineConfig(mining=mining, selection=selection)


def _pattern_json(pattern: Pattern) -> list[dict]:
    return [
        {"attribute": p.attribute, "op": p.op, "value": p.value}
        for p in pattern.predicates
    ]


def _rule_json(rule: PrescriptionRule, dataset: Dataset) -> dict:
    return {
        "grouping": _pattern_json(rule.grouping),
        "intervention": _pattern_json(rule.intervention),
        "utility": rule.utility,
        "utility_p": rule.utility_p,
        "utility_np": rule.utility_np,
        "p_value": rule.p_value,
        "benefit": rule.benefit,
        "coverage_count": rule.coverage.count,
        "coverage_protected_count": rule.coverage.protected_count,
        "text": rule.text,
        "rendered": render_rule(rule, dataset.schema),
    }


def _metrics_json(metrics) -> dict:
    return {
        "size": metrics.size,
        "coverage_frac": metrics.coverage_frac,
        "coverage_p_frac": metrics.coverage_p_frac,
        "exp_utility": metrics.exp_utility,
        "exp_utility_p": metrics.exp_utility_p,
        "exp_utility_np": metrics.exp_utility_np,
        "unfairness": metrics.unfairness,
    }


def _violations_json(violations) -> list[dict]:
    return [
        {"clause": v.clause, "measured": v.measured, "bound": v.bound, "rule": v.rule}
        for v in violations
    ]


def write_json(path: Path, payload: dict) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(payload, sort_keys=True, indent=2) + "\n")


def _run_mine(args) -> int:
    config_path = Path(args.config)
    values = parse_config_file(config_path)
    base = config_path.parent
    dataset, dag, cfg = build_run(values, base)
    if args.exhaustive_interventions:
        from dataclasses import replace

        cfg = PipelineConfig(
            mining=replace(cfg.mining, exhaustive_interventions=True),
            selection=cfg.selection,
        )
    if args.expu_denominator:
        from dataclasses import replace

        cfg = PipelineConfig(
            mining=cfg.mining,
            selection=replace(cfg.selection, expu_denominator=args.expu_denominator),
        )
    jobs = args.jobs if args.jobs else int(values.get("jobs", "1"))
    out = run_pipeline(dataset, dag, cfg, jobs=jobs)

    rules = list(out.result.rules) if out.result is not None else []
    metrics = (
        out.result.metrics
        if out.result is not None
        else ruleset_metrics([], dataset, cfg.selection.expu_denominator)
    )
    trace = list(out.result.trace) if out.result is not None else []
    payload = {
        "schema_version": REPORT_SCHEMA_VERSION,
        "variant": variant_label(cfg.selection),
        "params": {
            "apriori_support": cfg.mining.apriori_support,
            "max_grouping_len": cfg.mining.max_grouping_len,
            "max_intervention_len": cfg.mining.max_intervention_len,
            "alpha": cfg.mining.alpha,
            "min_group_size": cfg.mining.min_group_size,
            "fairness": cfg.selection.fairness.variant.value,
            "epsilon": cfg.selection.fairness.epsilon,
            "tau": cfg.selection.fairness.tau,
            "coverage": cfg.selection.coverage.variant.value,
            "theta": cfg.selection.coverage.theta,
            "theta_p": cfg.selection.coverage.theta_p,
            "lambda1": cfg.selection.lambda1,
            "lambda2": cfg.selection.lambda2,
            "stop_threshold": cfg.selection.stop_threshold,
            "max_rules": cfg.selection.max_rules,
            "expu_denominator": cfg.selection.expu_denominator,
        },
        "n_rows": dataset.n,
        "n_protected": dataset.n_protected,
        "candidate_count": len(out.candidates),
        "status": "infeasible" if out.infeasible else "ok",
        "violations": _violations_json(out.violations),
        "rules": [_rule_json(r, dataset) for r in rules],
        "metrics": _metrics_json(metrics),
        "objective": objective(rules, max(len(out.candidates), len(rules)), dataset, cfg.selection),
        "trace": [
            {
                "iteration": t.iteration,
                "rule": t.rule,
                "score": t.score,
                "coverage_term": t.coverage_term,
                "benefit_term": t.benefit_term,
                "utility_term": t.utility_term,
                "exp_utility_after": t.exp_utility_after,
                "covered_after": t.covered_after,
                "skipped_for_fairness": t.skipped_for_fairness,
            }
            for t in trace
        ],
    }
    report_path = base / values.get("report", "report.json")
    write_json(report_path, payload)
    if "markdown" in values:
        md_path = base / values["markdown"]
        md_path.parent.mkdir(parents=True, exist_ok=True)
        lines = [f"# Ruleset report: {payload['variant']}", ""]
        for r in rules:
            lines.append(f"- {render_rule(r, dataset.schema)}")
        md_path.write_text("\n".join(lines) + "\n")
    print(f"wrote {report_path} ({payload['status']}, {len(rules)} rules)")
    return 2 if out.infeasible else 0


def _rules_from_json(payload: dict, dataset: Dataset) -> list[PrescriptionRule]:
    rules = []
    for obj in payload["rules"]:
        grouping = Pattern(
            Predicate(p["attribute"], p["op"], p["value"]) for p in obj["grouping"]
        )
        intervention = Pattern(
            Predicate(p["attribute"], p["op"], p["value"]) for p in obj["intervention"]
        )
        for pred in list(grouping.predicates) + list(intervention.predicates):
            dataset.attribute(pred.attribute)  # raises UnknownAttribute on mismatch
        cov = coverage(grouping, dataset)
        rules.append(
            PrescriptionRule(
                grouping=grouping,
                intervention=intervention,
                utility=float(obj["utility"]),
                utility_p=float(obj["utility_p"]),
                utility_np=float(obj["utility_np"]),
                p_value=float(obj["p_value"]),
                coverage=cov,
                benefit=float(obj["benefit"]),
            )
        )
    return rules


def _run_evaluate(args) -> int:
    config_path = Path(args.config)
    values = parse_config_file(config_path)
    dataset, dag, cfg = build_run(values, config_path.parent)
    ruleset_path = Path(args.ruleset)
    if not ruleset_path.exists():
        raise ConfigError(f"ruleset file not found: {ruleset_path}")
    payload = json.loads(ruleset_path.read_text())
    if payload.get("schema_version") != REPORT_SCHEMA_VERSION:
        raise ConfigError(
            f"ruleset schema version {payload.get('schema_version')!r} unsupported"
        )
    rules = _rules_from_json(payload, dataset)
    metrics = ruleset_metrics(rules, dataset, cfg.selection.expu_denominator)
    recomputed = _metrics_json(metrics)
    matches = recomputed == payload.get("metrics")
    out = {
        "schema_version": REPORT_SCHEMA_VERSION,
        "metrics": recomputed,
        "matches_report": matches,
        "rule_count": len(rules),
    }
    print(json.dumps(out, sort_keys=True, indent=2))
    return 0


def _run_oracle_compare(args) -> int:
    config_path = Path(args.config)
    values = parse_config_file(config_path)
    dataset, dag, cfg = build_run(values, config_path.parent)
    from .pipeline import mine_candidates
    from .selection import greedy_select

    candidates = mine_candidates(dataset, dag, cfg, jobs=1)
    if len(candidates) > 20:
        raise TooManyCandidates(
            f"{len(candidates)} candidates; oracle comparison capped at 20"
        )
    l = len(candidates)
    greedy_feasible = True
    try:
        greedy = greedy_select(candidates, dataset, cfg.selection)
        greedy_obj = objective(list(greedy.rules), l, dataset, cfg.selection)
    except Infeasible:
        greedy_feasible = False
        greedy_obj = None
    brute_feasible = True
    try:
        brute = brute_force_select(candidates, dataset, cfg.selection)
        brute_obj = objective(list(brute.rules), l, dataset, cfg.selection)
    except Infeasible:
        brute_feasible = False
        brute_obj = None
    if greedy_feasible and brute_feasible:
        ratio = 1.0 if brute_obj == 0 else greedy_obj / brute_obj
    else:
        ratio = None
    out = {
        "candidate_count": l,
        "greedy_feasible": greedy_feasible,
        "brute_force_feasible": brute_feasible,
        "feasibility_agreement": greedy_feasible == brute_feasible,
        "greedy_objective": greedy_obj,
        "brute_force_objective": brute_obj,
        "objective_ratio": ratio,
    }
    print(json.dumps(out, sort_keys=True, indent=2))
    return 0


def _run_synth(args) -> int:
    effects: dict[tuple[str, str], tuple[float, float]] = {}
    if args.effects:
        try:
            raw = json.loads(args.effects)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"--effects is not valid JSON: {exc}") from None
        for key, val in raw.items():
            attr, _, value = key.partition("=")
            if not value:
                raise ConfigError(f"--effects key {key!r} must look like 'M0=v1'")
            if isinstance(val, (int, float)):
                effects[(attr, value)] = (float(val), float(val))
            else:
                e_p, e_np = val
                effects[(attr, value)] = (float(e_p), float(e_np))
    spec = SyntheticSpec(
        n_rows=args.rows,
        n_immutable=args.imm,
        n_mutable=args.mut,
        categorical_cardinality=args.card,
        effect_map=effects,
        noise_sd=args.noise_sd,
        protected_fraction=args.protected_frac,
        seed=args.seed,
    )
    dataset, dag, truth = generate_synthetic(spec)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    names = [a.name for a in dataset.schema]
    with (out_dir / "data.csv").open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(names)
        decoded = []
        for a in dataset.schema:
            col = dataset.columns[a.name]
            if a.is_categorical:
                decoded.append([a.domain.values[c] for c in col])
            else:
                decoded.append([repr(float(x)) for x in col])
        for row in zip(*decoded):
            writer.writerow(row)
    (out_dir / "dag.dot").write_text(format_dot(dag))
    write_json(out_dir / "truth.json", truth)

    imm = ", ".join(a.name for a in dataset.schema if a.role is Role.IMMUTABLE)
    mut = ", ".join(a.name for a in dataset.schema if a.role is Role.MUTABLE)
    config_lines = [
        "# generated run configuration",
        "dataset = data.csv",
        "dag = dag.dot",
        "outcome = O",
        f"immutable = {imm}",
        f"mutable = {mut}",
        f"protected = I0={value_labels(spec)[0]}",
        "apriori_support = 0.1",
        "alpha = 0.05",
        "min_group_size = 10",
        "report = report.json",
    ]
    (out_dir / "config.txt").write_text("\n".join(config_lines) + "\n")
    print(f"wrote {out_dir}/data.csv dag.dot truth.json config.txt")
    return 0


def main(argv: list[str] | None = None) -> int:
    setup_logging()
    parser = argparse.ArgumentParser(
        prog="faircap",
        description="Mine causal prescription rules under coverage and fairness constraints.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_mine = sub.add_parser("mine", help="run the full mining pipeline")
    p_mine.add_argument("--config", required=True)
    p_mine.add_argument("--exhaustive-interventions", action="store_true")
    p_mine.add_argument("--jobs", type=int, default=0, help="worker count (default from config)")
    p_mine.add_argument("--expu-denominator", choices=("covered", "total"), default=None)
    p_mine.set_defaults(func=_run_mine)

    p_synth = sub.add_parser("synth", help="generate a synthetic world")
    p_synth.add_argument("--rows", type=int, required=True)
    p_synth.add_argument("--imm", type=int, required=True)
    p_synth.add_argument("--mut", type=int, required=True)
    p_synth.add_argument("--card", type=int, default=3)
    p_synth.add_argument("--seed", type=int, default=0)
    p_synth.add_argument("--protected-frac", type=float, default=0.2)
    p_synth.add_argument("--noise-sd", type=float, default=0.1)
    p_synth.add_argument("--effects", default="", help='JSON like {"M0=v1": [0.5, 3.0]}')
    p_synth.add_argument("--out-dir", default="synth_out")
    p_synth.set_defaults(func=_run_synth)

    p_eval = sub.add_parser("evaluate", help="recompute metrics for a mined ruleset")
    p_eval.add_argument("--config", required=True)
    p_eval.add_argument("--ruleset", required=True)
    p_eval.set_defaults(func=_run_evaluate)

    p_oracle = sub.add_parser("oracle-compare", help="greedy vs exhaustive subset search")
    p_oracle.add_argument("--config", required=True)
    p_oracle.set_defaults(func=_run_oracle_compare)

    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except FaircapError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
