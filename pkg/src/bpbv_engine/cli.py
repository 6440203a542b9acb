"""
Command-line driver: builds the law, runs one command, emits a JSON report.

Exit codes: 0 when every check is PASS, 1 when any check is FAIL or
UNDECIDED-AT-CUTOFF, 2 for invalid parameters or violated preconditions,
3 for internal invariant violations.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
import time
from pathlib import Path
from typing import Any, Callable, Dict, Iterable, List, Optional, Sequence, Tuple, Union

from dotenv import load_dotenv

from .bvring import BVRing
from .configuration import COMMANDS, RunConfig
from .dickson import beta, beta_prime, beta_sec, check_all
from .errors import ConfigurationError, InvariantViolation, PreconditionError
from .fgl import (
    AxiomCheck,
    FormalGroupLaw,
    check_axioms,
    check_flavor_identity,
    compare_flavors_mod_p,
    pi_congruence_check,
    pi_decompose,
)
from .models import FAIL, PASS, UNDECIDED, CheckOutcome, CheckRecord, Report
from .slices import MembershipCertificate, NotFound, recheck_certificate
from .storage import StorageManager
from .storage_config import load_storage_config

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_BAD_CONFIG = 2
EXIT_INVARIANT = 3

Checked = Union[CheckOutcome, AxiomCheck, Sequence[CheckOutcome], Sequence[AxiomCheck]]


def as_outcome(check: Union[CheckOutcome, AxiomCheck]) -> CheckOutcome:
    if isinstance(check, AxiomCheck):
        return CheckOutcome(check.name, PASS if check.holds else FAIL, check.detail)
    return check


def membership_outcome(name: str, result: Union[MembershipCertificate, NotFound]) -> CheckOutcome:
    if isinstance(result, NotFound):
        return CheckOutcome(name, UNDECIDED, f"{result.reason} (degree {result.degree}, cutoff {result.cutoff})")
    if not result.verify():
        raise InvariantViolation(f"{name}: certificate does not re-verify")
    return CheckOutcome(name, PASS, "", {"cutoff": result.cutoff}, result.to_payload())


class CheckRun:
    """Runs checks in order and turns their outcomes into report records."""

    def __init__(self, no_timing: bool = False) -> None:
        self.no_timing = no_timing
        self.records: List[CheckRecord] = []

    def check(self, fn: Callable[..., Checked], *args: Any, **kwargs: Any) -> List[CheckOutcome]:
        started = time.perf_counter()
        result = fn(*args, **kwargs)
        elapsed = int((time.perf_counter() - started) * 1000)
        items = list(result) if isinstance(result, (list, tuple)) else [result]
        outcomes = [as_outcome(item) for item in items]
        for outcome in outcomes:
            self.add(outcome, elapsed // max(len(outcomes), 1))
        return outcomes

    def add(self, outcome: CheckOutcome, timing_ms: int = 0) -> None:
        detail = outcome.detail
        if outcome.sizes:
            sizes = ", ".join(f"{key}={value}" for key, value in sorted(outcome.sizes.items()))
            detail = f"{detail} [{sizes}]" if detail else f"[{sizes}]"
        self.records.append(
            CheckRecord(
                name=outcome.name,
                status=outcome.status,
                certificate=outcome.certificate,
                detail=detail,
                timing_ms=0 if self.no_timing else timing_ms,
            )
        )

    @property
    def exit_code(self) -> int:
        return EXIT_OK if all(record.status == PASS for record in self.records) else EXIT_CHECK_FAILED


# ========== commands ==========


def _pi_sum_check(law: FormalGroupLaw) -> AxiomCheck:
    pis = pi_decompose(law.pseries)
    ring = law.pseries.ring
    total = pis[0].scale(law.p)
    for k in range(1, len(pis)):
        total = total + pis[k].mul(ring.v(k, law.D))
    holds = total == law.pseries
    return AxiomCheck("sum_k v_k pi_k = [p](t)", holds, "" if holds else (total - law.pseries).render())


def command_pseries(config: RunConfig, law: FormalGroupLaw, run: CheckRun) -> Dict[str, Any]:
    run.check(check_axioms, law)
    run.check(check_flavor_identity, law)
    run.check(_pi_sum_check, law)
    for k, pi in enumerate(pi_decompose(law.pseries)):
        run.check(pi_congruence_check, pi, k)
    comparison = compare_flavors_mod_p(config.p, config.n, law.D)
    pis = law.pi_series(config.m)
    return {
        "pseries": law.p_series(config.m).render(),
        "pi": {f"pi_{k}": pis[k].render() for k in range(config.m, config.n + 1)},
        "flavors_agree_mod_p": comparison.agree,
    }


def _alpha_formulas(bv: BVRing) -> CheckOutcome:
    computation = bv.alpha_computation
    name = "phi-product = lambda-product"
    if computation.certificate is None:
        return CheckOutcome(name, PASS, "identical as series")
    return membership_outcome(name, computation.certificate)


def _alpha_degree(bv: BVRing) -> CheckOutcome:
    degrees = {bv.alpha().homogeneous_degree(), bv.alpha_prime().homogeneous_degree()}
    holds = degrees == {bv.alpha_degree}
    return CheckOutcome("alpha, alpha' homogeneous", PASS if holds else FAIL, "" if holds else f"degrees {sorted(degrees)}")


def command_alpha(config: RunConfig, law: FormalGroupLaw, run: CheckRun) -> Dict[str, Any]:
    bv = BVRing(law, config.m)
    run.check(_alpha_formulas, bv)
    run.check(_alpha_degree, bv)
    return {
        "alpha": bv.alpha().render(),
        "alpha_prime": bv.alpha_prime().render(),
        "degree": bv.alpha_degree,
        "w": bv.w,
    }


def _v_alpha_prime(bv: BVRing, i: int) -> CheckOutcome:
    return membership_outcome(f"v_{i} alpha' in ([p](x_j))", bv.v_alpha_prime_certificate(i))


def command_verify_main(config: RunConfig, law: FormalGroupLaw, run: CheckRun) -> Dict[str, Any]:
    bv = BVRing(law, config.m)
    run.check(_alpha_formulas, bv)
    run.check(_alpha_degree, bv)
    run.check(lambda: membership_outcome("alpha - alpha' in ([p](x_j))", bv.alpha_difference_certificate()))
    for i in range(config.m, config.n + 1):
        run.check(_v_alpha_prime, bv, i)
    run.check(bv.mod_ideal_check)
    return {"degree": bv.alpha_degree, "w": bv.w}


def command_dickson(config: RunConfig, run: CheckRun) -> Dict[str, Any]:
    p, k, m = config.p, config.effective_k, config.m
    run.check(check_all, p, k, m, seed=config.seed)
    return {
        "beta": beta(p, k).render(),
        "beta_prime": beta_prime(p, k).render(),
        "beta_sec": beta_sec(p, m, k).render(),
    }


def command_filtration(config: RunConfig, law: FormalGroupLaw, run: CheckRun) -> Dict[str, Any]:
    bv = BVRing(law, config.m)
    top = config.effective_k
    slack = config.slices.slack
    for k in range(1, top + 1):
        run.check(bv.theta_check, k)
        run.check(bv.psi_theta_check, k)
    if top == bv.w:
        run.check(bv.top_quotient_check)
    for j in range(1, bv.w + 1):
        run.check(bv.chi_psi_check, j)
    for degree in config.effective_degrees:
        for j in range(top):
            run.check(bv.weierstrass_rank_check, j, degree)
        for j in range(1, bv.w + 1):
            run.check(bv.annihilator_slice_check, j, degree, slack=slack)
        for k in range(1, top + 1):
            run.check(bv.vm_regularity_check, k, degree, slack=slack)
            if k < bv.w:
                run.check(bv.chromatic_depth_check, k, degree, slack=slack)
            run.check(bv.a_ring_recursion_check, k, degree)
    return {
        "psi": {f"psi_{k}": bv.psi(k).render() for k in range(1, top + 1)},
        "theta": {f"theta_{k}": bv.theta(k).render() for k in range(1, top + 1)},
    }


def _collect_certificates(document: Any) -> Iterable[Tuple[str, Dict[str, Any]]]:
    if isinstance(document, dict) and "checks" in document:
        for check in document["checks"]:
            if check.get("certificate"):
                yield check["name"], check["certificate"]
    elif isinstance(document, dict):
        yield "certificate", document
    else:
        raise ConfigurationError("expected a report or a certificate JSON object")


def command_recheck(path: Path, run: CheckRun) -> Dict[str, Any]:
    try:
        document = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigurationError(f"cannot read certificate file {path}: {exc}") from exc
    count = 0
    for name, payload in _collect_certificates(document):
        count += 1
        started = time.perf_counter()
        holds = recheck_certificate(payload)
        elapsed = int((time.perf_counter() - started) * 1000)
        run.add(CheckOutcome(f"recheck: {name}", PASS if holds else FAIL, "" if holds else "nonzero residual"), elapsed)
    return {"certificates": count}


# ========== driver ==========


def run(
    config: RunConfig, storage: Optional[StorageManager] = None, source: Optional[Path] = None
) -> Tuple[int, Report]:
    storage = storage or StorageManager()
    storage_config = load_storage_config(
        {
            "law_cache": {"directory": str(config.cache_dir) if config.cache_dir else None},
            "report_archive": {"url": config.archive_url},
        }
    )
    checks = CheckRun(no_timing=config.no_timing)
    params = config.params()
    started = time.perf_counter()

    if config.command == "recheck":
        if source is None:
            raise ConfigurationError("recheck needs a certificate or report file")
        params = {"command": "recheck", "file": source.name}
        outputs = command_recheck(source, checks)
    elif config.command == "dickson":
        outputs = command_dickson(config, checks)
    else:
        law = storage.load_law(
            storage_config, config.p, config.n, config.law.flavor, config.effective_D, config.effective_N
        )
        handlers = {
            "pseries": command_pseries,
            "alpha": command_alpha,
            "verify-main": command_verify_main,
            "filtration": command_filtration,
        }
        outputs = handlers[config.command](config, law, checks)

    logger.info("%s finished in %.1fs with %d checks", config.command, time.perf_counter() - started, len(checks.records))
    report = Report(params=params, checks=list(checks.records), outputs=outputs)
    storage.archive_report(storage_config, report)
    return checks.exit_code, report


def _common_flags() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--prime", type=int, default=None, help="the prime p")
    common.add_argument("--m", type=int, default=None, help="bottom generator index of E*")
    common.add_argument("--n", type=int, default=None, help="top generator index of E*")
    common.add_argument("--k", type=int, default=None, help="rank of V_k (default w = n+1-m)")
    common.add_argument("--trunc-deg", dest="trunc_deg", type=int, default=None, help="x-adic truncation D")
    common.add_argument("--padic-prec", dest="padic_prec", type=int, default=None, help="N in Z/p^N when m = 0")
    common.add_argument("--flavor", choices=("hazewinkel", "araki"), default=None)
    common.add_argument("--degrees", default=None, help="comma-separated slice degrees")
    common.add_argument("--slack", type=int, default=None, help="kernel lift slack (default p^n)")
    common.add_argument("--seed", type=int, default=None, help="seed for random GL_k samples")
    common.add_argument("--out", default=None, help="report path (default stdout)")
    common.add_argument("--cache-dir", dest="cache_dir", default=None)
    common.add_argument("--log-level", dest="log_level", default=None)
    common.add_argument("--config", dest="config_file", default=None, help="key=value file of defaults")
    common.add_argument("--no-timing", dest="no_timing", action="store_true", default=None)
    common.add_argument("--archive-url", dest="archive_url", default=None)
    return common


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bpbv", description="Exact computations in BP<m,n>*BV_k.")
    subparsers = parser.add_subparsers(dest="command", required=True)
    common = _common_flags()
    help_texts = {
        "pseries": "[p](t), pi_k and the law checks",
        "alpha": "alpha, alpha' and their degree",
        "dickson": "beta, beta', beta''_m and the Dickson identities",
        "verify-main": "alpha = alpha' generates the v_m-torsion, with certificates",
        "filtration": "A(k)* chain and the chi_j slice checks",
        "recheck": "re-verify certificates from a report or certificate file",
    }
    for name in COMMANDS:
        sub = subparsers.add_parser(name, parents=[common], help=help_texts[name])
        if name == "recheck":
            sub.add_argument("file", type=Path)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    load_dotenv()
    args = build_parser().parse_args(argv)
    flags = {key: value for key, value in vars(args).items() if key not in {"config_file", "file"}}
    try:
        config = RunConfig.from_sources(flags, args.config_file)
    except ConfigurationError as exc:
        print(f"bpbv: invalid configuration: {exc}", file=sys.stderr)
        return EXIT_BAD_CONFIG

    logging.basicConfig(level=config.log_level, format="%(asctime)s %(levelname)s %(name)s: %(message)s")
    try:
        code, report = run(config, source=getattr(args, "file", None))
    except (ConfigurationError, PreconditionError) as exc:
        print(f"bpbv: {exc}", file=sys.stderr)
        return EXIT_BAD_CONFIG
    except InvariantViolation as exc:
        logger.error("invariant violation: %s", exc)
        print(f"bpbv: internal invariant violated: {exc}", file=sys.stderr)
        return EXIT_INVARIANT

    text = report.to_json()
    if config.out is None:
        sys.stdout.write(text)
    else:
        config.out.parent.mkdir(parents=True, exist_ok=True)
        config.out.write_text(text, encoding="utf-8")
    return code
