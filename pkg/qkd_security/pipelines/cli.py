"""
Command-line front end
simulate | bounds | attack-analyze | codegen | verify | table1
"""

import argparse
import logging
import sys
from typing import Any, Dict, List, Optional

from dotenv import find_dotenv, load_dotenv

from qkd_security.constants import EXIT_CONFIG, EXIT_FAILED, EXIT_OK, TOOL_NAME, TOOL_VERSION
from qkd_security.entity.config_entity import BACKENDS, FORMATS, RunConfig
from qkd_security.logging_exception import QkdError, configure_logging
from qkd_security.pipelines.analysis_pipeline import QkdAnalysisPipeline
from qkd_security.pipelines.verification_pipeline import VerificationSuite
from qkd_security.utils.report import write_csv, write_json

logger = logging.getLogger(__name__)

COMMANDS = ("simulate", "bounds", "attack-analyze", "codegen", "verify", "table1")

# Flags whose value is "unset" (None) so lower configuration layers show through
FLAG_KEYS = [
    "seed", "out", "format", "trials", "n", "p_allowed", "eps_sec", "eps_rel", "r", "m",
    "code", "attack", "mode", "delta_num", "backend", "symmetrize", "loss_tolerant",
    "check_security", "strict", "workers", "suite", "b", "s", "i_t", "j_t", "xi", "log_level",
]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog=TOOL_NAME, description="BB84 / used-bits-BB84 security simulator and analyzer")
    parser.add_argument("--version", action="version", version=f"{TOOL_NAME} {TOOL_VERSION}")
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--config", help="key=value run-config file")
    parser.add_argument("--log-level", dest="log_level")
    parser.add_argument("--seed", type=int)
    parser.add_argument("--out", help="Output directory")
    parser.add_argument("--format", choices=FORMATS)
    parser.add_argument("--trials", type=int)
    parser.add_argument("--workers", type=int)
    parser.add_argument("--n", type=int, help="Information bits (2n qubits are used)")
    parser.add_argument("--p-allowed", dest="p_allowed", type=float)
    parser.add_argument("--eps-sec", dest="eps_sec", type=float)
    parser.add_argument("--eps-rel", dest="eps_rel", type=float)
    parser.add_argument("--r", type=int, help="ECC parity rows for generated codes")
    parser.add_argument("--m", type=int, help="Privacy amplification rows for generated codes")
    parser.add_argument("--code", help="Code file ('n r m' header, then rows)")
    parser.add_argument("--attack", help="Preset name or attack JSON path")
    parser.add_argument("--mode", choices=("used-bits", "full"))
    parser.add_argument("--delta-num", dest="delta_num", type=float)
    parser.add_argument("--backend", choices=BACKENDS)
    parser.add_argument("--symmetrize", action="store_const", const=True)
    parser.add_argument("--loss-tolerant", dest="loss_tolerant", action="store_const", const=True)
    parser.add_argument("--check-security", dest="check_security", action="store_const", const=True)
    parser.add_argument("--relaxed", dest="strict", action="store_const", const=False,
                        help="Relaxed decoding target (d >= t+1) for feasibility and g1")
    parser.add_argument("--suite", help="verify suite name")
    parser.add_argument("--b", help="attack-analyze: Alice's bases")
    parser.add_argument("--s", help="attack-analyze: test/information selector")
    parser.add_argument("--i-t", dest="i_t", help="attack-analyze: test bits sent")
    parser.add_argument("--j-t", dest="j_t", help="attack-analyze: test bits received")
    parser.add_argument("--xi", help="attack-analyze: ECC syndrome")
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    flags: Dict[str, Any] = {key: getattr(args, key, None) for key in FLAG_KEYS}
    flags["command"] = args.command
    return RunConfig.from_sources(args.config, flags)


def dispatch(config: RunConfig) -> int:
    """
    Run one command

    Returns:
        int: Exit code (0 ok, 1 failed check or warning)
    """
    pipeline = QkdAnalysisPipeline(config)
    if config.command == "simulate":
        pipeline.run_simulate()
    elif config.command == "bounds":
        pipeline.run_bounds()
    elif config.command == "attack-analyze":
        report = pipeline.run_attack_analyze()
        if report.get("ordering_holds") is False:
            logger.error("✗ Bound ordering violated")
            return EXIT_FAILED
    elif config.command == "codegen":
        _, meets = pipeline.run_codegen()
        if not meets:
            return EXIT_FAILED
    elif config.command == "table1":
        print(pipeline.run_table1())
    elif config.command == "verify":
        frame = VerificationSuite(config.seed).run(config.suite)
        if config.format == "csv":
            write_csv(pipeline.out_dir / "verify.csv", pipeline.header, frame)
        else:
            write_json(pipeline.out_dir / "verify.json", pipeline.header, {"checks": frame})
        for row in frame.itertuples():
            mark = "✓" if row.ok else "✗"
            note = " (expected fail)" if row.expected == "fail" else ""
            print(f"{mark} {row.suite:16s} {row.check:45s} {row.value:.3e}{note}")
        if not frame["ok"].all():
            return EXIT_FAILED
    return EXIT_OK


def main(argv: Optional[List[str]] = None) -> int:
    load_dotenv(find_dotenv(usecwd=True))
    args = build_parser().parse_args(argv)
    try:
        config = config_from_args(args)
        configure_logging(config.log_level)
    except QkdError as e:
        configure_logging("INFO")
        logger.error(f"✗ Configuration error: {e}")
        return EXIT_CONFIG
    try:
        return dispatch(config)
    except QkdError as e:
        logger.error(f"✗ {config.command} failed: {e}")
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
