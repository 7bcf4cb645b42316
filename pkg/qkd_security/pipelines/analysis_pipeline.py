"""
QKD Analysis Pipeline - Main Orchestrator
Binds codes, attacks, protocol runs and bounds into the command outputs
"""

import logging
from pathlib import Path
from typing import Any, Dict, Optional, Tuple

import numpy as np
import pandas as pd

from qkd_security.components.analytic import (
    THRESHOLD_MODES,
    bound_report,
    gallager_g,
    feasibility,
    solve_threshold,
    table1,
    table1_display,
    threshold_residual,
)
from qkd_security.components.channel_models import ClassicalChannel, QuantumChannel
from qkd_security.components.evemodel import AttackSpec, conditional_probes, load_attack, symmetrize
from qkd_security.components.gf2code import CodeSpec, random_linear_code, read_code_file, syndrome, write_code_file
from qkd_security.components.proto import ProtocolParams, monte_carlo, run_full_bb84, run_used_bits
from qkd_security.components.secbound import (
    conjugate_basis_error_law,
    eta_spectrum,
    parity_ensembles,
    purify,
    spectrum_report,
)
from qkd_security.constants import MAX_EXACT_PROTOCOL_QUBITS, MAX_SYMMETRIZE_QUBITS
from qkd_security.entity.config_entity import RunConfig
from qkd_security.logging_exception import ConfigError, ImpossibleTranscriptError, ResourceCapError
from qkd_security.utils.bits import bits_to_str, to_bits
from qkd_security.utils.report import write_csv, write_json
from qkd_security.utils.seeding import derive_rng

logger = logging.getLogger(__name__)

ORDERING_TOL = 1e-9


class QkdAnalysisPipeline:
    """
    Main orchestrator that turns a RunConfig into result files
    """

    def __init__(self, config: RunConfig):
        """
        Initialize the pipeline

        Args:
            config (RunConfig): Validated run configuration
        """
        self.config = config
        self.out_dir = Path(config.out)
        self.header = config.header()
        logger.info(f"QKD analysis pipeline initialized (command={config.command}, seed={config.seed})")

    # Shared helpers

    def load_code(self) -> CodeSpec:
        """Code file when given, otherwise a seeded random linear code over n bits"""
        cfg = self.config
        if cfg.code:
            code = read_code_file(cfg.code)
            logger.info(f"✓ Loaded code {code} from {cfg.code}")
            return code
        code = random_linear_code(cfg.n, cfg.r, cfg.m, derive_rng(cfg.seed, "gf2code.rlc"))
        logger.info(f"✓ Drew random linear code {code}")
        return code

    def protocol_params(self, code: CodeSpec) -> ProtocolParams:
        cfg = self.config
        return ProtocolParams(
            n=cfg.n,
            p_allowed=cfg.p_allowed,
            eps_sec=cfg.eps_sec,
            eps_rel=cfg.eps_rel,
            code=code,
            mode=cfg.mode,
            delta_num=cfg.delta_num,
            seed=cfg.seed,
            loss_tolerant=cfg.loss_tolerant,
            check_security=cfg.check_security,
        )

    def load_attack(self, n_qubits: int) -> AttackSpec:
        attack = load_attack(self.config.attack, n_qubits)
        if self.config.symmetrize:
            attack = symmetrize(attack).as_attack()
            logger.info(f"✓ Symmetrized attack {attack.name}")
        return attack

    def make_channel(self, params: ProtocolParams):
        """
        Quantum backend when the attack fits the caps, else the preset's
        classical shadow (backend=auto)
        """
        cfg = self.config
        qubits = params.n_full_qubits if params.mode == "full" else 2 * params.n
        if cfg.backend in ("auto", "quantum"):
            try:
                if qubits > MAX_EXACT_PROTOCOL_QUBITS:
                    raise ResourceCapError(f"{qubits} qubits exceed the exact-simulation cap {MAX_EXACT_PROTOCOL_QUBITS}")
                return QuantumChannel(self.load_attack(qubits))
            except ResourceCapError as e:
                if cfg.backend == "quantum":
                    raise
                logger.warning(f"Quantum backend unavailable ({e}); using the classical model of '{cfg.attack}'")
        if cfg.symmetrize:
            raise ConfigError("--symmetrize needs the quantum backend")
        return ClassicalChannel.from_preset(cfg.attack)

    def _write(self, stem: str, payload: Dict[str, Any], frame: Optional[pd.DataFrame] = None) -> Path:
        if self.config.format == "csv" and frame is not None:
            return write_csv(self.out_dir / f"{stem}.csv", self.header, frame)
        return write_json(self.out_dir / f"{stem}.json", self.header, payload)

    # Commands

    def run_simulate(self) -> Dict[str, Any]:
        """
        One recorded transcript plus the Monte Carlo summary

        Returns:
            Dict: Aggregates of the Monte Carlo run
        """
        cfg = self.config
        code = self.load_code()
        params = self.protocol_params(code)
        channel = self.make_channel(params)
        logger.info(f"Simulating {cfg.trials} {cfg.mode} run(s) over channel '{channel.name}'")

        runner = run_full_bb84 if params.mode == "full" else run_used_bits
        transcript = runner(params, channel, derive_rng(cfg.seed, "proto.transcript"))
        write_json(self.out_dir / "transcript.json", self.header, transcript.to_json())

        summary = monte_carlo(params, channel, cfg.trials, workers=cfg.workers)
        aggregate = {"channel": channel.name, "code": repr(code), **summary.aggregate()}
        self._write("summary", aggregate, summary.frame)
        if cfg.format == "csv":
            write_json(self.out_dir / "summary_aggregate.json", self.header, aggregate)
        logger.info(f"✓ Simulation complete: pass frequency {summary.pass_frequency:.4f}")
        return aggregate

    def run_bounds(self) -> Dict[str, Any]:
        """Closed-form bounds for the configured parameters plus the threshold solutions"""
        cfg = self.config
        r, m = cfg.r, cfg.m
        if cfg.code:
            code = read_code_file(cfg.code)
            r, m = code.r, code.m
        report = bound_report(cfg.n, cfg.p_allowed, cfg.eps_sec, cfg.eps_rel, m, r, strict=cfg.strict)
        thresholds = {mode: solve_threshold(mode) for mode in THRESHOLD_MODES}
        residuals = {mode: threshold_residual(mode, p) for mode, p in thresholds.items()}
        payload = {"report": report.to_dict(), "thresholds": thresholds, "threshold_residuals": residuals}
        if not report.feasible:
            logger.warning(f"✗ Parameters are infeasible: n={cfg.n}, p_allowed={cfg.p_allowed}, R_secret={report.R_secret:.4f}")
        self._write("bounds", payload, pd.DataFrame([report.to_dict()]))
        logger.info(f"✓ Bounds: h={report.h:.4e}, eve_bound={report.eve_bound:.4e}")
        return payload

    def _context(self, two_n: int) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        """Configured (b, s, i_T, j_T), or a seeded draw with j_T = i_T"""
        cfg = self.config
        n = two_n // 2
        rng = derive_rng(cfg.seed, "cli.context")
        b = to_bits(cfg.b, two_n) if cfg.b else rng.integers(0, 2, two_n, dtype=np.uint8)
        if cfg.s:
            s = to_bits(cfg.s, two_n)
        else:
            s = np.zeros(two_n, dtype=np.uint8)
            s[rng.permutation(two_n)[:n]] = 1
        if int(s.sum()) != n:
            raise ConfigError(f"Selection string must have {n} ones, got {bits_to_str(s)}")
        i_T = to_bits(cfg.i_t, n) if cfg.i_t else rng.integers(0, 2, n, dtype=np.uint8)
        j_T = to_bits(cfg.j_t, n) if cfg.j_t else i_T.copy()
        return b, s, i_T, j_T

    def run_attack_analyze(self) -> Dict[str, Any]:
        """
        Spectrum dump for one attack and context: d_l^2, every SD bound, the
        ordering check and the conjugate-basis error law comparison
        """
        cfg = self.config
        two_n = 2 * cfg.n
        if two_n > MAX_SYMMETRIZE_QUBITS:
            raise ResourceCapError(f"attack-analyze supports 2n <= {MAX_SYMMETRIZE_QUBITS}, got {two_n}")
        code = self.load_code()
        attack = self.load_attack(two_n)
        b, s, i_T, j_T = self._context(two_n)
        try:
            fam = conditional_probes(attack, b, s, i_T, j_T)
        except ImpossibleTranscriptError as e:
            raise ConfigError(f"Context has probability zero under '{attack.name}': {e}") from e
        purified = purify(fam)
        spec = eta_spectrum(purified)
        xi = to_bits(cfg.xi, code.r) if cfg.xi else syndrome(code.P_C, derive_rng(cfg.seed, "cli.xi").integers(0, 2, code.n))

        ens = parity_ensembles(purified, code, xi) if code.m else None
        report = spectrum_report(spec, code, ens, {**purified.context, "xi": bits_to_str(xi)})
        law = conjugate_basis_error_law(attack, b, s, i_T, j_T)
        report["conjugate_law_residual"] = float(np.max(np.abs(law - spec.d2)))
        report["purification_residual"] = spec.residual
        bounds = report["bounds"]
        if ens is not None:
            chain = [bounds["helstrom"], bounds["exact"], bounds["tight_clamped"], bounds["loose"]]
            report["ordering_holds"] = all(a <= b_ + ORDERING_TOL for a, b_ in zip(chain, chain[1:]))
        self._write("spectrum", report, pd.DataFrame(
            [{"l": k, "d2": v} for k, v in report["d2"].items()]))
        logger.info(f"✓ Spectrum of {attack.name}: eta orthogonality {report['eta_orthogonality']:.2e}")
        return report

    def run_codegen(self) -> Tuple[Dict[str, Any], bool]:
        """
        Seeded random ECC+PA code with its distance certificate

        Returns:
            Tuple[Dict, bool]: certificate and whether v_hat meets 2n(p_allowed + eps_sec)
        """
        cfg = self.config
        code = random_linear_code(cfg.n, cfg.r, cfg.m, derive_rng(cfg.seed, "gf2code.rlc"))
        self.out_dir.mkdir(parents=True, exist_ok=True)
        path = write_code_file(code, self.out_dir / "code.txt")
        required = 2.0 * cfg.n * (cfg.p_allowed + cfg.eps_sec)
        feas = feasibility(cfg.n, cfg.p_allowed, cfg.eps_sec, cfg.eps_rel, code.r / code.n, code.m / code.n, cfg.strict)
        certificate: Dict[str, Any] = {"code_file": str(path), "n": code.n, "r": code.r, "m": code.m,
                                       "required_v_hat": required}
        try:
            certificate.update({"kind": "exact", "d": code.d, "d_perp": code.d_perp, "v_hat": code.v_hat})
            meets = code.m == 0 or (code.v_hat is not None and code.v_hat >= required)
        except ResourceCapError:
            certificate.update({
                "kind": "probabilistic",
                "g1": gallager_g(code.n, code.r, feas.delta),
                "g2": gallager_g(code.n, code.n - code.r - code.m, feas.delta_perp),
            })
            meets = feas.feasible
        certificate["meets_requirement"] = bool(meets)
        self._write("certificate", certificate, pd.DataFrame([certificate]))
        if meets:
            logger.info(f"✓ Code certificate ({certificate['kind']}) written")
        else:
            logger.warning(f"✗ Code does not meet v_hat >= {required:.2f}")
        return certificate, bool(meets)

    def run_table1(self) -> str:
        """Reliability and rate tables as numbers and as printed text"""
        table = table1()
        text = table1_display(table)
        payload = {
            "reliability": table.reliability_text.to_dict(orient="index"),
            "rates": table.rates_text.to_dict(orient="index"),
            "reliability_values": table.reliability.to_dict(orient="index"),
            "rate_values": table.rates.to_dict(orient="index"),
        }
        if self.config.format == "csv":
            write_csv(self.out_dir / "table1_reliability.csv", self.header, table.reliability_text, index=True)
            write_csv(self.out_dir / "table1_rates.csv", self.header, table.rates_text, index=True)
        else:
            write_json(self.out_dir / "table1.json", self.header, payload)
        return text
