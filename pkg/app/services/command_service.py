"""
Command payloads shared by the CLI and the HTTP routes.

Every command takes a RunConfig and returns a JSON-ready dict. Tabular
commands (qfunc, wavefunction, and state/verify when written as CSV) carry
their rows so the CLI can render either format from the same payload.
"""

import logging
import os
from typing import Any, Dict, List, Sequence, Tuple

import numpy as np
from dotenv import load_dotenv

from app.errors import ClosedFormDomainError
from app.models import (
    Command, F1Problem, F2Problem, ModelKind, OverlapKind, OverlapValue, Parity, RunConfig,
    TruncationSpec, VerificationSettings
)
from app.services.pair_mode_service import pair_mode_service
from app.services.single_mode_service import single_mode_service
from app.services.verification_service import verification_service
from app.utils import complex_pair, state_to_payload

# Load environment variables
load_dotenv()

logger = logging.getLogger(__name__)

PARITIES = (Parity.EVEN, Parity.ODD)


class CommandService:
    """Builds command payloads from a RunConfig"""

    def __init__(self):
        self.default_dim = int(os.getenv("EIGEN_DEFAULT_DIM", "256"))
        self.default_pair_dim = int(os.getenv("EIGEN_DEFAULT_PAIR_DIM", "48"))

    # ------------------------------------------------------------------
    # Problems
    # ------------------------------------------------------------------

    def trunc(self, cfg: RunConfig) -> TruncationSpec:
        dim = cfg.dim or (self.default_dim if cfg.model == ModelKind.F1 else self.default_pair_dim)
        return TruncationSpec(dim=dim, guard=cfg.guard)

    def f1_problem(self, cfg: RunConfig) -> F1Problem:
        if cfg.c_even is None and cfg.c_odd is None:
            c_even, c_odd = (1, 0) if cfg.parity == Parity.EVEN else (0, 1)
        else:
            c_even, c_odd = cfg.c_even or 0, cfg.c_odd or 0
        return F1Problem(beta=cfg.beta, lam=cfg.lam, c_even=c_even, c_odd=c_odd, trunc=self.trunc(cfg))

    def f2_problem(self, cfg: RunConfig) -> F2Problem:
        return F2Problem(
            beta=cfg.beta, lam=cfg.lam, family_weights={family: 1 for family in cfg.families}, trunc=self.trunc(cfg)
        )

    def _header(self, cfg: RunConfig) -> Dict[str, Any]:
        return {
            "command": cfg.command.value,
            "model": cfg.model.value,
            "beta": complex_pair(cfg.beta),
            "lambda": complex_pair(cfg.lam),
        }

    # ------------------------------------------------------------------
    # Commands
    # ------------------------------------------------------------------

    def state(self, cfg: RunConfig) -> Dict[str, Any]:
        if cfg.model == ModelKind.F1:
            prob = self.f1_problem(cfg)
            state = single_mode_service.eigenstate(prob)
            residual = single_mode_service.interior_residual(prob, state)
            weights = {parity.value: complex_pair(prob.weight(parity)) for parity in PARITIES}
            gauge = "<0|psi,e> = 1 and <1|psi,o> = 1, weighted by c_even and c_odd"
        else:
            prob = self.f2_problem(cfg)
            state = pair_mode_service.eigenstate(prob)
            residual = pair_mode_service.interior_residual(prob, state)
            weights = {family.label: complex_pair(weight) for family, weight in prob.families}
            gauge = "coefficient 1 on each family's base state |0,p> or |q,0>"

        return {
            **self._header(cfg),
            "truncation": {"dim": prob.trunc.dim, "guard": prob.trunc.guard},
            "weights": weights,
            "gauge": gauge,
            "interior_residual": residual,
            "state": state_to_payload(state),
        }

    def _combine(self, parts: Sequence[Tuple[str, complex, OverlapValue]]) -> Dict[str, Any]:
        total = sum(weight * part.value for _, weight, part in parts)
        notes = [f"{label}: {part.note}" for label, _, part in parts if part.note]
        return {
            "value": complex_pair(total),
            "valid": all(part.valid for _, _, part in parts),
            "converged": all(part.converged for _, _, part in parts),
            "components": {label: complex_pair(part.value) for label, _, part in parts},
            "notes": notes,
        }

    def overlap(self, cfg: RunConfig) -> Dict[str, Any]:
        payload = {**self._header(cfg), "kind": cfg.kind.value}
        if cfg.model == ModelKind.F1:
            prob = self.f1_problem(cfg)
            weighted = [(p, prob.weight(p)) for p in PARITIES if prob.weight(p) != 0]
            if cfg.kind == OverlapKind.NUMBER:
                value = single_mode_service.overlap_number(prob, cfg.n)
                parity = Parity.EVEN if cfg.n % 2 == 0 else Parity.ODD
                parts = [(parity.value, prob.weight(parity), OverlapValue(value=value, valid=True))]
                payload["n"] = cfg.n
            elif cfg.kind == OverlapKind.SQUEEZED:
                parts = [(p.value, w, single_mode_service.overlap_squeezed(prob, cfg.point, p)) for p, w in weighted]
                payload["mu"] = complex_pair(cfg.point)
            else:
                parts = [(p.value, w, single_mode_service.overlap_coherent(prob, cfg.point, p)) for p, w in weighted]
                payload["alpha"] = complex_pair(cfg.point)
        else:
            prob = self.f2_problem(cfg)
            if cfg.kind == OverlapKind.NUMBER:
                if len(prob.families) != 1:
                    raise ValueError("number overlaps of pair states take exactly one --family")
                family, weight = prob.families[0]
                value = pair_mode_service.overlap_number(prob, cfg.n, family)
                parts = [(family.label, weight, OverlapValue(value=value, valid=True))]
                payload["n"] = cfg.n
            elif cfg.kind == OverlapKind.SQUEEZED:
                parts = [
                    (f.label, w, pair_mode_service.overlap_caves_schumaker(prob, cfg.point, f)) for f, w in prob.families
                ]
                payload["mu"] = complex_pair(cfg.point)
            else:
                parts = [
                    (f.label, w, pair_mode_service.overlap_coherent(prob, cfg.point, cfg.delta, f))
                    for f, w in prob.families
                ]
                payload["gamma"] = complex_pair(cfg.point)
                payload["delta"] = complex_pair(cfg.delta)
        return {**payload, **self._combine(parts)}

    def qfunc(self, cfg: RunConfig) -> Dict[str, Any]:
        if cfg.grid is None:
            raise ValueError("qfunc needs a grid ('min:max:steps')")
        if cfg.beta == 0:
            raise ClosedFormDomainError(
                "the Q-function uses the closed-form overlaps, which need beta != 0; "
                "use the state command (series construction) at beta = 0"
            )
        real_axis = cfg.grid.values()
        imag_axis = (cfg.grid_im or cfg.grid).values()

        rows: List[List[float]] = []
        if cfg.model == ModelKind.F1:
            prob = self.f1_problem(cfg)
            columns = ["alpha_re", "alpha_im", "q"]
            for re in real_axis:
                for im in imag_axis:
                    rows.append([float(re), float(im), single_mode_service.q_function(prob, complex(re, im))])
        else:
            prob = self.f2_problem(cfg)
            delta = complex(cfg.delta)
            columns = ["gamma_re", "gamma_im", "delta_re", "delta_im", "q"]
            for re in real_axis:
                for im in imag_axis:
                    q = pair_mode_service.q_function(prob, complex(re, im), delta)
                    rows.append([float(re), float(im), delta.real, delta.imag, q])

        logger.info(f"Q-function grid of {len(rows)} points for model {cfg.model.value}")
        return {**self._header(cfg), "columns": columns, "rows": rows}

    def wavefunction(self, cfg: RunConfig) -> Dict[str, Any]:
        if cfg.model != ModelKind.F1:
            raise ValueError("position wavefunctions are available for model f1 only")
        if cfg.grid is None:
            raise ValueError("wavefunction needs an x grid ('min:max:steps')")
        prob = self.f1_problem(cfg)
        xs = cfg.grid.values()
        weighted = [(p, prob.weight(p)) for p in PARITIES if prob.weight(p) != 0]

        if len(weighted) == 1:
            ratios = single_mode_service.wavefunction_ratio(prob, xs, cfg.x0, weighted[0][0])
        else:
            def value(x: float) -> complex:
                return sum(w * single_mode_service.wavefunction(prob, x, p) for p, w in weighted)

            reference = value(cfg.x0)
            if reference == 0:
                raise ValueError(f"wavefunction vanishes at the reference point x0={cfg.x0}")
            ratios = np.array([value(float(x)) / reference for x in xs])

        rows = [[float(x), float(r.real), float(r.imag)] for x, r in zip(xs, ratios)]
        return {**self._header(cfg), "x0": cfg.x0, "columns": ["x", "re", "im"], "rows": rows}

    def verify_settings(self, cfg: RunConfig) -> VerificationSettings:
        settings = verification_service.default_settings.model_dump()
        if cfg.dim is not None:
            settings.update(single_dim=cfg.dim, wave_dim=cfg.dim, single_guard=max(1, cfg.dim // 16))
        if cfg.guard is not None:
            settings["single_guard"] = cfg.guard
        if cfg.pair_dim is not None:
            settings.update(pair_dim=cfg.pair_dim, pair_guard=max(1, cfg.pair_dim // 6))
        return VerificationSettings(**settings)

    def verify(self, cfg: RunConfig) -> Dict[str, Any]:
        settings = self.verify_settings(cfg)
        if cfg.expect_fail:
            report = verification_service.run_negative_control(settings)
        else:
            report = verification_service.run(settings)
        return {"command": cfg.command.value, "expect_fail": cfg.expect_fail, **report.model_dump(mode="json")}

    def run(self, cfg: RunConfig) -> Dict[str, Any]:
        handlers = {
            Command.STATE: self.state,
            Command.OVERLAP: self.overlap,
            Command.QFUNC: self.qfunc,
            Command.WAVEFUNCTION: self.wavefunction,
            Command.VERIFY: self.verify,
        }
        return handlers[cfg.command](cfg)

    # ------------------------------------------------------------------
    # Tables
    # ------------------------------------------------------------------

    def table(self, payload: Dict[str, Any]) -> Tuple[List[str], List[List[Any]]]:
        """CSV view of a payload"""
        if "rows" in payload:
            return payload["columns"], payload["rows"]
        if "state" in payload:
            state = payload["state"]
            dim = state["dim"]
            if state["modes"] == 1:
                return ["n", "re", "im"], [[n, re, im] for n, (re, im) in enumerate(state["coeffs"])]
            return ["n_a", "n_b", "re", "im"], [
                [index // dim, index % dim, re, im] for index, (re, im) in enumerate(state["coeffs"])
            ]
        if "criteria" in payload:
            return ["criterion", "name", "value", "tolerance", "passed", "detail"], [
                [c["criterion"], c["name"], c["value"], c["tolerance"], c["passed"], c["detail"]]
                for c in payload["criteria"]
            ]
        if "value" in payload:
            value = payload["value"] or [float("nan"), float("nan")]
            return ["re", "im", "valid"], [[value[0], value[1], payload["valid"]]]
        raise ValueError(f"command '{payload.get('command')}' has no table form")


command_service = CommandService()
