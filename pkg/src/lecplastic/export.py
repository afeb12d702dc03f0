"""JSON export of chain-shift operators together with their verification report."""

from __future__ import annotations

from dataclasses import dataclass

from .operator import ChainShiftOperator, TruncatedOperator, VerificationReport
from .plasticity import FORMAT_VERSION, WitnessSet, witness_from_dict, witness_to_dict
from .profile import format_rational, parse_rational


@dataclass(frozen=True)
class OperatorExport:
    profile: str
    witness: WitnessSet
    chain: tuple  # (k, n_k, a(n_k)) triples
    dimension: int
    matrix: tuple  # row-major entries
    report: VerificationReport

    def to_dict(self) -> dict:
        return {
            "format_version": FORMAT_VERSION,
            "profile": self.profile,
            "witness": witness_to_dict(self.witness),
            "chain": [{"k": k, "n_k": n, "value": format_rational(v)} for k, n, v in self.chain],
            "matrix": {"dimension": self.dimension, "data": list(self.matrix)},
            "report": self.report.to_dict(),
        }

    @classmethod
    def from_dict(cls, d) -> "OperatorExport":
        return cls(
            profile=d["profile"],
            witness=witness_from_dict(d["witness"]),
            chain=tuple((c["k"], c["n_k"], parse_rational(c["value"])) for c in d["chain"]),
            dimension=d["matrix"]["dimension"],
            matrix=tuple(d["matrix"]["data"]),
            report=VerificationReport.from_dict(d["report"]),
        )


def export_operator(op: ChainShiftOperator, t: TruncatedOperator, report: VerificationReport,
                    K: int) -> OperatorExport:
    return OperatorExport(
        profile=op.profile.name,
        witness=op.witness,
        chain=tuple(op.chain(K)),
        dimension=t.dimension,
        matrix=tuple(float(x) for x in t.matrix.ravel()),
        report=report,
    )
